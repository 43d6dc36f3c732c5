use crate::expr::DecisionContext;

use super::Job;

/// What a rule may observe about a machine.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MachineView {
    pub queue_len: usize,
    /// Sum of processing times (on this machine) of queued operations.
    pub queued_work: f64,
    /// Time the machine finishes its current operation, or the time it
    /// became idle.
    pub ready_time: f64,
}

/// What a rule may observe about one operation on one candidate machine.
#[derive(Clone, Copy, Debug)]
pub struct OpView<'a> {
    pub job: &'a Job,
    pub op: usize,
    /// When routing: the time the operation became ready. When sequencing:
    /// the time it joined the machine's queue.
    pub ready_time: f64,
    /// Processing time on the candidate machine.
    pub proc_time: f64,
    /// When routing: travel time to the candidate machine. When sequencing:
    /// the travel time the operation incurred to get there.
    pub transit: f64,
}

fn build(t: f64, machine: &MachineView, op: &OpView<'_>) -> DecisionContext {
    let job = op.job;
    let wkr = job.remaining_work[op.op];
    let npt = job.ops.get(op.op + 1).map_or(0.0, |next| next.median_time);
    let rdd = job.due - t;
    DecisionContext {
        niq: machine.queue_len as f64,
        wiq: machine.queued_work,
        mwt: t - machine.ready_time,
        pt: op.proc_time,
        npt,
        owt: t - op.ready_time,
        wkr,
        nor: (job.ops.len() - op.op) as f64,
        rdd,
        slack: rdd - wkr,
        w: job.weight,
        tis: t - job.release,
        trant: op.transit,
    }
}

/// Features for scoring `op` on a candidate machine at routing time `t`.
pub fn build_routing_context(t: f64, machine: &MachineView, op: &OpView<'_>) -> DecisionContext {
    build(t, machine, op)
}

/// Features for scoring a queued `op` when `machine` frees up at `t`.
pub fn build_sequencing_context(t: f64, machine: &MachineView, op: &OpView<'_>) -> DecisionContext {
    build(t, machine, op)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::Operation;

    fn job() -> Job {
        Job::new(
            0,
            100.0,
            2.0,
            400.0,
            vec![
                Operation::new(440.0, vec![(0, 44.0), (1, 40.0), (2, 30.0)]),
                Operation::new(440.0, vec![(3, 44.0)]),
            ],
        )
    }

    #[test]
    fn machine_ready_now_gives_zero_wait() {
        let j = job();
        let m = MachineView { queue_len: 0, queued_work: 0.0, ready_time: 250.0 };
        let op = OpView { job: &j, op: 0, ready_time: 250.0, proc_time: 44.0, transit: 7.0 };
        let ctx = build_routing_context(250.0, &m, &op);
        assert_eq!(ctx.mwt, 0.0);
        assert_eq!(ctx.owt, 0.0);
        assert_eq!(ctx.trant, 7.0);
    }

    #[test]
    fn fresh_job_has_zero_time_in_system() {
        let j = job();
        let m = MachineView { queue_len: 3, queued_work: 120.0, ready_time: 90.0 };
        let op = OpView { job: &j, op: 0, ready_time: 100.0, proc_time: 40.0, transit: 0.0 };
        let ctx = build_routing_context(100.0, &m, &op);
        assert_eq!(ctx.tis, 0.0);
        assert_eq!(ctx.owt, 0.0);
        assert_eq!(ctx.niq, 3.0);
        assert_eq!(ctx.wiq, 120.0);
        assert_eq!(ctx.mwt, 10.0);
        assert_eq!(ctx.nor, 2.0);
        assert_eq!(ctx.npt, 44.0);
        assert_eq!(ctx.wkr, 40.0 + 44.0);
        assert_eq!(ctx.rdd, 300.0);
        assert_eq!(ctx.slack, 300.0 - 84.0);
        assert_eq!(ctx.w, 2.0);
    }

    #[test]
    fn last_operation() {
        let j = job();
        let m = MachineView { queue_len: 1, queued_work: 44.0, ready_time: 500.0 };
        let op = OpView { job: &j, op: 1, ready_time: 480.0, proc_time: 44.0, transit: 12.0 };
        let ctx = build_sequencing_context(500.0, &m, &op);
        assert_eq!((ctx.wkr, ctx.nor, ctx.npt), (44.0, 1.0, 0.0));
        assert_eq!(ctx.owt, 20.0);
        assert_eq!(ctx.rdd, -100.0);
        assert!(ctx.is_finite());
    }
}
