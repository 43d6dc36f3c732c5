use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::expr::Expr;
use crate::rules::RulePair;

use super::context::{build_routing_context, build_sequencing_context, MachineView, OpView};
use super::{compute_objectives, CompletedJob, Instance, Location, ObjectiveVector, SimError};

#[derive(Clone, Copy, Debug, Default)]
pub struct SimOptions {
    /// Keep the per-operation schedule and the event log.
    pub record_trace: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScheduledOp {
    pub job: usize,
    pub op: usize,
    pub machine: usize,
    /// Time the operation became ready for routing.
    pub ready: f64,
    /// Time it joined the machine queue.
    pub arrival: f64,
    pub start: f64,
    pub end: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EventKind {
    Release,
    Route,
    Arrive,
    Start,
    Complete,
}

impl EventKind {
    pub fn as_str(self) -> &'static str {
        match self {
            EventKind::Release => "release",
            EventKind::Route => "route",
            EventKind::Arrive => "arrive",
            EventKind::Start => "start",
            EventKind::Complete => "complete",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceEvent {
    pub time: f64,
    pub machine: Option<usize>,
    pub job: usize,
    pub op: Option<usize>,
    pub kind: EventKind,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SimOutcome {
    pub objectives: ObjectiveVector,
    /// Counted jobs, in job-id order.
    pub completed: Vec<CompletedJob>,
    /// Mean machine busy fraction between the first counted release and
    /// the last release.
    pub utilization: f64,
    pub machine_utilization: Vec<f64>,
    pub end_time: f64,
    pub routing_decisions: usize,
    pub sequencing_decisions: usize,
    pub schedule: Vec<ScheduledOp>,
    pub events: Vec<TraceEvent>,
}

impl SimOutcome {
    pub fn write_trace_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "time,machine,job,op,event")?;
        for e in &self.events {
            let m = e.machine.map(|m| m.to_string()).unwrap_or_default();
            let op = e.op.map(|o| o.to_string()).unwrap_or_default();
            writeln!(out, "{},{},{},{},{}", e.time, m, e.job, op, e.kind.as_str())?;
        }
        Ok(())
    }
}

enum Event {
    Release(usize),
    Arrive { job: usize, op: usize, machine: usize, ready: f64, transit: f64 },
    Finish(usize),
}

struct Pending {
    time: f64,
    seq: u64,
    event: Event,
}

impl PartialEq for Pending {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Pending {}
impl PartialOrd for Pending {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Pending {
    // Reversed: BinaryHeap is a max-heap, we pop the earliest (time, seq).
    fn cmp(&self, other: &Self) -> Ordering {
        other.time.total_cmp(&self.time).then_with(|| other.seq.cmp(&self.seq))
    }
}

struct Queued {
    job: usize,
    op: usize,
    ready: f64,
    arrival: f64,
    transit: f64,
    proc: f64,
}

struct Running {
    job: usize,
    op: usize,
    ready: f64,
    arrival: f64,
    start: f64,
}

#[derive(Default)]
struct Machine {
    queue: Vec<Queued>,
    queued_work: f64,
    current: Option<Running>,
    ready_time: f64,
    busy_in_window: f64,
}

impl Machine {
    fn view(&self) -> MachineView {
        MachineView {
            queue_len: self.queue.len(),
            queued_work: self.queued_work,
            ready_time: self.ready_time,
        }
    }
}

struct Engine<'a> {
    inst: &'a Instance,
    rules: &'a RulePair,
    heap: BinaryHeap<Pending>,
    seq: u64,
    machines: Vec<Machine>,
    completion: Vec<Option<f64>>,
    window: (f64, f64),
    record: bool,
    schedule: Vec<ScheduledOp>,
    events: Vec<TraceEvent>,
    routing_decisions: usize,
    sequencing_decisions: usize,
}

fn score(rule: &Expr, ctx: &crate::expr::DecisionContext) -> Result<f64, SimError> {
    let v = rule.evaluate(ctx);
    if v.is_finite() {
        Ok(v)
    } else {
        Err(SimError::NonFinitePriority)
    }
}

impl<'a> Engine<'a> {
    fn push(&mut self, time: f64, event: Event) {
        self.seq += 1;
        self.heap.push(Pending { time, seq: self.seq, event });
    }

    fn log(&mut self, time: f64, machine: Option<usize>, job: usize, op: Option<usize>, kind: EventKind) {
        if self.record {
            self.events.push(TraceEvent { time, machine, job, op, kind });
        }
    }

    /// Lowest routing score wins; ties go to the lower machine index.
    fn route(&mut self, job_id: usize, op_idx: usize, t: f64, from: Location) -> Result<(), SimError> {
        let job = &self.inst.jobs[job_id];
        let op = &job.ops[op_idx];
        let (machine, transit) = if op.options.len() == 1 {
            let m = op.options[0].0;
            (m, self.inst.travel_time(from, m))
        } else {
            self.routing_decisions += 1;
            let mut best: Option<(f64, usize, f64)> = None;
            for &(m, p) in &op.options {
                let transit = self.inst.travel_time(from, m);
                let view = OpView { job, op: op_idx, ready_time: t, proc_time: p, transit };
                let ctx = build_routing_context(t, &self.machines[m].view(), &view);
                let s = score(&self.rules.routing, &ctx)?;
                if best.is_none_or(|(bs, _, _)| s < bs) {
                    best = Some((s, m, transit));
                }
            }
            let (_, m, transit) = best.expect("non-empty options");
            (m, transit)
        };
        self.log(t, Some(machine), job_id, Some(op_idx), EventKind::Route);
        self.push(t + transit, Event::Arrive { job: job_id, op: op_idx, machine, ready: t, transit });
        Ok(())
    }

    /// Starts the best queued operation if `m` is idle. Lowest sequencing
    /// score wins; ties go to the earlier queue arrival, then the lower job id.
    fn dispatch(&mut self, m: usize, t: f64) -> Result<(), SimError> {
        if self.machines[m].current.is_some() || self.machines[m].queue.is_empty() {
            return Ok(());
        }
        let pick = if self.machines[m].queue.len() == 1 {
            0
        } else {
            self.sequencing_decisions += 1;
            let view = self.machines[m].view();
            let mut best: Option<(f64, f64, usize, usize)> = None;
            for (i, q) in self.machines[m].queue.iter().enumerate() {
                let job = &self.inst.jobs[q.job];
                let ov = OpView { job, op: q.op, ready_time: q.arrival, proc_time: q.proc, transit: q.transit };
                let ctx = build_sequencing_context(t, &view, &ov);
                let s = score(&self.rules.sequencing, &ctx)?;
                let better = match best {
                    None => true,
                    Some((bs, ba, bj, _)) => s
                        .total_cmp(&bs)
                        .then(q.arrival.total_cmp(&ba))
                        .then(q.job.cmp(&bj))
                        == Ordering::Less,
                };
                if better {
                    best = Some((s, q.arrival, q.job, i));
                }
            }
            best.expect("non-empty queue").3
        };
        let machine = &mut self.machines[m];
        let q = machine.queue.swap_remove(pick);
        machine.queued_work = if machine.queue.is_empty() { 0.0 } else { machine.queued_work - q.proc };
        let end = t + q.proc;
        machine.ready_time = end;
        let (ws, we) = self.window;
        machine.busy_in_window += (end.min(we) - t.max(ws)).max(0.0);
        machine.current = Some(Running {
            job: q.job,
            op: q.op,
            ready: q.ready,
            arrival: q.arrival,
            start: t,
        });
        self.log(t, Some(m), q.job, Some(q.op), EventKind::Start);
        self.push(end, Event::Finish(m));
        Ok(())
    }
}

/// Runs the rule pair over the instance.
pub fn simulate(rules: &RulePair, inst: &Instance) -> Result<ObjectiveVector, SimError> {
    simulate_with(rules, inst, SimOptions::default()).map(|o| o.objectives)
}

pub fn simulate_with(rules: &RulePair, inst: &Instance, opts: SimOptions) -> Result<SimOutcome, SimError> {
    inst.validate()?;
    let counted = inst.counted_jobs();
    let window = (inst.jobs[counted.start].release, inst.jobs[counted.end - 1].release);
    let mut eng = Engine {
        inst,
        rules,
        heap: BinaryHeap::with_capacity(inst.jobs.len() * 2),
        seq: 0,
        machines: (0..inst.num_machines()).map(|_| Machine::default()).collect(),
        completion: vec![None; inst.jobs.len()],
        window,
        record: opts.record_trace,
        schedule: Vec::new(),
        events: Vec::new(),
        routing_decisions: 0,
        sequencing_decisions: 0,
    };
    for job in &inst.jobs {
        eng.push(job.release, Event::Release(job.id));
    }
    let mut remaining = counted.len();
    let mut now = 0.0;
    while remaining > 0 {
        let Some(Pending { time: t, event, .. }) = eng.heap.pop() else {
            return Err(SimError::Stalled { time: now, remaining });
        };
        now = t;
        match event {
            Event::Release(j) => {
                eng.log(t, None, j, None, EventKind::Release);
                eng.route(j, 0, t, Location::Depot)?;
            }
            Event::Arrive { job, op, machine, ready, transit } => {
                let proc = inst.jobs[job].ops[op]
                    .processing_time(machine)
                    .ok_or_else(|| SimError::Data(format!("job {job} op {op} routed to ineligible machine {machine}")))?;
                let mach = &mut eng.machines[machine];
                mach.queue.push(Queued { job, op, ready, arrival: t, transit, proc });
                mach.queued_work += proc;
                eng.log(t, Some(machine), job, Some(op), EventKind::Arrive);
                eng.dispatch(machine, t)?;
            }
            Event::Finish(m) => {
                let run = eng.machines[m].current.take().ok_or(SimError::Stalled { time: t, remaining })?;
                eng.machines[m].ready_time = t;
                eng.log(t, Some(m), run.job, Some(run.op), EventKind::Complete);
                if eng.record {
                    eng.schedule.push(ScheduledOp {
                        job: run.job,
                        op: run.op,
                        machine: m,
                        ready: run.ready,
                        arrival: run.arrival,
                        start: run.start,
                        end: t,
                    });
                }
                let job = &inst.jobs[run.job];
                if run.op + 1 < job.ops.len() {
                    eng.route(run.job, run.op + 1, t, Location::Machine(m))?;
                } else {
                    eng.completion[run.job] = Some(t);
                    if counted.contains(&run.job) {
                        remaining -= 1;
                    }
                }
                eng.dispatch(m, t)?;
            }
        }
    }

    let completed: Vec<CompletedJob> = counted
        .clone()
        .map(|i| {
            let job = &inst.jobs[i];
            CompletedJob {
                release: job.release,
                due: job.due,
                weight: job.weight,
                completion: eng.completion[i].expect("all counted jobs completed"),
            }
        })
        .collect();
    let objectives = compute_objectives(&completed)?;
    let span = window.1 - window.0;
    let machine_utilization: Vec<f64> = eng
        .machines
        .iter()
        .map(|m| if span > 0.0 { m.busy_in_window / span } else { 0.0 })
        .collect();
    let utilization = machine_utilization.iter().sum::<f64>() / machine_utilization.len() as f64;
    Ok(SimOutcome {
        objectives,
        completed,
        utilization,
        machine_utilization,
        end_time: now,
        routing_decisions: eng.routing_decisions,
        sequencing_decisions: eng.sequencing_decisions,
        schedule: eng.schedule,
        events: eng.events,
    })
}
