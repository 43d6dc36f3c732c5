use std::collections::HashMap;

use super::{Instance, ScheduledOp};

/// A broken scheduling constraint found in a recorded schedule.
#[derive(Clone, Debug, PartialEq)]
pub enum Violation {
    /// Operation `op + 1` started before operation `op` finished.
    Precedence { job: usize, op: usize },
    /// Run length differs from the processing time on the chosen machine.
    Preemption { job: usize, op: usize },
    /// Two operations overlap on one machine.
    Capacity { machine: usize, first: (usize, usize), second: (usize, usize) },
    /// Operation ran on a machine outside its eligible set.
    Ineligible { job: usize, op: usize, machine: usize },
    /// Operation scheduled zero or several times.
    Assignment { job: usize, op: usize, times: usize },
}

const EPS: f64 = 1e-9;

/// Checks precedence, non-preemption, unit capacity and single
/// eligible assignment for every operation of every job that finished.
pub fn audit_schedule(inst: &Instance, schedule: &[ScheduledOp]) -> Vec<Violation> {
    let mut out = Vec::new();
    let mut by_op: HashMap<(usize, usize), Vec<&ScheduledOp>> = HashMap::new();
    for s in schedule {
        by_op.entry((s.job, s.op)).or_default().push(s);
    }
    let finished_jobs: Vec<usize> = inst
        .jobs
        .iter()
        .filter(|j| by_op.contains_key(&(j.id, j.ops.len() - 1)))
        .map(|j| j.id)
        .collect();
    for &j in &finished_jobs {
        let job = &inst.jobs[j];
        for k in 0..job.ops.len() {
            let runs = by_op.get(&(j, k)).map_or(&[][..], |v| v.as_slice());
            if runs.len() != 1 {
                out.push(Violation::Assignment { job: j, op: k, times: runs.len() });
                continue;
            }
            let s = runs[0];
            match job.ops[k].processing_time(s.machine) {
                None => out.push(Violation::Ineligible { job: j, op: k, machine: s.machine }),
                Some(p) => {
                    if (s.end - s.start - p).abs() > EPS * p.max(1.0) * 10.0 + EPS * s.end.abs() {
                        out.push(Violation::Preemption { job: j, op: k });
                    }
                }
            }
            if s.start + EPS < job.release {
                out.push(Violation::Precedence { job: j, op: k });
            }
            if k + 1 < job.ops.len() {
                if let Some(next) = by_op.get(&(j, k + 1)).and_then(|v| v.first()) {
                    if next.start + EPS < s.end {
                        out.push(Violation::Precedence { job: j, op: k });
                    }
                }
            }
        }
    }
    let mut per_machine: HashMap<usize, Vec<&ScheduledOp>> = HashMap::new();
    for s in schedule {
        per_machine.entry(s.machine).or_default().push(s);
    }
    let mut machines: Vec<_> = per_machine.into_iter().collect();
    machines.sort_by_key(|(m, _)| *m);
    for (m, mut runs) in machines {
        runs.sort_by(|a, b| a.start.total_cmp(&b.start));
        for w in runs.windows(2) {
            if w[1].start + EPS < w[0].end {
                out.push(Violation::Capacity {
                    machine: m,
                    first: (w[0].job, w[0].op),
                    second: (w[1].job, w[1].op),
                });
            }
        }
    }
    out
}
