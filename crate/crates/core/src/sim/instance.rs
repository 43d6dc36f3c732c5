use std::io::{BufRead, Write};

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp};
use serde::{Deserialize, Serialize};

use super::config::arrival_rate_for_shop;
use super::{SimConfig, SimError};

#[derive(Clone, Debug, PartialEq)]
pub struct Operation {
    pub workload: f64,
    /// `(machine, processing time)` for each eligible machine, machine-ascending.
    pub options: Vec<(usize, f64)>,
    /// Median processing time over `options`.
    pub median_time: f64,
}

impl Operation {
    pub fn new(workload: f64, options: Vec<(usize, f64)>) -> Operation {
        assert!(!options.is_empty(), "operation needs at least one eligible machine");
        let median_time = median(options.iter().map(|&(_, p)| p).collect());
        Operation { workload, options, median_time }
    }

    pub fn processing_time(&self, machine: usize) -> Option<f64> {
        self.options.iter().find(|&&(m, _)| m == machine).map(|&(_, p)| p)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Job {
    pub id: usize,
    pub release: f64,
    pub weight: f64,
    pub due: f64,
    pub ops: Vec<Operation>,
    /// `remaining_work[k]` = sum of median times of operations `k..`.
    pub remaining_work: Vec<f64>,
}

impl Job {
    pub fn new(id: usize, release: f64, weight: f64, due: f64, ops: Vec<Operation>) -> Job {
        let mut remaining_work = vec![0.0; ops.len()];
        let mut acc = 0.0;
        for (k, op) in ops.iter().enumerate().rev() {
            acc += op.median_time;
            remaining_work[k] = acc;
        }
        Job { id, release, weight, due, ops, remaining_work }
    }

    /// Sum of per-operation median processing times.
    pub fn total_work(&self) -> f64 {
        self.remaining_work.first().copied().unwrap_or(0.0)
    }
}

/// A generated (or loaded) problem instance: shop layout plus job stream.
#[derive(Clone, Debug, PartialEq)]
pub struct Instance {
    pub seed: u64,
    pub warmup_jobs: usize,
    pub machine_rates: Vec<f64>,
    /// Distance between the shop entry/exit and each machine.
    pub depot_distance: Vec<f64>,
    /// Symmetric, zero diagonal.
    pub machine_distance: Vec<Vec<f64>>,
    pub transport_speed: f64,
    pub jobs: Vec<Job>,
}

impl Instance {
    pub fn num_machines(&self) -> usize {
        self.machine_rates.len()
    }

    pub fn travel_time(&self, from: Location, to: usize) -> f64 {
        let d = match from {
            Location::Depot => self.depot_distance[to],
            Location::Machine(m) => self.machine_distance[m][to],
        };
        d / self.transport_speed
    }

    /// Jobs whose statistics enter the objectives.
    pub fn counted_jobs(&self) -> std::ops::Range<usize> {
        self.warmup_jobs.min(self.jobs.len())..self.jobs.len()
    }

    pub fn validate(&self) -> Result<(), SimError> {
        let m = self.num_machines();
        let data = |msg: String| Err(SimError::Data(msg));
        if m == 0 {
            return data("instance has no machines".into());
        }
        if self.depot_distance.len() != m
            || self.machine_distance.len() != m
            || self.machine_distance.iter().any(|row| row.len() != m)
        {
            return data("distance tables do not match machine count".into());
        }
        if self.warmup_jobs >= self.jobs.len() {
            return data(format!(
                "warm-up of {} jobs leaves nothing to measure in {} jobs",
                self.warmup_jobs,
                self.jobs.len()
            ));
        }
        for (i, job) in self.jobs.iter().enumerate() {
            if job.id != i {
                return data(format!("job at position {i} has id {}", job.id));
            }
            if job.ops.is_empty() {
                return data(format!("job {i} has no operations"));
            }
            for op in &job.ops {
                if op.options.iter().any(|&(mm, p)| mm >= m || !(p > 0.0 && p.is_finite())) {
                    return data(format!("job {i} has an invalid eligible machine entry"));
                }
            }
        }
        Ok(())
    }

    pub fn write_jsonl<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        let header = Record::Shop {
            seed: self.seed,
            warmup_jobs: self.warmup_jobs,
            transport_speed: self.transport_speed,
            machine_rates: self.machine_rates.clone(),
            depot_distance: self.depot_distance.clone(),
            machine_distance: self.machine_distance.clone(),
        };
        serde_json::to_writer(&mut out, &header)?;
        out.write_all(b"\n")?;
        for job in &self.jobs {
            let rec = Record::Job {
                id: job.id,
                release: job.release,
                weight: job.weight,
                due: job.due,
                ops: job
                    .ops
                    .iter()
                    .map(|op| OpRecord {
                        workload: op.workload,
                        eligible: op
                            .options
                            .iter()
                            .map(|&(m, _)| (m, self.machine_rates[m]))
                            .collect(),
                    })
                    .collect(),
            };
            serde_json::to_writer(&mut out, &rec)?;
            out.write_all(b"\n")?;
        }
        Ok(())
    }

    pub fn read_jsonl<R: BufRead>(input: R) -> Result<Instance, SimError> {
        let mut lines = input.lines().enumerate();
        let header = loop {
            match lines.next() {
                None => return Err(SimError::Data("empty instance file".into())),
                Some((n, line)) => {
                    let line = line.map_err(|e| SimError::Data(e.to_string()))?;
                    if line.trim().is_empty() {
                        continue;
                    }
                    break parse_record(&line, n)?;
                }
            }
        };
        let Record::Shop {
            seed,
            warmup_jobs,
            transport_speed,
            machine_rates,
            depot_distance,
            machine_distance,
        } = header
        else {
            return Err(SimError::Data("line 1: expected a shop record".into()));
        };
        let mut jobs = Vec::new();
        for (n, line) in lines {
            let line = line.map_err(|e| SimError::Data(e.to_string()))?;
            if line.trim().is_empty() {
                continue;
            }
            let Record::Job { id, release, weight, due, ops } = parse_record(&line, n)? else {
                return Err(SimError::Data(format!("line {}: unexpected shop record", n + 1)));
            };
            let ops = ops
                .into_iter()
                .map(|op| {
                    let options = op
                        .eligible
                        .iter()
                        .map(|&(m, rate)| (m, op.workload / rate))
                        .collect::<Vec<_>>();
                    if options.is_empty() {
                        return Err(SimError::Data(format!(
                            "line {}: operation without eligible machines",
                            n + 1
                        )));
                    }
                    Ok(Operation::new(op.workload, options))
                })
                .collect::<Result<Vec<_>, _>>()?;
            jobs.push(Job::new(id, release, weight, due, ops));
        }
        let inst = Instance {
            seed,
            warmup_jobs,
            machine_rates,
            depot_distance,
            machine_distance,
            transport_speed,
            jobs,
        };
        inst.validate()?;
        Ok(inst)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Location {
    Depot,
    Machine(usize),
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "record", rename_all = "lowercase")]
enum Record {
    Shop {
        seed: u64,
        warmup_jobs: usize,
        transport_speed: f64,
        machine_rates: Vec<f64>,
        depot_distance: Vec<f64>,
        machine_distance: Vec<Vec<f64>>,
    },
    Job {
        id: usize,
        release: f64,
        weight: f64,
        due: f64,
        ops: Vec<OpRecord>,
    },
}

#[derive(Serialize, Deserialize)]
struct OpRecord {
    workload: f64,
    /// `(machine, rate)` pairs.
    eligible: Vec<(usize, f64)>,
}

fn parse_record(line: &str, n: usize) -> Result<Record, SimError> {
    serde_json::from_str(line).map_err(|e| SimError::Data(format!("line {}: {e}", n + 1)))
}

pub fn median(mut values: Vec<f64>) -> f64 {
    assert!(!values.is_empty());
    values.sort_by(f64::total_cmp);
    let n = values.len();
    if n % 2 == 1 {
        values[n / 2]
    } else {
        (values[n / 2 - 1] + values[n / 2]) / 2.0
    }
}

/// Generates a full instance. Deterministic in `(config, seed)`.
///
/// Arrivals are Poisson at the rate that loads this shop's machines to
/// `config.utilization`.
pub fn generate_instance(config: &SimConfig, seed: u64) -> Result<Instance, SimError> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let m = config.num_machines;
    let (rlo, rhi) = config.rate_range;
    let machine_rates: Vec<f64> = (0..m)
        .map(|_| if rlo == rhi { rlo } else { rng.random_range(rlo..rhi) })
        .collect();
    let (dlo, dhi) = config.distance_range;
    let depot_distance: Vec<f64> = (0..m).map(|_| rng.random_range(dlo..=dhi) as f64).collect();
    let mut machine_distance = vec![vec![0.0; m]; m];
    for i in 0..m {
        for j in (i + 1)..m {
            let d = rng.random_range(dlo..=dhi) as f64;
            machine_distance[i][j] = d;
            machine_distance[j][i] = d;
        }
    }

    let inter_arrival = Exp::new(arrival_rate_for_shop(config, &machine_rates))
        .map_err(|e| SimError::Config(format!("arrival rate: {e}")))?;
    let mut clock = 0.0;
    let mut jobs = Vec::with_capacity(config.total_jobs);
    for id in 0..config.total_jobs {
        clock += inter_arrival.sample(&mut rng);
        let weight = draw_weight(&mut rng, &config.weight_mix);
        let n_ops = rng.random_range(config.ops_range.0..=config.ops_range.1) as usize;
        let ops: Vec<Operation> = (0..n_ops)
            .map(|_| {
                let workload =
                    rng.random_range(config.workload_range.0..=config.workload_range.1) as f64;
                let k = rng.random_range(1..=m);
                let mut machines = index::sample(&mut rng, m, k).into_vec();
                machines.sort_unstable();
                let options = machines
                    .into_iter()
                    .map(|j| (j, workload / machine_rates[j]))
                    .collect();
                Operation::new(workload, options)
            })
            .collect();
        let total: f64 = ops.iter().map(|o| o.median_time).sum();
        let due = clock + config.due_date_factor * total;
        jobs.push(Job::new(id, clock, weight, due, ops));
    }
    Ok(Instance {
        seed,
        warmup_jobs: config.warmup_jobs,
        machine_rates,
        depot_distance,
        machine_distance,
        transport_speed: config.transport_speed,
        jobs,
    })
}

fn draw_weight<R: Rng + ?Sized>(rng: &mut R, mix: &[(f64, f64)]) -> f64 {
    let u: f64 = rng.random();
    let mut acc = 0.0;
    for &(w, p) in mix {
        acc += p;
        if u < acc {
            return w;
        }
    }
    mix.last().expect("validated non-empty").0
}
