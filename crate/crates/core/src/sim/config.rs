use serde::{Deserialize, Serialize};

use super::SimError;

/// Shop and workload generator parameters.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimConfig {
    pub num_machines: usize,
    pub total_jobs: usize,
    /// Leading jobs simulated but excluded from the objectives.
    pub warmup_jobs: usize,
    /// Machine processing rate, uniform real.
    pub rate_range: (f64, f64),
    /// Operation workload, discrete uniform inclusive.
    pub workload_range: (u32, u32),
    /// Operations per job, discrete uniform inclusive.
    pub ops_range: (u32, u32),
    /// Transport distance, discrete uniform inclusive.
    pub distance_range: (u32, u32),
    pub transport_speed: f64,
    /// `(weight, probability)` pairs.
    pub weight_mix: Vec<(f64, f64)>,
    pub due_date_factor: f64,
    pub utilization: f64,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            num_machines: 10,
            total_jobs: 5000,
            warmup_jobs: 1000,
            rate_range: (10.0, 15.0),
            workload_range: (100, 1000),
            ops_range: (2, 10),
            distance_range: (35, 500),
            transport_speed: 5.0,
            weight_mix: vec![(1.0, 0.2), (2.0, 0.6), (4.0, 0.2)],
            due_date_factor: 1.5,
            utilization: 0.85,
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<(), SimError> {
        let bad = |msg: String| Err(SimError::Config(msg));
        if self.num_machines == 0 {
            return bad("num_machines must be at least 1".into());
        }
        if self.warmup_jobs >= self.total_jobs {
            return bad(format!(
                "warmup_jobs ({}) must be smaller than total_jobs ({})",
                self.warmup_jobs, self.total_jobs
            ));
        }
        if !(self.utilization > 0.0 && self.utilization < 1.0) {
            return bad(format!("utilization {} outside (0, 1)", self.utilization));
        }
        let (rlo, rhi) = self.rate_range;
        if !(rlo > 0.0 && rlo <= rhi && rhi.is_finite()) {
            return bad(format!("rate_range {rlo}..{rhi} must be positive and ordered"));
        }
        let (wlo, whi) = self.workload_range;
        if wlo == 0 || wlo > whi {
            return bad(format!("workload_range {wlo}..{whi} must be positive and ordered"));
        }
        let (olo, ohi) = self.ops_range;
        if olo == 0 || olo > ohi {
            return bad(format!("ops_range {olo}..{ohi} must be positive and ordered"));
        }
        let (dlo, dhi) = self.distance_range;
        if dlo > dhi {
            return bad(format!("distance_range {dlo}..{dhi} must be ordered"));
        }
        if !(self.transport_speed > 0.0 && self.transport_speed.is_finite()) {
            return bad("transport_speed must be positive".into());
        }
        if self.weight_mix.is_empty()
            || self.weight_mix.iter().any(|&(w, p)| !(w > 0.0) || !(0.0..=1.0).contains(&p))
        {
            return bad("weight_mix needs positive weights with probabilities in [0, 1]".into());
        }
        let total: f64 = self.weight_mix.iter().map(|&(_, p)| p).sum();
        if (total - 1.0).abs() > 1e-9 {
            return bad(format!("weight_mix probabilities sum to {total}, expected 1"));
        }
        if !(self.due_date_factor >= 0.0) {
            return bad("due_date_factor must be non-negative".into());
        }
        Ok(())
    }

    pub fn mean_ops_per_job(&self) -> f64 {
        (self.ops_range.0 + self.ops_range.1) as f64 / 2.0
    }

    /// Mean workload divided by mean machine rate.
    pub fn mean_processing_time(&self) -> f64 {
        let w = (self.workload_range.0 + self.workload_range.1) as f64 / 2.0;
        let r = (self.rate_range.0 + self.rate_range.1) / 2.0;
        w / r
    }

    /// Job arrival rate that loads the shop to the configured utilization:
    /// `utilization * machines / (E[ops per job] * E[processing time])`.
    pub fn arrival_rate(&self) -> f64 {
        self.utilization * self.num_machines as f64
            / (self.mean_ops_per_job() * self.mean_processing_time())
    }
}

pub fn arrival_rate_for_utilization(config: &SimConfig) -> f64 {
    config.arrival_rate()
}

/// Same flow balance as [`SimConfig::arrival_rate`], with the mean
/// processing time taken over the shop's actual machine rates:
/// `E[workload] * mean(1 / rate)`.
pub fn arrival_rate_for_shop(config: &SimConfig, machine_rates: &[f64]) -> f64 {
    let mean_workload = (config.workload_range.0 + config.workload_range.1) as f64 / 2.0;
    let mean_inv_rate =
        machine_rates.iter().map(|r| 1.0 / r).sum::<f64>() / machine_rates.len() as f64;
    config.utilization * machine_rates.len() as f64
        / (config.mean_ops_per_job() * mean_workload * mean_inv_rate)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_valid() {
        SimConfig::default().validate().unwrap();
        assert_eq!(SimConfig::default().mean_processing_time(), 44.0);
        assert_eq!(SimConfig::default().mean_ops_per_job(), 6.0);
    }

    #[test]
    fn arrival_rate_plug_in() {
        let c = SimConfig::default();
        let expected = 0.85 * 10.0 / 264.0;
        assert!((c.arrival_rate() - expected).abs() < 1e-15);
        assert!((c.arrival_rate() - 0.0322).abs() < 1e-4);
    }

    #[test]
    fn arrival_rate_scaling() {
        let c = SimConfig { utilization: 1e-9, ..Default::default() };
        assert!(c.arrival_rate() < 1e-10);
        let base = SimConfig::default();
        let doubled = SimConfig { num_machines: 20, ..Default::default() };
        assert!((doubled.arrival_rate() - 2.0 * base.arrival_rate()).abs() < 1e-15);
        let busier = SimConfig { utilization: 0.95, ..Default::default() };
        assert!(busier.arrival_rate() > base.arrival_rate());
    }

    #[test]
    fn shop_rate_matches_plug_in_for_uniform_shop() {
        let c = SimConfig::default();
        let shop = arrival_rate_for_shop(&c, &[12.5; 10]);
        assert!((shop - c.arrival_rate()).abs() < 1e-15);
        let slow = arrival_rate_for_shop(&c, &[10.0; 10]);
        assert!(slow < shop);
    }

    #[test]
    fn rejects_bad_configs() {
        let bad = [
            SimConfig { utilization: 1.2, ..Default::default() },
            SimConfig { utilization: 0.0, ..Default::default() },
            SimConfig { warmup_jobs: 5000, ..Default::default() },
            SimConfig { num_machines: 0, ..Default::default() },
            SimConfig { weight_mix: vec![(1.0, 0.5)], ..Default::default() },
            SimConfig { ops_range: (3, 2), ..Default::default() },
        ];
        for c in bad {
            assert!(matches!(c.validate(), Err(SimError::Config(_))), "{c:?}");
        }
    }
}
