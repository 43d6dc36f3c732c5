use serde::{Deserialize, Serialize};

use super::{Objective, ObjectiveVector, SimError};

/// What to optimize and on which instances.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    #[serde(default)]
    pub name: String,
    pub objectives: Vec<Objective>,
    /// Preference weights, one per objective, summing to 1.
    pub lambdas: Vec<f64>,
    pub utilization: f64,
    #[serde(default = "default_training_seeds")]
    pub training_seeds: Vec<u64>,
    #[serde(default = "default_test_seeds")]
    pub test_seeds: Vec<u64>,
    /// Divide each objective by the reference rule's value on the same
    /// instance. Defaults to true for multi-objective scenarios.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub normalize: Option<bool>,
}

pub fn default_training_seeds() -> Vec<u64> {
    (1..=50).collect()
}

pub fn default_test_seeds() -> Vec<u64> {
    (10_001..=10_030).collect()
}

impl Scenario {
    pub fn single(objective: Objective, utilization: f64) -> Scenario {
        Scenario {
            name: format!("{objective}-{utilization}"),
            objectives: vec![objective],
            lambdas: vec![1.0],
            utilization,
            training_seeds: default_training_seeds(),
            test_seeds: default_test_seeds(),
            normalize: None,
        }
    }

    pub fn pair(first: Objective, second: Objective, lambda1: f64, utilization: f64) -> Scenario {
        Scenario {
            name: format!("{first}-{second}-{utilization}"),
            objectives: vec![first, second],
            lambdas: vec![lambda1, 1.0 - lambda1],
            utilization,
            training_seeds: default_training_seeds(),
            test_seeds: default_test_seeds(),
            normalize: None,
        }
    }

    pub fn normalized(&self) -> bool {
        self.normalize.unwrap_or(self.objectives.len() > 1)
    }

    /// `<Fmean-WTmean, 0.85>` style label.
    pub fn label(&self) -> String {
        let keys: Vec<&str> = self.objectives.iter().map(|o| o.name()).collect();
        format!("<{}, {}>", keys.join("-"), self.utilization)
    }

    pub fn display_name(&self) -> String {
        if self.name.is_empty() {
            self.label()
        } else {
            self.name.clone()
        }
    }

    pub fn validate(&self) -> Result<(), SimError> {
        let bad = |m: String| Err(SimError::Config(m));
        if self.objectives.is_empty() || self.objectives.len() > 2 {
            return bad(format!(
                "scenario needs one or two objectives, got {}",
                self.objectives.len()
            ));
        }
        if self.lambdas.len() != self.objectives.len() {
            return bad("one lambda per objective is required".into());
        }
        if self.lambdas.iter().any(|l| !(0.0..=1.0).contains(l)) {
            return bad("lambdas must lie in [0, 1]".into());
        }
        let sum: f64 = self.lambdas.iter().sum();
        if (sum - 1.0).abs() > 1e-9 {
            return bad(format!("lambdas sum to {sum}, expected 1"));
        }
        if !(self.utilization > 0.0 && self.utilization < 1.0) {
            return bad(format!("utilization {} outside (0, 1)", self.utilization));
        }
        if self.training_seeds.is_empty() || self.test_seeds.is_empty() {
            return bad("training and test seed lists must be non-empty".into());
        }
        Ok(())
    }
}

/// Weighted sum of the scenario's objectives, each divided by the
/// reference value when the scenario is normalized.
pub fn weighted_fitness(
    obj: &ObjectiveVector,
    scenario: &Scenario,
    reference: Option<&ObjectiveVector>,
) -> Result<f64, SimError> {
    let normalize = scenario.normalized();
    let mut total = 0.0;
    for (&key, &lambda) in scenario.objectives.iter().zip(&scenario.lambdas) {
        let mut value = obj.get(key);
        if normalize {
            let r = reference.ok_or(SimError::MissingReference)?.get(key);
            if !(r > 0.0) {
                return Err(SimError::ZeroReference(key));
            }
            value /= r;
        }
        total += lambda * value;
    }
    Ok(total)
}
