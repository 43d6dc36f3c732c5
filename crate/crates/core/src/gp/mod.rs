//! Genetic programming over routing/sequencing rule pairs.

mod eval;
mod evolve;
mod init;
mod operators;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::rules::{RulePair, Slot};
use crate::sim::SimError;

pub use eval::{phenotypic_diversity, test_performance, Evaluator, DEFAULT_CACHE_CAPACITY};
pub use evolve::{evolve, evolve_with, EvolutionLog, EvolutionResult, GenerationStats, InitSource, OperatorCounts};
pub use init::{init_random, init_seeded, ramp_plan};
pub use operators::{crossover, mutate, pick_node, swap_subtrees, tournament_select, tournament_winner};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Origin {
    Random,
    LlmSeeded,
    Crossover,
    Mutation,
    Reproduction,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Individual {
    pub genome: RulePair,
    pub fitness: Option<f64>,
    pub origin: Origin,
}

impl Individual {
    pub fn new(genome: RulePair, origin: Origin) -> Individual {
        Individual { genome, fitness: None, origin }
    }

    /// Fitness, or `f64::INFINITY` if not yet evaluated.
    pub fn fitness_or_inf(&self) -> f64 {
        self.fitness.unwrap_or(f64::INFINITY)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GpParams {
    pub population_size: usize,
    pub generations: usize,
    pub init_depth: (usize, usize),
    pub max_depth: usize,
    pub crossover_rate: f64,
    pub mutation_rate: f64,
    pub reproduction_rate: f64,
    pub tournament_size: usize,
    /// Chance of drawing a terminal, both when growing trees and when
    /// picking a crossover point.
    pub terminal_rate: f64,
    /// Depth range of the subtree grown by mutation.
    pub mutation_depth: (usize, usize),
    pub elites: usize,
}

impl Default for GpParams {
    fn default() -> Self {
        GpParams {
            population_size: 100,
            generations: 50,
            init_depth: (2, 6),
            max_depth: 8,
            crossover_rate: 0.80,
            mutation_rate: 0.15,
            reproduction_rate: 0.05,
            tournament_size: 4,
            terminal_rate: 0.10,
            mutation_depth: (1, 4),
            elites: 1,
        }
    }
}

impl GpParams {
    pub fn validate(&self) -> Result<(), GpError> {
        let bad = |m: String| Err(GpError::Params(m));
        if self.population_size == 0 {
            return bad("population_size must be at least 1".into());
        }
        let (lo, hi) = self.init_depth;
        if lo == 0 || lo > hi || hi > self.max_depth {
            return bad(format!("init_depth {lo}..{hi} must satisfy 1 <= min <= max <= max_depth"));
        }
        let (mlo, mhi) = self.mutation_depth;
        if mlo == 0 || mlo > mhi {
            return bad(format!("mutation_depth {mlo}..{mhi} must be positive and ordered"));
        }
        let rates = [self.crossover_rate, self.mutation_rate, self.reproduction_rate];
        if rates.iter().any(|r| !(0.0..=1.0).contains(r)) {
            return bad("operator rates must lie in [0, 1]".into());
        }
        let sum: f64 = rates.iter().sum();
        if (sum - 1.0).abs() > 1e-9 {
            return bad(format!("operator rates sum to {sum}, expected 1"));
        }
        if self.tournament_size == 0 {
            return bad("tournament_size must be at least 1".into());
        }
        if !(0.0..=1.0).contains(&self.terminal_rate) {
            return bad("terminal_rate must lie in [0, 1]".into());
        }
        if self.elites > self.population_size {
            return bad("elites cannot exceed population_size".into());
        }
        Ok(())
    }
}

/// Why a seed rule pair was refused.
#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum SeedRejection {
    #[error("max depth exceeded ({slot} tree has depth {depth}, limit {limit})")]
    MaxDepthExceeded { slot: &'static str, depth: usize, limit: usize },
}

#[derive(Debug, Error)]
pub enum GpError {
    #[error("invalid GP parameters: {0}")]
    Params(String),
    #[error("seed rule {index} rejected: {cause}")]
    Seed { index: usize, cause: SeedRejection },
    #[error("individual {index} has no fitness")]
    Unevaluated { index: usize },
    #[error(transparent)]
    Sim(#[from] SimError),
}

/// Checks a candidate seed against the depth cap.
pub fn check_seed(genome: &RulePair, max_depth: usize) -> Result<(), SeedRejection> {
    for slot in Slot::BOTH {
        let depth = genome.tree(slot).depth();
        if depth > max_depth {
            return Err(SeedRejection::MaxDepthExceeded { slot: slot.name(), depth, limit: max_depth });
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_params_are_valid() {
        let p = GpParams::default();
        p.validate().unwrap();
        assert_eq!(p.crossover_rate + p.mutation_rate + p.reproduction_rate, 1.0);
    }

    #[test]
    fn rejects_rates_not_summing_to_one() {
        let p = GpParams { mutation_rate: 0.2, ..Default::default() };
        assert!(matches!(p.validate(), Err(GpError::Params(_))));
        let p = GpParams { init_depth: (2, 9), ..Default::default() };
        assert!(p.validate().is_err());
    }

    #[test]
    fn origin_serializes_kebab() {
        assert_eq!(serde_json::to_string(&Origin::LlmSeeded).unwrap(), "\"llm-seeded\"");
    }
}
