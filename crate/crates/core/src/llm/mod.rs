//! Prompt construction, chat providers, reply extraction and reports.

mod extract;
mod prompt;
mod provider;
mod report;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::rules::{RulePair, RuleTextError};
use crate::sim::{Objective, Scenario};

pub use extract::{extract_heuristics, ExtractionResult, Rejected, RejectCause};
pub use prompt::{
    build_explain_prompt, build_init_prompt, build_transfer_prompt, PromptKind, PromptSection, PromptSpec,
    SYSTEM_PROMPT,
};
#[cfg(feature = "http")]
pub use provider::HttpProvider;
pub use provider::{
    network_calls, query, AuditLog, AuditRecord, ChatMessage, ChatProvider, ChatRequest, MockProvider,
    ProviderConfig, ProviderError, ProviderKind,
};
pub use report::{generate_report, Appendix, Report, TerminalCount, NARRATIVE_UNAVAILABLE};

/// A rule pair offered to the model as prior knowledge.
#[derive(Clone, Debug, PartialEq)]
pub struct ReferenceHeuristic {
    pub rules: RulePair,
    /// Scenario the rules were evolved for, e.g. `<WTmean, 0.85>`.
    pub label: String,
    pub note: Option<String>,
}

impl ReferenceHeuristic {
    pub fn new(rules: RulePair, label: impl Into<String>) -> ReferenceHeuristic {
        ReferenceHeuristic { rules, label: label.into(), note: None }
    }

    pub fn parse(routing: &str, sequencing: &str, label: impl Into<String>) -> Result<ReferenceHeuristic, RuleTextError> {
        Ok(ReferenceHeuristic::new(RulePair::parse(routing, sequencing)?, label))
    }
}

/// One weight per objective, summing to one.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PreferenceWeights(pub Vec<(Objective, f64)>);

impl PreferenceWeights {
    pub fn from_scenario(s: &Scenario) -> PreferenceWeights {
        PreferenceWeights(s.objectives.iter().copied().zip(s.lambdas.iter().copied()).collect())
    }

    pub fn validate(&self) -> Result<(), LlmError> {
        if self.0.is_empty() {
            return Err(LlmError::Prompt("no objectives to weight".into()));
        }
        if self.0.iter().any(|(_, l)| !(0.0..=1.0).contains(l)) {
            return Err(LlmError::Prompt("weights must lie in [0, 1]".into()));
        }
        let sum: f64 = self.0.iter().map(|(_, l)| l).sum();
        if (sum - 1.0).abs() > 1e-9 {
            return Err(LlmError::Prompt(format!("weights sum to {sum}, expected 1")));
        }
        Ok(())
    }

    /// `0.2×Fmean + 0.8×WTmean`
    pub fn equation(&self) -> String {
        let terms: Vec<String> = self.0.iter().map(|(o, l)| format!("{l}×{o}")).collect();
        terms.join(" + ")
    }
}

#[derive(Debug, Error)]
pub enum LlmError {
    #[error("cannot build prompt: {0}")]
    Prompt(String),
    #[error(transparent)]
    Provider(#[from] ProviderError),
    #[error("audit log: {0}")]
    Audit(#[from] std::io::Error),
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn equation_text() {
        let s = Scenario::pair(Objective::Fmean, Objective::WTmean, 0.2, 0.85);
        let w = PreferenceWeights::from_scenario(&s);
        assert_eq!(w.equation(), "0.2×Fmean + 0.8×WTmean");
        w.validate().unwrap();
        assert!(PreferenceWeights(vec![(Objective::Tmax, 0.7)]).validate().is_err());
    }
}
