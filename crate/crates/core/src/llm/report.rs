use std::collections::BTreeMap;

use super::{build_explain_prompt, query, AuditLog, ChatProvider, LlmError, ProviderConfig};
use crate::expr::Terminal;
use crate::rules::RulePair;
use crate::sim::Scenario;

pub const NARRATIVE_UNAVAILABLE: &str = "_Narrative unavailable:";

#[derive(Clone, Debug, PartialEq)]
pub struct TerminalCount {
    pub terminal: Terminal,
    pub routing: usize,
    pub sequencing: usize,
}

/// Facts computed from the genome itself.
#[derive(Clone, Debug, PartialEq)]
pub struct Appendix {
    pub genome: RulePair,
    pub histogram: Vec<TerminalCount>,
    pub test_performance: Option<f64>,
}

impl Appendix {
    pub fn new(genome: &RulePair, test_performance: Option<f64>) -> Appendix {
        let r = genome.routing.terminal_histogram();
        let s = genome.sequencing.terminal_histogram();
        let mut keys: BTreeMap<Terminal, ()> = BTreeMap::new();
        keys.extend(r.keys().chain(s.keys()).map(|&t| (t, ())));
        let histogram = keys
            .into_keys()
            .map(|t| TerminalCount {
                terminal: t,
                routing: r.get(&t).copied().unwrap_or(0),
                sequencing: s.get(&t).copied().unwrap_or(0),
            })
            .collect();
        Appendix { genome: genome.clone(), histogram, test_performance }
    }

    pub fn render(&self) -> String {
        let g = &self.genome;
        let mut out = String::from("## Appendix\n\n```rules\n");
        out.push_str(&g.to_text());
        out.push_str("```\n\n| Tree | Depth | Size |\n|---|---|---|\n");
        out.push_str(&format!("| routing | {} | {} |\n", g.routing.depth(), g.routing.size()));
        out.push_str(&format!("| sequencing | {} | {} |\n", g.sequencing.depth(), g.sequencing.size()));
        out.push_str("\n| Terminal | Routing | Sequencing | Total |\n|---|---|---|---|\n");
        for c in &self.histogram {
            out.push_str(&format!(
                "| {} | {} | {} | {} |\n",
                c.terminal,
                c.routing,
                c.sequencing,
                c.routing + c.sequencing
            ));
        }
        if let Some(tp) = self.test_performance {
            out.push_str(&format!("\nMean test fitness: {tp}\n"));
        }
        out
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Report {
    pub scenario: String,
    pub narrative: Option<String>,
    /// Why the narrative is missing.
    pub failure: Option<String>,
    pub appendix: Appendix,
}

impl Report {
    pub fn render(&self) -> String {
        let mut out = format!("# Heuristic report for {}\n\n", self.scenario);
        match (&self.narrative, &self.failure) {
            (Some(n), _) => out.push_str(n.trim()),
            (None, Some(f)) => out.push_str(&format!("{NARRATIVE_UNAVAILABLE} {f}_")),
            (None, None) => out.push_str(&format!("{NARRATIVE_UNAVAILABLE} no reply_")),
        }
        out.push_str("\n\n");
        out.push_str(&self.appendix.render());
        out
    }

    pub fn is_complete(&self) -> bool {
        self.narrative.is_some()
    }
}

/// Asks the model to explain `best` and attaches the computed appendix.
/// A failed query still yields a report, without narrative; the error is
/// returned alongside so callers can signal it.
pub fn generate_report(
    best: &RulePair,
    scenario: &Scenario,
    provider: &dyn ChatProvider,
    config: &ProviderConfig,
    audit: Option<&AuditLog>,
    test_performance: Option<f64>,
) -> (Report, Option<LlmError>) {
    let appendix = Appendix::new(best, test_performance);
    let reply = build_explain_prompt(best, scenario).and_then(|p| query(provider, config, &p, audit));
    let (narrative, error) = match reply {
        Ok(text) => (Some(text), None),
        Err(e) => (None, Some(e)),
    };
    let report = Report {
        scenario: scenario.display_name(),
        narrative,
        failure: error.as_ref().map(|e| e.to_string()),
        appendix,
    };
    (report, error)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn histogram_matches_trees() {
        let g = RulePair::parse("WIQ + WIQ * TRANT", "min(PT, PT) / W").unwrap();
        let a = Appendix::new(&g, Some(0.9));
        let counts: Vec<(Terminal, usize, usize)> =
            a.histogram.iter().map(|c| (c.terminal, c.routing, c.sequencing)).collect();
        assert_eq!(
            counts,
            vec![(Terminal::Wiq, 2, 0), (Terminal::Pt, 0, 2), (Terminal::W, 0, 1), (Terminal::Trant, 1, 0)]
        );
        let text = a.render();
        assert!(text.contains("| WIQ | 2 | 0 | 2 |"));
        assert!(text.contains("| routing | 3 | 5 |"));
        assert!(text.contains("Mean test fitness: 0.9"));
    }
}
