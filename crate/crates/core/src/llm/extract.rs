use std::fmt;

use crate::expr::{self, ParseError};
use crate::gp::{check_seed, SeedRejection};
use crate::rules::{RulePair, Slot};

const MAX_DEPTH: usize = 8;

#[derive(Clone, Debug, PartialEq)]
pub enum RejectCause {
    Syntax { slot: Slot, message: String },
    UnknownSymbol { slot: Slot, token: String },
    Depth { slot: Slot, depth: usize },
    MissingHalf(Slot),
}

impl fmt::Display for RejectCause {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RejectCause::Syntax { slot, message } => write!(f, "syntax error in {} rule: {message}", slot.name()),
            RejectCause::UnknownSymbol { slot, token } => {
                write!(f, "unknown symbol `{token}` in {} rule", slot.name())
            }
            RejectCause::Depth { slot, depth } => {
                write!(f, "{} rule depth {depth} exceeds {MAX_DEPTH}", slot.name())
            }
            RejectCause::MissingHalf(slot) => write!(f, "missing {} rule", slot.name()),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Rejected {
    pub snippet: String,
    pub cause: RejectCause,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExtractionResult {
    pub accepted: Vec<RulePair>,
    pub rejected: Vec<Rejected>,
    /// Text under the reply's insights heading, if any.
    pub insights: Option<String>,
    pub raw: String,
}

impl ExtractionResult {
    pub fn candidates(&self) -> usize {
        self.accepted.len() + self.rejected.len()
    }
}

fn fenced_blocks(text: &str) -> Vec<Vec<&str>> {
    let mut blocks = Vec::new();
    let mut current: Option<Vec<&str>> = None;
    for line in text.lines() {
        if line.trim_start().starts_with("```") {
            match current.take() {
                Some(b) => blocks.push(b),
                None => current = Some(Vec::new()),
            }
        } else if let Some(b) = current.as_mut() {
            b.push(line);
        }
    }
    blocks
}

/// `routing: ...` / `sequencing: ...`, ignoring case and list markers.
fn labeled(line: &str) -> Option<(Slot, &str)> {
    let l = line.trim().trim_start_matches(['-', '*', ' ']);
    let (key, value) = l.split_once(':')?;
    let slot = match key.trim().to_ascii_lowercase().as_str() {
        "routing" | "routing rule" => Slot::Routing,
        "sequencing" | "sequencing rule" => Slot::Sequencing,
        _ => return None,
    };
    Some((slot, value.trim().trim_matches('`')))
}

fn parse_half(slot: Slot, text: &str) -> Result<expr::Expr, RejectCause> {
    expr::parse(text).map_err(|e| match e {
        ParseError::UnknownSymbol { token, .. } => RejectCause::UnknownSymbol { slot, token },
        other => RejectCause::Syntax { slot, message: other.to_string() },
    })
}

fn judge(routing: Option<&str>, sequencing: Option<&str>) -> Result<RulePair, RejectCause> {
    let r = routing.ok_or(RejectCause::MissingHalf(Slot::Routing))?;
    let s = sequencing.ok_or(RejectCause::MissingHalf(Slot::Sequencing))?;
    let pair = RulePair::new(parse_half(Slot::Routing, r)?, parse_half(Slot::Sequencing, s)?);
    check_seed(&pair, MAX_DEPTH).map_err(|SeedRejection::MaxDepthExceeded { slot, depth, .. }| {
        let slot = if slot == Slot::Routing.name() { Slot::Routing } else { Slot::Sequencing };
        RejectCause::Depth { slot, depth }
    })?;
    Ok(pair)
}

fn insights(text: &str) -> Option<String> {
    let mut lines = text.lines();
    lines.find(|l| l.trim_start().starts_with('#') && l.to_ascii_lowercase().contains("insight"))?;
    let body: Vec<&str> = lines
        .take_while(|l| !l.trim_start().starts_with('#') && !l.trim_start().starts_with("```"))
        .collect();
    let body = body.join("\n").trim().to_string();
    (!body.is_empty()).then_some(body)
}

/// Pulls rule pairs out of fenced blocks in a model reply. Prose outside
/// fences is ignored; nothing is repaired.
pub fn extract_heuristics(reply: &str) -> ExtractionResult {
    let mut accepted = Vec::new();
    let mut rejected = Vec::new();
    for block in fenced_blocks(reply) {
        let mut routing: Option<&str> = None;
        let mut sequencing: Option<&str> = None;
        let mut snippet: Vec<&str> = Vec::new();
        let mut flush = |r: &mut Option<&str>, s: &mut Option<&str>, snippet: &mut Vec<&str>| {
            if r.is_none() && s.is_none() {
                return;
            }
            match judge(*r, *s) {
                Ok(p) => accepted.push(p),
                Err(cause) => rejected.push(Rejected { snippet: snippet.join("\n"), cause }),
            }
            *r = None;
            *s = None;
            snippet.clear();
        };
        for line in block {
            let Some((slot, text)) = labeled(line) else { continue };
            let taken = match slot {
                Slot::Routing => routing.is_some(),
                Slot::Sequencing => sequencing.is_some(),
            };
            if taken {
                flush(&mut routing, &mut sequencing, &mut snippet);
            }
            snippet.push(line.trim());
            match slot {
                Slot::Routing => routing = Some(text),
                Slot::Sequencing => sequencing = Some(text),
            }
            if routing.is_some() && sequencing.is_some() {
                flush(&mut routing, &mut sequencing, &mut snippet);
            }
        }
        flush(&mut routing, &mut sequencing, &mut snippet);
    }
    ExtractionResult { accepted, rejected, insights: insights(reply), raw: reply.to_string() }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn block(r: &str, s: &str) -> String {
        format!("```rules\nrouting: {r}\nsequencing: {s}\n```\n")
    }

    #[test]
    fn thirty_good_pairs() {
        let mut reply = String::from("## Insights\nPT and WIQ recur.\n\n");
        for i in 0..30 {
            let t = crate::expr::Terminal::ALL[i % 13].symbol();
            reply.push_str(&block(&format!("WIQ + {t}"), &format!("min(PT, {t})")));
        }
        let out = extract_heuristics(&reply);
        assert_eq!((out.accepted.len(), out.rejected.len()), (30, 0));
        assert_eq!(out.insights.as_deref(), Some("PT and WIQ recur."));
    }

    #[test]
    fn rejection_causes() {
        let deep = (0..8).fold("PT".to_string(), |acc, _| format!("({acc} + W)"));
        let reply = [
            block("exp(PT)", "PT"),
            block("WIQ +", "PT"),
            block("WIQ", &deep),
            "```\nrouting: WIQ\n```\n".to_string(),
            block("Wiq", "PT"),
        ]
        .concat();
        let out = extract_heuristics(&reply);
        assert_eq!(out.accepted.len(), 0);
        let causes: Vec<_> = out.rejected.iter().map(|r| r.cause.clone()).collect();
        assert!(matches!(&causes[0], RejectCause::UnknownSymbol { slot: Slot::Routing, token } if token == "exp"));
        assert!(matches!(causes[1], RejectCause::Syntax { slot: Slot::Routing, .. }));
        assert_eq!(causes[2], RejectCause::Depth { slot: Slot::Sequencing, depth: 9 });
        assert_eq!(causes[3], RejectCause::MissingHalf(Slot::Sequencing));
        assert!(matches!(causes[4], RejectCause::UnknownSymbol { .. }));
        assert_eq!(out.candidates(), 5);
    }

    #[test]
    fn prose_only() {
        let out = extract_heuristics("Routing: use WIQ.\nsequencing: PT is good.\nNo code here.");
        assert_eq!(out.candidates(), 0);
        assert_eq!(out.insights, None);
    }

    #[test]
    fn several_pairs_in_one_block_and_list_markers() {
        let reply = "```\n- routing: WIQ\n- sequencing: PT\nrouting: `NIQ`\nsequencing: W * PT\n```";
        let out = extract_heuristics(reply);
        assert_eq!(out.accepted.len(), 2);
        assert_eq!(out.accepted[1].sequencing.to_string(), "(W * PT)");
    }
}
