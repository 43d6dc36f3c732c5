//! Rule pairs and their plain-text file format.
//!
//! ```text
//! # comment
//! routing: WIQ
//! sequencing: PT
//!
//! routing: (WIQ + TRANT)
//! sequencing: min(PT, rDD)
//! ```

use std::fmt;

use thiserror::Error;

use crate::expr::{self, Expr, ParseError};

/// One routing rule plus one sequencing rule.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct RulePair {
    pub routing: Expr,
    pub sequencing: Expr,
}

impl RulePair {
    pub fn new(routing: Expr, sequencing: Expr) -> RulePair {
        RulePair { routing, sequencing }
    }

    pub fn parse(routing: &str, sequencing: &str) -> Result<RulePair, RuleTextError> {
        let r = expr::parse(routing).map_err(|e| RuleTextError::Parse {
            line: 0,
            slot: Slot::Routing,
            source: e,
        })?;
        let s = expr::parse(sequencing).map_err(|e| RuleTextError::Parse {
            line: 0,
            slot: Slot::Sequencing,
            source: e,
        })?;
        Ok(RulePair::new(r, s))
    }

    /// Least work in queue routing, shortest processing time sequencing.
    pub fn reference() -> RulePair {
        RulePair::parse("WIQ", "PT").expect("reference rules parse")
    }

    pub fn tree(&self, slot: Slot) -> &Expr {
        match slot {
            Slot::Routing => &self.routing,
            Slot::Sequencing => &self.sequencing,
        }
    }

    pub fn with_tree(&self, slot: Slot, tree: Expr) -> RulePair {
        let mut out = self.clone();
        match slot {
            Slot::Routing => out.routing = tree,
            Slot::Sequencing => out.sequencing = tree,
        }
        out
    }

    pub fn max_depth(&self) -> usize {
        self.routing.depth().max(self.sequencing.depth())
    }

    /// Two-line `routing:` / `sequencing:` text block.
    pub fn to_text(&self) -> String {
        format!("routing: {}\nsequencing: {}\n", self.routing, self.sequencing)
    }
}

impl fmt::Display for RulePair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "routing: {} | sequencing: {}", self.routing, self.sequencing)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Slot {
    Routing,
    Sequencing,
}

impl Slot {
    pub const BOTH: [Slot; 2] = [Slot::Routing, Slot::Sequencing];

    pub fn name(self) -> &'static str {
        match self {
            Slot::Routing => "routing",
            Slot::Sequencing => "sequencing",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RuleTextError {
    #[error("line {line}: {slot:?} rule: {source}")]
    Parse {
        line: usize,
        slot: Slot,
        #[source]
        source: ParseError,
    },
    #[error("line {line}: expected `routing:` or `sequencing:`")]
    UnknownLine { line: usize },
    #[error("line {line}: {slot:?} rule given twice in one pair")]
    Duplicate { line: usize, slot: Slot },
    #[error("pair ending at line {line} is missing its {missing:?} rule")]
    MissingHalf { line: usize, missing: Slot },
    #[error("no rule pairs found")]
    Empty,
}

/// Parses every pair in a rules file. Pairs are separated by blank lines,
/// `#` starts a comment line.
pub fn parse_rule_pairs(text: &str) -> Result<Vec<RulePair>, RuleTextError> {
    let mut pairs = Vec::new();
    let mut routing: Option<Expr> = None;
    let mut sequencing: Option<Expr> = None;
    let mut last_line = 0;

    let flush = |routing: &mut Option<Expr>,
                 sequencing: &mut Option<Expr>,
                 pairs: &mut Vec<RulePair>,
                 line: usize|
     -> Result<(), RuleTextError> {
        match (routing.take(), sequencing.take()) {
            (Some(r), Some(s)) => pairs.push(RulePair::new(r, s)),
            (None, None) => {}
            (Some(_), None) => return Err(RuleTextError::MissingHalf { line, missing: Slot::Sequencing }),
            (None, Some(_)) => return Err(RuleTextError::MissingHalf { line, missing: Slot::Routing }),
        }
        Ok(())
    };

    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let trimmed = raw.trim();
        if trimmed.starts_with('#') {
            continue;
        }
        if trimmed.is_empty() {
            flush(&mut routing, &mut sequencing, &mut pairs, last_line)?;
            continue;
        }
        last_line = line;
        let (slot, body) = if let Some(rest) = trimmed.strip_prefix("routing:") {
            (Slot::Routing, rest)
        } else if let Some(rest) = trimmed.strip_prefix("sequencing:") {
            (Slot::Sequencing, rest)
        } else {
            return Err(RuleTextError::UnknownLine { line });
        };
        let target = match slot {
            Slot::Routing => &mut routing,
            Slot::Sequencing => &mut sequencing,
        };
        if target.is_some() {
            return Err(RuleTextError::Duplicate { line, slot });
        }
        let e = expr::parse(body).map_err(|source| RuleTextError::Parse { line, slot, source })?;
        *target = Some(e);
    }
    flush(&mut routing, &mut sequencing, &mut pairs, last_line)?;
    if pairs.is_empty() {
        return Err(RuleTextError::Empty);
    }
    Ok(pairs)
}

pub fn format_rule_pairs(pairs: &[RulePair]) -> String {
    pairs.iter().map(RulePair::to_text).collect::<Vec<_>>().join("\n")
}
