//! Priority-rule expression language.
//!
//! A rule is a binary tree whose leaves read one scheduling feature
//! ([`Terminal`]) and whose inner nodes combine two sub-scores with one of
//! six arithmetic [`Function`]s. Lower scores mean higher priority.

mod parse;
mod random;

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

pub use parse::{parse, ParseError};
pub use random::{random_tree, TreeMode};

/// Scheduling features a rule can read.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Terminal {
    Niq,
    Wiq,
    Mwt,
    Pt,
    Npt,
    Owt,
    Wkr,
    Nor,
    Rdd,
    Slack,
    W,
    Tis,
    Trant,
}

impl Terminal {
    pub const ALL: [Terminal; 13] = [
        Terminal::Niq,
        Terminal::Wiq,
        Terminal::Mwt,
        Terminal::Pt,
        Terminal::Npt,
        Terminal::Owt,
        Terminal::Wkr,
        Terminal::Nor,
        Terminal::Rdd,
        Terminal::Slack,
        Terminal::W,
        Terminal::Tis,
        Terminal::Trant,
    ];

    /// Grammar symbol, case-sensitive.
    pub fn symbol(self) -> &'static str {
        match self {
            Terminal::Niq => "NIQ",
            Terminal::Wiq => "WIQ",
            Terminal::Mwt => "MWT",
            Terminal::Pt => "PT",
            Terminal::Npt => "NPT",
            Terminal::Owt => "OWT",
            Terminal::Wkr => "WKR",
            Terminal::Nor => "NOR",
            Terminal::Rdd => "rDD",
            Terminal::Slack => "SLACK",
            Terminal::W => "W",
            Terminal::Tis => "TIS",
            Terminal::Trant => "TRANT",
        }
    }

    pub fn from_symbol(s: &str) -> Option<Terminal> {
        Terminal::ALL.iter().copied().find(|t| t.symbol() == s)
    }

    /// Short human description, used in prompt glossaries and reports.
    pub fn description(self) -> &'static str {
        match self {
            Terminal::Niq => "Number of operations in the queue",
            Terminal::Wiq => "Work in the queue",
            Terminal::Mwt => "Machine waiting time = t - MRT",
            Terminal::Pt => "Processing time of the operation",
            Terminal::Npt => "Median processing time of the next operation",
            Terminal::Owt => "Operation waiting time = t - ORT",
            Terminal::Wkr => "Work remaining",
            Terminal::Nor => "Number of operations remaining",
            Terminal::Rdd => "Relative due date = DD - t",
            Terminal::Slack => "Job slack time",
            Terminal::W => "Job weight",
            Terminal::Tis => "Time in system = t - releaseTime",
            Terminal::Trant => "Transportation time",
        }
    }
}

impl fmt::Display for Terminal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.symbol())
    }
}

/// Binary operators. All are total on finite inputs.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Function {
    Add,
    Sub,
    Mul,
    /// Division returning 1 when the denominator is zero.
    Div,
    Min,
    Max,
}

impl Function {
    pub const ALL: [Function; 6] = [
        Function::Add,
        Function::Sub,
        Function::Mul,
        Function::Div,
        Function::Min,
        Function::Max,
    ];

    pub const fn arity(self) -> usize {
        2
    }

    /// Applies the operator, saturating overflow to `±f64::MAX` so that
    /// finite inputs always give a finite result.
    #[inline]
    pub fn apply(self, a: f64, b: f64) -> f64 {
        let v = match self {
            Function::Add => a + b,
            Function::Sub => a - b,
            Function::Mul => a * b,
            Function::Div => {
                if b == 0.0 {
                    1.0
                } else {
                    a / b
                }
            }
            Function::Min => a.min(b),
            Function::Max => a.max(b),
        };
        v.clamp(-f64::MAX, f64::MAX)
    }

    fn infix(self) -> Option<&'static str> {
        match self {
            Function::Add => Some("+"),
            Function::Sub => Some("-"),
            Function::Mul => Some("*"),
            Function::Div => Some("/"),
            Function::Min | Function::Max => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Function::Add => "add",
            Function::Sub => "sub",
            Function::Mul => "mul",
            Function::Div => "div",
            Function::Min => "min",
            Function::Max => "max",
        }
    }
}

/// Immutable expression tree.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Expr {
    Leaf(Terminal),
    Node(Function, Box<Expr>, Box<Expr>),
}

impl Expr {
    pub fn leaf(t: Terminal) -> Expr {
        Expr::Leaf(t)
    }

    pub fn node(f: Function, a: Expr, b: Expr) -> Expr {
        Expr::Node(f, Box::new(a), Box::new(b))
    }

    pub fn evaluate(&self, ctx: &DecisionContext) -> f64 {
        match self {
            Expr::Leaf(t) => ctx.get(*t),
            Expr::Node(f, a, b) => f.apply(a.evaluate(ctx), b.evaluate(ctx)),
        }
    }

    /// A lone terminal has depth 1.
    pub fn depth(&self) -> usize {
        match self {
            Expr::Leaf(_) => 1,
            Expr::Node(_, a, b) => 1 + a.depth().max(b.depth()),
        }
    }

    pub fn size(&self) -> usize {
        match self {
            Expr::Leaf(_) => 1,
            Expr::Node(_, a, b) => 1 + a.size() + b.size(),
        }
    }

    pub fn is_leaf(&self) -> bool {
        matches!(self, Expr::Leaf(_))
    }

    pub fn leaf_count(&self) -> usize {
        match self {
            Expr::Leaf(_) => 1,
            Expr::Node(_, a, b) => a.leaf_count() + b.leaf_count(),
        }
    }

    pub fn terminal_histogram(&self) -> BTreeMap<Terminal, usize> {
        let mut hist = BTreeMap::new();
        self.visit_leaves(&mut |t| *hist.entry(t).or_insert(0) += 1);
        hist
    }

    fn visit_leaves(&self, f: &mut impl FnMut(Terminal)) {
        match self {
            Expr::Leaf(t) => f(*t),
            Expr::Node(_, a, b) => {
                a.visit_leaves(f);
                b.visit_leaves(f);
            }
        }
    }

    /// Subtree at preorder position `index` (root is 0).
    pub fn subtree(&self, index: usize) -> Option<&Expr> {
        let mut remaining = index;
        self.find(&mut remaining)
    }

    fn find(&self, remaining: &mut usize) -> Option<&Expr> {
        if *remaining == 0 {
            return Some(self);
        }
        *remaining -= 1;
        match self {
            Expr::Leaf(_) => None,
            Expr::Node(_, a, b) => a.find(remaining).or_else(|| b.find(remaining)),
        }
    }

    /// Copy of `self` with the subtree at preorder `index` replaced.
    /// Returns `None` when `index` is out of range.
    pub fn replace_subtree(&self, index: usize, replacement: &Expr) -> Option<Expr> {
        let mut remaining = index;
        self.replace_at(&mut remaining, replacement)
    }

    fn replace_at(&self, remaining: &mut usize, replacement: &Expr) -> Option<Expr> {
        if *remaining == 0 {
            return Some(replacement.clone());
        }
        *remaining -= 1;
        match self {
            Expr::Leaf(_) => None,
            Expr::Node(f, a, b) => {
                if let Some(na) = a.replace_at(remaining, replacement) {
                    Some(Expr::Node(*f, Box::new(na), b.clone()))
                } else {
                    b.replace_at(remaining, replacement)
                        .map(|nb| Expr::Node(*f, a.clone(), Box::new(nb)))
                }
            }
        }
    }

    /// Preorder indices of inner nodes and of leaves.
    pub fn node_indices(&self) -> (Vec<usize>, Vec<usize>) {
        let mut inner = Vec::new();
        let mut leaves = Vec::new();
        let mut next = 0;
        self.collect_indices(&mut next, &mut inner, &mut leaves);
        (inner, leaves)
    }

    fn collect_indices(&self, next: &mut usize, inner: &mut Vec<usize>, leaves: &mut Vec<usize>) {
        let here = *next;
        *next += 1;
        match self {
            Expr::Leaf(_) => leaves.push(here),
            Expr::Node(_, a, b) => {
                inner.push(here);
                a.collect_indices(next, inner, leaves);
                b.collect_indices(next, inner, leaves);
            }
        }
    }

    /// Depth at which the node at preorder `index` sits (root = 1).
    pub fn depth_of(&self, index: usize) -> Option<usize> {
        fn walk(e: &Expr, target: usize, next: &mut usize, level: usize) -> Option<usize> {
            if *next == target {
                return Some(level);
            }
            *next += 1;
            match e {
                Expr::Leaf(_) => None,
                Expr::Node(_, a, b) => {
                    walk(a, target, next, level + 1).or_else(|| walk(b, target, next, level + 1))
                }
            }
        }
        let mut next = 0;
        walk(self, index, &mut next, 1)
    }
}

/// Canonical fully parenthesized text; `parse` reads it back unchanged.
impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Leaf(t) => f.write_str(t.symbol()),
            Expr::Node(func, a, b) => match func.infix() {
                Some(op) => write!(f, "({a} {op} {b})"),
                None => write!(f, "{}({a}, {b})", func.name()),
            },
        }
    }
}

pub fn format(expr: &Expr) -> String {
    expr.to_string()
}

/// Feature values at one scheduling decision point.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct DecisionContext {
    pub niq: f64,
    pub wiq: f64,
    pub mwt: f64,
    pub pt: f64,
    pub npt: f64,
    pub owt: f64,
    pub wkr: f64,
    pub nor: f64,
    pub rdd: f64,
    pub slack: f64,
    pub w: f64,
    pub tis: f64,
    pub trant: f64,
}

impl DecisionContext {
    #[inline]
    pub fn get(&self, t: Terminal) -> f64 {
        match t {
            Terminal::Niq => self.niq,
            Terminal::Wiq => self.wiq,
            Terminal::Mwt => self.mwt,
            Terminal::Pt => self.pt,
            Terminal::Npt => self.npt,
            Terminal::Owt => self.owt,
            Terminal::Wkr => self.wkr,
            Terminal::Nor => self.nor,
            Terminal::Rdd => self.rdd,
            Terminal::Slack => self.slack,
            Terminal::W => self.w,
            Terminal::Tis => self.tis,
            Terminal::Trant => self.trant,
        }
    }

    pub fn set(&mut self, t: Terminal, value: f64) {
        let slot = match t {
            Terminal::Niq => &mut self.niq,
            Terminal::Wiq => &mut self.wiq,
            Terminal::Mwt => &mut self.mwt,
            Terminal::Pt => &mut self.pt,
            Terminal::Npt => &mut self.npt,
            Terminal::Owt => &mut self.owt,
            Terminal::Wkr => &mut self.wkr,
            Terminal::Nor => &mut self.nor,
            Terminal::Rdd => &mut self.rdd,
            Terminal::Slack => &mut self.slack,
            Terminal::W => &mut self.w,
            Terminal::Tis => &mut self.tis,
            Terminal::Trant => &mut self.trant,
        };
        *slot = value;
    }

    pub fn is_finite(&self) -> bool {
        Terminal::ALL.iter().all(|t| self.get(*t).is_finite())
    }
}
