use sha2::{Digest, Sha256};

use super::{LlmError, PreferenceWeights, ReferenceHeuristic};
use crate::expr::{Function, Terminal};
use crate::rules::RulePair;
use crate::sim::Scenario;

pub const SYSTEM_PROMPT: &str = "You are an expert in production scheduling and genetic programming. \
Follow the requested output format exactly; your reply is parsed by a program.";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum PromptKind {
    Init,
    Transfer,
    Explain,
}

impl PromptKind {
    pub fn name(self) -> &'static str {
        match self {
            PromptKind::Init => "init",
            PromptKind::Transfer => "transfer",
            PromptKind::Explain => "explain",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PromptSection {
    pub title: String,
    pub body: String,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PromptSpec {
    pub kind: PromptKind,
    pub sections: Vec<PromptSection>,
    /// No reference heuristics were supplied.
    pub zero_shot: bool,
}

impl PromptSpec {
    pub fn render(&self) -> String {
        let mut out = String::new();
        for (i, s) in self.sections.iter().enumerate() {
            if i > 0 {
                out.push('\n');
            }
            out.push_str(&format!("## {}\n\n{}\n", s.title, s.body.trim_end()));
        }
        out
    }

    /// Hex SHA-256 of the rendered text.
    pub fn digest(&self) -> String {
        hex::encode(Sha256::digest(self.render().as_bytes()))
    }

    pub fn section(&self, title: &str) -> Option<&PromptSection> {
        self.sections.iter().find(|s| s.title == title)
    }
}

fn section(title: &str, body: String) -> PromptSection {
    PromptSection { title: title.to_string(), body }
}

fn glossary() -> String {
    let mut out = String::from("| Terminal | Meaning |\n|---|---|\n");
    for t in Terminal::ALL {
        out.push_str(&format!("| {} | {} |\n", t.symbol(), t.description()));
    }
    out
}

fn grammar_notes() -> String {
    let funcs: Vec<&str> = [Function::Add, Function::Sub, Function::Mul, Function::Div, Function::Min, Function::Max]
        .iter()
        .map(|f| f.name())
        .collect();
    format!(
        "Functions (all binary): {}. `/` is protected: x / 0 = 1.\n\
         Write `+ - * /` infix and `min(a, b)`, `max(a, b)` as calls. Parentheses are allowed.\n\
         Terminal names are case-sensitive. No numeric constants and no other functions.\n\
         Each tree may be at most 8 levels deep (a single terminal has depth 1).\n",
        funcs.join(", ")
    )
}

fn shop_context(s: &Scenario, prefs: &PreferenceWeights) -> String {
    let objectives: Vec<String> =
        prefs.0.iter().map(|(o, _)| format!("- {o}: {}", o.description())).collect();
    format!(
        "We schedule a dynamic flexible job shop. Jobs arrive over time (Poisson process) and \
         consist of a sequence of operations; each operation may run on several eligible machines \
         with different processing rates, and jobs are transported between machines.\n\
         Two rules make every decision. The routing rule scores each eligible machine when an \
         operation becomes ready; the machine with the smallest score receives it. The sequencing \
         rule scores each queued operation when a machine becomes idle; the smallest score is \
         processed next.\n\n\
         Shop utilization: {}\n\
         Objectives:\n{}\n\n\
         Minimize the weighted objective\n\n    F = {}\n",
        s.utilization,
        objectives.join("\n"),
        prefs.equation()
    )
}

fn output_contract(n: usize) -> String {
    format!(
        "First write a section headed `## Insights` with the patterns you found.\n\
         Then write exactly {n} rule pairs. Put each pair in its own fenced block:\n\n\
         ```rules\nrouting: <expression>\nsequencing: <expression>\n```\n\n\
         Use only the terminals and functions listed above. Do not number the blocks or add \
         anything else inside them.\n"
    )
}

fn reference_block(refs: &[ReferenceHeuristic]) -> String {
    if refs.is_empty() {
        return "No reference heuristics are available; rely on scheduling knowledge.\n".to_string();
    }
    let mut out = String::new();
    for (i, r) in refs.iter().enumerate() {
        out.push_str(&format!("H{} (evolved for {}):\n", i + 1, r.label));
        out.push_str(&format!("routing: {}\nsequencing: {}\n", r.rules.routing, r.rules.sequencing));
        if let Some(note) = &r.note {
            out.push_str(&format!("note: {note}\n"));
        }
        out.push('\n');
    }
    out
}

/// Prompt asking for `n` new rule pairs informed by `refs` and tuned to
/// the preference weights.
pub fn build_init_prompt(
    scenario: &Scenario,
    refs: &[ReferenceHeuristic],
    prefs: &PreferenceWeights,
    n: usize,
) -> Result<PromptSpec, LlmError> {
    if n == 0 {
        return Err(LlmError::Prompt("at least one rule pair must be requested".into()));
    }
    prefs.validate()?;
    let heuristics = format!(
        "{}Each reference is a routing/sequencing pair written in this grammar. \
         Lower scores mean higher priority.\n\n{}\n{}",
        reference_block(refs),
        glossary(),
        grammar_notes()
    );
    let task = format!(
        "1. Analyze the reference heuristics: which terminals and sub-expressions recur, and how \
         they trade off the objectives above. Summarize these as insights.\n\
         2. Using those insights, design {n} new rule pairs that minimize F under the weights given. \
         Weight each objective in proportion to its coefficient. Keep the pairs diverse.\n"
    );
    Ok(PromptSpec {
        kind: PromptKind::Init,
        sections: vec![
            section("Problem context", shop_context(scenario, prefs)),
            section("Reference heuristics", heuristics),
            section("Task", task),
            section("Output format", output_contract(n)),
        ],
        zero_shot: refs.is_empty(),
    })
}

fn same_task(a: &Scenario, b: &Scenario) -> bool {
    a.objectives == b.objectives && a.lambdas == b.lambdas && a.utilization == b.utilization
}

/// Prompt that adapts heuristics from `source` to `target`.
pub fn build_transfer_prompt(
    refs: &[ReferenceHeuristic],
    source: &Scenario,
    target: &Scenario,
    prefs: &PreferenceWeights,
    n: usize,
    source_insights: Option<&str>,
) -> Result<PromptSpec, LlmError> {
    if same_task(source, target) {
        return Err(LlmError::Prompt("source and target scenarios are identical".into()));
    }
    if n == 0 {
        return Err(LlmError::Prompt("at least one rule pair must be requested".into()));
    }
    prefs.validate()?;
    let keys = |s: &Scenario| s.objectives.iter().map(|o| o.name()).collect::<Vec<_>>().join(", ");
    let mut heuristics = format!("Source task {}:\n\n{}", source.label(), reference_block(refs));
    if let Some(ins) = source_insights {
        heuristics.push_str(&format!("Insights extracted on the source task:\n{}\n\n", ins.trim()));
    }
    heuristics.push_str(&glossary());
    heuristics.push('\n');
    heuristics.push_str(&grammar_notes());
    let statistics = format!(
        "Target statistics:\n- utilization: {} (source: {})\n- objectives: {} (source: {})\n- weights: {}\n",
        target.utilization,
        source.utilization,
        keys(target),
        keys(source),
        prefs.equation()
    );
    let steps = format!(
        "{statistics}\n\
         1. Generalize: identify the parts of the source heuristics that express decision logic \
         independent of the source task, and keep them.\n\
         2. Adapt: adjust those parts to the target statistics above, in particular the target \
         objectives ({}) and the utilization level {}.\n\
         3. Map: re-express any feature the source heuristics rely on in terms of the terminals \
         that matter for the target task.\n",
        keys(target),
        target.utilization
    );
    Ok(PromptSpec {
        kind: PromptKind::Transfer,
        sections: vec![
            section("Problem context", shop_context(target, prefs)),
            section("Source heuristics", heuristics),
            section("Adaptation steps", steps),
            section("Output format", output_contract(n)),
        ],
        zero_shot: refs.is_empty(),
    })
}

/// Prompt asking for a structured explanation of `best`.
pub fn build_explain_prompt(best: &RulePair, scenario: &Scenario) -> Result<PromptSpec, LlmError> {
    if scenario.objectives.is_empty() {
        return Err(LlmError::Prompt("scenario has no objectives".into()));
    }
    let prefs = PreferenceWeights::from_scenario(scenario);
    let rule = format!(
        "routing: {}\nsequencing: {}\n\nLower scores mean higher priority.\n\n{}\n{}",
        best.routing,
        best.sequencing,
        glossary(),
        grammar_notes()
    );
    let request = "Write a report with these sections:\n\n\
         ### Decision logic\nHow each rule ranks machines or operations, term by term.\n\n\
         ### Dominant terminals\nWhich features drive the decisions and why.\n\n\
         ### Preference alignment\nHow the rules serve the weighted objective.\n\n\
         ### Summary for non-experts\nA few plain sentences a shop-floor manager can act on.\n"
        .to_string();
    Ok(PromptSpec {
        kind: PromptKind::Explain,
        sections: vec![
            section("Problem context", shop_context(scenario, &prefs)),
            section("Evolved heuristic", rule),
            section("Report", request),
        ],
        zero_shot: false,
    })
}
