//! Rank tests, comparison tables and figure series over multi-run
//! experiments.

mod stats;

use std::collections::{BTreeMap, BTreeSet};
use std::io::Write;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::expr::Terminal;
use crate::gp::EvolutionLog;
use crate::rules::RulePair;

pub use stats::{
    friedman_ranks, friedman_test, midranks, rank_sum_exact_p, rank_sum_normal_p, wilcoxon_rank_sum,
    FriedmanResult, Marker, RankSumTest, EXACT_MAX_N,
};

#[derive(Debug, Error)]
pub enum AnalysisError {
    #[error("{0}")]
    Empty(String),
    #[error("samples contain non-finite values")]
    NonFinite,
    #[error("missing cell: method {method}, scenario {scenario}")]
    MissingCell { method: String, scenario: String },
    #[error("unbalanced run counts: {}", .0.join("; "))]
    Unbalanced(Vec<String>),
    #[error("baseline method `{0}` has no records")]
    UnknownBaseline(String),
    #[error("logs have different generation counts: {0:?}")]
    UnequalLengths(Vec<usize>),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

/// Result of one evolutionary run, as written by `evolve`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub method: String,
    pub scenario: String,
    /// Preference weights the run was trained under.
    pub preference: Vec<f64>,
    pub run: usize,
    pub seed: u64,
    pub test_fitness: f64,
    pub test_values: Vec<f64>,
    pub best_training_fitness: f64,
    pub best_generation: usize,
    pub best_routing: String,
    pub best_sequencing: String,
    pub log: EvolutionLog,
}

impl RunRecord {
    pub fn best_genome(&self) -> Result<RulePair, crate::rules::RuleTextError> {
        RulePair::parse(&self.best_routing, &self.best_sequencing)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ComparisonCell {
    pub mean: f64,
    pub std: f64,
    pub n: usize,
    /// Against the baseline; `None` when either sample has fewer than two runs.
    pub marker: Option<Marker>,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Tally {
    pub win: usize,
    pub draw: usize,
    pub lose: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ComparisonTable {
    pub baseline: String,
    /// Baseline first, then the rest in name order.
    pub methods: Vec<String>,
    pub scenarios: Vec<String>,
    /// `cells[scenario][method]`
    pub cells: Vec<Vec<ComparisonCell>>,
    pub tallies: Vec<Tally>,
    /// Mean Friedman rank per method over scenario means, when there are
    /// at least two methods and two scenarios.
    pub average_ranks: Option<Vec<f64>>,
}

pub const ALPHA: f64 = 0.05;

fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let ss: f64 = values.iter().map(|v| (v - mean).powi(2)).sum();
    (mean, (ss / (n - 1.0)).sqrt())
}

/// Mean, sample standard deviation and rank-sum marker against
/// `baseline` for every (scenario, method) cell.
pub fn summarize(records: &[RunRecord], baseline: &str) -> Result<ComparisonTable, AnalysisError> {
    if records.is_empty() {
        return Err(AnalysisError::Empty("no run records".into()));
    }
    let mut samples: BTreeMap<(&str, &str), Vec<f64>> = BTreeMap::new();
    for r in records {
        samples.entry((r.scenario.as_str(), r.method.as_str())).or_default().push(r.test_fitness);
    }
    for v in samples.values_mut() {
        v.sort_by(f64::total_cmp);
    }
    let scenarios: BTreeSet<&str> = samples.keys().map(|k| k.0).collect();
    let names: BTreeSet<&str> = samples.keys().map(|k| k.1).collect();
    if !names.contains(baseline) {
        return Err(AnalysisError::UnknownBaseline(baseline.into()));
    }
    let mut methods = vec![baseline.to_string()];
    methods.extend(names.iter().filter(|m| **m != baseline).map(|m| m.to_string()));

    let expected = samples.values().map(Vec::len).max().unwrap_or(0);
    let mut problems = Vec::new();
    for s in &scenarios {
        for m in &methods {
            let n = samples.get(&(*s, m.as_str())).map_or(0, Vec::len);
            if n != expected {
                problems.push(format!("{m} on {s}: {n} runs, expected {expected}"));
            }
        }
    }
    if !problems.is_empty() {
        return Err(AnalysisError::Unbalanced(problems));
    }

    let mut cells = Vec::new();
    let mut tallies = vec![Tally::default(); methods.len()];
    for s in &scenarios {
        let base = &samples[&(*s, baseline)];
        let mut row = Vec::new();
        for (mi, m) in methods.iter().enumerate() {
            let v = &samples[&(*s, m.as_str())];
            let (mean, std) = mean_std(v);
            let marker = if v.len() >= 2 && base.len() >= 2 {
                Some(wilcoxon_rank_sum(v, base, ALPHA)?.marker)
            } else {
                None
            };
            match marker {
                Some(Marker::Better) => tallies[mi].win += 1,
                Some(Marker::Worse) => tallies[mi].lose += 1,
                Some(Marker::Equal) => tallies[mi].draw += 1,
                None => {}
            }
            row.push(ComparisonCell { mean, std, n: v.len(), marker });
        }
        cells.push(row);
    }
    let average_ranks = if methods.len() >= 2 && scenarios.len() >= 2 {
        let table: Vec<Vec<Option<f64>>> =
            (0..methods.len()).map(|m| cells.iter().map(|row| Some(row[m].mean)).collect()).collect();
        Some(friedman_ranks(&table)?)
    } else {
        None
    };
    Ok(ComparisonTable {
        baseline: baseline.into(),
        methods,
        scenarios: scenarios.into_iter().map(String::from).collect(),
        cells,
        tallies,
        average_ranks,
    })
}

impl ComparisonTable {
    /// One row per scenario, one column per method with `mean(std)` and
    /// the marker, then win|draw|lose and average-rank rows.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<(), AnalysisError> {
        let mut w = csv::Writer::from_writer(out);
        let mut header = vec!["scenario".to_string()];
        header.extend(self.methods.iter().cloned());
        w.write_record(&header)?;
        for (s, row) in self.scenarios.iter().zip(&self.cells) {
            let mut rec = vec![s.clone()];
            for c in row {
                let mark = c.marker.map_or(String::new(), |m| format!(" {m}"));
                rec.push(format!("{:.4}({:.4}){mark}", c.mean, c.std));
            }
            w.write_record(&rec)?;
        }
        let mut rec = vec!["win|draw|lose".to_string()];
        rec.extend(self.tallies.iter().map(|t| format!("{}|{}|{}", t.win, t.draw, t.lose)));
        w.write_record(&rec)?;
        if let Some(ranks) = &self.average_ranks {
            let mut rec = vec!["average rank".to_string()];
            rec.extend(ranks.iter().map(|r| format!("{r:.2}")));
            w.write_record(&rec)?;
        }
        w.flush().map_err(csv::Error::from)?;
        Ok(())
    }
}

/// Generation-0 fitness values of every run, grouped by method.
pub fn initial_fitness_distribution(records: &[RunRecord]) -> Result<BTreeMap<String, Vec<f64>>, AnalysisError> {
    if records.is_empty() {
        return Err(AnalysisError::Empty("no run records".into()));
    }
    let mut out: BTreeMap<String, Vec<f64>> = BTreeMap::new();
    for r in records {
        out.entry(r.method.clone()).or_default().extend(&r.log.initial_fitness);
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq)]
pub struct TerminalFrequency {
    pub routing: BTreeMap<Terminal, f64>,
    pub sequencing: BTreeMap<Terminal, f64>,
}

/// Mean occurrences of every terminal in the routing and sequencing
/// trees of the given rule pairs.
pub fn terminal_frequency_report(best: &[RulePair]) -> Result<TerminalFrequency, AnalysisError> {
    if best.is_empty() {
        return Err(AnalysisError::Empty("no rule pairs".into()));
    }
    let n = best.len() as f64;
    let mean_of = |pick: fn(&RulePair) -> &crate::expr::Expr| {
        let mut m: BTreeMap<Terminal, f64> = Terminal::ALL.iter().map(|&t| (t, 0.0)).collect();
        for p in best {
            for (t, c) in pick(p).terminal_histogram() {
                *m.get_mut(&t).unwrap() += c as f64;
            }
        }
        m.values_mut().for_each(|v| *v /= n);
        m
    };
    Ok(TerminalFrequency { routing: mean_of(|p| &p.routing), sequencing: mean_of(|p| &p.sequencing) })
}

fn generationwise(logs: &[&EvolutionLog], value: fn(&crate::gp::GenerationStats) -> f64) -> Result<Vec<f64>, AnalysisError> {
    if logs.is_empty() {
        return Err(AnalysisError::Empty("no evolution logs".into()));
    }
    let lengths: Vec<usize> = logs.iter().map(|l| l.generations.len()).collect();
    if lengths.iter().any(|&l| l != lengths[0]) {
        return Err(AnalysisError::UnequalLengths(lengths));
    }
    Ok((0..lengths[0])
        .map(|g| logs.iter().map(|l| value(&l.generations[g])).sum::<f64>() / logs.len() as f64)
        .collect())
}

/// Mean phenotypic diversity per generation across runs.
pub fn diversity_series(logs: &[&EvolutionLog]) -> Result<Vec<f64>, AnalysisError> {
    generationwise(logs, |g| g.diversity)
}

/// Mean best-of-generation training fitness per generation across runs.
pub fn convergence_series(logs: &[&EvolutionLog]) -> Result<Vec<f64>, AnalysisError> {
    generationwise(logs, |g| g.best)
}

/// `generation,<label>...` with one column per labelled series.
pub fn write_series_csv<W: Write>(out: W, series: &[(String, Vec<f64>)]) -> Result<(), AnalysisError> {
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["generation".to_string()];
    header.extend(series.iter().map(|(l, _)| l.clone()));
    w.write_record(&header)?;
    let len = series.iter().map(|(_, v)| v.len()).max().unwrap_or(0);
    for g in 0..len {
        let mut rec = vec![g.to_string()];
        rec.extend(series.iter().map(|(_, v)| v.get(g).map_or(String::new(), |x| x.to_string())));
        w.write_record(&rec)?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

/// Long-format `method,fitness` rows.
pub fn write_distribution_csv<W: Write>(out: W, dist: &BTreeMap<String, Vec<f64>>) -> Result<(), AnalysisError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["method", "fitness"])?;
    for (m, values) in dist {
        for v in values {
            w.write_record([m.clone(), v.to_string()])?;
        }
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

/// `terminal,routing,sequencing`
pub fn write_terminal_csv<W: Write>(out: W, freq: &TerminalFrequency) -> Result<(), AnalysisError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["terminal", "routing", "sequencing"])?;
    for t in Terminal::ALL {
        w.write_record([t.symbol().to_string(), freq.routing[&t].to_string(), freq.sequencing[&t].to_string()])?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}
