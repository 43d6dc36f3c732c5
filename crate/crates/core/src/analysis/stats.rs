use std::fmt;

use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF, Normal};

use super::AnalysisError;

/// Outcome of comparing sample `a` against sample `b` (minimization).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Marker {
    /// `a` is significantly lower.
    Better,
    /// `a` is significantly higher.
    Worse,
    Equal,
}

impl Marker {
    pub fn symbol(self) -> &'static str {
        match self {
            Marker::Better => "↑",
            Marker::Worse => "↓",
            Marker::Equal => "=",
        }
    }

    pub fn flip(self) -> Marker {
        match self {
            Marker::Better => Marker::Worse,
            Marker::Worse => Marker::Better,
            Marker::Equal => Marker::Equal,
        }
    }
}

impl fmt::Display for Marker {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.symbol())
    }
}

/// Ranks starting at 1, ties sharing the mean of the ranks they span.
pub fn midranks(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&i, &j| values[i].total_cmp(&values[j]));
    let mut ranks = vec![0.0; values.len()];
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() && values[order[end]] == values[order[start]] {
            end += 1;
        }
        let rank = (start + 1 + end) as f64 / 2.0;
        for &k in &order[start..end] {
            ranks[k] = rank;
        }
        start = end;
    }
    ranks
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RankSumTest {
    /// Sum of `a`'s ranks in the pooled sample.
    pub w: f64,
    pub p: f64,
    pub exact: bool,
    pub marker: Marker,
}

/// Largest group size for which the exact distribution is used.
pub const EXACT_MAX_N: usize = 8;

fn check(a: &[f64], b: &[f64]) -> Result<(), AnalysisError> {
    if a.is_empty() || b.is_empty() {
        return Err(AnalysisError::Empty("rank-sum test needs two non-empty samples".into()));
    }
    if a.iter().chain(b).any(|v| !v.is_finite()) {
        return Err(AnalysisError::NonFinite);
    }
    Ok(())
}

fn pooled_ranks(a: &[f64], b: &[f64]) -> Vec<f64> {
    let pooled: Vec<f64> = a.iter().chain(b).copied().collect();
    midranks(&pooled)
}

/// Two-sided exact p-value from the permutation distribution of the
/// rank sum, ties included (midranks are held fixed).
pub fn rank_sum_exact_p(a: &[f64], b: &[f64]) -> Result<f64, AnalysisError> {
    check(a, b)?;
    let (n1, n) = (a.len(), a.len() + b.len());
    // Doubled midranks are integers.
    let doubled: Vec<usize> = pooled_ranks(a, b).iter().map(|r| (r * 2.0).round() as usize).collect();
    let observed: i64 = doubled[..n1].iter().map(|&r| r as i64).sum();
    let max_sum: usize = doubled.iter().sum();
    // ways[k][s]: subsets of size k with doubled-rank sum s.
    let mut ways = vec![vec![0f64; max_sum + 1]; n1 + 1];
    ways[0][0] = 1.0;
    for &r in &doubled {
        for k in (1..=n1).rev() {
            for s in (r..=max_sum).rev() {
                let add = ways[k - 1][s - r];
                if add != 0.0 {
                    ways[k][s] += add;
                }
            }
        }
    }
    let centre = (n1 * (n + 1)) as i64;
    let dev = (observed - centre).abs();
    let (mut hit, mut total) = (0.0, 0.0);
    for (s, &c) in ways[n1].iter().enumerate() {
        total += c;
        if (s as i64 - centre).abs() >= dev {
            hit += c;
        }
    }
    Ok((hit / total).min(1.0))
}

/// Two-sided p-value from the normal approximation with tie and
/// continuity corrections.
pub fn rank_sum_normal_p(a: &[f64], b: &[f64]) -> Result<f64, AnalysisError> {
    check(a, b)?;
    let (n1, n2) = (a.len() as f64, b.len() as f64);
    let n = n1 + n2;
    let ranks = pooled_ranks(a, b);
    let w: f64 = ranks[..a.len()].iter().sum();
    let mean = n1 * (n + 1.0) / 2.0;
    let mut sorted = ranks.clone();
    sorted.sort_by(f64::total_cmp);
    let mut ties = 0.0;
    let mut i = 0;
    while i < sorted.len() {
        let mut j = i;
        while j < sorted.len() && sorted[j] == sorted[i] {
            j += 1;
        }
        let t = (j - i) as f64;
        ties += t * t * t - t;
        i = j;
    }
    let var = n1 * n2 / 12.0 * ((n + 1.0) - ties / (n * (n - 1.0)));
    if !(var > 0.0) {
        return Ok(1.0);
    }
    let z = ((w - mean).abs() - 0.5).max(0.0) / var.sqrt();
    let std_normal = Normal::new(0.0, 1.0).expect("unit normal");
    Ok((2.0 * (1.0 - std_normal.cdf(z))).min(1.0))
}

/// Wilcoxon rank-sum test of `a` against `b`: exact when both samples
/// have at most [`EXACT_MAX_N`] values, normal approximation otherwise.
pub fn wilcoxon_rank_sum(a: &[f64], b: &[f64], alpha: f64) -> Result<RankSumTest, AnalysisError> {
    check(a, b)?;
    let ranks = pooled_ranks(a, b);
    let w: f64 = ranks[..a.len()].iter().sum();
    let exact = a.len() <= EXACT_MAX_N && b.len() <= EXACT_MAX_N;
    let p = if exact { rank_sum_exact_p(a, b)? } else { rank_sum_normal_p(a, b)? };
    let mean = a.len() as f64 * (a.len() + b.len() + 1) as f64 / 2.0;
    let marker = if p < alpha && w < mean {
        Marker::Better
    } else if p < alpha && w > mean {
        Marker::Worse
    } else {
        Marker::Equal
    };
    Ok(RankSumTest { w, p, exact, marker })
}

#[derive(Clone, Debug, PartialEq)]
pub struct FriedmanResult {
    /// Mean rank per method (1 = best).
    pub average_ranks: Vec<f64>,
    pub statistic: f64,
    pub p: f64,
}

/// Ranks methods (rows) within each scenario (column), lowest value
/// first, and averages per method. `None` marks a missing cell.
pub fn friedman_ranks(table: &[Vec<Option<f64>>]) -> Result<Vec<f64>, AnalysisError> {
    Ok(friedman_test(table)?.average_ranks)
}

pub fn friedman_test(table: &[Vec<Option<f64>>]) -> Result<FriedmanResult, AnalysisError> {
    let k = table.len();
    if k < 2 {
        return Err(AnalysisError::Empty("Friedman ranking needs at least two methods".into()));
    }
    let s = table[0].len();
    if s < 2 || table.iter().any(|row| row.len() != s) {
        return Err(AnalysisError::Empty("Friedman ranking needs at least two scenarios in every row".into()));
    }
    let mut sums = vec![0.0; k];
    for col in 0..s {
        let mut values = Vec::with_capacity(k);
        for (m, row) in table.iter().enumerate() {
            values.push(row[col].ok_or(AnalysisError::MissingCell { method: m.to_string(), scenario: col.to_string() })?);
        }
        for (m, r) in midranks(&values).into_iter().enumerate() {
            sums[m] += r;
        }
    }
    let (kf, sf) = (k as f64, s as f64);
    let average_ranks: Vec<f64> = sums.iter().map(|r| r / sf).collect();
    let statistic = 12.0 * sf / (kf * (kf + 1.0))
        * (average_ranks.iter().map(|r| r * r).sum::<f64>() - kf * (kf + 1.0).powi(2) / 4.0);
    let chi = ChiSquared::new(kf - 1.0).expect("positive degrees of freedom");
    let p = (1.0 - chi.cdf(statistic.max(0.0))).clamp(0.0, 1.0);
    Ok(FriedmanResult { average_ranks, statistic, p })
}
