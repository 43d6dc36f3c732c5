use std::ops::RangeInclusive;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{Expr, Function, Terminal};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TreeMode {
    /// Every leaf sits at one depth drawn uniformly from the range.
    Full,
    /// Below the minimum depth only functions are drawn; between the
    /// minimum and the maximum a terminal is drawn with `terminal_rate`;
    /// at the maximum only terminals.
    Grow,
}

/// Draws a random tree whose depth lies in `depths`.
///
/// Panics if the range is empty or starts at 0.
pub fn random_tree<R: Rng + ?Sized>(
    rng: &mut R,
    mode: TreeMode,
    depths: RangeInclusive<usize>,
    terminal_rate: f64,
) -> Expr {
    let (lo, hi) = (*depths.start(), *depths.end());
    assert!(lo >= 1 && lo <= hi, "invalid depth range {lo}..={hi}");
    match mode {
        TreeMode::Full => {
            let d = rng.random_range(lo..=hi);
            full(rng, 1, d)
        }
        TreeMode::Grow => grow(rng, 1, lo, hi, terminal_rate),
    }
}

fn random_terminal<R: Rng + ?Sized>(rng: &mut R) -> Terminal {
    Terminal::ALL[rng.random_range(0..Terminal::ALL.len())]
}

fn random_function<R: Rng + ?Sized>(rng: &mut R) -> Function {
    Function::ALL[rng.random_range(0..Function::ALL.len())]
}

fn full<R: Rng + ?Sized>(rng: &mut R, level: usize, depth: usize) -> Expr {
    if level == depth {
        return Expr::Leaf(random_terminal(rng));
    }
    let f = random_function(rng);
    let a = full(rng, level + 1, depth);
    let b = full(rng, level + 1, depth);
    Expr::node(f, a, b)
}

fn grow<R: Rng + ?Sized>(rng: &mut R, level: usize, lo: usize, hi: usize, rate: f64) -> Expr {
    let leaf = if level >= hi {
        true
    } else if level < lo {
        false
    } else {
        rng.random_bool(rate)
    };
    if leaf {
        return Expr::Leaf(random_terminal(rng));
    }
    let f = random_function(rng);
    let a = grow(rng, level + 1, lo, hi, rate);
    let b = grow(rng, level + 1, lo, hi, rate);
    Expr::node(f, a, b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn leaf_depths(e: &Expr, level: usize, out: &mut Vec<usize>) {
        match e {
            Expr::Leaf(_) => out.push(level),
            Expr::Node(_, a, b) => {
                leaf_depths(a, level + 1, out);
                leaf_depths(b, level + 1, out);
            }
        }
    }

    #[test]
    fn full_depth_two_has_all_leaves_at_two() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..50 {
            let e = random_tree(&mut rng, TreeMode::Full, 2..=2, 0.1);
            let mut d = Vec::new();
            leaf_depths(&e, 1, &mut d);
            assert!(d.iter().all(|&x| x == 2));
            assert_eq!(e.size(), 3);
        }
    }

    #[test]
    fn grow_depth_one_is_a_leaf() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..20 {
            assert!(random_tree(&mut rng, TreeMode::Grow, 1..=1, 0.1).is_leaf());
        }
    }

    #[test]
    fn depth_bounds_respected() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..500 {
            let g = random_tree(&mut rng, TreeMode::Grow, 2..=6, 0.1);
            assert!((2..=6).contains(&g.depth()));
            let f = random_tree(&mut rng, TreeMode::Full, 2..=6, 0.1);
            assert!((2..=6).contains(&f.depth()));
        }
    }

    // Each node at a level strictly between min and max depth was an
    // independent Bernoulli(terminal_rate) draw, so the observed terminal
    // fraction over those levels estimates the rate.
    #[test]
    fn grow_terminal_rate_monte_carlo() {
        fn tally(e: &Expr, level: usize, hi: usize, leaves: &mut u64, total: &mut u64) {
            if level < hi {
                *total += 1;
                if e.is_leaf() {
                    *leaves += 1;
                }
            }
            if let Expr::Node(_, a, b) = e {
                tally(a, level + 1, hi, leaves, total);
                tally(b, level + 1, hi, leaves, total);
            }
        }
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let (mut leaves, mut total) = (0, 0);
        while total < 10_000 {
            let e = random_tree(&mut rng, TreeMode::Grow, 1..=4, 0.10);
            tally(&e, 1, 4, &mut leaves, &mut total);
        }
        let frac = leaves as f64 / total as f64;
        assert!((frac - 0.10).abs() <= 0.01, "terminal fraction {frac}");
    }
}
