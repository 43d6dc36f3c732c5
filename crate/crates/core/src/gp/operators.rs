use rand::Rng;

use super::{GpParams, Individual, Origin};
use crate::expr::{random_tree, Expr, TreeMode};
use crate::rules::Slot;

/// Winner among the given contestant indices: lowest fitness, ties to
/// the lower population index. Unevaluated individuals lose to any
/// evaluated one.
pub fn tournament_winner(pop: &[Individual], contestants: &[usize]) -> usize {
    let mut best = contestants[0];
    for &c in &contestants[1..] {
        let (fc, fb) = (pop[c].fitness_or_inf(), pop[best].fitness_or_inf());
        if fc < fb || (fc == fb && c < best) {
            best = c;
        }
    }
    best
}

/// Draws `tournament_size` contestants uniformly with replacement and
/// returns the winner's index.
pub fn tournament_select<R: Rng + ?Sized>(pop: &[Individual], tournament_size: usize, rng: &mut R) -> usize {
    assert!(!pop.is_empty(), "tournament over an empty population");
    let contestants: Vec<usize> = (0..tournament_size.max(1)).map(|_| rng.random_range(0..pop.len())).collect();
    tournament_winner(pop, &contestants)
}

/// Preorder index of a crossover point: an inner node with probability
/// `1 - terminal_rate` (when the tree has one), otherwise a leaf.
pub fn pick_node<R: Rng + ?Sized>(tree: &Expr, terminal_rate: f64, rng: &mut R) -> usize {
    let (inner, leaves) = tree.node_indices();
    let pool = if inner.is_empty() || rng.random_bool(terminal_rate) { &leaves } else { &inner };
    pool[rng.random_range(0..pool.len())]
}

/// Exchanges the subtree at preorder `ia` of `a` with the one at `ib` of `b`.
pub fn swap_subtrees(a: &Expr, ia: usize, b: &Expr, ib: usize) -> (Expr, Expr) {
    let sa = a.subtree(ia).expect("index within a");
    let sb = b.subtree(ib).expect("index within b");
    (a.replace_subtree(ia, sb).unwrap(), b.replace_subtree(ib, sa).unwrap())
}

fn random_slot<R: Rng + ?Sized>(rng: &mut R) -> Slot {
    Slot::BOTH[rng.random_range(0..2)]
}

/// Subtree crossover on one randomly chosen slot, the same slot in both
/// parents. A child deeper than the cap is replaced by its parent.
pub fn crossover<R: Rng + ?Sized>(
    a: &Individual,
    b: &Individual,
    params: &GpParams,
    rng: &mut R,
) -> (Individual, Individual) {
    let slot = random_slot(rng);
    let (ta, tb) = (a.genome.tree(slot), b.genome.tree(slot));
    let ia = pick_node(ta, params.terminal_rate, rng);
    let ib = pick_node(tb, params.terminal_rate, rng);
    let (ca, cb) = swap_subtrees(ta, ia, tb, ib);
    let child = |parent: &Individual, tree: Expr| {
        if tree.depth() > params.max_depth {
            Individual::new(parent.genome.clone(), Origin::Crossover)
        } else {
            Individual::new(parent.genome.with_tree(slot, tree), Origin::Crossover)
        }
    };
    (child(a, ca), child(b, cb))
}

/// Replaces a uniformly chosen subtree of one slot with a grown one.
pub fn mutate<R: Rng + ?Sized>(a: &Individual, params: &GpParams, rng: &mut R) -> Individual {
    let slot = random_slot(rng);
    let tree = a.genome.tree(slot);
    let at = rng.random_range(0..tree.size());
    let (lo, hi) = params.mutation_depth;
    let fresh = random_tree(rng, TreeMode::Grow, lo..=hi, params.terminal_rate);
    let out = tree.replace_subtree(at, &fresh).unwrap();
    let genome = if out.depth() > params.max_depth { a.genome.clone() } else { a.genome.with_tree(slot, out) };
    Individual::new(genome, Origin::Mutation)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse;
    use crate::rules::RulePair;
    use crate::seeding::rng_for;

    fn ind(r: &str, s: &str, f: Option<f64>) -> Individual {
        Individual { genome: RulePair::parse(r, s).unwrap(), fitness: f, origin: Origin::Random }
    }

    #[test]
    fn single_member_tournament() {
        let pop = vec![ind("PT", "PT", Some(5.0))];
        assert_eq!(tournament_select(&pop, 4, &mut rng_for(0, 0, 0)), 0);
    }

    #[test]
    fn tie_goes_to_lower_index() {
        let pop: Vec<_> = [3.0, 1.0, 4.0, 1.0].iter().map(|&f| ind("PT", "W", Some(f))).collect();
        assert_eq!(tournament_winner(&pop, &[0, 1, 2, 3]), 1);
        assert_eq!(tournament_winner(&pop, &[3, 2, 1, 0]), 1);
        assert_eq!(tournament_winner(&pop, &[3, 0, 2, 2]), 3);
    }

    #[test]
    fn unevaluated_never_beats_evaluated() {
        let pop = vec![ind("PT", "W", None), ind("PT", "W", Some(1e300))];
        assert_eq!(tournament_winner(&pop, &[0, 1]), 1);
    }

    #[test]
    fn best_selected_at_closed_form_rate() {
        let n = 20;
        let pop: Vec<_> = (0..n).map(|i| ind("PT", "W", Some(i as f64))).collect();
        let mut rng = rng_for(1, 0, 0);
        let draws = 100_000;
        let wins = (0..draws).filter(|_| tournament_select(&pop, 4, &mut rng) == 0).count();
        let expected = 1.0 - (1.0 - 1.0 / n as f64).powi(4);
        let got = wins as f64 / draws as f64;
        assert!((got - expected).abs() < 0.01, "{got} vs {expected}");
    }

    #[test]
    fn identical_leaf_parents() {
        let a = ind("PT", "W", None);
        let p = GpParams::default();
        let mut rng = rng_for(2, 0, 0);
        for _ in 0..50 {
            let (x, y) = crossover(&a, &a, &p, &mut rng);
            assert_eq!((x.genome, y.genome), (a.genome.clone(), a.genome.clone()));
        }
    }

    #[test]
    fn root_swap_exchanges_trees() {
        let a = parse("PT + W").unwrap();
        let b = parse("min(NIQ, TIS)").unwrap();
        assert_eq!(swap_subtrees(&a, 0, &b, 0), (b.clone(), a.clone()));
        let (x, y) = swap_subtrees(&a, 1, &b, 2);
        assert_eq!(x.to_string(), "(TIS + W)");
        assert_eq!(y.to_string(), "min(NIQ, PT)");
    }

    fn chain(depth: usize) -> String {
        let mut s = "PT".to_string();
        for _ in 1..depth {
            s = format!("({s} + W)");
        }
        s
    }

    #[test]
    fn over_deep_children_revert_to_parents() {
        let deep = chain(8);
        let a = ind(&deep, &deep, None);
        let (x, y) = swap_subtrees(&a.genome.routing, 7, &a.genome.routing, 1);
        assert_eq!(x.depth(), 8 + 6);
        assert!(y.depth() <= 8);
        let p = GpParams::default();
        let mut rng = rng_for(5, 0, 0);
        let mut reverted = 0;
        for _ in 0..200 {
            let (x, y) = crossover(&a, &a, &p, &mut rng);
            for c in [&x, &y] {
                assert!(c.genome.max_depth() <= 8);
                if c.genome == a.genome {
                    reverted += 1;
                }
            }
        }
        assert!(reverted > 0);
    }

    #[test]
    fn mutation_respects_cap_and_is_deterministic() {
        let deep = chain(8);
        let a = ind(&deep, &deep, None);
        let p = GpParams::default();
        let mut r1 = rng_for(6, 0, 0);
        let mut r2 = rng_for(6, 0, 0);
        for _ in 0..200 {
            let x = mutate(&a, &p, &mut r1);
            assert!(x.genome.max_depth() <= 8);
            assert_eq!(x, mutate(&a, &p, &mut r2));
        }
    }

    #[test]
    fn leaf_mutation_replaces_whole_tree() {
        let a = ind("PT", "PT", None);
        let p = GpParams { mutation_depth: (3, 3), ..Default::default() };
        let x = mutate(&a, &p, &mut rng_for(7, 0, 0));
        let changed = if x.genome.routing != a.genome.routing { &x.genome.routing } else { &x.genome.sequencing };
        assert_eq!(changed.depth(), 3);
    }

    #[test]
    fn crossover_point_bias() {
        let t = parse("((PT + W) * (NIQ - TIS)) / min(WKR, NOR)").unwrap();
        let (inner, _) = t.node_indices();
        let mut rng = rng_for(8, 0, 0);
        let n = 20_000;
        let hits = (0..n).filter(|_| inner.contains(&pick_node(&t, 0.1, &mut rng))).count();
        let frac = hits as f64 / n as f64;
        assert!((frac - 0.9).abs() < 0.01, "{frac}");
    }
}
