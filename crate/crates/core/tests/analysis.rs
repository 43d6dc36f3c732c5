use dfjss_core::analysis::{
    diversity_series, friedman_ranks, initial_fitness_distribution, midranks, rank_sum_exact_p, rank_sum_normal_p,
    summarize, terminal_frequency_report, wilcoxon_rank_sum, AnalysisError, Marker, RunRecord,
};
use dfjss_core::expr::Terminal;
use dfjss_core::gp::{EvolutionLog, GenerationStats, OperatorCounts};
use dfjss_core::rules::RulePair;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Two-sided p by listing every way to pick `a`'s positions.
fn brute_force_p(a: &[f64], b: &[f64]) -> f64 {
    let pooled: Vec<f64> = a.iter().chain(b).copied().collect();
    let ranks = midranks(&pooled);
    let n = pooled.len();
    let centre = a.len() as f64 * (n as f64 + 1.0) / 2.0;
    let observed = (ranks[..a.len()].iter().sum::<f64>() - centre).abs();
    let (mut hit, mut total) = (0u64, 0u64);
    for mask in 0u32..(1 << n) {
        if mask.count_ones() as usize != a.len() {
            continue;
        }
        let w: f64 = (0..n).filter(|i| mask & (1 << i) != 0).map(|i| ranks[i]).sum();
        total += 1;
        if (w - centre).abs() >= observed - 1e-9 {
            hit += 1;
        }
    }
    hit as f64 / total as f64
}

#[test]
fn exact_branch_matches_enumeration() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    for n1 in 1..=11 {
        for n2 in 1..=(12 - n1) {
            for trial in 0..6 {
                // Even trials draw from few values to force ties.
                let span = if trial % 2 == 0 { 4 } else { 1000 };
                let a: Vec<f64> = (0..n1).map(|_| rng.random_range(0..span) as f64).collect();
                let b: Vec<f64> = (0..n2).map(|_| rng.random_range(0..span) as f64).collect();
                let p = rank_sum_exact_p(&a, &b).unwrap();
                let q = brute_force_p(&a, &b);
                assert!((p - q).abs() <= 1e-12, "n=({n1},{n2}) a={a:?} b={b:?}: {p} vs {q}");
            }
        }
    }
}

proptest! {
    #[test]
    fn normal_close_to_exact_at_eight(a in prop::collection::vec(0.0f64..100.0, 8), b in prop::collection::vec(0.0f64..100.0, 8)) {
        let d = (rank_sum_exact_p(&a, &b).unwrap() - rank_sum_normal_p(&a, &b).unwrap()).abs();
        prop_assert!(d <= 0.02, "{d}");
    }

    #[test]
    fn scaling_preserves_p(a in prop::collection::vec(1.0f64..50.0, 1..12), b in prop::collection::vec(1.0f64..50.0, 1..12), k in 0.01f64..100.0) {
        let p = wilcoxon_rank_sum(&a, &b, 0.05).unwrap().p;
        let sa: Vec<f64> = a.iter().map(|x| x * k).collect();
        let sb: Vec<f64> = b.iter().map(|x| x * k).collect();
        prop_assert_eq!(p, wilcoxon_rank_sum(&sa, &sb, 0.05).unwrap().p);
    }

    #[test]
    fn marker_antisymmetry(a in prop::collection::vec(0.0f64..10.0, 2..15), b in prop::collection::vec(5.0f64..15.0, 2..15)) {
        let ab = wilcoxon_rank_sum(&a, &b, 0.05).unwrap();
        let ba = wilcoxon_rank_sum(&b, &a, 0.05).unwrap();
        prop_assert_eq!(ab.marker.flip(), ba.marker);
        prop_assert!((ab.p - ba.p).abs() < 1e-12);
    }

    #[test]
    fn friedman_ranks_bounded(cells in prop::collection::vec(prop::collection::vec(0u8..5, 4), 2..7)) {
        let table: Vec<Vec<Option<f64>>> = cells.iter().map(|r| r.iter().map(|&v| Some(v as f64)).collect()).collect();
        let k = table.len() as f64;
        let ranks = friedman_ranks(&table).unwrap();
        prop_assert!(ranks.iter().all(|r| (1.0..=k).contains(r)));
        prop_assert!((ranks.iter().sum::<f64>() - k * (k + 1.0) / 2.0).abs() < 1e-9);
    }
}

#[test]
fn friedman_known_order_and_ties() {
    // Method m has value 10 * (m + 1) + scenario noise below 10.
    let table: Vec<Vec<Option<f64>>> =
        (0..6).map(|m| (0..4).map(|s| Some(10.0 * (m + 1) as f64 + s as f64)).collect()).collect();
    assert_eq!(friedman_ranks(&table).unwrap(), vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0]);
    let mut tied = table.clone();
    tied[1][0] = tied[0][0];
    let r = friedman_ranks(&tied).unwrap();
    assert_eq!(r[0], (1.5 + 3.0) / 4.0);
    assert_eq!(r[1], (1.5 + 6.0) / 4.0);
}

fn log(initial: Vec<f64>, diversity: &[f64]) -> EvolutionLog {
    EvolutionLog {
        generations: diversity
            .iter()
            .enumerate()
            .map(|(g, &d)| GenerationStats {
                generation: g,
                instance_seed: 1,
                best: 1.0,
                mean: 2.0,
                diversity: d,
                best_genome: String::new(),
                operators: OperatorCounts::default(),
                wall_ms: 0.0,
            })
            .collect(),
        initial_fitness: initial,
    }
}

fn record(method: &str, scenario: &str, run: usize, fit: f64) -> RunRecord {
    RunRecord {
        method: method.into(),
        scenario: scenario.into(),
        preference: vec![1.0],
        run,
        seed: run as u64,
        test_fitness: fit,
        test_values: vec![fit],
        best_training_fitness: fit,
        best_generation: 0,
        best_routing: "WIQ".into(),
        best_sequencing: "PT".into(),
        log: log(vec![fit, fit + 1.0], &[1.0, 0.5]),
    }
}

#[test]
fn self_comparison_is_all_draws() {
    let recs: Vec<_> = ["s1", "s2", "s3"]
        .iter()
        .flat_map(|s| (0..5).map(move |r| record("GP", s, r, r as f64)))
        .collect();
    let t = summarize(&recs, "GP").unwrap();
    assert!(t.cells.iter().all(|row| row[0].marker == Some(Marker::Equal)));
    assert_eq!((t.tallies[0].win, t.tallies[0].draw, t.tallies[0].lose), (0, 3, 0));
    let mut csv = Vec::new();
    t.write_csv(&mut csv).unwrap();
    let text = String::from_utf8(csv).unwrap();
    assert_eq!(text.lines().count(), 1 + 3 + 1);
    assert!(text.contains("0|3|0"));
}

#[test]
fn mean_and_sample_std() {
    let recs = vec![record("GP", "s", 0, 1.0), record("GP", "s", 1, 3.0)];
    let t = summarize(&recs, "GP").unwrap();
    assert_eq!(t.cells[0][0].mean, 2.0);
    assert_eq!(t.cells[0][0].std, 2f64.sqrt());
}

#[test]
fn dominance_gives_better_markers_and_order_does_not_matter() {
    let mut recs = Vec::new();
    for s in ["a", "b", "c"] {
        for r in 0..10 {
            recs.push(record("GP", s, r, 100.0 + r as f64));
            recs.push(record("Seeded", s, r, r as f64));
        }
    }
    let t = summarize(&recs, "GP").unwrap();
    assert!(t.cells.iter().all(|row| row[1].marker == Some(Marker::Better)));
    assert_eq!((t.tallies[1].win, t.tallies[1].lose), (3, 0));
    assert_eq!(t.average_ranks, Some(vec![2.0, 1.0]));
    recs.reverse();
    assert_eq!(summarize(&recs, "GP").unwrap(), t);
}

#[test]
fn unbalanced_and_missing_cells_are_named() {
    let recs = vec![record("GP", "s1", 0, 1.0), record("GP", "s1", 1, 1.0), record("X", "s1", 0, 2.0)];
    match summarize(&recs, "GP") {
        Err(AnalysisError::Unbalanced(cells)) => assert_eq!(cells, vec!["X on s1: 1 runs, expected 2"]),
        other => panic!("{other:?}"),
    }
    let recs = vec![record("GP", "s1", 0, 1.0), record("GP", "s2", 0, 1.0), record("X", "s1", 0, 2.0)];
    match summarize(&recs, "GP") {
        Err(AnalysisError::Unbalanced(cells)) => assert_eq!(cells, vec!["X on s2: 0 runs, expected 1"]),
        other => panic!("{other:?}"),
    }
    assert!(matches!(summarize(&recs, "nope"), Err(AnalysisError::UnknownBaseline(_))));
}

#[test]
fn figure_series() {
    let recs = vec![record("GP", "s", 0, 1.0), record("GP", "s", 1, 5.0), record("LLM", "s", 0, 3.0)];
    let dist = initial_fitness_distribution(&recs).unwrap();
    assert_eq!(dist["GP"], vec![1.0, 2.0, 5.0, 6.0]);
    assert!(initial_fitness_distribution(&[]).is_err());

    let a = log(vec![], &[1.0, 0.5, 0.25]);
    let b = log(vec![], &[0.5, 0.5, 0.75]);
    assert_eq!(diversity_series(&[&a]).unwrap(), vec![1.0, 0.5, 0.25]);
    assert_eq!(diversity_series(&[&a, &b]).unwrap(), vec![0.75, 0.5, 0.5]);
    let short = log(vec![], &[1.0]);
    assert!(matches!(diversity_series(&[&a, &short]), Err(AnalysisError::UnequalLengths(_))));

    let pairs = vec![
        RulePair::parse("WIQ + WIQ", "PT").unwrap(),
        RulePair::parse("NIQ", "PT * W").unwrap(),
    ];
    let f = terminal_frequency_report(&pairs).unwrap();
    assert_eq!((f.routing[&Terminal::Wiq], f.routing[&Terminal::Niq]), (1.0, 0.5));
    assert_eq!((f.sequencing[&Terminal::Pt], f.sequencing[&Terminal::W]), (1.0, 0.5));
    assert_eq!(f.routing[&Terminal::Slack], 0.0);
    let mean_leaves: f64 = pairs.iter().map(|p| p.sequencing.leaf_count() as f64).sum::<f64>() / 2.0;
    assert_eq!(f.sequencing.values().sum::<f64>(), mean_leaves);
    let one = terminal_frequency_report(&pairs[..1]).unwrap();
    assert_eq!(one.routing[&Terminal::Wiq], 2.0);
}
