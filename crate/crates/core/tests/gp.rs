use dfjss_core::gp::{
    evolve, evolve_with, tournament_select, Evaluator, GpParams, Individual, InitSource, Origin,
};
use dfjss_core::rules::RulePair;
use dfjss_core::seeding::rng_for;
use dfjss_core::sim::{Objective, Scenario, SimConfig};

fn tiny_shop() -> SimConfig {
    SimConfig { total_jobs: 150, warmup_jobs: 30, ..Default::default() }
}

fn params(pop: usize, gens: usize) -> GpParams {
    GpParams { population_size: pop, generations: gens, ..Default::default() }
}

fn evaluator(training: Vec<u64>) -> Evaluator {
    let mut s = Scenario::pair(Objective::Fmean, Objective::WTmean, 0.5, 0.85);
    s.training_seeds = training;
    s.test_seeds = vec![900, 901];
    Evaluator::new(s, tiny_shop()).unwrap()
}

#[test]
fn log_has_one_entry_per_generation_and_runs_are_counted() {
    let ev = evaluator(vec![1, 2, 3]);
    let r = evolve(&params(12, 5), &ev, &InitSource::Random, 7).unwrap();
    assert_eq!(r.log.generations.len(), 5);
    assert_eq!(ev.sim_runs(), 12 * 5);
    assert_eq!(r.log.initial_fitness.len(), 12);
    let seeds: Vec<u64> = r.log.generations.iter().map(|g| g.instance_seed).collect();
    assert_eq!(seeds, vec![1, 2, 3, 1, 2]);
    let best_logged = r.log.generations.iter().map(|g| g.best).fold(f64::INFINITY, f64::min);
    assert_eq!(r.best.fitness, Some(best_logged));
}

#[test]
fn zero_generations_scores_initial_population_only() {
    let ev = evaluator(vec![4]);
    let r = evolve(&params(10, 0), &ev, &InitSource::Random, 1).unwrap();
    assert_eq!(ev.sim_runs(), 10);
    let min = r.log.initial_fitness.iter().copied().fold(f64::INFINITY, f64::min);
    assert_eq!(r.best.fitness, Some(min));
    assert_eq!(r.best_generation, 0);
}

#[test]
fn fixed_seed_runs_repeat_exactly() {
    let run = || {
        let ev = evaluator(vec![1, 2]);
        let r = evolve(&params(10, 4), &ev, &InitSource::Random, 99).unwrap();
        let mut csv = Vec::new();
        r.log.write_csv(&mut csv).unwrap();
        (r.best.genome.to_text(), csv)
    };
    assert_eq!(run(), run());
    let ev = evaluator(vec![1, 2]);
    let other = evolve(&params(10, 4), &ev, &InitSource::Random, 100).unwrap();
    let mut csv = Vec::new();
    other.log.write_csv(&mut csv).unwrap();
    assert_ne!(csv, run().1);
}

#[test]
fn evolution_invariants() {
    let ev = evaluator(vec![5]);
    let seeds = vec![
        RulePair::parse("WIQ + TRANT", "PT + WKR").unwrap(),
        RulePair::parse("NIQ", "SLACK / W").unwrap(),
    ];
    let p = params(20, 10);
    let mut prev_best = f64::INFINITY;
    let mut sel_rng = rng_for(0, 0, 0);
    let r = evolve_with(&p, &ev, &InitSource::Seeds(seeds.clone()), 3, |stats, pop| {
        assert_eq!(pop.len(), 20);
        for ind in pop {
            assert!(ind.genome.max_depth() <= 8, "{}", ind.genome);
            assert!(ind.fitness.unwrap().is_finite());
        }
        if stats.generation == 0 {
            assert_eq!(pop[0].genome, seeds[0]);
            assert_eq!(pop[1].genome, seeds[1]);
            assert!(pop[..2].iter().all(|i| i.origin == Origin::LlmSeeded));
        } else {
            let o = stats.operators;
            assert_eq!(o.elites, 1);
            assert!(o.crossover * 2 + o.mutation + o.reproduction + o.elites >= 20);
        }
        // Single training instance: the elite keeps the best from rising.
        assert!(stats.best <= prev_best);
        prev_best = stats.best;
        let winners: Vec<f64> =
            (0..400).map(|_| pop[tournament_select(pop, 4, &mut sel_rng)].fitness.unwrap()).collect();
        let win_mean = winners.iter().sum::<f64>() / winners.len() as f64;
        assert!(win_mean <= stats.mean, "{win_mean} > {}", stats.mean);
    })
    .unwrap();
    assert_eq!(r.log.generations.len(), 10);
}

#[test]
fn operator_applications_follow_rates() {
    let ev = evaluator(vec![6]);
    let p = params(40, 40);
    let r = evolve(&p, &ev, &InitSource::Random, 11).unwrap();
    let (mut cx, mut mu, mut re) = (0.0, 0.0, 0.0);
    for g in &r.log.generations {
        cx += g.operators.crossover as f64;
        mu += g.operators.mutation as f64;
        re += g.operators.reproduction as f64;
    }
    let n = cx + mu + re;
    let chi2: f64 = [(cx, p.crossover_rate), (mu, p.mutation_rate), (re, p.reproduction_rate)]
        .iter()
        .map(|&(o, rate)| (o - n * rate).powi(2) / (n * rate))
        .sum();
    // 2 degrees of freedom, 0.1% level.
    assert!(chi2 < 13.816, "chi2 {chi2} over {n} applications");
}

#[test]
fn seeded_population_evaluates_seeds_verbatim() {
    let ev = evaluator(vec![8]);
    let seed = RulePair::reference();
    let r = evolve(&params(8, 1), &ev, &InitSource::Seeds(vec![seed.clone()]), 2).unwrap();
    assert_eq!(r.log.initial_fitness[0], 1.0);
    let ind = Individual::new(seed, Origin::LlmSeeded);
    assert_eq!(ev.fitness(&ind.genome, 8).unwrap(), 1.0);
}
