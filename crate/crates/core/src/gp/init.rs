use rand::Rng;

use super::{check_seed, GpError, GpParams, Individual, Origin};
use crate::expr::{random_tree, TreeMode};
use crate::rules::RulePair;

/// `(depth, mode)` for each of `n` ramped individuals: levels split as
/// evenly as possible (earlier levels take the remainder), and full/grow
/// alternating within each level.
pub fn ramp_plan(n: usize, params: &GpParams) -> Vec<(usize, TreeMode)> {
    let (lo, hi) = params.init_depth;
    let levels = hi - lo + 1;
    let mut plan = Vec::with_capacity(n);
    for level in 0..levels {
        let count = n / levels + usize::from(level < n % levels);
        for k in 0..count {
            let mode = if k % 2 == 0 { TreeMode::Full } else { TreeMode::Grow };
            plan.push((lo + level, mode));
        }
    }
    plan
}

fn ramped<R: Rng + ?Sized>(n: usize, params: &GpParams, rng: &mut R) -> Vec<Individual> {
    let lo = params.init_depth.0;
    ramp_plan(n, params)
        .into_iter()
        .map(|(depth, mode)| {
            let range = match mode {
                TreeMode::Full => depth..=depth,
                TreeMode::Grow => lo..=depth,
            };
            let routing = random_tree(rng, mode, range.clone(), params.terminal_rate);
            let sequencing = random_tree(rng, mode, range, params.terminal_rate);
            Individual::new(RulePair::new(routing, sequencing), Origin::Random)
        })
        .collect()
}

/// Ramped half-and-half population of `params.population_size`.
pub fn init_random<R: Rng + ?Sized>(params: &GpParams, rng: &mut R) -> Vec<Individual> {
    ramped(params.population_size, params, rng)
}

/// Seeds first, in input order and truncated to the population size,
/// then ramped half-and-half individuals for the rest.
pub fn init_seeded<R: Rng + ?Sized>(
    seeds: &[RulePair],
    params: &GpParams,
    rng: &mut R,
) -> Result<Vec<Individual>, GpError> {
    for (index, seed) in seeds.iter().enumerate() {
        check_seed(seed, params.max_depth).map_err(|cause| GpError::Seed { index, cause })?;
    }
    let kept = seeds.len().min(params.population_size);
    let mut pop: Vec<Individual> =
        seeds[..kept].iter().map(|s| Individual::new(s.clone(), Origin::LlmSeeded)).collect();
    pop.extend(ramped(params.population_size - kept, params, rng));
    Ok(pop)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gp::SeedRejection;
    use crate::seeding::rng_for;

    #[test]
    fn even_split_across_levels() {
        let plan = ramp_plan(100, &GpParams::default());
        for d in 2..=6 {
            let at: Vec<_> = plan.iter().filter(|(depth, _)| *depth == d).collect();
            assert_eq!(at.len(), 20);
            assert_eq!(at.iter().filter(|(_, m)| *m == TreeMode::Full).count(), 10);
        }
    }

    #[test]
    fn full_trees_hit_their_level_and_all_fit() {
        let params = GpParams::default();
        let pop = init_random(&params, &mut rng_for(3, 0, 0));
        assert_eq!(pop.len(), 100);
        let plan = ramp_plan(100, &params);
        for (ind, (depth, mode)) in pop.iter().zip(plan) {
            for tree in [&ind.genome.routing, &ind.genome.sequencing] {
                assert!(tree.depth() <= 6 && tree.depth() >= 2);
                if mode == TreeMode::Full {
                    assert_eq!(tree.depth(), depth);
                } else {
                    assert!(tree.depth() <= depth);
                }
            }
            assert_eq!(ind.fitness, None);
        }
    }

    #[test]
    fn same_seed_same_population() {
        let p = GpParams::default();
        assert_eq!(init_random(&p, &mut rng_for(9, 1, 1)), init_random(&p, &mut rng_for(9, 1, 1)));
    }

    fn seeds(n: usize) -> Vec<RulePair> {
        (0..n)
            .map(|i| {
                let t = crate::expr::Terminal::ALL[i % 13].symbol();
                RulePair::parse(t, &format!("PT + {t}")).unwrap()
            })
            .collect()
    }

    #[test]
    fn seeds_then_fill() {
        let p = GpParams::default();
        let s = seeds(30);
        let pop = init_seeded(&s, &p, &mut rng_for(1, 2, 3)).unwrap();
        assert_eq!(pop.len(), 100);
        assert!(pop[..30].iter().zip(&s).all(|(i, s)| &i.genome == s && i.origin == Origin::LlmSeeded));
        assert_eq!(pop[30..].iter().filter(|i| i.origin == Origin::Random).count(), 70);
    }

    #[test]
    fn no_seeds_is_random_init() {
        let p = GpParams::default();
        let a = init_seeded(&[], &p, &mut rng_for(4, 4, 4)).unwrap();
        assert_eq!(a, init_random(&p, &mut rng_for(4, 4, 4)));
    }

    #[test]
    fn too_many_seeds_truncate_in_order() {
        let p = GpParams { population_size: 10, ..Default::default() };
        let s = seeds(25);
        let pop = init_seeded(&s, &p, &mut rng_for(0, 0, 0)).unwrap();
        assert_eq!(pop.len(), 10);
        assert!(pop.iter().zip(&s).all(|(i, s)| &i.genome == s));
    }

    #[test]
    fn deep_seed_rejected_with_index() {
        let mut deep = "PT".to_string();
        for _ in 0..8 {
            deep = format!("({deep} + W)");
        }
        let mut s = seeds(3);
        s.push(RulePair::parse(&deep, "PT").unwrap());
        match init_seeded(&s, &GpParams::default(), &mut rng_for(0, 0, 0)) {
            Err(GpError::Seed { index: 3, cause }) => {
                assert!(matches!(cause, SeedRejection::MaxDepthExceeded { depth: 9, .. }));
                assert!(cause.to_string().starts_with("max depth exceeded"));
            }
            other => panic!("unexpected {other:?}"),
        }
    }
}
