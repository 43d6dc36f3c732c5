use std::collections::{HashMap, HashSet, VecDeque};
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, Mutex};

#[cfg(feature = "parallel")]
use rayon::prelude::*;

use super::{GpError, Individual};
use crate::rules::RulePair;
use crate::sim::{generate_instance, simulate, weighted_fitness, Instance, ObjectiveVector, Scenario, SimConfig};

struct Prepared {
    instance: Arc<Instance>,
    reference: Option<ObjectiveVector>,
}

/// Scores rule pairs under a scenario. Instances (and the reference
/// rule's objectives on them) are generated once per seed and shared,
/// so one evaluator can serve many runs.
pub struct Evaluator {
    scenario: Scenario,
    config: SimConfig,
    cache: Mutex<Cache>,
    runs: AtomicU64,
}

/// Prepared instances, oldest evicted first once `capacity` is reached.
struct Cache {
    capacity: usize,
    map: HashMap<u64, Arc<Prepared>>,
    order: VecDeque<u64>,
}

impl Cache {
    fn insert(&mut self, seed: u64, p: Arc<Prepared>) -> Arc<Prepared> {
        if let Some(existing) = self.map.get(&seed) {
            return existing.clone();
        }
        while self.map.len() >= self.capacity {
            let Some(old) = self.order.pop_front() else { break };
            self.map.remove(&old);
        }
        self.order.push_back(seed);
        self.map.insert(seed, p.clone());
        p
    }
}

pub const DEFAULT_CACHE_CAPACITY: usize = 24;

impl Evaluator {
    /// `base` supplies the shop; its utilization is replaced by the
    /// scenario's.
    pub fn new(scenario: Scenario, base: SimConfig) -> Result<Evaluator, GpError> {
        scenario.validate()?;
        let config = SimConfig { utilization: scenario.utilization, ..base };
        config.validate()?;
        let cache = Cache { capacity: DEFAULT_CACHE_CAPACITY, map: HashMap::new(), order: VecDeque::new() };
        Ok(Evaluator { scenario, config, cache: Mutex::new(cache), runs: AtomicU64::new(0) })
    }

    /// Keep at most `n` prepared instances in memory (at least one).
    pub fn with_cache_capacity(self, n: usize) -> Evaluator {
        self.cache.lock().unwrap().capacity = n.max(1);
        self
    }

    pub fn scenario(&self) -> &Scenario {
        &self.scenario
    }

    pub fn config(&self) -> &SimConfig {
        &self.config
    }

    /// Rule-pair simulations run so far (reference runs excluded).
    pub fn sim_runs(&self) -> u64 {
        self.runs.load(Ordering::Relaxed)
    }

    /// Training seed used by `generation`.
    pub fn training_seed(&self, generation: usize) -> u64 {
        let seeds = &self.scenario.training_seeds;
        seeds[generation % seeds.len()]
    }

    fn prepared(&self, seed: u64) -> Result<Arc<Prepared>, GpError> {
        if let Some(p) = self.cache.lock().unwrap().map.get(&seed) {
            return Ok(p.clone());
        }
        let instance = generate_instance(&self.config, seed)?;
        let reference = if self.scenario.normalized() {
            Some(simulate(&RulePair::reference(), &instance)?)
        } else {
            None
        };
        let p = Arc::new(Prepared { instance: Arc::new(instance), reference });
        Ok(self.cache.lock().unwrap().insert(seed, p))
    }

    pub fn instance(&self, seed: u64) -> Result<Arc<Instance>, GpError> {
        Ok(self.prepared(seed)?.instance.clone())
    }

    /// Reference rule's objectives on the seed's instance, when the
    /// scenario is normalized.
    pub fn reference(&self, seed: u64) -> Result<Option<ObjectiveVector>, GpError> {
        Ok(self.prepared(seed)?.reference)
    }

    fn score(&self, genome: &RulePair, p: &Prepared) -> Result<f64, GpError> {
        self.runs.fetch_add(1, Ordering::Relaxed);
        let obj = simulate(genome, &p.instance)?;
        Ok(weighted_fitness(&obj, &self.scenario, p.reference.as_ref())?)
    }

    pub fn fitness(&self, genome: &RulePair, seed: u64) -> Result<f64, GpError> {
        let p = self.prepared(seed)?;
        self.score(genome, &p)
    }

    /// Sets every individual's fitness on the seed's instance.
    pub fn evaluate_population(&self, pop: &mut [Individual], seed: u64) -> Result<(), GpError> {
        let p = self.prepared(seed)?;
        #[cfg(feature = "parallel")]
        let scores: Vec<Result<f64, GpError>> = pop.par_iter().map(|i| self.score(&i.genome, &p)).collect();
        #[cfg(not(feature = "parallel"))]
        let scores: Vec<Result<f64, GpError>> = pop.iter().map(|i| self.score(&i.genome, &p)).collect();
        for (ind, s) in pop.iter_mut().zip(scores) {
            ind.fitness = Some(s?);
        }
        Ok(())
    }

    /// Fitness on each test seed, in the scenario's order.
    pub fn test_fitnesses(&self, genome: &RulePair) -> Result<Vec<f64>, GpError> {
        let seeds = &self.scenario.test_seeds;
        #[cfg(feature = "parallel")]
        let it = seeds.par_iter();
        #[cfg(not(feature = "parallel"))]
        let it = seeds.iter();
        it.map(|&s| self.fitness(genome, s)).collect()
    }
}

/// Mean fitness over the scenario's test seeds.
pub fn test_performance(genome: &RulePair, evaluator: &Evaluator) -> Result<f64, GpError> {
    let v = evaluator.test_fitnesses(genome)?;
    Ok(v.iter().sum::<f64>() / v.len() as f64)
}

/// Share of distinct fitness values in the population.
pub fn phenotypic_diversity(pop: &[Individual]) -> Result<f64, GpError> {
    let mut seen = HashSet::new();
    for (index, ind) in pop.iter().enumerate() {
        let f = ind.fitness.ok_or(GpError::Unevaluated { index })?;
        seen.insert((f + 0.0).to_bits());
    }
    Ok(seen.len() as f64 / pop.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gp::Origin;
    use crate::sim::Objective;

    fn with_fitness(values: &[f64]) -> Vec<Individual> {
        values
            .iter()
            .map(|&f| Individual { genome: RulePair::reference(), fitness: Some(f), origin: Origin::Random })
            .collect()
    }

    #[test]
    fn diversity_cases() {
        let distinct: Vec<f64> = (0..100).map(f64::from).collect();
        assert_eq!(phenotypic_diversity(&with_fitness(&distinct)).unwrap(), 1.0);
        assert_eq!(phenotypic_diversity(&with_fitness(&[7.0; 100])).unwrap(), 0.01);
        assert_eq!(phenotypic_diversity(&with_fitness(&[1.0, 1.0, 2.0])).unwrap(), 2.0 / 3.0);
        let mut pop = with_fitness(&[1.0, 2.0]);
        pop[1].fitness = None;
        assert!(matches!(phenotypic_diversity(&pop), Err(GpError::Unevaluated { index: 1 })));
    }

    fn small() -> SimConfig {
        SimConfig { total_jobs: 300, warmup_jobs: 50, ..Default::default() }
    }

    #[test]
    fn reference_scores_one_when_normalized() {
        let mut s = Scenario::pair(Objective::Fmean, Objective::WTmean, 0.2, 0.85);
        s.test_seeds = vec![3, 4, 5];
        let ev = Evaluator::new(s, small()).unwrap();
        assert_eq!(ev.fitness(&RulePair::reference(), 1).unwrap(), 1.0);
        assert_eq!(test_performance(&RulePair::reference(), &ev).unwrap(), 1.0);
    }

    #[test]
    fn one_run_per_individual_and_duplicates_agree() {
        let s = Scenario::single(Objective::Fmean, 0.85);
        let ev = Evaluator::new(s, small()).unwrap();
        let g = RulePair::parse("NIQ", "PT - W").unwrap();
        let mut pop: Vec<_> = (0..10).map(|_| Individual::new(g.clone(), Origin::Random)).collect();
        pop.push(Individual::new(RulePair::reference(), Origin::Random));
        ev.evaluate_population(&mut pop, 2).unwrap();
        assert_eq!(ev.sim_runs(), 11);
        assert!(pop[..10].iter().all(|i| i.fitness == pop[0].fitness));
        let direct = simulate(&g, &generate_instance(ev.config(), 2).unwrap()).unwrap().Fmean;
        assert_eq!(pop[0].fitness, Some(direct));
    }

    #[test]
    fn single_test_seed_and_order_invariance() {
        let g = RulePair::parse("WIQ + TRANT", "SLACK").unwrap();
        let mut s = Scenario::single(Objective::Tmean, 0.85);
        s.test_seeds = vec![11];
        let one = Evaluator::new(s.clone(), small()).unwrap();
        assert_eq!(test_performance(&g, &one).unwrap(), one.fitness(&g, 11).unwrap());
        s.test_seeds = vec![11, 12, 13, 14];
        let a = test_performance(&g, &Evaluator::new(s.clone(), small()).unwrap()).unwrap();
        s.test_seeds = vec![14, 12, 11, 13];
        let b = test_performance(&g, &Evaluator::new(s, small()).unwrap()).unwrap();
        assert!((a - b).abs() <= 1e-12 * a.abs());
    }

    #[test]
    fn evicted_instances_are_rebuilt_identically() {
        let s = Scenario::single(Objective::Fmean, 0.85);
        let ev = Evaluator::new(s, small()).unwrap().with_cache_capacity(1);
        let g = RulePair::parse("NIQ", "PT").unwrap();
        let a = ev.fitness(&g, 1).unwrap();
        ev.fitness(&g, 2).unwrap();
        assert_eq!(ev.cache.lock().unwrap().map.len(), 1);
        assert_eq!(ev.fitness(&g, 1).unwrap(), a);
    }

    #[test]
    fn rotation_wraps() {
        let mut s = Scenario::single(Objective::Fmean, 0.85);
        s.training_seeds = vec![5, 6, 7];
        let ev = Evaluator::new(s, small()).unwrap();
        assert_eq!((ev.training_seed(0), ev.training_seed(4), ev.training_seed(50)), (5, 6, 7));
    }
}
