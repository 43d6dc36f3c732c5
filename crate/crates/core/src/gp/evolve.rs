use std::io::Write;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{
    crossover, init_random, init_seeded, mutate, phenotypic_diversity, tournament_select, Evaluator,
    GpError, GpParams, Individual, Origin,
};
use crate::rules::RulePair;
use crate::seeding::{rng_for, stream};

#[derive(Clone, Debug, PartialEq)]
pub enum InitSource {
    Random,
    Seeds(Vec<RulePair>),
}

/// How many times each operator was applied to breed a generation.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct OperatorCounts {
    pub elites: usize,
    pub crossover: usize,
    pub mutation: usize,
    pub reproduction: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GenerationStats {
    pub generation: usize,
    pub instance_seed: u64,
    pub best: f64,
    pub mean: f64,
    pub diversity: f64,
    pub best_genome: String,
    /// Operators that produced this generation (all zero for generation 0).
    pub operators: OperatorCounts,
    /// Not serialized, so records of identical runs are identical.
    #[serde(skip)]
    pub wall_ms: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct EvolutionLog {
    pub generations: Vec<GenerationStats>,
    /// Fitness of every generation-0 individual, in population order.
    pub initial_fitness: Vec<f64>,
}

impl EvolutionLog {
    /// Per-generation table without timing, so identical runs write
    /// identical bytes.
    pub fn write_csv<W: Write>(&self, out: W) -> csv::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record([
            "generation", "instance_seed", "best", "mean", "diversity", "crossover", "mutation",
            "reproduction", "elites", "best_genome",
        ])?;
        for g in &self.generations {
            w.write_record([
                g.generation.to_string(),
                g.instance_seed.to_string(),
                g.best.to_string(),
                g.mean.to_string(),
                g.diversity.to_string(),
                g.operators.crossover.to_string(),
                g.operators.mutation.to_string(),
                g.operators.reproduction.to_string(),
                g.operators.elites.to_string(),
                g.best_genome.clone(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn write_timing_csv<W: Write>(&self, out: W) -> csv::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["generation", "wall_ms"])?;
        for g in &self.generations {
            w.write_record([g.generation.to_string(), format!("{:.3}", g.wall_ms)])?;
        }
        w.flush()?;
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct EvolutionResult {
    /// Lowest training fitness seen in any generation.
    pub best: Individual,
    pub best_generation: usize,
    pub log: EvolutionLog,
    pub final_population: Vec<Individual>,
}

pub fn evolve(
    params: &GpParams,
    evaluator: &Evaluator,
    init: &InitSource,
    master_seed: u64,
) -> Result<EvolutionResult, GpError> {
    evolve_with(params, evaluator, init, master_seed, |_, _| {})
}

fn best_index(pop: &[Individual]) -> usize {
    let mut best = 0;
    for (i, ind) in pop.iter().enumerate() {
        if ind.fitness_or_inf() < pop[best].fitness_or_inf() {
            best = i;
        }
    }
    best
}

/// Evaluates `max(generations, 1)` populations, breeding between them.
/// `observe` sees each evaluated population with its statistics.
pub fn evolve_with<F>(
    params: &GpParams,
    evaluator: &Evaluator,
    init: &InitSource,
    master_seed: u64,
    mut observe: F,
) -> Result<EvolutionResult, GpError>
where
    F: FnMut(&GenerationStats, &[Individual]),
{
    params.validate()?;
    let mut rng = rng_for(master_seed, stream::INIT, 0);
    let mut pop = match init {
        InitSource::Random => init_random(params, &mut rng),
        InitSource::Seeds(seeds) => init_seeded(seeds, params, &mut rng)?,
    };
    let total = params.generations.max(1);
    let mut log = EvolutionLog::default();
    let mut best: Option<(Individual, usize)> = None;
    let mut operators = OperatorCounts::default();

    for generation in 0..total {
        let started = Stopwatch::start();
        let instance_seed = evaluator.training_seed(generation);
        evaluator.evaluate_population(&mut pop, instance_seed)?;
        if generation == 0 {
            log.initial_fitness = pop.iter().map(|i| i.fitness_or_inf()).collect();
        }
        let bi = best_index(&pop);
        let gen_best = pop[bi].clone();
        if best.as_ref().is_none_or(|(b, _)| gen_best.fitness_or_inf() < b.fitness_or_inf()) {
            best = Some((gen_best.clone(), generation));
        }
        let mean = pop.iter().map(|i| i.fitness_or_inf()).sum::<f64>() / pop.len() as f64;
        let mut stats = GenerationStats {
            generation,
            instance_seed,
            best: gen_best.fitness_or_inf(),
            mean,
            diversity: phenotypic_diversity(&pop)?,
            best_genome: gen_best.genome.to_string(),
            operators,
            wall_ms: 0.0,
        };
        observe(&stats, &pop);
        if generation + 1 < total {
            let mut breed_rng = rng_for(master_seed, stream::GENERATION, generation as u64);
            let (next, counts) = breed(&pop, params, &mut breed_rng);
            pop = next;
            operators = counts;
        }
        stats.wall_ms = started.elapsed_ms();
        log.generations.push(stats);
    }

    let (best, best_generation) = best.expect("at least one generation");
    Ok(EvolutionResult { best, best_generation, log, final_population: pop })
}

/// Wall clock for the timing log; reads zero where the platform has no
/// clock (browser wasm).
struct Stopwatch(#[cfg(not(target_arch = "wasm32"))] std::time::Instant);

impl Stopwatch {
    fn start() -> Stopwatch {
        Stopwatch(
            #[cfg(not(target_arch = "wasm32"))]
            std::time::Instant::now(),
        )
    }

    fn elapsed_ms(&self) -> f64 {
        #[cfg(not(target_arch = "wasm32"))]
        return self.0.elapsed().as_secs_f64() * 1e3;
        #[cfg(target_arch = "wasm32")]
        0.0
    }
}

/// Next population: elites first, then offspring from operators drawn
/// per application by their rates.
fn breed<R: Rng + ?Sized>(pop: &[Individual], params: &GpParams, rng: &mut R) -> (Vec<Individual>, OperatorCounts) {
    let n = params.population_size;
    let mut counts = OperatorCounts::default();
    let mut order: Vec<usize> = (0..pop.len()).collect();
    order.sort_by(|&a, &b| pop[a].fitness_or_inf().total_cmp(&pop[b].fitness_or_inf()).then(a.cmp(&b)));
    let mut next: Vec<Individual> = order
        .iter()
        .take(params.elites.min(n))
        .map(|&i| Individual::new(pop[i].genome.clone(), Origin::Reproduction))
        .collect();
    counts.elites = next.len();
    let k = params.tournament_size;
    while next.len() < n {
        let u: f64 = rng.random();
        if u < params.crossover_rate {
            let a = &pop[tournament_select(pop, k, rng)];
            let b = &pop[tournament_select(pop, k, rng)];
            let (x, y) = crossover(a, b, params, rng);
            next.push(x);
            if next.len() < n {
                next.push(y);
            }
            counts.crossover += 1;
        } else if u < params.crossover_rate + params.mutation_rate {
            let a = &pop[tournament_select(pop, k, rng)];
            next.push(mutate(a, params, rng));
            counts.mutation += 1;
        } else {
            let a = &pop[tournament_select(pop, k, rng)];
            next.push(Individual::new(a.genome.clone(), Origin::Reproduction));
            counts.reproduction += 1;
        }
    }
    (next, counts)
}
