//! Browser bindings. Each exported function takes plain values, returns a
//! JSON string, and reports failures as a thrown string.

use dfjss_core::expr::{parse, DecisionContext};
use dfjss_core::gp::{evolve, Evaluator, GpParams, InitSource};
use dfjss_core::rules::RulePair;
use dfjss_core::sim::{generate_instance, simulate_with, Objective, Scenario, SimConfig, SimOptions};
use serde::Serialize;
use wasm_bindgen::prelude::*;

/// Largest shop the page may ask for; keeps the tab responsive.
pub const MAX_JOBS: usize = 2000;

#[derive(Serialize)]
struct Evaluated {
    canonical: String,
    depth: usize,
    size: usize,
    value: f64,
}

#[derive(Serialize)]
struct Bar {
    machine: usize,
    job: usize,
    op: usize,
    start: f64,
    end: f64,
}

#[derive(Serialize)]
struct Simulated {
    objectives: dfjss_core::sim::ObjectiveVector,
    utilization: f64,
    machines: usize,
    bars: Vec<Bar>,
}

#[derive(Serialize)]
struct Evolved {
    best_per_generation: Vec<f64>,
    diversity: Vec<f64>,
    routing: String,
    sequencing: String,
    reference_fitness: f64,
}

fn small_shop(jobs: usize, utilization: f64) -> Result<SimConfig, String> {
    if !(20..=MAX_JOBS).contains(&jobs) {
        return Err(format!("jobs must be between 20 and {MAX_JOBS}"));
    }
    let cfg = SimConfig { total_jobs: jobs, warmup_jobs: jobs / 5, utilization, ..Default::default() };
    cfg.validate().map_err(|e| e.to_string())?;
    Ok(cfg)
}

/// Parses `text` and evaluates it at `context_json`, an object with any of
/// the lower-case terminal names (missing ones are 0).
pub fn evaluate_rule_json(text: &str, context_json: &str) -> Result<String, String> {
    let expr = parse(text).map_err(|e| e.to_string())?;
    let ctx: DecisionContext = if context_json.trim().is_empty() {
        DecisionContext::default()
    } else {
        let v: serde_json::Value = serde_json::from_str(context_json).map_err(|e| e.to_string())?;
        let mut full = serde_json::to_value(DecisionContext::default()).map_err(|e| e.to_string())?;
        for (k, val) in v.as_object().ok_or("context must be a JSON object")? {
            let slot = full.get_mut(k.as_str()).ok_or_else(|| format!("unknown terminal `{k}`"))?;
            *slot = val.clone();
        }
        serde_json::from_value(full).map_err(|e| e.to_string())?
    };
    let out = Evaluated { canonical: expr.to_string(), depth: expr.depth(), size: expr.size(), value: expr.evaluate(&ctx) };
    serde_json::to_string(&out).map_err(|e| e.to_string())
}

/// Simulates one rule pair on a generated shop. The Gantt bars cover the
/// first `max_bars` operations to finish.
pub fn simulate_json(
    routing: &str,
    sequencing: &str,
    jobs: usize,
    utilization: f64,
    seed: u64,
    max_bars: usize,
) -> Result<String, String> {
    let rules = RulePair::parse(routing, sequencing).map_err(|e| e.to_string())?;
    let inst = generate_instance(&small_shop(jobs, utilization)?, seed).map_err(|e| e.to_string())?;
    let out = simulate_with(&rules, &inst, SimOptions { record_trace: true }).map_err(|e| e.to_string())?;
    let bars = out
        .schedule
        .iter()
        .take(max_bars)
        .map(|s| Bar { machine: s.machine, job: s.job, op: s.op, start: s.start, end: s.end })
        .collect();
    let res = Simulated { objectives: out.objectives, utilization: out.utilization, machines: inst.num_machines(), bars };
    serde_json::to_string(&res).map_err(|e| e.to_string())
}

/// A short mean-flowtime evolution on small shops.
pub fn evolve_json(population: usize, generations: usize, jobs: usize, seed: u64) -> Result<String, String> {
    if population > 200 || generations > 50 {
        return Err("population <= 200 and generations <= 50 in the browser".into());
    }
    let mut scenario = Scenario::single(Objective::Fmean, 0.85);
    scenario.training_seeds = (1..=generations.max(1) as u64).collect();
    scenario.test_seeds = vec![10001];
    let ev = Evaluator::new(scenario, small_shop(jobs, 0.85)?).map_err(|e| e.to_string())?;
    let params = GpParams { population_size: population, generations, ..Default::default() };
    let r = evolve(&params, &ev, &InitSource::Random, seed).map_err(|e| e.to_string())?;
    let reference_fitness = ev.fitness(&RulePair::reference(), ev.training_seed(0)).map_err(|e| e.to_string())?;
    let res = Evolved {
        best_per_generation: r.log.generations.iter().map(|g| g.best).collect(),
        diversity: r.log.generations.iter().map(|g| g.diversity).collect(),
        routing: r.best.genome.routing.to_string(),
        sequencing: r.best.genome.sequencing.to_string(),
        reference_fitness,
    };
    serde_json::to_string(&res).map_err(|e| e.to_string())
}

#[wasm_bindgen]
pub fn evaluate_rule(text: &str, context_json: &str) -> Result<String, JsValue> {
    evaluate_rule_json(text, context_json).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn simulate(routing: &str, sequencing: &str, jobs: usize, utilization: f64, seed: u32, max_bars: usize) -> Result<String, JsValue> {
    simulate_json(routing, sequencing, jobs, utilization, seed.into(), max_bars).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn evolve_rules(population: usize, generations: usize, jobs: usize, seed: u32) -> Result<String, JsValue> {
    evolve_json(population, generations, jobs, seed.into()).map_err(|e| JsValue::from_str(&e))
}
