use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};

use dfjss_core::analysis::{
    convergence_series, diversity_series, initial_fitness_distribution, summarize, terminal_frequency_report,
    write_distribution_csv, write_series_csv, write_terminal_csv, AnalysisError, RunRecord,
};
use dfjss_core::gp::{evolve, Evaluator, InitSource};
use dfjss_core::llm::{
    build_init_prompt, build_transfer_prompt, extract_heuristics, generate_report, query, AuditLog, ChatProvider,
    ExtractionResult, MockProvider, PreferenceWeights, ProviderConfig, ProviderKind, ReferenceHeuristic,
};
use dfjss_core::rules::{format_rule_pairs, RulePair};
use dfjss_core::seeding::{derive_seed, stream};
use dfjss_core::sim::{generate_instance, simulate_with, Instance, Scenario, SimConfig, SimOptions};
use rayon::prelude::*;

use crate::config::{InitMode, Manifest};
use crate::fsio::{io_err, read_rules, slug, write_atomic};
use crate::CliError;

pub fn make_provider(cfg: &ProviderConfig) -> Result<Box<dyn ChatProvider>, CliError> {
    match cfg.kind {
        ProviderKind::Mock => {
            let dir = cfg
                .mock_dir
                .clone()
                .ok_or_else(|| CliError::Config("mock provider needs provider.mock_dir (or --mock-dir)".into()))?;
            if !dir.is_dir() {
                return Err(CliError::Config(format!("mock reply directory {} not found", dir.display())));
            }
            Ok(Box::new(MockProvider::new(dir)))
        }
        #[cfg(feature = "http")]
        ProviderKind::Openai => Ok(Box::new(
            dfjss_core::llm::HttpProvider::new(cfg).map_err(|e| CliError::Provider(e.to_string()))?,
        )),
        #[cfg(not(feature = "http"))]
        ProviderKind::Openai => Err(CliError::Config("built without the http feature".into())),
    }
}

pub fn cmd_gen_instance(config: &SimConfig, seed: u64, out: &Path) -> Result<Instance, CliError> {
    config.validate().map_err(|e| CliError::Config(e.to_string()))?;
    let inst = generate_instance(config, seed).map_err(|e| CliError::Config(e.to_string()))?;
    let mut buf = Vec::new();
    inst.write_jsonl(&mut buf).map_err(|e| io_err(out, e))?;
    write_atomic(out, &buf)?;
    Ok(inst)
}

/// Runs every rule pair in `rules` on the instance and prints one block of
/// objectives per pair.
pub fn cmd_simulate(rules: &Path, instance: &Path, trace: Option<&Path>, out: &mut dyn Write) -> Result<(), CliError> {
    let pairs = read_rules(rules)?;
    let file = std::fs::File::open(instance).map_err(|e| io_err(instance, e))?;
    let inst = Instance::read_jsonl(std::io::BufReader::new(file))
        .map_err(|e| CliError::Data(format!("{}: {e}", instance.display())))?;
    for (i, pair) in pairs.iter().enumerate() {
        let result = simulate_with(pair, &inst, SimOptions { record_trace: trace.is_some() })
            .map_err(|e| CliError::Data(e.to_string()))?;
        let o = result.objectives;
        let w = |out: &mut dyn Write, s: String| out.write_all(s.as_bytes()).map_err(|e| CliError::Data(e.to_string()));
        w(out, format!("# pair {i}: {pair}\n"))?;
        w(
            out,
            format!(
                "Tmax {}\nTmean {}\nFmean {}\nWTmean {}\nWFmean {}\nutilization {}\n",
                o.Tmax, o.Tmean, o.Fmean, o.WTmean, o.WFmean, result.utilization
            ),
        )?;
        if let Some(path) = trace {
            let path = if pairs.len() == 1 { path.to_path_buf() } else { numbered(path, i) };
            let mut buf = Vec::new();
            result.write_trace_csv(&mut buf).map_err(|e| io_err(&path, e))?;
            write_atomic(&path, &buf)?;
        }
    }
    Ok(())
}

fn numbered(path: &Path, i: usize) -> PathBuf {
    let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("trace");
    let ext = path.extension().and_then(|s| s.to_str()).unwrap_or("csv");
    path.with_file_name(format!("{stem}-{i}.{ext}"))
}

fn load_references(path: Option<&Path>) -> Result<Vec<ReferenceHeuristic>, CliError> {
    let Some(path) = path else { return Ok(Vec::new()) };
    let label = path.file_stem().and_then(|s| s.to_str()).unwrap_or("reference").to_string();
    Ok(read_rules(path)?.into_iter().map(|r| ReferenceHeuristic::new(r, label.clone())).collect())
}

/// Asks the configured model for seed rule pairs and writes them to
/// `out`, with `<out>.rejections.txt` and `<out>.insights.md` beside it.
/// `from` switches to a transfer prompt from that source scenario.
pub fn cmd_init_llm(m: &Manifest, from: Option<&Scenario>, out: &Path) -> Result<ExtractionResult, CliError> {
    m.validate()?;
    let provider = make_provider(&m.provider)?;
    let refs = load_references(m.references.as_deref())?;
    let prefs = PreferenceWeights::from_scenario(&m.scenario);
    let prompt = match from {
        Some(src) => build_transfer_prompt(&refs, src, &m.scenario, &prefs, m.n_requested, None),
        None => build_init_prompt(&m.scenario, &refs, &prefs, m.n_requested),
    }
    .map_err(|e| CliError::Config(e.to_string()))?;
    if prompt.zero_shot {
        eprintln!("note: no reference heuristics given; prompting zero-shot");
    }
    let audit_path = out.with_file_name("audit.jsonl");
    if let Some(dir) = audit_path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;
    }
    let audit = AuditLog::open(&audit_path).map_err(|e| io_err(&audit_path, e))?;
    let reply = query(provider.as_ref(), &m.provider, &prompt, Some(&audit)).map_err(llm_err)?;
    let result = extract_heuristics(&reply);

    let mut seeds = format!(
        "# {} rule pairs for {} ({} accepted, {} rejected)\n\n",
        prompt.kind.name(),
        m.scenario.display_name(),
        result.accepted.len(),
        result.rejected.len()
    );
    seeds.push_str(&format_rule_pairs(&result.accepted));
    write_atomic(out, seeds.as_bytes())?;
    let mut rej = String::new();
    for r in &result.rejected {
        rej.push_str(&format!("{}\n{}\n\n", r.cause, r.snippet));
    }
    write_atomic(&sibling(out, "rejections.txt"), rej.as_bytes())?;
    write_atomic(&sibling(out, "insights.md"), result.insights.clone().unwrap_or_default().as_bytes())?;
    if result.accepted.is_empty() {
        return Err(CliError::Data(format!("reply contained no usable rule pairs ({} rejected)", result.rejected.len())));
    }
    Ok(result)
}

fn sibling(path: &Path, suffix: &str) -> PathBuf {
    let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("seeds");
    path.with_file_name(format!("{stem}.{suffix}"))
}

#[derive(Clone, Debug)]
pub struct EvolveOutput {
    pub dir: PathBuf,
    pub records: Vec<PathBuf>,
}

/// Runs `m.runs` independent evolutions and writes, per run,
/// `run-NNN.json` (the record), `run-NNN.log.csv`, `run-NNN.best.txt`
/// and `run-NNN.timing.csv`.
pub fn cmd_evolve(m: &Manifest) -> Result<EvolveOutput, CliError> {
    m.validate()?;
    let init = match m.init {
        InitMode::Random => InitSource::Random,
        InitMode::File => {
            let path = m.seeds_file.as_deref().ok_or_else(|| CliError::Config("init = file needs seeds_file".into()))?;
            InitSource::Seeds(read_rules(path)?)
        }
        InitMode::Llm => {
            let path = m.out.join("llm_seeds.txt");
            InitSource::Seeds(cmd_init_llm(m, None, &path)?.accepted)
        }
    };
    let method = m.method_label();
    let dir = m.out.join(slug(&method)).join(slug(&scenario_key(&m.scenario)));
    let evaluator =
        Evaluator::new(m.scenario.clone(), m.sim.clone()).map_err(|e| CliError::Config(e.to_string()))?;
    let threads = if m.jobs == 0 { rayon::current_num_threads() } else { m.jobs };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| CliError::Config(e.to_string()))?;
    let records: Vec<Result<PathBuf, CliError>> = pool.install(|| {
        (0..m.runs).into_par_iter().map(|run| run_one(m, &evaluator, &init, &method, &dir, run)).collect()
    });
    let records = records.into_iter().collect::<Result<Vec<_>, _>>()?;
    Ok(EvolveOutput { dir, records })
}

fn run_one(
    m: &Manifest,
    evaluator: &Evaluator,
    init: &InitSource,
    method: &str,
    dir: &Path,
    run: usize,
) -> Result<PathBuf, CliError> {
    let seed = derive_seed(m.master_seed, stream::RUN, run as u64);
    let result = evolve(&m.gp, evaluator, init, seed).map_err(gp_err)?;
    let test_values = evaluator.test_fitnesses(&result.best.genome).map_err(gp_err)?;
    let test_fitness = test_values.iter().sum::<f64>() / test_values.len() as f64;
    let record = RunRecord {
        method: method.to_string(),
        scenario: scenario_key(&m.scenario),
        preference: m.scenario.lambdas.clone(),
        run,
        seed,
        test_fitness,
        test_values,
        best_training_fitness: result.best.fitness_or_inf(),
        best_generation: result.best_generation,
        best_routing: result.best.genome.routing.to_string(),
        best_sequencing: result.best.genome.sequencing.to_string(),
        log: result.log,
    };
    let base = dir.join(format!("run-{run:03}"));
    let mut csv = Vec::new();
    record.log.write_csv(&mut csv).map_err(|e| CliError::Data(e.to_string()))?;
    write_atomic(&base.with_extension("log.csv"), &csv)?;
    let mut timing = Vec::new();
    record.log.write_timing_csv(&mut timing).map_err(|e| CliError::Data(e.to_string()))?;
    write_atomic(&base.with_extension("timing.csv"), &timing)?;
    write_atomic(&base.with_extension("best.txt"), result.best.genome.to_text().as_bytes())?;
    let mut line = serde_json::to_string(&record).map_err(|e| CliError::Data(e.to_string()))?;
    line.push('\n');
    let path = base.with_extension("json");
    write_atomic(&path, line.as_bytes())?;
    Ok(path)
}

/// Scenario name used in records; unnamed two-objective scenarios get
/// their first weight appended so preference variants stay apart.
pub fn scenario_key(s: &Scenario) -> String {
    if s.name.is_empty() && s.lambdas.len() > 1 {
        format!("{} w={}", s.label(), s.lambdas[0])
    } else {
        s.display_name()
    }
}

fn llm_err(e: dfjss_core::llm::LlmError) -> CliError {
    use dfjss_core::llm::LlmError;
    match e {
        LlmError::Provider(p) => CliError::Provider(p.to_string()),
        LlmError::Prompt(m) => CliError::Config(m),
        other => CliError::Data(other.to_string()),
    }
}

fn gp_err(e: dfjss_core::gp::GpError) -> CliError {
    match e {
        dfjss_core::gp::GpError::Params(m) => CliError::Config(m),
        other => CliError::Data(other.to_string()),
    }
}

/// Writes an explanation report for the first rule pair in `rules`.
/// The report is written even when the model fails; the error is then
/// returned so the exit status reflects it.
pub fn cmd_explain(m: &Manifest, rules: &Path, out: &Path, with_test: bool) -> Result<(), CliError> {
    m.scenario.validate().map_err(|e| CliError::Config(e.to_string()))?;
    let best = read_rules(rules)?.into_iter().next().ok_or_else(|| CliError::Data(format!("{}: no rule pair", rules.display())))?;
    let test = if with_test {
        let ev = Evaluator::new(m.scenario.clone(), m.sim.clone()).map_err(|e| CliError::Config(e.to_string()))?;
        Some(dfjss_core::gp::test_performance(&best, &ev).map_err(gp_err)?)
    } else {
        None
    };
    let audit_path = out.with_file_name("audit.jsonl");
    let (report, error) = match make_provider(&m.provider) {
        Ok(p) => {
            if let Some(dir) = audit_path.parent().filter(|d| !d.as_os_str().is_empty()) {
                std::fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;
            }
            let audit = AuditLog::open(&audit_path).map_err(|e| io_err(&audit_path, e))?;
            let (r, e) = generate_report(&best, &m.scenario, p.as_ref(), &m.provider, Some(&audit), test);
            (r, e.map(llm_err))
        }
        Err(e) => {
            let failing = Unavailable(e.detail().to_string());
            let (r, _) = generate_report(&best, &m.scenario, &failing, &m.provider, None, test);
            (r, Some(e))
        }
    };
    write_atomic(out, report.render().as_bytes())?;
    match error {
        Some(e) => Err(e),
        None => Ok(()),
    }
}

/// Stands in for a provider that could not be constructed.
struct Unavailable(String);

impl ChatProvider for Unavailable {
    fn name(&self) -> &str {
        "unavailable"
    }
    fn complete(&self, _: &dfjss_core::llm::ChatRequest) -> Result<String, dfjss_core::llm::ProviderError> {
        Err(dfjss_core::llm::ProviderError::Auth(self.0.clone()))
    }
}

pub fn read_records(pattern: &str) -> Result<Vec<RunRecord>, CliError> {
    let paths = glob::glob(pattern).map_err(|e| CliError::Config(format!("bad glob `{pattern}`: {e}")))?;
    let mut out = Vec::new();
    for p in paths {
        let p = p.map_err(|e| CliError::Data(e.to_string()))?;
        let text = std::fs::read_to_string(&p).map_err(|e| io_err(&p, e))?;
        for (i, line) in text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty()) {
            out.push(
                serde_json::from_str(line)
                    .map_err(|e| CliError::Data(format!("{}:{}: {e}", p.display(), i + 1)))?,
            );
        }
    }
    if out.is_empty() {
        return Err(CliError::Data(format!("no run records match `{pattern}`")));
    }
    Ok(out)
}

/// Comparison table plus figure series, all as CSV under `out`.
pub fn cmd_compare(pattern: &str, baseline: &str, out: &Path) -> Result<Vec<PathBuf>, CliError> {
    let records = read_records(pattern)?;
    let data = |e: AnalysisError| CliError::Data(e.to_string());
    let table = summarize(&records, baseline).map_err(data)?;
    let mut written = Vec::new();
    let mut emit = |name: &str, buf: Vec<u8>| -> Result<(), CliError> {
        let p = out.join(name);
        write_atomic(&p, &buf)?;
        written.push(p);
        Ok(())
    };
    let mut buf = Vec::new();
    table.write_csv(&mut buf).map_err(data)?;
    emit("comparison.csv", buf)?;

    let mut buf = Vec::new();
    write_distribution_csv(&mut buf, &initial_fitness_distribution(&records).map_err(data)?).map_err(data)?;
    emit("initial_fitness.csv", buf)?;

    let mut groups: BTreeMap<(String, String), Vec<&RunRecord>> = BTreeMap::new();
    for r in &records {
        groups.entry((r.scenario.clone(), r.method.clone())).or_default().push(r);
    }
    let (mut diversity, mut convergence) = (Vec::new(), Vec::new());
    for ((scenario, method), recs) in &groups {
        let logs: Vec<_> = recs.iter().map(|r| &r.log).collect();
        let label = format!("{method} {scenario}");
        diversity.push((label.clone(), diversity_series(&logs).map_err(data)?));
        convergence.push((label, convergence_series(&logs).map_err(data)?));
    }
    let mut buf = Vec::new();
    write_series_csv(&mut buf, &diversity).map_err(data)?;
    emit("diversity.csv", buf)?;
    let mut buf = Vec::new();
    write_series_csv(&mut buf, &convergence).map_err(data)?;
    emit("convergence.csv", buf)?;

    let mut by_method: BTreeMap<&str, Vec<RulePair>> = BTreeMap::new();
    for r in &records {
        let g = r.best_genome().map_err(|e| CliError::Data(format!("run {} of {}: {e}", r.run, r.method)))?;
        by_method.entry(&r.method).or_default().push(g);
    }
    for (method, genomes) in by_method {
        let mut buf = Vec::new();
        write_terminal_csv(&mut buf, &terminal_frequency_report(&genomes).map_err(data)?).map_err(data)?;
        emit(&format!("terminals_{}.csv", slug(method)), buf)?;
    }
    Ok(written)
}
