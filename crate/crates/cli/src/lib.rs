//! `dfjss` command-line front end: instance generation, simulation,
//! evolution runs, model-assisted seeding and reporting, and comparison.

use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, Subcommand};
use dfjss_core::llm::ProviderKind;
use dfjss_core::sim::SimConfig;

pub mod commands;
pub mod config;
pub mod fsio;

pub use config::{parse_scenario, InitMode, Manifest, DEFAULT_CONFIG};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("provider error: {0}")]
    Provider(String),
    #[error("data error: {0}")]
    Data(String),
    #[error("{0}")]
    Usage(String),
}

impl CliError {
    /// The message without the category prefix.
    pub fn detail(&self) -> &str {
        match self {
            CliError::Config(m) | CliError::Provider(m) | CliError::Data(m) | CliError::Usage(m) => m,
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Usage(_) => 2,
            CliError::Provider(_) => 3,
            CliError::Data(_) => 4,
        }
    }
}

#[derive(Parser, Debug)]
#[command(name = "dfjss", version, about = "Evolve and analyse dispatching rules for dynamic flexible job shops")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(clap::Args, Debug, Default)]
pub struct Common {
    /// Experiment manifest (TOML). Built-in defaults when omitted.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Scenario file or compact form such as `Fmean-WTmean:0.2@0.95`.
    #[arg(long)]
    pub scenario: Option<String>,
}

#[derive(clap::Args, Debug, Default)]
pub struct ProviderArgs {
    #[arg(long, value_enum)]
    pub provider: Option<ProviderArg>,
    /// Directory of canned replies for the mock provider.
    #[arg(long)]
    pub mock_dir: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, clap::ValueEnum)]
pub enum ProviderArg {
    Openai,
    Mock,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Generate one problem instance as JSONL.
    GenInstance {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Number of jobs in the instance.
        #[arg(long)]
        jobs: Option<usize>,
        #[arg(long)]
        warmup: Option<usize>,
        #[arg(long)]
        utilization: Option<f64>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run rule pairs over an instance and print their objectives.
    Simulate {
        #[arg(long)]
        rules: PathBuf,
        #[arg(long)]
        instance: PathBuf,
        /// Write the event trace as CSV.
        #[arg(long)]
        trace: Option<PathBuf>,
    },
    /// Independent evolutionary runs, one record per run.
    Evolve {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        runs: Option<usize>,
        /// Worker threads (0 = all cores).
        #[arg(long)]
        jobs: Option<usize>,
        #[arg(long, value_enum)]
        init: Option<InitMode>,
        /// Rule-pair file for `--init file`.
        #[arg(long)]
        seeds: Option<PathBuf>,
        #[command(flatten)]
        provider: ProviderArgs,
        /// Label for records and tables.
        #[arg(long)]
        method: Option<String>,
        #[arg(long)]
        generations: Option<usize>,
        #[arg(long)]
        population: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Ask the model for seed rule pairs.
    InitLlm {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        provider: ProviderArgs,
        /// Reference heuristics to include in the prompt.
        #[arg(long)]
        refs: Option<PathBuf>,
        /// Source scenario; switches to a transfer prompt.
        #[arg(long)]
        from: Option<String>,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Write a plain-language report for an evolved rule pair.
    Explain {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        provider: ProviderArgs,
        #[arg(long)]
        rules: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Skip the test-set evaluation in the appendix.
        #[arg(long)]
        no_test: bool,
    },
    /// Statistical comparison and figure data from run records.
    Compare {
        /// Glob of `run-*.json` record files.
        #[arg(long)]
        records: String,
        #[arg(long, default_value = "GP")]
        baseline: String,
        #[arg(long)]
        out: PathBuf,
    },
}

fn manifest(common: &Common) -> Result<Manifest, CliError> {
    let mut m = Manifest::load(common.config.as_deref())?;
    if let Some(s) = &common.scenario {
        m.set_scenario(s)?;
    }
    Ok(m)
}

fn apply_provider(m: &mut Manifest, p: &ProviderArgs) {
    if let Some(kind) = p.provider {
        m.provider.kind = match kind {
            ProviderArg::Openai => ProviderKind::Openai,
            ProviderArg::Mock => ProviderKind::Mock,
        };
    }
    if let Some(dir) = &p.mock_dir {
        m.provider.mock_dir = Some(dir.clone());
    }
}

fn say(out: &mut dyn Write, line: String) -> Result<(), CliError> {
    writeln!(out, "{line}").map_err(|e| CliError::Data(e.to_string()))
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I, out: &mut dyn Write) -> Result<(), CliError>
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => say(out, e.to_string().trim_end().to_string()),
                _ => Err(CliError::Usage(e.to_string())),
            };
        }
    };
    match cli.command {
        Command::GenInstance { common, seed, jobs, warmup, utilization, out: path } => {
            let m = manifest(&common)?;
            let mut sim = SimConfig { utilization: m.scenario.utilization, ..m.sim };
            if let Some(j) = jobs {
                sim.total_jobs = j;
                if warmup.is_none() && sim.warmup_jobs >= j {
                    sim.warmup_jobs = j / 5;
                }
            }
            if let Some(w) = warmup {
                sim.warmup_jobs = w;
            }
            if let Some(u) = utilization {
                sim.utilization = u;
            }
            let inst = commands::cmd_gen_instance(&sim, seed, &path)?;
            say(out, format!("wrote {} jobs on {} machines to {}", inst.jobs.len(), inst.num_machines(), path.display()))
        }
        Command::Simulate { rules, instance, trace } => commands::cmd_simulate(&rules, &instance, trace.as_deref(), out),
        Command::Evolve { common, seed, runs, jobs, init, seeds, provider, method, generations, population, out: dir } => {
            let mut m = manifest(&common)?;
            apply_provider(&mut m, &provider);
            if let Some(s) = seed {
                m.master_seed = s;
            }
            if let Some(r) = runs {
                m.runs = r;
            }
            if let Some(j) = jobs {
                m.jobs = j;
            }
            if let Some(i) = init {
                m.init = i;
            }
            if let Some(s) = seeds {
                m.seeds_file = Some(s);
                if init.is_none() {
                    m.init = InitMode::File;
                }
            }
            if method.is_some() {
                m.method = method;
            }
            if let Some(g) = generations {
                m.gp.generations = g;
            }
            if let Some(p) = population {
                m.gp.population_size = p;
            }
            if let Some(d) = dir {
                m.out = d;
            }
            let res = commands::cmd_evolve(&m)?;
            say(out, format!("wrote {} run records to {}", res.records.len(), res.dir.display()))
        }
        Command::InitLlm { common, provider, refs, from, n, out: path } => {
            let mut m = manifest(&common)?;
            apply_provider(&mut m, &provider);
            if refs.is_some() {
                m.references = refs;
            }
            if let Some(n) = n {
                m.n_requested = n;
            }
            let source = from.as_deref().map(parse_scenario).transpose()?;
            let r = commands::cmd_init_llm(&m, source.as_ref(), &path)?;
            say(out, format!("accepted {} rule pairs, rejected {}; wrote {}", r.accepted.len(), r.rejected.len(), path.display()))
        }
        Command::Explain { common, provider, rules, out: path, no_test } => {
            let mut m = manifest(&common)?;
            apply_provider(&mut m, &provider);
            commands::cmd_explain(&m, &rules, &path, !no_test)?;
            say(out, format!("wrote {}", path.display()))
        }
        Command::Compare { records, baseline, out: dir } => {
            let files = commands::cmd_compare(&records, &baseline, &dir)?;
            for f in files {
                say(out, format!("wrote {}", f.display()))?;
            }
            Ok(())
        }
    }
}
