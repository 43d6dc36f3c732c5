use std::path::{Path, PathBuf};

use dfjss_core::gp::GpParams;
use dfjss_core::llm::ProviderConfig;
use dfjss_core::sim::{Objective, Scenario, SimConfig};
use serde::{Deserialize, Serialize};

use crate::CliError;

pub const DEFAULT_CONFIG: &str = include_str!("../../../config/default.toml");

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum InitMode {
    Random,
    Llm,
    File,
}

/// Everything an experiment needs, read from TOML.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Manifest {
    /// Label used in run records and comparison tables.
    #[serde(default)]
    pub method: Option<String>,
    pub runs: usize,
    pub master_seed: u64,
    #[serde(default)]
    pub jobs: usize,
    pub init: InitMode,
    /// Rule-pair file used when `init = "file"`.
    #[serde(default)]
    pub seeds_file: Option<PathBuf>,
    /// Reference heuristics offered to the model.
    #[serde(default)]
    pub references: Option<PathBuf>,
    pub n_requested: usize,
    pub out: PathBuf,
    pub scenario: Scenario,
    #[serde(default)]
    pub gp: GpParams,
    #[serde(default)]
    pub sim: SimConfig,
    #[serde(default)]
    pub provider: ProviderConfig,
}

impl Manifest {
    pub fn from_toml(text: &str) -> Result<Manifest, CliError> {
        toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))
    }

    /// The given file, or the built-in defaults.
    pub fn load(path: Option<&Path>) -> Result<Manifest, CliError> {
        match path {
            Some(p) => {
                let text = std::fs::read_to_string(p)
                    .map_err(|e| CliError::Config(format!("{}: {e}", p.display())))?;
                Manifest::from_toml(&text).map_err(|e| CliError::Config(format!("{}: {e}", p.display())))
            }
            None => Manifest::from_toml(DEFAULT_CONFIG),
        }
    }

    pub fn validate(&self) -> Result<(), CliError> {
        if self.runs == 0 {
            return Err(CliError::Config("runs must be at least 1".into()));
        }
        if self.n_requested == 0 {
            return Err(CliError::Config("n_requested must be at least 1".into()));
        }
        self.scenario.validate().map_err(|e| CliError::Config(e.to_string()))?;
        self.gp.validate().map_err(|e| CliError::Config(e.to_string()))?;
        self.sim.validate().map_err(|e| CliError::Config(e.to_string()))?;
        Ok(())
    }

    pub fn method_label(&self) -> String {
        self.method.clone().unwrap_or_else(|| {
            match self.init {
                InitMode::Random => "GP",
                InitMode::Llm => "LLM-GP",
                InitMode::File => "Seeded-GP",
            }
            .to_string()
        })
    }

    /// Applies `--scenario`, keeping the manifest's seed lists.
    pub fn set_scenario(&mut self, spec: &str) -> Result<(), CliError> {
        let s = parse_scenario(spec)?;
        self.scenario = Scenario {
            training_seeds: std::mem::take(&mut self.scenario.training_seeds),
            test_seeds: std::mem::take(&mut self.scenario.test_seeds),
            ..s
        };
        Ok(())
    }
}

/// A scenario TOML file, or the compact form `OBJ[-OBJ][:LAMBDA1]@UTIL`,
/// e.g. `Fmean@0.85` or `Fmean-WTmean:0.2@0.95`.
pub fn parse_scenario(spec: &str) -> Result<Scenario, CliError> {
    let path = Path::new(spec);
    if spec.ends_with(".toml") || path.is_file() {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("{spec}: {e}")))?;
        let s: Scenario = toml::from_str(&text).map_err(|e| CliError::Config(format!("{spec}: {e}")))?;
        s.validate().map_err(|e| CliError::Config(e.to_string()))?;
        return Ok(s);
    }
    let bad = |why: &str| CliError::Config(format!("scenario `{spec}`: {why}"));
    let (objs, util) = spec.split_once('@').ok_or_else(|| bad("expected OBJ[-OBJ][:LAMBDA1]@UTIL"))?;
    let utilization: f64 = util.trim().parse().map_err(|_| bad("utilization is not a number"))?;
    let (names, lambda) = match objs.split_once(':') {
        Some((n, l)) => (n, Some(l.trim().parse::<f64>().map_err(|_| bad("lambda is not a number"))?)),
        None => (objs, None),
    };
    let objectives: Vec<Objective> =
        names.split('-').map(|n| n.trim().parse::<Objective>().map_err(|e| bad(&e))).collect::<Result<_, _>>()?;
    let s = match (objectives.as_slice(), lambda) {
        ([o], None) => Scenario::single(*o, utilization),
        ([o], Some(_)) => return Err(bad(&format!("a single objective ({o}) takes no lambda"))),
        ([a, b], l) => Scenario::pair(*a, *b, l.unwrap_or(0.5), utilization),
        _ => return Err(bad("one or two objectives")),
    };
    s.validate().map_err(|e| CliError::Config(e.to_string()))?;
    Ok(s)
}
