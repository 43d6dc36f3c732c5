use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::SimError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Objective {
    Tmax,
    Tmean,
    Fmean,
    WTmean,
    WFmean,
}

impl Objective {
    pub const ALL: [Objective; 5] = [
        Objective::Tmax,
        Objective::Tmean,
        Objective::Fmean,
        Objective::WTmean,
        Objective::WFmean,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Objective::Tmax => "Tmax",
            Objective::Tmean => "Tmean",
            Objective::Fmean => "Fmean",
            Objective::WTmean => "WTmean",
            Objective::WFmean => "WFmean",
        }
    }

    pub fn description(self) -> &'static str {
        match self {
            Objective::Tmax => "maximum tardiness",
            Objective::Tmean => "mean tardiness",
            Objective::Fmean => "mean flowtime",
            Objective::WTmean => "mean weighted tardiness",
            Objective::WFmean => "mean weighted flowtime",
        }
    }
}

impl fmt::Display for Objective {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Objective {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Objective::ALL
            .into_iter()
            .find(|o| o.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| format!("unknown objective `{s}`"))
    }
}

/// Per-instance performance measures over the counted jobs.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[allow(non_snake_case)]
pub struct ObjectiveVector {
    pub Tmax: f64,
    pub Tmean: f64,
    pub Fmean: f64,
    pub WTmean: f64,
    pub WFmean: f64,
}

impl ObjectiveVector {
    pub fn get(&self, o: Objective) -> f64 {
        match o {
            Objective::Tmax => self.Tmax,
            Objective::Tmean => self.Tmean,
            Objective::Fmean => self.Fmean,
            Objective::WTmean => self.WTmean,
            Objective::WFmean => self.WFmean,
        }
    }
}

impl fmt::Display for ObjectiveVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "Tmax={} Tmean={} Fmean={} WTmean={} WFmean={}",
            self.Tmax, self.Tmean, self.Fmean, self.WTmean, self.WFmean
        )
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CompletedJob {
    pub release: f64,
    pub due: f64,
    pub weight: f64,
    pub completion: f64,
}

impl CompletedJob {
    pub fn tardiness(&self) -> f64 {
        (self.completion - self.due).max(0.0)
    }

    pub fn flowtime(&self) -> f64 {
        self.completion - self.release
    }
}

pub fn compute_objectives(jobs: &[CompletedJob]) -> Result<ObjectiveVector, SimError> {
    if jobs.is_empty() {
        return Err(SimError::NoCountedJobs);
    }
    if let Some(j) = jobs.iter().find(|j| !(j.completion >= j.release)) {
        return Err(SimError::Data(format!(
            "completion {} precedes release {}",
            j.completion, j.release
        )));
    }
    let n = jobs.len() as f64;
    let mut t_max = 0.0f64;
    let (mut t_sum, mut f_sum, mut wt_sum, mut wf_sum) = (0.0, 0.0, 0.0, 0.0);
    for j in jobs {
        let t = j.tardiness();
        let f = j.flowtime();
        t_max = t_max.max(t);
        t_sum += t;
        f_sum += f;
        wt_sum += j.weight * t;
        wf_sum += j.weight * f;
    }
    Ok(ObjectiveVector {
        Tmax: t_max,
        Tmean: t_sum / n,
        Fmean: f_sum / n,
        WTmean: wt_sum / n,
        WFmean: wf_sum / n,
    })
}
