use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::doe::InputDistribution;
use crate::kriging::{self, trend_size, KrigingModel, KrigingOptions, MAX_TREND_DEGREE};
use crate::pce::{self, PceModel, DEFAULT_MAX_DEGREE};
use crate::svr::{self, CrossValidation, SvrModel, SvrOptions, SvrParams};
use crate::{Error, Result};

/// A surrogate family, plus the trend degree for Kriging.
///
/// Written as `kriging_p0` .. `kriging_p4`, `pce`, `svr`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum RosterEntry {
    Kriging { degree: usize },
    Pce,
    Svr,
}

impl RosterEntry {
    /// Kriging p = 0..4, PCE, SVR.
    pub fn default_roster() -> Vec<RosterEntry> {
        let mut roster: Vec<RosterEntry> =
            (0..=MAX_TREND_DEGREE).map(|degree| RosterEntry::Kriging { degree }).collect();
        roster.push(RosterEntry::Pce);
        roster.push(RosterEntry::Svr);
        roster
    }

    pub fn family(&self) -> &'static str {
        match self {
            RosterEntry::Kriging { .. } => "kriging",
            RosterEntry::Pce => "pce",
            RosterEntry::Svr => "svr",
        }
    }
}

impl fmt::Display for RosterEntry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RosterEntry::Kriging { degree } => write!(f, "kriging_p{degree}"),
            RosterEntry::Pce => f.write_str("pce"),
            RosterEntry::Svr => f.write_str("svr"),
        }
    }
}

impl FromStr for RosterEntry {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "pce" => Ok(RosterEntry::Pce),
            "svr" => Ok(RosterEntry::Svr),
            _ => {
                let degree = s
                    .strip_prefix("kriging_p")
                    .and_then(|p| p.parse::<usize>().ok())
                    .filter(|p| *p <= MAX_TREND_DEGREE)
                    .ok_or_else(|| {
                        Error::validation(
                            "roster",
                            format!("`{s}` is not one of kriging_p0..kriging_p{MAX_TREND_DEGREE}, pce, svr"),
                        )
                    })?;
                Ok(RosterEntry::Kriging { degree })
            }
        }
    }
}

impl Serialize for RosterEntry {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for RosterEntry {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Anything that maps a physical design point to a predicted `q`.
pub trait Surrogate: Sync {
    fn predict_mean(&self, point: &[f64]) -> Result<f64>;

    fn id(&self) -> String;
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", content = "model", rename_all = "snake_case")]
pub enum SurrogateModel {
    Kriging(KrigingModel),
    Pce(PceModel),
    Svr(SvrModel),
}

impl SurrogateModel {
    pub fn distribution(&self) -> &InputDistribution {
        match self {
            SurrogateModel::Kriging(m) => &m.params().distribution,
            SurrogateModel::Pce(m) => &m.distribution,
            SurrogateModel::Svr(m) => &m.distribution,
        }
    }

    pub fn entry(&self) -> RosterEntry {
        match self {
            SurrogateModel::Kriging(m) => RosterEntry::Kriging { degree: m.trend_degree() },
            SurrogateModel::Pce(_) => RosterEntry::Pce,
            SurrogateModel::Svr(_) => RosterEntry::Svr,
        }
    }
}

impl Surrogate for SurrogateModel {
    fn predict_mean(&self, point: &[f64]) -> Result<f64> {
        match self {
            SurrogateModel::Kriging(m) => m.predict_mean(point),
            SurrogateModel::Pce(m) => m.predict(point),
            SurrogateModel::Svr(m) => m.predict(point),
        }
    }

    fn id(&self) -> String {
        self.entry().to_string()
    }
}

/// Wraps a closure as a surrogate.
pub struct FnSurrogate<F> {
    pub label: String,
    pub f: F,
}

impl<F: Fn(&[f64]) -> f64 + Sync> FnSurrogate<F> {
    pub fn new(label: impl Into<String>, f: F) -> Self {
        Self { label: label.into(), f }
    }
}

impl<F: Fn(&[f64]) -> f64 + Sync> Surrogate for FnSurrogate<F> {
    fn predict_mean(&self, point: &[f64]) -> Result<f64> {
        Ok((self.f)(point))
    }

    fn id(&self) -> String {
        self.label.clone()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SurrogateSettings {
    /// Used for every Kriging entry; the trend degree comes from the entry.
    pub kriging: KrigingOptions,
    /// Ridge applied when a Kriging trend has at least as many terms as
    /// there are training points and `kriging.ridge` is unset.
    pub auto_ridge: f64,
    pub pce_max_degree: usize,
    /// `None` selects [`svr::default_grid`].
    pub svr_grid: Option<Vec<SvrParams>>,
    pub svr_folds: usize,
    pub svr_seed: u64,
    pub svr: SvrOptions,
}

impl Default for SurrogateSettings {
    fn default() -> Self {
        Self {
            kriging: KrigingOptions::default(),
            auto_ridge: 1e-6,
            pce_max_degree: DEFAULT_MAX_DEGREE,
            svr_grid: None,
            svr_folds: 5,
            svr_seed: 0x73_76_72,
            svr: SvrOptions::default(),
        }
    }
}

/// A trained surrogate as persisted to disk.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FittedSurrogate {
    pub id: RosterEntry,
    pub config_hash: String,
    pub training_size: usize,
    /// Ridge penalty on the Kriging trend, if one was applied.
    pub ridge: Option<f64>,
    /// Cross-validation record for SVR.
    pub tuning: Option<CrossValidation>,
    pub model: SurrogateModel,
}

impl FittedSurrogate {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let fitted: FittedSurrogate = serde_json::from_str(text)?;
        if fitted.model.entry() != fitted.id {
            return Err(Error::validation(
                "id",
                format!("`{}` does not match the stored {} model", fitted.id, fitted.model.id()),
            ));
        }
        Ok(fitted)
    }
}

impl Surrogate for FittedSurrogate {
    fn predict_mean(&self, point: &[f64]) -> Result<f64> {
        self.model.predict_mean(point)
    }

    fn id(&self) -> String {
        self.id.to_string()
    }
}

/// Trains one roster entry on `(inputs, outputs)`.
pub fn fit_surrogate(
    entry: RosterEntry,
    dist: &InputDistribution,
    inputs: &[Vec<f64>],
    outputs: &[f64],
    settings: &SurrogateSettings,
    config_hash: &str,
) -> Result<FittedSurrogate> {
    let n = inputs.len();
    let mut ridge = None;
    let mut tuning = None;
    let model = match entry {
        RosterEntry::Kriging { degree } => {
            let mut options = KrigingOptions { trend_degree: degree, ..settings.kriging.clone() };
            if options.ridge.is_none() && trend_size(dist.dim(), degree) >= n {
                options.ridge = Some(settings.auto_ridge);
            }
            ridge = options.ridge;
            SurrogateModel::Kriging(kriging::fit(dist, inputs, outputs, &options)?)
        }
        RosterEntry::Pce => {
            SurrogateModel::Pce(pce::fit(dist, inputs, outputs, settings.pce_max_degree)?)
        }
        RosterEntry::Svr => {
            let grid = settings.svr_grid.clone().unwrap_or_else(|| svr::default_grid(dist.dim()));
            let cv = svr::cross_validate(
                dist,
                inputs,
                outputs,
                &grid,
                settings.svr_folds,
                settings.svr_seed,
                &settings.svr,
            )?;
            let model = svr::fit(dist, inputs, outputs, cv.best, &settings.svr)?;
            tuning = Some(cv);
            SurrogateModel::Svr(model)
        }
    };
    Ok(FittedSurrogate {
        id: entry,
        config_hash: config_hash.to_string(),
        training_size: n,
        ridge,
        tuning,
        model,
    })
}
