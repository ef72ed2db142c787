use std::collections::HashSet;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::dataset::{generate_with, BeamSimulator, Dataset, Simulator};
use super::report::{export_document, Report, ReportDocument};
use super::surrogate::{fit_surrogate, FittedSurrogate, RosterEntry, Surrogate, SurrogateSettings};
use crate::beam_model::BridgeConfig;
use crate::doe::InputDistribution;
use crate::metrics::{evaluate, Scores};
use crate::{Error, Result};

/// Training sizes, validation size, roster and seeds of a model comparison.
///
/// The validation set is drawn with `seed`, the training set of size `n`
/// with `seed + n`; every training size gets its own design.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CampaignPlan {
    pub training_sizes: Vec<usize>,
    pub validation_size: usize,
    pub roster: Vec<RosterEntry>,
    pub seed: u64,
    pub config: BridgeConfig,
    pub distribution: InputDistribution,
    pub settings: SurrogateSettings,
}

impl Default for CampaignPlan {
    fn default() -> Self {
        Self {
            training_sizes: vec![50, 100, 150, 200, 250, 300],
            validation_size: 50,
            roster: RosterEntry::default_roster(),
            seed: 2024,
            config: BridgeConfig::default(),
            distribution: InputDistribution::default(),
            settings: SurrogateSettings::default(),
        }
    }
}

impl CampaignPlan {
    pub fn validation_seed(&self) -> u64 {
        self.seed
    }

    pub fn training_seed(&self, size: usize) -> u64 {
        self.seed.wrapping_add(size as u64)
    }

    pub fn validate(&self) -> Result<()> {
        self.config.validate()?;
        self.distribution.validate()?;
        if self.training_sizes.is_empty() {
            return Err(Error::validation("training_sizes", "need at least one size"));
        }
        if self.roster.is_empty() {
            return Err(Error::validation("roster", "need at least one model"));
        }
        if self.validation_size < 2 {
            return Err(Error::validation("validation_size", "need at least 2 points"));
        }
        let mut seen = HashSet::new();
        for &n in &self.training_sizes {
            if n < 2 {
                return Err(Error::validation("training_sizes", "every size must be >= 2"));
            }
            if !seen.insert(n) {
                return Err(Error::validation("training_sizes", format!("{n} listed twice")));
            }
            if self.training_seed(n) == self.validation_seed() {
                return Err(Error::validation("seed", "validation seed collides with a training seed"));
            }
        }
        let mut entries = HashSet::new();
        for e in &self.roster {
            if !entries.insert(*e) {
                return Err(Error::validation("roster", format!("{e} listed twice")));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CellStatus {
    Ok,
    Failed,
}

/// Validation metrics of one (model, training size) pair.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CampaignCell {
    pub model_id: String,
    pub training_size: usize,
    pub status: CellStatus,
    pub scores: Option<Scores>,
    /// Ridge penalty applied to the Kriging trend, if any.
    pub ridge: Option<f64>,
    pub error: Option<String>,
}

#[derive(Clone, Debug)]
pub struct CampaignOutcome {
    pub plan: CampaignPlan,
    pub config_hash: String,
    pub validation: Dataset,
    /// In the order of `plan.training_sizes`.
    pub training: Vec<Dataset>,
    /// Size-major, roster-minor order.
    pub cells: Vec<CampaignCell>,
    /// Parallel to `cells`; `None` where the fit failed.
    pub models: Vec<Option<FittedSurrogate>>,
}

impl CampaignOutcome {
    pub fn report(&self) -> Result<Report> {
        export_document(&ReportDocument {
            config_hash: Some(self.config_hash.clone()),
            seed: Some(self.plan.seed),
            rows: self.cells.clone(),
        })
    }
}

/// Number of validation points that also occur, bit for bit, in `training`.
pub fn validation_overlap(validation: &Dataset, training: &[Dataset]) -> usize {
    let key = |p: &[f64]| p.iter().map(|v| v.to_bits()).collect::<Vec<u64>>();
    let train: HashSet<Vec<u64>> =
        training.iter().flat_map(|d| d.inputs().iter().map(|p| key(p))).collect();
    validation.inputs().iter().filter(|p| train.contains(&key(p))).count()
}

/// Runs the campaign against the beam model.
pub fn run_campaign(plan: &CampaignPlan) -> Result<CampaignOutcome> {
    let simulator = BeamSimulator::new(plan.config.clone())?;
    run_campaign_with(plan, &simulator)
}

fn run_cell(
    entry: RosterEntry,
    train: &Dataset,
    validation: &Dataset,
    settings: &SurrogateSettings,
    config_hash: &str,
) -> Result<(FittedSurrogate, Scores)> {
    let fitted = fit_surrogate(
        entry,
        train.distribution(),
        train.inputs(),
        &train.outputs,
        settings,
        config_hash,
    )?;
    let predicted = validation
        .inputs()
        .iter()
        .map(|x| fitted.predict_mean(x))
        .collect::<Result<Vec<f64>>>()?;
    let scores = evaluate(&validation.outputs, &predicted)?;
    Ok((fitted, scores))
}

/// Runs the campaign with any simulator. A failing cell is recorded and the
/// others continue; dataset generation failures abort.
pub fn run_campaign_with(plan: &CampaignPlan, simulator: &dyn Simulator) -> Result<CampaignOutcome> {
    plan.validate()?;
    let dist = &plan.distribution;
    let validation = generate_with(simulator, dist, plan.validation_size, plan.validation_seed())?;
    let training = plan
        .training_sizes
        .iter()
        .map(|&n| generate_with(simulator, dist, n, plan.training_seed(n)))
        .collect::<Result<Vec<Dataset>>>()?;
    let overlap = validation_overlap(&validation, &training);
    if overlap > 0 {
        return Err(Error::validation(
            "seed",
            format!("{overlap} validation points also occur in a training set"),
        ));
    }

    let config_hash = simulator.config_hash();
    let jobs: Vec<(usize, RosterEntry)> = (0..training.len())
        .flat_map(|t| plan.roster.iter().map(move |e| (t, *e)))
        .collect();
    let results: Vec<Result<(FittedSurrogate, Scores)>> = jobs
        .par_iter()
        .map(|&(t, entry)| run_cell(entry, &training[t], &validation, &plan.settings, &config_hash))
        .collect();

    let mut cells = Vec::with_capacity(jobs.len());
    let mut models = Vec::with_capacity(jobs.len());
    for ((t, entry), result) in jobs.into_iter().zip(results) {
        let training_size = plan.training_sizes[t];
        let model_id = entry.to_string();
        match result {
            Ok((fitted, scores)) => {
                cells.push(CampaignCell {
                    model_id,
                    training_size,
                    status: CellStatus::Ok,
                    scores: Some(scores),
                    ridge: fitted.ridge,
                    error: None,
                });
                models.push(Some(fitted));
            }
            Err(e) => {
                cells.push(CampaignCell {
                    model_id,
                    training_size,
                    status: CellStatus::Failed,
                    scores: None,
                    ridge: None,
                    error: Some(e.to_string()),
                });
                models.push(None);
            }
        }
    }
    Ok(CampaignOutcome {
        plan: plan.clone(),
        config_hash,
        validation,
        training,
        cells,
        models,
    })
}
