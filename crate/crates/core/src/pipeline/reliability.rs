use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::surrogate::Surrogate;
use crate::doe::{seeded_rng, InputDistribution};
use crate::{Error, Result};

/// Smallest Monte Carlo sample accepted by [`failure_probability`].
pub const MIN_MC_SAMPLES: usize = 1000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Label {
    /// `g > 0`
    Safe,
    /// `g <= 0`
    Failure,
}

impl Label {
    pub fn of(g: f64) -> Label {
        if g > 0.0 {
            Label::Safe
        } else {
            Label::Failure
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClassificationResult {
    pub surrogate_id: String,
    /// Stress limit `L` in Pa.
    pub limit: f64,
    /// `g = L - q_hat` per point.
    pub g: Vec<f64>,
    pub labels: Vec<Label>,
}

impl ClassificationResult {
    pub fn safe_count(&self) -> usize {
        self.labels.iter().filter(|l| **l == Label::Safe).count()
    }

    pub fn failure_count(&self) -> usize {
        self.labels.len() - self.safe_count()
    }
}

fn check_limit(limit: f64) -> Result<()> {
    if !(limit > 0.0 && limit.is_finite()) {
        return Err(Error::validation("limit", "stress limit must be finite and > 0"));
    }
    Ok(())
}

fn predict_all(model: &dyn Surrogate, points: &[Vec<f64>]) -> Result<Vec<f64>> {
    points.par_iter().map(|p| model.predict_mean(p)).collect()
}

/// Labels each point safe (`L - q_hat > 0`) or failed.
pub fn classify(
    model: &dyn Surrogate,
    points: &[Vec<f64>],
    limit: f64,
) -> Result<ClassificationResult> {
    check_limit(limit)?;
    let g: Vec<f64> = predict_all(model, points)?.iter().map(|q| limit - q).collect();
    let labels = g.iter().map(|v| Label::of(*v)).collect();
    Ok(ClassificationResult { surrogate_id: model.id(), limit, g, labels })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PfEstimate {
    pub pf: f64,
    /// Coefficient of variation of the estimator; `None` when no failure was observed.
    pub cov: Option<f64>,
    pub n_mc: usize,
    pub failures: usize,
    pub seed: u64,
}

/// Crude Monte Carlo estimate of `P[L - q_hat(X) <= 0]` with `X ~ dist`.
pub fn failure_probability(
    model: &dyn Surrogate,
    dist: &InputDistribution,
    limit: f64,
    n_mc: usize,
    seed: u64,
) -> Result<PfEstimate> {
    check_limit(limit)?;
    if n_mc < MIN_MC_SAMPLES {
        return Err(Error::validation("n_mc", format!("need at least {MIN_MC_SAMPLES} draws")));
    }
    dist.validate()?;
    let points = dist.sample_iid(n_mc, &mut seeded_rng(seed));
    let q = predict_all(model, &points)?;
    let failures = q.iter().filter(|q| Label::of(limit - **q) == Label::Failure).count();
    let pf = failures as f64 / n_mc as f64;
    let cov = (failures > 0).then(|| ((1.0 - pf) / (n_mc as f64 * pf)).sqrt());
    Ok(PfEstimate { pf, cov, n_mc, failures, seed })
}
