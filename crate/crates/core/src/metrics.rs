//! Validation metrics: MAE, MaxAE, RMSE and the coefficient of determination.

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Scores {
    pub mae: f64,
    pub maxae: f64,
    pub rmse: f64,
    pub r2: f64,
}

/// One line of the model-comparison report.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricsRow {
    pub model_id: String,
    pub training_size: usize,
    pub mae: f64,
    pub maxae: f64,
    pub rmse: f64,
    pub r2: f64,
}

impl MetricsRow {
    pub fn new(model_id: impl Into<String>, training_size: usize, scores: Scores) -> Self {
        Self {
            model_id: model_id.into(),
            training_size,
            mae: scores.mae,
            maxae: scores.maxae,
            rmse: scores.rmse,
            r2: scores.r2,
        }
    }

    pub fn scores(&self) -> Scores {
        Scores { mae: self.mae, maxae: self.maxae, rmse: self.rmse, r2: self.r2 }
    }
}

/// Errors `e = y_pred - y_true`; population normalisation throughout.
pub fn evaluate(y_true: &[f64], y_pred: &[f64]) -> Result<Scores> {
    if y_true.len() != y_pred.len() {
        return Err(Error::validation(
            "y_pred",
            format!("length {} differs from y_true length {}", y_pred.len(), y_true.len()),
        ));
    }
    if y_true.len() < 2 {
        return Err(Error::validation("y_true", "need at least 2 values"));
    }
    if y_true.iter().chain(y_pred).any(|v| !v.is_finite()) {
        return Err(Error::validation("y_pred", "non-finite value"));
    }
    let n = y_true.len() as f64;
    let mean = y_true.iter().sum::<f64>() / n;
    let total: f64 = y_true.iter().map(|y| (y - mean).powi(2)).sum();
    if !(total > 0.0) {
        return Err(Error::validation(
            "r2",
            "y_true has zero variance; the coefficient of determination is undefined",
        ));
    }
    let (mut abs_sum, mut max_abs, mut sq_sum) = (0.0, 0.0_f64, 0.0);
    for (t, p) in y_true.iter().zip(y_pred) {
        let e = p - t;
        abs_sum += e.abs();
        max_abs = max_abs.max(e.abs());
        sq_sum += e * e;
    }
    Ok(Scores {
        mae: abs_sum / n,
        maxae: max_abs,
        rmse: (sq_sum / n).sqrt(),
        r2: 1.0 - sq_sum / total,
    })
}
