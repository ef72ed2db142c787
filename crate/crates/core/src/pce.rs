//! Polynomial chaos expansion over independent uniform inputs.
//!
//! Each input is mapped to `xi` in `[-1, 1]`, where the uniform measure is
//! paired with orthonormal Legendre polynomials. The basis is the full
//! total-degree tensor set; coefficients come from ordinary least squares and
//! the total degree is picked by the closed-form leave-one-out error.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::doe::InputDistribution;
use crate::linalg::{binomial, condition_number, graded_multi_indices};
use crate::{Error, Result};

pub const DEFAULT_MAX_DEGREE: usize = 10;
pub const MAX_CONDITION: f64 = 1e10;

/// `sqrt(2k + 1) P_k(xi)`, orthonormal under the density `1/2` on `[-1, 1]`.
pub fn legendre_orthonormal(k: usize, xi: f64) -> Result<f64> {
    if !(xi.abs() <= 1.0 + 1e-12) {
        return Err(Error::validation("xi", format!("{xi} outside [-1, 1]")));
    }
    Ok(legendre_unchecked(k, xi))
}

fn legendre_unchecked(k: usize, xi: f64) -> f64 {
    let (mut prev, mut cur) = (1.0, xi);
    if k == 0 {
        return 1.0;
    }
    for j in 1..k {
        let jf = j as f64;
        let next = ((2.0 * jf + 1.0) * xi * cur - jf * prev) / (jf + 1.0);
        prev = cur;
        cur = next;
    }
    (2.0 * k as f64 + 1.0).sqrt() * cur
}

/// Orthonormal values `[psi_0(xi), ..., psi_p(xi)]`.
fn legendre_table(p: usize, xi: f64) -> Vec<f64> {
    let mut raw = Vec::with_capacity(p + 1);
    raw.push(1.0);
    if p >= 1 {
        raw.push(xi);
    }
    for j in 1..p {
        let jf = j as f64;
        raw.push(((2.0 * jf + 1.0) * xi * raw[j] - jf * raw[j - 1]) / (jf + 1.0));
    }
    raw.iter()
        .enumerate()
        .map(|(k, v)| (2.0 * k as f64 + 1.0).sqrt() * v)
        .collect()
}

/// Multi-indices with total degree `<= p`, graded lexicographic order.
pub fn multi_index_set(d: usize, p: usize) -> Vec<Vec<usize>> {
    graded_multi_indices(d, p)
}

fn basis_row(indices: &[Vec<usize>], xi: &[f64], p: usize) -> Vec<f64> {
    let tables: Vec<Vec<f64>> = xi.iter().map(|&x| legendre_table(p, x)).collect();
    indices
        .iter()
        .map(|alpha| {
            alpha
                .iter()
                .zip(&tables)
                .map(|(&k, table)| table[k])
                .product()
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CandidateDegree {
    pub degree: usize,
    pub basis_size: usize,
    pub condition: f64,
    /// Leave-one-out error over output variance; `None` if the candidate was skipped.
    pub relative_loo: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PceModel {
    pub degree: usize,
    pub multi_indices: Vec<Vec<usize>>,
    pub coefficients: Vec<f64>,
    pub distribution: InputDistribution,
    /// Mean squared leave-one-out residual, output units squared.
    pub loo_error: f64,
    pub relative_loo: f64,
    #[serde(default)]
    pub candidates: Vec<CandidateDegree>,
}

fn check_training(dist: &InputDistribution, inputs: &[Vec<f64>], outputs: &[f64]) -> Result<Vec<Vec<f64>>> {
    dist.validate()?;
    if inputs.len() != outputs.len() {
        return Err(Error::validation(
            "dataset",
            format!("{} inputs vs {} outputs", inputs.len(), outputs.len()),
        ));
    }
    if inputs.len() < 2 {
        return Err(Error::validation("dataset", "need at least 2 training points"));
    }
    if outputs.iter().any(|v| !v.is_finite()) {
        return Err(Error::validation("dataset", "non-finite output"));
    }
    inputs.iter().map(|x| dist.to_standard(x)).collect()
}

fn variance(values: &[f64]) -> f64 {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n
}

/// Least-squares expansion of fixed total degree, with its leave-one-out error.
pub fn fit_degree(
    dist: &InputDistribution,
    inputs: &[Vec<f64>],
    outputs: &[f64],
    degree: usize,
) -> Result<PceModel> {
    let xi = check_training(dist, inputs, outputs)?;
    let (model, _) = fit_standardized(dist, &xi, outputs, degree)?;
    Ok(model)
}

fn fit_standardized(
    dist: &InputDistribution,
    xi: &[Vec<f64>],
    outputs: &[f64],
    degree: usize,
) -> Result<(PceModel, f64)> {
    let n = xi.len();
    let indices = multi_index_set(dist.dim(), degree);
    let m = indices.len();
    if m > n {
        return Err(Error::validation(
            "degree",
            format!("degree {degree} needs {m} terms but only {n} points"),
        ));
    }
    let mut psi = DMatrix::<f64>::zeros(n, m);
    for (i, x) in xi.iter().enumerate() {
        for (j, v) in basis_row(&indices, x, degree).into_iter().enumerate() {
            psi[(i, j)] = v;
        }
    }
    let condition = condition_number(&psi);
    if !(condition <= MAX_CONDITION) {
        return Err(Error::numerical(format!(
            "degree {degree} design matrix condition number {condition:e} exceeds {MAX_CONDITION:e}"
        )));
    }
    let y = DVector::from_column_slice(outputs);
    let qr = psi.clone().qr();
    let q = qr.q();
    let coefficients = qr
        .r()
        .solve_upper_triangular(&(q.transpose() * &y))
        .ok_or_else(|| Error::numerical("singular least-squares factor"))?;
    let fitted = &psi * &coefficients;

    let mut loo = 0.0;
    for i in 0..n {
        let h = q.row(i).norm_squared();
        let denom = 1.0 - h;
        if !(denom > 1e-12) {
            loo = f64::INFINITY;
            break;
        }
        loo += ((y[i] - fitted[i]) / denom).powi(2);
    }
    loo /= n as f64;
    let var = variance(outputs);
    let relative_loo = if var > 0.0 { loo / var } else { loo };
    Ok((
        PceModel {
            degree,
            multi_indices: indices,
            coefficients: coefficients.iter().copied().collect(),
            distribution: dist.clone(),
            loo_error: loo,
            relative_loo,
            candidates: Vec::new(),
        },
        condition,
    ))
}

/// Largest total degree whose basis fits in `n - 1` points.
pub fn max_admissible_degree(d: usize, n: usize, cap: usize) -> usize {
    let mut p = 0;
    while p < cap && binomial(p + 1 + d, d) <= n.saturating_sub(1) {
        p += 1;
    }
    p
}

/// Degree-adaptive fit: every admissible degree up to `max_degree` is fitted
/// and the one with the smallest relative LOO error wins (ties go to the
/// lower degree).
pub fn fit(
    dist: &InputDistribution,
    inputs: &[Vec<f64>],
    outputs: &[f64],
    max_degree: usize,
) -> Result<PceModel> {
    let xi = check_training(dist, inputs, outputs)?;
    let top = max_admissible_degree(dist.dim(), xi.len(), max_degree);
    let mut candidates = Vec::with_capacity(top + 1);
    let mut best: Option<PceModel> = None;
    for degree in 0..=top {
        match fit_standardized(dist, &xi, outputs, degree) {
            Ok((model, condition)) => {
                candidates.push(CandidateDegree {
                    degree,
                    basis_size: model.multi_indices.len(),
                    condition,
                    relative_loo: Some(model.relative_loo).filter(|v| v.is_finite()),
                });
                if !model.relative_loo.is_finite() {
                    continue;
                }
                let better = best
                    .as_ref()
                    .is_none_or(|b| model.relative_loo < b.relative_loo - 1e-12);
                if better {
                    best = Some(model);
                }
            }
            Err(Error::Numerical(_)) => candidates.push(CandidateDegree {
                degree,
                basis_size: binomial(degree + dist.dim(), dist.dim()),
                condition: f64::INFINITY,
                relative_loo: None,
            }),
            Err(e) => return Err(e),
        }
    }
    let mut model = best.ok_or_else(|| {
        Error::numerical(format!(
            "no candidate degree in 0..={top} had a condition number below {MAX_CONDITION:e}"
        ))
    })?;
    model.candidates = candidates;
    Ok(model)
}

impl PceModel {
    /// Evaluates the expansion; points outside the input support are rejected.
    pub fn predict(&self, point: &[f64]) -> Result<f64> {
        let xi = self.distribution.to_standard(point)?;
        let row = basis_row(&self.multi_indices, &xi, self.degree);
        Ok(row.iter().zip(&self.coefficients).map(|(a, b)| a * b).sum())
    }

    /// Mean of the surrogate under the input distribution.
    pub fn mean(&self) -> f64 {
        self.coefficients[0]
    }

    /// Variance of the surrogate under the input distribution.
    pub fn variance(&self) -> f64 {
        self.coefficients.iter().skip(1).map(|c| c * c).sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::doe::lhs_sample;
    use approx::assert_relative_eq;

    #[test]
    fn legendre_values() {
        assert_eq!(legendre_orthonormal(0, 0.3).unwrap(), 1.0);
        assert_relative_eq!(legendre_orthonormal(1, 1.0).unwrap(), 3f64.sqrt(), max_relative = 1e-15);
        assert_relative_eq!(legendre_orthonormal(2, 0.0).unwrap(), -5f64.sqrt() / 2.0, max_relative = 1e-15);
        assert!(legendre_orthonormal(2, 1.1).is_err());
        for k in 0..8 {
            let table = legendre_table(7, 0.37);
            assert_relative_eq!(table[k], legendre_unchecked(k, 0.37), max_relative = 1e-13);
        }
    }

    #[test]
    fn multi_index_sets() {
        assert_eq!(multi_index_set(4, 0), vec![vec![0, 0, 0, 0]]);
        assert_eq!(multi_index_set(4, 2).len(), 15);
        assert_eq!(multi_index_set(1, 3), vec![vec![0], vec![1], vec![2], vec![3]]);
    }

    #[test]
    fn constant_target_selects_degree_zero() {
        let dist = InputDistribution::default();
        let x = lhs_sample(40, &dist, 3).unwrap().points;
        let y = vec![7.25; 40];
        let model = fit(&dist, &x, &y, DEFAULT_MAX_DEGREE).unwrap();
        assert_eq!(model.degree, 0);
        assert_relative_eq!(model.coefficients[0], 7.25, max_relative = 1e-14);
        assert!(model.loo_error < 1e-20);
        assert_relative_eq!(model.predict(&[6.0, 16.0, 34.0, 0.5]).unwrap(), 7.25, max_relative = 1e-13);
    }

    #[test]
    fn square_has_known_coefficients() {
        let dist = InputDistribution::from_bounds(vec![[-1.0, 1.0]]).unwrap();
        let x = lhs_sample(12, &dist, 8).unwrap().points;
        let y: Vec<f64> = x.iter().map(|p| p[0] * p[0]).collect();
        let model = fit(&dist, &x, &y, DEFAULT_MAX_DEGREE).unwrap();
        assert_eq!(model.degree, 2);
        assert!((model.coefficients[0] - 1.0 / 3.0).abs() < 1e-10);
        assert!(model.coefficients[1].abs() < 1e-10);
        assert!((model.coefficients[2] - (2.0 / 3.0) / 5f64.sqrt()).abs() < 1e-10);
    }

    #[test]
    fn degree_cap_follows_sample_size() {
        assert_eq!(max_admissible_degree(4, 2, 10), 0);
        assert_eq!(max_admissible_degree(4, 6, 10), 1);
        assert_eq!(max_admissible_degree(4, 35, 10), 2);
        assert_eq!(max_admissible_degree(4, 36, 10), 3);
        assert_eq!(max_admissible_degree(4, 300, 10), 6);
        assert_eq!(max_admissible_degree(1, 300, 10), 10);
    }

    #[test]
    fn out_of_support_prediction_rejected() {
        let dist = InputDistribution::default();
        let x = lhs_sample(10, &dist, 3).unwrap().points;
        let y: Vec<f64> = x.iter().map(|p| p[3]).collect();
        let model = fit(&dist, &x, &y, 3).unwrap();
        assert!(model.predict(&[16.0, 20.0, 30.0, 0.4]).is_err());
    }

    #[test]
    fn json_round_trip() {
        let dist = InputDistribution::unit(2);
        let x = lhs_sample(20, &dist, 1).unwrap().points;
        let y: Vec<f64> = x.iter().map(|p| p[0] * p[1] + p[1]).collect();
        let model = fit(&dist, &x, &y, 4).unwrap();
        let back: PceModel = serde_json::from_str(&serde_json::to_string(&model).unwrap()).unwrap();
        assert_eq!(back, model);
    }
}
