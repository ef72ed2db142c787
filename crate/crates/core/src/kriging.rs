//! Universal Kriging: Gaussian-process regression with a polynomial trend of
//! total degree 0 to 4, hyperparameters fitted by maximum likelihood.
//!
//! Inputs are scaled to the unit hypercube of the training distribution and
//! outputs are standardised before fitting; predictions are returned in the
//! original output units. For lengthscale parameters `theta` the process
//! variance and trend coefficients are profiled out, leaving the concentrated
//! negative log-likelihood
//!
//! ```text
//! nll(theta) = n ln sigma2(theta) + ln det R(theta)
//! beta(theta)   = (F' R^-1 F)^-1 F' R^-1 y
//! sigma2(theta) = (y - F beta)' R^-1 (y - F beta) / n
//! ```
//!
//! which is minimised by multi-start Nelder-Mead over `ln theta`.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::doe::{lhs_sample, InputDistribution};
use crate::linalg::{binomial, graded_multi_indices, lower_solve, lower_solve_vec};
use crate::optim::NelderMead;
use crate::{Error, Result};

pub const MAX_TREND_DEGREE: usize = 4;

/// Correlation family. Both are anisotropic with one `theta` per input.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Kernel {
    #[default]
    SquaredExponential,
    Matern52,
}

impl Kernel {
    /// Correlation between two unit-scaled points.
    pub fn correlation(self, xa: &[f64], xb: &[f64], theta: &[f64]) -> f64 {
        let weighted: f64 = xa
            .iter()
            .zip(xb)
            .zip(theta)
            .map(|((a, b), t)| t * (a - b) * (a - b))
            .sum();
        match self {
            Kernel::SquaredExponential => (-weighted).exp(),
            Kernel::Matern52 => {
                let r = (5.0 * weighted).sqrt();
                (1.0 + r + r * r / 3.0) * (-r).exp()
            }
        }
    }
}

/// `R(xa, xb) = prod_k exp(-theta_k (xa_k - xb_k)^2)`.
pub fn correlation(xa: &[f64], xb: &[f64], theta: &[f64]) -> f64 {
    Kernel::SquaredExponential.correlation(xa, xb, theta)
}

/// Monomials of total degree `<= degree` in graded lexicographic order.
pub fn trend_basis(point: &[f64], degree: usize) -> Vec<f64> {
    graded_multi_indices(point.len(), degree)
        .iter()
        .map(|alpha| {
            alpha
                .iter()
                .zip(point)
                .map(|(&k, &x)| x.powi(k as i32))
                .product()
        })
        .collect()
}

/// Number of trend terms, `C(p + d, d)`.
pub fn trend_size(d: usize, degree: usize) -> usize {
    binomial(degree + d, d)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KrigingOptions {
    pub trend_degree: usize,
    pub kernel: Kernel,
    /// Diagonal jitter added to the correlation matrix.
    pub nugget: f64,
    /// Largest nugget tried when the Cholesky factorisation fails.
    pub max_nugget: f64,
    /// Ridge penalty on the trend coefficients; required when the trend has
    /// at least as many terms as there are training points.
    pub ridge: Option<f64>,
    /// Skip the likelihood search and use these lengthscales.
    pub fixed_theta: Option<Vec<f64>>,
    pub starts: usize,
    pub seed: u64,
    pub theta_bounds: [f64; 2],
    pub max_evals_per_start: usize,
}

impl Default for KrigingOptions {
    fn default() -> Self {
        Self {
            trend_degree: 0,
            kernel: Kernel::SquaredExponential,
            nugget: 1e-10,
            max_nugget: 1e-6,
            ridge: None,
            fixed_theta: None,
            starts: 8,
            seed: 0x6b72_6967,
            theta_bounds: [1e-2, 1e3],
            max_evals_per_start: 300,
        }
    }
}

impl KrigingOptions {
    pub fn with_degree(trend_degree: usize) -> Self {
        Self { trend_degree, ..Self::default() }
    }
}

/// Record of the likelihood search.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SearchRecord {
    pub seed: u64,
    /// `ln theta` at every start, and the objective there.
    pub starts: Vec<Vec<f64>>,
    pub start_nll: Vec<f64>,
    pub nll: f64,
    pub evaluations: usize,
}

/// Stored state of a fitted model; everything else is recomputed from it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KrigingParams {
    pub trend_degree: usize,
    pub kernel: Kernel,
    pub theta: Vec<f64>,
    /// Trend coefficients on the standardised output scale.
    pub beta: Vec<f64>,
    /// Process variance on the standardised output scale.
    pub sigma2: f64,
    pub nugget: f64,
    pub ridge: Option<f64>,
    pub distribution: InputDistribution,
    pub output_mean: f64,
    pub output_scale: f64,
    pub inputs: Vec<Vec<f64>>,
    pub outputs: Vec<f64>,
    pub search: Option<SearchRecord>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Prediction {
    pub mean: f64,
    pub variance: f64,
    /// Set when the point lies outside the training bounds.
    pub extrapolated: bool,
}

#[derive(Clone, Debug)]
struct Cache {
    unit_inputs: Vec<Vec<f64>>,
    chol: DMatrix<f64>,
    // L^-1 F
    whitened_trend: DMatrix<f64>,
    // upper triangular factor with R'R = F'R^-1 F (+ ridge)
    trend_factor: DMatrix<f64>,
    // R^-1 (y - F beta)
    weights: DVector<f64>,
}

/// Fitted Kriging predictor. Immutable; safe to share across threads.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(try_from = "KrigingParams", into = "KrigingParams")]
pub struct KrigingModel {
    params: KrigingParams,
    cache: Cache,
}

impl PartialEq for KrigingModel {
    fn eq(&self, other: &Self) -> bool {
        self.params == other.params
    }
}

impl From<KrigingModel> for KrigingParams {
    fn from(model: KrigingModel) -> Self {
        model.params
    }
}

impl TryFrom<KrigingParams> for KrigingModel {
    type Error = Error;

    fn try_from(params: KrigingParams) -> Result<Self> {
        KrigingModel::assemble(params)
    }
}

struct Problem {
    unit_inputs: Vec<Vec<f64>>,
    y: DVector<f64>,
    trend: DMatrix<f64>,
}

struct Profile {
    nll: f64,
    beta: DVector<f64>,
    sigma2: f64,
    nugget: f64,
}

fn correlation_matrix(kernel: Kernel, unit: &[Vec<f64>], theta: &[f64], nugget: f64) -> DMatrix<f64> {
    let n = unit.len();
    let mut r = DMatrix::<f64>::identity(n, n) * (1.0 + nugget);
    for i in 0..n {
        for j in 0..i {
            let v = kernel.correlation(&unit[i], &unit[j], theta);
            r[(i, j)] = v;
            r[(j, i)] = v;
        }
    }
    r
}

fn trend_matrix(unit: &[Vec<f64>], degree: usize) -> DMatrix<f64> {
    let d = unit.first().map_or(0, Vec::len);
    let m = trend_size(d, degree);
    let mut f = DMatrix::<f64>::zeros(unit.len(), m);
    for (i, u) in unit.iter().enumerate() {
        for (j, v) in trend_basis(u, degree).into_iter().enumerate() {
            f[(i, j)] = v;
        }
    }
    f
}

/// Cholesky factor of `R + tau I`, escalating `tau` tenfold until `max_nugget`.
fn factor_with_escalation(
    kernel: Kernel,
    unit: &[Vec<f64>],
    theta: &[f64],
    nugget: f64,
    max_nugget: f64,
) -> Result<(DMatrix<f64>, f64)> {
    let mut tau = nugget;
    loop {
        let r = correlation_matrix(kernel, unit, theta, tau);
        if let Some(chol) = r.cholesky() {
            return Ok((chol.unpack(), tau));
        }
        if tau >= max_nugget {
            return Err(Error::numerical(format!(
                "correlation matrix not positive definite with nugget {tau:e} (theta = {theta:?})"
            )));
        }
        tau = (tau * 10.0).max(1e-12).min(max_nugget);
    }
}

/// Least squares `min |A b - y|^2 + ridge |b|^2` via QR; also returns the
/// triangular factor of the normal matrix.
fn trend_least_squares(
    a: &DMatrix<f64>,
    y: &DVector<f64>,
    ridge: Option<f64>,
) -> Result<(DVector<f64>, DMatrix<f64>)> {
    let (n, m) = a.shape();
    let (a, y) = match ridge {
        Some(lambda) => {
            let mut aa = DMatrix::<f64>::zeros(n + m, m);
            aa.rows_mut(0, n).copy_from(a);
            aa.rows_mut(n, m).fill_diagonal(lambda.sqrt());
            let mut yy = DVector::<f64>::zeros(n + m);
            yy.rows_mut(0, n).copy_from(y);
            (aa, yy)
        }
        None => (a.clone(), y.clone()),
    };
    let qr = a.qr();
    let r = qr.r();
    let scale = r.diagonal().iter().fold(0.0_f64, |s, v| s.max(v.abs()));
    if r.diagonal().iter().any(|v| !(v.abs() > 1e-13 * scale)) {
        return Err(Error::numerical("trend basis is rank deficient on this design"));
    }
    let qty = qr.q().transpose() * y;
    let beta = r
        .solve_upper_triangular(&qty)
        .ok_or_else(|| Error::numerical("singular trend factor"))?;
    Ok((beta, r))
}

impl Problem {
    fn profile(&self, options: &KrigingOptions, theta: &[f64]) -> Result<Profile> {
        let n = self.y.len() as f64;
        let (chol, nugget) = factor_with_escalation(
            options.kernel,
            &self.unit_inputs,
            theta,
            options.nugget,
            options.max_nugget,
        )?;
        let ft = lower_solve(&chol, &self.trend);
        let yt = lower_solve_vec(&chol, &self.y);
        let (beta, _) = trend_least_squares(&ft, &yt, options.ridge)?;
        let resid = &yt - &ft * &beta;
        // exact fits (e.g. constant outputs) leave no residual
        let sigma2 = (resid.norm_squared() / n).max(f64::MIN_POSITIVE);
        let log_det: f64 = 2.0 * chol.diagonal().iter().map(|v| v.ln()).sum::<f64>();
        let nll = n * sigma2.ln() + log_det;
        Ok(Profile { nll, beta, sigma2, nugget })
    }
}

fn check_training(dist: &InputDistribution, inputs: &[Vec<f64>], outputs: &[f64]) -> Result<()> {
    dist.validate()?;
    if inputs.is_empty() || inputs.len() != outputs.len() {
        return Err(Error::validation(
            "dataset",
            format!("{} inputs vs {} outputs", inputs.len(), outputs.len()),
        ));
    }
    if let Some(bad) = inputs.iter().find(|x| x.len() != dist.dim()) {
        return Err(Error::validation(
            "dataset",
            format!("input of dimension {} for a {}-d distribution", bad.len(), dist.dim()),
        ));
    }
    if outputs.iter().chain(inputs.iter().flatten()).any(|v| !v.is_finite()) {
        return Err(Error::validation("dataset", "non-finite value"));
    }
    Ok(())
}

fn standardize(outputs: &[f64]) -> (f64, f64) {
    let n = outputs.len() as f64;
    let mean = outputs.iter().sum::<f64>() / n;
    let var = outputs.iter().map(|y| (y - mean).powi(2)).sum::<f64>() / n;
    let scale = var.sqrt();
    (mean, if scale > 0.0 { scale } else { 1.0 })
}

fn build_problem(
    dist: &InputDistribution,
    inputs: &[Vec<f64>],
    outputs: &[f64],
    degree: usize,
    mean: f64,
    scale: f64,
) -> Problem {
    let unit_inputs: Vec<Vec<f64>> = inputs.iter().map(|x| dist.to_unit_unchecked(x)).collect();
    let y = DVector::from_iterator(outputs.len(), outputs.iter().map(|v| (v - mean) / scale));
    let trend = trend_matrix(&unit_inputs, degree);
    Problem { unit_inputs, y, trend }
}

fn validate_options(options: &KrigingOptions, d: usize, n: usize) -> Result<()> {
    if options.trend_degree > MAX_TREND_DEGREE {
        return Err(Error::validation(
            "trend_degree",
            format!("must be in 0..={MAX_TREND_DEGREE}, got {}", options.trend_degree),
        ));
    }
    if !(options.nugget >= 0.0 && options.nugget <= options.max_nugget) {
        return Err(Error::validation("nugget", "need 0 <= nugget <= max_nugget"));
    }
    if let Some(lambda) = options.ridge {
        if !(lambda > 0.0 && lambda.is_finite()) {
            return Err(Error::validation("ridge", "must be finite and > 0"));
        }
    }
    let m = trend_size(d, options.trend_degree);
    if options.ridge.is_none() && m >= n {
        return Err(Error::validation(
            "trend_degree",
            format!(
                "degree {} needs {m} trend terms but only {n} training points; \
                 more points or ridge regularisation are required",
                options.trend_degree
            ),
        ));
    }
    let [lo, hi] = options.theta_bounds;
    if !(lo > 0.0 && lo < hi && hi.is_finite()) {
        return Err(Error::validation("theta_bounds", "need 0 < lower < upper"));
    }
    if let Some(theta) = &options.fixed_theta {
        if theta.len() != d || theta.iter().any(|t| !(*t > 0.0 && t.is_finite())) {
            return Err(Error::validation(
                "fixed_theta",
                format!("need {d} positive finite lengthscale parameters"),
            ));
        }
    } else if options.starts == 0 {
        return Err(Error::validation("starts", "need at least one start"));
    }
    Ok(())
}

/// Concentrated negative log-likelihood at `theta` (standardised outputs).
pub fn concentrated_nll(
    dist: &InputDistribution,
    inputs: &[Vec<f64>],
    outputs: &[f64],
    options: &KrigingOptions,
    theta: &[f64],
) -> Result<f64> {
    check_training(dist, inputs, outputs)?;
    let (mean, scale) = standardize(outputs);
    let problem = build_problem(dist, inputs, outputs, options.trend_degree, mean, scale);
    Ok(problem.profile(options, theta)?.nll)
}

/// Fits a Kriging model to `(inputs, outputs)`; inputs are in the physical
/// units of `dist`.
pub fn fit(
    dist: &InputDistribution,
    inputs: &[Vec<f64>],
    outputs: &[f64],
    options: &KrigingOptions,
) -> Result<KrigingModel> {
    check_training(dist, inputs, outputs)?;
    let d = dist.dim();
    validate_options(options, d, inputs.len())?;
    let (mean, scale) = standardize(outputs);
    let problem = build_problem(dist, inputs, outputs, options.trend_degree, mean, scale);

    let (theta, search) = match &options.fixed_theta {
        Some(theta) => (theta.clone(), None),
        None => {
            let (theta, record) = search_theta(&problem, options, d)?;
            (theta, Some(record))
        }
    };
    let profile = problem.profile(options, &theta)?;

    KrigingModel::assemble(KrigingParams {
        trend_degree: options.trend_degree,
        kernel: options.kernel,
        theta,
        beta: profile.beta.iter().copied().collect(),
        sigma2: profile.sigma2,
        nugget: profile.nugget,
        ridge: options.ridge,
        distribution: dist.clone(),
        output_mean: mean,
        output_scale: scale,
        inputs: inputs.to_vec(),
        outputs: outputs.to_vec(),
        search,
    })
}

fn search_theta(
    problem: &Problem,
    options: &KrigingOptions,
    d: usize,
) -> Result<(Vec<f64>, SearchRecord)> {
    let [lo, hi] = options.theta_bounds;
    let lower = vec![lo.ln(); d];
    let upper = vec![hi.ln(); d];
    let start_dist = InputDistribution::from_bounds(vec![[lo.ln(), hi.ln()]; d])?;
    let starts = lhs_sample(options.starts, &start_dist, options.seed)?.points;

    let objective = |log_theta: &[f64]| -> f64 {
        let theta: Vec<f64> = log_theta.iter().map(|v| v.exp()).collect();
        match problem.profile(options, &theta) {
            Ok(p) => p.nll,
            Err(_) => f64::INFINITY,
        }
    };
    let nm = NelderMead {
        max_evals: options.max_evals_per_start,
        f_tol: 1e-7,
        x_tol: 1e-3,
        initial_step: 1.0,
    };

    let mut start_nll = Vec::with_capacity(starts.len());
    let mut best: Option<(Vec<f64>, f64)> = None;
    let mut evaluations = 0;
    for x0 in &starts {
        start_nll.push(objective(x0));
        let m = nm.minimize(objective, x0, &lower, &upper);
        evaluations += m.evals;
        if best.as_ref().is_none_or(|(_, v)| m.value < *v) {
            best = Some((m.x, m.value));
        }
    }
    let (log_theta, nll) = best.expect("at least one start");
    if !nll.is_finite() {
        return Err(Error::numerical(
            "likelihood could not be evaluated at any lengthscale tried",
        ));
    }
    let theta = log_theta.iter().map(|v| v.exp()).collect();
    Ok((
        theta,
        SearchRecord {
            seed: options.seed,
            starts,
            start_nll,
            nll,
            evaluations,
        },
    ))
}

impl KrigingModel {
    fn assemble(params: KrigingParams) -> Result<Self> {
        check_training(&params.distribution, &params.inputs, &params.outputs)?;
        let d = params.distribution.dim();
        if params.theta.len() != d || params.theta.iter().any(|t| !(*t > 0.0)) {
            return Err(Error::validation("theta", "need one positive value per input"));
        }
        if params.trend_degree > MAX_TREND_DEGREE
            || params.beta.len() != trend_size(d, params.trend_degree)
        {
            return Err(Error::validation("beta", "length does not match the trend degree"));
        }
        if !(params.sigma2 > 0.0) || !(params.output_scale > 0.0) {
            return Err(Error::validation("sigma2", "process variance and scale must be > 0"));
        }
        let problem = build_problem(
            &params.distribution,
            &params.inputs,
            &params.outputs,
            params.trend_degree,
            params.output_mean,
            params.output_scale,
        );
        let r = correlation_matrix(params.kernel, &problem.unit_inputs, &params.theta, params.nugget);
        let chol = r
            .cholesky()
            .ok_or_else(|| Error::numerical("stored correlation matrix is not positive definite"))?
            .unpack();
        let whitened_trend = lower_solve(&chol, &problem.trend);
        let (_, trend_factor) = trend_least_squares(
            &whitened_trend,
            &lower_solve_vec(&chol, &problem.y),
            params.ridge,
        )?;
        let beta = DVector::from_column_slice(&params.beta);
        let resid = &problem.y - &problem.trend * &beta;
        let weights = chol
            .transpose()
            .solve_upper_triangular(&lower_solve_vec(&chol, &resid))
            .expect("non-singular factor");
        Ok(Self {
            cache: Cache {
                unit_inputs: problem.unit_inputs,
                chol,
                whitened_trend,
                trend_factor,
                weights,
            },
            params,
        })
    }

    pub fn params(&self) -> &KrigingParams {
        &self.params
    }

    pub fn trend_degree(&self) -> usize {
        self.params.trend_degree
    }

    pub fn theta(&self) -> &[f64] {
        &self.params.theta
    }

    pub fn nugget(&self) -> f64 {
        self.params.nugget
    }

    pub fn ridge(&self) -> Option<f64> {
        self.params.ridge
    }

    /// Mean only; skips the variance computation.
    pub fn predict_mean(&self, point: &[f64]) -> Result<f64> {
        let dist = &self.params.distribution;
        if point.len() != dist.dim() {
            return Err(Error::validation(
                "point",
                format!("expected {} coordinates, got {}", dist.dim(), point.len()),
            ));
        }
        let u = dist.to_unit_unchecked(point);
        let trend: f64 = trend_basis(&u, self.params.trend_degree)
            .iter()
            .zip(&self.params.beta)
            .map(|(f, b)| f * b)
            .sum();
        let correction: f64 = self
            .cache
            .unit_inputs
            .iter()
            .zip(self.cache.weights.iter())
            .map(|(xi, w)| w * self.params.kernel.correlation(xi, &u, &self.params.theta))
            .sum();
        Ok(self.params.output_mean + self.params.output_scale * (trend + correction))
    }

    /// Mean and variance at a physical-space point.
    pub fn predict(&self, point: &[f64]) -> Result<Prediction> {
        let dist = &self.params.distribution;
        if point.len() != dist.dim() {
            return Err(Error::validation(
                "point",
                format!("expected {} coordinates, got {}", dist.dim(), point.len()),
            ));
        }
        let extrapolated = !dist.contains(point);
        let u = dist.to_unit_unchecked(point);
        let n = self.cache.unit_inputs.len();
        let r = DVector::from_iterator(
            n,
            self.cache
                .unit_inputs
                .iter()
                .map(|xi| self.params.kernel.correlation(xi, &u, &self.params.theta)),
        );
        let f = DVector::from_vec(trend_basis(&u, self.params.trend_degree));
        let beta = DVector::from_column_slice(&self.params.beta);
        let mean_std = f.dot(&beta) + r.dot(&self.cache.weights);

        let rt = lower_solve_vec(&self.cache.chol, &r);
        let u_vec = self.cache.whitened_trend.transpose() * &rt - &f;
        let z = self
            .cache
            .trend_factor
            .transpose()
            .solve_lower_triangular(&u_vec)
            .expect("non-singular trend factor");
        let sigma2 = self.params.sigma2;
        let mut var_std = sigma2 * (1.0 - rt.norm_squared() + z.norm_squared());
        if var_std < 0.0 {
            if var_std < -1e-9 * sigma2 {
                return Err(Error::numerical(format!(
                    "negative prediction variance {var_std:e} (sigma2 = {sigma2:e})"
                )));
            }
            var_std = 0.0;
        }
        let scale = self.params.output_scale;
        Ok(Prediction {
            mean: self.params.output_mean + scale * mean_std,
            variance: scale * scale * var_std,
            extrapolated,
        })
    }

    /// Concentrated negative log-likelihood at the fitted parameters.
    pub fn nll(&self) -> f64 {
        let n = self.params.outputs.len() as f64;
        let log_det: f64 = 2.0 * self.cache.chol.diagonal().iter().map(|v| v.ln()).sum::<f64>();
        n * self.params.sigma2.ln() + log_det
    }
}
