//! epsilon-insensitive support vector regression with an RBF kernel.
//!
//! The dual is solved in the stacked form used by LIBSVM: with
//! `beta = [alpha; alpha*]`, `s = [+1; -1]` and `Q_ts = s_t s_s K(x_t, x_s)`,
//!
//! ```text
//! min  1/2 beta' Q beta + p' beta,   p = [eps - y; eps + y]
//! s.t. s' beta = 0,  0 <= beta <= C
//! ```
//!
//! by sequential minimal optimisation on the maximal KKT-violating pair.

use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::doe::{seeded_rng, InputDistribution};
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SvrParams {
    /// Box constraint on the dual coefficients (standardised outputs).
    pub c: f64,
    /// Half-width of the insensitive tube (standardised outputs).
    pub epsilon: f64,
    /// RBF width on unit-scaled inputs: `K = exp(-gamma |x - x'|^2)`.
    pub gamma: f64,
}

impl SvrParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.c > 0.0 && self.c.is_finite()) {
            return Err(Error::validation("c", "must be finite and > 0"));
        }
        if !(self.epsilon >= 0.0 && self.epsilon.is_finite()) {
            return Err(Error::validation("epsilon", "must be finite and >= 0"));
        }
        if !(self.gamma > 0.0 && self.gamma.is_finite()) {
            return Err(Error::validation("gamma", "must be finite and > 0"));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WorkingSet {
    /// First-order rule: the pair with the largest KKT violation.
    #[default]
    MaximalViolatingPair,
    /// Second-order rule of Fan, Chen and Lin.
    SecondOrder,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SvrOptions {
    pub tol: f64,
    pub max_iter: usize,
    pub working_set: WorkingSet,
    /// Keep the dual objective after every pair update.
    pub trace: bool,
}

impl Default for SvrOptions {
    fn default() -> Self {
        Self {
            tol: 1e-3,
            max_iter: 100_000,
            working_set: WorkingSet::MaximalViolatingPair,
            trace: false,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SvrModel {
    pub params: SvrParams,
    pub distribution: InputDistribution,
    /// Unit-scaled support vectors.
    pub support_vectors: Vec<Vec<f64>>,
    /// `alpha_i - alpha_i*` per support vector.
    pub dual_coefficients: Vec<f64>,
    /// Bias on the standardised output scale.
    pub bias: f64,
    pub output_mean: f64,
    pub output_scale: f64,
    pub kkt_violation: f64,
    pub iterations: usize,
    /// Maximised dual objective on the standardised scale.
    pub dual_objective: f64,
    /// Index in the training set of each support vector.
    pub support_indices: Vec<usize>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub objective_trace: Vec<f64>,
}

fn rbf(a: &[f64], b: &[f64], gamma: f64) -> f64 {
    let d2: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum();
    (-gamma * d2).exp()
}

struct Smo<'a> {
    kernel: &'a [f64],
    l: usize,
    c: f64,
    beta: Vec<f64>,
    grad: Vec<f64>,
    p: Vec<f64>,
}

impl Smo<'_> {
    fn sign(&self, t: usize) -> f64 {
        if t < self.l {
            1.0
        } else {
            -1.0
        }
    }

    fn q(&self, t: usize, s: usize) -> f64 {
        self.sign(t) * self.sign(s) * self.kernel[(t % self.l) * self.l + s % self.l]
    }

    fn in_up(&self, t: usize) -> bool {
        if t < self.l {
            self.beta[t] < self.c
        } else {
            self.beta[t] > 0.0
        }
    }

    fn in_low(&self, t: usize) -> bool {
        if t < self.l {
            self.beta[t] > 0.0
        } else {
            self.beta[t] < self.c
        }
    }

    /// Selected pair and the violation `m - M`.
    fn select(&self, rule: WorkingSet) -> (Option<(usize, usize)>, f64) {
        let n = 2 * self.l;
        let mut i = None;
        let mut gmax = f64::NEG_INFINITY;
        for t in 0..n {
            if self.in_up(t) {
                let v = -self.sign(t) * self.grad[t];
                if v > gmax {
                    gmax = v;
                    i = Some(t);
                }
            }
        }
        let mut j = None;
        let mut gmin = f64::INFINITY;
        for t in 0..n {
            if self.in_low(t) {
                let v = -self.sign(t) * self.grad[t];
                if v < gmin {
                    gmin = v;
                    j = Some(t);
                }
            }
        }
        let violation = gmax - gmin;
        let (Some(i), Some(j_first)) = (i, j) else {
            return (None, 0.0);
        };
        let j = match rule {
            WorkingSet::MaximalViolatingPair => j_first,
            WorkingSet::SecondOrder => {
                let mut best = j_first;
                let mut best_gain = f64::INFINITY;
                let qii = self.q(i, i);
                for t in 0..n {
                    if !self.in_low(t) {
                        continue;
                    }
                    let b = gmax + self.sign(t) * self.grad[t];
                    if b > 0.0 {
                        let mut a = qii + self.q(t, t) - 2.0 * self.sign(i) * self.sign(t) * self.q(i, t);
                        if a <= 0.0 {
                            a = 1e-12;
                        }
                        let gain = -(b * b) / a;
                        if gain < best_gain {
                            best_gain = gain;
                            best = t;
                        }
                    }
                }
                best
            }
        };
        (Some((i, j)), violation)
    }

    fn update(&mut self, i: usize, j: usize) {
        let c = self.c;
        let (old_i, old_j) = (self.beta[i], self.beta[j]);
        let (qii, qjj, qij) = (self.q(i, i), self.q(j, j), self.q(i, j));
        let (gi, gj) = (self.grad[i], self.grad[j]);
        let (mut ai, mut aj) = (old_i, old_j);
        if self.sign(i) != self.sign(j) {
            let quad = (qii + qjj + 2.0 * qij).max(1e-12);
            let delta = (-gi - gj) / quad;
            let diff = ai - aj;
            ai += delta;
            aj += delta;
            if diff > 0.0 {
                if aj < 0.0 {
                    aj = 0.0;
                    ai = diff;
                }
            } else if ai < 0.0 {
                ai = 0.0;
                aj = -diff;
            }
            if diff > 0.0 {
                if ai > c {
                    ai = c;
                    aj = c - diff;
                }
            } else if aj > c {
                aj = c;
                ai = c + diff;
            }
        } else {
            let quad = (qii + qjj - 2.0 * qij).max(1e-12);
            let delta = (gi - gj) / quad;
            let sum = ai + aj;
            ai -= delta;
            aj += delta;
            if sum > c {
                if ai > c {
                    ai = c;
                    aj = sum - c;
                }
            } else if aj < 0.0 {
                aj = 0.0;
                ai = sum;
            }
            if sum > c {
                if aj > c {
                    aj = c;
                    ai = sum - c;
                }
            } else if ai < 0.0 {
                ai = 0.0;
                aj = sum;
            }
        }
        self.beta[i] = ai;
        self.beta[j] = aj;
        let (di, dj) = (ai - old_i, aj - old_j);
        for t in 0..2 * self.l {
            self.grad[t] += self.q(t, i) * di + self.q(t, j) * dj;
        }
        debug_assert!(self.beta.iter().all(|&b| (0.0..=c).contains(&b)));
        debug_assert!({
            let s: f64 = (0..2 * self.l).map(|t| self.sign(t) * self.beta[t]).sum();
            s.abs() <= 1e-9 * c.max(1.0) * self.l as f64
        });
    }

    /// Minimisation objective `1/2 beta' Q beta + p' beta`.
    fn objective(&self) -> f64 {
        0.5 * self
            .beta
            .iter()
            .zip(&self.grad)
            .zip(&self.p)
            .map(|((b, g), p)| b * (g + p))
            .sum::<f64>()
    }

    fn rho(&self) -> f64 {
        let (mut ub, mut lb) = (f64::INFINITY, f64::NEG_INFINITY);
        let (mut free, mut sum) = (0usize, 0.0);
        for t in 0..2 * self.l {
            let yg = self.sign(t) * self.grad[t];
            let positive = t < self.l;
            if self.beta[t] >= self.c {
                if positive {
                    lb = lb.max(yg);
                } else {
                    ub = ub.min(yg);
                }
            } else if self.beta[t] <= 0.0 {
                if positive {
                    ub = ub.min(yg);
                } else {
                    lb = lb.max(yg);
                }
            } else {
                free += 1;
                sum += yg;
            }
        }
        if free > 0 {
            sum / free as f64
        } else {
            0.5 * (ub + lb)
        }
    }
}

fn standardize(outputs: &[f64]) -> (f64, f64) {
    let n = outputs.len() as f64;
    let mean = outputs.iter().sum::<f64>() / n;
    let var = outputs.iter().map(|y| (y - mean).powi(2)).sum::<f64>() / n;
    let scale = var.sqrt();
    (mean, if scale > 0.0 { scale } else { 1.0 })
}

/// Trains an epsilon-SVR on `(inputs, outputs)` in the physical units of `dist`.
pub fn fit(
    dist: &InputDistribution,
    inputs: &[Vec<f64>],
    outputs: &[f64],
    params: SvrParams,
    options: &SvrOptions,
) -> Result<SvrModel> {
    params.validate()?;
    dist.validate()?;
    if inputs.is_empty() || inputs.len() != outputs.len() {
        return Err(Error::validation(
            "dataset",
            format!("{} inputs vs {} outputs", inputs.len(), outputs.len()),
        ));
    }
    if inputs.iter().any(|x| x.len() != dist.dim()) {
        return Err(Error::validation("dataset", "input dimension mismatch"));
    }
    let l = inputs.len();
    let (mean, scale) = standardize(outputs);
    let unit: Vec<Vec<f64>> = inputs.iter().map(|x| dist.to_unit_unchecked(x)).collect();
    let z: Vec<f64> = outputs.iter().map(|y| (y - mean) / scale).collect();

    let mut kernel = vec![0.0; l * l];
    for i in 0..l {
        for j in 0..=i {
            let v = rbf(&unit[i], &unit[j], params.gamma);
            kernel[i * l + j] = v;
            kernel[j * l + i] = v;
        }
    }
    let p: Vec<f64> = z
        .iter()
        .map(|y| params.epsilon - y)
        .chain(z.iter().map(|y| params.epsilon + y))
        .collect();
    let mut smo = Smo {
        kernel: &kernel,
        l,
        c: params.c,
        beta: vec![0.0; 2 * l],
        grad: p.clone(),
        p,
    };

    let mut trace = Vec::new();
    let mut iterations = 0;
    let violation = loop {
        let (pair, violation) = smo.select(options.working_set);
        let Some((i, j)) = pair else { break 0.0 };
        if violation <= options.tol {
            break violation;
        }
        if iterations >= options.max_iter {
            return Err(Error::numerical(format!(
                "SMO did not converge in {} pair updates (KKT violation {violation:e} > {:e})",
                options.max_iter, options.tol
            )));
        }
        smo.update(i, j);
        iterations += 1;
        if options.trace {
            trace.push(-smo.objective());
        }
    };

    let bias = -smo.rho();
    let mut support_vectors = Vec::new();
    let mut dual_coefficients = Vec::new();
    let mut support_indices = Vec::new();
    for i in 0..l {
        let coef = smo.beta[i] - smo.beta[i + l];
        if coef != 0.0 {
            support_vectors.push(unit[i].clone());
            dual_coefficients.push(coef);
            support_indices.push(i);
        }
    }
    Ok(SvrModel {
        params,
        distribution: dist.clone(),
        support_vectors,
        dual_coefficients,
        bias,
        output_mean: mean,
        output_scale: scale,
        kkt_violation: violation,
        iterations,
        dual_objective: -smo.objective(),
        support_indices,
        objective_trace: trace,
    })
}

impl SvrModel {
    /// Prediction on the standardised scale at a unit-scaled point.
    fn decision(&self, unit: &[f64]) -> f64 {
        self.support_vectors
            .iter()
            .zip(&self.dual_coefficients)
            .map(|(sv, c)| c * rbf(sv, unit, self.params.gamma))
            .sum::<f64>()
            + self.bias
    }

    pub fn predict(&self, point: &[f64]) -> Result<f64> {
        if point.len() != self.distribution.dim() {
            return Err(Error::validation(
                "point",
                format!("expected {} coordinates, got {}", self.distribution.dim(), point.len()),
            ));
        }
        let unit = self.distribution.to_unit_unchecked(point);
        Ok(self.output_mean + self.output_scale * self.decision(&unit))
    }
}

/// Hyperparameter grid `C x epsilon x gamma`.
pub fn grid(cs: &[f64], epsilons: &[f64], gammas: &[f64]) -> Vec<SvrParams> {
    let mut out = Vec::with_capacity(cs.len() * epsilons.len() * gammas.len());
    for &c in cs {
        for &epsilon in epsilons {
            for &gamma in gammas {
                out.push(SvrParams { c, epsilon, gamma });
            }
        }
    }
    out
}

/// `C in {1, 10, 100, 1000}`, `epsilon in {0.01, 0.05, 0.1}`, `gamma in {0.5, 1, 2, 4} / d`.
pub fn default_grid(d: usize) -> Vec<SvrParams> {
    let gammas: Vec<f64> = [0.5, 1.0, 2.0, 4.0].iter().map(|g| g / d as f64).collect();
    grid(&[1.0, 10.0, 100.0, 1000.0], &[0.01, 0.05, 0.1], &gammas)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CrossValidation {
    pub best: SvrParams,
    /// Mean validation RMSE per grid point, in grid order (`inf` if a fold failed).
    pub scores: Vec<f64>,
}

/// Fold label of every point for a seeded shuffled `k`-fold split.
pub fn fold_assignment(n: usize, k: usize, seed: u64) -> Vec<usize> {
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut seeded_rng(seed));
    let mut fold = vec![0; n];
    for (rank, &i) in order.iter().enumerate() {
        fold[i] = rank % k;
    }
    fold
}

/// Mean held-out RMSE of `params` over the folds.
pub fn cv_score(
    dist: &InputDistribution,
    inputs: &[Vec<f64>],
    outputs: &[f64],
    folds: &[usize],
    k: usize,
    params: SvrParams,
    options: &SvrOptions,
) -> f64 {
    let mut total = 0.0;
    for f in 0..k {
        let (mut xt, mut yt, mut xv, mut yv) = (vec![], vec![], vec![], vec![]);
        for i in 0..inputs.len() {
            if folds[i] == f {
                xv.push(inputs[i].clone());
                yv.push(outputs[i]);
            } else {
                xt.push(inputs[i].clone());
                yt.push(outputs[i]);
            }
        }
        let Ok(model) = fit(dist, &xt, &yt, params, options) else {
            return f64::INFINITY;
        };
        let mut sse = 0.0;
        for (x, y) in xv.iter().zip(&yv) {
            match model.predict(x) {
                Ok(v) => sse += (v - y).powi(2),
                Err(_) => return f64::INFINITY,
            }
        }
        total += (sse / yv.len() as f64).sqrt();
    }
    total / k as f64
}

/// `true` if `a` should be preferred over `b` at equal score.
fn tie_preferred(a: &SvrParams, b: &SvrParams) -> bool {
    if a.c != b.c {
        return a.c < b.c;
    }
    if a.epsilon != b.epsilon {
        return a.epsilon > b.epsilon;
    }
    a.gamma < b.gamma
}

/// Seeded `k`-fold grid search minimising mean validation RMSE. Ties go to
/// the smaller `C`, then the larger `epsilon`.
pub fn cross_validate(
    dist: &InputDistribution,
    inputs: &[Vec<f64>],
    outputs: &[f64],
    grid: &[SvrParams],
    k: usize,
    seed: u64,
    options: &SvrOptions,
) -> Result<CrossValidation> {
    if grid.is_empty() {
        return Err(Error::validation("grid", "hyperparameter grid is empty"));
    }
    if k < 2 || inputs.len() < k {
        return Err(Error::validation(
            "folds",
            format!("need 2 <= k <= n, got k={k}, n={}", inputs.len()),
        ));
    }
    if inputs.len() != outputs.len() {
        return Err(Error::validation("dataset", "inputs and outputs differ in length"));
    }
    for params in grid {
        params.validate()?;
    }
    let folds = fold_assignment(inputs.len(), k, seed);
    let scores: Vec<f64> = grid
        .par_iter()
        .map(|params| cv_score(dist, inputs, outputs, &folds, k, *params, options))
        .collect();

    let mut best = 0;
    for i in 1..grid.len() {
        let (a, b) = (scores[i], scores[best]);
        let tied = a == b || (a - b).abs() <= 1e-12 * a.abs().max(b.abs());
        if (!tied && a < b) || (tied && tie_preferred(&grid[i], &grid[best])) {
            best = i;
        }
    }
    if !scores[best].is_finite() {
        return Err(Error::numerical("every grid point failed in cross-validation"));
    }
    Ok(CrossValidation { best: grid[best], scores })
}
