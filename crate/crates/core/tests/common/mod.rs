//! Independent reference computations shared by the integration tests and the
//! acceptance runner. Nothing here calls into the solvers under test.
#![allow(dead_code)]

/// Gaussian elimination with partial pivoting.
pub fn gauss_solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Vec<f64> {
    let n = b.len();
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs())).unwrap();
        a.swap(col, piv);
        b.swap(col, piv);
        for row in col + 1..n {
            let f = a[row][col] / a[col][col];
            for k in col..n {
                a[row][k] -= f * a[col][k];
            }
            b[row] -= f * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let s: f64 = (row + 1..n).map(|k| a[row][k] * x[k]).sum();
        x[row] = (b[row] - s) / a[row][row];
    }
    x
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Clapeyron's three-moment equation for equal spans and uniform load;
/// returns the interior support moments (hogging negative).
pub fn three_moment(spans: usize, l: f64, w: f64) -> Vec<f64> {
    let n = spans - 1;
    let mut a = vec![vec![0.0; n]; n];
    for i in 0..n {
        a[i][i] = 4.0 * l;
        if i > 0 {
            a[i][i - 1] = l;
        }
        if i + 1 < n {
            a[i][i + 1] = l;
        }
    }
    gauss_solve(a, vec![-w * l.powi(3) / 2.0; n])
}

/// Ordinary-Kriging BLUP and its variance from the textbook formulas on 1-D
/// inputs in `[lo, hi]`; `theta` acts on unit-scaled distance.
pub fn blup(x: &[f64], y: &[f64], theta: f64, lo: f64, hi: f64, probe: f64) -> (f64, f64) {
    let u = |v: f64| (v - lo) / (hi - lo);
    let k = |a: f64, b: f64| (-theta * (u(a) - u(b)).powi(2)).exp();
    let n = x.len();
    let r: Vec<Vec<f64>> = (0..n).map(|i| (0..n).map(|j| k(x[i], x[j])).collect()).collect();
    let ones = vec![1.0; n];
    let ri_one = gauss_solve(r.clone(), ones.clone());
    let ri_y = gauss_solve(r.clone(), y.to_vec());
    let ftrf = dot(&ones, &ri_one);
    let beta = dot(&ones, &ri_y) / ftrf;
    let resid: Vec<f64> = y.iter().map(|v| v - beta).collect();
    let ri_res = gauss_solve(r.clone(), resid.clone());
    let sigma2 = dot(&resid, &ri_res) / n as f64;
    let rv: Vec<f64> = x.iter().map(|xi| k(*xi, probe)).collect();
    let mean = beta + dot(&rv, &ri_res);
    let ri_r = gauss_solve(r, rv.clone());
    let uu = dot(&ones, &ri_r) - 1.0;
    let var = sigma2 * (1.0 - dot(&rv, &ri_r) + uu * uu / ftrf);
    (mean, var)
}

/// Plain Legendre polynomial by the three-term recurrence.
pub fn legendre(k: usize, x: f64) -> f64 {
    let (mut p0, mut p1) = (1.0, x);
    if k == 0 {
        return 1.0;
    }
    for j in 1..k {
        let jf = j as f64;
        let p2 = ((2.0 * jf + 1.0) * x * p1 - jf * p0) / (jf + 1.0);
        p0 = p1;
        p1 = p2;
    }
    p1
}

/// Gauss-Legendre nodes and weights on `[-1, 1]` by Newton iteration; the
/// weights are divided by two so they integrate the uniform density.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = Vec::with_capacity(n);
    let mut weights = Vec::with_capacity(n);
    for i in 0..n {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let p = legendre(n, x);
            dp = n as f64 * (x * p - legendre(n - 1, x)) / (x * x - 1.0);
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        nodes.push(x);
        weights.push(1.0 / ((1.0 - x * x) * dp * dp));
    }
    (nodes, weights)
}

/// Least squares by the normal equations.
pub fn normal_equations(rows: &[Vec<f64>], y: &[f64]) -> Vec<f64> {
    let m = rows[0].len();
    let mut a = vec![vec![0.0; m]; m];
    let mut b = vec![0.0; m];
    for (r, v) in rows.iter().zip(y) {
        for i in 0..m {
            b[i] += r[i] * v;
            for j in 0..m {
                a[i][j] += r[i] * r[j];
            }
        }
    }
    gauss_solve(a, b)
}

/// Dense epsilon-SVR dual solution on standardised outputs `z`.
pub struct QpSolution {
    /// `alpha - alpha*` per training point.
    pub beta: Vec<f64>,
    pub bias: f64,
    /// Dual objective at the solution (maximisation form).
    pub objective: f64,
}

fn project(v: &[f64], l: usize, c: f64) -> Vec<f64> {
    let sign = |i: usize| if i < l { 1.0 } else { -1.0 };
    let balance = |nu: f64| -> f64 { (0..2 * l).map(|i| sign(i) * (v[i] - nu * sign(i)).clamp(0.0, c)).sum() };
    let (mut lo, mut hi) = (-1e6, 1e6);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if balance(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let nu = 0.5 * (lo + hi);
    (0..2 * l).map(|i| (v[i] - nu * sign(i)).clamp(0.0, c)).collect()
}

/// Accelerated projected gradient on the `2l` box variables with the
/// equality constraint enforced by an exact projection.
pub fn svr_dual_qp(kernel: &[Vec<f64>], z: &[f64], c: f64, eps: f64, iterations: usize) -> QpSolution {
    let l = z.len();
    let beta_of = |x: &[f64]| -> Vec<f64> { (0..l).map(|i| x[i] - x[l + i]).collect() };
    let kb = |b: &[f64]| -> Vec<f64> { kernel.iter().map(|row| dot(row, b)).collect() };
    let objective = |x: &[f64]| -> f64 {
        let b = beta_of(x);
        -0.5 * dot(&b, &kb(&b)) - eps * x.iter().sum::<f64>() + dot(z, &b)
    };
    let step = 1.0 / (2.0 * l as f64);
    let mut x = vec![0.0; 2 * l];
    let mut yk = x.clone();
    let mut t: f64 = 1.0;
    let mut best = objective(&x);
    for _ in 0..iterations {
        let k = kb(&beta_of(&yk));
        let grad: Vec<f64> = (0..2 * l)
            .map(|i| if i < l { k[i] + eps - z[i] } else { -k[i - l] + eps + z[i - l] })
            .collect();
        let v: Vec<f64> = (0..2 * l).map(|i| yk[i] - step * grad[i]).collect();
        let next = project(&v, l, c);
        let value = objective(&next);
        let t_next = 0.5 * (1.0 + (1.0 + 4.0 * t * t).sqrt());
        if value < best {
            // restart momentum when the objective drops
            yk = x.clone();
            t = 1.0;
            continue;
        }
        yk = (0..2 * l).map(|i| next[i] + (t - 1.0) / t_next * (next[i] - x[i])).collect();
        x = next;
        t = t_next;
        best = value;
    }
    let beta = beta_of(&x);
    let k = kb(&beta);
    let tol = 1e-7 * c;
    let mut bias = Vec::new();
    for i in 0..l {
        if x[i] > tol && x[i] < c - tol {
            bias.push(z[i] - eps - k[i]);
        }
        if x[l + i] > tol && x[l + i] < c - tol {
            bias.push(z[i] + eps - k[i]);
        }
    }
    let bias = bias.iter().sum::<f64>() / bias.len().max(1) as f64;
    QpSolution { beta, bias, objective: objective(&x) }
}

pub fn population_mean_std(v: &[f64]) -> (f64, f64) {
    let n = v.len() as f64;
    let m = v.iter().sum::<f64>() / n;
    (m, (v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / n).sqrt())
}
