//! Derivative-free minimisation on a box (Nelder-Mead with projection).

#[derive(Clone, Debug)]
pub struct NelderMead {
    pub max_evals: usize,
    /// Stop when the spread of simplex values falls below this.
    pub f_tol: f64,
    /// Stop when the simplex diameter falls below this.
    pub x_tol: f64,
    pub initial_step: f64,
}

impl Default for NelderMead {
    fn default() -> Self {
        Self {
            max_evals: 400,
            f_tol: 1e-8,
            x_tol: 1e-5,
            initial_step: 0.5,
        }
    }
}

#[derive(Clone, Debug)]
pub struct Minimum {
    pub x: Vec<f64>,
    pub value: f64,
    pub evals: usize,
}

impl NelderMead {
    /// Minimises `f` over `lower <= x <= upper` starting from `x0`. Infeasible
    /// trial points are projected onto the box. Non-finite values count as `+inf`.
    pub fn minimize<F>(&self, mut f: F, x0: &[f64], lower: &[f64], upper: &[f64]) -> Minimum
    where
        F: FnMut(&[f64]) -> f64,
    {
        let n = x0.len();
        let project = |x: &mut Vec<f64>| {
            for ((v, lo), hi) in x.iter_mut().zip(lower).zip(upper) {
                *v = v.clamp(*lo, *hi);
            }
        };
        let mut evals = 0;
        let mut eval = |x: &[f64], evals: &mut usize| {
            *evals += 1;
            let v = f(x);
            if v.is_finite() {
                v
            } else {
                f64::INFINITY
            }
        };

        let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(n + 1);
        let mut start = x0.to_vec();
        project(&mut start);
        let v0 = eval(&start, &mut evals);
        simplex.push((start.clone(), v0));
        for k in 0..n {
            let mut x = start.clone();
            let room_up = upper[k] - x[k];
            let step = if room_up >= self.initial_step { self.initial_step } else { -self.initial_step };
            x[k] += step;
            project(&mut x);
            let v = eval(&x, &mut evals);
            simplex.push((x, v));
        }

        while evals < self.max_evals {
            simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
            let best = simplex[0].1;
            let worst = simplex[n].1;
            let spread = if worst.is_finite() { (worst - best).abs() } else { f64::INFINITY };
            let diameter = simplex
                .iter()
                .skip(1)
                .map(|(x, _)| {
                    x.iter()
                        .zip(&simplex[0].0)
                        .map(|(a, b)| (a - b).abs())
                        .fold(0.0, f64::max)
                })
                .fold(0.0, f64::max);
            if spread <= self.f_tol * (1.0 + best.abs()) && diameter <= self.x_tol {
                break;
            }
            if diameter <= 1e-12 {
                break;
            }

            let centroid: Vec<f64> = (0..n)
                .map(|k| simplex[..n].iter().map(|(x, _)| x[k]).sum::<f64>() / n as f64)
                .collect();
            let along = |t: f64| -> Vec<f64> {
                let mut x: Vec<f64> = centroid
                    .iter()
                    .zip(&simplex[n].0)
                    .map(|(c, w)| c + t * (c - w))
                    .collect();
                project(&mut x);
                x
            };

            let xr = along(1.0);
            let fr = eval(&xr, &mut evals);
            if fr < simplex[0].1 {
                let xe = along(2.0);
                let fe = eval(&xe, &mut evals);
                simplex[n] = if fe < fr { (xe, fe) } else { (xr, fr) };
            } else if fr < simplex[n - 1].1 {
                simplex[n] = (xr, fr);
            } else {
                let (xc, fc) = if fr < simplex[n].1 {
                    let x = along(0.5);
                    let v = eval(&x, &mut evals);
                    (x, v)
                } else {
                    let x = along(-0.5);
                    let v = eval(&x, &mut evals);
                    (x, v)
                };
                if fc < simplex[n].1.min(fr) {
                    simplex[n] = (xc, fc);
                } else {
                    let best_x = simplex[0].0.clone();
                    for entry in simplex.iter_mut().skip(1) {
                        let x: Vec<f64> = best_x
                            .iter()
                            .zip(&entry.0)
                            .map(|(b, v)| b + 0.5 * (v - b))
                            .collect();
                        let v = eval(&x, &mut evals);
                        *entry = (x, v);
                    }
                }
            }
        }
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        let (x, value) = simplex.swap_remove(0);
        Minimum { x, value, evals }
    }
}
