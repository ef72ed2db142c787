//! Latin Hypercube designs over independent uniform inputs, and the affine
//! maps between physical space, the unit hypercube and `[-1, 1]^d`.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Name of the pseudo-random generator, recorded in dataset sidecars.
pub const GENERATOR: &str = "ChaCha8Rng(seed_from_u64)";

pub(crate) fn seeded_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Independent uniform distributions `U(lower_k, upper_k)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InputDistribution {
    pub names: Vec<String>,
    pub bounds: Vec<[f64; 2]>,
}

impl Default for InputDistribution {
    /// Pier positions `x1 ~ U(5, 15)`, `x2 ~ U(15, 25)`, `x3 ~ U(25, 35)` m and
    /// deck thickness `h ~ U(0.30, 0.60)` m.
    fn default() -> Self {
        Self::new(
            ["x1", "x2", "x3", "h"].iter().map(|s| s.to_string()).collect(),
            vec![[5.0, 15.0], [15.0, 25.0], [25.0, 35.0], [0.30, 0.60]],
        )
        .expect("default bounds are valid")
    }
}

impl InputDistribution {
    pub fn new(names: Vec<String>, bounds: Vec<[f64; 2]>) -> Result<Self> {
        let dist = Self { names, bounds };
        dist.validate()?;
        Ok(dist)
    }

    /// Unnamed variables `u1..ud`.
    pub fn from_bounds(bounds: Vec<[f64; 2]>) -> Result<Self> {
        let names = (1..=bounds.len()).map(|k| format!("u{k}")).collect();
        Self::new(names, bounds)
    }

    pub fn unit(d: usize) -> Self {
        Self::from_bounds(vec![[0.0, 1.0]; d]).expect("unit bounds")
    }

    pub fn validate(&self) -> Result<()> {
        if self.bounds.is_empty() {
            return Err(Error::validation("bounds", "need at least one variable"));
        }
        if self.names.len() != self.bounds.len() {
            return Err(Error::validation("names", "one name per variable"));
        }
        for (name, [lo, hi]) in self.names.iter().zip(&self.bounds) {
            if !(lo.is_finite() && hi.is_finite() && lo < hi) {
                return Err(Error::validation(
                    format!("bounds.{name}"),
                    format!("need finite lower < upper, got [{lo}, {hi}]"),
                ));
            }
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.bounds.len()
    }

    fn check_dim(&self, point: &[f64]) -> Result<()> {
        if point.len() != self.dim() {
            return Err(Error::validation(
                "point",
                format!("expected {} coordinates, got {}", self.dim(), point.len()),
            ));
        }
        Ok(())
    }

    fn check_inside(&self, point: &[f64]) -> Result<()> {
        self.check_dim(point)?;
        for ((name, [lo, hi]), &x) in self.names.iter().zip(&self.bounds).zip(point) {
            let slack = 1e-12 * (hi - lo);
            if !(x >= lo - slack && x <= hi + slack) {
                return Err(Error::validation(
                    name.clone(),
                    format!("value {x} outside [{lo}, {hi}]"),
                ));
            }
        }
        Ok(())
    }

    /// `u = (x - a) / (b - a)`, rejecting out-of-bounds coordinates.
    pub fn to_unit(&self, point: &[f64]) -> Result<Vec<f64>> {
        self.check_inside(point)?;
        Ok(self.to_unit_unchecked(point))
    }

    /// `xi = 2u - 1`, rejecting out-of-bounds coordinates.
    pub fn to_standard(&self, point: &[f64]) -> Result<Vec<f64>> {
        Ok(self.to_unit(point)?.into_iter().map(|u| 2.0 * u - 1.0).collect())
    }

    /// Unit scaling without the bounds check (extrapolation allowed). Panics on
    /// a dimension mismatch.
    pub fn to_unit_unchecked(&self, point: &[f64]) -> Vec<f64> {
        assert_eq!(point.len(), self.dim(), "dimension mismatch");
        point
            .iter()
            .zip(&self.bounds)
            .map(|(x, [lo, hi])| (x - lo) / (hi - lo))
            .collect()
    }

    pub fn from_unit(&self, unit: &[f64]) -> Vec<f64> {
        unit.iter()
            .zip(&self.bounds)
            .map(|(u, [lo, hi])| lo + u * (hi - lo))
            .collect()
    }

    pub fn from_standard(&self, xi: &[f64]) -> Vec<f64> {
        let unit: Vec<f64> = xi.iter().map(|v| 0.5 * (v + 1.0)).collect();
        self.from_unit(&unit)
    }

    pub fn contains(&self, point: &[f64]) -> bool {
        self.check_inside(point).is_ok()
    }

    /// Independent uniform draws (crude Monte Carlo).
    pub fn sample_iid(&self, n: usize, rng: &mut impl Rng) -> Vec<Vec<f64>> {
        (0..n)
            .map(|_| {
                let u: Vec<f64> = (0..self.dim()).map(|_| rng.random::<f64>()).collect();
                self.from_unit(&u)
            })
            .collect()
    }
}

/// `n` design points drawn by Latin Hypercube Sampling.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampleSet {
    pub points: Vec<Vec<f64>>,
    pub seed: u64,
    pub distribution: InputDistribution,
}

impl SampleSet {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// Latin Hypercube sample: in every dimension each of the `n` equiprobable
/// strata holds exactly one point, at a uniform position inside the stratum.
/// Strata are permuted independently per dimension.
pub fn lhs_sample(n: usize, dist: &InputDistribution, seed: u64) -> Result<SampleSet> {
    if n == 0 {
        return Err(Error::validation("n", "sample size must be >= 1"));
    }
    dist.validate()?;
    let d = dist.dim();
    let mut rng = seeded_rng(seed);
    let mut unit = vec![vec![0.0; d]; n];
    let mut strata: Vec<usize> = (0..n).collect();
    for k in 0..d {
        strata.shuffle(&mut rng);
        for (row, &s) in unit.iter_mut().zip(&strata) {
            let jitter: f64 = rng.random();
            let u = (s as f64 + jitter) / n as f64;
            // rounding must not push the value into the next stratum
            let upper = (s + 1) as f64 / n as f64;
            row[k] = if u < upper { u } else { upper - f64::EPSILON * upper };
        }
    }
    let points = unit.iter().map(|u| dist.from_unit(u)).collect();
    Ok(SampleSet {
        points,
        seed,
        distribution: dist.clone(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn single_point() {
        let s = lhs_sample(1, &InputDistribution::unit(1), 3).unwrap();
        assert_eq!(s.len(), 1);
        assert!((0.0..1.0).contains(&s.points[0][0]));
    }

    #[test]
    fn zero_points_rejected() {
        assert!(lhs_sample(0, &InputDistribution::unit(2), 1).is_err());
    }

    #[test]
    fn four_point_strata() {
        let s = lhs_sample(4, &InputDistribution::unit(1), 11).unwrap();
        let mut v: Vec<f64> = s.points.iter().map(|p| p[0]).collect();
        v.sort_by(f64::total_cmp);
        for (i, x) in v.iter().enumerate() {
            assert!(i as f64 / 4.0 <= *x && *x < (i + 1) as f64 / 4.0);
        }
    }

    #[test]
    fn fifty_points_in_bounds_with_plausible_mean() {
        let dist = InputDistribution::default();
        let s = lhs_sample(50, &dist, 2024).unwrap();
        assert!(s.points.iter().all(|p| (5.0..=15.0).contains(&p[0])));
        let mean = s.points.iter().map(|p| p[0]).sum::<f64>() / 50.0;
        assert!((mean - 10.0).abs() <= 10.0 / 50f64.sqrt());
    }

    #[test]
    fn deterministic_per_seed_and_distinct_across_seeds() {
        let dist = InputDistribution::default();
        let a = lhs_sample(30, &dist, 5).unwrap();
        let b = lhs_sample(30, &dist, 5).unwrap();
        assert_eq!(a, b);
        let c = lhs_sample(30, &dist, 6).unwrap();
        for p in &a.points {
            assert!(!c.points.contains(p));
        }
    }

    #[test]
    fn maps_at_bounds_and_midpoint() {
        let dist = InputDistribution::default();
        assert_eq!(dist.to_unit(&[5.0, 15.0, 25.0, 0.3]).unwrap(), vec![0.0; 4]);
        assert_eq!(dist.to_standard(&[15.0, 25.0, 35.0, 0.6]).unwrap(), vec![1.0; 4]);
        let mid = dist.to_standard(&[10.0, 20.0, 30.0, 0.45]).unwrap();
        assert!(mid.iter().all(|v| v.abs() < 1e-12));
        assert!(dist.to_unit(&[4.0, 20.0, 30.0, 0.45]).is_err());
        assert!(dist.to_unit(&[10.0, 20.0]).is_err());
    }

    #[test]
    fn invalid_bounds() {
        assert!(InputDistribution::from_bounds(vec![[1.0, 1.0]]).is_err());
        assert!(InputDistribution::from_bounds(vec![]).is_err());
    }

    proptest! {
        #[test]
        fn every_marginal_has_one_point_per_stratum(n in 1usize..80, d in 1usize..6, seed in any::<u64>()) {
            let dist = InputDistribution::unit(d);
            let s = lhs_sample(n, &dist, seed).unwrap();
            for k in 0..d {
                let mut seen = vec![false; n];
                for p in &s.points {
                    let stratum = (p[k] * n as f64).floor() as usize;
                    prop_assert!(stratum < n);
                    prop_assert!(!seen[stratum]);
                    seen[stratum] = true;
                }
            }
        }

        #[test]
        fn affine_round_trip(u in proptest::collection::vec(0.0f64..=1.0, 4)) {
            let dist = InputDistribution::default();
            let x = dist.from_unit(&u);
            let back = dist.from_unit(&dist.to_unit(&x).unwrap());
            let back_std = dist.from_standard(&dist.to_standard(&x).unwrap());
            for k in 0..4 {
                let range = dist.bounds[k][1] - dist.bounds[k][0];
                prop_assert!((back[k] - x[k]).abs() <= 1e-12 * range);
                prop_assert!((back_std[k] - x[k]).abs() <= 1e-12 * range);
            }
        }
    }
}
