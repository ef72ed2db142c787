//! Bridge description and reinforced-concrete section mechanics.
//!
//! The deck is a rectangular section `width x h` with two equal rebar layers
//! (top and bottom) whose total area is a fixed fraction of the gross
//! concrete area. Rebar stresses are obtained from a cracked transformed
//! section: tensile concrete is ignored and steel is transformed by the
//! modular ratio `n = E_s / E_c`.

use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::{Error, Result};

/// Lower bound of the deck thickness range used to bound the bar cover.
pub const MIN_DESIGN_THICKNESS: f64 = 0.30;

/// Admissible thickness band for [`section_properties`].
pub const THICKNESS_BAND: (f64, f64) = (0.05, 2.0);

/// Moving traffic load: an axle group plus a uniformly distributed load.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LoadModel {
    pub axle_count: usize,
    /// N per axle.
    pub axle_load: f64,
    /// m between consecutive axles.
    pub axle_spacing: f64,
    /// N/m over the full deck length.
    pub udl: f64,
    pub include_self_weight: bool,
    /// m between consecutive positions of the axle group.
    pub sweep_step: f64,
}

impl Default for LoadModel {
    /// LM-71 doubled for two loaded tracks.
    fn default() -> Self {
        Self {
            axle_count: 4,
            axle_load: 2.0 * 250e3,
            axle_spacing: 1.6,
            udl: 2.0 * 80e3,
            include_self_weight: true,
            sweep_step: 0.1,
        }
    }
}

impl LoadModel {
    pub fn validate(&self) -> Result<()> {
        if self.axle_count < 1 {
            return Err(Error::validation("load_model.axle_count", "must be >= 1"));
        }
        check_finite_min("load_model.axle_load", self.axle_load, 0.0, true)?;
        check_finite_min("load_model.axle_spacing", self.axle_spacing, 0.0, true)?;
        check_finite_min("load_model.udl", self.udl, 0.0, true)?;
        check_finite_min("load_model.sweep_step", self.sweep_step, 0.0, false)?;
        Ok(())
    }

    /// Distance between the first and the last axle.
    pub fn group_length(&self) -> f64 {
        (self.axle_count.saturating_sub(1)) as f64 * self.axle_spacing
    }
}

/// Fixed geometry, materials, reinforcement, loading and stress limit.
///
/// All fields are SI units. The JSON form rejects unknown keys.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BridgeConfig {
    pub total_length: f64,
    pub width: f64,
    pub end_support_positions: [f64; 2],
    pub concrete_modulus: f64,
    pub concrete_poisson: f64,
    pub steel_modulus: f64,
    /// N/m^3.
    pub unit_weight: f64,
    /// Total steel area over gross concrete area, split equally top/bottom.
    pub reinforcement_ratio: f64,
    /// Distance from either face to the centroid of the nearest bar layer.
    pub cover_to_bar_centroid: f64,
    /// Allowable rebar stress `L` in Pa.
    pub stress_limit: f64,
    pub load_model: LoadModel,
    /// Target finite element length in m.
    pub element_length: f64,
}

impl Default for BridgeConfig {
    fn default() -> Self {
        Self {
            total_length: 40.0,
            width: 8.0,
            end_support_positions: [0.0, 40.0],
            concrete_modulus: 30e9,
            concrete_poisson: 0.2,
            steel_modulus: 200e9,
            unit_weight: 25e3,
            reinforcement_ratio: 0.01,
            cover_to_bar_centroid: 0.05,
            stress_limit: 400e6,
            load_model: LoadModel::default(),
            element_length: 0.25,
        }
    }
}

impl BridgeConfig {
    pub fn validate(&self) -> Result<()> {
        check_finite_min("total_length", self.total_length, 0.0, false)?;
        check_finite_min("width", self.width, 0.0, false)?;
        let [a, b] = self.end_support_positions;
        if !(a.is_finite() && b.is_finite() && 0.0 <= a && a < b && b <= self.total_length) {
            return Err(Error::validation(
                "end_support_positions",
                format!("need 0 <= a < b <= total_length, got [{a}, {b}]"),
            ));
        }
        check_finite_min("concrete_modulus", self.concrete_modulus, 0.0, false)?;
        if !(self.steel_modulus.is_finite() && self.steel_modulus > self.concrete_modulus) {
            return Err(Error::validation(
                "steel_modulus",
                "must be finite and exceed concrete_modulus",
            ));
        }
        if !(self.concrete_poisson > -1.0 && self.concrete_poisson < 0.5) {
            return Err(Error::validation("concrete_poisson", "must lie in (-1, 0.5)"));
        }
        check_finite_min("unit_weight", self.unit_weight, 0.0, true)?;
        if !(self.reinforcement_ratio > 0.0 && self.reinforcement_ratio < 0.08) {
            return Err(Error::validation("reinforcement_ratio", "must lie in (0, 0.08)"));
        }
        let cover = self.cover_to_bar_centroid;
        if !(0.0..MIN_DESIGN_THICKNESS / 2.0).contains(&cover) {
            return Err(Error::validation(
                "cover_to_bar_centroid",
                format!("must lie in [0, {})", MIN_DESIGN_THICKNESS / 2.0),
            ));
        }
        check_finite_min("stress_limit", self.stress_limit, 0.0, false)?;
        check_finite_min("element_length", self.element_length, 0.0, false)?;
        self.load_model.validate()
    }

    /// Reads and validates a JSON config file.
    pub fn from_json_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_json_str(&text)
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        let config: Self = serde_json::from_str(text)?;
        config.validate()?;
        Ok(config)
    }

    /// Hex SHA-256 of the canonical JSON encoding. Embedded in every artifact.
    pub fn hash(&self) -> String {
        let canonical = serde_json::to_string(self).expect("config serializes");
        let digest = Sha256::digest(canonical.as_bytes());
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }

    pub fn shear_modulus(&self) -> f64 {
        self.concrete_modulus / (2.0 * (1.0 + self.concrete_poisson))
    }

    pub fn modular_ratio(&self) -> f64 {
        self.steel_modulus / self.concrete_modulus
    }
}

fn check_finite_min(field: &str, value: f64, min: f64, inclusive: bool) -> Result<()> {
    let ok = value.is_finite() && if inclusive { value >= min } else { value > min };
    if ok {
        Ok(())
    } else {
        let op = if inclusive { ">=" } else { ">" };
        Err(Error::validation(field, format!("must be finite and {op} {min}, got {value}")))
    }
}

/// One realisation of the uncertain geometry: three interior pier positions
/// and the deck thickness.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DesignPoint {
    pub x1: f64,
    pub x2: f64,
    pub x3: f64,
    pub h: f64,
}

impl DesignPoint {
    pub const DIM: usize = 4;

    pub fn new(x1: f64, x2: f64, x3: f64, h: f64) -> Self {
        Self { x1, x2, x3, h }
    }

    pub fn from_slice(values: &[f64]) -> Result<Self> {
        match values {
            [x1, x2, x3, h] => Ok(Self::new(*x1, *x2, *x3, *h)),
            _ => Err(Error::validation(
                "design_point",
                format!("expected 4 coordinates, got {}", values.len()),
            )),
        }
    }

    pub fn to_array(self) -> [f64; 4] {
        [self.x1, self.x2, self.x3, self.h]
    }

    pub fn piers(&self) -> [f64; 3] {
        [self.x1, self.x2, self.x3]
    }

    pub fn validate(&self, config: &BridgeConfig) -> Result<()> {
        let [a, b] = config.end_support_positions;
        let ordered = a < self.x1 && self.x1 < self.x2 && self.x2 < self.x3 && self.x3 < b;
        if !ordered || !self.to_array().iter().all(|v| v.is_finite()) {
            return Err(Error::validation(
                "design_point.piers",
                format!(
                    "need {a} < x1 < x2 < x3 < {b}, got ({}, {}, {})",
                    self.x1, self.x2, self.x3
                ),
            ));
        }
        if !(self.h > 0.0) {
            return Err(Error::validation("design_point.h", "deck thickness must be > 0"));
        }
        Ok(())
    }
}

/// Which face of the deck is in compression.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MomentSign {
    /// Top compressed, bottom bars in tension.
    Sagging,
    /// Bottom compressed, top bars in tension.
    Hogging,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SectionProperties {
    pub width: f64,
    pub h: f64,
    pub gross_area: f64,
    pub gross_inertia: f64,
    pub shear_correction: f64,
    pub steel_area_top: f64,
    pub steel_area_bot: f64,
    /// Depth of the tension bars from the compressed face.
    pub effective_depth: f64,
    /// Depth of the compression bars from the compressed face.
    pub compression_depth: f64,
    pub modular_ratio: f64,
}

impl SectionProperties {
    /// `(A_s,comp, A_s,tens)` for the given sign.
    pub fn steel_layers(&self, sign: MomentSign) -> (f64, f64) {
        match sign {
            MomentSign::Sagging => (self.steel_area_top, self.steel_area_bot),
            MomentSign::Hogging => (self.steel_area_bot, self.steel_area_top),
        }
    }

    /// Cracked transformed inertia about the neutral axis at depth `c`.
    pub fn cracked_inertia(&self, sign: MomentSign, c: f64) -> f64 {
        let (as_comp, as_tens) = self.steel_layers(sign);
        let n = self.modular_ratio;
        self.width * c.powi(3) / 3.0
            + (n - 1.0) * as_comp * (c - self.compression_depth).powi(2)
            + n * as_tens * (self.effective_depth - c).powi(2)
    }
}

/// Gross and reinforced section properties of the deck at thickness `h`.
pub fn section_properties(config: &BridgeConfig, h: f64) -> Result<SectionProperties> {
    config.validate()?;
    let (lo, hi) = THICKNESS_BAND;
    if !(h >= lo && h <= hi) {
        return Err(Error::validation(
            "h",
            format!("deck thickness {h} m outside [{lo}, {hi}] m"),
        ));
    }
    let cover = config.cover_to_bar_centroid;
    let d = h - cover;
    if !(d > 0.0 && d < h) {
        return Err(Error::validation(
            "cover_to_bar_centroid",
            format!("effective depth {d} m not inside (0, {h})"),
        ));
    }
    let area = config.width * h;
    let layer = 0.5 * config.reinforcement_ratio * area;
    Ok(SectionProperties {
        width: config.width,
        h,
        gross_area: area,
        gross_inertia: config.width * h.powi(3) / 12.0,
        shear_correction: 5.0 / 6.0,
        steel_area_top: layer,
        steel_area_bot: layer,
        effective_depth: d,
        compression_depth: cover,
        modular_ratio: config.modular_ratio(),
    })
}

/// Neutral-axis depth of the cracked transformed section, measured from the
/// compressed face.
///
/// Solves `b c^2/2 + (n-1) A_sc (c - d') = n A_st (d - c)` for its positive root.
pub fn cracked_neutral_axis(section: &SectionProperties, sign: MomentSign) -> Result<f64> {
    let (as_comp, as_tens) = section.steel_layers(sign);
    let n = section.modular_ratio;
    let d = section.effective_depth;
    let d_comp = section.compression_depth;

    // a c^2 + b c - k = 0 with a > 0
    let a = 0.5 * section.width;
    let b = (n - 1.0) * as_comp + n * as_tens;
    let k = (n - 1.0) * as_comp * d_comp + n * as_tens * d;
    if !(a > 0.0) || !(k > 0.0) || !b.is_finite() {
        return Err(Error::numerical(format!(
            "cracked section has no positive neutral axis (b={}, A_sc={as_comp}, A_st={as_tens})",
            section.width
        )));
    }
    // Cancellation-free form of the positive root.
    let c = 2.0 * k / (b + (b * b + 4.0 * a * k).sqrt());
    if !(c > 0.0 && c < d) {
        return Err(Error::numerical(format!(
            "neutral axis {c} m outside (0, {d}) m"
        )));
    }
    Ok(c)
}

/// Tensile stress in the bars of the tension layer under a bending moment
/// `moment >= 0` of the given sign.
pub fn steel_stress_from_moment(
    section: &SectionProperties,
    moment: f64,
    sign: MomentSign,
) -> Result<f64> {
    if !(moment >= 0.0) || !moment.is_finite() {
        return Err(Error::validation(
            "moment",
            format!("must be finite and >= 0 in its sign convention, got {moment}"),
        ));
    }
    let c = cracked_neutral_axis(section, sign)?;
    if moment == 0.0 {
        return Ok(0.0);
    }
    let i_cr = section.cracked_inertia(sign, c);
    Ok(section.modular_ratio * moment * (section.effective_depth - c) / i_cr)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn reference_section() -> SectionProperties {
        let config = BridgeConfig {
            steel_modulus: 200e9,
            concrete_modulus: 30e9,
            ..BridgeConfig::default()
        };
        section_properties(&config, 0.5).unwrap()
    }

    #[test]
    fn gross_properties() {
        let s = reference_section();
        assert_relative_eq!(s.gross_area, 4.0, max_relative = 1e-14);
        assert_relative_eq!(s.gross_inertia, 8.0 * 0.125 / 12.0, max_relative = 1e-14);
        assert_relative_eq!(s.steel_area_top, 0.02, max_relative = 1e-14);
        assert_relative_eq!(s.steel_area_bot, 0.02, max_relative = 1e-14);
        assert_relative_eq!(s.effective_depth, 0.45, max_relative = 1e-14);
        assert_eq!(s.shear_correction, 5.0 / 6.0);

        let thin = section_properties(&BridgeConfig::default(), 0.3).unwrap();
        assert_relative_eq!(thin.gross_inertia, 0.018, max_relative = 1e-12);
    }

    #[test]
    fn thickness_outside_band_is_rejected() {
        let config = BridgeConfig::default();
        for h in [0.0, -0.1, 0.04, 2.5, f64::NAN] {
            match section_properties(&config, h) {
                Err(Error::Validation { field, .. }) => assert_eq!(field, "h"),
                other => panic!("expected validation error for h={h}, got {other:?}"),
            }
        }
    }

    #[test]
    fn neutral_axis_vanishes_with_reinforcement() {
        let mut last = f64::INFINITY;
        for rho in [1e-2, 1e-4, 1e-6, 1e-8] {
            let config = BridgeConfig {
                reinforcement_ratio: rho,
                ..BridgeConfig::default()
            };
            let s = section_properties(&config, 0.5).unwrap();
            let c = cracked_neutral_axis(&s, MomentSign::Sagging).unwrap();
            assert!(c < last);
            last = c;
        }
        assert!(last < 1e-3);
    }

    #[test]
    fn no_steel_has_no_neutral_axis() {
        let mut s = reference_section();
        s.steel_area_top = 0.0;
        s.steel_area_bot = 0.0;
        assert!(matches!(
            cracked_neutral_axis(&s, MomentSign::Sagging),
            Err(Error::Numerical(_))
        ));
    }

    #[test]
    fn symmetric_section_is_sign_independent() {
        let s = reference_section();
        let sag = cracked_neutral_axis(&s, MomentSign::Sagging).unwrap();
        let hog = cracked_neutral_axis(&s, MomentSign::Hogging).unwrap();
        assert_eq!(sag, hog);
    }

    #[test]
    fn neutral_axis_matches_bisection_on_equilibrium() {
        let s = reference_section();
        let (as_c, as_t) = s.steel_layers(MomentSign::Sagging);
        let n = s.modular_ratio;
        let residual = |c: f64| {
            s.width * c * c / 2.0 + (n - 1.0) * as_c * (c - s.compression_depth)
                - n * as_t * (s.effective_depth - c)
        };
        let (mut lo, mut hi) = (0.0, s.effective_depth);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if residual(mid) > 0.0 {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        let c = cracked_neutral_axis(&s, MomentSign::Sagging).unwrap();
        assert_relative_eq!(c, 0.5 * (lo + hi), max_relative = 1e-12);
        // frozen; closed-form quadratic root
        assert_relative_eq!(c, 0.100_951_950_788_6, max_relative = 1e-10);
    }

    #[test]
    fn zero_moment_zero_stress_and_negative_rejected() {
        let s = reference_section();
        assert_eq!(steel_stress_from_moment(&s, 0.0, MomentSign::Sagging).unwrap(), 0.0);
        assert!(steel_stress_from_moment(&s, -1.0, MomentSign::Sagging).is_err());
    }

    #[test]
    fn stress_is_linear_in_moment() {
        let s = reference_section();
        let one = steel_stress_from_moment(&s, 1e6, MomentSign::Hogging).unwrap();
        let two = steel_stress_from_moment(&s, 2e6, MomentSign::Hogging).unwrap();
        assert_relative_eq!(two, 2.0 * one, max_relative = 1e-14);
    }

    #[test]
    fn only_modular_ratio_matters() {
        let base = BridgeConfig::default();
        let scaled = BridgeConfig {
            concrete_modulus: 3.0 * base.concrete_modulus,
            steel_modulus: 3.0 * base.steel_modulus,
            ..base.clone()
        };
        let a = section_properties(&base, 0.42).unwrap();
        let b = section_properties(&scaled, 0.42).unwrap();
        let ca = cracked_neutral_axis(&a, MomentSign::Sagging).unwrap();
        let cb = cracked_neutral_axis(&b, MomentSign::Sagging).unwrap();
        assert_relative_eq!(ca, cb, max_relative = 1e-14);
        assert_relative_eq!(
            a.cracked_inertia(MomentSign::Sagging, ca),
            b.cracked_inertia(MomentSign::Sagging, cb),
            max_relative = 1e-14
        );
    }

    #[test]
    fn stress_decreases_with_thickness() {
        let config = BridgeConfig::default();
        let mut last = f64::INFINITY;
        for i in 0..=30 {
            let h = 0.30 + 0.01 * i as f64;
            let s = section_properties(&config, h).unwrap();
            let sigma = steel_stress_from_moment(&s, 5e6, MomentSign::Sagging).unwrap();
            assert!(sigma < last, "h={h}");
            last = sigma;
        }
    }

    #[test]
    fn config_json_rejects_unknown_keys() {
        let mut value = serde_json::to_value(BridgeConfig::default()).unwrap();
        value["surprise"] = serde_json::json!(1);
        assert!(BridgeConfig::from_json_str(&value.to_string()).is_err());
        let ok = serde_json::to_string(&BridgeConfig::default()).unwrap();
        assert_eq!(BridgeConfig::from_json_str(&ok).unwrap(), BridgeConfig::default());
    }

    #[test]
    fn config_validation() {
        let bad = [
            BridgeConfig { reinforcement_ratio: 0.09, ..Default::default() },
            BridgeConfig { steel_modulus: 10e9, ..Default::default() },
            BridgeConfig { cover_to_bar_centroid: 0.2, ..Default::default() },
            BridgeConfig { stress_limit: 0.0, ..Default::default() },
            BridgeConfig { width: -1.0, ..Default::default() },
        ];
        for config in bad {
            assert!(config.validate().is_err(), "{config:?}");
        }
        assert!(BridgeConfig::default().validate().is_ok());
    }

    #[test]
    fn design_point_ordering() {
        let config = BridgeConfig::default();
        assert!(DesignPoint::new(10.0, 20.0, 30.0, 0.45).validate(&config).is_ok());
        assert!(DesignPoint::new(10.0, 10.0, 30.0, 0.45).validate(&config).is_err());
        assert!(DesignPoint::new(0.0, 20.0, 30.0, 0.45).validate(&config).is_err());
        assert!(DesignPoint::new(10.0, 20.0, 40.0, 0.45).validate(&config).is_err());
        assert!(DesignPoint::new(10.0, 20.0, 30.0, 0.0).validate(&config).is_err());
    }
}
