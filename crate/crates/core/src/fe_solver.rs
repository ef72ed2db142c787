//! Linear-elastic Timoshenko beam solver for the continuous deck.
//!
//! Each node carries a deflection `w` (positive up) and a rotation `theta`
//! (positive counter-clockwise). Elements use the shear-deformable two-node
//! formulation whose cubic interpolation solves the homogeneous Timoshenko
//! equations, so nodal values are exact for point and uniform loads and the
//! element does not lock. Supports are pins: `w = 0`, rotation free.
//! Bending moments are reported sagging-positive.

use serde::{Deserialize, Serialize};

use crate::beam_model::{
    section_properties, steel_stress_from_moment, BridgeConfig, DesignPoint, MomentSign,
    SectionProperties,
};
use crate::linalg::BandCholesky;
use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Mesh {
    pub node_positions: Vec<f64>,
    pub support_node_indices: Vec<usize>,
    pub target_element_length: f64,
}

impl Mesh {
    /// Mesh over `[0, total_length]` with a node at every support and each
    /// segment between breakpoints split into equal elements no longer than
    /// `target_element_length`.
    pub fn new(total_length: f64, supports: &[f64], target_element_length: f64) -> Result<Self> {
        if !(total_length > 0.0 && total_length.is_finite()) {
            return Err(Error::validation("total_length", "must be finite and > 0"));
        }
        if !(target_element_length > 0.0 && target_element_length.is_finite()) {
            return Err(Error::validation("element_length", "must be finite and > 0"));
        }
        if supports.windows(2).any(|w| !(w[0] < w[1]))
            || supports.iter().any(|&s| !(0.0..=total_length).contains(&s))
        {
            return Err(Error::validation(
                "supports",
                format!("support positions must be strictly increasing within [0, {total_length}]"),
            ));
        }

        let mut breaks = vec![0.0];
        breaks.extend(supports.iter().copied().filter(|&s| s > 0.0 && s < total_length));
        breaks.push(total_length);

        let mut nodes = vec![0.0];
        let mut support_node_indices = Vec::with_capacity(supports.len());
        if supports.first() == Some(&0.0) {
            support_node_indices.push(0);
        }
        for seg in breaks.windows(2) {
            let (a, b) = (seg[0], seg[1]);
            let len = b - a;
            let count = ((len / target_element_length) - 1e-9).ceil().max(1.0) as usize;
            for k in 1..count {
                nodes.push(a + len * k as f64 / count as f64);
            }
            nodes.push(b);
            if supports.contains(&b) {
                support_node_indices.push(nodes.len() - 1);
            }
        }
        Ok(Self {
            node_positions: nodes,
            support_node_indices,
            target_element_length,
        })
    }

    pub fn node_count(&self) -> usize {
        self.node_positions.len()
    }

    pub fn element_count(&self) -> usize {
        self.node_positions.len() - 1
    }

    /// Consecutive node pairs.
    pub fn elements(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.element_count()).map(|e| (e, e + 1))
    }

    pub fn total_length(&self) -> f64 {
        *self.node_positions.last().expect("mesh has nodes")
    }

    fn element_length(&self, e: usize) -> f64 {
        self.node_positions[e + 1] - self.node_positions[e]
    }

    /// Element containing `x` and the local coordinate in `[0, 1]`.
    fn locate(&self, x: f64) -> (usize, f64) {
        let ne = self.element_count();
        let e = self
            .node_positions
            .partition_point(|&p| p <= x)
            .saturating_sub(1)
            .min(ne - 1);
        let xi = ((x - self.node_positions[e]) / self.element_length(e)).clamp(0.0, 1.0);
        (e, xi)
    }
}

/// Nodes at both end supports, the three piers, and uniform subdivision.
pub fn build_mesh(point: &DesignPoint, config: &BridgeConfig) -> Result<Mesh> {
    point.validate(config)?;
    let [a, b] = config.end_support_positions;
    let supports = [a, point.x1, point.x2, point.x3, b];
    Mesh::new(config.total_length, &supports, config.element_length)
}

/// Downward point load in N.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PointLoad {
    pub position: f64,
    pub magnitude: f64,
}

/// Transverse loading: downward point loads plus a downward UDL over the full length.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct BeamLoads {
    pub point_loads: Vec<PointLoad>,
    /// N/m.
    pub udl: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ElasticModuli {
    pub young: f64,
    pub shear: f64,
}

impl ElasticModuli {
    pub fn of_concrete(config: &BridgeConfig) -> Self {
        Self {
            young: config.concrete_modulus,
            shear: config.shear_modulus(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct StaticSolution {
    pub deflections: Vec<f64>,
    pub rotations: Vec<f64>,
    /// Sagging-positive internal bending moment per node.
    pub moments: Vec<f64>,
}

struct ElementMatrices {
    ei: f64,
    phi: f64,
}

impl ElementMatrices {
    fn stiffness(&self, l: f64) -> [[f64; 4]; 4] {
        let phi = self.phi_for(l);
        let c = self.ei / (l.powi(3) * (1.0 + phi));
        let l2 = l * l;
        [
            [12.0 * c, 6.0 * l * c, -12.0 * c, 6.0 * l * c],
            [6.0 * l * c, (4.0 + phi) * l2 * c, -6.0 * l * c, (2.0 - phi) * l2 * c],
            [-12.0 * c, -6.0 * l * c, 12.0 * c, -6.0 * l * c],
            [6.0 * l * c, (2.0 - phi) * l2 * c, -6.0 * l * c, (4.0 + phi) * l2 * c],
        ]
    }

    // phi = 12 EI / (kappa G A l^2); self.phi stores 12 EI / (kappa G A)
    fn phi_for(&self, l: f64) -> f64 {
        self.phi / (l * l)
    }

    /// Interpolation functions at local coordinate `xi`.
    fn shape(&self, l: f64, xi: f64) -> [f64; 4] {
        let phi = self.phi_for(l);
        let s = 1.0 / (1.0 + phi);
        let x2 = xi * xi;
        let x3 = x2 * xi;
        let bubble = xi - x2;
        [
            s * (1.0 - 3.0 * x2 + 2.0 * x3 + phi * (1.0 - xi)),
            s * l * (xi - 2.0 * x2 + x3 + 0.5 * phi * bubble),
            s * (3.0 * x2 - 2.0 * x3 + phi * xi),
            s * l * (-x2 + x3 - 0.5 * phi * bubble),
        ]
    }
}

/// Assembled and factorised beam stiffness, reusable for many load cases.
pub struct BeamSystem<'m> {
    mesh: &'m Mesh,
    element: ElementMatrices,
    // global dof -> reduced equation, None for restrained dofs
    equation: Vec<Option<usize>>,
    factor: BandCholesky,
}

impl<'m> BeamSystem<'m> {
    pub fn new(mesh: &'m Mesh, section: &SectionProperties, moduli: ElasticModuli) -> Result<Self> {
        if mesh.node_count() < 2 {
            return Err(Error::validation("mesh", "needs at least one element"));
        }
        let ei = moduli.young * section.gross_inertia;
        let kga = section.shear_correction * moduli.shear * section.gross_area;
        let element = ElementMatrices { ei, phi: 12.0 * ei / kga };

        let ndof = 2 * mesh.node_count();
        let mut equation = vec![None; ndof];
        let mut next = 0;
        for (dof, slot) in equation.iter_mut().enumerate() {
            let node = dof / 2;
            let restrained = dof % 2 == 0 && mesh.support_node_indices.contains(&node);
            if !restrained {
                *slot = Some(next);
                next += 1;
            }
        }

        let mut band = BandCholesky::zeros(next, 3);
        for (e, (a, _)) in mesh.elements().enumerate() {
            let k = element.stiffness(mesh.element_length(e));
            let dofs = [2 * a, 2 * a + 1, 2 * a + 2, 2 * a + 3];
            for (r, &gr) in dofs.iter().enumerate() {
                for (c, &gc) in dofs.iter().enumerate() {
                    if let (Some(i), Some(j)) = (equation[gr], equation[gc]) {
                        if j <= i {
                            band.add(i, j, k[r][c]);
                        }
                    }
                }
            }
        }
        let factor = band.factorize().map_err(|_| {
            Error::numerical(format!(
                "singular beam stiffness ({} supports; at least 2 are required)",
                mesh.support_node_indices.len()
            ))
        })?;
        Ok(Self { mesh, element, equation, factor })
    }

    fn element_loads(&self, loads: &BeamLoads) -> Result<Vec<[f64; 4]>> {
        let mesh = self.mesh;
        let total = mesh.total_length();
        let mut out = Vec::with_capacity(mesh.element_count());
        for e in 0..mesh.element_count() {
            let l = mesh.element_length(e);
            let q = -loads.udl;
            out.push([q * l / 2.0, q * l * l / 12.0, q * l / 2.0, -q * l * l / 12.0]);
        }
        for p in &loads.point_loads {
            if !(p.position >= 0.0 && p.position <= total) || !p.magnitude.is_finite() {
                return Err(Error::validation(
                    "point_loads",
                    format!("load at {} m outside [0, {total}] m", p.position),
                ));
            }
            let (e, xi) = mesh.locate(p.position);
            let n = self.element.shape(mesh.element_length(e), xi);
            for (slot, ni) in out[e].iter_mut().zip(n) {
                *slot -= p.magnitude * ni;
            }
        }
        Ok(out)
    }

    pub fn solve(&self, loads: &BeamLoads) -> Result<StaticSolution> {
        let mesh = self.mesh;
        let element_loads = self.element_loads(loads)?;

        let mut rhs = vec![0.0; self.factor.dim()];
        for (e, r) in element_loads.iter().enumerate() {
            for (k, value) in r.iter().enumerate() {
                if let Some(i) = self.equation[2 * e + k] {
                    rhs[i] += value;
                }
            }
        }
        self.factor.solve(&mut rhs);

        let mut u = vec![0.0; 2 * mesh.node_count()];
        for (dof, eq) in self.equation.iter().enumerate() {
            if let Some(i) = eq {
                u[dof] = rhs[*i];
            }
        }

        let nn = mesh.node_count();
        let mut moment_sum = vec![0.0; nn];
        let mut moment_count = vec![0u8; nn];
        for (e, r) in element_loads.iter().enumerate() {
            let k = self.element.stiffness(mesh.element_length(e));
            let ue = &u[2 * e..2 * e + 4];
            let end = |row: usize| -> f64 {
                (0..4).map(|c| k[row][c] * ue[c]).sum::<f64>() - r[row]
            };
            moment_sum[e] += -end(1);
            moment_sum[e + 1] += end(3);
            moment_count[e] += 1;
            moment_count[e + 1] += 1;
        }
        let moments = moment_sum
            .iter()
            .zip(&moment_count)
            .map(|(m, &c)| m / f64::from(c))
            .collect();

        Ok(StaticSolution {
            deflections: u.iter().step_by(2).copied().collect(),
            rotations: u.iter().skip(1).step_by(2).copied().collect(),
            moments,
        })
    }
}

/// One-shot static analysis.
pub fn solve_static(
    mesh: &Mesh,
    section: &SectionProperties,
    moduli: ElasticModuli,
    loads: &BeamLoads,
) -> Result<StaticSolution> {
    BeamSystem::new(mesh, section, moduli)?.solve(loads)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MomentEnvelope {
    pub node_positions: Vec<f64>,
    /// Per-node maximum sagging moment, N m, `>= 0`.
    pub sagging: Vec<f64>,
    /// Per-node maximum hogging moment magnitude, N m, `>= 0`.
    pub hogging: Vec<f64>,
}

impl MomentEnvelope {
    fn zeros(positions: &[f64]) -> Self {
        Self {
            node_positions: positions.to_vec(),
            sagging: vec![0.0; positions.len()],
            hogging: vec![0.0; positions.len()],
        }
    }

    fn absorb(&mut self, moments: &[f64]) {
        for ((sag, hog), &m) in self.sagging.iter_mut().zip(&mut self.hogging).zip(moments) {
            *sag = sag.max(m);
            *hog = hog.max(-m);
        }
    }
}

/// Leading-axle positions of the swept group, from fully before the deck to
/// fully past it.
pub fn sweep_positions(config: &BridgeConfig) -> Vec<f64> {
    let lm = &config.load_model;
    let start = -lm.group_length();
    let steps = ((config.total_length - start) / lm.sweep_step + 1e-9).floor() as usize;
    (0..=steps).map(|k| start + k as f64 * lm.sweep_step).collect()
}

/// Axle loads on the deck when the first axle sits at `lead`; off-deck axles are dropped.
pub fn axle_loads_at(config: &BridgeConfig, lead: f64) -> Vec<PointLoad> {
    let lm = &config.load_model;
    (0..lm.axle_count)
        .map(|k| lead + k as f64 * lm.axle_spacing)
        .filter(|&x| x >= 0.0 && x <= config.total_length)
        .map(|position| PointLoad { position, magnitude: lm.axle_load })
        .collect()
}

fn distributed_load(config: &BridgeConfig, section: &SectionProperties) -> f64 {
    let lm = &config.load_model;
    let self_weight = if lm.include_self_weight {
        config.unit_weight * section.gross_area
    } else {
        0.0
    };
    lm.udl + self_weight
}

/// Per-node moment extremes over every position of the axle group, with the
/// distributed load always present.
pub fn moment_envelope(point: &DesignPoint, config: &BridgeConfig) -> Result<MomentEnvelope> {
    config.validate()?;
    let mesh = build_mesh(point, config)?;
    let section = section_properties(config, point.h)?;
    envelope_on_mesh(&mesh, &section, config)
}

pub(crate) fn envelope_on_mesh(
    mesh: &Mesh,
    section: &SectionProperties,
    config: &BridgeConfig,
) -> Result<MomentEnvelope> {
    let system = BeamSystem::new(mesh, section, ElasticModuli::of_concrete(config))?;
    let udl = distributed_load(config, section);
    let mut envelope = MomentEnvelope::zeros(&mesh.node_positions);
    for lead in sweep_positions(config) {
        let loads = BeamLoads { point_loads: axle_loads_at(config, lead), udl };
        envelope.absorb(&system.solve(&loads)?.moments);
    }
    Ok(envelope)
}

/// Maximum rebar tensile stress `q(x)` in Pa over the deck and all load positions.
pub fn max_steel_stress(point: &DesignPoint, config: &BridgeConfig) -> Result<f64> {
    let section = section_properties(config, point.h)?;
    let envelope = moment_envelope(point, config)?;
    stress_from_envelope(&section, &envelope)
}

pub fn stress_from_envelope(section: &SectionProperties, envelope: &MomentEnvelope) -> Result<f64> {
    let mut q = 0.0_f64;
    for (&sag, &hog) in envelope.sagging.iter().zip(&envelope.hogging) {
        q = q.max(steel_stress_from_moment(section, sag, MomentSign::Sagging)?);
        q = q.max(steel_stress_from_moment(section, hog, MomentSign::Hogging)?);
    }
    Ok(q)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::beam_model::LoadModel;
    use approx::assert_relative_eq;

    fn section() -> SectionProperties {
        section_properties(&BridgeConfig::default(), 0.5).unwrap()
    }

    fn moduli() -> ElasticModuli {
        ElasticModuli::of_concrete(&BridgeConfig::default())
    }

    fn node_at(mesh: &Mesh, x: f64) -> usize {
        mesh.node_positions
            .iter()
            .position(|&p| (p - x).abs() < 1e-9)
            .expect("node exists")
    }

    #[test]
    fn mesh_without_subdivision() {
        let mesh = build_mesh(
            &DesignPoint::new(10.0, 20.0, 30.0, 0.45),
            &BridgeConfig { element_length: 10.0, ..Default::default() },
        )
        .unwrap();
        assert_eq!(mesh.node_positions, vec![0.0, 10.0, 20.0, 30.0, 40.0]);
        assert_eq!(mesh.element_count(), 4);
        assert_eq!(mesh.support_node_indices, vec![0, 1, 2, 3, 4]);
    }

    #[test]
    fn mesh_halving() {
        let mesh = build_mesh(
            &DesignPoint::new(10.0, 20.0, 30.0, 0.45),
            &BridgeConfig { element_length: 5.0, ..Default::default() },
        )
        .unwrap();
        assert_eq!(mesh.element_count(), 8);
        assert_eq!(mesh.support_node_indices, vec![0, 2, 4, 6, 8]);
        for (a, b) in mesh.elements() {
            let len = mesh.node_positions[b] - mesh.node_positions[a];
            assert!((len - 5.0).abs() < 1e-12);
        }
    }

    #[test]
    fn mesh_rejects_coincident_piers() {
        let err = build_mesh(&DesignPoint::new(10.0, 10.0, 30.0, 0.45), &BridgeConfig::default());
        assert!(matches!(err, Err(Error::Validation { .. })));
    }

    #[test]
    fn mesh_invariants_on_irregular_piers() {
        let config = BridgeConfig::default();
        let mesh = build_mesh(&DesignPoint::new(7.31, 19.02, 33.7, 0.4), &config).unwrap();
        assert!(mesh.node_positions.windows(2).all(|w| w[0] < w[1]));
        for (a, b) in mesh.elements() {
            assert!(mesh.node_positions[b] - mesh.node_positions[a] <= config.element_length + 1e-12);
        }
        for (&i, x) in mesh.support_node_indices.iter().zip([0.0, 7.31, 19.02, 33.7, 40.0]) {
            assert_eq!(mesh.node_positions[i], x);
        }
    }

    #[test]
    fn simply_supported_udl_midspan_moment() {
        let mesh = Mesh::new(10.0, &[0.0, 10.0], 0.25).unwrap();
        let loads = BeamLoads { point_loads: vec![], udl: 1e4 };
        let sol = solve_static(&mesh, &section(), moduli(), &loads).unwrap();
        let mid = node_at(&mesh, 5.0);
        assert_relative_eq!(sol.moments[mid], 1e4 * 100.0 / 8.0, max_relative = 1e-9);
        assert!(sol.moments[0].abs() < 1e-6);
    }

    #[test]
    fn simply_supported_point_load_moment() {
        let mesh = Mesh::new(10.0, &[0.0, 10.0], 0.25).unwrap();
        let loads = BeamLoads {
            point_loads: vec![PointLoad { position: 5.0, magnitude: 1e5 }],
            udl: 0.0,
        };
        let sol = solve_static(&mesh, &section(), moduli(), &loads).unwrap();
        assert_relative_eq!(sol.moments[node_at(&mesh, 5.0)], 1e5 * 10.0 / 4.0, max_relative = 1e-9);
    }

    #[test]
    fn off_node_point_load_gives_exact_nodal_moments() {
        // coarse mesh, load between nodes; moments at nodes follow the statics
        let mesh = Mesh::new(10.0, &[0.0, 10.0], 2.5).unwrap();
        let (p, a) = (1e5, 3.3);
        let loads = BeamLoads {
            point_loads: vec![PointLoad { position: a, magnitude: p }],
            udl: 0.0,
        };
        let sol = solve_static(&mesh, &section(), moduli(), &loads).unwrap();
        let reaction_left = p * (10.0 - a) / 10.0;
        for (i, &x) in mesh.node_positions.iter().enumerate() {
            let exact = reaction_left * x - if x > a { p * (x - a) } else { 0.0 };
            assert!((sol.moments[i] - exact).abs() < 1e-6 * p, "x={x}");
        }
    }

    #[test]
    fn fewer_than_two_supports_is_singular() {
        let mesh = Mesh::new(10.0, &[5.0], 0.5).unwrap();
        let loads = BeamLoads { point_loads: vec![], udl: 1.0 };
        assert!(matches!(
            solve_static(&mesh, &section(), moduli(), &loads),
            Err(Error::Numerical(_))
        ));
    }

    #[test]
    fn load_off_the_beam_is_rejected() {
        let mesh = Mesh::new(10.0, &[0.0, 10.0], 0.5).unwrap();
        let loads = BeamLoads {
            point_loads: vec![PointLoad { position: 10.5, magnitude: 1.0 }],
            udl: 0.0,
        };
        assert!(solve_static(&mesh, &section(), moduli(), &loads).is_err());
    }

    #[test]
    fn superposition() {
        let config = BridgeConfig::default();
        let mesh = build_mesh(&DesignPoint::new(8.2, 21.5, 29.9, 0.4), &config).unwrap();
        let system = BeamSystem::new(&mesh, &section(), moduli()).unwrap();
        let a = BeamLoads {
            point_loads: vec![PointLoad { position: 3.3, magnitude: 4e5 }],
            udl: 0.0,
        };
        let b = BeamLoads {
            point_loads: vec![PointLoad { position: 17.77, magnitude: 2e5 }],
            udl: 1.2e5,
        };
        let both = BeamLoads {
            point_loads: [a.point_loads.clone(), b.point_loads.clone()].concat(),
            udl: 1.2e5,
        };
        let (sa, sb, sab) = (
            system.solve(&a).unwrap(),
            system.solve(&b).unwrap(),
            system.solve(&both).unwrap(),
        );
        let scale = sab.moments.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        for i in 0..mesh.node_count() {
            assert!((sa.moments[i] + sb.moments[i] - sab.moments[i]).abs() < 1e-9 * scale);
        }
    }

    fn no_load_config() -> BridgeConfig {
        BridgeConfig {
            load_model: LoadModel {
                axle_load: 0.0,
                udl: 0.0,
                include_self_weight: false,
                ..LoadModel::default()
            },
            ..BridgeConfig::default()
        }
    }

    #[test]
    fn envelope_without_load_is_zero() {
        let config = no_load_config();
        let point = DesignPoint::new(10.0, 20.0, 30.0, 0.45);
        let env = moment_envelope(&point, &config).unwrap();
        assert!(env.sagging.iter().chain(&env.hogging).all(|&m| m.abs() < 1e-6));
        assert_eq!(max_steel_stress(&point, &config).unwrap(), 0.0);
    }

    #[test]
    fn single_axle_envelope_on_single_span() {
        let config = BridgeConfig {
            total_length: 10.0,
            end_support_positions: [0.0, 10.0],
            load_model: LoadModel {
                axle_count: 1,
                axle_load: 1e5,
                udl: 0.0,
                include_self_weight: false,
                ..LoadModel::default()
            },
            ..BridgeConfig::default()
        };
        let mesh = Mesh::new(10.0, &[0.0, 10.0], 0.25).unwrap();
        let env = envelope_on_mesh(&mesh, &section(), &config).unwrap();
        let (imax, mmax) = env
            .sagging
            .iter()
            .enumerate()
            .fold((0, 0.0), |acc, (i, &m)| if m > acc.1 { (i, m) } else { acc });
        assert_relative_eq!(mmax, 1e5 * 10.0 / 4.0, max_relative = 1e-9);
        assert!((env.node_positions[imax] - 5.0).abs() < 1e-9);
    }

    #[test]
    fn envelope_dominates_single_positions() {
        let config = BridgeConfig::default();
        let point = DesignPoint::new(9.1, 22.4, 31.0, 0.38);
        let mesh = build_mesh(&point, &config).unwrap();
        let section = section_properties(&config, point.h).unwrap();
        let env = envelope_on_mesh(&mesh, &section, &config).unwrap();
        let system = BeamSystem::new(&mesh, &section, ElasticModuli::of_concrete(&config)).unwrap();
        let udl = distributed_load(&config, &section);
        for lead in [-2.0, 4.37, 15.0, 27.65, 39.0] {
            let sol = system
                .solve(&BeamLoads { point_loads: axle_loads_at(&config, lead), udl })
                .unwrap();
            for (i, &m) in sol.moments.iter().enumerate() {
                assert!(env.sagging[i] >= m - 1e-6);
                assert!(env.hogging[i] >= -m - 1e-6);
            }
        }
        assert!(env.sagging.iter().chain(&env.hogging).all(|&m| m >= 0.0));
    }

    #[test]
    fn symmetric_design_gives_symmetric_envelope() {
        let config = BridgeConfig::default();
        let env = moment_envelope(&DesignPoint::new(10.0, 20.0, 30.0, 0.45), &config).unwrap();
        let n = env.node_positions.len();
        let scale = env.sagging.iter().cloned().fold(0.0, f64::max);
        for i in 0..n {
            let j = n - 1 - i;
            assert!((env.node_positions[i] + env.node_positions[j] - 40.0).abs() < 1e-9);
            assert!((env.sagging[i] - env.sagging[j]).abs() < 1e-6 * scale);
            assert!((env.hogging[i] - env.hogging[j]).abs() < 1e-6 * scale);
        }
    }

    #[test]
    fn sweep_covers_entry_and_exit() {
        let config = BridgeConfig::default();
        let pos = sweep_positions(&config);
        assert_relative_eq!(pos[0], -4.8, max_relative = 1e-12);
        assert!((pos.last().unwrap() - 40.0).abs() < 1e-9);
        assert_eq!(axle_loads_at(&config, -4.7).len(), 1);
        assert!(axle_loads_at(&config, -5.0).is_empty());
        assert_eq!(axle_loads_at(&config, 10.0).len(), 4);
    }
}
