use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::beam_model::{BridgeConfig, DesignPoint};
use crate::doe::{lhs_sample, InputDistribution, SampleSet, GENERATOR};
use crate::fe_solver::max_steel_stress;
use crate::{Error, Result};

/// Deterministic map from a design point to the response `q`.
pub trait Simulator: Sync {
    fn evaluate(&self, point: &[f64]) -> Result<f64>;

    /// Identifies the configuration the responses depend on.
    fn config_hash(&self) -> String;

    /// Solver settings recorded next to generated datasets.
    fn settings(&self) -> serde_json::Value {
        serde_json::Value::Null
    }
}

/// The Timoshenko beam model: `q(x)` is the maximum rebar tensile stress in Pa.
#[derive(Clone, Debug)]
pub struct BeamSimulator {
    pub config: BridgeConfig,
}

impl BeamSimulator {
    pub fn new(config: BridgeConfig) -> Result<Self> {
        config.validate()?;
        Ok(Self { config })
    }
}

impl Simulator for BeamSimulator {
    fn evaluate(&self, point: &[f64]) -> Result<f64> {
        max_steel_stress(&DesignPoint::from_slice(point)?, &self.config)
    }

    fn config_hash(&self) -> String {
        self.config.hash()
    }

    fn settings(&self) -> serde_json::Value {
        serde_json::json!({
            "solver": "timoshenko-beam-linear-elastic",
            "element_length": self.config.element_length,
            "sweep_step": self.config.load_model.sweep_step,
            "stress_model": "cracked-transformed-section",
        })
    }
}

/// A closed-form stand-in for the beam model.
pub struct FnSimulator<F> {
    pub label: String,
    pub f: F,
}

impl<F> FnSimulator<F>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    pub fn new(label: impl Into<String>, f: F) -> Self {
        Self { label: label.into(), f }
    }
}

impl<F> Simulator for FnSimulator<F>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    fn evaluate(&self, point: &[f64]) -> Result<f64> {
        Ok((self.f)(point))
    }

    fn config_hash(&self) -> String {
        format!("fn:{}", self.label)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DatasetMetadata {
    pub config_hash: String,
    pub seed: u64,
    pub generator: String,
    pub size: usize,
    pub distribution: InputDistribution,
    pub simulator: serde_json::Value,
    pub tool_version: String,
}

/// Design points and the simulated response `q` at each of them.
#[derive(Clone, Debug, PartialEq)]
pub struct Dataset {
    pub samples: SampleSet,
    /// `q` in Pa; the limit-state value is `L - q`.
    pub outputs: Vec<f64>,
    pub metadata: DatasetMetadata,
}

impl Dataset {
    pub fn new(samples: SampleSet, outputs: Vec<f64>, metadata: DatasetMetadata) -> Result<Self> {
        if samples.len() != outputs.len() {
            return Err(Error::validation(
                "dataset",
                format!("{} points vs {} outputs", samples.len(), outputs.len()),
            ));
        }
        if outputs.iter().any(|q| !(q.is_finite() && *q >= 0.0)) {
            return Err(Error::validation("q", "every response must be finite and >= 0"));
        }
        Ok(Self { samples, outputs, metadata })
    }

    pub fn len(&self) -> usize {
        self.outputs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.outputs.is_empty()
    }

    pub fn inputs(&self) -> &[Vec<f64>] {
        &self.samples.points
    }

    pub fn distribution(&self) -> &InputDistribution {
        &self.samples.distribution
    }

    /// `g = L - q` for each point.
    pub fn limit_state(&self, limit: f64) -> Vec<f64> {
        self.outputs.iter().map(|q| limit - q).collect()
    }

    pub fn to_csv_string(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let mut header = self.samples.distribution.names.clone();
        header.push("q".into());
        w.write_record(&header)?;
        for (x, q) in self.inputs().iter().zip(&self.outputs) {
            let mut rec: Vec<String> = x.iter().map(|v| v.to_string()).collect();
            rec.push(q.to_string());
            w.write_record(&rec)?;
        }
        let bytes = w.into_inner().map_err(|e| Error::numerical(e.to_string()))?;
        Ok(String::from_utf8(bytes).expect("csv is utf-8"))
    }

    /// Writes the CSV and its JSON sidecar (see [`Dataset::sidecar_path`]).
    pub fn write(&self, csv_path: &Path) -> Result<()> {
        write_file(csv_path, &self.to_csv_string()?)?;
        let meta = serde_json::to_string_pretty(&self.metadata)?;
        write_file(&Self::sidecar_path(csv_path), &meta)
    }

    pub fn sidecar_path(csv_path: &Path) -> PathBuf {
        csv_path.with_extension("meta.json")
    }

    /// Reads a dataset CSV. Metadata comes from the sidecar when present;
    /// otherwise the default input distribution is assumed.
    pub fn read(csv_path: &Path) -> Result<Self> {
        let sidecar = Self::sidecar_path(csv_path);
        let metadata = if sidecar.exists() {
            let text = read_file(&sidecar)?;
            Some(serde_json::from_str::<DatasetMetadata>(&text)?)
        } else {
            None
        };
        let (header, rows) = read_table(csv_path)?;
        if header.last().map(String::as_str) != Some("q") {
            return Err(Error::validation("csv", "last column of a dataset must be `q`"));
        }
        let d = header.len() - 1;
        let distribution = match &metadata {
            Some(m) => m.distribution.clone(),
            None => InputDistribution::default(),
        };
        if distribution.dim() != d {
            return Err(Error::validation(
                "csv",
                format!("{d} input columns for a {}-d distribution", distribution.dim()),
            ));
        }
        let inputs: Vec<Vec<f64>> = rows.iter().map(|r| r[..d].to_vec()).collect();
        let outputs: Vec<f64> = rows.iter().map(|r| r[d]).collect();
        let metadata = metadata.unwrap_or_else(|| DatasetMetadata {
            config_hash: "unknown".into(),
            seed: 0,
            generator: "external".into(),
            size: outputs.len(),
            distribution: distribution.clone(),
            simulator: serde_json::Value::Null,
            tool_version: env!("CARGO_PKG_VERSION").into(),
        });
        let samples = SampleSet { points: inputs, seed: metadata.seed, distribution };
        Dataset::new(samples, outputs, metadata)
    }
}

pub(crate) fn write_file(path: &Path, text: &str) -> Result<()> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent).map_err(|source| Error::Io {
            path: parent.to_path_buf(),
            source,
        })?;
    }
    std::fs::write(path, text).map_err(|source| Error::Io { path: path.to_path_buf(), source })
}

pub(crate) fn read_file(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|source| Error::Io { path: path.to_path_buf(), source })
}

fn read_table(path: &Path) -> Result<(Vec<String>, Vec<Vec<f64>>)> {
    let text = read_file(path)?;
    let mut reader = csv::ReaderBuilder::new().has_headers(true).from_reader(text.as_bytes());
    let header: Vec<String> = reader.headers()?.iter().map(|h| h.trim().to_string()).collect();
    if header.is_empty() {
        return Err(Error::validation("csv", "missing header"));
    }
    let mut rows = Vec::new();
    for (line, rec) in reader.records().enumerate() {
        let rec = rec?;
        let row = rec
            .iter()
            .map(|v| {
                v.trim().parse::<f64>().map_err(|_| {
                    Error::validation("csv", format!("row {}: `{v}` is not a number", line + 1))
                })
            })
            .collect::<Result<Vec<f64>>>()?;
        if row.len() != header.len() {
            return Err(Error::validation("csv", format!("row {} has {} fields", line + 1, row.len())));
        }
        rows.push(row);
    }
    Ok((header, rows))
}

/// Reads a points CSV; the header names the columns.
pub fn read_points_csv(path: &Path) -> Result<(Vec<String>, Vec<Vec<f64>>)> {
    read_table(path)
}

pub fn write_points_csv(path: &Path, names: &[String], points: &[Vec<f64>]) -> Result<()> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(names)?;
    for p in points {
        w.write_record(p.iter().map(|v| v.to_string()))?;
    }
    let bytes = w.into_inner().map_err(|e| Error::numerical(e.to_string()))?;
    write_file(path, &String::from_utf8(bytes).expect("csv is utf-8"))
}

/// Evaluates `simulator` at every point; results are keyed by index so the
/// output order does not depend on scheduling.
pub(crate) fn simulate_points(simulator: &dyn Simulator, points: &[Vec<f64>]) -> Result<Vec<f64>> {
    let results: Vec<Result<f64>> = points.par_iter().map(|p| simulator.evaluate(p)).collect();
    results
        .into_iter()
        .enumerate()
        .map(|(i, r)| {
            r.map_err(|e| {
                Error::numerical(format!("simulation failed at point #{i} {:?}: {e}", points[i]))
            })
        })
        .collect()
}

/// LHS design of size `n` evaluated with `simulator`.
pub fn generate_with(
    simulator: &dyn Simulator,
    dist: &InputDistribution,
    n: usize,
    seed: u64,
) -> Result<Dataset> {
    let samples = lhs_sample(n, dist, seed)?;
    let outputs = simulate_points(simulator, &samples.points)?;
    let metadata = DatasetMetadata {
        config_hash: simulator.config_hash(),
        seed,
        generator: GENERATOR.into(),
        size: n,
        distribution: dist.clone(),
        simulator: simulator.settings(),
        tool_version: env!("CARGO_PKG_VERSION").into(),
    };
    Dataset::new(samples, outputs, metadata)
}

/// LHS design over the default input distribution, evaluated with the beam model.
pub fn generate_dataset(n: usize, seed: u64, config: &BridgeConfig) -> Result<Dataset> {
    let simulator = BeamSimulator::new(config.clone())?;
    generate_with(&simulator, &InputDistribution::default(), n, seed)
}
