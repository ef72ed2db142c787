use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;

use rcbridge::beam_model::BridgeConfig;
use rcbridge::doe::{lhs_sample, InputDistribution};
use rcbridge::metrics::evaluate;
use rcbridge::pipeline::{
    classify, export_document, failure_probability, fit_surrogate, parse_report_json,
    read_points_csv, run_campaign, write_points_csv, write_report, BeamSimulator, CampaignPlan,
    Dataset, FittedSurrogate, RosterEntry, Simulator, Surrogate, SurrogateSettings,
};
use rcbridge::{Error, Result};

#[derive(Parser)]
#[command(name = "rcbridge", version, about = "Surrogate models for rebar stress in a four-span RC bridge deck")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Family {
    Kriging,
    Pce,
    Svr,
}

#[derive(Subcommand)]
enum Command {
    /// Latin Hypercube design written as CSV.
    Doe {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// JSON list of [lower, upper] pairs, or a path to one. Defaults to the bridge variables.
        #[arg(long)]
        bounds: Option<String>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Runs the beam model at every point of a CSV.
    Simulate {
        #[arg(long)]
        points: PathBuf,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Fits one surrogate to a dataset CSV.
    Train {
        #[arg(long)]
        data: PathBuf,
        #[arg(long, value_enum)]
        model: Family,
        #[arg(long, default_value_t = 0, value_parser = clap::value_parser!(u8).range(0..=4))]
        trend_degree: u8,
        /// Ridge penalty on the Kriging trend coefficients.
        #[arg(long)]
        ridge: Option<f64>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Surrogate predictions at every point of a CSV.
    Predict {
        #[arg(long)]
        model_file: PathBuf,
        #[arg(long)]
        points: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Validation metrics of a surrogate on a dataset CSV.
    Evaluate {
        #[arg(long)]
        model_file: PathBuf,
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// The model comparison over training sizes.
    Campaign {
        #[arg(long)]
        config: Option<PathBuf>,
        /// Full campaign plan as JSON; `--config` and `--seed` override its fields.
        #[arg(long)]
        plan: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Safe/failure label per point from `g = L - q_hat`.
    Classify {
        #[arg(long)]
        model_file: PathBuf,
        #[arg(long)]
        points: PathBuf,
        /// Stress limit in Pa; defaults to the configured limit.
        #[arg(long)]
        limit: Option<f64>,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Monte Carlo failure probability on a surrogate.
    Pf {
        #[arg(long)]
        model_file: PathBuf,
        #[arg(long)]
        limit: Option<f64>,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, default_value_t = 100_000)]
        n_mc: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Re-emits the CSV tables of a JSON report.
    Report {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|source| Error::Io { path: path.to_path_buf(), source })
}

fn write(path: &Path, text: &str) -> Result<()> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent)
            .map_err(|source| Error::Io { path: parent.to_path_buf(), source })?;
    }
    std::fs::write(path, text).map_err(|source| Error::Io { path: path.to_path_buf(), source })
}

fn load_config(path: Option<&Path>) -> Result<BridgeConfig> {
    match path {
        Some(p) => BridgeConfig::from_json_file(p),
        None => Ok(BridgeConfig::default()),
    }
}

fn load_model(path: &Path) -> Result<FittedSurrogate> {
    FittedSurrogate::from_json(&read(path)?)
}

fn parse_bounds(arg: &str) -> Result<InputDistribution> {
    let text = if Path::new(arg).is_file() { read(Path::new(arg))? } else { arg.to_string() };
    let bounds: Vec<[f64; 2]> = serde_json::from_str(&text)?;
    let defaults = InputDistribution::default();
    if bounds.len() == defaults.dim() {
        InputDistribution::new(defaults.names, bounds)
    } else {
        InputDistribution::from_bounds(bounds)
    }
}

fn model_points(model: &FittedSurrogate, path: &Path) -> Result<(Vec<String>, Vec<Vec<f64>>)> {
    let (names, points) = read_points_csv(path)?;
    let d = model.model.distribution().dim();
    if names.len() != d {
        return Err(Error::validation("points", format!("expected {d} columns, found {}", names.len())));
    }
    Ok((names, points))
}

fn default_limit(limit: Option<f64>, config: Option<&Path>) -> Result<f64> {
    match limit {
        Some(l) => Ok(l),
        None => Ok(load_config(config)?.stress_limit),
    }
}

fn run(cli: Cli) -> Result<serde_json::Value> {
    match cli.command {
        Command::Doe { n, seed, bounds, out } => {
            let dist = match bounds {
                Some(b) => parse_bounds(&b)?,
                None => InputDistribution::default(),
            };
            let s = lhs_sample(n, &dist, seed)?;
            write_points_csv(&out, &dist.names, &s.points)?;
            Ok(json!({ "points": n, "seed": seed, "out": out }))
        }
        Command::Simulate { points, config, seed, out } => {
            let config = load_config(config.as_deref())?;
            let (names, pts) = read_points_csv(&points)?;
            let defaults = InputDistribution::default();
            if names != defaults.names {
                return Err(Error::validation("points", "columns must be x1,x2,x3,h"));
            }
            let sim = BeamSimulator::new(config)?;
            let outputs = pts.iter().map(|p| sim.evaluate(p)).enumerate().map(|(i, r)| {
                r.map_err(|e| Error::numerical(format!("simulation failed at point #{i} {:?}: {e}", pts[i])))
            });
            let outputs = outputs.collect::<Result<Vec<f64>>>()?;
            let samples = rcbridge::doe::SampleSet { points: pts, seed, distribution: defaults.clone() };
            let metadata = rcbridge::pipeline::DatasetMetadata {
                config_hash: sim.config_hash(),
                seed,
                generator: rcbridge::doe::GENERATOR.into(),
                size: outputs.len(),
                distribution: defaults,
                simulator: sim.settings(),
                tool_version: env!("CARGO_PKG_VERSION").into(),
            };
            let ds = Dataset::new(samples, outputs, metadata)?;
            ds.write(&out)?;
            Ok(json!({ "rows": ds.len(), "config_hash": ds.metadata.config_hash, "out": out }))
        }
        Command::Train { data, model, trend_degree, ridge, seed, out } => {
            let ds = Dataset::read(&data)?;
            let mut settings = SurrogateSettings::default();
            settings.kriging.ridge = ridge;
            if let Some(seed) = seed {
                settings.kriging.seed = seed;
                settings.svr_seed = seed;
            }
            let entry = match model {
                Family::Kriging => RosterEntry::Kriging { degree: trend_degree as usize },
                Family::Pce => RosterEntry::Pce,
                Family::Svr => RosterEntry::Svr,
            };
            let fitted = fit_surrogate(
                entry,
                ds.distribution(),
                ds.inputs(),
                &ds.outputs,
                &settings,
                &ds.metadata.config_hash,
            )?;
            write(&out, &fitted.to_json()?)?;
            Ok(json!({ "model": fitted.id, "training_size": ds.len(), "ridge": fitted.ridge, "out": out }))
        }
        Command::Predict { model_file, points, out } => {
            let model = load_model(&model_file)?;
            let (mut names, pts) = model_points(&model, &points)?;
            let q = pts.iter().map(|p| model.predict_mean(p)).collect::<Result<Vec<f64>>>()?;
            names.push("q_hat".into());
            let rows: Vec<Vec<f64>> =
                pts.iter().zip(&q).map(|(p, v)| p.iter().copied().chain([*v]).collect()).collect();
            write_points_csv(&out, &names, &rows)?;
            Ok(json!({ "model": model.id, "points": rows.len(), "out": out }))
        }
        Command::Evaluate { model_file, data, out } => {
            let model = load_model(&model_file)?;
            let ds = Dataset::read(&data)?;
            let pred = ds.inputs().iter().map(|p| model.predict_mean(p)).collect::<Result<Vec<f64>>>()?;
            let scores = evaluate(&ds.outputs, &pred)?;
            let value = json!({ "model": model.id, "n": ds.len(), "scores": scores });
            if let Some(out) = out {
                write(&out, &serde_json::to_string_pretty(&value)?)?;
            }
            Ok(value)
        }
        Command::Campaign { config, plan, seed, out } => {
            let mut p = match plan {
                Some(path) => serde_json::from_str::<CampaignPlan>(&read(&path)?)?,
                None => CampaignPlan::default(),
            };
            if let Some(c) = config {
                p.config = BridgeConfig::from_json_file(&c)?;
            }
            if let Some(s) = seed {
                p.seed = s;
            }
            let outcome = run_campaign(&p)?;
            let report = outcome.report()?;
            write_report(&out, &report)?;
            write(&out.join("plan.json"), &serde_json::to_string_pretty(&p)?)?;
            outcome.validation.write(&out.join("data").join("validation.csv"))?;
            for ds in &outcome.training {
                ds.write(&out.join("data").join(format!("train_{}.csv", ds.len())))?;
            }
            for fitted in outcome.models.iter().flatten() {
                let name = format!("{}_n{}.json", fitted.id, fitted.training_size);
                write(&out.join("models").join(name), &fitted.to_json()?)?;
            }
            let failed = outcome.cells.iter().filter(|c| c.scores.is_none()).count();
            Ok(json!({ "rows": outcome.cells.len(), "failed_cells": failed, "out": out }))
        }
        Command::Classify { model_file, points, limit, config, out } => {
            let limit = default_limit(limit, config.as_deref())?;
            let model = load_model(&model_file)?;
            let (_, pts) = model_points(&model, &points)?;
            let result = classify(&model, &pts, limit)?;
            write(&out, &serde_json::to_string_pretty(&result)?)?;
            Ok(json!({
                "model": result.surrogate_id,
                "limit": limit,
                "safe": result.safe_count(),
                "failure": result.failure_count(),
                "out": out,
            }))
        }
        Command::Pf { model_file, limit, config, n_mc, seed } => {
            let limit = default_limit(limit, config.as_deref())?;
            let model = load_model(&model_file)?;
            let est = failure_probability(&model, model.model.distribution(), limit, n_mc, seed)?;
            Ok(json!({ "model": model.id, "limit": limit, "estimate": est }))
        }
        Command::Report { input, out } => {
            let doc = parse_report_json(&read(&input)?)?;
            let report = export_document(&doc)?;
            write_report(&out, &report)?;
            Ok(json!({ "rows": doc.rows.len(), "out": out }))
        }
    }
}

fn error_json(e: &Error) -> serde_json::Value {
    let mut v = json!({ "error": e.kind(), "message": e.to_string() });
    if let Error::Validation { field, .. } = e {
        v["field"] = json!(field);
    }
    v
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(summary) => {
            println!("{summary}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("{}", error_json(&e));
            ExitCode::from(match e {
                Error::Validation { .. } => 2,
                Error::Numerical(_) => 3,
                _ => 1,
            })
        }
    }
}
