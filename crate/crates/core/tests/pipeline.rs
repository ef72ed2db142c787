use rcbridge::beam_model::{BridgeConfig, DesignPoint};
use rcbridge::doe::InputDistribution;
use rcbridge::fe_solver::max_steel_stress;
use rcbridge::metrics::evaluate;
use rcbridge::pipeline::{
    classify, failure_probability, fit_surrogate, generate_dataset, run_campaign_with, CampaignPlan,
    CellStatus, FnSimulator, FnSurrogate, Label, RosterEntry, Surrogate, SurrogateSettings,
};
use rcbridge::svr::grid;

#[test]
fn beam_dataset_is_positive_reproducible_and_matches_direct_runs() {
    let config = BridgeConfig::default();
    let a = generate_dataset(50, 99, &config).unwrap();
    assert!(a.outputs.iter().all(|q| q.is_finite() && *q > 0.0));
    for i in [0, 17, 49] {
        let p = &a.inputs()[i];
        let direct = max_steel_stress(&DesignPoint::new(p[0], p[1], p[2], p[3]), &config).unwrap();
        assert_eq!(a.outputs[i], direct);
    }
    let b = generate_dataset(50, 99, &config).unwrap();
    assert_eq!(a.to_csv_string().unwrap(), b.to_csv_string().unwrap());
    assert_eq!(a.metadata.config_hash, config.hash());

    // surrogate labels agree with the simulator wherever the error is below the margin
    let fitted = fit_surrogate(
        RosterEntry::Kriging { degree: 2 },
        a.distribution(),
        a.inputs(),
        &a.outputs,
        &SurrogateSettings::default(),
        &a.metadata.config_hash,
    )
    .unwrap();
    let probe = generate_dataset(20, 1234, &config).unwrap();
    let mut sorted = probe.outputs.clone();
    sorted.sort_by(f64::total_cmp);
    let limit = sorted[10];
    let labels = classify(&fitted, probe.inputs(), limit).unwrap();
    let mut guarded = 0;
    for ((x, q), label) in probe.inputs().iter().zip(&probe.outputs).zip(&labels.labels) {
        let err = (fitted.predict_mean(x).unwrap() - q).abs();
        if err < (limit - q).abs() {
            assert_eq!(*label, Label::of(limit - q), "{x:?}");
            guarded += 1;
        }
    }
    assert!(guarded >= 10, "only {guarded} points cleared the margin");
    assert!(labels.safe_count() > 0 && labels.failure_count() > 0);
}

#[test]
fn failure_probability_of_a_known_tail() {
    let dist = InputDistribution::default();
    let model = FnSurrogate::new("h", |x: &[f64]| x[3] * 1e9);
    // P[h >= 0.51] with h ~ U[0.3, 0.6]
    let exact = 0.3;
    let est = failure_probability(&model, &dist, 0.51e9, 100_000, 5).unwrap();
    let sd = (exact * (1.0 - exact) / 1e5_f64).sqrt();
    assert!((est.pf - exact).abs() < 4.0 * sd, "{}", est.pf);
    let again = failure_probability(&model, &dist, 0.51e9, 100_000, 5).unwrap();
    assert_eq!(est, again);
    assert!(failure_probability(&model, &dist, 0.51e9, 999, 5).is_err());
}

#[test]
fn metrics_on_q_and_on_the_limit_state_coincide() {
    let limit = 4e8;
    let q: Vec<f64> = (0..200).map(|i| 3e8 + 1.7e6 * i as f64 + 1e5 * (i as f64).sin()).collect();
    let q_hat: Vec<f64> = q.iter().enumerate().map(|(i, v)| v + 2e6 * (0.3 * i as f64).cos()).collect();
    let g: Vec<f64> = q.iter().map(|v| limit - v).collect();
    let g_hat: Vec<f64> = q_hat.iter().map(|v| limit - v).collect();
    let a = evaluate(&q, &q_hat).unwrap();
    let b = evaluate(&g, &g_hat).unwrap();
    // the only difference is rounding in L - q
    let ulp = 4.0 * f64::EPSILON * 1e9;
    assert!((a.mae - b.mae).abs() <= ulp);
    assert!((a.maxae - b.maxae).abs() <= ulp);
    assert!((a.rmse - b.rmse).abs() <= ulp);
    assert!((a.r2 - b.r2).abs() <= 1e-12);
}

fn cubic(x: &[f64]) -> f64 {
    1e8 * (2.0 + 0.05 * x[0] - 0.002 * x[1] * x[2] + 3.0 * x[3].powi(3) + 1e-4 * x[0] * x[1] * x[3])
}

#[test]
fn injected_cubic_target_is_reproduced_by_cubic_trend_kriging() {
    let plan = CampaignPlan { roster: vec![RosterEntry::Kriging { degree: 3 }], ..CampaignPlan::default() };
    let sim = FnSimulator::new("cubic", cubic);
    let outcome = run_campaign_with(&plan, &sim).unwrap();
    assert_eq!(outcome.cells.len(), 6);
    for cell in &outcome.cells {
        assert_eq!(cell.status, CellStatus::Ok);
        let r2 = cell.scores.unwrap().r2;
        assert!((1.0 - r2).abs() <= 1e-6, "n={}: {r2}", cell.training_size);
    }
    let r2 = &outcome.report().unwrap().series["r2"];
    assert_eq!(r2.lines().next(), Some("training_size,kriging_p3"));
    assert_eq!(r2.lines().count(), 7);
}

#[test]
fn small_campaign_reports_are_byte_identical_across_runs() {
    let plan = CampaignPlan {
        training_sizes: vec![30, 20],
        validation_size: 15,
        roster: vec![RosterEntry::Kriging { degree: 1 }, RosterEntry::Pce, RosterEntry::Svr],
        settings: SurrogateSettings {
            svr_grid: Some(grid(&[1.0, 10.0], &[0.05], &[0.5, 1.0])),
            ..SurrogateSettings::default()
        },
        ..CampaignPlan::default()
    };
    let sim = FnSimulator::new("smooth", |x: &[f64]| 1e8 * (1.0 + (x[0] / 15.0).sin() + x[3] / x[1]));
    let a = run_campaign_with(&plan, &sim).unwrap().report().unwrap();
    let b = run_campaign_with(&plan, &sim).unwrap().report().unwrap();
    assert_eq!(a, b);
    let sizes: Vec<&str> = a.series["r2"].lines().skip(1).map(|l| l.split(',').next().unwrap()).collect();
    assert_eq!(sizes, ["20", "30"]);
}
