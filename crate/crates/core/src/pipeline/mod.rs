//! The end-to-end study: datasets from the beam simulator, the surrogate
//! campaign over training sizes, limit-state classification, Monte Carlo
//! failure probability and report emission.

mod campaign;
mod dataset;
mod reliability;
mod report;
mod surrogate;

pub use campaign::{
    run_campaign, run_campaign_with, validation_overlap, CampaignCell, CampaignOutcome,
    CampaignPlan, CellStatus,
};
pub use dataset::{
    generate_dataset, generate_with, read_points_csv, write_points_csv, BeamSimulator, Dataset,
    DatasetMetadata, FnSimulator, Simulator,
};
pub use reliability::{
    classify, failure_probability, ClassificationResult, Label, PfEstimate, MIN_MC_SAMPLES,
};
pub use report::{
    export_document, export_report, parse_report_json, write_report, Report, ReportDocument,
    METRICS,
};
pub use surrogate::{
    fit_surrogate, FittedSurrogate, FnSurrogate, RosterEntry, Surrogate, SurrogateModel,
    SurrogateSettings,
};
