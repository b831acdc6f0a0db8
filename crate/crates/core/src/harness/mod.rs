//! Experiment orchestration: configuration, seeding, the two-timescale trial
//! loop, aggregation across trials and experiment output files.

mod config;
mod experiment;
mod output;
mod seed;
mod trial;

pub use config::{apply_override, CredoMode, EnvConfig, ExperimentConfig};
pub use experiment::{
    run_experiment, run_trials, summarize, BatchAggregate, Execution, ExperimentResult, Summary,
    TrialSummary,
};
pub use output::{
    checkpoint_path, read_csv, read_timeseries, timeseries_rows, write_csv, write_experiment,
    TimeseriesRow, CHECKPOINT_DIR, SUMMARY_FILE, TIMESERIES_FILE, TIMESERIES_HEADER,
};
pub use seed::{derive_seed, SeedLabel, TrialSeeds};
pub use trial::{run_trial, AgentBatch, BatchRecord, TrialCheckpoint, TrialRecord};
