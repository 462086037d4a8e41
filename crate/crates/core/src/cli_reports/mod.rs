//! Experiment configuration, execution with exit codes and manifests, and
//! deterministic SVG plots of the resulting tables.

mod config;
mod plot;
mod run;

pub use config::{
    CalibrateDeltaParams, ExperimentConfig, Format, GraphManifoldParams, GridConfig, GroupParams, InsertTuning,
    LemmaTrialParams, OutputConfig, PinchGeometry, PinchParams, SolverConfig, SpectrumParams, TheoremAParams, TrialSpec,
};
pub use plot::{plot, PlotKind};
pub use run::{
    config_hash, exit_code, run, run_config, write_atomic, Check, RunManifest, RunOutcome, RunOverrides, EXIT_INVALID,
    EXIT_OK, EXIT_REFUTED, EXIT_SOLVER,
};
