//! Trial datasets: ingestion, precision/accuracy statistics, scatter export
//! and simulated replications.

mod anomalies;
mod scatter;
mod simulate;
mod stats;
mod trials;

pub use anomalies::note_anomalies;
pub use scatter::{export_scatter, scatter_csv, scatter_svg, write_svg, ScatterLayout};
pub use simulate::{
    run_simulated_experiment, Rig, RigConfig, SimulatedExperiment, TrialFailure, DEFAULT_POSITIONS, RIG_KEYS,
};
pub use stats::{percent_error, population_std, stats_report, Axis, AxisStats, StatsReport};
pub use trials::{load_trials, PositionTrials, TrialTable};
