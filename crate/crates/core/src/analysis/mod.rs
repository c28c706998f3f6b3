//! Studies, probes and report emission.

pub mod config;
pub mod pair;
pub mod probe;
pub mod report;
pub mod stats;
pub mod study;
pub mod wasserstein;

pub use config::{ExperimentConfig, FeedbackKind, FieldSpec, Preset};
pub use pair::{run_pair_comparison, PairReport};
pub use probe::{
    random_density, regularity_probe, time_regularity_probe, ProbeReport, ScaleProbe, TimeLevel,
    TimeRegularity,
};
pub use report::{emit_report, emit_two_column, number, Emitted, Format, Report, ReportMeta};
pub use stats::{weighted_line_fit, SlopeFit};
pub use study::{
    default_delta_max, draw_pair_samples, run_convergence_study, solve_configured, study_seed,
    ConvergenceReport, ConvergenceRow,
};
pub use wasserstein::{wasserstein1_circle, CircleMeasure};
