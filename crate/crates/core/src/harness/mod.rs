//! Experiment driver: synthetic regression data, projected-gradient
//! training of residual networks, approximation/estimation rate sweeps, and
//! JSON/CSV persistence.

pub mod data;
pub mod experiment;
pub mod io;
pub mod train;

pub use data::{gen_data, RegressionDataset};
pub use experiment::{
    approx_rate_experiment, cube_grid, empirical_risk, estimation_rate_experiment, l2_error, ApproxKind,
    ApproxRateParams, EstRateConfig, McEstimate, RatePoint, RateReport,
};
pub use io::{
    from_json, load_json, render_report_csv, save_json, to_json, write_report_csv,
    SCHEMA_ARCH, SCHEMA_CERTIFICATE, SCHEMA_CNN, SCHEMA_COMPLEXITY, SCHEMA_DATASET,
    SCHEMA_FNN, SCHEMA_LIPSCHITZ, SCHEMA_RATE_REPORT, SCHEMA_RIDGE, SCHEMA_TRAIN_CONFIG,
};
pub use train::{
    erm_train, gradient_check, random_init_like, random_small_cnn, ProjectionMode, TrainConfig,
    TrainOutcome,
};
