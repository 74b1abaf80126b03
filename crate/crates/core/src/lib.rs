//! Compilation of block-sparse fully-connected ReLU networks into
//! function-identical residual convolutional networks, with certified
//! architecture and norm bounds, capacity functionals, covering-number and
//! estimation-error bounds, and constructive approximators for smooth and
//! ridge-combination targets.

pub mod approx;
pub mod cnn;
pub mod compiler;
pub mod complexity;
pub mod error;
pub mod fnn;
pub mod harness;
pub mod sample;
pub mod tensor;

pub use approx::{
    barron_fnn, by_name, fit_barron_ridges, hat_exact, hat_network, holder_cnn,
    holder_error_budget, holder_fnn, holder_params, lattice, mult_network, q_network,
    taylor_exact, HolderBuildParams, Ridge, RidgeSpec, SmoothFn, TaylorOracle,
};
pub use cnn::{
    clip_output, cnn_eval, validate_cnn, CnnValidationReport, ConvLayer, MaskVector,
    ResNetCnn, ResidualBlock,
};
pub use compiler::{
    compile_constant_depth, compile_fnn_to_cnn, compile_with_options, divide_block_grouped,
    divide_block_masked, embed_filter, parallel_concat, relu_double, ridge_conv, ridge_depth,
    BoundPair, CompilationCertificate, CompileOptions, ConvStack, CountPair, DivisionSemantics,
};
pub use complexity::{
    block_growth, complexity_report, covering_log, estimation_bound, lambda1, lambda2,
    lipschitz_check, rate_balance, rate_exponent_rational, varrho_prefix, ArchSummary,
    ComplexityReport, LipschitzReport,
};
pub use error::{CoreError, CoreResult};
pub use harness::{
    approx_rate_experiment, cube_grid, empirical_risk, erm_train, estimation_rate_experiment, from_json,
    gen_data, gradient_check, l2_error, load_json, random_init_like, random_small_cnn,
    render_report_csv, save_json, to_json, write_report_csv, ApproxKind, ApproxRateParams,
    EstRateConfig, McEstimate, ProjectionMode, RatePoint, RateReport, RegressionDataset,
    TrainConfig, TrainOutcome, SCHEMA_ARCH, SCHEMA_CERTIFICATE, SCHEMA_CNN, SCHEMA_COMPLEXITY,
    SCHEMA_DATASET, SCHEMA_FNN, SCHEMA_LIPSCHITZ, SCHEMA_RATE_REPORT, SCHEMA_RIDGE,
    SCHEMA_TRAIN_CONFIG,
};

pub use fnn::{
    fnn_eval, rescale_fnn, validate_fnn, BlockSparseFnn, DomainPolicy, FnnBlock, FnnLayer,
    FnnValidationReport,
};
pub use sample::{random_fnn, random_inclass_cnn, random_point, FnnSpec};
pub use tensor::{
    conv_apply, conv_apply_padded, conv_layer, conv_layer_padded, fc_layer, nnz, op_norm_bound,
    sup_norm_vec, Activation, ConvFilter, DenseAffine, PaddingMode, Signal,
};
