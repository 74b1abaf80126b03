//! Command-line driver: compiles block-sparse rectifier networks into
//! residual CNNs, verifies compiled models against their sources, evaluates
//! capacity functionals and estimation bounds, builds constructive
//! approximators, runs rate experiments, and certifies parameter-Lipschitz
//! bounds. All models and reports are schema-versioned JSON; rate sweeps
//! additionally emit CSV with columns `sweep_var,seed,error,runtime_s`.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rescnn_core::{
    approx_rate_experiment, by_name, compile_constant_depth, compile_fnn_to_cnn, complexity_report,
    cnn_eval, cube_grid, estimation_bound, estimation_rate_experiment, fit_barron_ridges, fnn_eval,
    holder_cnn, holder_error_budget, holder_fnn, lipschitz_check, load_json, random_point,
    save_json, write_report_csv, ApproxKind, ApproxRateParams, ArchSummary, BlockSparseFnn,
    CompilationCertificate, CoreError, CoreResult, EstRateConfig, ProjectionMode, RateReport,
    ResNetCnn, TaylorOracle, SCHEMA_ARCH, SCHEMA_CERTIFICATE, SCHEMA_CNN, SCHEMA_COMPLEXITY,
    SCHEMA_FNN, SCHEMA_LIPSCHITZ, SCHEMA_RATE_REPORT, SCHEMA_RIDGE,
};

/// Environment variable naming the worker thread count; the `--threads` flag
/// overrides it.
const THREADS_ENV: &str = "RESCNN_THREADS";

#[derive(Parser)]
#[command(
    name = "rescnn",
    version,
    about = "Compile block-sparse ReLU networks to residual CNNs with certified bounds,\n\
             evaluate complexity functionals, build approximators, and run rate experiments."
)]
struct Cli {
    /// Worker threads (overrides the RESCNN_THREADS environment variable).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compile a block-sparse network into a function-identical residual CNN.
    Compile(CompileArgs),
    /// Check a compiled CNN against its source network on random points.
    Verify(VerifyArgs),
    /// Evaluate capacity functionals, covering numbers, and the estimation bound.
    Complexity(ComplexityArgs),
    /// Build a constructive approximator for a named target function.
    #[command(subcommand)]
    Approx(ApproxCommand),
    /// Run a rate-experiment sweep and write CSV/JSON reports.
    #[command(subcommand)]
    Experiment(ExperimentCommand),
    /// Certify the parameter-perturbation Lipschitz bound empirically.
    Lipschitz(LipschitzArgs),
}

#[derive(Args)]
struct CompileArgs {
    /// Source block-sparse network (JSON, schema block-sparse-fnn/v1).
    #[arg(long = "in")]
    input: PathBuf,
    /// Compiled CNN output path (JSON, schema resnet-cnn/v1).
    #[arg(long = "out")]
    output: PathBuf,
    /// Filter size K, between 2 and the input dimension.
    #[arg(long)]
    filter_size: usize,
    /// Divide every residual block to this constant depth, producing a
    /// masked network.
    #[arg(long)]
    constant_depth: Option<usize>,
    /// Certificate output path (default: output path with extension
    /// `cert.json`).
    #[arg(long)]
    certificate: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    /// Source block-sparse network (JSON).
    #[arg(long)]
    fnn: PathBuf,
    /// Compiled CNN (JSON).
    #[arg(long)]
    cnn: PathBuf,
    /// Number of random evaluation points.
    #[arg(long, default_value_t = 200)]
    points: usize,
    /// Seed for the evaluation points.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Largest allowed relative deviation.
    #[arg(long, default_value_t = 1e-9)]
    tolerance: f64,
}

#[derive(Args)]
struct ComplexityArgs {
    /// Architecture summary (JSON, schema arch-summary/v1).
    #[arg(long, conflicts_with = "model", required_unless_present = "model")]
    arch: Option<PathBuf>,
    /// Concrete CNN model (JSON); its architecture summary is derived.
    #[arg(long)]
    model: Option<PathBuf>,
    /// Covering radius for the log-covering-number term.
    #[arg(long, default_value_t = 0.01)]
    eps: f64,
    /// Treat the architecture as masked with this constant block depth.
    #[arg(long, value_name = "BLOCK_DEPTH")]
    masked: Option<usize>,
    /// Report output path (JSON, schema complexity-report/v1).
    #[arg(long = "out")]
    output: Option<PathBuf>,
    /// Sample size: also evaluate the estimation-error bound at this N.
    #[arg(long)]
    n: Option<u64>,
    /// Noise level for the estimation bound.
    #[arg(long, default_value_t = 0.1)]
    sigma: f64,
    /// Squared approximation error entering the estimation bound.
    #[arg(long, default_value_t = 0.0)]
    approx_err_sq: f64,
    /// Sup norm of the regression target for the estimation bound.
    #[arg(long, default_value_t = 1.0)]
    f_inf: f64,
    /// Leading constant of the estimation bound.
    #[arg(long, default_value_t = 1.0)]
    lead_const: f64,
}

#[derive(Subcommand)]
enum ApproxCommand {
    /// Lattice/Taylor approximator for a smoothness-class target.
    Holder(HolderArgs),
    /// Greedy ridge-combination approximator for a Barron-class target.
    Barron(BarronArgs),
}

#[derive(Args)]
struct HolderArgs {
    /// Smoothness order (beta > 0).
    #[arg(long)]
    beta: f64,
    /// Input dimension.
    #[arg(long)]
    dim: usize,
    /// Parameter budget M.
    #[arg(long)]
    budget: usize,
    /// Target function name (zero|constant|affine|quadratic|sinsin|sinpi).
    #[arg(long = "fn")]
    fn_name: String,
    /// Compiled CNN output path (certificate lands alongside).
    #[arg(long = "out")]
    output: Option<PathBuf>,
    /// Block-sparse source network output path.
    #[arg(long)]
    fnn_out: Option<PathBuf>,
    /// Error-report CSV path.
    #[arg(long)]
    report: Option<PathBuf>,
    /// Filter size for the compiled model (default: dim, at least 2).
    #[arg(long)]
    filter_size: Option<usize>,
    /// Points per axis of the sup-error measurement grid.
    #[arg(long, default_value_t = 31)]
    grid: usize,
}

#[derive(Args)]
struct BarronArgs {
    /// Input dimension.
    #[arg(long)]
    dim: usize,
    /// Ridge budget M.
    #[arg(long)]
    budget: usize,
    /// Target function name (zero|constant|affine|quadratic|sinsin|sinpi).
    #[arg(long = "fn")]
    fn_name: String,
    /// Compiled CNN output path (certificate lands alongside).
    #[arg(long = "out")]
    output: Option<PathBuf>,
    /// Block-sparse source network output path.
    #[arg(long)]
    fnn_out: Option<PathBuf>,
    /// Fitted ridge-specification output path.
    #[arg(long)]
    ridge_out: Option<PathBuf>,
    /// Error-report CSV path.
    #[arg(long)]
    report: Option<PathBuf>,
    /// Candidate draws per greedy ridge selection.
    #[arg(long, default_value_t = 200)]
    candidates: usize,
    /// Points per axis of the fitting/measurement grid.
    #[arg(long, default_value_t = 15)]
    grid: usize,
    /// Seed for the greedy candidate draws.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Filter size for the compiled model (default: dim, at least 2).
    #[arg(long)]
    filter_size: Option<usize>,
}

#[derive(Subcommand)]
enum ExperimentCommand {
    /// Sup error versus parameter budget for a constructive approximator.
    ApproxRate(ApproxRateArgs),
    /// Monte-Carlo L2 risk versus sample size for trained compiled classes.
    EstRate(EstRateArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum KindArg {
    Holder,
    Barron,
}

#[derive(Clone, Copy, ValueEnum)]
enum ProjectArg {
    /// Clamp parameters into the class after every gradient step.
    PerStep,
    /// Clamp parameters once, after the final step.
    AtEnd,
}

#[derive(Args)]
struct ApproxRateArgs {
    /// Approximator family to sweep.
    #[arg(long, value_enum)]
    kind: KindArg,
    /// Target function name.
    #[arg(long = "fn")]
    fn_name: String,
    /// Input dimension.
    #[arg(long)]
    dim: usize,
    /// Smoothness order (used by the holder family).
    #[arg(long, default_value_t = 1.0)]
    beta: f64,
    /// Comma-separated parameter budgets, e.g. 9,25,81.
    #[arg(long, value_delimiter = ',', required = true)]
    budgets: Vec<usize>,
    /// Comma-separated seeds.
    #[arg(long, value_delimiter = ',', default_value = "0")]
    seeds: Vec<u64>,
    /// CSV report path.
    #[arg(long)]
    report: Option<PathBuf>,
    /// Full report output path (JSON, schema rate-report/v1).
    #[arg(long)]
    json: Option<PathBuf>,
    /// Points per axis of the measurement grid.
    #[arg(long)]
    grid: Option<usize>,
    /// Candidate draws per greedy ridge selection (barron only).
    #[arg(long)]
    candidates: Option<usize>,
    /// Filter size for the compilation spot-check.
    #[arg(long)]
    filter_size: Option<usize>,
}

#[derive(Args)]
struct EstRateArgs {
    /// Target function name.
    #[arg(long = "fn")]
    fn_name: String,
    /// Smoothness order of the hypothesis class.
    #[arg(long)]
    beta: f64,
    /// Input dimension.
    #[arg(long)]
    dim: usize,
    /// Comma-separated sample sizes, e.g. 256,512,1024.
    #[arg(long, value_delimiter = ',', required = true)]
    ns: Vec<usize>,
    /// Comma-separated seeds.
    #[arg(long, value_delimiter = ',', default_value = "0,1,2,3,4")]
    seeds: Vec<u64>,
    /// Observation noise level.
    #[arg(long, default_value_t = 0.1)]
    sigma: f64,
    /// Full passes over the data per trial.
    #[arg(long, default_value_t = 12)]
    epochs: usize,
    /// Minibatch size.
    #[arg(long, default_value_t = 16)]
    batch: usize,
    /// Gradient step size.
    #[arg(long, default_value_t = 2e-4)]
    lr: f64,
    /// Monte-Carlo probes for the L2-error estimate.
    #[arg(long, default_value_t = 4000)]
    probes: usize,
    /// Output clip level (default: max |target| over a probe grid).
    #[arg(long)]
    clip: Option<f64>,
    /// Filter size of the compiled class (default: input dimension).
    #[arg(long)]
    filter_size: Option<usize>,
    /// When parameters are projected back into the class.
    #[arg(long, value_enum, default_value_t = ProjectArg::PerStep)]
    project: ProjectArg,
    /// CSV report path.
    #[arg(long)]
    report: Option<PathBuf>,
    /// Full report output path (JSON, schema rate-report/v1).
    #[arg(long)]
    json: Option<PathBuf>,
}

#[derive(Args)]
struct LipschitzArgs {
    /// CNN model (JSON, schema resnet-cnn/v1).
    #[arg(long)]
    model: PathBuf,
    /// Parameter perturbation radius.
    #[arg(long)]
    eps: f64,
    /// Number of random perturbations.
    #[arg(long, default_value_t = 50)]
    trials: usize,
    /// Random inputs per perturbation.
    #[arg(long, default_value_t = 200)]
    probes: usize,
    /// Seed for perturbations and probes.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Report output path (JSON, schema lipschitz-report/v1).
    #[arg(long = "out")]
    output: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Err(msg) = init_threads(cli.threads) {
        eprintln!("error: {msg}");
        return ExitCode::FAILURE;
    }
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

fn init_threads(flag: Option<usize>) -> Result<(), String> {
    let requested = match flag {
        Some(n) => Some(n),
        None => match std::env::var(THREADS_ENV) {
            Ok(s) => Some(
                s.trim()
                    .parse::<usize>()
                    .map_err(|_| format!("{THREADS_ENV} must be a positive integer, got `{s}`"))?,
            ),
            Err(_) => None,
        },
    };
    let Some(n) = requested else { return Ok(()) };
    if n == 0 {
        return Err("thread count must be at least 1".into());
    }
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| format!("could not size the thread pool: {e}"))
}

fn run(command: Command) -> CoreResult<()> {
    match command {
        Command::Compile(a) => run_compile(a),
        Command::Verify(a) => run_verify(a),
        Command::Complexity(a) => run_complexity(a),
        Command::Approx(ApproxCommand::Holder(a)) => run_holder(a),
        Command::Approx(ApproxCommand::Barron(a)) => run_barron(a),
        Command::Experiment(ExperimentCommand::ApproxRate(a)) => run_approx_rate(a),
        Command::Experiment(ExperimentCommand::EstRate(a)) => run_est_rate(a),
        Command::Lipschitz(a) => run_lipschitz(a),
    }
}

/// Default certificate path: the model path with extension `cert.json`
/// (`model.json` becomes `model.cert.json`).
fn cert_path_for(model: &Path) -> PathBuf {
    model.with_extension("cert.json")
}

fn print_certificate(cert: &CompilationCertificate) {
    let depth_max =
        cert.block_depths.iter().map(|p| p.realized).max().unwrap_or(0);
    let depth_claim =
        cert.block_depths.iter().map(|p| p.claimed).max().unwrap_or(0);
    println!(
        "  blocks {}  depth <= {} (claimed {})  channels {} (claimed {})  filter {} (claimed {})",
        cert.block_count.realized,
        depth_max,
        depth_claim,
        cert.channels.realized,
        cert.channels.claimed,
        cert.filter_size.realized,
        cert.filter_size.claimed,
    );
    println!(
        "  conv sup-norm {:.6e} (claimed {:.6e})  read-out sup-norm {:.6e} (claimed {:.6e})",
        cert.conv_norm.realized,
        cert.conv_norm.claimed,
        cert.fc_norm.realized,
        cert.fc_norm.claimed,
    );
}

fn run_compile(a: CompileArgs) -> CoreResult<()> {
    let fnn: BlockSparseFnn = load_json(&a.input, SCHEMA_FNN)?;
    let (net, cert) = match a.constant_depth {
        Some(l) => compile_constant_depth(&fnn, l, a.filter_size)?,
        None => compile_fnn_to_cnn(&fnn, a.filter_size)?,
    };
    save_json(&a.output, SCHEMA_CNN, &net)?;
    let cert_path = a.certificate.unwrap_or_else(|| cert_path_for(&a.output));
    save_json(&cert_path, SCHEMA_CERTIFICATE, &cert)?;
    println!(
        "compiled {} -> {} (certificate {})",
        a.input.display(),
        a.output.display(),
        cert_path.display()
    );
    print_certificate(&cert);
    if cert.is_sound() {
        println!("  certificate sound: every realized value within its claimed bound");
        Ok(())
    } else {
        for v in cert.soundness_violations() {
            eprintln!("  bound exceeded: {v}");
        }
        Err(CoreError::BoundViolation("certificate is not sound".into()))
    }
}

fn run_verify(a: VerifyArgs) -> CoreResult<()> {
    let fnn: BlockSparseFnn = load_json(&a.fnn, SCHEMA_FNN)?;
    let net: ResNetCnn = load_json(&a.cnn, SCHEMA_CNN)?;
    if fnn.input_dim() != net.input_dim() {
        return Err(CoreError::ShapeMismatch(format!(
            "source has input dimension {}, compiled model {}",
            fnn.input_dim(),
            net.input_dim()
        )));
    }
    if a.points == 0 {
        return Err(CoreError::InvalidArgument("need at least one evaluation point".into()));
    }
    let mut rng = <rand_chacha::ChaCha12Rng as rand::SeedableRng>::seed_from_u64(a.seed);
    let mut worst = 0.0f64;
    for _ in 0..a.points {
        let x = random_point(&mut rng, fnn.input_dim());
        let y_f = fnn_eval(&fnn, &x)?;
        let y_c = cnn_eval(&net, &x)?;
        let rel = (y_f - y_c).abs() / y_f.abs().max(1.0);
        worst = worst.max(rel);
    }
    println!(
        "verify: {} points, worst relative deviation {:.3e} (tolerance {:.3e})",
        a.points, worst, a.tolerance
    );
    if worst <= a.tolerance {
        println!("verify: PASS");
        Ok(())
    } else {
        Err(CoreError::BoundViolation(format!(
            "compiled model deviates from its source by {worst:.3e} > {:.3e}",
            a.tolerance
        )))
    }
}

fn run_complexity(a: ComplexityArgs) -> CoreResult<()> {
    let mut arch: ArchSummary = match (&a.arch, &a.model) {
        (Some(p), None) => load_json(p, SCHEMA_ARCH)?,
        (None, Some(p)) => {
            let net: ResNetCnn = load_json(p, SCHEMA_CNN)?;
            ArchSummary::from_cnn(&net)
        }
        _ => {
            return Err(CoreError::InvalidArgument(
                "pass exactly one of --arch and --model".into(),
            ))
        }
    };
    if let Some(depth) = a.masked {
        arch = arch.with_masking(depth)?;
    }
    let report = complexity_report(&arch, a.eps)?;
    println!(
        "complexity: varrho {:.6e}  varrho+ {:.6e}  lambda1 {:.6e}  lambda2 {}  \
         log-cover({:.1e}) {:.6e}",
        report.varrho,
        report.varrho_plus,
        report.lambda1,
        report.lambda2,
        report.epsilon,
        report.covering_log
    );
    if let Some(n) = a.n {
        let bound =
            estimation_bound(&arch, a.approx_err_sq, n, a.f_inf, a.sigma, a.lead_const)?;
        println!(
            "estimation bound at N = {n} (sigma {:.3}, |f|_inf {:.3}): {:.6e}",
            a.sigma, a.f_inf, bound
        );
    }
    if let Some(out) = &a.output {
        save_json(out, SCHEMA_COMPLEXITY, &report)?;
        println!("report written to {}", out.display());
    }
    Ok(())
}

/// Shared tail of the approx verbs: one-budget sweep for the CSV/error
/// number, then a human-readable summary line.
fn report_single_budget(
    kind: ApproxKind,
    params: &ApproxRateParams,
    budget: usize,
    seed: u64,
    report_path: Option<&Path>,
) -> CoreResult<RateReport> {
    let report = approx_rate_experiment(kind, params, &[budget], &[seed])?;
    if let Some(p) = report_path {
        write_report_csv(p, &report)?;
        println!("error report written to {}", p.display());
    }
    Ok(report)
}

fn run_holder(a: HolderArgs) -> CoreResult<()> {
    let target = by_name(&a.fn_name, a.dim)?;
    let oracle = TaylorOracle::new(target, a.beta)?;
    let k = a.filter_size.unwrap_or_else(|| a.dim.max(2));
    let mut params = ApproxRateParams::holder(&a.fn_name, a.dim, a.beta);
    params.filter_size = k;
    params.grid_per_axis = a.grid;
    let report = report_single_budget(ApproxKind::Holder, &params, a.budget, 0, a.report.as_deref())?;
    let err = report.points.first().map_or(f64::NAN, |p| p.error);
    let budget_bound = holder_error_budget(oracle.norm(), a.beta, a.budget, a.dim);
    println!(
        "holder approximator for `{}` (dim {}, beta {}): budget {}, sup error {:.6e}, \
         certified budget {:.6e}",
        a.fn_name, a.dim, a.beta, a.budget, err, budget_bound
    );
    if let Some(out) = &a.fnn_out {
        let (fnn, _) = holder_fnn(&oracle, a.budget, a.dim)?;
        save_json(out, SCHEMA_FNN, &fnn)?;
        println!("block-sparse source written to {}", out.display());
    }
    if let Some(out) = &a.output {
        let (net, cert) = holder_cnn(&oracle, a.budget, a.dim, k)?;
        save_json(out, SCHEMA_CNN, &net)?;
        let cert_path = cert_path_for(out);
        save_json(&cert_path, SCHEMA_CERTIFICATE, &cert)?;
        println!("compiled model written to {} (certificate {})", out.display(), cert_path.display());
        print_certificate(&cert);
    }
    Ok(())
}

fn run_barron(a: BarronArgs) -> CoreResult<()> {
    let target = by_name(&a.fn_name, a.dim)?;
    let k = a.filter_size.unwrap_or_else(|| a.dim.max(2));
    let mut params = ApproxRateParams::barron(&a.fn_name, a.dim);
    params.filter_size = k;
    params.grid_per_axis = a.grid;
    params.candidate_budget = a.candidates;
    let report =
        report_single_budget(ApproxKind::Barron, &params, a.budget, a.seed, a.report.as_deref())?;
    let err = report.points.first().map_or(f64::NAN, |p| p.error);
    println!(
        "barron approximator for `{}` (dim {}): {} ridges, sup error {:.6e}",
        a.fn_name, a.dim, a.budget, err
    );
    if a.fnn_out.is_some() || a.output.is_some() || a.ridge_out.is_some() {
        let grid = cube_grid(a.dim, a.grid);
        let eval = |x: &[f64]| target.eval(x);
        let spec = fit_barron_ridges(&eval, a.budget, a.candidates, &grid, a.seed)?;
        if let Some(out) = &a.ridge_out {
            save_json(out, SCHEMA_RIDGE, &spec)?;
            println!("ridge specification written to {}", out.display());
        }
        let fnn = rescnn_core::barron_fnn(&spec)?;
        if let Some(out) = &a.fnn_out {
            save_json(out, SCHEMA_FNN, &fnn)?;
            println!("block-sparse source written to {}", out.display());
        }
        if let Some(out) = &a.output {
            let (net, cert) = compile_fnn_to_cnn(&fnn, k)?;
            save_json(out, SCHEMA_CNN, &net)?;
            let cert_path = cert_path_for(out);
            save_json(&cert_path, SCHEMA_CERTIFICATE, &cert)?;
            println!(
                "compiled model written to {} (certificate {})",
                out.display(),
                cert_path.display()
            );
            print_certificate(&cert);
        }
    }
    Ok(())
}

fn print_report_summary(report: &RateReport) {
    println!(
        "{} sweep over {}: fitted slope {:.4} (predicted exponent {:.4}){}",
        report.experiment,
        report.sweep_variable,
        report.fitted_slope,
        report.predicted_exponent,
        if report.diagnostic { "  [diagnostic: depends on heuristic optimization]" } else { "" }
    );
    for (v, e) in &report.median_errors {
        println!("  {} = {:<8} median error {:.6e}", report.sweep_variable, v, e);
    }
    println!("  total runtime {:.2}s over {} trials", report.total_runtime_s, report.points.len());
}

fn write_report_outputs(
    report: &RateReport,
    csv: Option<&Path>,
    json: Option<&Path>,
) -> CoreResult<()> {
    if let Some(p) = csv {
        write_report_csv(p, report)?;
        println!("CSV report written to {}", p.display());
    }
    if let Some(p) = json {
        save_json(p, SCHEMA_RATE_REPORT, report)?;
        println!("JSON report written to {}", p.display());
    }
    Ok(())
}

fn run_approx_rate(a: ApproxRateArgs) -> CoreResult<()> {
    let (kind, mut params) = match a.kind {
        KindArg::Holder => {
            (ApproxKind::Holder, ApproxRateParams::holder(&a.fn_name, a.dim, a.beta))
        }
        KindArg::Barron => (ApproxKind::Barron, ApproxRateParams::barron(&a.fn_name, a.dim)),
    };
    if let Some(g) = a.grid {
        params.grid_per_axis = g;
    }
    if let Some(c) = a.candidates {
        params.candidate_budget = c;
    }
    if let Some(k) = a.filter_size {
        params.filter_size = k;
    }
    let report = approx_rate_experiment(kind, &params, &a.budgets, &a.seeds)?;
    print_report_summary(&report);
    write_report_outputs(&report, a.report.as_deref(), a.json.as_deref())
}

fn run_est_rate(a: EstRateArgs) -> CoreResult<()> {
    let mut cfg = EstRateConfig::defaults(&a.fn_name);
    cfg.noise_sigma = a.sigma;
    cfg.epochs = a.epochs;
    cfg.batch_size = a.batch;
    cfg.learning_rate = a.lr;
    cfg.probes = a.probes;
    cfg.clip_level = a.clip;
    cfg.filter_size = a.filter_size.unwrap_or(0);
    cfg.projection = match a.project {
        ProjectArg::PerStep => ProjectionMode::PerStep,
        ProjectArg::AtEnd => ProjectionMode::AtEnd,
    };
    let report = estimation_rate_experiment(a.beta, a.dim, &a.ns, &a.seeds, &cfg)?;
    print_report_summary(&report);
    write_report_outputs(&report, a.report.as_deref(), a.json.as_deref())
}

fn run_lipschitz(a: LipschitzArgs) -> CoreResult<()> {
    let net: ResNetCnn = load_json(&a.model, SCHEMA_CNN)?;
    let report = lipschitz_check(&net, a.eps, a.trials, a.probes, a.seed)?;
    println!(
        "lipschitz: lambda1 {:.6e}, radius {:.3e}, ceiling {:.6e}, \
         worst deviation {:.6e} over {} trials x {} probes",
        report.lambda1, report.epsilon, report.bound, report.max_deviation, report.trials,
        report.probes
    );
    if let Some(out) = &a.output {
        save_json(out, SCHEMA_LIPSCHITZ, &report)?;
        println!("report written to {}", out.display());
    }
    if report.pass {
        println!("lipschitz: PASS");
        Ok(())
    } else {
        Err(CoreError::BoundViolation(format!(
            "observed deviation {:.6e} exceeds the certified ceiling {:.6e}",
            report.max_deviation, report.bound
        )))
    }
}
