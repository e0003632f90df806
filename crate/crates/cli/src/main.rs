//! `qhosvd`: decompose tensors classically or with the simulated quantum
//! algorithms, verify results, train completion models and run self checks.
//!
//! Exit codes: 0 success, 2 bad input, 3 verification or property failure.

mod report;
mod selftest;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use qhosvd::completion::{self, synthetic_ratings, Hyper, INIT_SCALE};
use qhosvd::hosvd::project_core;
use qhosvd::{
    hosvd, qhosvd1, qhosvd2, qten, truncated_hosvd, verify, Alg1Config, CMatrix, DenseTensor, GradientMode,
    HosvdResult, RatingsTensor, TrainConfig, VerifyReport,
};

#[derive(Debug)]
enum Failure {
    BadInput(String),
    Check(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::BadInput(_) => 2,
            Failure::Check(_) => 3,
        }
    }
}

impl From<qhosvd::Error> for Failure {
    fn from(e: qhosvd::Error) -> Self {
        match e {
            qhosvd::Error::DegenerateModel(_) => Failure::Check(e.to_string()),
            _ => Failure::BadInput(e.to_string()),
        }
    }
}

type CliResult<T> = Result<T, Failure>;

#[derive(Parser)]
#[command(name = "qhosvd", version, about = "Higher order SVD: classical, simulated quantum, and tensor completion")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Decompose a QTEN tensor and write the factors, core and a JSON report.
    Decompose(DecomposeArgs),
    /// Check a result directory against its input tensor.
    Verify(VerifyArgs),
    /// Train a HOSVD completion model on a ratings TSV.
    Complete(CompleteArgs),
    /// Run the built-in property suite, optionally on a fixture directory.
    Selftest(SelftestArgs),
    /// Write a seeded random tensor in QTEN format.
    GenTensor(GenTensorArgs),
    /// Write a seeded synthetic ratings corpus as TSV.
    GenRatings(GenRatingsArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Method {
    Classical,
    Alg1,
    Alg2,
}

impl Method {
    fn name(self) -> &'static str {
        match self {
            Method::Classical => "classical",
            Method::Alg1 => "alg1",
            Method::Alg2 => "alg2",
        }
    }

    fn default_tol(self) -> f64 {
        match self {
            Method::Classical => 1e-9,
            Method::Alg1 | Method::Alg2 => 1e-2,
        }
    }
}

#[derive(Args)]
struct DecomposeArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long, value_enum, default_value = "classical")]
    method: Method,
    /// Control qubits of phase estimation (alg1, alg2).
    #[arg(long, default_value_t = 10)]
    precision_qubits: usize,
    /// Multilinear rank to keep, e.g. `2,2,2`.
    #[arg(long, value_delimiter = ',')]
    truncate: Option<Vec<usize>>,
    /// Verification tolerance; defaults to 1e-9 (classical) or 1e-2 (alg1, alg2).
    #[arg(long)]
    tol: Option<f64>,
    /// Directory for core.qten, factor_k.qten and spectra.tsv.
    #[arg(long)]
    output: Option<PathBuf>,
    /// Write the report here instead of stdout.
    #[arg(long)]
    report: Option<PathBuf>,
    /// Include wall time in the report (makes it non-reproducible).
    #[arg(long)]
    timing: bool,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    result: PathBuf,
    #[arg(long, default_value_t = 1e-9)]
    tol: f64,
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Mode {
    Classical,
    Hybrid,
}

#[derive(Args)]
struct CompleteArgs {
    #[arg(long)]
    ratings: PathBuf,
    /// Tensor dims; inferred from the largest indices when omitted.
    #[arg(long, value_delimiter = ',')]
    dims: Option<Vec<usize>>,
    #[arg(long, value_delimiter = ',', required = true)]
    ranks: Vec<usize>,
    #[arg(long, default_value_t = 0.05)]
    eta: f64,
    #[arg(long, default_value_t = 1e-4)]
    lambda: f64,
    #[arg(long, default_value_t = 1e-4)]
    lambda_core: f64,
    #[arg(long, default_value_t = 200)]
    epochs: usize,
    #[arg(long)]
    seed: u64,
    #[arg(long, value_enum, default_value = "classical")]
    mode: Mode,
    #[arg(long, default_value_t = INIT_SCALE)]
    init_scale: f64,
    /// Amplitude-estimation qubits in hybrid mode.
    #[arg(long, default_value_t = 12)]
    t_qubits: usize,
    /// Ratings TSV scored after training.
    #[arg(long)]
    held_out: Option<PathBuf>,
    /// Checkpoint directory for the trained model.
    #[arg(long)]
    output: Option<PathBuf>,
    #[arg(long)]
    report: Option<PathBuf>,
    #[arg(long)]
    timing: bool,
}

#[derive(Args)]
struct SelftestArgs {
    /// Directory holding `input.qten` and a `result/` decomposition.
    #[arg(long)]
    fixture: Option<PathBuf>,
    #[arg(long, default_value_t = 1e-9)]
    tol: f64,
}

#[derive(Args)]
struct GenTensorArgs {
    #[arg(long, value_delimiter = ',', required = true)]
    dims: Vec<usize>,
    #[arg(long)]
    seed: u64,
    /// Real Gaussian entries instead of complex.
    #[arg(long)]
    real: bool,
    /// Exact multilinear rank, e.g. `2,2,2`.
    #[arg(long, value_delimiter = ',')]
    rank: Option<Vec<usize>>,
    /// Scale to unit Frobenius norm.
    #[arg(long)]
    unit: bool,
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct GenRatingsArgs {
    #[arg(long, value_delimiter = ',', required = true)]
    dims: Vec<usize>,
    #[arg(long, value_delimiter = ',', required = true)]
    ranks: Vec<usize>,
    #[arg(long, default_value_t = 0.3)]
    fraction: f64,
    #[arg(long, default_value_t = 0.05)]
    noise: f64,
    #[arg(long)]
    seed: u64,
    /// Observed ratings.
    #[arg(long)]
    output: PathBuf,
    /// Remaining cells.
    #[arg(long)]
    held_out: Option<PathBuf>,
}

fn read_bytes(path: &Path) -> CliResult<Vec<u8>> {
    fs::read(path).map_err(|e| Failure::BadInput(format!("{}: {e}", path.display())))
}

fn read_tensor(path: &Path) -> CliResult<(DenseTensor, String)> {
    let bytes = read_bytes(path)?;
    let text = String::from_utf8(bytes.clone()).map_err(|_| Failure::BadInput(format!("{}: not UTF-8", path.display())))?;
    let tensor = qten::from_str(&text).map_err(|e| Failure::BadInput(format!("{}: {e}", path.display())))?;
    Ok((tensor, report::digest(&bytes)))
}

fn emit(report: &Value, path: Option<&Path>) -> CliResult<()> {
    let text = report::render(report).map_err(Failure::Check)?;
    match path {
        Some(p) => fs::write(p, text).map_err(|e| Failure::BadInput(format!("{}: {e}", p.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn verify_json(rep: &VerifyReport) -> Value {
    json!({
        "factor_unitarity": rep.factor_unitarity,
        "ordering": rep.ordering,
        "orthogonality": rep.orthogonality,
        "passed": rep.passed,
        "reconstruction": rep.reconstruction,
        "reconstruction_abs": rep.reconstruction_abs,
        "spectra_mismatch": rep.spectra_mismatch,
        "tol": rep.tol,
        "truncation_bound": rep.truncation_bound,
    })
}

/// Keeps the leading `ranks[k]` columns of each factor and projects the core.
fn truncate_result(result: HosvdResult, tensor: &DenseTensor, ranks: &[usize]) -> CliResult<HosvdResult> {
    let factors: Vec<CMatrix> = result
        .factors
        .iter()
        .zip(ranks)
        .map(|(u, &r)| u.columns(0, r).into_owned())
        .collect();
    let core = project_core(tensor, &factors)?;
    Ok(HosvdResult {
        core,
        factors,
        spectra: result.spectra,
        ranks: Some(ranks.to_vec()),
    })
}

fn decompose(args: &DecomposeArgs) -> CliResult<()> {
    let (tensor, digest) = read_tensor(&args.input)?;
    if let Some(r) = &args.truncate {
        let ok = r.len() == tensor.order() && r.iter().zip(tensor.dims()).all(|(&r, &d)| (1..=d).contains(&r));
        if !ok {
            return Err(Failure::BadInput(format!("--truncate {r:?} does not fit dims {:?}", tensor.dims())));
        }
    }
    let tol = args.tol.unwrap_or(args.method.default_tol());
    if !(tol > 0.0) {
        return Err(Failure::BadInput("--tol must be positive".into()));
    }
    let start = Instant::now();
    let mut config = json!({
        "method": args.method.name(),
        "tol": tol,
        "truncate": args.truncate.clone().unwrap_or_default(),
    });
    let (result, diagnostics) = match args.method {
        Method::Classical => {
            let r = match &args.truncate {
                Some(ranks) => truncated_hosvd(&tensor, ranks)?,
                None => hosvd(&tensor)?,
            };
            (r, json!({}))
        }
        Method::Alg1 => {
            let d = args.precision_qubits;
            let cfg = Alg1Config::from_epsilon(2f64.powi(-(d.min(60) as i32)))?.with_control_qubits(d);
            let (r, diag) = qhosvd1(&tensor, &cfg)?;
            config["precision_qubits"] = json!(d);
            config["sim_time"] = json!(cfg.sim_time);
            config["eigen_threshold"] = json!(cfg.eigen_threshold);
            let diag = json!({
                "completed_columns": diag.completed,
                "raw_unitarity": diag.raw_unitarity,
                "success_probabilities": diag.success_probabilities,
            });
            (r, diag)
        }
        Method::Alg2 => {
            let (r, diag) = qhosvd2(&tensor, args.precision_qubits)?;
            config["precision_qubits"] = json!(args.precision_qubits);
            let diag = json!({
                "completed_columns": diag.completed,
                "raw_unitarity": diag.raw_unitarity,
                "success_probabilities": diag.success_probabilities,
            });
            (r, diag)
        }
    };
    let result = match (&args.truncate, args.method) {
        (Some(ranks), Method::Alg1 | Method::Alg2) => truncate_result(result, &tensor, ranks)?,
        _ => result,
    };
    let rep = verify(&result, &tensor, tol)?;
    if let Some(dir) = &args.output {
        result.write_dir(dir)?;
    }
    let mut report = json!({
        "command": "decompose",
        "config": config,
        "diagnostics": diagnostics,
        "input": {"dims": tensor.dims(), "sha256": digest},
        "method": args.method.name(),
        "spectra": result.spectra,
        "verify": verify_json(&rep),
    });
    if args.timing {
        report["wall_time_s"] = json!(start.elapsed().as_secs_f64());
    }
    emit(&report, args.report.as_deref())?;
    if rep.passed {
        Ok(())
    } else {
        Err(Failure::Check(format!("verification failed at tol {tol}")))
    }
}

fn verify_cmd(args: &VerifyArgs) -> CliResult<()> {
    let (tensor, digest) = read_tensor(&args.input)?;
    let result = HosvdResult::read_dir(&args.result).map_err(|e| Failure::BadInput(format!("{}: {e}", args.result.display())))?;
    let rep = verify(&result, &tensor, args.tol)?;
    let report = json!({
        "command": "verify",
        "input": {"dims": tensor.dims(), "sha256": digest},
        "verify": verify_json(&rep),
    });
    emit(&report, args.report.as_deref())?;
    if rep.passed {
        Ok(())
    } else {
        Err(Failure::Check(format!("verification failed at tol {}", args.tol)))
    }
}

fn read_ratings(path: &Path, dims: Option<&[usize]>) -> CliResult<(RatingsTensor, String)> {
    let bytes = read_bytes(path)?;
    let text = String::from_utf8(bytes.clone()).map_err(|_| Failure::BadInput(format!("{}: not UTF-8", path.display())))?;
    let ratings = RatingsTensor::from_tsv(&text, dims).map_err(|e| Failure::BadInput(format!("{}: {e}", path.display())))?;
    Ok((ratings, report::digest(&bytes)))
}

fn complete(args: &CompleteArgs) -> CliResult<()> {
    let (ratings, digest) = read_ratings(&args.ratings, args.dims.as_deref())?;
    if args.ranks.len() != ratings.dims().len() {
        return Err(Failure::BadInput(format!("--ranks needs {} entries", ratings.dims().len())));
    }
    if !(args.init_scale > 0.0) {
        return Err(Failure::BadInput("--init-scale must be positive".into()));
    }
    let cfg = TrainConfig {
        hyper: Hyper {
            eta: args.eta,
            lambda: args.lambda,
            lambda_core: args.lambda_core,
        },
        epochs: args.epochs,
        seed: args.seed,
        init_scale: args.init_scale,
        mode: match args.mode {
            Mode::Classical => GradientMode::Classical,
            Mode::Hybrid => GradientMode::Hybrid,
        },
        t_qubits: args.t_qubits,
        ..TrainConfig::default()
    };
    let start = Instant::now();
    let trained = completion::train(&ratings, &args.ranks, &cfg)?;
    let model = &trained.model;
    let mut report = json!({
        "command": "complete",
        "config": {
            "dims": ratings.dims(),
            "epochs": args.epochs,
            "eta": args.eta,
            "init_scale": args.init_scale,
            "lambda": args.lambda,
            "lambda_core": args.lambda_core,
            "mode": match args.mode { Mode::Classical => "classical", Mode::Hybrid => "hybrid" },
            "ranks": args.ranks,
            "seed": args.seed,
            "t_qubits": args.t_qubits,
        },
        "input": {"observed": ratings.len(), "sha256": digest},
        "objective": trained.objective.last().copied().unwrap_or(model.objective(&ratings, &cfg.loss)?),
        "rmse_train": model.rmse(ratings.entries())?,
    });
    if let Some(path) = &args.held_out {
        let (held, held_digest) = read_ratings(path, Some(ratings.dims()))?;
        report["rmse_held_out"] = json!(model.rmse(held.entries())?);
        report["input"]["held_out_sha256"] = json!(held_digest);
    }
    if let Some(dir) = &args.output {
        model.write_dir(dir)?;
    }
    if args.timing {
        report["wall_time_s"] = json!(start.elapsed().as_secs_f64());
    }
    emit(&report, args.report.as_deref())
}

fn selftest_cmd(args: &SelftestArgs) -> CliResult<()> {
    let mut checks = Vec::new();
    if let Some(dir) = &args.fixture {
        if !dir.is_dir() {
            return Err(Failure::BadInput(format!("{}: not a directory", dir.display())));
        }
        checks.push(selftest::fixture_check(dir, args.tol));
    }
    checks.extend(selftest::property_suite());
    println!("{:<22} {:<6} {:>12} {:>12}", "check", "result", "worst", "tol");
    for c in &checks {
        let status = if c.passed { "PASS" } else { "FAIL" };
        println!("{:<22} {:<6} {:>12.3e} {:>12.1e}", c.name, status, c.worst, c.tol);
    }
    let failed = checks.iter().filter(|c| !c.passed).count();
    if failed == 0 {
        Ok(())
    } else {
        Err(Failure::Check(format!("{failed} of {} checks failed", checks.len())))
    }
}

fn write_text(path: Option<&Path>, text: &str) -> CliResult<()> {
    match path {
        Some(p) => fs::write(p, text).map_err(|e| Failure::BadInput(format!("{}: {e}", p.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn gen_tensor(args: &GenTensorArgs) -> CliResult<()> {
    if args.dims.is_empty() || args.dims.contains(&0) {
        return Err(Failure::BadInput("--dims must be positive".into()));
    }
    let mut t = match &args.rank {
        Some(r) => {
            if r.len() != args.dims.len() || r.iter().zip(&args.dims).any(|(&r, &d)| r == 0 || r > d) {
                return Err(Failure::BadInput("--rank must give one rank in 1..=dim per mode".into()));
            }
            qhosvd::corpus::exact_rank_tensor(&args.dims, r, args.seed)
        }
        None if args.real => qhosvd::corpus::random_real_unit_tensor(&args.dims, args.seed),
        None => qhosvd::corpus::random_tensor(&args.dims, args.seed),
    };
    if args.unit {
        t = t.normalized()?.0;
    }
    write_text(args.output.as_deref(), &qten::to_string(&t))
}

fn gen_ratings(args: &GenRatingsArgs) -> CliResult<()> {
    let data = synthetic_ratings(&args.dims, &args.ranks, args.fraction, args.noise, args.seed)?;
    write_text(Some(&args.output), &data.observed.to_tsv())?;
    if let Some(path) = &args.held_out {
        let held = RatingsTensor::new(args.dims.clone(), data.held_out)?;
        write_text(Some(path), &held.to_tsv())?;
    }
    Ok(())
}

fn configure_threads() -> CliResult<()> {
    let Ok(value) = std::env::var("QHOSVD_THREADS") else {
        return Ok(());
    };
    let n: usize = value
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| Failure::BadInput(format!("QHOSVD_THREADS={value} is not a positive integer")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| Failure::BadInput(e.to_string()))
}

fn run(cli: &Cli) -> CliResult<()> {
    configure_threads()?;
    match &cli.command {
        Command::Decompose(a) => decompose(a),
        Command::Verify(a) => verify_cmd(a),
        Command::Complete(a) => complete(a),
        Command::Selftest(a) => selftest_cmd(a),
        Command::GenTensor(a) => gen_tensor(a),
        Command::GenRatings(a) => gen_ratings(a),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            match &f {
                Failure::BadInput(m) => eprintln!("error: {m}"),
                Failure::Check(m) => eprintln!("check failed: {m}"),
            }
            ExitCode::from(f.code())
        }
    }
}
