use std::io::{Read, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use unimoments::bounds::{self, Target};
use unimoments::clifford;
use unimoments::correlation::{self, CorrelationMatrix};
use unimoments::extremality;
use unimoments::json as wire;
use unimoments::matkernel::{self, CMatrix, Tolerance, C64};
use unimoments::moments;
use unimoments::{fixtures, Error};

/// Residual allowed for kernel relations and reconstructed certificates.
const CERT_SLACK: f64 = 1e-8;

#[derive(Parser)]
#[command(name = "unimoments", version)]
#[command(about = "Correlation matrices, unitary moment realizations and membership certificates")]
struct Cli {
    /// PSD tolerance on the smallest eigenvalue
    #[arg(long, global = true, default_value_t = 1e-9)]
    tol_psd: f64,

    /// Relative eigenvalue cutoff for numerical rank
    #[arg(long, global = true, default_value_t = 1e-7)]
    tol_rank: f64,

    /// Entrywise equality tolerance
    #[arg(long, global = true, default_value_t = 1e-9)]
    tol_eq: f64,

    /// Seed for sampling
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,

    /// Largest Clifford matrix size (2^rank must not exceed it)
    #[arg(long, global = true, env = "UNIMOMENTS_CAP", default_value_t = clifford::DEFAULT_CAP)]
    cap: usize,

    #[arg(long, global = true, value_enum, default_value_t = Output::Json)]
    output: Output,

    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Output {
    Json,
    Pretty,
}

#[derive(Clone, Copy, ValueEnum)]
enum TargetArg {
    Commuting,
    Matricial,
}

#[derive(Subcommand)]
enum Command {
    /// Check that a matrix is a correlation matrix
    Validate { path: PathBuf },
    /// Factor X = F*F with unit columns
    Factor { path: PathBuf },
    /// Extreme point test with a perturbation witness when not extreme
    Extreme {
        path: PathBuf,
        /// Only real symmetric perturbations
        #[arg(long)]
        real_mode: bool,
    },
    /// Write X as a convex combination of extreme points
    Decompose {
        path: PathBuf,
        #[arg(long)]
        real_mode: bool,
    },
    /// Realize a real correlation matrix by Clifford symmetries
    Realize {
        path: PathBuf,
        #[arg(long, alias = "real")]
        real_mode: bool,
    },
    /// Certified lower bound for mixing X with the identity
    Bound {
        path: PathBuf,
        #[arg(long, value_enum, default_value_t = TargetArg::Commuting)]
        target: TargetArg,
    },
    /// Check that a unitary tuple has the given moment matrix
    Verify { tuple: PathBuf, matrix: PathBuf },
    /// Moments of n Haar unitaries of size k
    Sample { n: usize, k: usize },
    /// Case analysis excluding a commuting realization of the 6x6 fixture
    #[command(name = "refute-f6")]
    RefuteF6 { path: Option<PathBuf> },
}

/// A failed command: exit code plus a JSON report.
struct Failure {
    code: u8,
    report: Value,
}

impl Failure {
    fn new(code: u8, message: impl Into<String>) -> Self {
        let message = message.into();
        Self {
            code,
            report: json!({ "ok": false, "error": { "message": message } }),
        }
    }
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Json(_) => 1,
        Error::NotSquare { .. }
        | Error::NotHermitian { .. }
        | Error::NotUnitDiagonal { .. }
        | Error::NotPsd { .. }
        | Error::NotUnitary { .. }
        | Error::DimensionMismatch { .. } => 2,
        Error::DimensionCap { .. } | Error::SizeOverflow { .. } => 4,
        Error::NoConvergence { .. } | Error::RecursionOverflow { .. } => 5,
        _ => 3,
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Self {
            code: exit_code(&e),
            report: json!({ "ok": false, "error": e, "message": e.to_string() }),
        }
    }
}

type Outcome = std::result::Result<Value, Failure>;

fn read_input(path: &Path) -> std::result::Result<String, Failure> {
    let mut s = String::new();
    let res = if path.as_os_str() == "-" {
        std::io::stdin().read_to_string(&mut s).map(|_| ())
    } else {
        std::fs::read_to_string(path).map(|t| s = t)
    };
    res.map_err(|e| Failure::new(1, format!("{}: {e}", path.display())))?;
    Ok(s)
}

fn load_matrix(path: &Path) -> std::result::Result<CMatrix, Failure> {
    Ok(wire::parse_matrix(&read_input(path)?)?)
}

fn load_correlation(path: &Path, tol: &Tolerance) -> std::result::Result<CorrelationMatrix, Failure> {
    Ok(correlation::validate(&load_matrix(path)?, tol)?)
}

/// An emitted certificate failed its own re-check.
fn unverified(what: &str, residual: f64) -> Failure {
    Failure {
        code: 5,
        report: json!({ "ok": false, "error": { "message": format!("{what} failed re-verification"), "residual": residual } }),
    }
}

fn cmd_validate(path: &Path, tol: &Tolerance) -> Outcome {
    let m = load_matrix(path)?;
    match correlation::validate(&m, tol) {
        Ok(x) => Ok(json!({
            "valid": true,
            "n": x.n(),
            "rank": matkernel::rank(x.hermitian(), tol)?,
            "is_real": x.is_real(),
            "min_eigenvalue": matkernel::min_eigenvalue(x.hermitian(), tol)?,
        })),
        Err(e) => Err(Failure {
            code: exit_code(&e),
            report: json!({ "valid": false, "error": e, "message": e.to_string() }),
        }),
    }
}

fn cmd_factor(path: &Path, tol: &Tolerance) -> Outcome {
    let x = load_correlation(path, tol)?;
    let f = correlation::frame_factor(&x, tol)?;
    let err = matkernel::max_abs_diff(&f.gram(), x.matrix());
    if err > CERT_SLACK {
        return Err(unverified("frame", err));
    }
    Ok(json!({
        "rank": f.r(),
        "frame": wire::frame_json(f.vectors()),
        "reconstruction_error": err,
    }))
}

fn cmd_extreme(path: &Path, real_mode: bool, tol: &Tolerance) -> Outcome {
    let x = load_correlation(path, tol)?;
    let rep = extremality::is_extreme(&x, real_mode, tol)?;
    if let Some(w) = &rep.witness {
        let (lo, hi) = extremality::max_step(&x, w, tol)?;
        if !(lo < 0.0 && hi > 0.0) {
            return Err(unverified("perturbation witness", lo.abs().min(hi)));
        }
    }
    let mut out = json!({ "report": wire::report_json(&rep) });
    if !real_mode {
        out["obstruction"] = serde_json::to_value(moments::commuting_obstruction(&x, tol)?).unwrap();
    }
    Ok(out)
}

fn cmd_decompose(path: &Path, real_mode: bool, tol: &Tolerance) -> Outcome {
    let x = load_correlation(path, tol)?;
    let d = extremality::decompose_extreme(&x, real_mode, tol)?;
    let err = matkernel::max_abs_diff(&d.reconstruct(), x.matrix());
    if err > CERT_SLACK {
        return Err(unverified("decomposition", err));
    }
    let mut out = serde_json::to_value(wire::decomposition_json(&d)).unwrap();
    out["reconstruction_error"] = json!(err);
    Ok(out)
}

fn cmd_realize(path: &Path, tol: &Tolerance, cap: usize) -> Outcome {
    let x = load_correlation(path, tol)?;
    let t = clifford::realize_real(&x, tol, cap)?;
    let m = moments::moment_matrix(&t, tol)?;
    let residual = matkernel::max_abs_diff(m.matrix.matrix(), x.matrix());
    if residual > tol.eps_eq {
        return Err(unverified("realization", residual));
    }
    Ok(json!({ "tuple": wire::tuple_json(&t), "residual": residual }))
}

fn cmd_bound(path: &Path, target: TargetArg, tol: &Tolerance) -> Outcome {
    let x = load_correlation(path, tol)?;
    let cert = match target {
        TargetArg::Commuting => bounds::best_lower_bound(&x, tol)?,
        TargetArg::Matricial => bounds::best_lower_bound_matricial(&x, tol)?,
    };
    let drift = cert.recheck(&x, tol)?;
    if drift > tol.eps_eq {
        return Err(unverified("bound evidence", drift));
    }
    let defect = bounds::witness(&cert, &x, cert.bound, tol)?.defect(&x, tol)?;
    if defect > CERT_SLACK {
        return Err(unverified("bound witness", defect));
    }
    let target = match cert.target {
        Target::Commuting => "commuting",
        Target::Matricial => "matricial",
    };
    Ok(json!({ "target": target, "certificate": cert, "witness_defect": defect }))
}

fn cmd_verify(tuple: &Path, matrix: &Path, tol: &Tolerance) -> Outcome {
    let t = wire::parse_tuple(&read_input(tuple)?, tol)?;
    let x = load_correlation(matrix, tol)?;
    if t.n() != x.n() {
        return Err(Error::DimensionMismatch {
            expected: x.n(),
            found: t.n(),
        }
        .into());
    }
    let m = moments::moment_matrix(&t, tol)?;
    let max_error = matkernel::max_abs_diff(m.matrix.matrix(), x.matrix());
    let kernel = matkernel::nullspace(x.hermitian(), tol)?;
    let residuals = (0..kernel.ncols())
        .map(|j| {
            let c: Vec<C64> = kernel.column(j).iter().copied().collect();
            moments::kernel_relation_residual(&t, &c)
        })
        .collect::<unimoments::Result<Vec<f64>>>()?;
    let matches = max_error <= tol.eps_eq && residuals.iter().all(|r| *r <= CERT_SLACK);
    let report = json!({
        "matches": matches,
        "max_error": max_error,
        "kernel_dimension": kernel.ncols(),
        "kernel_residuals": residuals,
    });
    if matches {
        Ok(report)
    } else {
        Err(Failure { code: 2, report })
    }
}

fn cmd_sample(n: usize, k: usize, seed: u64, tol: &Tolerance) -> Outcome {
    if n == 0 || k == 0 {
        return Err(Error::InvalidArgument("n and k must be positive".into()).into());
    }
    let t = moments::haar_tuple(n, k, seed);
    let m = moments::moment_matrix(&t, tol)?;
    Ok(json!({
        "seed": seed,
        "n": n,
        "k": k,
        "tuple": wire::tuple_json(&t),
        "moments": wire::matrix_json(m.matrix.matrix()),
    }))
}

fn cmd_refute(path: Option<&Path>, tol: &Tolerance) -> Outcome {
    let m = match path {
        Some(p) => load_matrix(p)?,
        None => fixtures::f6_matrix(),
    };
    let cert = moments::refute_commuting_f6(&m, tol)?;
    let report = json!({ "certificate": cert });
    if cert.refuted {
        Ok(report)
    } else {
        Err(Failure { code: 3, report })
    }
}

fn run(cli: &Cli) -> Outcome {
    let tol = Tolerance::new(cli.tol_psd, cli.tol_rank, cli.tol_eq)
        .map_err(|e| Failure::new(1, e.to_string()))?;
    if cli.cap < 2 {
        return Err(Failure::new(1, "--cap must be at least 2"));
    }
    match &cli.command {
        Command::Validate { path } => cmd_validate(path, &tol),
        Command::Factor { path } => cmd_factor(path, &tol),
        Command::Extreme { path, real_mode } => cmd_extreme(path, *real_mode, &tol),
        Command::Decompose { path, real_mode } => cmd_decompose(path, *real_mode, &tol),
        // realization is defined for real inputs only, so the flag changes nothing
        Command::Realize { path, .. } => cmd_realize(path, &tol, cli.cap),
        Command::Bound { path, target } => cmd_bound(path, *target, &tol),
        Command::Verify { tuple, matrix } => cmd_verify(tuple, matrix, &tol),
        Command::Sample { n, k } => cmd_sample(*n, *k, cli.seed, &tol),
        Command::RefuteF6 { path } => cmd_refute(path.as_deref(), &tol),
    }
}

fn render(v: &Value, output: Output) -> String {
    let mut s = match output {
        Output::Json => serde_json::to_string(v),
        Output::Pretty => serde_json::to_string_pretty(v),
    }
    .expect("report serialization");
    s.push('\n');
    s
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    let (code, report) = match run(&cli) {
        Ok(v) => (0, v),
        Err(f) => (f.code, f.report),
    };
    if code != 0 {
        if let Some(msg) = report.get("message").or_else(|| report["error"].get("message")) {
            eprintln!("unimoments: {}", msg.as_str().unwrap_or_default());
        }
    }
    // one write so a reader never sees a partial report
    let text = render(&report, cli.output);
    let mut out = std::io::stdout().lock();
    if out.write_all(text.as_bytes()).and_then(|_| out.flush()).is_err() {
        return ExitCode::from(1);
    }
    ExitCode::from(code)
}
