//! kuo-stab: reproducible CSV/JSON artifacts for the barotropic
//! stability library (eigenvalue contours, the stability boundary,
//! growth-rate maps, and verification suites).
//!
//! Exit codes: 0 success, 1 verification failure, 2 usage error,
//! 3 numeric failure.

mod output;
mod verify;

use clap::{Args, Parser, Subcommand, ValueEnum};
use kuo_stab_core::{
    boundary_sweep, closedform, eigenvalues_with_errors, find_unstable_mode, sinus_profile,
    BoundaryCase, Error as CoreError, ResolvedSpeed, SlProblem, Speed,
};
use output::{emit, emit_plot_script, Cell, Table};
use rayon::prelude::*;
use serde_json::json;
use std::path::PathBuf;
use std::process::ExitCode;
use std::str::FromStr;

#[derive(Parser)]
#[command(name = "kuo-stab", version, about = "Barotropic stability artifacts")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Eigenvalues of the shear operator at one (beta, c)
    Eigen(EigenArgs),
    /// Grid of the principal eigenvalue over (beta, ctilde)
    Contour(ContourArgs),
    /// The stability boundary alpha^2 = Lambda_beta
    Boundary(BoundaryArgs),
    /// Unstable dispersion roots over an (alpha, beta) grid
    Growthmap(GrowthmapArgs),
    /// Re-run library invariant suites and emit a JSON report
    Verify(VerifyArgs),
}

#[derive(Args)]
struct Common {
    /// Relative eigenvalue tolerance
    #[arg(long, default_value_t = 1e-8)]
    tol: f64,
    /// Output file (stdout when omitted)
    #[arg(long)]
    out: Option<PathBuf>,
    /// Output format
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
    /// Worker threads, 0 = auto; env KUO_STAB_THREADS overrides
    #[arg(long, default_value_t = 0)]
    threads: usize,
    /// Also write a gnuplot script next to the CSV
    #[arg(long)]
    emit_plot: bool,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

/// A linearly spaced inclusive range "start:stop:count".
#[derive(Debug, Clone, Copy)]
struct Range {
    start: f64,
    stop: f64,
    count: usize,
}

impl Range {
    fn values(&self) -> Vec<f64> {
        if self.count == 1 {
            return vec![self.start];
        }
        (0..self.count)
            .map(|i| {
                self.start + (self.stop - self.start) * i as f64 / (self.count - 1) as f64
            })
            .collect()
    }
}

impl FromStr for Range {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let parts: Vec<&str> = s.split(':').collect();
        if parts.len() != 3 {
            return Err(format!("expected start:stop:count, got '{s}'"));
        }
        let start: f64 = parts[0].parse().map_err(|e| format!("bad start: {e}"))?;
        let stop: f64 = parts[1].parse().map_err(|e| format!("bad stop: {e}"))?;
        let count: usize = parts[2].parse().map_err(|e| format!("bad count: {e}"))?;
        if count == 0 {
            return Err("count must be positive".into());
        }
        Ok(Range { start, stop, count })
    }
}

#[derive(Args)]
struct EigenArgs {
    #[arg(long, allow_hyphen_values = true)]
    beta: f64,
    /// Finite phase speed
    #[arg(long, allow_hyphen_values = true)]
    c: Option<f64>,
    /// Compactified speed ctilde = 1/(c - 1/2)
    #[arg(long, allow_hyphen_values = true)]
    ctilde: Option<f64>,
    /// Speed at infinity
    #[arg(long = "c-inf")]
    c_inf: bool,
    /// The regular speed c = U_beta
    #[arg(long = "c-ubeta")]
    c_ubeta: bool,
    /// Number of eigenvalues
    #[arg(long, default_value_t = 3)]
    nmax: usize,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct ContourArgs {
    /// beta grid, start:stop:count
    #[arg(long, allow_hyphen_values = true)]
    beta_range: Range,
    /// ctilde grid, start:stop:count
    #[arg(long, allow_hyphen_values = true)]
    ctilde_range: Range,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct BoundaryArgs {
    /// beta grid, start:stop:count
    #[arg(long, conflicts_with = "table1", allow_hyphen_values = true)]
    beta_range: Option<Range>,
    /// Use the fixed 14-point reference beta list
    #[arg(long)]
    table1: bool,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct GrowthmapArgs {
    /// alpha grid, start:stop:count
    #[arg(long, allow_hyphen_values = true)]
    alpha_range: Range,
    /// beta grid, start:stop:count
    #[arg(long, allow_hyphen_values = true)]
    beta_range: Range,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct VerifyArgs {
    /// Suite name (default: all suites)
    #[arg(long)]
    suite: Option<String>,
    /// Index-suite grid as NxM
    #[arg(long, default_value = "6x4")]
    grid: String,
    #[command(flatten)]
    common: Common,
}

enum AppError {
    Usage(String),
    Numeric(String),
    Io(std::io::Error),
}

impl From<CoreError> for AppError {
    fn from(e: CoreError) -> Self {
        AppError::Numeric(e.to_string())
    }
}

impl From<std::io::Error> for AppError {
    fn from(e: std::io::Error) -> Self {
        AppError::Io(e)
    }
}

fn init_threads(flag: usize) {
    let n = std::env::var("KUO_STAB_THREADS")
        .ok()
        .and_then(|v| v.parse::<usize>().ok())
        .unwrap_or(flag);
    if n > 0 {
        // ignore the error when a pool already exists
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Eigen(a) => cmd_eigen(a),
        Command::Contour(a) => cmd_contour(a),
        Command::Boundary(a) => cmd_boundary(a),
        Command::Growthmap(a) => cmd_growthmap(a),
        Command::Verify(a) => cmd_verify(a),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(AppError::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(AppError::Numeric(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(3)
        }
        Err(AppError::Io(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(3)
        }
    }
}

fn write_table(table: &Table, common: &Common, plot_body: Option<&str>) -> Result<u8, AppError> {
    let content = match common.format {
        Format::Csv => table.to_csv(),
        Format::Json => table.to_json(),
    };
    emit(common.out.as_deref(), &content)?;
    if common.emit_plot {
        if let (Some(path), Some(body), Format::Csv) =
            (common.out.as_deref(), plot_body, common.format)
        {
            emit_plot_script(path, body)?;
        }
    }
    Ok(0)
}

fn cmd_eigen(args: EigenArgs) -> Result<u8, AppError> {
    init_threads(args.common.threads);
    let picked = [
        args.c.is_some(),
        args.ctilde.is_some(),
        args.c_inf,
        args.c_ubeta,
    ]
    .iter()
    .filter(|&&v| v)
    .count();
    if picked != 1 {
        return Err(AppError::Usage(
            "exactly one of --c, --ctilde, --c-inf, --c-ubeta is required".into(),
        ));
    }
    if args.nmax == 0 {
        return Err(AppError::Usage("--nmax must be positive".into()));
    }
    let profile = sinus_profile();
    let ub = profile.u_beta(args.beta).ok();
    let speed = if let Some(c) = args.c {
        Speed::Finite(c)
    } else if let Some(ct) = args.ctilde {
        Speed::Compactified(ct)
    } else if args.c_inf {
        Speed::Infinity
    } else {
        Speed::Finite(ub.ok_or_else(|| {
            AppError::Usage("--c-ubeta requires beta within Ran(U'')".into())
        })?)
    };
    let problem = SlProblem::new(profile, args.beta, speed);

    // closed-form reference when the speed lies on a known curve
    let closed: Option<Box<dyn Fn(usize) -> Option<f64>>> = match problem.resolved_speed() {
        ResolvedSpeed::Infinity => Some(Box::new(|n| Some(closedform::lambda_infinity(n)))),
        ResolvedSpeed::Finite(c) => {
            if ub.is_some_and(|u| (c - u).abs() < 1e-12) {
                Some(Box::new(|n| Some(closedform::lambda_regular(n))))
            } else if c == 0.0 {
                let beta = args.beta;
                Some(Box::new(move |n| closedform::lambda_c0(beta, n).ok()))
            } else if c == 1.0 {
                let beta = args.beta;
                Some(Box::new(move |n| closedform::lambda_c1(beta, n).ok()))
            } else {
                None
            }
        }
    };

    let (lambdas, errors) = eigenvalues_with_errors(&problem, args.nmax, args.common.tol)?;
    let mut table = Table::new(if closed.is_some() {
        vec!["n", "lambda", "est_error", "closed_form"]
    } else {
        vec!["n", "lambda", "est_error"]
    });
    for (i, (&lam, &err)) in lambdas.iter().zip(&errors).enumerate() {
        let n = i + 1;
        let mut row = vec![Cell::Int(n as i64), Cell::Num(lam), Cell::Num(err)];
        if let Some(f) = &closed {
            row.push(match f(n) {
                Some(v) => Cell::Num(v),
                None => Cell::Text(String::new()),
            });
        }
        table.push(row);
    }
    write_table(
        &table,
        &args.common,
        Some("set xlabel 'n'\nset ylabel 'lambda'\nplot csv every ::1 using 1:2 with points pt 7"),
    )
}

fn cmd_contour(args: ContourArgs) -> Result<u8, AppError> {
    init_threads(args.common.threads);
    let betas = args.beta_range.values();
    let ctildes = args.ctilde_range.values();
    let tol = args.common.tol;

    let cells: Vec<(f64, f64)> = betas
        .iter()
        .flat_map(|&b| ctildes.iter().map(move |&ct| (b, ct)))
        .collect();
    let computed: Vec<Result<(f64, f64), CoreError>> = cells
        .par_iter()
        .map(|&(beta, ct)| {
            let problem = SlProblem::new(sinus_profile(), beta, Speed::Compactified(ct));
            let c = match problem.resolved_speed() {
                ResolvedSpeed::Finite(c) => c,
                ResolvedSpeed::Infinity => f64::INFINITY,
            };
            kuo_stab_core::eigenvalues(&problem, 1, tol).map(|l| (c, l[0]))
        })
        .collect();

    let mut table = Table::new(vec!["beta", "ctilde", "c", "lambda1"]);
    for ((beta, ct), res) in cells.into_iter().zip(computed) {
        let (c, l1) = res?;
        table.push(vec![
            Cell::Num(beta),
            Cell::Num(ct),
            Cell::Num(c),
            Cell::Num(l1),
        ]);
    }
    write_table(
        &table,
        &args.common,
        Some("set xlabel 'beta'\nset ylabel 'ctilde'\nset view map\nsplot csv every ::1 using 1:2:(-$4) with points palette pt 5"),
    )
}

/// The 14 reference beta values of the boundary table.
const TABLE1_BETAS: [f64; 14] = [
    1.80626, 2.60650, 2.85444, 3.05645, 3.24603, 3.44449, 3.69853, 4.18261, 4.37126, 4.49531,
    4.59739, 4.69034, 4.78396, 4.93480,
];

fn cmd_boundary(args: BoundaryArgs) -> Result<u8, AppError> {
    init_threads(args.common.threads);
    let betas: Vec<f64> = if args.table1 {
        TABLE1_BETAS.to_vec()
    } else {
        args.beta_range
            .ok_or_else(|| AppError::Usage("--beta-range or --table1 is required".into()))?
            .values()
    };
    let points = boundary_sweep(&betas, args.common.tol)?;

    let mut table = Table::new(vec![
        "beta",
        "sqrt_lambda",
        "c_star",
        "snm_alpha",
        "difference",
        "case",
    ]);
    for p in points {
        let sqrt_lambda = p.capital_lambda.max(0.0).sqrt();
        let case = match p.case {
            BoundaryCase::EndpointMonotone => "endpoint",
            BoundaryCase::InteriorHump => "hump",
            BoundaryCase::Zero => "zero",
        };
        table.push(vec![
            Cell::Num(p.beta),
            Cell::Num(sqrt_lambda),
            Cell::Num(p.c_star),
            Cell::Num(p.snm_alpha),
            Cell::Num(sqrt_lambda - p.snm_alpha),
            Cell::Text(case.into()),
        ]);
    }
    write_table(
        &table,
        &args.common,
        Some("set xlabel 'beta'\nset ylabel 'sqrt(Lambda)'\nplot csv every ::1 using 1:2 with linespoints pt 7"),
    )
}

fn cmd_growthmap(args: GrowthmapArgs) -> Result<u8, AppError> {
    init_threads(args.common.threads);
    let alphas = args.alpha_range.values();
    let betas = args.beta_range.values();

    let cells: Vec<(f64, f64)> = alphas
        .iter()
        .flat_map(|&a| betas.iter().map(move |&b| (a, b)))
        .collect();
    let computed: Vec<Result<Vec<Cell>, CoreError>> = cells
        .par_iter()
        .map(|&(alpha, beta)| match find_unstable_mode(alpha, beta) {
            Ok(Some(mode)) => Ok(vec![
                Cell::Num(alpha),
                Cell::Num(beta),
                Cell::Num(mode.c.re),
                Cell::Num(mode.c.im),
                Cell::Text("1".into()),
            ]),
            Ok(None) => Ok(vec![
                Cell::Num(alpha),
                Cell::Num(beta),
                Cell::Text(String::new()),
                Cell::Text(String::new()),
                Cell::Text("0".into()),
            ]),
            Err(CoreError::ContourAmbiguous { .. }) => Ok(vec![
                Cell::Num(alpha),
                Cell::Num(beta),
                Cell::Text(String::new()),
                Cell::Text(String::new()),
                Cell::Text("boundary".into()),
            ]),
            Err(e) => Err(e),
        })
        .collect();

    let mut table = Table::new(vec!["alpha", "beta", "c_re", "c_im", "found"]);
    for res in computed {
        table.push(res?);
    }
    write_table(
        &table,
        &args.common,
        Some("set xlabel 'alpha'\nset ylabel 'beta'\nset view map\nsplot csv every ::1 using 1:2:4 with points palette pt 5"),
    )
}

fn cmd_verify(args: VerifyArgs) -> Result<u8, AppError> {
    init_threads(args.common.threads);
    let grid = parse_grid(&args.grid)?;
    let name = args.suite.as_deref().unwrap_or("all");
    let report = verify::run_suite(name, grid, args.common.tol).ok_or_else(|| {
        AppError::Usage(format!(
            "unknown suite '{name}'; available: {}",
            verify::SUITES.join(", ")
        ))
    })?;

    let doc = json!({
        "suite": name,
        "passed": report.passed,
        "failed": report.failed,
        "details": report.details,
    });
    let mut content = serde_json::to_string_pretty(&doc).expect("serializable");
    content.push('\n');
    emit(args.common.out.as_deref(), &content)?;
    Ok(if report.failed == 0 { 0 } else { 1 })
}

fn parse_grid(s: &str) -> Result<(usize, usize), AppError> {
    let parts: Vec<&str> = s.split('x').collect();
    let err = || AppError::Usage(format!("expected --grid NxM, got '{s}'"));
    if parts.len() != 2 {
        return Err(err());
    }
    let n: usize = parts[0].parse().map_err(|_| err())?;
    let m: usize = parts[1].parse().map_err(|_| err())?;
    if n == 0 || m == 0 {
        return Err(err());
    }
    Ok((n, m))
}
