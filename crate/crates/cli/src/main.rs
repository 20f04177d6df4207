//! `rabicf`: spectra of the finite coupled-spin model and the quantum Rabi
//! model, a contraction convergence study, and the deterministic validation
//! suites.
//!
//! Exit codes: 0 success, 1 usage error, 2 computation/convergence failure.
//! Data goes to stdout (or `--out`), diagnostics to stderr.

use std::fmt::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use rabicf_core::contraction::spectral_convergence;
use rabicf_core::spectra::{hl_spectrum, rabi_spectrum, Level, RabiParams, SolveMeta};
use rabicf_core::validate::{run_suites, SuiteKind};
use rabicf_core::{ModelParams, SolverError, Spin};

#[derive(Parser)]
#[command(
    name = "rabicf",
    version,
    about = "Exact spectra of a coupled-spin model and the quantum Rabi model via terminating continued fractions"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compute a spectrum
    #[command(subcommand)]
    Spectrum(SpectrumCommand),
    /// Compare finite-model spectra against the Rabi limit over a list of l
    Converge(ConvergeArgs),
    /// Run the seeded validation suites
    Validate(ValidateArgs),
}

#[derive(Subcommand)]
enum SpectrumCommand {
    /// Finite coupled-spin model with r = 1/2: both parity chains, all
    /// 2(2l+1) eigenvalues
    Hl(HlArgs),
    /// Quantum Rabi model: lowest levels under adaptive truncation
    Rabi(RabiArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum OutputFormat {
    Csv,
    Json,
}

#[derive(Args)]
struct HlArgs {
    #[arg(long)]
    omega: f64,
    #[arg(long)]
    delta: f64,
    #[arg(long)]
    g: f64,
    /// Integer spin l (r is fixed at 1/2)
    #[arg(long)]
    l: u32,
    #[arg(long, default_value_t = 1e-10)]
    tol: f64,
    #[arg(long, value_enum, default_value_t = OutputFormat::Csv)]
    format: OutputFormat,
    /// Write to this file instead of stdout
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct RabiArgs {
    #[arg(long)]
    omega: f64,
    #[arg(long)]
    delta: f64,
    #[arg(long)]
    g: f64,
    /// How many of the lowest eigenvalues to report
    #[arg(long, default_value_t = 10, value_parser = clap::value_parser!(u32).range(1..))]
    levels: u32,
    #[arg(long, default_value_t = 1e-8)]
    tol: f64,
    #[arg(long, value_enum, default_value_t = OutputFormat::Csv)]
    format: OutputFormat,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ConvergeArgs {
    #[arg(long)]
    omega: f64,
    #[arg(long)]
    delta: f64,
    #[arg(long)]
    g: f64,
    #[arg(long, default_value_t = 6, value_parser = clap::value_parser!(u32).range(1..))]
    levels: u32,
    /// Comma-separated integer spins, e.g. 8,16,32,64 (need at least two)
    #[arg(long = "l-list")]
    l_list: String,
    #[arg(long, default_value_t = 1e-8)]
    tol: f64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum SuiteArg {
    All,
    Cf,
    Block,
    Spectra,
    Contraction,
}

impl From<SuiteArg> for SuiteKind {
    fn from(s: SuiteArg) -> SuiteKind {
        match s {
            SuiteArg::All => SuiteKind::All,
            SuiteArg::Cf => SuiteKind::Cf,
            SuiteArg::Block => SuiteKind::Block,
            SuiteArg::Spectra => SuiteKind::Spectra,
            SuiteArg::Contraction => SuiteKind::Contraction,
        }
    }
}

#[derive(Args)]
struct ValidateArgs {
    #[arg(long, value_enum, default_value_t = SuiteArg::All)]
    suite: SuiteArg,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

/// A failure with the exit code it maps to.
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Self {
        Failure {
            code: 1,
            message: message.into(),
        }
    }

    fn computation(message: impl Into<String>) -> Self {
        Failure {
            code: 2,
            message: message.into(),
        }
    }
}

impl From<SolverError> for Failure {
    fn from(e: SolverError) -> Self {
        match e {
            SolverError::ConvergenceFailure(_) => Failure::computation(e.to_string()),
            _ => Failure::usage(e.to_string()),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::usage(format!("cannot write output: {e}"))
    }
}

#[derive(Serialize)]
struct OutputRecord {
    schema_version: u32,
    params: ParamsEcho,
    eigenvalues: Vec<EigenvalueRecord>,
    meta: MetaRecord,
}

#[derive(Serialize)]
struct ParamsEcho {
    omega: f64,
    delta: f64,
    g: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    l: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    r: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    levels: Option<u32>,
}

#[derive(Serialize)]
struct EigenvalueRecord {
    index: usize,
    parity: String,
    value: f64,
}

#[derive(Serialize)]
struct MetaRecord {
    solver: String,
    tol: f64,
    truncation_k: Option<usize>,
    wall_time_ms: u64,
}

fn check_tol(tol: f64) -> Result<(), Failure> {
    if !tol.is_finite() || tol <= 0.0 {
        return Err(Failure::usage(format!(
            "--tol must be finite and positive, got {tol}"
        )));
    }
    Ok(())
}

fn spectrum_output(
    format: OutputFormat,
    params: ParamsEcho,
    solver: &str,
    tol: f64,
    eigenvalues: &[Level],
    meta: &SolveMeta,
    wall_time_ms: u64,
) -> Result<String, Failure> {
    let records: Vec<EigenvalueRecord> = eigenvalues
        .iter()
        .enumerate()
        .map(|(index, l)| EigenvalueRecord {
            index,
            parity: l.parity.label().to_string(),
            value: l.value,
        })
        .collect();
    match format {
        OutputFormat::Csv => {
            let mut out = String::from("index,parity,value\n");
            for r in &records {
                // `{}` prints the shortest string that parses back bit-exactly
                writeln!(out, "{},{},{}", r.index, r.parity, r.value).unwrap();
            }
            Ok(out)
        }
        OutputFormat::Json => {
            let record = OutputRecord {
                schema_version: 1,
                params,
                eigenvalues: records,
                meta: MetaRecord {
                    solver: solver.to_string(),
                    tol,
                    truncation_k: meta.truncation_k,
                    wall_time_ms,
                },
            };
            let mut s = serde_json::to_string_pretty(&record)
                .map_err(|e| Failure::usage(format!("JSON encoding failed: {e}")))?;
            s.push('\n');
            Ok(s)
        }
    }
}

fn emit(out: &Option<PathBuf>, content: &str) -> Result<(), Failure> {
    match out {
        Some(path) => std::fs::write(path, content)?,
        None => print!("{content}"),
    }
    Ok(())
}

fn run_hl(args: HlArgs) -> Result<(), Failure> {
    check_tol(args.tol)?;
    let params = ModelParams::new(
        args.omega,
        args.delta,
        args.g,
        Spin::integer(args.l),
        Spin::HALF,
    )?;
    let start = Instant::now();
    let result = hl_spectrum(&params, args.tol)?;
    let wall = start.elapsed().as_millis() as u64;
    let echo = ParamsEcho {
        omega: args.omega,
        delta: args.delta,
        g: args.g,
        l: Some(args.l),
        r: Some("1/2".to_string()),
        levels: None,
    };
    let content = spectrum_output(
        args.format,
        echo,
        "hl-cf",
        args.tol,
        &result.eigenvalues,
        &result.meta,
        wall,
    )?;
    emit(&args.out, &content)
}

fn run_rabi(args: RabiArgs) -> Result<(), Failure> {
    check_tol(args.tol)?;
    let params = RabiParams::new(
        args.omega,
        args.delta,
        args.g,
        args.levels as usize,
        args.tol,
    )?;
    let start = Instant::now();
    let result = rabi_spectrum(&params)?;
    let wall = start.elapsed().as_millis() as u64;
    let echo = ParamsEcho {
        omega: args.omega,
        delta: args.delta,
        g: args.g,
        l: None,
        r: None,
        levels: Some(args.levels),
    };
    let content = spectrum_output(
        args.format,
        echo,
        "rabi-cf",
        args.tol,
        &result.eigenvalues,
        &result.meta,
        wall,
    )?;
    emit(&args.out, &content)
}

fn parse_l_list(raw: &str) -> Result<Vec<Spin>, Failure> {
    let mut out = Vec::new();
    for piece in raw.split(',') {
        let piece = piece.trim();
        let l: u32 = piece
            .parse()
            .map_err(|_| Failure::usage(format!("--l-list entry '{piece}' is not an integer")))?;
        out.push(Spin::integer(l));
    }
    if out.len() < 2 {
        return Err(Failure::usage(
            "--l-list needs at least two entries for a convergence verdict",
        ));
    }
    Ok(out)
}

fn run_converge(args: ConvergeArgs) -> Result<(), Failure> {
    check_tol(args.tol)?;
    let l_list = parse_l_list(&args.l_list)?;
    let params = RabiParams::new(
        args.omega,
        args.delta,
        args.g,
        args.levels as usize,
        args.tol,
    )?;
    let table = spectral_convergence(&params, &l_list)?;

    let mut out = String::from("l,g_l,shift,level,abs_err\n");
    for row in &table.rows {
        for (level, err) in row.per_level_errors.iter().enumerate() {
            writeln!(
                out,
                "{},{},{},{level},{err:e}",
                row.l, row.g_l, row.shift
            )
            .unwrap();
        }
        writeln!(
            out,
            "{},{},{},max,{:e}",
            row.l, row.g_l, row.shift, row.max_err
        )
        .unwrap();
    }
    emit(&args.out, &out)?;

    let first = table.rows.first().map(|r| r.max_err).unwrap_or(0.0);
    let last = table.rows.last().map(|r| r.max_err).unwrap_or(0.0);
    // exact agreement (e.g. g = 0) counts as converged
    if last < first || last == 0.0 {
        Ok(())
    } else {
        Err(Failure::computation(format!(
            "no convergence: max_err at largest l ({last:e}) is not below smallest l ({first:e})"
        )))
    }
}

fn run_validate(args: ValidateArgs) -> Result<(), Failure> {
    let reports = run_suites(args.suite.into(), args.seed);
    let mut out = String::new();
    writeln!(out, "{:<12} {:<34} {:<6} detail", "suite", "check", "result").unwrap();
    let mut all_pass = true;
    let mut n_checks = 0usize;
    for report in &reports {
        for c in &report.checks {
            n_checks += 1;
            all_pass &= c.passed;
            writeln!(
                out,
                "{:<12} {:<34} {:<6} {}",
                report.suite,
                c.name,
                if c.passed { "pass" } else { "FAIL" },
                c.detail
            )
            .unwrap();
        }
    }
    writeln!(
        out,
        "overall: {} ({} suites, {} checks, seed {})",
        if all_pass { "pass" } else { "FAIL" },
        reports.len(),
        n_checks,
        args.seed
    )
    .unwrap();
    print!("{out}");
    if all_pass {
        Ok(())
    } else {
        Err(Failure {
            code: 2,
            message: "validation failed".to_string(),
        })
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Spectrum(SpectrumCommand::Hl(args)) => run_hl(args),
        Command::Spectrum(SpectrumCommand::Rabi(args)) => run_rabi(args),
        Command::Converge(args) => run_converge(args),
        Command::Validate(args) => run_validate(args),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
