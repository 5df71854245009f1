//! Command implementations behind the `vsa` binary.
//!
//! Data goes to `--out` (or standard output); diagnostics go to standard
//! error. Exit codes: 0 success, 1 check failure, 2 invalid arguments.

pub mod sweep;

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use thiserror::Error;
use vsa_core::binding::detection_rank;
use vsa_core::codebook::dot_statistics;
use vsa_core::verify::{self, CheckResult, VerifyOptions};
use vsa_core::{Backend, Codebook, CodebookKind, VsaError};

pub use sweep::{SweepSpec, CSV_HEADER};

pub const EXIT_OK: u8 = 0;
pub const EXIT_CHECK_FAILED: u8 = 1;
pub const EXIT_INVALID: u8 = 2;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Invalid(String),
    #[error(transparent)]
    Core(#[from] VsaError),
    #[error("cannot write {path}: {source}")]
    Output { path: String, source: io::Error },
    #[error("{0} check(s) failed")]
    ChecksFailed(usize),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::ChecksFailed(_) => EXIT_CHECK_FAILED,
            _ => EXIT_INVALID,
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;

#[derive(Debug, Parser)]
#[command(
    name = "vsa",
    version,
    about = "Binding, detection and capacity experiments over seeded codebooks"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Dot-product statistics of random Rademacher pairs.
    Stats(StatsArgs),
    /// Monte Carlo capacity sweep over the cross product of the value lists.
    Capacity(CapacityArgs),
    /// Run the invariant suite and print a pass/fail table.
    Verify(VerifyArgs),
    /// Numerical rank of the detection functionals of a d-element codebook.
    Rank(RankArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BackendArg {
    Tensor,
    Hadamard,
    Convolution,
}

impl From<BackendArg> for Backend {
    fn from(b: BackendArg) -> Self {
        match b {
            BackendArg::Tensor => Backend::Tensor,
            BackendArg::Hadamard => Backend::Hadamard,
            BackendArg::Convolution => Backend::Convolution,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum KindArg {
    Rademacher,
    Orthonormal,
    Canonical,
}

impl From<KindArg> for CodebookKind {
    fn from(k: KindArg) -> Self {
        match k {
            KindArg::Rademacher => CodebookKind::Rademacher,
            KindArg::Orthonormal => CodebookKind::Orthonormal,
            KindArg::Canonical => CodebookKind::Canonical,
        }
    }
}

#[derive(Debug, Args)]
pub struct Common {
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Output path; standard output when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct StatsArgs {
    #[arg(long, default_value_t = 100)]
    pub d: usize,
    #[arg(long = "pairs", default_value_t = 100_000)]
    pub n_pairs: usize,
    #[command(flatten)]
    pub common: Common,
    /// json: full statistics; csv: the `agreements,count` histogram.
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
}

#[derive(Debug, Args)]
pub struct CapacityArgs {
    #[arg(long, value_enum, value_delimiter = ',', default_value = "hadamard")]
    pub backend: Vec<BackendArg>,
    #[arg(long, value_delimiter = ',', default_value = "256,1024")]
    pub d: Vec<usize>,
    #[arg(long, value_delimiter = ',', default_value = "2")]
    pub n: Vec<usize>,
    #[arg(long, value_delimiter = ',', default_value = "4,16,64")]
    pub k: Vec<usize>,
    #[arg(long, value_delimiter = ',', default_value = "15")]
    pub m: Vec<usize>,
    #[arg(long, default_value_t = 1000)]
    pub trials: usize,
    #[command(flatten)]
    pub common: Common,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Test hook: make binding affine so the multilinearity check fails.
    #[arg(long, hide = true)]
    pub corrupt_binding: bool,
}

#[derive(Debug, Args)]
pub struct RankArgs {
    #[arg(long)]
    pub d: usize,
    #[arg(long)]
    pub n: usize,
    #[arg(long, value_enum, default_value_t = BackendArg::Tensor)]
    pub backend: BackendArg,
    #[arg(long, value_enum, default_value_t = KindArg::Orthonormal)]
    pub kind: KindArg,
    #[command(flatten)]
    pub common: Common,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
}

/// Runs a parsed command line and returns the process exit code.
pub fn run(cli: Cli) -> u8 {
    let result = match cli.command {
        Command::Stats(args) => cmd_stats(&args),
        Command::Capacity(args) => SweepSpec::try_from(&args).and_then(|spec| cmd_capacity(&spec)),
        Command::Verify(args) => cmd_verify(&args),
        Command::Rank(args) => cmd_rank(&args),
    };
    match result {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

/// Opens `path` for writing, or standard output.
pub(crate) fn open_output(path: Option<&Path>) -> CliResult<Box<dyn Write>> {
    match path {
        Some(p) => {
            let f = File::create(p).map_err(|source| CliError::Output {
                path: p.display().to_string(),
                source,
            })?;
            Ok(Box::new(BufWriter::new(f)))
        }
        None => Ok(Box::new(BufWriter::new(io::stdout()))),
    }
}

pub(crate) fn io_err(path: Option<&Path>) -> impl Fn(io::Error) -> CliError + '_ {
    move |source| CliError::Output {
        path: path.map_or_else(|| "<stdout>".into(), |p| p.display().to_string()),
        source,
    }
}

pub fn cmd_stats(args: &StatsArgs) -> CliResult<()> {
    let stats = dot_statistics(args.d, args.n_pairs, args.common.seed)?;
    let out_path = args.common.out.as_deref();
    let mut out = open_output(out_path)?;
    match args.format {
        Format::Json => {
            serde_json::to_writer_pretty(&mut out, &stats).map_err(|e| io_err(out_path)(e.into()))?;
            writeln!(out).map_err(io_err(out_path))?;
        }
        Format::Csv => {
            writeln!(out, "agreements,count").map_err(io_err(out_path))?;
            for (j, c) in stats.histogram.iter().enumerate() {
                writeln!(out, "{j},{c}").map_err(io_err(out_path))?;
            }
        }
    }
    out.flush().map_err(io_err(out_path))
}

pub fn cmd_capacity(spec: &SweepSpec) -> CliResult<()> {
    sweep::run_sweep(spec)
}

#[derive(Debug, Serialize)]
struct VerifyReport {
    seed: u64,
    checks_run: usize,
    passed: usize,
    failed: usize,
    checks: Vec<CheckResult>,
}

/// Runs every invariant check, including the command-line ones.
pub fn verify_checks(seed: u64, corrupt_binding: bool) -> Vec<CheckResult> {
    let mut checks = verify::run_all(VerifyOptions { seed, corrupt_binding });
    checks.extend(sweep::self_checks(seed));
    checks
}

pub fn cmd_verify(args: &VerifyArgs) -> CliResult<()> {
    let checks = verify_checks(args.common.seed, args.corrupt_binding);
    let passed = checks.iter().filter(|c| c.passed).count();
    let failed = checks.len() - passed;
    let out_path = args.common.out.as_deref();
    let mut out = open_output(out_path)?;
    match args.format {
        Some(Format::Json) => {
            let report = VerifyReport {
                seed: args.common.seed,
                checks_run: checks.len(),
                passed,
                failed,
                checks: checks.clone(),
            };
            serde_json::to_writer_pretty(&mut out, &report).map_err(|e| io_err(out_path)(e.into()))?;
            writeln!(out).map_err(io_err(out_path))?;
        }
        Some(Format::Csv) => {
            writeln!(out, "check,passed,detail").map_err(io_err(out_path))?;
            for c in &checks {
                writeln!(out, "{},{},\"{}\"", c.name, c.passed, c.detail.replace('"', "'"))
                    .map_err(io_err(out_path))?;
            }
        }
        None => {
            let width = checks.iter().map(|c| c.name.len()).max().unwrap_or(0);
            for c in &checks {
                let status = if c.passed { "PASS" } else { "FAIL" };
                writeln!(out, "{status}  {:width$}  {}", c.name, c.detail).map_err(io_err(out_path))?;
            }
            writeln!(out, "checks run: {}, passed: {passed}, failed: {failed}", checks.len())
                .map_err(io_err(out_path))?;
        }
    }
    out.flush().map_err(io_err(out_path))?;
    if failed > 0 {
        let names: Vec<&str> = checks.iter().filter(|c| !c.passed).map(|c| c.name).collect();
        eprintln!("failing checks: {}", names.join(", "));
        return Err(CliError::ChecksFailed(failed));
    }
    Ok(())
}

#[derive(Debug, Serialize)]
struct RankReport {
    d: usize,
    n: usize,
    backend: Backend,
    kind: CodebookKind,
    seed: u64,
    rank: usize,
    reference: u128,
}

pub fn cmd_rank(args: &RankArgs) -> CliResult<()> {
    if args.d == 0 || args.n == 0 {
        return Err(CliError::Invalid("rank needs d >= 1 and n >= 1".into()));
    }
    let kind = CodebookKind::from(args.kind);
    let backend = Backend::from(args.backend);
    let cb = Codebook::generate(kind, args.d, args.d, args.common.seed)?;
    let rank = detection_rank(&cb, backend, args.n)?;
    let report = RankReport {
        d: args.d,
        n: args.n,
        backend,
        kind,
        seed: args.common.seed,
        rank,
        reference: (args.d as u128).pow(args.n as u32),
    };
    let out_path = args.common.out.as_deref();
    let mut out = open_output(out_path)?;
    match args.format {
        Some(Format::Json) => {
            serde_json::to_writer_pretty(&mut out, &report).map_err(|e| io_err(out_path)(e.into()))?;
            writeln!(out).map_err(io_err(out_path))?;
        }
        Some(Format::Csv) => {
            writeln!(out, "backend,kind,d,n,seed,rank,reference").map_err(io_err(out_path))?;
            writeln!(
                out,
                "{},{},{},{},{},{},{}",
                backend, kind, report.d, report.n, report.seed, report.rank, report.reference
            )
            .map_err(io_err(out_path))?;
        }
        None => {
            writeln!(out, "rank: {}", report.rank).map_err(io_err(out_path))?;
            writeln!(out, "reference (d^n): {}", report.reference).map_err(io_err(out_path))?;
        }
    }
    out.flush().map_err(io_err(out_path))
}
