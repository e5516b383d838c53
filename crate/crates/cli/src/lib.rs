//! The `qmc` command line: catalog pipelines, single operators and
//! verification reports over JSON tuple documents.

pub mod checks;
pub mod document;
pub mod operators;

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Parser, Subcommand};
use qmc_core::catalog::{self, Params};
use qmc_core::linalg::{TolerancePolicy, C64};

use checks::{Report, VerifyArgs, DEFAULT_SEED};
use document::{Metadata, McInfo, TupleDocument};
use operators::OpArgs;

pub const EXIT_PASS: i32 = 0;
pub const EXIT_TOLERANCE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_NON_GENERIC: i32 = 3;

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Format(String),
    NonGeneric(String),
    Io(String),
    Core(qmc_core::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        use qmc_core::Error as E;
        match self {
            CliError::Usage(_) | CliError::Format(_) | CliError::Io(_) => EXIT_USAGE,
            CliError::NonGeneric(_) => EXIT_NON_GENERIC,
            CliError::Core(e) => match e {
                E::UnknownName(_) | E::Argument(_) | E::Dimension(_) | E::PoleCollision(_) => EXIT_USAGE,
                E::NotInvariant { .. }
                | E::NonGenericParameter(_)
                | E::NonGenericSpectrum(_)
                | E::StarViolation(_)
                | E::Degenerate(_) => EXIT_NON_GENERIC,
                E::Pole(_) | E::Divergence(_) | E::SingularStep(_) | E::IsomorphismFailure { .. } => EXIT_TOLERANCE,
            },
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(s) => write!(f, "usage: {s}"),
            CliError::Format(s) => write!(f, "format: {s}"),
            CliError::NonGeneric(s) => write!(f, "{s}"),
            CliError::Io(s) => write!(f, "io: {s}"),
            CliError::Core(e) => write!(f, "{e}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<qmc_core::Error> for CliError {
    fn from(e: qmc_core::Error) -> Self {
        CliError::Core(e)
    }
}

/// Parses `1.5`, `-2i`, `0.3-0.2i`, `1e-3+2e-1i`.
pub fn parse_complex(s: &str) -> Result<C64, String> {
    C64::from_str(s.trim()).map_err(|_| format!("{s:?} is not a complex number (expected a+bi)"))
}

fn parse_param(s: &str) -> Result<(String, C64), String> {
    let (k, v) = s.split_once('=').ok_or_else(|| format!("{s:?} is not key=value"))?;
    Ok((k.trim().to_string(), parse_complex(v)?))
}

#[derive(Debug, Parser)]
#[command(name = "qmc", version, about = "q-convolution, q-middle convolution and q-additions of q-difference systems")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build a named construction and write a document for every stage.
    Catalog {
        /// Construction name; `list` prints the known names.
        name: String,
        /// Parameter overrides, `key=value` with complex values like 0.3+0.1i.
        #[arg(long, num_args = 1.., value_parser = parse_param)]
        params: Vec<(String, C64)>,
        /// File for the final stage.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Directory for every stage, one file each.
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
    /// Apply one operator to a tuple document.
    Apply {
        /// conv, mc, add, polemove, syconv or drconv.
        op: String,
        /// Input document.
        #[arg(long = "in")]
        input: PathBuf,
        /// Convolution parameter (conv, mc, syconv, drconv).
        #[arg(long, value_parser = parse_complex, allow_hyphen_values = true)]
        lambda: Option<C64>,
        /// Exponent of the addition (add).
        #[arg(long, value_parser = parse_complex, allow_hyphen_values = true)]
        mu: Option<C64>,
        /// Index of the pole to move (polemove).
        #[arg(long)]
        index: Option<usize>,
        /// New position of the pole (polemove).
        #[arg(long, value_parser = parse_complex, allow_hyphen_values = true)]
        newpole: Option<C64>,
        /// Output file; stdout if omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a verification check and print a JSON report.
    Verify {
        /// residual, scalar, additivity, spectral, table1, limits or integral.
        what: String,
        /// Construction name (spectral, scalar).
        #[arg(long)]
        name: Option<String>,
        /// Parameter overrides, `key=value`.
        #[arg(long, num_args = 1.., value_parser = parse_param)]
        params: Vec<(String, C64)>,
        /// First exponent for additivity; random draws if omitted.
        #[arg(long, value_parser = parse_complex, allow_hyphen_values = true)]
        l1: Option<C64>,
        /// Second exponent for additivity.
        #[arg(long, value_parser = parse_complex, allow_hyphen_values = true)]
        l2: Option<C64>,
        /// Seed for random parameter draws.
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
        /// Number of random draws per case.
        #[arg(long)]
        draws: Option<usize>,
    },
}

/// Residual tolerance from `QMC_TOL`, if set.
pub fn tol_from_env() -> Result<Option<f64>, CliError> {
    match std::env::var("QMC_TOL") {
        Err(_) => Ok(None),
        Ok(s) => {
            let v: f64 = s.trim().parse().map_err(|_| CliError::Usage(format!("QMC_TOL={s:?} is not a number")))?;
            TolerancePolicy::default().with_residual_tol(v).map_err(|e| CliError::Usage(e.to_string()))?;
            Ok(Some(v))
        }
    }
}

fn policy(tol: Option<f64>) -> Result<TolerancePolicy, CliError> {
    let p = TolerancePolicy::default();
    match tol {
        Some(v) => p.with_residual_tol(v).map_err(|e| CliError::Usage(e.to_string())),
        None => Ok(p),
    }
}

fn write_file(path: &Path, text: &str) -> Result<(), CliError> {
    fs::write(path, text).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

/// Where a command's messages go: the report stream, and stdout for documents.
pub struct Streams<'a> {
    pub out: &'a mut dyn Write,
    pub err: &'a mut dyn Write,
}

macro_rules! say {
    ($w:expr, $($t:tt)*) => {
        writeln!($w, $($t)*).map_err(|e| CliError::Io(e.to_string()))
    };
}

pub fn run(cli: Cli, io: &mut Streams) -> Result<i32, CliError> {
    let tol = tol_from_env()?;
    match cli.command {
        Command::Catalog { name, params, out, out_dir } => cmd_catalog(&name, params, out, out_dir, tol, io),
        Command::Apply { op, input, lambda, mu, index, newpole, out } => {
            cmd_apply(&op, &input, OpArgs { lambda, mu, index, newpole }, out, tol, io)
        }
        Command::Verify { what, name, params, l1, l2, seed, draws } => {
            let args = VerifyArgs { name, params: params.into_iter().collect(), l1, l2, seed, draws, tol_override: tol };
            cmd_verify(&what, &args, tol, io)
        }
    }
}

fn cmd_catalog(
    name: &str,
    params: Vec<(String, C64)>,
    out: Option<PathBuf>,
    out_dir: Option<PathBuf>,
    tol: Option<f64>,
    io: &mut Streams,
) -> Result<i32, CliError> {
    let reg = catalog::registry();
    if name == "list" {
        for c in reg.iter() {
            say!(io.out, "{:<14} {}", c.name(), c.description())?;
        }
        return Ok(EXIT_PASS);
    }
    let cons = reg.get(name)?;
    let given: Params = params.into_iter().collect();
    let chain = catalog::build_unchecked(cons, &given, &policy(tol)?)?;
    // With the final document on stdout the report moves to stderr.
    let to_files = out.is_some() || out_dir.is_some();
    let report: &mut dyn Write = if to_files { &mut *io.out } else { &mut *io.err };
    let meta_params: std::collections::BTreeMap<_, _> = chain.params.iter().map(|(k, v)| (k.clone(), (*v).into())).collect();
    let mut docs = Vec::new();
    for (i, stage) in chain.stages.iter().enumerate() {
        say!(report, "stage {i}: {} ({}×{}, {} poles)", stage.label, stage.tuple.m(), stage.tuple.m(), stage.tuple.poles().len())?;
        let mc = stage.mc.as_ref().map(|s| {
            let _ = writeln!(report, "  {}", s.summary());
            McInfo::new(s.lambda, &s.result)
        });
        let meta = Metadata { name: Some(format!("{name}/{i}")), params: meta_params.clone(), mc };
        docs.push(TupleDocument::from_tuple(&stage.tuple, Some(meta)));
    }
    if let Some(dir) = &out_dir {
        fs::create_dir_all(dir).map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))?;
        for (i, d) in docs.iter().enumerate() {
            write_file(&dir.join(format!("{name}-stage{i}.json")), &d.to_json())?;
        }
    }
    let last = docs.last().expect("a chain has at least one stage").to_json();
    match &out {
        Some(path) => write_file(path, &last)?,
        None if out_dir.is_none() => io.out.write_all(last.as_bytes()).map_err(|e| CliError::Io(e.to_string()))?,
        None => {}
    }
    if let Err(e) = chain.check_expected() {
        return Err(CliError::NonGeneric(e.to_string()));
    }
    Ok(EXIT_PASS)
}

fn cmd_apply(op: &str, input: &Path, args: OpArgs, out: Option<PathBuf>, tol: Option<f64>, io: &mut Streams) -> Result<i32, CliError> {
    let reg = operators::registry();
    let operator = reg.get(op)?;
    let text = fs::read_to_string(input).map_err(|e| CliError::Io(format!("{}: {e}", input.display())))?;
    let doc = TupleDocument::from_json(&text)?;
    let t = doc.to_tuple()?;
    let applied = operator.apply(&t, &args, &policy(tol)?)?;
    let report: &mut dyn Write = if out.is_some() { &mut *io.out } else { &mut *io.err };
    if let Some(mc) = &applied.mc {
        say!(report, "dim K={}, dim L={}, quotient={}", mc.dim_k, mc.dim_l, mc.quotient)?;
    }
    let text = if applied.unchanged {
        doc.to_json()
    } else {
        // The name and parameters describe the origin and carry over; mc data
        // describes only the step that produced this tuple.
        let mut meta = doc.metadata.clone().unwrap_or_default();
        meta.mc = applied.mc;
        let meta = if meta == Metadata::default() { None } else { Some(meta) };
        TupleDocument::from_tuple(&applied.tuple, meta).to_json()
    };
    match &out {
        Some(path) => write_file(path, &text)?,
        None => io.out.write_all(text.as_bytes()).map_err(|e| CliError::Io(e.to_string()))?,
    }
    Ok(EXIT_PASS)
}

fn cmd_verify(what: &str, args: &VerifyArgs, tol: Option<f64>, io: &mut Streams) -> Result<i32, CliError> {
    let reg = checks::registry();
    let check = reg.get(what)?;
    let items = check.run(args, &policy(tol)?)?;
    let report = Report::new(what, items);
    let text = serde_json::to_string_pretty(&report).map_err(|e| CliError::Io(e.to_string()))?;
    say!(io.out, "{text}")?;
    Ok(if report.pass { EXIT_PASS } else { EXIT_TOLERANCE })
}
