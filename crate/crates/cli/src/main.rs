//! `chyp`: classify, decompose and certify isometries of the complex
//! hyperbolic plane from JSON files.
//!
//! Exit codes: 0 success (or decomposable), 1 not decomposable or a failed
//! certificate, 2 ambiguous within tolerance, 64 malformed input or bad
//! usage, 65 input that is well formed but geometrically invalid.

mod commands;
mod io;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use chyp::hermlin::{Model, Tolerance};
use chyp::GeomError;
use clap::{Args, Parser, Subcommand};

use commands::{HeisOp, SampleKind};

#[derive(Debug)]
pub enum Failure {
    Malformed(String),
    Usage(String),
    Invalid(String),
    Ambiguous(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Malformed(_) | Failure::Usage(_) => 64,
            Failure::Invalid(_) => 65,
            Failure::Ambiguous(_) => 2,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Malformed(m)
            | Failure::Usage(m)
            | Failure::Invalid(m)
            | Failure::Ambiguous(m) => m,
        }
    }
}

impl From<GeomError> for Failure {
    fn from(e: GeomError) -> Self {
        match e {
            GeomError::Ambiguous { .. } => Failure::Ambiguous(e.to_string()),
            _ => Failure::Invalid(e.to_string()),
        }
    }
}

pub struct Outcome {
    pub out: String,
    pub code: u8,
}

impl Outcome {
    fn ok(out: String) -> Self {
        Outcome { out, code: 0 }
    }
}

#[derive(Debug, Parser)]
#[command(name = "chyp", version, about = "Complex hyperbolic plane toolkit")]
struct Cli {
    #[command(flatten)]
    tol: TolArgs,
    #[command(flatten)]
    format: FormatArgs,
    #[command(subcommand)]
    cmd: Command,
}

#[derive(Debug, Args)]
struct TolArgs {
    /// Tolerance for equality tests
    #[arg(long, global = true)]
    tol_eq: Option<f64>,
    /// Tolerance for boundary membership of unit-norm vectors
    #[arg(long, global = true)]
    tol_boundary: Option<f64>,
    /// Tolerance for angle comparisons
    #[arg(long, global = true)]
    tol_angle: Option<f64>,
}

impl TolArgs {
    fn tolerance(&self) -> Result<Tolerance, Failure> {
        let d = Tolerance::default();
        Tolerance::new(
            self.tol_eq.unwrap_or(d.eq),
            self.tol_boundary.unwrap_or(d.boundary),
            self.tol_angle.unwrap_or(d.angle),
        )
        .map_err(|e| Failure::Usage(e.to_string()))
    }
}

#[derive(Debug, Args)]
#[group(multiple = false)]
struct FormatArgs {
    /// JSON output (default except for deltoid-sample)
    #[arg(long, global = true)]
    json: bool,
    /// CSV output (deltoid-sample only)
    #[arg(long, global = true)]
    csv: bool,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Classify an isometry file
    Classify { path: PathBuf },
    /// Decide whether two isometries share a real-reflection decomposition
    Decompose { a: PathBuf, b: PathBuf },
    /// Invariants of a tuple of 2, 3 or 4 points
    Invariants { path: PathBuf },
    /// Heisenberg group and boundary operations
    Heisenberg {
        #[command(subcommand)]
        op: HeisOp,
    },
    /// Exact certificate for the real-reflection family of PU(2,1,O_d)
    PicardVerify {
        #[arg(long)]
        d: u32,
    },
    /// Points of the null locus of f(z) = |z|^4 - 8 Re(z^3) + 18|z|^2 - 27
    DeltoidSample {
        #[arg(long, default_value_t = 64)]
        n: usize,
    },
    /// Write a seeded sample isometry or real reflection as JSON
    Sample {
        #[arg(value_enum)]
        kind: SampleKind,
        #[arg(long, default_value = "ball")]
        model: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

fn run(cli: &Cli) -> Result<Outcome, Failure> {
    let tol = cli.tol.tolerance()?;
    let csv_only = matches!(cli.cmd, Command::DeltoidSample { .. });
    if cli.format.csv && !csv_only {
        return Err(Failure::Usage(
            "--csv is only available for deltoid-sample".into(),
        ));
    }
    match &cli.cmd {
        Command::Classify { path } => commands::classify_cmd(path, &tol),
        Command::Decompose { a, b } => commands::decompose_cmd(a, b, &tol),
        Command::Invariants { path } => commands::invariants_cmd(path, &tol),
        Command::Heisenberg { op } => commands::heisenberg_cmd(op, &tol),
        Command::PicardVerify { d } => commands::picard_cmd(*d),
        Command::DeltoidSample { n } => commands::deltoid_cmd(*n, !cli.format.json),
        Command::Sample { kind, model, seed } => {
            let model = match model.as_str() {
                "ball" => Model::Ball,
                "siegel" => Model::Siegel,
                other => return Err(Failure::Usage(format!("unknown model {other}"))),
            };
            commands::sample_cmd(*kind, model, *seed)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 64 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(&cli) {
        Ok(o) => {
            // a closed pipe downstream is not an error of ours
            let _ = writeln!(std::io::stdout(), "{}", o.out);
            ExitCode::from(o.code)
        }
        Err(f) => {
            eprintln!("chyp: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}
