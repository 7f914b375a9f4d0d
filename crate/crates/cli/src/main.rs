use std::fs;
use std::io::{self, Read, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use serde::Serialize;
use serde_json::Value;
use theta_core::decompose::{FitConfig, FitMode};
use theta_core::verify::{self, Suite, VerifyOptions};
use theta_core::{
    choose_radius, diff_poly_decompose, enumerate_characteristics, validate_level, verify_theorem3, ComplexMatrix,
    DiffPolyExpr, Error, IntMatrix, LevelMatrix, MultiIndex, PeriodMatrix, ThetaContext, TruncationConfig,
};

const DEFAULT_TAIL_TOL: f64 = 1e-12;

#[derive(Debug, Parser)]
#[command(name = "theta", version, about = "Theta functions of matrix level: evaluation, verification and canonical-basis decomposition")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Period matrix as JSON `[[[re, im], ...], ...]`; defaults to `i I`.
    #[arg(long, global = true)]
    omega: Option<String>,
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Tail tolerance for `eval`, fit tolerance for `decompose`, pass
    /// threshold for the numeric `verify` suites.
    #[arg(long, global = true)]
    tol: Option<f64>,
    /// Write the JSON result here instead of standard output.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// List the characteristics of a level matrix.
    Characteristics {
        /// Level matrix as JSON, e.g. `[[2,1],[1,2]]`.
        #[arg(long)]
        level: String,
        #[arg(short = 'g', long = "genus", default_value_t = 1)]
        g: usize,
    },
    /// Evaluate a theta series or an auxiliary theta series.
    Eval {
        #[arg(long, value_enum)]
        kind: Kind,
        #[arg(long)]
        level: String,
        #[arg(long = "char-index", default_value_t = 0)]
        char_index: usize,
        /// Multi-index as JSON; `aux` only, defaults to zero.
        #[arg(long)]
        j: Option<String>,
        /// `Z` as a complex JSON matrix; `aux` only, defaults to zero.
        #[arg(long)]
        z: Option<String>,
        /// `W` as a complex JSON matrix; defaults to zero.
        #[arg(long)]
        w: Option<String>,
    },
    /// Run built-in verification suites.
    Verify {
        #[arg(long, default_value = "all", value_parser = Suite::NAMES)]
        suite: String,
    },
    /// Expand a differential polynomial of theta functions in the canonical basis.
    Decompose {
        /// Expression JSON file, or `-` for standard input.
        #[arg(long)]
        input: String,
        #[arg(long, value_enum, default_value_t = Mode::Global)]
        mode: Mode,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Kind {
    Theta,
    Aux,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Mode {
    Global,
    Sequential,
}

#[derive(Debug)]
enum Failure {
    Core(Error),
    Input(String),
    Verification,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Core(e)
    }
}

impl Failure {
    fn exit_code(&self) -> u8 {
        match self {
            Failure::Verification => 1,
            Failure::Input(_) => 2,
            Failure::Core(e) => match e {
                Error::TruncationInsufficient { .. } | Error::Unachievable { .. } => 3,
                Error::ResidualTooLarge { .. } | Error::IllConditioned(_) => 4,
                Error::LevelSumInvalid(_) => 5,
                _ => 2,
            },
        }
    }
}

type CliResult<T> = Result<T, Failure>;

fn parse_json<T: serde::de::DeserializeOwned>(what: &str, s: &str) -> CliResult<T> {
    serde_json::from_str(s).map_err(|e| Failure::Input(format!("{what}: {e}")))
}

fn parse_level(s: &str) -> CliResult<LevelMatrix> {
    let rows: Vec<Vec<i64>> = parse_json("--level", s)?;
    Ok(validate_level(&IntMatrix::from_rows(&rows)?)?)
}

fn parse_omega(s: Option<&str>, g: usize) -> CliResult<PeriodMatrix> {
    match s {
        None => Ok(PeriodMatrix::identity_i(g)),
        Some(s) => Ok(parse_json::<PeriodMatrix>("--omega", s)?),
    }
}

fn emit(out: Option<&PathBuf>, value: &impl Serialize) -> CliResult<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| Failure::Input(e.to_string()))?;
    text.push('\n');
    match out {
        Some(p) => fs::write(p, text).map_err(|e| Failure::Input(format!("{}: {e}", p.display()))),
        None => io::stdout().write_all(text.as_bytes()).map_err(|e| Failure::Input(e.to_string())),
    }
}

#[derive(Serialize)]
struct EvalOutput {
    value: Complex64,
    tail_bound: f64,
    radius: u32,
}

#[derive(Serialize)]
struct DecomposeOutput<'a> {
    element: &'a theta_core::AlgebraElement,
    residual: f64,
    conditioning: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    fd_residual: Option<f64>,
    seed: u64,
    config: &'a FitConfig,
    verification: &'a theta_core::Theorem3Report,
}

fn run(cli: &Cli) -> CliResult<()> {
    let out = cli.out.as_ref();
    match &cli.command {
        Command::Characteristics { level, g } => {
            let level = parse_level(level)?;
            emit(out, &enumerate_characteristics(&level, *g)?)
        }
        Command::Eval {
            kind,
            level,
            char_index,
            j,
            z,
            w,
        } => {
            let level = parse_level(level)?;
            let w: Option<ComplexMatrix> = w.as_deref().map(|s| parse_json("--w", s)).transpose()?;
            let z: Option<ComplexMatrix> = z.as_deref().map(|s| parse_json("--z", s)).transpose()?;
            let j: Option<MultiIndex> = j.as_deref().map(|s| parse_json("--j", s)).transpose()?;
            if matches!(kind, Kind::Theta) && (z.is_some() || j.is_some()) {
                return Err(Failure::Input("--z and --j apply to --kind aux only".into()));
            }
            let g = w
                .as_ref()
                .map(ComplexMatrix::cols)
                .or(z.as_ref().map(ComplexMatrix::cols))
                .or(j.as_ref().map(|j| j.shape().1))
                .unwrap_or(1);
            let omega = parse_omega(cli.omega.as_deref(), g)?;
            let (h, g) = (level.h(), omega.g());
            let w = w.unwrap_or_else(|| ComplexMatrix::zeros(h, g));
            let z = z.unwrap_or_else(|| ComplexMatrix::zeros(h, g));
            let j = j.unwrap_or_else(|| MultiIndex::zeros(h, g));
            let tol = cli.tol.unwrap_or(DEFAULT_TAIL_TOL);
            let chars = enumerate_characteristics(&level, g)?;
            let chr = chars.get(*char_index).ok_or_else(|| {
                Error::IndexOutOfRange(format!("characteristic {char_index} of {}", chars.len()))
            })?;
            let box_ = w.max_abs_im().max(z.max_abs());
            let radius = choose_radius(&level, &omega, box_, tol, j.size())?;
            let v = ThetaContext::new(&level, &omega)?.eval(&j, chr, &z, &w, &TruncationConfig::new(radius, tol)?)?;
            emit(
                out,
                &EvalOutput {
                    value: v.value,
                    tail_bound: v.tail_bound,
                    radius,
                },
            )
        }
        Command::Verify { suite } => {
            let suite: Suite = suite.parse()?;
            let report = verify::run(suite, &VerifyOptions { seed: cli.seed, tol: cli.tol })?;
            emit(out, &report)?;
            if report.passed {
                Ok(())
            } else {
                Err(Failure::Verification)
            }
        }
        Command::Decompose { input, mode } => {
            let text = if input == "-" {
                let mut s = String::new();
                io::stdin().read_to_string(&mut s).map_err(|e| Failure::Input(e.to_string()))?;
                s
            } else {
                fs::read_to_string(input).map_err(|e| Failure::Input(format!("{input}: {e}")))?
            };
            let raw: Value = parse_json("--input", &text)?;
            let expr: DiffPolyExpr = serde_json::from_value(raw).map_err(|e| Failure::Input(format!("--input: {e}")))?;
            let g = first_genus(&expr).unwrap_or(1);
            let omega = parse_omega(cli.omega.as_deref(), g)?;
            let mut cfg = FitConfig::with_seed(cli.seed);
            if let Some(t) = cli.tol {
                cfg.fit_tol = t;
            }
            cfg.mode = match mode {
                Mode::Global => FitMode::Global,
                Mode::Sequential => FitMode::Sequential,
            };
            let d = diff_poly_decompose(&expr, &omega, &cfg)?;
            let report = verify_theorem3(&expr, &d, &omega, &cfg);
            emit(
                out,
                &DecomposeOutput {
                    element: &d.element,
                    residual: d.residual,
                    conditioning: d.conditioning,
                    fd_residual: d.fd_residual,
                    seed: cli.seed,
                    config: &cfg,
                    verification: &report,
                },
            )?;
            if report.passed {
                Ok(())
            } else {
                Err(Failure::Verification)
            }
        }
    }
}

/// Genus of the first symbol, used when `--omega` is absent.
fn first_genus(e: &DiffPolyExpr) -> Option<usize> {
    match e {
        DiffPolyExpr::Deriv { j, .. } => Some(j.shape().1),
        DiffPolyExpr::Sum { children } | DiffPolyExpr::Product { children } => children.iter().find_map(first_genus),
        DiffPolyExpr::Scale { child, .. } => first_genus(child),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            match &f {
                Failure::Core(e) => eprintln!("error[{}]: {e}", e.kind()),
                Failure::Input(m) => eprintln!("error[Input]: {m}"),
                Failure::Verification => eprintln!("verification failed"),
            }
            ExitCode::from(f.exit_code())
        }
    }
}
