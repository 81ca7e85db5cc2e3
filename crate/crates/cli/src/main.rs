//! `reftaylor`: convergence studies for refined Taylor expansions,
//! interpolation bounds and the P1/P2 finite element chains.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use reftaylor::expansion::WeightKind;
use reftaylor::fem::Space;
use reftaylor::registry::{registry, selftest};
use reftaylor::study::{run_study, Command, StudyConfig};
use reftaylor::Error;
use serde::{Deserialize, Serialize};

const EXIT_USAGE: u8 = 1;
const EXIT_NUMERIC: u8 = 2;
const EXIT_IO: u8 = 3;

#[derive(Parser, Debug)]
#[command(name = "reftaylor", version, about = "Refined first-order expansion and interpolation bound studies")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Refined expansion remainders against their bands for random segments
    Expand(StudyArgs),
    /// 1D interpolation errors against the classical and refined bounds
    Interp1d(StudyArgs),
    /// Simplex interpolation errors for π and π* on uniform meshes
    Simplex(StudyArgs),
    /// Manufactured-solution FEM sweep with the L² estimate chains
    Fem(StudyArgs),
    /// Mesh coarsening allowed by the corrected interpolant
    Savings(StudyArgs),
    /// List the named test functions
    Registry {
        /// Print JSON instead of CSV
        #[arg(long)]
        json: bool,
    },
    /// Finite-difference gradient check of every registry entry
    Selftest,
}

/// Flags shared by the study commands; each command reads the ones it needs.
/// Flags override values from `--config`.
#[derive(Args, Debug, Default)]
struct StudyArgs {
    /// Flat TOML file with the same keys as the long flags (underscored)
    #[arg(long)]
    config: Option<PathBuf>,
    /// CSV destination; a `.manifest.json` is written next to it
    #[arg(long, short)]
    output: Option<PathBuf>,
    /// Registry name, e.g. exp1d, quad2d, classP(beta=0.75), or classP for a β sweep
    #[arg(long, short)]
    function: Option<String>,
    /// Subinterval counts m for `expand`
    #[arg(long = "m", value_delimiter = ',')]
    m_values: Option<Vec<usize>>,
    #[arg(long, value_delimiter = ',')]
    subdivisions: Option<Vec<usize>>,
    /// β values for the class (P) sweep
    #[arg(long = "beta", value_delimiter = ',')]
    beta_values: Option<Vec<f64>>,
    /// Target errors for `savings`
    #[arg(long = "eps", value_delimiter = ',')]
    eps_values: Option<Vec<f64>>,
    #[arg(long)]
    draws: Option<usize>,
    #[arg(long)]
    samples: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Use the weights without the closure condition
    #[arg(long)]
    open: bool,
    #[arg(long)]
    dim: Option<usize>,
    /// P1 or P2
    #[arg(long)]
    space: Option<String>,
    #[arg(long)]
    diffusion: Option<f64>,
    #[arg(long)]
    reaction: Option<f64>,
    /// ‖D²u‖∞ for `savings`
    #[arg(long)]
    d2: Option<f64>,
    #[arg(long)]
    continuity: Option<f64>,
    #[arg(long)]
    ellipticity: Option<f64>,
}

#[derive(Deserialize, Debug, Default)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    command: Option<String>,
    output: Option<PathBuf>,
    function: Option<String>,
    m_values: Option<Vec<usize>>,
    subdivisions: Option<Vec<usize>>,
    beta_values: Option<Vec<f64>>,
    eps_values: Option<Vec<f64>>,
    draws: Option<usize>,
    samples: Option<usize>,
    seed: Option<u64>,
    weights: Option<String>,
    dim: Option<usize>,
    space: Option<String>,
    diffusion: Option<f64>,
    reaction: Option<f64>,
    d2: Option<f64>,
    continuity: Option<f64>,
    ellipticity: Option<f64>,
}

#[derive(Serialize)]
struct Manifest<'a> {
    version: &'static str,
    command: String,
    config: &'a StudyConfig,
    seed: u64,
    threads: usize,
    wall_time_seconds: f64,
    csv: String,
    rows: usize,
    violations: &'a [String],
    summary: &'a std::collections::BTreeMap<String, f64>,
}

/// Failure carrying its exit status.
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Self {
        Self { code: EXIT_USAGE, message: message.into() }
    }

    fn io(path: &Path, err: std::io::Error) -> Self {
        Self { code: EXIT_IO, message: format!("{}: {err}", path.display()) }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::InvalidArgument(_) | Error::UnknownFunction { .. } | Error::Unsupported(_) => EXIT_USAGE,
            _ => EXIT_NUMERIC,
        };
        Self { code, message: e.to_string() }
    }
}

fn parse_weights(s: &str) -> Result<WeightKind, Failure> {
    match s {
        "closed" => Ok(WeightKind::Closed),
        "open" => Ok(WeightKind::Open),
        _ => Err(Failure::usage(format!("weights must be `closed` or `open`, got `{s}`"))),
    }
}

fn read_config(path: &Path) -> Result<FileConfig, Failure> {
    let text = fs::read_to_string(path).map_err(|e| Failure::io(path, e))?;
    toml::from_str(&text).map_err(|e| Failure::usage(format!("{}: {e}", path.display())))
}

/// Defaults, then the config file, then flags.
fn build_config(command: Command, args: &StudyArgs) -> Result<(StudyConfig, Option<PathBuf>), Failure> {
    let file = match &args.config {
        Some(p) => read_config(p)?,
        None => FileConfig::default(),
    };
    if let Some(c) = &file.command {
        if c.parse::<Command>().map_err(Failure::from)? != command {
            return Err(Failure::usage(format!("config file is for `{c}` but `{command}` was requested")));
        }
    }
    let mut cfg = StudyConfig::defaults(command);
    macro_rules! layer {
        ($field:ident) => {
            if let Some(v) = args.$field.clone().or(file.$field.clone()) {
                cfg.$field = v;
            }
        };
    }
    layer!(function);
    layer!(m_values);
    layer!(subdivisions);
    layer!(beta_values);
    layer!(eps_values);
    layer!(draws);
    layer!(samples);
    layer!(seed);
    layer!(dim);
    layer!(diffusion);
    layer!(reaction);
    cfg.d2 = args.d2.or(file.d2);
    cfg.continuity = args.continuity.or(file.continuity);
    cfg.ellipticity = args.ellipticity.or(file.ellipticity);
    if args.open {
        cfg.weights = WeightKind::Open;
    } else if let Some(w) = &file.weights {
        cfg.weights = parse_weights(w)?;
    }
    if let Some(s) = args.space.as_ref().or(file.space.as_ref()) {
        cfg.space = s.parse::<Space>().map_err(Failure::from)?;
    }
    let output = args.output.clone().or(file.output);
    Ok((cfg, output))
}

fn manifest_path(csv: &Path) -> PathBuf {
    csv.with_extension("manifest.json")
}

fn write_file(path: &Path, contents: &str) -> Result<(), Failure> {
    fs::write(path, contents).map_err(|e| Failure::io(path, e))
}

fn run_command(command: Command, args: &StudyArgs) -> Result<(), Failure> {
    let (cfg, output) = build_config(command, args)?;
    let started = Instant::now();
    let out = run_study(&cfg)?;
    let csv = out.table.to_csv();
    match &output {
        Some(path) => {
            write_file(path, &csv)?;
            let manifest = Manifest {
                version: env!("CARGO_PKG_VERSION"),
                command: command.to_string(),
                config: &cfg,
                seed: cfg.seed,
                threads: rayon::current_num_threads(),
                wall_time_seconds: started.elapsed().as_secs_f64(),
                csv: path.display().to_string(),
                rows: out.table.rows.len(),
                violations: &out.violations,
                summary: &out.summary,
            };
            let json = serde_json::to_string_pretty(&manifest).map_err(|e| Failure { code: EXIT_IO, message: e.to_string() })?;
            write_file(&manifest_path(path), &(json + "\n"))?;
        }
        None => print!("{csv}"),
    }
    for (k, v) in &out.summary {
        eprintln!("{k} = {v}");
    }
    if !out.violations.is_empty() {
        for v in &out.violations {
            eprintln!("bound violation: {v}");
        }
        return Err(Failure { code: EXIT_NUMERIC, message: format!("{} bound violation(s)", out.violations.len()) });
    }
    Ok(())
}

fn print_registry(json: bool) -> Result<(), Failure> {
    let entries = registry();
    if json {
        let s = serde_json::to_string_pretty(&entries).map_err(|e| Failure { code: EXIT_IO, message: e.to_string() })?;
        println!("{s}");
    } else {
        println!("name,dim,analytic,description");
        for e in entries {
            println!("{},{},{},\"{}\"", e.name, e.dim, e.analytic, e.description);
        }
    }
    Ok(())
}

fn run_selftest() -> Result<(), Failure> {
    let rows = selftest()?;
    let mut failed = 0;
    for r in &rows {
        let status = if r.check.passed() { "ok" } else { "FAIL" };
        if !r.check.passed() {
            failed += 1;
        }
        println!("{status} {} at {:?}: fd {:.12e} vs analytic {:.12e}", r.name, r.point, r.check.finite_difference, r.check.analytic);
    }
    if failed > 0 {
        return Err(Failure { code: EXIT_NUMERIC, message: format!("{failed} gradient check(s) failed") });
    }
    Ok(())
}

/// Caps the global pool at `REFTAYLOR_THREADS` when set.
fn configure_threads() -> Result<(), Failure> {
    let Ok(v) = std::env::var("REFTAYLOR_THREADS") else {
        return Ok(());
    };
    let n: usize = v.trim().parse().ok().filter(|n| *n > 0).ok_or_else(|| Failure::usage(format!("REFTAYLOR_THREADS must be a positive integer, got `{v}`")))?;
    rayon::ThreadPoolBuilder::new().num_threads(n).build_global().map_err(|e| Failure::usage(e.to_string()))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = configure_threads().and_then(|()| match &cli.command {
        Cmd::Expand(a) => run_command(Command::Expand, a),
        Cmd::Interp1d(a) => run_command(Command::Interp1d, a),
        Cmd::Simplex(a) => run_command(Command::Simplex, a),
        Cmd::Fem(a) => run_command(Command::Fem, a),
        Cmd::Savings(a) => run_command(Command::Savings, a),
        Cmd::Registry { json } => print_registry(*json),
        Cmd::Selftest => run_selftest(),
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
