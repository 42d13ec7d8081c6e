use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use mfuq::dump::SurrogateFile;
use mfuq::experiment::read_points;
use mfuq::records::{compare, format_number, RecordTable};
use mfuq::{build_reference, run_experiment, write_reference, write_run, BenchError, ConfigError, ExperimentConfig, Result};

/// Multi-fidelity UQ experiments: MISC and SRBF surrogates scored against a
/// reference solution.
#[derive(Parser)]
#[command(name = "mfuq", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build the reference interpolant and its moments (reference.json).
    Reference(RunArgs),
    /// Run the configured method to budget and write the convergence table.
    Run(RunArgs),
    /// Align record files on a common cost grid.
    Compare {
        /// Records CSV files; columns are prefixed with the file stems.
        #[arg(required = true, num_args = 2..)]
        records: Vec<PathBuf>,
        /// Output CSV (stdout when omitted).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Evaluate a dumped surrogate at the points of a CSV file.
    EvalSurrogate {
        /// surrogate.json or reference.json
        #[arg(long)]
        surrogate: PathBuf,
        /// CSV with one point per row (an optional header is skipped).
        #[arg(long)]
        points: PathBuf,
        /// Output CSV (stdout when omitted).
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct RunArgs {
    /// TOML experiment file.
    #[arg(long)]
    config: PathBuf,
    /// Output directory; overrides `output.dir`.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Overrides `method.seed`.
    #[arg(long)]
    seed: Option<u64>,
    /// Overrides `method.budget`.
    #[arg(long)]
    budget: Option<f64>,
}

/// Unreadable inputs are usage errors (exit 2), unlike failed writes.
fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| BenchError::Input(format!("{}: {e}", path.display())))
}

fn load_config(args: &RunArgs) -> Result<ExperimentConfig> {
    let text = fs::read_to_string(&args.config).map_err(|e| ConfigError {
        line: None,
        field: String::new(),
        message: format!("cannot read {}: {e}", args.config.display()),
    })?;
    let mut cfg = ExperimentConfig::from_toml(&text)?;
    if let Some(s) = args.seed {
        cfg.method.seed = s;
    }
    if let Some(b) = args.budget {
        cfg.method.budget = b;
    }
    if let Some(o) = &args.out {
        cfg.output.dir = o.clone();
    }
    cfg.validate()?;
    // Fail before a long run, not after it.
    fs::create_dir_all(&cfg.output.dir).map_err(|e| BenchError::io(&cfg.output.dir, e))?;
    Ok(cfg)
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(p) => fs::write(p, text).map_err(|e| BenchError::io(p, e)),
        None => match std::io::stdout().write_all(text.as_bytes()) {
            Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(BenchError::io("<stdout>", e)),
            _ => Ok(()),
        },
    }
}

/// File stems, else parent directory names, else `r1..rn`, whichever is
/// unique first.
fn labels(paths: &[PathBuf]) -> Vec<String> {
    let name = |p: Option<&std::ffi::OsStr>| p.map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    let unique = |v: &[String]| v.iter().all(|l| !l.is_empty()) && v.iter().enumerate().all(|(i, l)| !v[..i].contains(l));
    let stems: Vec<String> = paths.iter().map(|p| name(p.file_stem())).collect();
    if unique(&stems) {
        return stems;
    }
    let parents: Vec<String> = paths
        .iter()
        .map(|p| name(p.parent().and_then(|d| d.file_name())))
        .collect();
    if unique(&parents) {
        return parents;
    }
    (1..=paths.len()).map(|i| format!("r{i}")).collect()
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Reference(args) => {
            let cfg = load_config(&args)?;
            let file = build_reference(&cfg)?;
            for p in write_reference(&cfg, &file, &cfg.output.dir)? {
                eprintln!("wrote {}", p.display());
            }
        }
        Command::Run(args) => {
            let cfg = load_config(&args)?;
            let result = run_experiment(&cfg)?;
            let last = result.records.last().expect("at least the initial record");
            eprintln!(
                "{}: {} iterations, cost {}, stop: {}, err_l2 {}",
                result.method.name(),
                result.records.len() - 1,
                result.final_cost,
                result.stop,
                last.err_l2.map_or("undefined".into(), |e| format!("{e:.3e}"))
            );
            for p in write_run(&cfg, &result, &cfg.output.dir)? {
                eprintln!("wrote {}", p.display());
            }
        }
        Command::Compare { records, out } => {
            let mut tables = Vec::new();
            for (label, path) in labels(&records).into_iter().zip(&records) {
                let name = path.display().to_string();
                tables.push((label, RecordTable::read(read(path)?.as_bytes(), &name)?));
            }
            emit(out.as_deref(), &compare(&tables)?)?;
        }
        Command::EvalSurrogate { surrogate, points, out } => {
            let s = SurrogateFile::from_json(&read(&surrogate)?)?.load()?;
            let pts = read_points(&read(&points)?, s.domain())?;
            let dim = s.domain().dim();
            let mut w = csv::Writer::from_writer(Vec::new());
            let mut head: Vec<String> = (1..=dim).map(|n| format!("y{n}")).collect();
            head.push("value".into());
            if s.has_uncertainty() {
                head.push("uncertainty".into());
            }
            let csv_err = |e: csv::Error| BenchError::Input(e.to_string());
            w.write_record(&head).map_err(csv_err)?;
            for p in &pts {
                let mut row: Vec<String> = p.iter().map(|&v| format_number(v)).collect();
                row.push(format_number(s.evaluate(p)?));
                if let Some(u) = s.uncertainty(p)? {
                    row.push(format_number(u));
                }
                w.write_record(&row).map_err(csv_err)?;
            }
            let bytes = w.into_inner().map_err(|e| BenchError::Input(e.to_string()))?;
            emit(out.as_deref(), &String::from_utf8(bytes).expect("CSV is UTF-8"))?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
