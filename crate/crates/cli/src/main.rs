use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use sense_cli::table::WALL_TIME_KEY;
use sense_cli::{diff_tables, parse, run, CliError, Experiment, Result, ResultTable, RunConfig, Tolerances};
use serde::Serialize;

#[derive(Parser)]
#[command(name = "sense", version, about = "Floquet AC-field sensing experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Magnetization and block Fisher information over time.
    Evolve(RunArgs),
    /// Floquet gap over an (h0, h1) grid.
    GapScan(RunArgs),
    /// Steady-state magnetization and QFI over an (h0, h1) grid.
    QfiScan(RunArgs),
    /// Analytic and numerical gap-closing amplitudes.
    GapLine(RunArgs),
    /// Steady-state QFI against block size, with a power-law fit.
    Scale(RunArgs),
    /// Repeated Bayesian estimation of h1 from block magnetization.
    Estimate(RunArgs),
    /// Exact-diagonalization QFI and CFI over time.
    EdEvolve(RunArgs),
    /// Steady-state QFI and Floquet gap for a square-pulse drive.
    SquarePulseScan(RunArgs),
    /// Compare two result tables column by column.
    Diff(DiffArgs),
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads; SENSE_THREADS takes precedence.
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Args)]
struct DiffArgs {
    a: PathBuf,
    b: PathBuf,
    #[arg(long, default_value_t = 0.0)]
    abs: f64,
    #[arg(long, default_value_t = 0.0)]
    rel: f64,
}

#[derive(Serialize)]
struct ColumnReport<'a> {
    column: &'a str,
    max_abs: f64,
    max_rel: f64,
    pass: bool,
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| CliError::io(format!("reading {}", path.display()), e))
}

fn threads(flag: Option<usize>) -> Result<Option<usize>> {
    match std::env::var("SENSE_THREADS") {
        Ok(v) => match v.parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(CliError::config(format!("SENSE_THREADS must be a positive integer, got `{v}`"), &["SENSE_THREADS"])),
        },
        Err(_) => match flag {
            Some(0) => Err(CliError::config("--threads must be positive", &["threads"])),
            other => Ok(other),
        },
    }
}

fn experiment(args: RunArgs, exp: Experiment) -> Result<()> {
    let map = parse(&read(&args.config)?)?;
    let mut cfg = RunConfig::from_map(exp, &map)?;
    if let Some(s) = args.seed {
        cfg.set_seed(s);
    }
    if let Some(p) = args.out {
        cfg.set_output(p);
    }
    // fail on an unwritable destination before computing anything
    if let Some(p) = &cfg.output {
        std::fs::File::create(p).map_err(|e| CliError::io(format!("opening {}", p.display()), e))?;
    }
    if let Some(n) = threads(args.threads)? {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::config(e.to_string(), &["threads"]))?;
    }
    let start = Instant::now();
    let mut table = run(&cfg)?;
    table.meta(WALL_TIME_KEY, format!("{:.3}", start.elapsed().as_secs_f64()));
    let csv = table.to_csv();
    match &cfg.output {
        Some(p) => std::fs::write(p, csv).map_err(|e| CliError::io(format!("writing {}", p.display()), e)),
        None => {
            print!("{csv}");
            Ok(())
        }
    }
}

fn diff(args: DiffArgs) -> Result<bool> {
    let a = ResultTable::from_csv(&read(&args.a)?)?;
    let b = ResultTable::from_csv(&read(&args.b)?)?;
    let report = diff_tables(&a, &b, &Tolerances::uniform(args.abs, args.rel))?;
    let rows: Vec<ColumnReport> = report
        .columns
        .iter()
        .map(|c| ColumnReport {
            column: &c.name,
            max_abs: c.max_abs,
            max_rel: c.max_rel,
            pass: c.pass,
        })
        .collect();
    println!("{}", serde_json::to_string_pretty(&rows).expect("serializable report"));
    Ok(report.pass())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let err = CliError::config(e.to_string().trim().to_string(), &[]);
            eprintln!("{}", serde_json::to_string(&err.report()).expect("serializable error"));
            return ExitCode::from(1);
        }
    };
    let result = match cli.command {
        Command::Diff(args) => match diff(args) {
            Ok(true) => return ExitCode::SUCCESS,
            Ok(false) => return ExitCode::from(3),
            Err(e) => Err(e),
        },
        Command::Evolve(a) => experiment(a, Experiment::Evolve),
        Command::GapScan(a) => experiment(a, Experiment::GapScan),
        Command::QfiScan(a) => experiment(a, Experiment::QfiScan),
        Command::GapLine(a) => experiment(a, Experiment::GapLine),
        Command::Scale(a) => experiment(a, Experiment::Scale),
        Command::Estimate(a) => experiment(a, Experiment::Estimate),
        Command::EdEvolve(a) => experiment(a, Experiment::EdEvolve),
        Command::SquarePulseScan(a) => experiment(a, Experiment::SquarePulseScan),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", serde_json::to_string(&e.report()).expect("serializable error"));
            ExitCode::from(e.exit_status())
        }
    }
}
