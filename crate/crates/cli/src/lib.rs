//! `swe` command line: run, gen, validate and bench.

pub mod bench;
pub mod error;
pub mod suites;

use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use swe_core::executor::{Checkpoint, ExecutorKind, Simulation};
use swe_core::io::{emit_config, parse_config_with, read_snapshot, write_snapshot};
use swe_core::scenarios::{generate, ScenarioConfig};

pub use error::{CliError, ErrorKind};

#[derive(Debug, Parser)]
#[command(name = "swe", version, about = "Deterministic 2D shallow-water solver")]
pub struct Cli {
    /// Only print errors.
    #[arg(long, global = true)]
    pub quiet: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run a scenario config to its end time.
    Run(RunArgs),
    /// Write a generated scenario as a config file plus its initial snapshot.
    Gen(GenArgs),
    /// Run validation suites: a suite name, `all`, or `list`.
    Validate { suite: String },
    /// Time executors on Five Drops grids.
    Bench(BenchArgs),
}

#[derive(Debug, Args)]
pub struct RunArgs {
    #[arg(long)]
    pub config: PathBuf,
    /// `section.key=value`, applied after the file. Repeatable.
    #[arg(long = "set", value_name = "SECTION.KEY=VALUE")]
    pub set: Vec<String>,
    /// `naive`, `tiled[:T]` or `decomposed:N[:tiled[:T]]`.
    #[arg(long)]
    pub executor: Option<String>,
    /// Snapshot directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_name = "SECONDS")]
    pub snapshot_every: Option<f64>,
    /// Continue from a checkpoint snapshot written by an earlier run.
    #[arg(long, value_name = "SWS")]
    pub resume: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct GenArgs {
    /// five_drops, five_drops_big, inlet_flood, channel_flood, vortex or dam_break.
    pub name: String,
    /// Grid side length.
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    #[arg(long, value_delimiter = ',', default_value = "256,512")]
    pub sizes: Vec<usize>,
    #[arg(long, default_value_t = 50)]
    pub steps: u64,
    #[arg(long, value_delimiter = ',', default_value = "naive,tiled")]
    pub executors: Vec<String>,
    #[arg(long, default_value_t = 3)]
    pub reps: usize,
    /// Also write the CSV rows here.
    #[arg(long)]
    pub csv: Option<PathBuf>,
}

/// Worker cap from `SWE_WORKERS`, if set.
pub fn worker_cap() -> Result<Option<usize>, CliError> {
    match std::env::var("SWE_WORKERS") {
        Err(_) => Ok(None),
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(CliError::config(format!("SWE_WORKERS must be a positive integer, got `{v}`"))),
        },
    }
}

/// Caps the band count of a decomposed executor. Results do not depend on it.
pub fn cap_executor(exec: ExecutorKind, cap: Option<usize>) -> ExecutorKind {
    match (exec, cap) {
        (ExecutorKind::Decomposed { workers, inner }, Some(cap)) if workers > cap => {
            log::info!("SWE_WORKERS={cap}: using {cap} bands instead of {workers}");
            ExecutorKind::Decomposed { workers: cap, inner }
        }
        _ => exec,
    }
}

fn read_file(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::io(format!("reading {}: {e}", path.display())))
}

/// Builds the scenario for `run`: file, then `--set` overrides, then the
/// dedicated flags.
pub fn load_scenario(args: &RunArgs, cap: Option<usize>) -> Result<ScenarioConfig, CliError> {
    let text = read_file(&args.config)?;
    let mut cfg = parse_config_with(&text, &args.set)?;
    if let Some(e) = &args.executor {
        cfg.executor = ExecutorKind::parse(e).map_err(CliError::config)?;
    }
    if let Some(dir) = &args.out {
        cfg.output_dir = Some(dir.clone());
    }
    if let Some(s) = args.snapshot_every {
        cfg.snapshot_every = s;
    }
    cfg.executor = cap_executor(cfg.executor, cap);
    cfg.validate()?;
    Ok(cfg)
}

fn run_command(args: &RunArgs, cap: Option<usize>, out: &mut dyn std::io::Write) -> Result<(), CliError> {
    let cfg = load_scenario(args, cap)?;
    log::info!("running {} ({} cells, t_end={} s, executor {})", cfg.name, cfg.grid.cells(), cfg.t_end, cfg.executor);
    let sim = match &args.resume {
        None => Simulation::new(&cfg)?,
        Some(path) => {
            let file = fs::File::open(path).map_err(|e| CliError::io(format!("opening {}: {e}", path.display())))?;
            let snap = read_snapshot(&mut std::io::BufReader::new(file))
                .map_err(|e| CliError::io(format!("reading {}: {e}", path.display())))?;
            let (Some(dt_next), Some(step_index)) = (snap.dt_next, snap.step_index) else {
                return Err(CliError::config(format!("{} is a plain snapshot, not a checkpoint", path.display())));
            };
            Simulation::resume(&cfg, Checkpoint { state: snap.state, dt_next, step_index })?
        }
    };
    let outcome = sim.finish()?;
    write!(out, "{}", outcome.report).map_err(CliError::io)?;
    Ok(())
}

fn gen_command(args: &GenArgs, out: &mut dyn std::io::Write) -> Result<(), CliError> {
    let cfg = generate(&args.name, args.n)?;
    let state = cfg.initial_state()?;
    fs::create_dir_all(&args.out).map_err(|e| CliError::io(format!("creating {}: {e}", args.out.display())))?;
    let cfg_path = args.out.join(format!("{}.cfg", cfg.name));
    let header = format!("# {} scenario, {}x{} cells\n", cfg.name, cfg.grid.nx, cfg.grid.ny);
    fs::write(&cfg_path, header + &emit_config(&cfg))
        .map_err(|e| CliError::io(format!("writing {}: {e}", cfg_path.display())))?;
    let snap_path = args.out.join(format!("{}_initial.sws", cfg.name));
    let write = || -> Result<(), Box<dyn std::error::Error>> {
        let mut w = std::io::BufWriter::new(fs::File::create(&snap_path)?);
        write_snapshot(&state, cfg.physics.g, &mut w)?;
        w.flush()?;
        Ok(())
    };
    write().map_err(|e| CliError::io(format!("writing {}: {e}", snap_path.display())))?;
    writeln!(out, "config: {}", cfg_path.display()).map_err(CliError::io)?;
    writeln!(out, "initial_snapshot: {}", snap_path.display()).map_err(CliError::io)?;
    Ok(())
}

fn validate_command(suite: &str, out: &mut dyn std::io::Write) -> Result<(), CliError> {
    if suite == "list" {
        for s in suites::SUITES {
            writeln!(out, "{s}").map_err(CliError::io)?;
        }
        return Ok(());
    }
    let names: Vec<&str> = if suite == "all" { suites::SUITES.to_vec() } else { vec![suite] };
    let mut failed = Vec::new();
    for name in &names {
        let Some(report) = suites::run_suite(name) else {
            return Err(CliError::config(format!(
                "unknown suite `{name}` (expected all, list or one of {})",
                suites::SUITES.join(", ")
            )));
        };
        write!(out, "{report}").map_err(CliError::io)?;
        if !report.passed() {
            failed.push(*name);
        }
    }
    writeln!(out, "summary: {}/{} suites passed", names.len() - failed.len(), names.len()).map_err(CliError::io)?;
    if failed.is_empty() {
        Ok(())
    } else {
        Err(CliError::new(ErrorKind::Validation, format!("failed suites: {}", failed.join(", "))))
    }
}

fn bench_command(args: &BenchArgs, cap: Option<usize>, out: &mut dyn std::io::Write) -> Result<(), CliError> {
    let executors = args
        .executors
        .iter()
        .map(|e| ExecutorKind::parse(e).map(|k| cap_executor(k, cap)))
        .collect::<Result<Vec<_>, _>>()
        .map_err(CliError::config)?;
    if args.steps == 0 || args.reps == 0 {
        return Err(CliError::config("bench needs steps >= 1 and reps >= 1"));
    }
    let mut rows = Vec::new();
    for &exec in &executors {
        log::info!("bench {exec} at sizes {:?}", args.sizes);
        rows.extend(bench::bench_sizes(&args.sizes, exec, args.steps, args.reps)?.into_iter().map(|(r, _)| r));
    }
    rows.sort_by_key(|r| r.size);
    write!(out, "{}", bench::table(&rows)).map_err(CliError::io)?;
    print_ratios(&rows, out).map_err(CliError::io)?;
    let csv = bench::csv(&rows);
    match &args.csv {
        Some(path) => fs::write(path, &csv).map_err(|e| CliError::io(format!("writing {}: {e}", path.display())))?,
        None => write!(out, "\n{csv}").map_err(CliError::io)?,
    }
    Ok(())
}

/// Step-time ratio between consecutive sizes, and throughput of every other
/// executor relative to naive at the same size.
fn print_ratios(rows: &[bench::BenchRow], out: &mut dyn std::io::Write) -> std::io::Result<()> {
    let naive: Vec<&bench::BenchRow> = rows.iter().filter(|r| r.executor == ExecutorKind::Naive).collect();
    for w in naive.windows(2) {
        writeln!(out, "naive step time {}/{}: {:.3}", w[1].size, w[0].size, w[1].median_step_s / w[0].median_step_s)?;
    }
    for r in rows.iter().filter(|r| r.executor != ExecutorKind::Naive) {
        if let Some(n) = naive.iter().find(|n| n.size == r.size) {
            writeln!(out, "{} throughput vs naive at {}: {:.3}", r.executor, r.size, r.cells_per_s / n.cells_per_s)?;
        }
    }
    Ok(())
}

/// Runs a parsed command, writing normal output to `out`.
pub fn execute(cli: &Cli, out: &mut dyn std::io::Write) -> Result<(), CliError> {
    let cap = worker_cap()?;
    match &cli.command {
        Command::Run(args) => run_command(args, cap, out),
        Command::Gen(args) => gen_command(args, out),
        Command::Validate { suite } => validate_command(suite, out),
        Command::Bench(args) => bench_command(args, cap, out),
    }
}

/// Entry point of the binary. Returns the process exit code.
pub fn main_with_args(args: impl IntoIterator<Item = std::ffi::OsString>) -> u8 {
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) if !e.use_stderr() => {
            print!("{e}");
            return 0;
        }
        Err(e) => {
            let rendered = e.render().to_string();
            let first = rendered.lines().next().unwrap_or("invalid arguments").trim_start_matches("error: ");
            eprintln!("{}", CliError::config(first));
            eprint!("{rendered}");
            return ErrorKind::Config.exit_code();
        }
    };
    let level = if cli.quiet { "error" } else { "info" };
    let _ = env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).try_init();
    match worker_cap() {
        Ok(Some(n)) => {
            if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
                log::warn!("could not size the worker pool: {e}");
            }
        }
        Ok(None) => {}
        Err(e) => {
            eprintln!("{e}");
            return e.kind.exit_code();
        }
    }
    let stdout = std::io::stdout();
    match execute(&cli, &mut stdout.lock()) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("{e}");
            e.kind.exit_code()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use swe_core::executor::InnerKind;

    #[test]
    fn decomposed_workers_are_capped() {
        let e = cap_executor(ExecutorKind::decomposed(8), Some(2));
        assert_eq!(e, ExecutorKind::Decomposed { workers: 2, inner: InnerKind::Naive });
        assert_eq!(cap_executor(ExecutorKind::decomposed(2), Some(8)), ExecutorKind::decomposed(2));
        assert_eq!(cap_executor(ExecutorKind::tiled(), Some(1)), ExecutorKind::tiled());
    }

    #[test]
    fn flags_parse() {
        let cli = Cli::try_parse_from([
            "swe", "run", "--config", "a.cfg", "--set", "run.t_end=5", "--set", "grid.nx=40", "--executor",
            "decomposed:4", "--snapshot-every", "0.5", "--quiet",
        ])
        .unwrap();
        assert!(cli.quiet);
        let Command::Run(args) = cli.command else { panic!() };
        assert_eq!(args.set, ["run.t_end=5", "grid.nx=40"]);
        assert_eq!(args.snapshot_every, Some(0.5));
        let cli = Cli::try_parse_from(["swe", "bench", "--sizes", "64,128", "--reps", "1"]).unwrap();
        let Command::Bench(b) = cli.command else { panic!() };
        assert_eq!(b.sizes, [64, 128]);
        assert_eq!(b.executors, ["naive", "tiled"]);
    }

    #[test]
    fn usage_errors_exit_with_config_code() {
        assert_eq!(main_with_args(["swe", "run"].map(Into::into)), 2);
        assert_eq!(main_with_args(["swe", "frobnicate"].map(Into::into)), 2);
    }

    #[test]
    fn validate_list_names_every_suite() {
        let mut out = Vec::new();
        validate_command("list", &mut out).unwrap();
        assert_eq!(String::from_utf8(out).unwrap().lines().collect::<Vec<_>>(), suites::SUITES);
        let err = validate_command("nope", &mut Vec::new()).unwrap_err();
        assert_eq!(err.kind, ErrorKind::Config);
    }
}
