//! `graphene-hydro`: tabulation, inversion and simulation driver.
//!
//! Exit codes: 0 ok, 1 usage, 2 numerical failure or failed inline check, 3 I/O.

use clap::{Parser, Subcommand};
use graphene_hydro_cli::commands::{self, Context};
use graphene_hydro_cli::config::{self, RunConfig};
use graphene_hydro_cli::error::{CliError, CliResult};
use graphene_hydro_cli::output::{self, OutDir, Outcome, RunManifest};
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::{Instant, SystemTime, UNIX_EPOCH};

#[derive(Debug, Parser)]
#[command(
    name = "graphene-hydro",
    version,
    about = "Maximum-entropy hydrodynamics of graphene carriers"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// TOML run configuration; built-in defaults are used when absent.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Output directory (overrides `out` in the config; default `out`).
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Seed for randomized sampling (overrides `seed` in the config; default 0).
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Worker threads for the solvers (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
}

#[derive(Debug, Clone, Copy, Subcommand)]
enum Command {
    /// Tables of the (A, B) -> (n, u) map and the regime curves.
    Tabulate,
    /// Multipliers (A, B, theta_B) for given densities and directions.
    Invert,
    /// Regime functions X, Y, Z, Z_perp and their small-|u| curvature.
    Regimes,
    /// Bipolar hyperbolic moment system on a periodic grid.
    SolveHydro,
    /// Drift-diffusion limit.
    SolveDd,
    /// Linear-response wave equation.
    SolveWave,
    /// Collimated flow across a potential step, with ray tracing.
    SolveCollimation,
    /// Quick randomized consistency checks.
    Selftest,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Command::Tabulate => "tabulate",
            Command::Invert => "invert",
            Command::Regimes => "regimes",
            Command::SolveHydro => "solve-hydro",
            Command::SolveDd => "solve-dd",
            Command::SolveWave => "solve-wave",
            Command::SolveCollimation => "solve-collimation",
            Command::Selftest => "selftest",
        }
    }
}

type Runner = fn(&RunConfig, &Context, &mut OutDir) -> CliResult<Outcome>;

fn runner(cmd: Command) -> Runner {
    match cmd {
        Command::Tabulate => commands::tabulate,
        Command::Invert => commands::invert,
        Command::Regimes => commands::regimes,
        Command::SolveHydro => commands::solve_hydro,
        Command::SolveDd => commands::solve_dd,
        Command::SolveWave => commands::solve_wave,
        Command::SolveCollimation => commands::solve_collimation,
        Command::Selftest => commands::selftest,
    }
}

fn run(cli: &Cli) -> CliResult<()> {
    let cfg = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    if let Some(n) = cli.threads {
        config::require(n > 0, || "--threads must be positive".into())?;
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(CliError::usage)?;
    }
    let seed = cli.seed.or(cfg.seed).unwrap_or(0);
    let root = cli
        .out
        .clone()
        .or_else(|| cfg.out.clone())
        .unwrap_or_else(|| PathBuf::from("out"));
    let scales = cfg.scales.build()?;
    let mut out = OutDir::create(&root, cli.command.name(), scales)?;
    let ctx = Context { seed, scales };

    let started = SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map_or(0.0, |d| d.as_secs_f64());
    let clock = Instant::now();
    let (outcome, result) = match runner(cli.command)(&cfg, &ctx, &mut out) {
        Ok(o) => {
            let failures = o.failures();
            let r = if failures.is_empty() {
                Ok(())
            } else {
                Err(CliError::ChecksFailed(failures))
            };
            (o, r)
        }
        Err(e) => (Outcome::default(), Err(e)),
    };
    let config_echo = serde_json::to_value(&cfg).map_err(|e| CliError::usage(format!("config echo: {e}")))?;
    let manifest = RunManifest {
        command: cli.command.name(),
        version: output::VERSION,
        seed,
        threads: rayon::current_num_threads(),
        config: config_echo,
        started_unix_seconds: started,
        wall_clock_seconds: clock.elapsed().as_secs_f64(),
        outputs: &out.written,
        scalars: &outcome.scalars,
        series: &outcome.series,
        checks: &outcome.checks,
        status: if result.is_ok() { "ok" } else { "failed" },
        error: result.as_ref().err().map(CliError::record),
    };
    let path = output::write_manifest(&out.root, &manifest)?;
    for c in &outcome.checks {
        let _ = writeln!(
            std::io::stderr(),
            "{} {}: {:e} (limit {:e})",
            if c.passed { "PASS" } else { "FAIL" },
            c.name,
            c.value,
            c.threshold
        );
    }
    let _ = writeln!(std::io::stderr(), "manifest: {}", path.display());
    result
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let record =
                serde_json::to_string(&e.record()).unwrap_or_else(|_| format!("{{\"message\":{:?}}}", e.to_string()));
            let _ = writeln!(std::io::stderr(), "error: {e}");
            let _ = writeln!(std::io::stderr(), "{record}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
