use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use parobs_cli::config::{BoundaryArg, DomainArg, OrderRange};
use parobs_cli::{configure_threads, parse_config, run, Mode, Overrides};

#[derive(Parser)]
#[command(name = "parobs", version, about = "Optimal observation domains for parabolic equations")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve one truncation order.
    Solve(Flags),
    /// Solve a list of orders and detect stationarity.
    Sweep(Flags),
    /// Run the analytic property suite.
    Checks(Flags),
    /// Radial reduction on the disk.
    Radial(Flags),
    /// Stokes system on the disk.
    Stokes(Flags),
}

#[derive(Args)]
struct Flags {
    /// Flat JSON config; flags override its keys.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, value_enum)]
    domain: Option<DomainArg>,
    #[arg(long, value_enum)]
    boundary: Option<BoundaryArg>,
    #[arg(long)]
    alpha: Option<f64>,
    /// Time horizon.
    #[arg(long = "T")]
    horizon: Option<f64>,
    /// Volume fraction in (0, 1).
    #[arg(long = "L")]
    volume_fraction: Option<f64>,
    /// Truncation order.
    #[arg(long = "N")]
    order: Option<usize>,
    /// Inclusive order range, e.g. 1..6.
    #[arg(long = "n-list")]
    n_list: Option<OrderRange>,
    /// Cells per axis (radial cells on the disk).
    #[arg(long)]
    res: Option<usize>,
    /// Stationarity tolerance as a fraction of the domain measure.
    #[arg(long = "tol-stat")]
    tol_stat: Option<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn fail(kind: &str, key: Option<&str>, message: &str) -> ExitCode {
    let key = key.map(|k| format!(" key={k}")).unwrap_or_default();
    eprintln!("error: kind={kind}{key} message={}", serde_json::to_string(message).unwrap_or_default());
    ExitCode::from(if kind == "config" { 2 } else { 1 })
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let (mode, flags) = match cli.command {
        Command::Solve(f) => (Mode::Solve, f),
        Command::Sweep(f) => (Mode::Sweep, f),
        Command::Checks(f) => (Mode::Checks, f),
        Command::Radial(f) => (Mode::Radial, f),
        Command::Stokes(f) => (Mode::Stokes, f),
    };
    if let Err(e) = configure_threads() {
        return fail("config", Some(&e.key), &e.message);
    }
    let overrides = Overrides {
        domain: flags.domain,
        boundary: flags.boundary,
        alpha: flags.alpha,
        horizon: flags.horizon,
        volume_fraction: flags.volume_fraction,
        order: flags.order,
        orders: flags.n_list,
        resolution: flags.res,
        out: flags.out,
        tolerance: flags.tol_stat,
    };
    let config = match parse_config(mode, flags.config.as_deref(), &overrides) {
        Ok(c) => c,
        Err(e) => return fail("config", Some(&e.key), &e.message),
    };
    match run(&config) {
        Ok(outcome) => {
            let r = &outcome.report;
            for s in &r.solves {
                println!(
                    "N={:<3} objective={:.9e} level={:.6e} fractional={} iterations={}",
                    s.order, s.objective, s.level, s.fractional_cell_count, s.iterations
                );
            }
            if let Some(st) = &r.stationarity {
                match st.detected_n0 {
                    Some(n0) => println!("stationary from N={n0}"),
                    None => println!("no stationarity detected"),
                }
            }
            if let Some(c) = &r.checks {
                for check in &c.checks {
                    println!("{} {}: {}", if check.passed { "PASS" } else { "FAIL" }, check.name, check.detail);
                }
                println!("{} passed, {} failed", c.passed, c.failed);
            }
            println!("wrote {} files to {}", outcome.files.len(), config.out.display());
            if r.success {
                ExitCode::SUCCESS
            } else {
                let failed: Vec<&str> = r.invariants.iter().filter(|i| !i.passed).map(|i| i.name.as_str()).collect();
                fail("invariant", None, &format!("violated: {}", failed.join(", ")))
            }
        }
        Err(e) => fail(e.kind(), None, &e.to_string()),
    }
}
