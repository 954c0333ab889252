use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use sebm::config::ModelConfig;
use sebm::exec::Execution;
use sebm::harness::{icecaps, oracle_table, run_ensemble, run_picard, write_oracle_csv, RunOptions};
use sebm::verify::{desk_config, run_suite};
use sebm::Error;

const EXIT_CONFIG: u8 = 2;
const EXIT_NUMERICAL: u8 = 3;
const EXIT_VERIFY: u8 = 4;

#[derive(Parser)]
#[command(name = "sebm", version, about = "Stochastic energy balance model")]
struct Cli {
    /// JSON model configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Override the master seed from the config.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads; 1 runs sequentially.
    #[arg(long, global = true, env = "SEBM_THREADS")]
    threads: Option<usize>,
    /// Run directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Also write gnuplot scripts next to the CSV output.
    #[arg(long, global = true)]
    emit_gnuplot: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate an ensemble and write trajectories, statistics and a manifest.
    Simulate,
    /// Successive approximations on frozen noise paths.
    Picard {
        #[arg(long, default_value_t = 1e-3)]
        tol: f64,
        #[arg(long, default_value_t = 25)]
        max_iter: usize,
    },
    /// Run the reduced invariant suite.
    Verify,
    /// Tabulate the scalar Osgood comparison solution.
    Oracle {
        #[arg(long)]
        v0: f64,
        #[arg(long)]
        alpha: f64,
        #[arg(long, default_value_t = 1.0)]
        horizon: f64,
        #[arg(long, default_value_t = 100)]
        points: usize,
    },
    /// Locate ice lines in the snapshots of a finished run.
    Icecaps {
        run_dir: PathBuf,
        #[arg(long)]
        grid: Option<usize>,
    },
}

fn exit_code(e: &Error) -> u8 {
    if e.is_numerical() || matches!(e, Error::Precondition(_)) {
        EXIT_NUMERICAL
    } else {
        EXIT_CONFIG
    }
}

fn load_config(cli: &Cli) -> sebm::Result<ModelConfig> {
    let mut cfg = match &cli.config {
        Some(p) => ModelConfig::from_path(p)?,
        None => desk_config(),
    };
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    Ok(cfg)
}

fn out_dir(cli: &Cli, default: &str) -> PathBuf {
    cli.out.clone().unwrap_or_else(|| PathBuf::from(default))
}

#[cfg(feature = "parallel")]
fn setup_threads(threads: Option<usize>) -> Result<Execution, String> {
    match threads {
        Some(0) => Err("--threads must be at least 1".into()),
        Some(1) => Ok(Execution::Sequential),
        Some(n) => {
            rayon::ThreadPoolBuilder::new().num_threads(n).build_global().map_err(|e| e.to_string())?;
            Ok(Execution::Parallel)
        }
        None => Ok(Execution::Parallel),
    }
}

#[cfg(not(feature = "parallel"))]
fn setup_threads(threads: Option<usize>) -> Result<Execution, String> {
    match threads {
        Some(0) => Err("--threads must be at least 1".into()),
        _ => Ok(Execution::Sequential),
    }
}

fn run(cli: &Cli, exec: Execution) -> Result<(), u8> {
    let fail = |e: Error| {
        eprintln!("error: {e}");
        exit_code(&e)
    };
    match &cli.command {
        Command::Simulate => {
            let cfg = load_config(cli).map_err(fail)?;
            let dir = out_dir(cli, "run");
            let opts = RunOptions { exec, out_dir: Some(dir.clone()), emit_gnuplot: cli.emit_gnuplot };
            let res = run_ensemble(&cfg, &opts).map_err(fail)?;
            let s = &res.summary;
            println!("paths           {}/{}", s.completed_paths, s.paths);
            println!("horizon         {}", s.horizon);
            if let Some(b) = &s.bt_fluctuation {
                println!("B_T fluctuation {:.6e} +- {:.2e}", b.estimate, b.stderr);
            }
            if let Some(t) = s.terminal_mean_temperature {
                println!("mean T(horizon) {t:.6}");
            }
            println!("output          {}", dir.display());
        }
        Command::Picard { tol, max_iter } => {
            let cfg = load_config(cli).map_err(fail)?;
            let dir = out_dir(cli, "run");
            let opts = RunOptions { exec, out_dir: Some(dir.clone()), emit_gnuplot: cli.emit_gnuplot };
            let res = run_picard(&cfg, *tol, *max_iter, &opts).map_err(fail)?;
            let d = &res.solution.diagnostics;
            for (k, dist) in d.distances.iter().enumerate() {
                println!("iter {:>3}  d = {:.6e} +- {:.2e}", k + 1, dist.estimate, dist.stderr);
            }
            println!("residual {:.6e}", d.residual.estimate);
            if let Some(m) = &d.majorant {
                println!("majorant violations {} (worst excess {:.3e})", m.violations, m.worst_excess);
            }
            println!("output {}", dir.display());
        }
        Command::Verify => {
            let cfg = load_config(cli).map_err(fail)?;
            let report = run_suite(&cfg, exec).map_err(fail)?;
            for c in &report.checks {
                println!("{} {:<22} {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
            }
            if let Some(dir) = &cli.out {
                std::fs::create_dir_all(dir).map_err(|e| fail(e.into()))?;
                let text = serde_json::to_string_pretty(&report).expect("report serializes");
                std::fs::write(dir.join("verify.json"), text).map_err(|e| fail(e.into()))?;
            }
            if !report.passed() {
                return Err(EXIT_VERIFY);
            }
        }
        Command::Oracle { v0, alpha, horizon, points } => {
            let cfg = load_config(cli).map_err(fail)?;
            let rows = oracle_table(&cfg.coalbedo, *v0, *alpha, *horizon, *points).map_err(fail)?;
            match &cli.out {
                Some(dir) => {
                    std::fs::create_dir_all(dir).map_err(|e| fail(e.into()))?;
                    let path = dir.join("oracle.csv");
                    write_oracle_csv(&path, &rows).map_err(fail)?;
                    println!("wrote {}", path.display());
                }
                None => {
                    println!("t,v,closed_form");
                    for r in &rows {
                        let c = r.closed_form.map(|c| format!("{c:.17e}")).unwrap_or_default();
                        println!("{:.17e},{:.17e},{c}", r.t, r.v);
                    }
                }
            }
        }
        Command::Icecaps { run_dir, grid } => {
            let report = icecaps(Path::new(run_dir), *grid, cli.emit_gnuplot).map_err(fail)?;
            let series = report.fraction_series();
            if let Some(last) = series.last() {
                println!("snapshots {}  final mean ice fraction {:.6}", series.len(), last.2);
            }
            println!("wrote {}", run_dir.join("ice_fraction.csv").display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let exec = match setup_threads(cli.threads) {
        Ok(e) => e,
        Err(m) => {
            eprintln!("error: {m}");
            return ExitCode::from(EXIT_CONFIG);
        }
    };
    match run(&cli, exec) {
        Ok(()) => ExitCode::SUCCESS,
        Err(code) => ExitCode::from(code),
    }
}
