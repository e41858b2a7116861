use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use klab::artifacts::{artifact_path, ensure_dir, fmt_g17, write_json};
use klab::config::{RunConfig, SolveMode};
use klab::scenario::{run_scenario, StageError};
use klab::verify::run_battery;
use klab_core::symbol::characteristic_roots;

/// Spectral laboratory for Kirchhoff-type strictly hyperbolic systems.
#[derive(Parser)]
#[command(name = "klab", version, about)]
struct Cli {
    /// Configuration file (`section.key = value` lines).
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Output directory (overrides `output.dir`).
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Override a single key, e.g. `--override data.amplitude=0.01`
    /// (repeatable).
    #[arg(long = "override", value_name = "KEY=VALUE", global = true)]
    overrides: Vec<String>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the full scenario: norms, gate, solve(s), diagnostics, artifacts.
    Solve,
    /// Compute the data-class norms and the smallness gate only.
    Norms,
    /// Tabulate characteristic roots and the hyperbolicity gap.
    Roots,
    /// Run the verification battery and emit verify.json.
    Verify,
    /// Run both solvers and report their L2 mismatch.
    Compare,
}

const EXIT_CONFIG: u8 = 2;
const EXIT_SOLVER: u8 = 3;
const EXIT_VERIFY: u8 = 4;

fn load_config(cli: &Cli) -> Result<RunConfig, StageError> {
    let mut cfg = match &cli.config {
        Some(path) => RunConfig::from_file(path)?,
        None => RunConfig::default(),
    };
    for ov in &cli.overrides {
        let Some((k, v)) = ov.split_once('=') else {
            return Err(StageError::Config(klab::config::ConfigError {
                key: ov.clone(),
                message: "override must be KEY=VALUE".into(),
            }));
        };
        cfg.set(k.trim(), v.trim())?;
    }
    Ok(cfg)
}

fn out_dir(cli: &Cli, cfg: &RunConfig) -> PathBuf {
    cli.out
        .clone()
        .unwrap_or_else(|| PathBuf::from(&cfg.out_dir))
}

fn stage_exit(err: &StageError) -> u8 {
    match err {
        StageError::Config(_) => EXIT_CONFIG,
        StageError::Solver { .. } | StageError::Io { .. } => EXIT_SOLVER,
    }
}

fn cmd_solve(cfg: &RunConfig, dir: &Path) -> Result<(), StageError> {
    let summary = run_scenario(cfg, dir)?;
    println!(
        "gate: {} (value {})",
        if summary.gate_pass { "pass" } else { "fail" },
        fmt_g17(summary.gate_value)
    );
    if summary.iterations > 0 {
        println!("fixed point converged in {} iterations", summary.iterations);
    }
    if let Some(m) = summary.l2_mismatch {
        println!("cross-solver l2 mismatch: {}", fmt_g17(m));
    }
    println!("artifacts in {}:", dir.display());
    for a in &summary.artifacts {
        println!("  {a}");
    }
    Ok(())
}

fn cmd_norms(cfg: &RunConfig, dir: &Path) -> Result<(), StageError> {
    ensure_dir(dir).map_err(|e| StageError::Io {
        stage: "output",
        message: e.to_string(),
    })?;
    let (report, taus, profile) = klab::scenario::compute_norms(cfg)?;
    write_json(&artifact_path(dir, "norms.json"), &report).map_err(|e| StageError::Io {
        stage: "norms",
        message: e.to_string(),
    })?;
    klab::artifacts::write_tau_profile_csv(&artifact_path(dir, "tau_profile.csv"), &taus, &profile)
        .map_err(|e| StageError::Io {
            stage: "norms",
            message: e.to_string(),
        })?;
    println!("l2_sq      = {}", fmt_g17(report.l2_sq));
    println!(
        "y_norm     = {}  (tail est {})",
        fmt_g17(report.y_norm),
        fmt_g17(report.y_tail)
    );
    println!("m_norm     = {}", fmt_g17(report.m_norm));
    if let Some(yt) = report.y_tilde {
        println!("y_tilde    = {}", fmt_g17(yt));
    }
    if let Some(k) = report.k_norm {
        println!("k_norm     = {}", fmt_g17(k));
    }
    println!(
        "gate       = {} (value {}, threshold {})",
        if report.gate.pass { "pass" } else { "fail" },
        fmt_g17(report.gate.value),
        fmt_g17(report.gate.threshold)
    );
    Ok(())
}

#[derive(serde::Serialize)]
struct RootsSummary {
    family: String,
    m: usize,
    s_samples: usize,
    sphere_nodes: usize,
    min_gap: f64,
    min_gap_at_s: f64,
    min_gap_at_omega_index: usize,
}

fn cmd_roots(cfg: &RunConfig, dir: &Path) -> Result<(), StageError> {
    ensure_dir(dir).map_err(|e| StageError::Io {
        stage: "output",
        message: e.to_string(),
    })?;
    let grid = cfg.build_grid()?;
    let problem = cfg.build_problem(&grid)?;
    let opts = cfg.solver_options().diag.roots;
    let m = problem.symbol.size();
    let n_s = 33usize;
    let mut min_gap = f64::INFINITY;
    let mut min_at = (0.0, 0usize);
    let mut csv = String::from("s,omega_index,");
    csv.push_str(
        &(1..=m)
            .map(|p| format!("phi_{p}"))
            .collect::<Vec<_>>()
            .join(","),
    );
    csv.push('\n');
    for k in 0..n_s {
        let s = problem.symbol.delta() * k as f64 / (n_s - 1) as f64;
        for q in 0..grid.n_sphere() {
            let rs =
                characteristic_roots(&problem.symbol, s, grid.omega(q), &opts).map_err(|e| {
                    StageError::Solver {
                        stage: "roots",
                        message: e.to_string(),
                    }
                })?;
            if rs.gap < min_gap {
                min_gap = rs.gap;
                min_at = (s, q);
            }
            if q == 0 {
                csv.push_str(&fmt_g17(s));
                csv.push_str(",0");
                for r in &rs.roots {
                    csv.push(',');
                    csv.push_str(&fmt_g17(*r));
                }
                csv.push('\n');
            }
        }
    }
    std::fs::write(artifact_path(dir, "roots.csv"), csv).map_err(|e| StageError::Io {
        stage: "roots",
        message: e.to_string(),
    })?;
    let summary = RootsSummary {
        family: problem.name.clone(),
        m,
        s_samples: n_s,
        sphere_nodes: grid.n_sphere(),
        min_gap,
        min_gap_at_s: min_at.0,
        min_gap_at_omega_index: min_at.1,
    };
    write_json(&artifact_path(dir, "roots.json"), &summary).map_err(|e| StageError::Io {
        stage: "roots",
        message: e.to_string(),
    })?;
    println!(
        "{} (m = {}): hyperbolicity gap {} (at s = {}, omega index {})",
        summary.family,
        m,
        fmt_g17(min_gap),
        fmt_g17(min_at.0),
        min_at.1
    );
    Ok(())
}

fn cmd_verify(cfg: &RunConfig, dir: &Path) -> Result<bool, StageError> {
    ensure_dir(dir).map_err(|e| StageError::Io {
        stage: "output",
        message: e.to_string(),
    })?;
    let entries = run_battery(cfg)?;
    write_json(&artifact_path(dir, "verify.json"), &entries).map_err(|e| StageError::Io {
        stage: "verify",
        message: e.to_string(),
    })?;
    let mut all_pass = true;
    for e in &entries {
        println!(
            "{} {:<26} measured {:<24} threshold {}",
            if e.pass { "PASS" } else { "FAIL" },
            e.name,
            fmt_g17(e.measured),
            fmt_g17(e.threshold)
        );
        all_pass &= e.pass;
    }
    Ok(all_pass)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();

    if let Ok(threads) = std::env::var("KLAB_THREADS") {
        if let Ok(n) = threads.parse::<usize>() {
            let _ = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build_global();
        }
    }

    let cli = Cli::parse();
    let mut cfg = match load_config(&cli) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("{e}");
            return ExitCode::from(EXIT_CONFIG);
        }
    };
    let dir = out_dir(&cli, &cfg);

    let result = match cli.command {
        Command::Solve => cmd_solve(&cfg, &dir),
        Command::Norms => cmd_norms(&cfg, &dir),
        Command::Roots => cmd_roots(&cfg, &dir),
        Command::Verify => match cmd_verify(&cfg, &dir) {
            Ok(true) => Ok(()),
            Ok(false) => {
                eprintln!("verification failures recorded in verify.json");
                return ExitCode::from(EXIT_VERIFY);
            }
            Err(e) => Err(e),
        },
        Command::Compare => {
            cfg.mode = SolveMode::Both;
            cmd_solve(&cfg, &dir)
        }
    };

    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(stage_exit(&e))
        }
    }
}
