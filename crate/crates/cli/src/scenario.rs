//! Scenario execution: norms → gate → solve(s) → diagnostics → artifacts.

use std::path::Path;
use std::sync::Arc;

use klab_core::classnorms::{self, ClassNormsReport};
use klab_core::diagnostics::{class_membership, core_bound_report, sprime_split};
use klab_core::solver::{
    direct_solve, fixed_point_solve, theta_apply, LinearMethod, NonlocalTrajectory, SolutionRecord,
    SolverOptions,
};
use serde::Serialize;

use crate::artifacts::{
    artifact_path, ensure_dir, time_label, write_field_csv, write_json, write_tau_profile_csv,
    write_trajectory_csv,
};
use crate::config::{ConfigError, RunConfig, SolveMode};

/// Error with the failing stage attached (drives exit codes).
#[derive(Debug)]
pub enum StageError {
    Config(ConfigError),
    Solver {
        stage: &'static str,
        message: String,
    },
    Io {
        stage: &'static str,
        message: String,
    },
}

impl std::fmt::Display for StageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            StageError::Config(e) => write!(f, "{e}"),
            StageError::Solver { stage, message } => write!(f, "stage `{stage}` failed: {message}"),
            StageError::Io { stage, message } => write!(f, "stage `{stage}` i/o error: {message}"),
        }
    }
}

impl From<ConfigError> for StageError {
    fn from(e: ConfigError) -> Self {
        StageError::Config(e)
    }
}

fn solver_err(stage: &'static str) -> impl Fn(klab_core::Error) -> StageError {
    move |e| StageError::Solver {
        stage,
        message: e.to_string(),
    }
}

fn io_err(stage: &'static str) -> impl Fn(std::io::Error) -> StageError {
    move |e| StageError::Io {
        stage,
        message: e.to_string(),
    }
}

#[derive(Debug, Serialize)]
pub struct ClassReportJson {
    pub lambda_realized: f64,
    pub k_realized: f64,
    pub lambda_bound: f64,
    pub k_bound: f64,
    pub lambda_ok: bool,
    pub k_ok: bool,
}

#[derive(Debug, Serialize)]
pub struct ConvergenceReport {
    pub mode: String,
    pub iterations: usize,
    pub deltas: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub contraction_estimate: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub l2_mismatch: Option<f64>,
    pub class: ClassReportJson,
    pub core_bound: klab_core::diagnostics::CoreBoundReport,
    pub amplitude_bound_c: f64,
    pub amplitude_ratio_max: f64,
    pub sprime_split_max_mismatch: f64,
    pub sprime_split_scale: f64,
    pub diag_residue_max: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub energy_drift: Option<f64>,
    pub warnings: Vec<String>,
}

#[derive(Debug)]
pub struct ScenarioSummary {
    pub gate_pass: bool,
    pub gate_value: f64,
    pub iterations: usize,
    pub l2_mismatch: Option<f64>,
    pub artifacts: Vec<String>,
}

/// Subsample a trajectory to at most `max_steps` steps (uniform stride);
/// returns the kept indices alongside.
fn stride_trajectory(
    traj: &NonlocalTrajectory,
    max_steps: usize,
) -> (NonlocalTrajectory, Vec<usize>) {
    let n_steps = traj.len() - 1;
    let stride = if n_steps <= max_steps {
        1
    } else {
        n_steps.div_ceil(max_steps)
    };
    let idx: Vec<usize> = (0..=n_steps / stride).map(|k| k * stride).collect();
    let strided = NonlocalTrajectory {
        t0: traj.t0,
        dt: traj.dt * stride as f64,
        s: idx.iter().map(|&k| traj.s[k]).collect(),
        sprime: idx.iter().map(|&k| traj.sprime[k]).collect(),
    };
    (strided, idx)
}

/// Compute the class-norms report for the configured data.
pub fn compute_norms(
    cfg: &RunConfig,
) -> Result<(ClassNormsReport, Vec<f64>, Vec<f64>), StageError> {
    let norms_grid = cfg.build_norms_grid()?;
    let solver_grid = cfg.build_grid()?;
    let problem = cfg.build_problem(&solver_grid)?;
    let data = &problem.data;
    let tau_grid = cfg.tau_grid();

    let field = data.sample_on(Arc::new(norms_grid.clone()));
    let l2_sq = field.l2_norm_sq().map_err(solver_err("norms"))?;
    let y = classnorms::y_norm(data, &norms_grid, &tau_grid);
    let m_val = classnorms::m_norm(data, &norms_grid);
    let (y_tilde, k_val) = if data.m == 2 {
        let yt = classnorms::y_tilde_norm(data, &norms_grid, &tau_grid)
            .map(|o| o.value)
            .ok();
        let kn = classnorms::k_norm(data, &norms_grid, &tau_grid)
            .map(|o| o.value)
            .ok();
        (yt, kn)
    } else {
        (None, None)
    };
    let weighted = if cfg.compute_weighted && data.has_physical() && cfg.dim == 1 {
        classnorms::weighted_sobolev_norm(
            data,
            cfg.weighted_sigma,
            cfg.weighted_kappa,
            cfg.weighted_box,
            cfg.weighted_resolution,
        )
        .ok()
    } else {
        None
    };
    let gate = classnorms::smallness_gate(l2_sq, y.value, cfg.gate_threshold);
    let report = ClassNormsReport {
        data_family: data.name.clone(),
        amplitude: data.amplitude,
        l2_sq,
        y_norm: y.value,
        y_tail: y.tail,
        m_norm: m_val,
        y_tilde,
        k_norm: k_val,
        weighted_h1_kappa: weighted,
        data_tail_ratio: data.tail_ratio(&norms_grid),
        gate,
    };
    Ok((report, y.taus, y.profile))
}

/// Full scenario: writes `norms.json`, `tau_profile.csv`, `trajectory.csv`,
/// `convergence.json` and `fields_t<t>.csv` into `out_dir`.
pub fn run_scenario(cfg: &RunConfig, out_dir: &Path) -> Result<ScenarioSummary, StageError> {
    ensure_dir(out_dir).map_err(io_err("output"))?;
    let mut artifacts = Vec::new();

    // Stage: norms.
    let (norms_report, taus, profile) = compute_norms(cfg)?;
    write_json(&artifact_path(out_dir, "norms.json"), &norms_report).map_err(io_err("norms"))?;
    write_tau_profile_csv(&artifact_path(out_dir, "tau_profile.csv"), &taus, &profile)
        .map_err(io_err("norms"))?;
    artifacts.push("norms.json".into());
    artifacts.push("tau_profile.csv".into());

    // Stage: gate.
    if cfg.gate_enforce && !norms_report.gate.pass {
        return Err(StageError::Solver {
            stage: "gate",
            message: format!(
                "smallness gate failed: value {:.6e} >= threshold {:.6e} (set gate.enforce = false to proceed)",
                norms_report.gate.value, norms_report.gate.threshold
            ),
        });
    }

    // Stage: solve.
    let grid = Arc::new(cfg.build_grid()?);
    let problem = cfg.build_problem(&grid)?;
    let data = problem.data.sample_on(Arc::clone(&grid));
    let mut opts = cfg.solver_options();
    if !opts.snapshot_times.contains(&cfg.horizon) {
        opts.snapshot_times.push(cfg.horizon);
    }
    opts.record_energy = problem.energy.is_some();

    let (primary, l2_mismatch): (SolutionRecord, Option<f64>) = match cfg.mode {
        SolveMode::Direct => {
            let rec = direct_solve(&problem, &data, &opts).map_err(solver_err("direct_solve"))?;
            (rec, None)
        }
        SolveMode::FixedPoint => {
            let rec = fixed_point_solve(&problem, &data, &opts, None)
                .map_err(solver_err("fixed_point_solve"))?;
            (rec, None)
        }
        SolveMode::Both => {
            let direct =
                direct_solve(&problem, &data, &opts).map_err(solver_err("direct_solve"))?;
            let fp = fixed_point_solve(&problem, &data, &opts, None)
                .map_err(solver_err("fixed_point_solve"))?;
            let mismatch = fp
                .fields
                .last()
                .zip(direct.fields.last())
                .map(|(a, b)| a.rel_l2_distance(b))
                .transpose()
                .map_err(solver_err("compare"))?;
            let mut primary = fp;
            primary.energy = direct.energy;
            primary.warnings.extend(direct.warnings.iter().cloned());
            (primary, mismatch)
        }
    };

    // Optional backward half for two-sided runs.
    let backward = if cfg.two_sided() {
        let bopts = SolverOptions {
            dt: -cfg.dt,
            t_final: -cfg.horizon,
            snapshot_times: vec![],
            record_energy: false,
            ..opts.clone()
        };
        let rec = match cfg.mode {
            SolveMode::Direct => direct_solve(&problem, &data, &bopts),
            _ => fixed_point_solve(&problem, &data, &bopts, None),
        }
        .map_err(solver_err("two_sided"))?;
        Some(rec)
    } else {
        None
    };

    // Stage: diagnostics along the realized trajectory (asymptotic pass).
    let (diag_traj, diag_idx) = stride_trajectory(&primary.trajectory, cfg.diagnostics_max_steps);
    let diag_opts = SolverOptions {
        linear: LinearMethod::Representation,
        final_tables: true,
        snapshot_times: vec![],
        dt: diag_traj.dt,
        t_final: diag_traj.dt * (diag_traj.len() - 1) as f64,
        ..opts.clone()
    };
    let diag_out =
        theta_apply(&problem, &data, &diag_traj, &diag_opts).map_err(solver_err("diagnostics"))?;
    let tables = diag_out.tables.as_ref().expect("final_tables requested");
    let split = sprime_split(tables, &problem.weight, &data).map_err(solver_err("diagnostics"))?;
    let (amp_c, amp_ratio) = tables.amplitude_bound_constant();

    // trajectory.csv at the diagnostics stride; s, s' and l2 come from the
    // realized primary run, I and J from the asymptotic pass.
    let l2_strided: Vec<f64> = diag_idx.iter().map(|&k| primary.l2_series[k]).collect();
    write_trajectory_csv(
        &artifact_path(out_dir, "trajectory.csv"),
        &diag_traj,
        &split.i_values,
        &split.j_values,
        &l2_strided,
    )
    .map_err(io_err("diagnostics"))?;
    artifacts.push("trajectory.csv".into());

    if let Some(bwd) = &backward {
        let (bdiag, bidx) = stride_trajectory(&bwd.trajectory, cfg.diagnostics_max_steps);
        let bl2: Vec<f64> = bidx.iter().map(|&k| bwd.l2_series[k]).collect();
        write_trajectory_csv(
            &artifact_path(out_dir, "trajectory_backward.csv"),
            &bdiag,
            &[],
            &[],
            &bl2,
        )
        .map_err(io_err("diagnostics"))?;
        artifacts.push("trajectory_backward.csv".into());
    }

    // convergence.json.
    let lambda0 = {
        let s0 = primary.trajectory.s[0].clamp(0.0, problem.symbol.delta());
        let mut sup = 0.0_f64;
        for q in 0..grid.n_sphere() {
            sup = sup.max(klab_core::linalg::max_abs(
                &problem.symbol.eval(s0, grid.omega(q)),
            ));
        }
        sup
    };
    let membership = class_membership(
        &problem.symbol,
        &primary.trajectory,
        &grid,
        2.0 * lambda0,
        cfg.k_bound,
    );
    let core = core_bound_report(
        &primary.trajectory,
        primary.k_realized,
        norms_report.l2_sq,
        norms_report.y_norm,
    );
    let energy_drift = primary.energy.as_ref().map(|e| {
        let e0 = e[0];
        if e0 == 0.0 {
            0.0
        } else {
            e.iter().fold(0.0_f64, |a, &x| a.max((x - e0).abs() / e0))
        }
    });
    let contraction_estimate = if primary.convergence.len() >= 2 {
        let n = primary.convergence.len();
        let prev = primary.convergence[n - 2];
        if prev > 0.0 {
            Some(primary.convergence[n - 1] / prev)
        } else {
            None
        }
    } else {
        None
    };
    let convergence = ConvergenceReport {
        mode: match cfg.mode {
            SolveMode::Direct => "direct".into(),
            SolveMode::FixedPoint => "fixed_point".into(),
            SolveMode::Both => "both".into(),
        },
        iterations: primary.iterations,
        deltas: primary.convergence.clone(),
        contraction_estimate,
        l2_mismatch,
        class: ClassReportJson {
            lambda_realized: membership.lambda_realized,
            k_realized: membership.k_realized,
            lambda_bound: membership.lambda_bound,
            k_bound: membership.k_bound,
            lambda_ok: membership.lambda_ok,
            k_ok: membership.k_ok,
        },
        core_bound: core,
        amplitude_bound_c: amp_c,
        amplitude_ratio_max: amp_ratio,
        sprime_split_max_mismatch: split.max_mismatch,
        sprime_split_scale: split.sprime_scale,
        diag_residue_max: split.diag_residue_max,
        energy_drift,
        warnings: primary.warnings.clone(),
    };
    write_json(&artifact_path(out_dir, "convergence.json"), &convergence)
        .map_err(io_err("diagnostics"))?;
    artifacts.push("convergence.json".into());

    // Field snapshots.
    for requested in &cfg.fields_times {
        if !primary
            .fields
            .iter()
            .any(|f| (f.time() - requested).abs() <= cfg.dt.abs() * 1e-6 + 1e-12)
        {
            log::warn!(
                "requested field time {requested} does not land on the time grid (dt = {}); snapshot skipped",
                cfg.dt
            );
        }
    }
    for field in &primary.fields {
        let name = format!("fields_t{}.csv", time_label(field.time()));
        write_field_csv(&artifact_path(out_dir, &name), field).map_err(io_err("output"))?;
        artifacts.push(name);
    }

    Ok(ScenarioSummary {
        gate_pass: norms_report.gate.pass,
        gate_value: norms_report.gate.value,
        iterations: primary.iterations,
        l2_mismatch,
        artifacts,
    })
}
