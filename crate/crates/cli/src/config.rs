//! Run configuration: a flat `section.key = value` text format.
//!
//! Grammar: one assignment per line, `#` starts a comment, blank lines are
//! skipped. Keys are dotted paths; values are numbers, booleans, names, or
//! comma-separated lists. Unknown keys are errors (named in the message),
//! as are malformed values. Every tolerance used anywhere in a run appears
//! here with its default — there are no hidden constants.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;
use std::sync::Arc;

use klab_core::asymp::{AmplitudeMethod, PICARD_TERMS, PICARD_TOL};
use klab_core::classnorms::{self, DataFamily, TauGrid};
use klab_core::diag::DiagOptions;
use klab_core::families::{self, ProblemFamily};
use klab_core::grid::{build_grid, FrequencyGrid, SphereRes};
use klab_core::solver::{LinearMethod, SolverOptions};
use klab_core::symbol::{tabulated_companion_symbol, HermitianWeight, RootOptions};

/// Configuration error with the offending key path.
#[derive(Debug)]
pub struct ConfigError {
    pub key: String,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "config error at `{}`: {}", self.key, self.message)
    }
}

impl std::error::Error for ConfigError {}

fn cerr(key: &str, message: impl Into<String>) -> ConfigError {
    ConfigError {
        key: key.to_string(),
        message: message.into(),
    }
}

type CResult<T> = Result<T, ConfigError>;

/// Fully typed run configuration with defaults for every knob.
#[derive(Debug, Clone)]
pub struct RunConfig {
    // problem.*
    pub family: String,
    pub delta: f64,
    pub a1: f64,
    pub a2: f64,
    pub p1: f64,
    pub p2: f64,
    pub wave_speed: f64,
    pub table_path: Option<String>,
    pub s_diag: Vec<f64>,
    pub radial_exponent: usize,
    // data.*
    pub data_family: String,
    pub amplitude: f64,
    pub components: Option<Vec<f64>>,
    pub sigma: f64,
    pub powers: Vec<u32>,
    pub shell_r0: f64,
    pub shell_r1: f64,
    pub bump_center: f64,
    pub bump_halfwidth: f64,
    // grid.*
    pub dim: usize,
    pub rho_max: f64,
    pub n_rho: usize,
    pub sphere_res: (usize, usize),
    // time.*
    pub horizon: f64,
    pub dt: f64,
    pub two_sided: bool,
    // solver.*
    pub mode: SolveMode,
    pub linear_method: LinearMethod,
    pub fp_tol: f64,
    pub max_iters: usize,
    pub amplitude_method: String,
    pub picard_terms: usize,
    pub picard_tol: f64,
    // norms.*
    pub tau_max: f64,
    pub n_tau: usize,
    pub norms_n_rho: usize,
    pub compute_weighted: bool,
    pub weighted_sigma: f64,
    pub weighted_kappa: f64,
    pub weighted_box: f64,
    pub weighted_resolution: usize,
    // gate.*
    pub gate_threshold: f64,
    pub gate_enforce: bool,
    // tol.*
    pub det_floor: f64,
    pub align_min: f64,
    pub ds_step_rel: f64,
    pub reality_tol: f64,
    pub gap_rel: f64,
    pub cfl_warn: f64,
    /// Surrogate for the smallness constant K0: the realized
    /// `∫ ‖∂_t A‖ dt` is flagged when it exceeds this.
    pub k_bound: f64,
    // diagnostics.*
    pub diagnostics_max_steps: usize,
    // verify.*
    pub verify: VerifyTolerances,
    // output.*
    pub out_dir: String,
    pub fields_times: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveMode {
    Direct,
    FixedPoint,
    Both,
}

/// Thresholds of the verification battery.
#[derive(Debug, Clone)]
pub struct VerifyTolerances {
    pub roots_closed_form: f64,
    pub diag_residual: f64,
    pub diag_inverse: f64,
    pub det_floor: f64,
    pub rep_l2: f64,
    pub picard_slack: f64,
    pub sprime_rel: f64,
    pub diag_residue: f64,
    pub hamiltonian_drift: f64,
    pub cross_solver_l2: f64,
    pub contraction_max: f64,
    pub scaling_band: f64,
    pub ratio_band: f64,
    pub uniqueness_factor: f64,
    pub decay_min: f64,
    /// Sanity ceiling on the measured amplitude-bound constant c.
    pub amplitude_c_max: f64,
}

impl Default for VerifyTolerances {
    fn default() -> Self {
        VerifyTolerances {
            roots_closed_form: 1e-10,
            diag_residual: 1e-9,
            diag_inverse: 1e-10,
            det_floor: 1e-6,
            rep_l2: 1e-6,
            picard_slack: 1.05,
            sprime_rel: 1e-5,
            diag_residue: 1e-10,
            hamiltonian_drift: 1e-6,
            cross_solver_l2: 1e-6,
            contraction_max: 1.0,
            scaling_band: 0.2,
            ratio_band: 0.3,
            uniqueness_factor: 10.0,
            decay_min: 2.0,
            amplitude_c_max: 1e3,
        }
    }
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            family: "scalar_kirchhoff".into(),
            delta: 0.5,
            a1: 1.0,
            a2: 4.0,
            p1: 0.0,
            p2: 0.0,
            wave_speed: 1.0,
            table_path: None,
            s_diag: vec![],
            radial_exponent: 0,
            data_family: "gaussian".into(),
            amplitude: 0.02,
            components: None,
            sigma: 1.0,
            powers: vec![],
            shell_r0: 0.5,
            shell_r1: 1.5,
            bump_center: 3.0,
            bump_halfwidth: 2.0,
            dim: 1,
            rho_max: 8.0,
            n_rho: 64,
            sphere_res: (64, 32),
            horizon: 1.0,
            dt: 1e-3,
            two_sided: false,
            mode: SolveMode::Both,
            linear_method: LinearMethod::ModeRk4,
            fp_tol: 1e-10,
            max_iters: 200,
            amplitude_method: "rk4".into(),
            picard_terms: PICARD_TERMS,
            picard_tol: PICARD_TOL,
            tau_max: 200.0,
            n_tau: 4001,
            norms_n_rho: 2048,
            compute_weighted: false,
            weighted_sigma: 1.0,
            weighted_kappa: 1.5,
            weighted_box: 12.0,
            weighted_resolution: 1024,
            gate_threshold: 1e-2,
            gate_enforce: true,
            det_floor: 1e-6,
            align_min: 0.5,
            ds_step_rel: 1e-5,
            reality_tol: 1e-9,
            gap_rel: 1e-8,
            cfl_warn: 1.0,
            k_bound: 0.1,
            diagnostics_max_steps: 4000,
            verify: VerifyTolerances::default(),
            out_dir: "out".into(),
            fields_times: vec![],
        }
    }
}

fn parse_f64(key: &str, v: &str) -> CResult<f64> {
    v.parse()
        .map_err(|_| cerr(key, format!("expected a number, got `{v}`")))
}

fn parse_usize(key: &str, v: &str) -> CResult<usize> {
    v.parse()
        .map_err(|_| cerr(key, format!("expected a non-negative integer, got `{v}`")))
}

fn parse_bool(key: &str, v: &str) -> CResult<bool> {
    match v {
        "true" | "1" | "yes" => Ok(true),
        "false" | "0" | "no" => Ok(false),
        _ => Err(cerr(key, format!("expected true/false, got `{v}`"))),
    }
}

fn parse_f64_list(key: &str, v: &str) -> CResult<Vec<f64>> {
    v.split(',').map(|s| parse_f64(key, s.trim())).collect()
}

fn parse_u32_list(key: &str, v: &str) -> CResult<Vec<u32>> {
    v.split(',')
        .map(|s| {
            s.trim()
                .parse()
                .map_err(|_| cerr(key, format!("expected integers, got `{v}`")))
        })
        .collect()
}

impl RunConfig {
    /// Parse a config file (flat `section.key = value` lines).
    pub fn from_file(path: &Path) -> CResult<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| cerr("config", format!("cannot read {}: {e}", path.display())))?;
        let mut cfg = RunConfig::default();
        cfg.apply_text(&text)?;
        Ok(cfg)
    }

    pub fn apply_text(&mut self, text: &str) -> CResult<()> {
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(cerr(
                    "config",
                    format!("line {}: expected `key = value`, got `{line}`", lineno + 1),
                ));
            };
            self.set(key.trim(), value.trim())?;
        }
        Ok(())
    }

    /// Apply one `section.key=value` override.
    pub fn set(&mut self, key: &str, v: &str) -> CResult<()> {
        match key {
            "problem.family" => {
                let known = [
                    "scalar_kirchhoff",
                    "coupled",
                    "l2_kirchhoff",
                    "constant_wave",
                    "user",
                ];
                if !known.contains(&v) {
                    return Err(cerr(
                        "problem.family",
                        format!("unknown family `{v}` (known: {})", known.join(", ")),
                    ));
                }
                self.family = v.into();
            }
            "problem.delta" => self.delta = parse_f64(key, v)?,
            "problem.a1" => self.a1 = parse_f64(key, v)?,
            "problem.a2" => self.a2 = parse_f64(key, v)?,
            "problem.p1" => self.p1 = parse_f64(key, v)?,
            "problem.p2" => self.p2 = parse_f64(key, v)?,
            "problem.c" => self.wave_speed = parse_f64(key, v)?,
            "problem.table" => self.table_path = Some(v.into()),
            "problem.s_diag" => self.s_diag = parse_f64_list(key, v)?,
            "problem.radial_exponent" => self.radial_exponent = parse_usize(key, v)?,
            "data.family" => {
                let known = ["gaussian", "gaussian_rho", "shell", "bump", "zero"];
                if !known.contains(&v) {
                    return Err(cerr(
                        "data.family",
                        format!("unknown data family `{v}` (known: {})", known.join(", ")),
                    ));
                }
                self.data_family = v.into();
            }
            "data.amplitude" => self.amplitude = parse_f64(key, v)?,
            "data.components" => self.components = Some(parse_f64_list(key, v)?),
            "data.sigma" => self.sigma = parse_f64(key, v)?,
            "data.powers" => self.powers = parse_u32_list(key, v)?,
            "data.r0" => self.shell_r0 = parse_f64(key, v)?,
            "data.r1" => self.shell_r1 = parse_f64(key, v)?,
            "data.center" => self.bump_center = parse_f64(key, v)?,
            "data.halfwidth" => self.bump_halfwidth = parse_f64(key, v)?,
            "grid.dim" => self.dim = parse_usize(key, v)?,
            "grid.rho_max" => self.rho_max = parse_f64(key, v)?,
            "grid.n_rho" => self.n_rho = parse_usize(key, v)?,
            "grid.sphere_res" => {
                if let Some((a, b)) = v.split_once('x') {
                    self.sphere_res = (parse_usize(key, a.trim())?, parse_usize(key, b.trim())?);
                } else {
                    let n = parse_usize(key, v)?;
                    self.sphere_res = (n, n);
                }
            }
            "time.horizon" => self.horizon = parse_f64(key, v)?,
            "time.dt" => self.dt = parse_f64(key, v)?,
            "time.two_sided" => self.two_sided = parse_bool(key, v)?,
            "solver.mode" => {
                self.mode = match v {
                    "direct" => SolveMode::Direct,
                    "fixed_point" => SolveMode::FixedPoint,
                    "both" => SolveMode::Both,
                    _ => {
                        return Err(cerr(
                            "solver.mode",
                            format!("expected direct|fixed_point|both, got `{v}`"),
                        ))
                    }
                }
            }
            "solver.linear_method" => {
                self.linear_method = match v {
                    "rk4" => LinearMethod::ModeRk4,
                    "representation" => LinearMethod::Representation,
                    _ => {
                        return Err(cerr(
                            "solver.linear_method",
                            format!("expected rk4|representation, got `{v}`"),
                        ))
                    }
                }
            }
            "solver.fp_tol" => self.fp_tol = parse_f64(key, v)?,
            "solver.max_iters" => self.max_iters = parse_usize(key, v)?,
            "solver.amplitude_method" => {
                if v != "rk4" && v != "picard" {
                    return Err(cerr(
                        "solver.amplitude_method",
                        format!("expected rk4|picard, got `{v}`"),
                    ));
                }
                self.amplitude_method = v.into();
            }
            "solver.picard_terms" => self.picard_terms = parse_usize(key, v)?,
            "solver.picard_tol" => self.picard_tol = parse_f64(key, v)?,
            "norms.tau_max" => self.tau_max = parse_f64(key, v)?,
            "norms.n_tau" => self.n_tau = parse_usize(key, v)?,
            "norms.n_rho" => self.norms_n_rho = parse_usize(key, v)?,
            "norms.compute_weighted" => self.compute_weighted = parse_bool(key, v)?,
            "norms.weighted_sigma" => self.weighted_sigma = parse_f64(key, v)?,
            "norms.weighted_kappa" => self.weighted_kappa = parse_f64(key, v)?,
            "norms.weighted_box" => self.weighted_box = parse_f64(key, v)?,
            "norms.weighted_resolution" => self.weighted_resolution = parse_usize(key, v)?,
            "gate.threshold" => self.gate_threshold = parse_f64(key, v)?,
            "gate.enforce" => self.gate_enforce = parse_bool(key, v)?,
            "tol.det_floor" => self.det_floor = parse_f64(key, v)?,
            "tol.align_min" => self.align_min = parse_f64(key, v)?,
            "tol.ds_step_rel" => self.ds_step_rel = parse_f64(key, v)?,
            "tol.reality" => self.reality_tol = parse_f64(key, v)?,
            "tol.gap_rel" => self.gap_rel = parse_f64(key, v)?,
            "tol.cfl_warn" => self.cfl_warn = parse_f64(key, v)?,
            "tol.k_bound" => self.k_bound = parse_f64(key, v)?,
            "diagnostics.max_steps" => self.diagnostics_max_steps = parse_usize(key, v)?,
            "verify.roots_closed_form" => self.verify.roots_closed_form = parse_f64(key, v)?,
            "verify.diag_residual" => self.verify.diag_residual = parse_f64(key, v)?,
            "verify.diag_inverse" => self.verify.diag_inverse = parse_f64(key, v)?,
            "verify.det_floor" => self.verify.det_floor = parse_f64(key, v)?,
            "verify.rep_l2" => self.verify.rep_l2 = parse_f64(key, v)?,
            "verify.picard_slack" => self.verify.picard_slack = parse_f64(key, v)?,
            "verify.sprime_rel" => self.verify.sprime_rel = parse_f64(key, v)?,
            "verify.diag_residue" => self.verify.diag_residue = parse_f64(key, v)?,
            "verify.hamiltonian_drift" => self.verify.hamiltonian_drift = parse_f64(key, v)?,
            "verify.cross_solver_l2" => self.verify.cross_solver_l2 = parse_f64(key, v)?,
            "verify.contraction_max" => self.verify.contraction_max = parse_f64(key, v)?,
            "verify.scaling_band" => self.verify.scaling_band = parse_f64(key, v)?,
            "verify.ratio_band" => self.verify.ratio_band = parse_f64(key, v)?,
            "verify.uniqueness_factor" => self.verify.uniqueness_factor = parse_f64(key, v)?,
            "verify.decay_min" => self.verify.decay_min = parse_f64(key, v)?,
            "verify.amplitude_c_max" => self.verify.amplitude_c_max = parse_f64(key, v)?,
            "output.dir" => self.out_dir = v.into(),
            "output.fields_times" => self.fields_times = parse_f64_list(key, v)?,
            _ => return Err(cerr(key, "unknown configuration key")),
        }
        Ok(())
    }

    pub fn build_grid(&self) -> CResult<FrequencyGrid> {
        let res = SphereRes::for_dim(self.dim, self.sphere_res.0, self.sphere_res.1)
            .map_err(|e| cerr("grid.dim", e.to_string()))?;
        build_grid(self.dim, self.rho_max, self.n_rho, res).map_err(|e| cerr("grid", e.to_string()))
    }

    /// Denser radial grid used by the class-norm quadratures.
    pub fn build_norms_grid(&self) -> CResult<FrequencyGrid> {
        let res = SphereRes::for_dim(self.dim, self.sphere_res.0, self.sphere_res.1)
            .map_err(|e| cerr("grid.dim", e.to_string()))?;
        build_grid(self.dim, self.rho_max, self.norms_n_rho, res)
            .map_err(|e| cerr("norms.n_rho", e.to_string()))
    }

    pub fn tau_grid(&self) -> TauGrid {
        TauGrid {
            tau_max: self.tau_max,
            n_tau: self.n_tau,
        }
    }

    pub fn build_data(&self, m: usize) -> CResult<DataFamily> {
        let default_components = || -> Vec<f64> {
            let mut c = vec![0.0; m];
            c[0] = 1.0;
            if m == 4 {
                c[2] = 0.5;
            }
            c
        };
        let comps = self.components.clone().unwrap_or_else(default_components);
        if comps.len() != m {
            return Err(cerr(
                "data.components",
                format!(
                    "expected {m} components for this family, got {}",
                    comps.len()
                ),
            ));
        }
        let data = match self.data_family.as_str() {
            "gaussian" => classnorms::gaussian(&comps, self.sigma, self.amplitude),
            "gaussian_rho" => {
                let powers = if self.powers.is_empty() {
                    vec![0; m]
                } else {
                    self.powers.clone()
                };
                if powers.len() != m {
                    return Err(cerr(
                        "data.powers",
                        format!("expected {m} powers, got {}", powers.len()),
                    ));
                }
                classnorms::gaussian_rho(&comps, &powers, self.sigma, self.amplitude)
            }
            "shell" => {
                classnorms::indicator_shell(&comps, self.shell_r0, self.shell_r1, self.amplitude)
            }
            "bump" => classnorms::bump(
                &comps,
                self.bump_center,
                self.bump_halfwidth,
                self.amplitude,
            ),
            "zero" => classnorms::zero_data(m),
            other => return Err(cerr("data.family", format!("unknown family `{other}`"))),
        };
        Ok(data)
    }

    /// Assemble the problem family (symbol + weight + data).
    pub fn build_problem(&self, grid: &FrequencyGrid) -> CResult<ProblemFamily> {
        let fam = match self.family.as_str() {
            "scalar_kirchhoff" => {
                let data = self.build_data(2)?;
                families::scalar_kirchhoff(self.dim, self.delta, data)
                    .map_err(|e| cerr("problem.family", e.to_string()))?
            }
            "coupled" => {
                let data = self.build_data(4)?;
                families::coupled(
                    self.dim, self.a1, self.a2, self.p1, self.p2, self.delta, grid, data,
                )
                .map_err(|e| cerr("problem.family", e.to_string()))?
            }
            "l2_kirchhoff" => {
                if self.dim < 3 {
                    return Err(cerr(
                        "problem.family",
                        "l2_kirchhoff needs grid.dim >= 3 (radial exponent 2 <= n-1)",
                    ));
                }
                let data = self.build_data(2)?;
                families::l2_kirchhoff(self.dim, self.delta, data)
                    .map_err(|e| cerr("problem.family", e.to_string()))?
            }
            "constant_wave" => {
                let data = self.build_data(2)?;
                families::constant_wave(self.dim, self.wave_speed, data)
                    .map_err(|e| cerr("problem.family", e.to_string()))?
            }
            "user" => self.build_user_family(grid)?,
            other => return Err(cerr("problem.family", format!("unknown family `{other}`"))),
        };
        Ok(fam)
    }

    /// User-defined companion family from a coefficient table file with
    /// header `s,omega_index,h1,...,hm`.
    fn build_user_family(&self, grid: &FrequencyGrid) -> CResult<ProblemFamily> {
        let path = self
            .table_path
            .as_ref()
            .ok_or_else(|| cerr("problem.table", "user family needs a table path"))?;
        let text = std::fs::read_to_string(path)
            .map_err(|e| cerr("problem.table", format!("cannot read {path}: {e}")))?;
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header = lines
            .next()
            .ok_or_else(|| cerr("problem.table", "empty table file"))?;
        let cols: Vec<&str> = header.split(',').map(|c| c.trim()).collect();
        if cols.len() < 3 || cols[0] != "s" || cols[1] != "omega_index" {
            return Err(cerr(
                "problem.table",
                "header must be `s,omega_index,h1,...,hm`",
            ));
        }
        let m = cols.len() - 2;
        let mut rows: Vec<(f64, usize, Vec<f64>)> = Vec::new();
        for line in lines {
            let parts: Vec<&str> = line.split(',').map(|c| c.trim()).collect();
            if parts.len() != m + 2 {
                return Err(cerr(
                    "problem.table",
                    format!("row has {} columns, expected {}", parts.len(), m + 2),
                ));
            }
            let s = parse_f64("problem.table", parts[0])?;
            let q = parse_usize("problem.table", parts[1])?;
            let hs: Vec<f64> = parts[2..]
                .iter()
                .map(|p| parse_f64("problem.table", p))
                .collect::<CResult<_>>()?;
            rows.push((s, q, hs));
        }
        let mut s_samples: Vec<f64> = rows.iter().map(|r| r.0).collect();
        s_samples.sort_by(f64::total_cmp);
        s_samples.dedup();
        let nq = grid.n_sphere();
        let mut tables = vec![vec![vec![f64::NAN; nq]; s_samples.len()]; m];
        for (s, q, hs) in rows {
            if q >= nq {
                return Err(cerr(
                    "problem.table",
                    format!("omega_index {q} out of range for {nq} sphere nodes"),
                ));
            }
            let si = s_samples
                .iter()
                .position(|&x| x == s)
                .expect("s collected above");
            for (j, &h) in hs.iter().enumerate() {
                tables[j][si][q] = h;
            }
        }
        for t in &tables {
            for row in t {
                if row.iter().any(|v| v.is_nan()) {
                    return Err(cerr(
                        "problem.table",
                        "table is missing (s, omega_index) entries",
                    ));
                }
            }
        }
        let symbol = tabulated_companion_symbol(
            s_samples,
            tables,
            grid.sphere_nodes().to_vec(),
            self.dim,
            self.delta,
        )
        .map_err(|e| cerr("problem.table", e.to_string()))?;
        let s_diag = if self.s_diag.is_empty() {
            let mut d = vec![0.0; m];
            d[0] = 1.0;
            d
        } else {
            self.s_diag.clone()
        };
        if s_diag.len() != m {
            return Err(cerr(
                "problem.s_diag",
                format!("expected {m} diagonal entries, got {}", s_diag.len()),
            ));
        }
        let weight = HermitianWeight::diagonal(&s_diag, self.radial_exponent, self.dim)
            .map_err(|e| cerr("problem.radial_exponent", e.to_string()))?;
        let data = self.build_data(m)?;
        Ok(ProblemFamily {
            name: "user".into(),
            dim: self.dim,
            symbol,
            weight,
            data,
            energy: None,
        })
    }

    pub fn solver_options(&self) -> SolverOptions {
        SolverOptions {
            dt: self.dt,
            t_final: self.horizon,
            fp_tol: self.fp_tol,
            max_iters: self.max_iters,
            linear: self.linear_method,
            amplitude: if self.amplitude_method == "picard" {
                AmplitudeMethod::Picard {
                    terms: self.picard_terms,
                    tol: self.picard_tol,
                }
            } else {
                AmplitudeMethod::Rk4
            },
            diag: DiagOptions {
                det_floor: self.det_floor,
                align_min: self.align_min,
                ds_step_rel: self.ds_step_rel,
                roots: RootOptions {
                    reality_tol: self.reality_tol,
                    gap_tol_rel: self.gap_rel,
                    ds_step_rel: self.ds_step_rel,
                },
            },
            cfl_warn: self.cfl_warn,
            snapshot_times: self.fields_times.clone(),
            record_energy: false,
            final_tables: false,
        }
    }

    /// Every key/value pair in a stable order (for echoing the effective
    /// configuration into run artifacts).
    pub fn effective_entries(&self) -> BTreeMap<String, String> {
        let mut m = BTreeMap::new();
        let mut put = |k: &str, v: String| {
            m.insert(k.to_string(), v);
        };
        put("problem.family", self.family.clone());
        put("problem.delta", format!("{}", self.delta));
        put("data.family", self.data_family.clone());
        put("data.amplitude", format!("{}", self.amplitude));
        put("grid.dim", format!("{}", self.dim));
        put("grid.rho_max", format!("{}", self.rho_max));
        put("grid.n_rho", format!("{}", self.n_rho));
        put("time.horizon", format!("{}", self.horizon));
        put("time.dt", format!("{}", self.dt));
        put("gate.threshold", format!("{}", self.gate_threshold));
        m
    }

    pub fn two_sided(&self) -> bool {
        self.two_sided
    }
}

pub fn arc_grid(grid: FrequencyGrid) -> Arc<FrequencyGrid> {
    Arc::new(grid)
}
