//! Nonlinear Kirchhoff solves: direct method-of-lines and the fixed-point
//! iteration on nonlocal trajectories.
//!
//! The direct route integrates the full coupled spectral state with RK4,
//! re-evaluating the nonlocal functional `s = <|ξ|^{-k} S Û, Û>` from every
//! stage state. The fixed-point route realizes the map
//! `Θ : s(·) ↦ s_out(·)` — freeze the coefficient path `A(s_in(t), ·)`,
//! solve the now-linear system per mode, read off the output functional —
//! and iterates it from a constant seed until the trajectory converges in
//! sup norm. Both routes must agree on gate-passing data; that agreement is
//! the computational content of the well-posedness statement.

use std::sync::Arc;

use rayon::prelude::*;

use crate::asymp::{self, AmplitudeMethod, AsympTables};
use crate::diag::DiagOptions;
use crate::error::{Error, Result};
use crate::families::ProblemFamily;
use crate::grid::FrequencyGrid;
use crate::linalg;
use crate::reduce::{pairwise_sum, trapezoid};
use crate::symbol::{HermitianWeight, SymbolModel};
use crate::{CVec, C64};

/// m-component spectral state sampled on a frequency grid
/// (node-major layout: `values[flat * m + c]`).
#[derive(Debug, Clone)]
pub struct SpectralField {
    grid: Arc<FrequencyGrid>,
    m: usize,
    time: f64,
    values: Vec<C64>,
}

impl SpectralField {
    pub fn zeros(grid: Arc<FrequencyGrid>, m: usize, time: f64) -> Self {
        let n = grid.node_count() * m;
        SpectralField {
            grid,
            m,
            time,
            values: vec![C64::new(0.0, 0.0); n],
        }
    }

    pub fn from_values(
        grid: Arc<FrequencyGrid>,
        m: usize,
        time: f64,
        values: Vec<C64>,
    ) -> Result<Self> {
        if values.len() != grid.node_count() * m {
            return Err(Error::ShapeMismatch {
                expected: grid.node_count() * m,
                got: values.len(),
            });
        }
        Ok(SpectralField {
            grid,
            m,
            time,
            values,
        })
    }

    pub fn grid(&self) -> &Arc<FrequencyGrid> {
        &self.grid
    }
    pub fn components(&self) -> usize {
        self.m
    }
    pub fn time(&self) -> f64 {
        self.time
    }
    pub fn set_time(&mut self, t: f64) {
        self.time = t;
    }
    pub fn values(&self) -> &[C64] {
        &self.values
    }

    pub fn node(&self, flat: usize) -> CVec {
        CVec::from_column_slice(&self.values[flat * self.m..(flat + 1) * self.m])
    }

    pub fn set_node(&mut self, flat: usize, v: &CVec) {
        for c in 0..self.m {
            self.values[flat * self.m + c] = v[c];
        }
    }

    pub fn entry(&self, flat: usize, c: usize) -> C64 {
        self.values[flat * self.m + c]
    }

    pub fn scaled(&self, lambda: f64) -> Self {
        let mut out = self.clone();
        for v in &mut out.values {
            *v *= lambda;
        }
        out
    }

    /// `‖Û‖²_{L²} = ∫ Σ_c |Û_c|² dξ` (Plancherel with symmetric
    /// normalization).
    pub fn l2_norm_sq(&self) -> Result<f64> {
        let g: Vec<f64> = (0..self.grid.node_count())
            .map(|flat| {
                (0..self.m)
                    .map(|c| self.values[flat * self.m + c].norm_sqr())
                    .sum()
            })
            .collect();
        self.grid.integrate_spectral(&g)
    }

    /// Relative L² distance to another field on the same grid.
    pub fn rel_l2_distance(&self, other: &SpectralField) -> Result<f64> {
        if !self.grid.same_shape(&other.grid) || self.m != other.m {
            return Err(Error::GridMismatch);
        }
        let diff: Vec<f64> = (0..self.grid.node_count())
            .map(|flat| {
                (0..self.m)
                    .map(|c| {
                        (self.values[flat * self.m + c] - other.values[flat * self.m + c])
                            .norm_sqr()
                    })
                    .sum()
            })
            .collect();
        let num = self.grid.integrate_spectral(&diff)?.sqrt();
        let den = self.l2_norm_sq()?.sqrt();
        Ok(if den > 0.0 { num / den } else { num })
    }

    /// Nonlocal functional `<|ξ|^{-k} S Û, Û>` with the weight's radial
    /// exponent; deterministic node-order reduction.
    pub fn weighted_quad_form(&self, w: &HermitianWeight) -> f64 {
        let grid = &self.grid;
        let n = grid.dim() as i32;
        let kexp = w.radial_exponent() as i32;
        let mut terms = Vec::with_capacity(grid.node_count());
        for q in 0..grid.n_sphere() {
            let vq = grid.sphere_weights()[q];
            for i in 0..grid.n_rho() {
                let flat = grid.flat(q, i);
                let rho = grid.rho_nodes()[i];
                let local = w.quad_form(&self.values[flat * self.m..(flat + 1) * self.m]);
                terms.push(local * rho.powi(n - 1 - kexp) * grid.rho_weights()[i] * vq);
            }
        }
        pairwise_sum(&terms)
    }
}

/// Time samples of the nonlocal functional and its derivative on a uniform
/// grid.
#[derive(Debug, Clone)]
pub struct NonlocalTrajectory {
    pub t0: f64,
    pub dt: f64,
    pub s: Vec<f64>,
    pub sprime: Vec<f64>,
}

impl NonlocalTrajectory {
    pub fn constant(t0: f64, dt: f64, len: usize, value: f64) -> Self {
        NonlocalTrajectory {
            t0,
            dt,
            s: vec![value; len],
            sprime: vec![0.0; len],
        }
    }

    pub fn from_fn(
        t0: f64,
        dt: f64,
        len: usize,
        s_fn: impl Fn(f64) -> f64,
        sprime_fn: impl Fn(f64) -> f64,
    ) -> Self {
        let s = (0..len).map(|k| s_fn(t0 + k as f64 * dt)).collect();
        let sprime = (0..len).map(|k| sprime_fn(t0 + k as f64 * dt)).collect();
        NonlocalTrajectory { t0, dt, s, sprime }
    }

    pub fn len(&self) -> usize {
        self.s.len()
    }
    pub fn is_empty(&self) -> bool {
        self.s.is_empty()
    }
    pub fn time(&self, k: usize) -> f64 {
        self.t0 + k as f64 * self.dt
    }

    /// `∫ |s'| dt` by the trapezoid rule.
    pub fn total_variation(&self) -> f64 {
        let abs: Vec<f64> = self.sprime.iter().map(|x| x.abs()).collect();
        trapezoid(&abs, self.dt.abs())
    }

    /// Sup-norm distance over the common sample range.
    pub fn sup_diff(&self, other: &NonlocalTrajectory) -> f64 {
        self.s
            .iter()
            .zip(&other.s)
            .fold(0.0_f64, |acc, (a, b)| acc.max((a - b).abs()))
    }

    /// Resample onto a grid of half the spacing (linear interpolation);
    /// output has `2 len - 1` samples.
    pub fn refine_half(&self) -> Self {
        let n = self.s.len();
        let mut s = Vec::with_capacity(2 * n - 1);
        let mut sprime = Vec::with_capacity(2 * n - 1);
        for k in 0..n {
            s.push(self.s[k]);
            sprime.push(self.sprime[k]);
            if k + 1 < n {
                s.push(0.5 * (self.s[k] + self.s[k + 1]));
                sprime.push(0.5 * (self.sprime[k] + self.sprime[k + 1]));
            }
        }
        NonlocalTrajectory {
            t0: self.t0,
            dt: self.dt / 2.0,
            s,
            sprime,
        }
    }

    fn range_check(&self, delta: f64) -> Result<()> {
        for (k, &s) in self.s.iter().enumerate() {
            if !(-1e-12..=delta + 1e-12).contains(&s) {
                return Err(Error::ParameterRangeExceeded {
                    s,
                    delta,
                    t: self.time(k),
                });
            }
        }
        Ok(())
    }
}

/// Linear solve backend used inside the Θ map.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LinearMethod {
    /// Per-mode RK4 of `D_t v = A(s_in(t), ω) ρ v`.
    ModeRk4,
    /// Asymptotic representation `N^{-1} Φ 𝒜 f̂`.
    Representation,
}

/// Solver configuration.
#[derive(Debug, Clone)]
pub struct SolverOptions {
    pub dt: f64,
    pub t_final: f64,
    pub fp_tol: f64,
    pub max_iters: usize,
    pub linear: LinearMethod,
    pub amplitude: AmplitudeMethod,
    pub diag: DiagOptions,
    /// Warn when `dt * rho_max * sup|φ|` exceeds this.
    pub cfl_warn: f64,
    pub snapshot_times: Vec<f64>,
    pub record_energy: bool,
    /// Keep the asymptotic tables of the final linear solve (needed by the
    /// s'-split diagnostics).
    pub final_tables: bool,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            dt: 1e-3,
            t_final: 1.0,
            fp_tol: 1e-10,
            max_iters: 200,
            linear: LinearMethod::ModeRk4,
            amplitude: AmplitudeMethod::Rk4,
            diag: DiagOptions::default(),
            cfl_warn: 1.0,
            snapshot_times: Vec::new(),
            record_energy: false,
            final_tables: false,
        }
    }
}

/// Result of a solve: snapshots, the realized trajectory, iteration
/// history, and the realized coefficient-class parameters.
pub struct SolutionRecord {
    pub fields: Vec<SpectralField>,
    pub trajectory: NonlocalTrajectory,
    /// Per-iteration sup-norm deltas (fixed-point runs; empty for direct).
    pub convergence: Vec<f64>,
    pub iterations: usize,
    /// Realized sup-norm Λ of the coefficient path.
    pub lambda_realized: f64,
    /// Realized `∫ ‖∂_t A(s(t), ·)‖ dt`.
    pub k_realized: f64,
    /// `‖Û(t_k)‖²_{L²}` along the run.
    pub l2_series: Vec<f64>,
    pub energy: Option<Vec<f64>>,
    pub warnings: Vec<String>,
    pub tables: Option<AsympTables>,
}

fn snapshot_indices(times: &[f64], dt: f64, n_steps: usize) -> Vec<usize> {
    let mut idx: Vec<usize> = times
        .iter()
        .filter_map(|&t| {
            let k = (t / dt).round();
            if k >= 0.0 && (k as usize) <= n_steps && (t - k * dt).abs() <= dt.abs() * 1e-6 + 1e-12
            {
                Some(k as usize)
            } else {
                None
            }
        })
        .collect();
    idx.sort_unstable();
    idx.dedup();
    idx
}

/// Realized coefficient-class parameters of a path: `Λ = sup ‖A(s(t), ·)‖_max`
/// and `K = ∫ ‖∂_t[A(s(t), ·)]‖_max dt` with `∂_t A = (∂_s A) s'`.
pub fn realized_class_bounds(
    model: &SymbolModel,
    traj: &NonlocalTrajectory,
    grid: &FrequencyGrid,
) -> (f64, f64) {
    let h = 1e-5 * model.delta();
    let mut lambda = 0.0_f64;
    let mut dnorm = Vec::with_capacity(traj.len());
    for k in 0..traj.len() {
        let s = traj.s[k];
        let mut sup_a = 0.0_f64;
        let mut sup_ds = 0.0_f64;
        for q in 0..grid.n_sphere() {
            let omega = grid.omega(q);
            sup_a = sup_a.max(linalg::max_abs(&model.eval(s, omega)));
            sup_ds = sup_ds.max(linalg::max_abs(&model.ds_matrix(s, omega, h)));
        }
        lambda = lambda.max(sup_a);
        dnorm.push(sup_ds * traj.sprime[k].abs());
    }
    (lambda, trapezoid(&dnorm, traj.dt.abs()))
}

/// Flattened row-major copy of a small matrix, for tight matvec loops.
fn flatten(a: &crate::CMat) -> Vec<C64> {
    let m = a.nrows();
    let mut out = Vec::with_capacity(m * m);
    for r in 0..m {
        for c in 0..m {
            out.push(a[(r, c)]);
        }
    }
    out
}

/// Direct method-of-lines solve of the nonlinear system: RK4 over the full
/// spectral state, with the nonlocal functional re-evaluated from every
/// stage state.
pub fn direct_solve(
    problem: &ProblemFamily,
    data: &SpectralField,
    opts: &SolverOptions,
) -> Result<SolutionRecord> {
    let grid = Arc::clone(data.grid());
    let model = &problem.symbol;
    let weight = &problem.weight;
    let m = model.size();
    if data.components() != m {
        return Err(Error::GridMismatch);
    }
    let delta = model.delta();
    let dt = opts.dt;
    let n_steps = (opts.t_final / dt).round() as usize;
    let mut warnings = Vec::new();

    let n_nodes = grid.node_count();
    let n = grid.dim() as i32;
    let kexp = weight.radial_exponent() as i32;

    // Quadrature prefactors per node: w_i v_q rho^{n-1-k} for the nonlocal
    // functional, w_i v_q rho^{n-1} for plain L^2.
    let mut pref = vec![0.0; n_nodes];
    let mut pref_l2 = vec![0.0; n_nodes];
    let mut rho_of = vec![0.0; n_nodes];
    for q in 0..grid.n_sphere() {
        for i in 0..grid.n_rho() {
            let flat = grid.flat(q, i);
            let rho = grid.rho_nodes()[i];
            pref[flat] = grid.rho_weights()[i] * grid.sphere_weights()[q] * rho.powi(n - 1 - kexp);
            pref_l2[flat] = grid.rho_weights()[i] * grid.sphere_weights()[q] * rho.powi(n - 1);
            rho_of[flat] = rho;
        }
    }

    let s_of = |state: &[C64], terms: &mut Vec<f64>| -> f64 {
        terms.clear();
        for flat in 0..n_nodes {
            let local = weight.quad_form(&state[flat * m..(flat + 1) * m]);
            terms.push(local * pref[flat]);
        }
        pairwise_sum(terms)
    };

    // d/dt v = i rho A(s, omega) v, evaluated per sphere node.
    let deriv = |state: &[C64], s: f64, out: &mut [C64]| {
        for q in 0..grid.n_sphere() {
            let a = flatten(&model.eval(s, grid.omega(q)));
            for i in 0..grid.n_rho() {
                let flat = grid.flat(q, i);
                let irho = C64::new(0.0, rho_of[flat]);
                let v = &state[flat * m..(flat + 1) * m];
                for r in 0..m {
                    let mut acc = C64::new(0.0, 0.0);
                    for c in 0..m {
                        acc += a[r * m + c] * v[c];
                    }
                    out[flat * m + r] = irho * acc;
                }
            }
        }
    };

    // CFL-type advisory from the initial parameter value.
    let s0_probe = {
        let mut terms = Vec::with_capacity(n_nodes);
        s_of(data.values(), &mut terms)
    };
    let mut phi_sup = 0.0_f64;
    for q in 0..grid.n_sphere() {
        if let Ok(rs) = crate::symbol::characteristic_roots(
            model,
            s0_probe.clamp(0.0, delta),
            grid.omega(q),
            &opts.diag.roots,
        ) {
            phi_sup = phi_sup.max(rs.roots.iter().fold(0.0_f64, |a, r| a.max(r.abs())));
        }
    }
    let cfl = dt.abs() * grid.rho_max() * phi_sup;
    if cfl > opts.cfl_warn {
        let w = format!(
            "CFL advisory: dt * rho_max * sup|phi| = {cfl:.3} > {}",
            opts.cfl_warn
        );
        log::warn!("{w}");
        warnings.push(w);
    }

    let snaps = snapshot_indices(&opts.snapshot_times, dt, n_steps);
    let mut fields = Vec::with_capacity(snaps.len());

    let mut state = data.values().to_vec();
    let mut s_series = Vec::with_capacity(n_steps + 1);
    let mut sp_series = Vec::with_capacity(n_steps + 1);
    let mut l2_series = Vec::with_capacity(n_steps + 1);
    let mut energy = if opts.record_energy && problem.energy.is_some() {
        Some(Vec::with_capacity(n_steps + 1))
    } else {
        None
    };

    let mut terms = Vec::with_capacity(n_nodes);
    let mut k1 = vec![C64::new(0.0, 0.0); state.len()];
    let mut k2 = k1.clone();
    let mut k3 = k1.clone();
    let mut k4 = k1.clone();
    let mut stage = k1.clone();

    for step in 0..=n_steps {
        let t = step as f64 * dt;
        let s_now = s_of(&state, &mut terms);
        if !(-1e-12..=delta + 1e-12).contains(&s_now) {
            return Err(Error::ParameterRangeExceeded { s: s_now, delta, t });
        }
        deriv(&state, s_now, &mut k1);
        // s'(t) = 2 Re <|xi|^{-k} S v', v>.
        {
            terms.clear();
            for flat in 0..n_nodes {
                let vp = &k1[flat * m..(flat + 1) * m];
                let v = &state[flat * m..(flat + 1) * m];
                let mut acc = C64::new(0.0, 0.0);
                for r in 0..m {
                    for c in 0..m {
                        acc += weight.matrix()[(r, c)] * vp[c] * v[r].conj();
                    }
                }
                terms.push(2.0 * acc.re * pref[flat]);
            }
            sp_series.push(pairwise_sum(&terms));
        }
        s_series.push(s_now);
        {
            terms.clear();
            for flat in 0..n_nodes {
                let v = &state[flat * m..(flat + 1) * m];
                let sq: f64 = v.iter().map(|z| z.norm_sqr()).sum();
                terms.push(sq * pref_l2[flat]);
            }
            l2_series.push(pairwise_sum(&terms));
        }
        if let (Some(e), Some(f)) = (energy.as_mut(), problem.energy.as_ref()) {
            let field = SpectralField::from_values(Arc::clone(&grid), m, t, state.clone())?;
            e.push(f(&field)?);
        }
        if snaps.contains(&step) {
            fields.push(SpectralField::from_values(
                Arc::clone(&grid),
                m,
                t,
                state.clone(),
            )?);
        }
        if step == n_steps {
            break;
        }

        // Classical RK4 with stage-consistent nonlocal values.
        for (i, st) in stage.iter_mut().enumerate() {
            *st = state[i] + k1[i] * (dt / 2.0);
        }
        let s2 = s_of(&stage, &mut terms);
        deriv(&stage, s2, &mut k2);
        for (i, st) in stage.iter_mut().enumerate() {
            *st = state[i] + k2[i] * (dt / 2.0);
        }
        let s3 = s_of(&stage, &mut terms);
        deriv(&stage, s3, &mut k3);
        for (i, st) in stage.iter_mut().enumerate() {
            *st = state[i] + k3[i] * dt;
        }
        let s4 = s_of(&stage, &mut terms);
        deriv(&stage, s4, &mut k4);
        for s in [s2, s3, s4] {
            if !(-1e-12..=delta + 1e-12).contains(&s) {
                return Err(Error::ParameterRangeExceeded { s, delta, t });
            }
        }
        for i in 0..state.len() {
            state[i] += (k1[i] + k2[i] * 2.0 + k3[i] * 2.0 + k4[i]) * (dt / 6.0);
        }
    }

    let trajectory = NonlocalTrajectory {
        t0: 0.0,
        dt,
        s: s_series,
        sprime: sp_series,
    };
    let (lambda_realized, k_realized) = realized_class_bounds(model, &trajectory, &grid);

    Ok(SolutionRecord {
        fields,
        trajectory,
        convergence: Vec::new(),
        iterations: 0,
        lambda_realized,
        k_realized,
        l2_series,
        energy,
        warnings,
        tables: None,
    })
}

/// Output of one application of the Θ map.
pub struct ThetaOutput {
    pub trajectory: NonlocalTrajectory,
    pub fields: Vec<SpectralField>,
    pub l2_series: Vec<f64>,
    pub tables: Option<AsympTables>,
    /// Realized (Λ, K) of the frozen input path.
    pub lambda_in: f64,
    pub k_in: f64,
}

/// Apply `Θ : s_in ↦ s_out`: freeze the coefficient path `A(s_in(t), ·)`,
/// solve the linear system for the given data, return the output
/// functional trajectory.
pub fn theta_apply(
    problem: &ProblemFamily,
    data: &SpectralField,
    s_in: &NonlocalTrajectory,
    opts: &SolverOptions,
) -> Result<ThetaOutput> {
    let model = &problem.symbol;
    let weight = &problem.weight;
    let grid = Arc::clone(data.grid());
    let m = model.size();
    if data.components() != m {
        return Err(Error::GridMismatch);
    }
    s_in.range_check(model.delta())?;

    let n_steps = s_in.len() - 1;
    let dt = s_in.dt;
    let half = s_in.refine_half();
    let snaps = snapshot_indices(&opts.snapshot_times, dt, n_steps);

    let n = grid.dim() as i32;
    let kexp = weight.radial_exponent() as i32;

    let (s_out, sp_out, l2_out, fields, tables) = match opts.linear {
        LinearMethod::ModeRk4 => {
            // March per sphere node, all radial modes step-synchronized.
            struct OmegaOut {
                s_contrib: Vec<f64>,
                sp_contrib: Vec<f64>,
                l2_contrib: Vec<f64>,
                snap_states: Vec<Vec<C64>>,
            }
            let per_q: Vec<OmegaOut> = (0..grid.n_sphere())
                .into_par_iter()
                .map(|q| {
                    let omega = grid.omega(q);
                    let vq = grid.sphere_weights()[q];
                    let n_rho = grid.n_rho();
                    let mut v: Vec<C64> = (0..n_rho)
                        .flat_map(|i| {
                            let flat = grid.flat(q, i);
                            data.values()[flat * m..(flat + 1) * m].to_vec()
                        })
                        .collect();
                    let mut s_contrib = Vec::with_capacity(n_steps + 1);
                    let mut sp_contrib = Vec::with_capacity(n_steps + 1);
                    let mut l2_contrib = Vec::with_capacity(n_steps + 1);
                    let mut snap_states = Vec::with_capacity(snaps.len());
                    let mut terms = Vec::with_capacity(n_rho);
                    let mut sp_terms = Vec::with_capacity(n_rho);
                    let mut l2_terms = Vec::with_capacity(n_rho);
                    let mut a_left = flatten(&model.eval(half.s[0], omega));
                    let mut buf = vec![C64::new(0.0, 0.0); m];
                    let mut y2 = vec![C64::new(0.0, 0.0); m];

                    let matvec = |a: &[C64], x: &[C64], out: &mut [C64]| {
                        for r in 0..m {
                            let mut acc = C64::new(0.0, 0.0);
                            for c in 0..m {
                                acc += a[r * m + c] * x[c];
                            }
                            out[r] = acc;
                        }
                    };

                    for k in 0..=n_steps {
                        // Record contributions at t_k.
                        terms.clear();
                        sp_terms.clear();
                        l2_terms.clear();
                        for i in 0..n_rho {
                            let rho = grid.rho_nodes()[i];
                            let prefac = grid.rho_weights()[i] * vq * rho.powi(n - 1 - kexp);
                            let vi = &v[i * m..(i + 1) * m];
                            terms.push(weight.quad_form(vi) * prefac);
                            let sq: f64 = vi.iter().map(|z| z.norm_sqr()).sum();
                            l2_terms.push(sq * grid.rho_weights()[i] * vq * rho.powi(n - 1));
                            // v' = i rho A v
                            matvec(&a_left, vi, &mut buf);
                            let mut acc = C64::new(0.0, 0.0);
                            for r in 0..m {
                                for c in 0..m {
                                    acc += weight.matrix()[(r, c)]
                                        * (C64::new(0.0, rho) * buf[c])
                                        * vi[r].conj();
                                }
                            }
                            sp_terms.push(2.0 * acc.re * prefac);
                        }
                        s_contrib.push(pairwise_sum(&terms));
                        sp_contrib.push(pairwise_sum(&sp_terms));
                        l2_contrib.push(pairwise_sum(&l2_terms));
                        if snaps.contains(&k) {
                            snap_states.push(v.clone());
                        }
                        if k == n_steps {
                            break;
                        }

                        let a_mid = flatten(&model.eval(half.s[2 * k + 1], omega));
                        let a_right = flatten(&model.eval(half.s[2 * k + 2], omega));
                        for i in 0..n_rho {
                            let rho = grid.rho_nodes()[i];
                            let irho = C64::new(0.0, rho);
                            let vi: Vec<C64> = v[i * m..(i + 1) * m].to_vec();
                            let mut k1 = vec![C64::new(0.0, 0.0); m];
                            let mut k2 = vec![C64::new(0.0, 0.0); m];
                            let mut k3 = vec![C64::new(0.0, 0.0); m];
                            let mut k4 = vec![C64::new(0.0, 0.0); m];
                            matvec(&a_left, &vi, &mut k1);
                            for r in 0..m {
                                k1[r] *= irho;
                                y2[r] = vi[r] + k1[r] * (dt / 2.0);
                            }
                            matvec(&a_mid, &y2, &mut k2);
                            for r in 0..m {
                                k2[r] *= irho;
                                y2[r] = vi[r] + k2[r] * (dt / 2.0);
                            }
                            matvec(&a_mid, &y2, &mut k3);
                            for r in 0..m {
                                k3[r] *= irho;
                                y2[r] = vi[r] + k3[r] * dt;
                            }
                            matvec(&a_right, &y2, &mut k4);
                            for r in 0..m {
                                k4[r] *= irho;
                                v[i * m + r] = vi[r]
                                    + (k1[r] + k2[r] * 2.0 + k3[r] * 2.0 + k4[r]) * (dt / 6.0);
                            }
                        }
                        a_left = a_right;
                    }
                    OmegaOut {
                        s_contrib,
                        sp_contrib,
                        l2_contrib,
                        snap_states,
                    }
                })
                .collect();

            // Deterministic reduction over sphere nodes.
            let mut s_out = Vec::with_capacity(n_steps + 1);
            let mut sp_out = Vec::with_capacity(n_steps + 1);
            let mut l2_out = Vec::with_capacity(n_steps + 1);
            for k in 0..=n_steps {
                let sk: Vec<f64> = per_q.iter().map(|o| o.s_contrib[k]).collect();
                let spk: Vec<f64> = per_q.iter().map(|o| o.sp_contrib[k]).collect();
                let l2k: Vec<f64> = per_q.iter().map(|o| o.l2_contrib[k]).collect();
                s_out.push(pairwise_sum(&sk));
                sp_out.push(pairwise_sum(&spk));
                l2_out.push(pairwise_sum(&l2k));
            }
            let mut fields = Vec::with_capacity(snaps.len());
            for (si, &k) in snaps.iter().enumerate() {
                let mut field = SpectralField::zeros(Arc::clone(&grid), m, k as f64 * dt);
                for q in 0..grid.n_sphere() {
                    let state = &per_q[q].snap_states[si];
                    for i in 0..grid.n_rho() {
                        let flat = grid.flat(q, i);
                        for c in 0..m {
                            field.values[flat * m + c] = state[i * m + c];
                        }
                    }
                }
                fields.push(field);
            }
            (s_out, sp_out, l2_out, fields, None)
        }
        LinearMethod::Representation => {
            let tables =
                asymp::build_tables(model, &half, Arc::clone(&grid), opts.amplitude, &opts.diag)?;
            let mut s_out = Vec::with_capacity(n_steps + 1);
            let mut sp_out = Vec::with_capacity(n_steps + 1);
            let mut l2_out = Vec::with_capacity(n_steps + 1);
            let mut fields = Vec::with_capacity(snaps.len());
            for k in 0..=n_steps {
                let field = asymp::representation_field(&tables, data, k)?;
                s_out.push(field.weighted_quad_form(weight));
                l2_out.push(field.l2_norm_sq()?);
                // s' from v' = i rho A(s_in(t_k)) v.
                let mut terms = Vec::with_capacity(grid.node_count());
                for q in 0..grid.n_sphere() {
                    let a = model.eval(s_in.s[k], grid.omega(q));
                    let vq = grid.sphere_weights()[q];
                    for i in 0..grid.n_rho() {
                        let flat = grid.flat(q, i);
                        let rho = grid.rho_nodes()[i];
                        let prefac = grid.rho_weights()[i] * vq * rho.powi(n - 1 - kexp);
                        let vi = field.node(flat);
                        let vp = &a * &vi * C64::new(0.0, rho);
                        let mut acc = C64::new(0.0, 0.0);
                        for r in 0..m {
                            for c in 0..m {
                                acc += weight.matrix()[(r, c)] * vp[c] * vi[r].conj();
                            }
                        }
                        terms.push(2.0 * acc.re * prefac);
                    }
                }
                sp_out.push(pairwise_sum(&terms));
                if snaps.contains(&k) {
                    fields.push(field);
                }
            }
            (s_out, sp_out, l2_out, fields, Some(tables))
        }
    };

    let trajectory = NonlocalTrajectory {
        t0: s_in.t0,
        dt,
        s: s_out,
        sprime: sp_out,
    };
    let (lambda_in, k_in) = realized_class_bounds(model, s_in, &grid);

    Ok(ThetaOutput {
        trajectory,
        fields,
        l2_series: l2_out,
        tables: if opts.final_tables { tables } else { None },
        lambda_in,
        k_in,
    })
}

/// Fixed-point iteration `s_{k+1} = Θ(s_k)` from a seed trajectory
/// (default: constant at the data's initial value) until the sup-norm
/// update drops below `fp_tol`.
pub fn fixed_point_solve(
    problem: &ProblemFamily,
    data: &SpectralField,
    opts: &SolverOptions,
    seed: Option<NonlocalTrajectory>,
) -> Result<SolutionRecord> {
    let n_steps = (opts.t_final / opts.dt).round() as usize;
    let s0 = data.weighted_quad_form(&problem.weight);
    let mut current =
        seed.unwrap_or_else(|| NonlocalTrajectory::constant(0.0, opts.dt, n_steps + 1, s0));
    current.range_check(problem.symbol.delta())?;

    // Iterations before convergence skip snapshots and tables.
    let lean_opts = SolverOptions {
        snapshot_times: Vec::new(),
        final_tables: false,
        ..opts.clone()
    };

    let mut deltas = Vec::new();
    let mut converged = false;
    for _ in 0..opts.max_iters {
        let out = theta_apply(problem, data, &current, &lean_opts)?;
        let delta = out.trajectory.sup_diff(&current);
        deltas.push(delta);
        current = out.trajectory;
        current.range_check(problem.symbol.delta())?;
        if delta < opts.fp_tol {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::NoContraction {
            iters: opts.max_iters,
            last_delta: *deltas.last().unwrap_or(&f64::NAN),
        });
    }

    // Final linear solve along the converged trajectory, with artifacts.
    let final_out = theta_apply(problem, data, &current, opts)?;
    let trajectory = final_out.trajectory;
    let grid = data.grid();
    let (lambda_realized, k_realized) = realized_class_bounds(&problem.symbol, &trajectory, grid);

    Ok(SolutionRecord {
        fields: final_out.fields,
        trajectory,
        iterations: deltas.len(),
        convergence: deltas,
        lambda_realized,
        k_realized,
        l2_series: final_out.l2_series,
        energy: None,
        warnings: Vec::new(),
        tables: final_out.tables,
    })
}

/// Multi-start uniqueness probe: converge the fixed point from several
/// distinct seeds and report the largest pairwise sup-distance of the
/// limits, plus the measured Lipschitz constant of the nonlocal functional
/// across two frozen linear solves.
pub struct UniquenessReport {
    pub branch_names: Vec<&'static str>,
    pub max_pairwise: f64,
    /// Measured `C` in `|s_U(t) - s_V(t)| <= C ||U_0|| ||U(t) - V(t)||`.
    pub lipschitz_c: f64,
    pub iterations: Vec<usize>,
}

pub fn uniqueness_probe(
    problem: &ProblemFamily,
    data: &SpectralField,
    opts: &SolverOptions,
) -> Result<UniquenessReport> {
    let n_steps = (opts.t_final / opts.dt).round() as usize;
    let s0 = data.weighted_quad_form(&problem.weight);
    let delta = problem.symbol.delta();

    let constant = NonlocalTrajectory::constant(0.0, opts.dt, n_steps + 1, s0);
    let ramp_target = (s0 + 0.25 * (delta - s0)).clamp(0.0, delta);
    let ramp = NonlocalTrajectory::from_fn(
        0.0,
        opts.dt,
        n_steps + 1,
        |t| s0 + (ramp_target - s0) * t / opts.t_final,
        |_| (ramp_target - s0) / opts.t_final,
    );
    let direct = direct_solve(problem, data, opts)?.trajectory;

    let seeds: Vec<(&'static str, NonlocalTrajectory)> = vec![
        ("constant", constant.clone()),
        ("ramp", ramp.clone()),
        ("direct", direct),
    ];

    let mut limits = Vec::new();
    let mut names = Vec::new();
    let mut iterations = Vec::new();
    for (name, seed) in &seeds {
        let rec = fixed_point_solve(problem, data, opts, Some(seed.clone()))?;
        names.push(*name);
        iterations.push(rec.iterations);
        limits.push(rec.trajectory);
    }
    let mut max_pairwise = 0.0_f64;
    for i in 0..limits.len() {
        for j in i + 1..limits.len() {
            max_pairwise = max_pairwise.max(limits[i].sup_diff(&limits[j]));
        }
    }

    // Lipschitz measurement on two genuinely different frozen solves.
    let probe_opts = SolverOptions {
        snapshot_times: sample_times(opts.t_final, 5),
        final_tables: false,
        ..opts.clone()
    };
    let out_a = theta_apply(problem, data, &constant, &probe_opts)?;
    let out_b = theta_apply(problem, data, &ramp, &probe_opts)?;
    let l2_0 = data.l2_norm_sq()?.sqrt();
    let mut lipschitz_c = 0.0_f64;
    for (fa, fb) in out_a.fields.iter().zip(&out_b.fields) {
        let k = (fa.time() / opts.dt).round() as usize;
        let ds = (out_a.trajectory.s[k] - out_b.trajectory.s[k]).abs();
        let diff: Vec<f64> = (0..fa.grid.node_count())
            .map(|flat| {
                (0..fa.m)
                    .map(|c| (fa.values[flat * fa.m + c] - fb.values[flat * fb.m + c]).norm_sqr())
                    .sum()
            })
            .collect();
        let du = fa.grid.integrate_spectral(&diff)?.sqrt();
        if du > 1e-14 && l2_0 > 0.0 {
            lipschitz_c = lipschitz_c.max(ds / (l2_0 * du));
        }
    }

    Ok(UniquenessReport {
        branch_names: names,
        max_pairwise,
        lipschitz_c,
        iterations,
    })
}

fn sample_times(t_final: f64, count: usize) -> Vec<f64> {
    (1..=count)
        .map(|k| t_final * k as f64 / count as f64)
        .collect()
}

/// Deterministic smooth probe trajectories inside `[0, delta]`, used to
/// measure the contraction factor of Θ without a random source.
pub fn probe_trajectories(
    base: f64,
    delta: f64,
    t0: f64,
    dt: f64,
    len: usize,
    count: usize,
) -> Vec<NonlocalTrajectory> {
    let t_final = dt * (len - 1) as f64;
    (0..count)
        .map(|i| {
            let amp = 0.35 * base * (1.0 + i as f64 * 0.4);
            let freq = std::f64::consts::PI * (1.0 + i as f64 * 0.618_033_988_75) / t_final;
            let phase = 1.7 * i as f64;
            NonlocalTrajectory::from_fn(
                t0,
                dt,
                len,
                |t| (base + amp * (freq * t + phase).sin()).clamp(0.0, delta),
                |t| amp * freq * (freq * t + phase).cos(),
            )
        })
        .collect()
}

/// Largest measured ratio `‖Θ s_1 - Θ s_2‖_∞ / ‖s_1 - s_2‖_∞` over probe
/// trajectory pairs.
pub fn contraction_factor(
    problem: &ProblemFamily,
    data: &SpectralField,
    opts: &SolverOptions,
    pairs: usize,
) -> Result<f64> {
    let n_steps = (opts.t_final / opts.dt).round() as usize;
    let s0 = data.weighted_quad_form(&problem.weight);
    if s0 <= 0.0 {
        return Ok(0.0);
    }
    let probes = probe_trajectories(
        s0,
        problem.symbol.delta(),
        0.0,
        opts.dt,
        n_steps + 1,
        pairs + 1,
    );
    let lean = SolverOptions {
        snapshot_times: Vec::new(),
        final_tables: false,
        ..opts.clone()
    };
    let images: Vec<NonlocalTrajectory> = probes
        .iter()
        .map(|p| theta_apply(problem, data, p, &lean).map(|o| o.trajectory))
        .collect::<Result<_>>()?;
    let mut q = 0.0_f64;
    for i in 0..probes.len() {
        for j in i + 1..probes.len() {
            let denom = probes[i].sup_diff(&probes[j]);
            if denom > 1e-13 {
                q = q.max(images[i].sup_diff(&images[j]) / denom);
            }
        }
    }
    Ok(q)
}
