//! Asymptotic integration of the frozen-coefficient linear system.
//!
//! For a prescribed coefficient path `t ↦ A(s(t), ω)` the per-mode ODE
//! `D_t v = A(s(t), ω) |ξ| v` is reduced by the diagonalizer `N` and the
//! Wronskian transform to amplitude equations: with `w = N v`,
//! `a = Φ^{-1} w` and `Φ = diag(e^{iρθ_p})`, the amplitudes satisfy
//!
//! ```text
//!   ∂_t a = G(t, ξ) a,   G = Φ^{-1} (∂_t N) N^{-1} Φ.
//! ```
//!
//! All stored matrices are in ∂_t form; the `D_t = -i ∂_t` convention
//! differs by a factor `-i` which is folded in once at this boundary
//! (`D_t a = C a` with `C = -i G`, so entry magnitudes and norms agree).
//! The solution is reconstructed as `v(t) = N^{-1} Φ 𝒜(t) f̂` where the
//! columns of `𝒜(0) = N(0)` seed the fundamental amplitude matrix.
//!
//! Phases are stored at unit radius and scaled by ρ (the roots are
//! positively homogeneous of order one), so the phase table is independent
//! of the radial grid.

use std::sync::Arc;

use rayon::prelude::*;

use crate::diag::{diagonalizer_path, DiagOptions, DiagonalizerPath};
use crate::error::{Error, Result};
use crate::grid::FrequencyGrid;
use crate::linalg;
use crate::reduce::cumulative_trapezoid;
use crate::solver::{NonlocalTrajectory, SpectralField};
use crate::symbol::SymbolModel;
use crate::{CMat, CVec, C64};

/// Amplitude integrator selection.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AmplitudeMethod {
    /// Classical 4-stage integration on the solver grid (default).
    Rk4,
    /// Truncated Picard series with nested trapezoid integrals; the slower
    /// series route, kept as an independent cross-check.
    Picard { terms: usize, tol: f64 },
}

impl AmplitudeMethod {
    pub fn name(&self) -> &'static str {
        match self {
            AmplitudeMethod::Rk4 => "rk4",
            AmplitudeMethod::Picard { .. } => "picard",
        }
    }
}

/// Default Picard truncation order.
pub const PICARD_TERMS: usize = 8;
/// Default Picard tail tolerance (relative to the initial amplitude norm).
pub const PICARD_TOL: f64 = 1e-10;

/// Phases `θ_p(t_k, ω_q)` at unit radius: `θ_p = ∫_0^t φ_p(s(τ), ω) dτ`
/// by the trapezoid rule. ρ-linearity is exact by construction:
/// `θ(t, ρ, ω) = ρ θ(t, 1, ω)`.
#[derive(Debug, Clone)]
pub struct PhaseTable {
    m: usize,
    n_sphere: usize,
    n_time: usize,
    theta: Vec<f64>,
}

impl PhaseTable {
    pub fn theta(&self, k: usize, q: usize, p: usize) -> f64 {
        self.theta[(k * self.n_sphere + q) * self.m + p]
    }
    /// Phase difference `θ_{p1} - θ_{p2}` at unit radius.
    pub fn theta_diff(&self, k: usize, q: usize, p1: usize, p2: usize) -> f64 {
        self.theta(k, q, p1) - self.theta(k, q, p2)
    }
    pub fn n_time(&self) -> usize {
        self.n_time
    }
    pub fn modes(&self) -> usize {
        self.m
    }
}

/// Build the phase table from per-ω diagonalizer paths (whose root
/// sequences sample `φ_p(s(t_k), ω_q)`) on a uniform grid with step `dt`.
pub fn phase_table(diag_paths: &[DiagonalizerPath], dt: f64) -> PhaseTable {
    let n_sphere = diag_paths.len();
    assert!(n_sphere > 0);
    let n_time = diag_paths[0].roots.len();
    let m = diag_paths[0].roots[0].roots.len();
    let mut theta = vec![0.0; n_time * n_sphere * m];
    for (q, path) in diag_paths.iter().enumerate() {
        for p in 0..m {
            let samples: Vec<f64> = path.roots.iter().map(|r| r.roots[p]).collect();
            let cum = cumulative_trapezoid(&samples, dt);
            for (k, &th) in cum.iter().enumerate() {
                theta[(k * n_sphere + q) * m + p] = th;
            }
        }
    }
    PhaseTable {
        m,
        n_sphere,
        n_time,
        theta,
    }
}

/// Coupling matrix in ∂_t form at table index `k`, sphere node `q`,
/// radius `rho`:
///
/// `G = Φ^{-1} (∂_t N) N^{-1} Φ`, entry `(l, c)` equals
/// `[(∂_t N) N^{-1}]_{lc} e^{iρ(θ_c - θ_l)}`, with `∂_t N = (∂_s N) s'(t_k)`.
pub fn coupling_matrix(
    path: &DiagonalizerPath,
    phases: &PhaseTable,
    traj: &NonlocalTrajectory,
    k: usize,
    q: usize,
    rho: f64,
) -> CMat {
    let d = &path.diags[k];
    let m = d.n.nrows();
    let ds_n = d
        .ds_n
        .as_ref()
        .expect("diagonalizer path carries ds_n by construction");
    let sprime = traj.sprime[k];
    let x = ds_n * &d.n_inv * C64::new(sprime, 0.0);
    let mut g = CMat::zeros(m, m);
    for l in 0..m {
        for c in 0..m {
            let phase = rho * phases.theta_diff(k, q, c, l);
            g[(l, c)] = x[(l, c)] * C64::from_polar(1.0, phase);
        }
    }
    g
}

/// Amplitude fundamental matrix along one mode, sampled on the full grid.
#[derive(Debug, Clone)]
pub struct AmplitudeHistory {
    /// `𝒜(t_k)` for k = 0..=n_steps (full grid).
    pub mats: Vec<CMat>,
    /// `∫ ‖G‖_∞ dt` over the window (table-grid trapezoid).
    pub int_c_norm: f64,
    /// Sup norms of the Picard terms (empty for RK4).
    pub term_sup_norms: Vec<f64>,
    pub method: &'static str,
}

impl AmplitudeHistory {
    /// `max_j sup_k |a^j(t_k)|_∞ / |a^j(0)|_∞` over amplitude columns.
    pub fn sup_column_ratio(&self) -> f64 {
        let m = self.mats[0].nrows();
        let col_inf = |a: &CMat, j: usize| (0..m).fold(0.0_f64, |acc, i| acc.max(a[(i, j)].norm()));
        let mut worst = 0.0_f64;
        for j in 0..m {
            let base = col_inf(&self.mats[0], j);
            if base == 0.0 {
                continue;
            }
            for a in &self.mats {
                worst = worst.max(col_inf(a, j) / base);
            }
        }
        worst
    }
}

/// Integrate the amplitude system `∂_t 𝒜 = G(t) 𝒜`, `𝒜(0) = a0`, where
/// `g_at(j)` supplies G at table index j (table spacing = dt/2, so full
/// step k uses indices 2k, 2k+1, 2k+2).
pub fn integrate_amplitudes(
    g_at: &dyn Fn(usize) -> CMat,
    a0: &CMat,
    dt: f64,
    n_steps: usize,
    method: AmplitudeMethod,
) -> Result<AmplitudeHistory> {
    let n_table = 2 * n_steps + 1;

    match method {
        AmplitudeMethod::Rk4 => {
            let mut norms = Vec::with_capacity(n_table);
            let mut mats = Vec::with_capacity(n_steps + 1);
            let mut a = a0.clone();
            mats.push(a.clone());
            let mut g_left = g_at(0);
            norms.push(linalg::inf_norm(&g_left));
            for k in 0..n_steps {
                let g_mid = g_at(2 * k + 1);
                let g_right = g_at(2 * k + 2);
                norms.push(linalg::inf_norm(&g_mid));
                norms.push(linalg::inf_norm(&g_right));
                let k1 = &g_left * &a;
                let k2 = &g_mid * &(&a + &k1 * C64::new(dt / 2.0, 0.0));
                let k3 = &g_mid * &(&a + &k2 * C64::new(dt / 2.0, 0.0));
                let k4 = &g_right * &(&a + &k3 * C64::new(dt, 0.0));
                a += (k1 + k2 * C64::new(2.0, 0.0) + k3 * C64::new(2.0, 0.0) + k4)
                    * C64::new(dt / 6.0, 0.0);
                mats.push(a.clone());
                g_left = g_right;
            }
            let int_c_norm = crate::reduce::trapezoid(&norms, dt / 2.0);
            Ok(AmplitudeHistory {
                mats,
                int_c_norm,
                term_sup_norms: Vec::new(),
                method: "rk4",
            })
        }
        AmplitudeMethod::Picard { terms, tol } => {
            // Work on the table grid; cache G once.
            let gs: Vec<CMat> = (0..n_table).map(g_at).collect();
            let norms: Vec<f64> = gs.iter().map(linalg::inf_norm).collect();
            let int_c_norm = crate::reduce::trapezoid(&norms, dt / 2.0);
            let half_dt = dt / 2.0;
            let a0_norm = linalg::inf_norm(a0).max(f64::MIN_POSITIVE);
            let mut partial: Vec<CMat> = (0..n_table).map(|_| a0.clone()).collect();
            let mut term: Vec<CMat> = (0..n_table).map(|_| a0.clone()).collect();
            let mut term_sup_norms = Vec::with_capacity(terms);
            let mut converged = false;
            for _ in 1..=terms {
                // next(t) = ∫_0^t G(τ) term(τ) dτ, cumulative trapezoid.
                let mut next: Vec<CMat> = Vec::with_capacity(n_table);
                let mut acc = CMat::zeros(a0.nrows(), a0.ncols());
                next.push(acc.clone());
                for j in 1..n_table {
                    let f_prev = &gs[j - 1] * &term[j - 1];
                    let f_cur = &gs[j] * &term[j];
                    acc += (f_prev + f_cur) * C64::new(half_dt / 2.0, 0.0);
                    next.push(acc.clone());
                }
                let sup = next.iter().fold(0.0_f64, |m, a| m.max(linalg::inf_norm(a)));
                term_sup_norms.push(sup);
                for (p, n) in partial.iter_mut().zip(&next) {
                    *p += n;
                }
                term = next;
                if sup <= tol * a0_norm {
                    converged = true;
                    break;
                }
            }
            if !converged {
                return Err(Error::PicardTruncation {
                    terms,
                    last_norm: *term_sup_norms.last().unwrap_or(&f64::NAN),
                    tol: tol * a0_norm,
                });
            }
            let mats: Vec<CMat> = (0..=n_steps).map(|k| partial[2 * k].clone()).collect();
            Ok(AmplitudeHistory {
                mats,
                int_c_norm,
                term_sup_norms,
                method: "picard",
            })
        }
    }
}

/// Everything the representation formula needs along one frozen path:
/// per-ω diagonalizer paths and phases on the table grid (spacing dt/2),
/// per-node amplitude histories on the full grid.
pub struct AsympTables {
    pub grid: Arc<FrequencyGrid>,
    pub m: usize,
    /// Full-grid step.
    pub dt: f64,
    pub n_steps: usize,
    /// The frozen path on the table grid (2 n_steps + 1 samples).
    pub path: NonlocalTrajectory,
    pub diag_paths: Vec<DiagonalizerPath>,
    pub phases: PhaseTable,
    /// Amplitudes per flat node (sphere-major: q * n_rho + i).
    pub amps: Vec<AmplitudeHistory>,
    pub method: &'static str,
}

impl AsympTables {
    /// Largest measured `c` with `sup_t |a^j| <= exp(c TV_N) |a^j(0)|` over
    /// all nodes, together with the largest amplitude ratio.
    pub fn amplitude_bound_constant(&self) -> (f64, f64) {
        let n_rho = self.grid.n_rho();
        let mut c_max = 0.0_f64;
        let mut ratio_max = 0.0_f64;
        for (flat, amp) in self.amps.iter().enumerate() {
            let q = flat / n_rho;
            let tv = self.diag_paths[q].total_variation;
            let ratio = amp.sup_column_ratio();
            ratio_max = ratio_max.max(ratio);
            if ratio > 1.0 && tv > 0.0 {
                c_max = c_max.max(ratio.ln() / tv);
            }
        }
        (c_max, ratio_max)
    }

    /// Time of full-grid index k.
    pub fn time_at(&self, k: usize) -> f64 {
        self.path.t0 + k as f64 * self.dt
    }
}

/// Build all tables for the frozen path `traj`, whose sample spacing
/// becomes the table grid (half the solver step); `traj` must have an odd
/// sample count.
pub fn build_tables(
    model: &SymbolModel,
    traj: &NonlocalTrajectory,
    grid: Arc<FrequencyGrid>,
    method: AmplitudeMethod,
    opts: &DiagOptions,
) -> Result<AsympTables> {
    let n_table = traj.s.len();
    if n_table < 3 || n_table.is_multiple_of(2) {
        return Err(Error::InvalidParameter {
            name: "trajectory",
            message: format!("table grid needs an odd sample count >= 3, got {n_table}"),
        });
    }
    let n_steps = (n_table - 1) / 2;
    let dt = 2.0 * traj.dt;
    let m = model.size();

    let diag_paths: Vec<DiagonalizerPath> = (0..grid.n_sphere())
        .into_par_iter()
        .map(|q| diagonalizer_path(model, &traj.s, grid.omega(q), opts))
        .collect::<Result<_>>()?;
    let phases = phase_table(&diag_paths, traj.dt);

    let amps: Vec<AmplitudeHistory> = (0..grid.node_count())
        .into_par_iter()
        .map(|flat| {
            let q = flat / grid.n_rho();
            let i = flat % grid.n_rho();
            let rho = grid.rho_nodes()[i];
            let a0 = diag_paths[q].diags[0].n.clone();
            let g_at = |j: usize| coupling_matrix(&diag_paths[q], &phases, traj, j, q, rho);
            integrate_amplitudes(&g_at, &a0, dt, n_steps, method)
        })
        .collect::<Result<_>>()?;

    Ok(AsympTables {
        grid,
        m,
        dt,
        n_steps,
        path: traj.clone(),
        diag_paths,
        phases,
        amps,
        method: method.name(),
    })
}

/// Evaluate the representation `Û(t_k, ξ) = N^{-1} Φ 𝒜(t_k) f̂(ξ)` at full
/// grid index `k` for spectral data `f̂`.
pub fn representation_field(
    tables: &AsympTables,
    data: &SpectralField,
    full_index: usize,
) -> Result<SpectralField> {
    if !data.grid().same_shape(&tables.grid) || data.components() != tables.m {
        return Err(Error::GridMismatch);
    }
    if full_index > tables.n_steps {
        return Err(Error::InvalidParameter {
            name: "full_index",
            message: format!("index {full_index} beyond horizon {}", tables.n_steps),
        });
    }
    let grid = &tables.grid;
    let m = tables.m;
    let k_table = 2 * full_index;
    let time = tables.time_at(full_index);

    let mut out = SpectralField::zeros(Arc::clone(grid), m, time);
    let n_rho = grid.n_rho();
    let values: Vec<CVec> = (0..grid.node_count())
        .into_par_iter()
        .map(|flat| {
            let q = flat / n_rho;
            let i = flat % n_rho;
            let rho = grid.rho_nodes()[i];
            let d = &tables.diag_paths[q].diags[k_table];
            let amp = &tables.amps[flat].mats[full_index];
            // w = Φ 𝒜 f̂
            let mut w = amp * data.node(flat);
            for p in 0..m {
                w[p] *= C64::from_polar(1.0, rho * tables.phases.theta(k_table, q, p));
            }
            &d.n_inv * w
        })
        .collect();
    for (flat, v) in values.into_iter().enumerate() {
        out.set_node(flat, &v);
    }
    Ok(out)
}
