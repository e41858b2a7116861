//! Structural-estimate verification on realized runs.
//!
//! Along a run produced with the asymptotic representation, the derivative
//! of the nonlocal functional splits as `s'(t) = 2 (I(t) + J(t))`: `I`
//! collects the oscillatory pairings coming from `∂_t Φ` (only off-diagonal
//! mode pairs contribute — the diagonal terms are pure imaginary because S
//! is Hermitian), and `J` collects the `∂_t N^{-1}` and `∂_t a^j` pieces,
//! which are integrable in time. This module reconstructs both, checks the
//! identity against finite differences of s(t), and reports the
//! total-variation bound ingredients and coefficient-class membership of
//! realized paths.

use serde::Serialize;

use crate::asymp::{coupling_matrix, AsympTables};
use crate::error::{Error, Result};
use crate::grid::FrequencyGrid;
use crate::linalg;
use crate::reduce::pairwise_sum;
use crate::solver::{realized_class_bounds, NonlocalTrajectory, SpectralField};
use crate::symbol::{HermitianWeight, SymbolModel};
use crate::C64;

/// The `s' = 2(I + J)` decomposition sampled on the full time grid.
#[derive(Debug, Clone)]
pub struct DerivativeSplit {
    pub times: Vec<f64>,
    /// Oscillatory part (off-diagonal mode pairs of the `∂_t Φ` term).
    pub i_values: Vec<f64>,
    /// Integrable part (`∂_t N^{-1}` and `∂_t a^j` terms).
    pub j_values: Vec<f64>,
    /// `2 (I + J)`.
    pub sprime_reconstructed: Vec<f64>,
    /// Central differences of the tables' s(t) (one-sided at the ends).
    /// Matches the realized nonlocal derivative when the tables' path is a
    /// converged fixed point.
    pub sprime_fd: Vec<f64>,
    /// Largest real part of the diagonal oscillatory sum (must vanish).
    pub diag_residue_max: f64,
    /// Largest measured `|φ_pq|` weight and its structural bound
    /// `‖S‖ ‖N^{-1}‖² max|φ_p|`.
    pub phi_pq_max: f64,
    pub phi_pq_bound: f64,
    /// `max_k |s'_fd - 2(I+J)|`.
    pub max_mismatch: f64,
    /// `max_k |s'|` for relative comparisons.
    pub sprime_scale: f64,
}

/// Assemble the split from the tables of an asymptotic run.
pub fn sprime_split(
    tables: &AsympTables,
    weight: &HermitianWeight,
    data: &SpectralField,
) -> Result<DerivativeSplit> {
    if !data.grid().same_shape(&tables.grid) || data.components() != tables.m {
        return Err(Error::GridMismatch);
    }
    let grid = &tables.grid;
    let m = tables.m;
    let n = grid.dim() as i32;
    let kexp = weight.radial_exponent() as i32;
    let s_mat = weight.matrix();
    let n_steps = tables.n_steps;

    let mut i_values = Vec::with_capacity(n_steps + 1);
    let mut j_values = Vec::with_capacity(n_steps + 1);
    let mut times = Vec::with_capacity(n_steps + 1);
    let mut diag_residue_max = 0.0_f64;
    let mut phi_pq_max = 0.0_f64;
    let mut phi_pq_bound = 0.0_f64;

    let mut i_terms = Vec::with_capacity(grid.node_count());
    let mut j_terms = Vec::with_capacity(grid.node_count());

    for k in 0..=n_steps {
        let kt = 2 * k;
        times.push(tables.time_at(k));
        i_terms.clear();
        j_terms.clear();
        let mut diag_terms = Vec::with_capacity(grid.node_count());

        for q in 0..grid.n_sphere() {
            let dpath = &tables.diag_paths[q];
            let d = &dpath.diags[kt];
            let roots = &dpath.roots[kt];
            let vq = grid.sphere_weights()[q];
            let sprime_in = tables.path.sprime[kt];
            // ∂_t N^{-1} = -N^{-1} (∂_t N) N^{-1}, ∂_t N = (∂_s N) s'.
            let dn = d.ds_n.as_ref().expect("path carries ds_n") * C64::new(sprime_in, 0.0);
            let dn_inv = -(&d.n_inv * &dn * &d.n_inv);
            // M = (N^{-1})^H S N^{-1} contracts the mode pairings.
            let m_mat = d.n_inv.adjoint() * s_mat * &d.n_inv;
            // phi_pq weight bound: |phi_pq| = |M[q][p] phi_p|.
            let ninv_norm = linalg::max_abs(&d.n_inv);
            let s_norm = linalg::max_abs(s_mat);
            let phi_abs_max = roots.roots.iter().fold(0.0_f64, |a, r| a.max(r.abs()));
            for p in 0..m {
                for r in 0..m {
                    phi_pq_max = phi_pq_max.max((m_mat[(r, p)] * roots.roots[p]).norm());
                }
            }
            phi_pq_bound = phi_pq_bound
                .max(s_norm * (m as f64 * ninv_norm) * (m as f64 * ninv_norm) * phi_abs_max);

            for i in 0..grid.n_rho() {
                let flat = grid.flat(q, i);
                let rho = grid.rho_nodes()[i];
                let prefac = grid.rho_weights()[i] * vq * rho.powi(n - 1 - kexp);
                let amp = &tables.amps[flat].mats[k];

                // W = Φ 𝒜 f̂ ; Û = N^{-1} W.
                let mut w = amp * data.node(flat);
                for p in 0..m {
                    w[p] *= C64::from_polar(1.0, rho * tables.phases.theta(kt, q, p));
                }
                let u = &d.n_inv * &w;

                // I-term: <S N^{-1} (i rho D_phi) W, U> decomposed over
                // mode pairs via M[q][p].
                let mut full = C64::new(0.0, 0.0);
                let mut diag = C64::new(0.0, 0.0);
                for p in 0..m {
                    let wp = C64::new(0.0, rho * roots.roots[p]) * w[p];
                    for r in 0..m {
                        let term = m_mat[(r, p)] * wp * w[r].conj();
                        full += term;
                        if r == p {
                            diag += term;
                        }
                    }
                }
                i_terms.push((full - diag).re * prefac);
                diag_terms.push(diag.re * prefac);

                // J-term: <S [(∂_t N^{-1}) W + N^{-1} Φ ∂_t 𝒜 f̂], U>.
                let j1 = &dn_inv * &w;
                let g = coupling_matrix(dpath, &tables.phases, &tables.path, kt, q, rho);
                let mut j2 = &d.n_inv * {
                    let mut damp = &g * amp * data.node(flat);
                    for p in 0..m {
                        damp[p] *= C64::from_polar(1.0, rho * tables.phases.theta(kt, q, p));
                    }
                    damp
                };
                for p in 0..m {
                    j2[p] += j1[p];
                }
                let mut acc = C64::new(0.0, 0.0);
                for r in 0..m {
                    for c in 0..m {
                        acc += s_mat[(r, c)] * j2[c] * u[r].conj();
                    }
                }
                j_terms.push(acc.re * prefac);
            }
        }
        i_values.push(pairwise_sum(&i_terms));
        j_values.push(pairwise_sum(&j_terms));
        diag_residue_max = diag_residue_max.max(pairwise_sum(&diag_terms).abs());
    }

    let sprime_reconstructed: Vec<f64> = i_values
        .iter()
        .zip(&j_values)
        .map(|(a, b)| 2.0 * (a + b))
        .collect();

    // Finite differences of the run's s(t) on the full grid.
    let s_full: Vec<f64> = (0..=n_steps).map(|k| tables.path.s[2 * k]).collect();
    let dt = tables.dt;
    let mut sprime_fd = Vec::with_capacity(n_steps + 1);
    for k in 0..=n_steps {
        let v = if k == 0 {
            (s_full[1] - s_full[0]) / dt
        } else if k == n_steps {
            (s_full[n_steps] - s_full[n_steps - 1]) / dt
        } else {
            (s_full[k + 1] - s_full[k - 1]) / (2.0 * dt)
        };
        sprime_fd.push(v);
    }

    let sprime_scale = sprime_fd.iter().fold(0.0_f64, |a, &b| a.max(b.abs()));
    // One-sided end stencils are only first order; compare on the interior.
    let max_mismatch = (1..n_steps)
        .map(|k| (sprime_fd[k] - sprime_reconstructed[k]).abs())
        .fold(0.0_f64, f64::max);

    Ok(DerivativeSplit {
        times,
        i_values,
        j_values,
        sprime_reconstructed,
        sprime_fd,
        diag_residue_max,
        phi_pq_max,
        phi_pq_bound,
        max_mismatch,
        sprime_scale,
    })
}

/// Ingredients of the total-variation bound
/// `∫|s'| dt <= M (K ‖U_0‖² + (1-cK)^{-1} |U_0|_Y)`: the realized TV, the
/// two bound ingredients, and their ratio (the empirical `M/(1-cK)`
/// surrogate). `ratio` is None for zero data.
#[derive(Debug, Clone, Serialize)]
pub struct CoreBoundReport {
    pub total_variation: f64,
    pub k_realized: f64,
    pub l2_sq: f64,
    pub y_norm: f64,
    pub k_ingredient: f64,
    pub y_ingredient: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ratio: Option<f64>,
}

pub fn core_bound_report(
    trajectory: &NonlocalTrajectory,
    k_realized: f64,
    l2_sq: f64,
    y_norm: f64,
) -> CoreBoundReport {
    let tv = trajectory.total_variation();
    let k_ingredient = k_realized * l2_sq;
    let denom = k_ingredient + y_norm;
    CoreBoundReport {
        total_variation: tv,
        k_realized,
        l2_sq,
        y_norm,
        k_ingredient,
        y_ingredient: y_norm,
        ratio: if denom > 0.0 { Some(tv / denom) } else { None },
    }
}

/// Membership of a realized coefficient path in the class
/// `{ sup_t ‖A(s(t), ·)‖ <= Λ, ∫ ‖∂_t A(s(t), ·)‖ dt <= K }`.
#[derive(Debug, Clone, Serialize)]
pub struct ClassMembershipReport {
    pub lambda_realized: f64,
    pub k_realized: f64,
    pub lambda_bound: f64,
    pub k_bound: f64,
    pub lambda_ok: bool,
    pub k_ok: bool,
}

pub fn class_membership(
    model: &SymbolModel,
    trajectory: &NonlocalTrajectory,
    grid: &FrequencyGrid,
    lambda_bound: f64,
    k_bound: f64,
) -> ClassMembershipReport {
    let (lambda_realized, k_realized) = realized_class_bounds(model, trajectory, grid);
    ClassMembershipReport {
        lambda_realized,
        k_realized,
        lambda_bound,
        k_bound,
        lambda_ok: lambda_realized <= lambda_bound,
        k_ok: k_realized <= k_bound,
    }
}
