//! Diagonalizer construction and differentiation.
//!
//! For a strictly hyperbolic symbol the matrix `N` of left eigenvectors
//! satisfies `N A = D N` with `D = diag(φ_1, ..., φ_m)` and a uniformly
//! bounded inverse. Rows are built from adjugate matrices: a row of
//! `adj(φ I - A)` is a left null vector of `φ I - A`, and adjugate entries
//! are polynomials in the entries of `A`, so they inherit the symbol's
//! Lipschitz regularity in s. The gauge fixes the largest-magnitude row
//! entry to +1 (real), which keeps `N` continuous wherever the root gap
//! holds and makes cross-run comparisons bit-stable.

use crate::error::{Error, Result};
use crate::linalg;
use crate::symbol::{characteristic_roots, RootOptions, RootSet, SymbolModel};
use crate::{CMat, C64};

/// Options for diagonalizer construction along paths.
#[derive(Debug, Clone, Copy)]
pub struct DiagOptions {
    /// Lower bound enforced on `|det N|`.
    pub det_floor: f64,
    /// Minimal row alignment correlation along a path before the branch is
    /// declared discontinuous.
    pub align_min: f64,
    /// Central-difference step for `∂_s N`, relative to the symbol's delta.
    pub ds_step_rel: f64,
    /// Root extraction tolerances.
    pub roots: RootOptions,
}

impl Default for DiagOptions {
    fn default() -> Self {
        DiagOptions {
            det_floor: 1e-6,
            align_min: 0.5,
            ds_step_rel: 1e-5,
            roots: RootOptions::default(),
        }
    }
}

/// Diagonalizer at a single (s, ω): rows are left eigenvectors of `A`.
#[derive(Debug, Clone)]
pub struct Diagonalizer {
    /// Row p is the left eigenvector for the p-th sorted root.
    pub n: CMat,
    pub n_inv: CMat,
    pub det_abs: f64,
    /// Entrywise `∂_s N`, filled by path construction.
    pub ds_n: Option<CMat>,
}

/// Build the diagonalizer from the symbol value and its sorted roots.
pub fn build_diagonalizer(a: &CMat, roots: &RootSet, det_floor: f64) -> Result<Diagonalizer> {
    let m = a.nrows();
    if m == 1 {
        let one = CMat::from_element(1, 1, C64::new(1.0, 0.0));
        return Ok(Diagonalizer {
            n: one.clone(),
            n_inv: one,
            det_abs: 1.0,
            ds_n: None,
        });
    }
    let scale = linalg::max_abs(a).max(1.0).powi(m as i32 - 1);
    let mut n = CMat::zeros(m, m);
    for (p, &phi) in roots.roots.iter().enumerate() {
        let b = CMat::identity(m, m) * C64::new(phi, 0.0) - a;
        let adj = linalg::adjugate(&b);
        // Largest-norm row of the adjugate is the best-conditioned left
        // null vector of B.
        let mut best_row = 0;
        let mut best_norm = -1.0;
        for r in 0..m {
            let norm: f64 = (0..m).map(|c| adj[(r, c)].norm_sqr()).sum();
            if norm > best_norm {
                best_norm = norm;
                best_row = r;
            }
        }
        if best_norm.sqrt() <= 1e-12 * scale {
            return Err(Error::DiagonalizationFailure);
        }
        // Gauge: divide by the largest-magnitude entry (first index on ties),
        // making that entry exactly 1.
        let mut piv = 0;
        let mut piv_norm = -1.0;
        for c in 0..m {
            let norm = adj[(best_row, c)].norm();
            if norm > piv_norm {
                piv_norm = norm;
                piv = c;
            }
        }
        let pivot = adj[(best_row, piv)];
        for c in 0..m {
            n[(p, c)] = adj[(best_row, c)] / pivot;
        }
    }
    let det_abs = n.clone().determinant().norm();
    if det_abs < det_floor {
        return Err(Error::DegenerateDiagonalizer {
            det: det_abs,
            floor: det_floor,
        });
    }
    let n_inv = n
        .clone()
        .try_inverse()
        .ok_or(Error::DegenerateDiagonalizer {
            det: det_abs,
            floor: det_floor,
        })?;
    Ok(Diagonalizer {
        n,
        n_inv,
        det_abs,
        ds_n: None,
    })
}

/// `‖N A - D N‖_max` residual of the diagonalization property.
pub fn diag_residual(a: &CMat, roots: &RootSet, d: &Diagonalizer) -> f64 {
    let m = a.nrows();
    let mut dn = d.n.clone();
    for p in 0..m {
        for c in 0..m {
            dn[(p, c)] *= C64::new(roots.roots[p], 0.0);
        }
    }
    linalg::max_abs(&(&d.n * a - dn))
}

/// `‖N N^{-1} - I‖_max`.
pub fn inverse_residual(d: &Diagonalizer) -> f64 {
    let m = d.n.nrows();
    linalg::max_abs(&(&d.n * &d.n_inv - CMat::identity(m, m)))
}

/// Phase-align rows of `target` against `reference`, maximizing the real
/// part of each row inner product. Returns the smallest correlation
/// `|<t_p, r_p>| / (|t_p| |r_p|)` over rows.
fn align_rows(target: &mut CMat, reference: &CMat) -> f64 {
    let (m, cols) = target.shape();
    let mut min_corr = f64::INFINITY;
    for p in 0..m {
        let mut dot = C64::new(0.0, 0.0);
        let mut nt = 0.0;
        let mut nr = 0.0;
        for c in 0..cols {
            dot += target[(p, c)] * reference[(p, c)].conj();
            nt += target[(p, c)].norm_sqr();
            nr += reference[(p, c)].norm_sqr();
        }
        let denom = (nt * nr).sqrt();
        if denom == 0.0 {
            min_corr = 0.0;
            continue;
        }
        let corr = dot.norm() / denom;
        min_corr = min_corr.min(corr);
        if dot.norm() > 0.0 {
            let phase = dot.conj() / dot.norm();
            if (phase - C64::new(1.0, 0.0)).norm() > 1e-15 {
                for c in 0..cols {
                    target[(p, c)] *= phase;
                }
            }
        }
    }
    min_corr
}

/// Diagonalizers along a coefficient path, with roots, `∂_s N`, and the
/// discrete total variation `Σ_k ‖N(t_{k+1}) - N(t_k)‖_max`.
#[derive(Debug, Clone)]
pub struct DiagonalizerPath {
    pub diags: Vec<Diagonalizer>,
    pub roots: Vec<RootSet>,
    pub total_variation: f64,
    pub min_correlation: f64,
    pub det_min: f64,
}

/// Build per-sample diagonalizers along `s_path` at a fixed ω with
/// continuity enforcement (each row phase-aligned to its predecessor) and
/// `∂_s N` by central differences in s.
pub fn diagonalizer_path(
    model: &SymbolModel,
    s_path: &[f64],
    omega: &[f64],
    opts: &DiagOptions,
) -> Result<DiagonalizerPath> {
    assert!(!s_path.is_empty());
    let h = opts.ds_step_rel * model.delta();
    let mut diags: Vec<Diagonalizer> = Vec::with_capacity(s_path.len());
    let mut roots_seq: Vec<RootSet> = Vec::with_capacity(s_path.len());
    let mut total_variation = 0.0;
    let mut min_correlation: f64 = 1.0;
    let mut det_min = f64::INFINITY;

    // Identical consecutive s values (constant paths in particular) reuse
    // the previous construction verbatim.
    let mut last_s = f64::NAN;

    for (k, &s) in s_path.iter().enumerate() {
        if s == last_s {
            let prev = diags.last().unwrap().clone();
            let prev_roots = roots_seq.last().unwrap().clone();
            diags.push(prev);
            roots_seq.push(prev_roots);
            continue;
        }
        let roots = characteristic_roots(model, s, omega, &opts.roots)?;
        let mut d = build_diagonalizer(&model.eval(s, omega), &roots, opts.det_floor)?;
        if let Some(prev) = diags.last() {
            let corr = align_rows(&mut d.n, &prev.n);
            if corr < opts.align_min {
                return Err(Error::BranchDiscontinuity {
                    index: k,
                    correlation: corr,
                    min: opts.align_min,
                });
            }
            min_correlation = min_correlation.min(corr);
            // Keep the inverse consistent with the re-phased rows.
            d.n_inv =
                d.n.clone()
                    .try_inverse()
                    .ok_or(Error::DegenerateDiagonalizer {
                        det: d.det_abs,
                        floor: opts.det_floor,
                    })?;
            total_variation += linalg::max_abs(&(&d.n - &prev.n));
        }
        // ∂_s N in s-space, gauge-aligned to the path sample.
        let rp = characteristic_roots(model, s + h, omega, &opts.roots)?;
        let rm = characteristic_roots(model, s - h, omega, &opts.roots)?;
        let mut np = build_diagonalizer(&model.eval(s + h, omega), &rp, opts.det_floor)?;
        let mut nm = build_diagonalizer(&model.eval(s - h, omega), &rm, opts.det_floor)?;
        align_rows(&mut np.n, &d.n);
        align_rows(&mut nm.n, &d.n);
        d.ds_n = Some((np.n - nm.n) / C64::new(2.0 * h, 0.0));

        det_min = det_min.min(d.det_abs);
        diags.push(d);
        roots_seq.push(roots);
        last_s = s;
    }

    Ok(DiagonalizerPath {
        diags,
        roots: roots_seq,
        total_variation,
        min_correlation,
        det_min,
    })
}
