//! Matrix symbols, characteristic roots and hyperbolicity checks.
//!
//! A [`SymbolModel`] evaluates the unit-frequency symbol `A(s, ω)` of a first
//! order system; the full symbol is `A(s, ξ) = |ξ| A(s, ξ/|ξ|)` by
//! construction (positive homogeneity of order one is structural, not
//! sampled). Built-in constructors cover the companion reduction of a scalar
//! higher-order equation and the 4×4 coupled two-equation system with closed
//! form characteristic roots.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::grid::FrequencyGrid;
use crate::linalg;
use crate::{CMat, C64};

/// Coefficient function of (s, ω) on the unit sphere.
pub type CoeffFn = Arc<dyn Fn(f64, &[f64]) -> f64 + Send + Sync>;
/// Homogeneous degree-2 polynomial evaluated at a unit vector.
pub type SphereFn = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;
type EvalFn = Arc<dyn Fn(f64, &[f64]) -> CMat + Send + Sync>;

/// Tolerances for root extraction.
#[derive(Debug, Clone, Copy)]
pub struct RootOptions {
    /// Relative tolerance on eigenvalue imaginary parts: `|Im| < reality_tol (1 + |φ|)`.
    pub reality_tol: f64,
    /// Relative gap floor: roots closer than `gap_tol_rel * max(1, |φ|_max)` collide.
    pub gap_tol_rel: f64,
    /// Central-difference step for s-derivatives, relative to delta.
    pub ds_step_rel: f64,
}

impl Default for RootOptions {
    fn default() -> Self {
        RootOptions {
            reality_tol: 1e-9,
            gap_tol_rel: 1e-8,
            ds_step_rel: 1e-5,
        }
    }
}

/// A parameter-dependent m×m matrix symbol at unit frequency.
#[derive(Clone)]
pub struct SymbolModel {
    m: usize,
    delta: f64,
    lip_bound: f64,
    eval: EvalFn,
}

impl std::fmt::Debug for SymbolModel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SymbolModel")
            .field("m", &self.m)
            .field("delta", &self.delta)
            .field("lip_bound", &self.lip_bound)
            .finish()
    }
}

impl SymbolModel {
    /// Wrap a raw evaluator. The closure must accept any `s` in a small
    /// neighbourhood of `[0, delta]` (central differences step outside).
    pub fn new(
        m: usize,
        delta: f64,
        lip_bound: f64,
        eval: impl Fn(f64, &[f64]) -> CMat + Send + Sync + 'static,
    ) -> Self {
        SymbolModel {
            m,
            delta,
            lip_bound,
            eval: Arc::new(eval),
        }
    }

    pub fn size(&self) -> usize {
        self.m
    }
    pub fn delta(&self) -> f64 {
        self.delta
    }
    /// Lipschitz constant of `s ↦ A(s, ·)` on `[0, delta]` (max-entry norm).
    pub fn lip_bound(&self) -> f64 {
        self.lip_bound
    }

    /// `A(s, ω)` at unit frequency; non-unit input vectors are renormalized.
    pub fn eval(&self, s: f64, omega: &[f64]) -> CMat {
        let norm: f64 = omega.iter().map(|x| x * x).sum::<f64>().sqrt();
        if (norm - 1.0).abs() <= 1e-12 {
            (self.eval)(s, omega)
        } else {
            let unit: Vec<f64> = omega.iter().map(|x| x / norm).collect();
            (self.eval)(s, &unit)
        }
    }

    /// Full symbol `A(s, ξ) = |ξ| A(s, ξ/|ξ|)`.
    pub fn eval_full(&self, s: f64, xi: &[f64]) -> CMat {
        let norm: f64 = xi.iter().map(|x| x * x).sum::<f64>().sqrt();
        self.eval(s, xi) * C64::new(norm, 0.0)
    }

    /// Measured Lipschitz bound of `s ↦ A(s, ·)` over sample points
    /// (max-entry norm of difference quotients). Useful for families built
    /// from closures where no analytic bound is known.
    pub fn measure_lip_bound(&self, s_samples: &[f64], grid: &FrequencyGrid) -> f64 {
        let mut best = 0.0_f64;
        for q in 0..grid.n_sphere() {
            let omega = grid.omega(q);
            for w in s_samples.windows(2) {
                let a0 = self.eval(w[0], omega);
                let a1 = self.eval(w[1], omega);
                let d = linalg::max_abs(&(a1 - a0)) / (w[1] - w[0]).abs();
                best = best.max(d);
            }
        }
        best
    }

    /// Max-entry derivative `∂_s A(s, ω)` by central differences.
    pub fn ds_matrix(&self, s: f64, omega: &[f64], step: f64) -> CMat {
        let ap = self.eval(s + step, omega);
        let am = self.eval(s - step, omega);
        (ap - am) / C64::new(2.0 * step, 0.0)
    }
}

/// Hermitian weight of the nonlocal functional `s(t) = <|ξ|^{-k} S Û, Û>`.
#[derive(Debug, Clone)]
pub struct HermitianWeight {
    matrix: CMat,
    radial_exponent: usize,
}

impl HermitianWeight {
    /// Validates `S = S^*` (within 1e-14 of the largest entry) and
    /// `0 <= k <= n-1`.
    pub fn new(matrix: CMat, radial_exponent: usize, dim: usize) -> Result<Self> {
        let herm_defect = linalg::max_abs(&(matrix.adjoint() - &matrix));
        let scale = linalg::max_abs(&matrix).max(1.0);
        if herm_defect > 1e-14 * scale {
            return Err(Error::InvalidParameter {
                name: "weight.matrix",
                message: format!("not Hermitian (defect {herm_defect:e})"),
            });
        }
        if radial_exponent + 1 > dim {
            return Err(Error::InvalidParameter {
                name: "weight.radial_exponent",
                message: format!(
                    "k = {radial_exponent} must satisfy 0 <= k <= n-1 = {}",
                    dim - 1
                ),
            });
        }
        Ok(HermitianWeight {
            matrix,
            radial_exponent,
        })
    }

    /// Real diagonal weight.
    pub fn diagonal(entries: &[f64], radial_exponent: usize, dim: usize) -> Result<Self> {
        let m = entries.len();
        let mut s = CMat::zeros(m, m);
        for (i, &e) in entries.iter().enumerate() {
            s[(i, i)] = C64::new(e, 0.0);
        }
        Self::new(s, radial_exponent, dim)
    }

    pub fn matrix(&self) -> &CMat {
        &self.matrix
    }
    pub fn radial_exponent(&self) -> usize {
        self.radial_exponent
    }
    pub fn size(&self) -> usize {
        self.matrix.nrows()
    }

    /// `<S u, u>` (real for Hermitian S; the imaginary residue is dropped).
    pub fn quad_form(&self, u: &[C64]) -> f64 {
        let m = self.size();
        debug_assert_eq!(u.len(), m);
        let mut acc = C64::new(0.0, 0.0);
        for i in 0..m {
            for j in 0..m {
                acc += self.matrix[(i, j)] * u[j] * u[i].conj();
            }
        }
        acc.re
    }
}

/// Sorted characteristic roots at one (s, ω), with s-derivatives.
#[derive(Debug, Clone)]
pub struct RootSet {
    /// Roots in ascending order.
    pub roots: Vec<f64>,
    /// Minimal pairwise separation.
    pub gap: f64,
    /// `∂_s φ_k`, same order as `roots`.
    pub ds_roots: Vec<f64>,
}

/// Eigenvalues of `A(s, ω)` sorted ascending, with derivative information.
///
/// The s-derivatives come from differentiating the characteristic polynomial:
/// `∂φ_k · Π_{r≠k}(φ_k - φ_r) = -Σ_j ∂α_{m-j} φ_k^j`, with `∂α` by central
/// differences in s.
pub fn characteristic_roots(
    model: &SymbolModel,
    s: f64,
    omega: &[f64],
    opts: &RootOptions,
) -> Result<RootSet> {
    let a = model.eval(s, omega);
    let eigs = linalg::eigenvalues(&a)?;
    let mut roots = Vec::with_capacity(eigs.len());
    for z in &eigs {
        let tol = opts.reality_tol * (1.0 + z.norm());
        if z.im.abs() >= tol {
            return Err(Error::HyperbolicityViolated { s, imag: z.im });
        }
        roots.push(z.re);
    }
    roots.sort_by(f64::total_cmp);
    let m = roots.len();
    let phi_max = roots.iter().fold(0.0_f64, |acc, r| acc.max(r.abs()));
    let mut gap = f64::INFINITY;
    for w in roots.windows(2) {
        gap = gap.min(w[1] - w[0]);
    }
    if m == 1 {
        gap = f64::INFINITY;
    }
    if gap < opts.gap_tol_rel * phi_max.max(1.0) {
        return Err(Error::GapFailure { s, gap });
    }

    // ∂_s of characteristic-polynomial coefficients by central difference.
    let h = opts.ds_step_rel * model.delta();
    let cp = linalg::char_poly_coeffs(&model.eval(s + h, omega));
    let cm = linalg::char_poly_coeffs(&model.eval(s - h, omega));
    let dalpha: Vec<C64> = cp
        .iter()
        .zip(&cm)
        .map(|(p, q)| (p - q) / C64::new(2.0 * h, 0.0))
        .collect();

    let mut ds_roots = Vec::with_capacity(m);
    for k in 0..m {
        let phi = roots[k];
        // -sum_{j=0}^{m-1} dalpha_{m-j} phi^j  (alpha_0 = 1 is constant).
        let mut num = C64::new(0.0, 0.0);
        let mut pow = C64::new(1.0, 0.0);
        for j in 0..m {
            num -= dalpha[m - j - 1] * pow;
            pow *= C64::new(phi, 0.0);
        }
        let mut denom = 1.0;
        for (r, &other) in roots.iter().enumerate() {
            if r != k {
                denom *= phi - other;
            }
        }
        ds_roots.push((num / C64::new(denom, 0.0)).re);
    }

    Ok(RootSet {
        roots,
        gap,
        ds_roots,
    })
}

/// Bound `M = max(1, max_j |α_j|^{1/j})` on the characteristic-polynomial
/// coefficients; every root satisfies `|φ| <= 2 M`.
pub fn coefficient_bound(a: &CMat) -> f64 {
    let coeffs = linalg::char_poly_coeffs(a);
    let mut m = 1.0_f64;
    for (j, c) in coeffs.iter().enumerate() {
        m = m.max(c.norm().powf(1.0 / (j as f64 + 1.0)));
    }
    m
}

/// Minimal root gap over sampled (s, ω); must stay positive for every
/// downstream construction.
pub fn hyperbolicity_gap(
    model: &SymbolModel,
    s_samples: &[f64],
    grid: &FrequencyGrid,
    opts: &RootOptions,
) -> Result<f64> {
    let mut min_gap = f64::INFINITY;
    for &s in s_samples {
        for q in 0..grid.n_sphere() {
            let rs = characteristic_roots(model, s, grid.omega(q), opts)?;
            min_gap = min_gap.min(rs.gap);
        }
    }
    Ok(min_gap)
}

/// Companion symbol of the scalar equation
/// `D_t^m u + Σ_j H_j(s, ω) |ξ|^j D_t^{m-j} u = 0`:
/// superdiagonal of ones, last row `(-H_m, ..., -H_1)`. Its characteristic
/// polynomial is `τ^m + Σ_j H_j τ^{m-j}`.
pub fn companion_symbol(h_fns: Vec<CoeffFn>, delta: f64, lip_bound: f64) -> SymbolModel {
    let m = h_fns.len();
    SymbolModel::new(m, delta, lip_bound, move |s, omega| {
        let mut a = CMat::zeros(m, m);
        for i in 0..m - 1 {
            a[(i, i + 1)] = C64::new(1.0, 0.0);
        }
        for j in 0..m {
            // Entry j of the last row is -H_{m-j}.
            a[(m - 1, j)] = C64::new(-(h_fns[m - 1 - j])(s, omega), 0.0);
        }
        a
    })
}

/// The 4×4 symbol of two wave equations coupled through second-order
/// polynomials `P_1, P_2` with propagation speeds `c_k(s)^2 = a_k (1 + s)`.
///
/// Checks, on the sphere nodes of `grid`, the two structural conditions
/// `inf {(a1-a2)^2 + 4 P1 P2} > 0` and `inf {a1^2 a2^2 - P1 P2} > 0`
/// that guarantee strict hyperbolicity.
pub fn coupled_symbol(
    a1: f64,
    a2: f64,
    p1: SphereFn,
    p2: SphereFn,
    delta: f64,
    grid: &FrequencyGrid,
) -> Result<SymbolModel> {
    if a1 <= 0.0 || a2 <= 0.0 {
        return Err(Error::InvalidParameter {
            name: "a1/a2",
            message: "propagation constants must be positive".into(),
        });
    }
    if a1 == a2 {
        return Err(Error::InvalidParameter {
            name: "a1/a2",
            message: "a1 = a2 is rejected (repeated roots in the decoupled limit)".into(),
        });
    }
    for q in 0..grid.n_sphere() {
        let omega = grid.omega(q);
        let pp = p1(omega) * p2(omega);
        let c1 = (a1 - a2) * (a1 - a2) + 4.0 * pp;
        if c1 <= 0.0 {
            return Err(Error::ConditionViolated {
                which: "(a1-a2)^2 + 4 P1 P2",
                omega_index: q,
                value: c1,
            });
        }
        let c2 = a1 * a1 * a2 * a2 - pp;
        if c2 <= 0.0 {
            return Err(Error::ConditionViolated {
                which: "a1^2 a2^2 - P1 P2",
                omega_index: q,
                value: c2,
            });
        }
    }
    // Lipschitz bound of s -> A(s, .): entries vary as a_k * s.
    let lip = a1.max(a2);
    Ok(SymbolModel::new(4, delta, lip, move |s, omega| {
        let c1sq = a1 * (1.0 + s);
        let c2sq = a2 * (1.0 + s);
        let p1v = p1(omega);
        let p2v = p2(omega);
        let i = C64::new(0.0, 1.0);
        let mut a = CMat::zeros(4, 4);
        a[(0, 1)] = -i;
        a[(1, 0)] = i * c1sq;
        a[(1, 2)] = i * p1v;
        a[(2, 3)] = -i;
        a[(3, 0)] = i * p2v;
        a[(3, 2)] = i * c2sq;
        a
    }))
}

/// Closed-form characteristic roots of the coupled symbol at unit frequency,
/// ascending: `± sqrt((c1^2 + c2^2 ± sqrt((c1^2-c2^2)^2 + 4 p1 p2)) / 2)`
/// with `c_k^2 = a_k (1 + s)`.
pub fn coupled_roots_closed_form(a1: f64, a2: f64, p1: f64, p2: f64, s: f64) -> [f64; 4] {
    let c1 = a1 * (1.0 + s);
    let c2 = a2 * (1.0 + s);
    let inner = ((c1 - c2) * (c1 - c2) + 4.0 * p1 * p2).sqrt();
    let big = ((c1 + c2 + inner) / 2.0).sqrt();
    let small = ((c1 + c2 - inner) / 2.0).sqrt();
    [-big, -small, small, big]
}

/// User-defined companion family from coefficient tables sampled on
/// `s_samples × sphere nodes`, linear in s (clamped extrapolation at the
/// ends), nearest-node in ω.
pub fn tabulated_companion_symbol(
    s_samples: Vec<f64>,
    tables: Vec<Vec<Vec<f64>>>, // tables[j][s_index][omega_index] = H_{j+1}
    sphere_nodes: Vec<[f64; 3]>,
    dim: usize,
    delta: f64,
) -> Result<SymbolModel> {
    let m = tables.len();
    if m == 0 {
        return Err(Error::InvalidParameter {
            name: "tables",
            message: "at least one coefficient function required".into(),
        });
    }
    if s_samples.len() < 2 {
        return Err(Error::InvalidParameter {
            name: "s_samples",
            message: "need at least two s samples for interpolation".into(),
        });
    }
    for w in s_samples.windows(2) {
        if w[1] <= w[0] {
            return Err(Error::InvalidParameter {
                name: "s_samples",
                message: "s samples must be strictly increasing".into(),
            });
        }
    }
    for t in &tables {
        if t.len() != s_samples.len() || t.iter().any(|row| row.len() != sphere_nodes.len()) {
            return Err(Error::ShapeMismatch {
                expected: s_samples.len() * sphere_nodes.len(),
                got: t.iter().map(|r| r.len()).sum(),
            });
        }
    }

    let samples = Arc::new(s_samples);
    let nodes = Arc::new(sphere_nodes);
    let tables = Arc::new(tables);

    // Lipschitz bound from the table differences.
    let mut lip = 0.0_f64;
    for t in tables.iter() {
        for q in 0..nodes.len() {
            for w in 0..samples.len() - 1 {
                let d = (t[w + 1][q] - t[w][q]).abs() / (samples[w + 1] - samples[w]);
                lip = lip.max(d);
            }
        }
    }

    let h_fns: Vec<CoeffFn> = (0..m)
        .map(|j| {
            let samples = Arc::clone(&samples);
            let nodes = Arc::clone(&nodes);
            let tables = Arc::clone(&tables);
            let f: CoeffFn = Arc::new(move |s: f64, omega: &[f64]| {
                // Nearest sphere node.
                let mut best = 0usize;
                let mut best_d = f64::INFINITY;
                for (q, node) in nodes.iter().enumerate() {
                    let mut d = 0.0;
                    for (c, &x) in omega.iter().enumerate().take(dim) {
                        let diff = x - node[c];
                        d += diff * diff;
                    }
                    if d < best_d {
                        best_d = d;
                        best = q;
                    }
                }
                // Linear interpolation in s with clamped-slope extrapolation.
                let t = &tables[j];
                let k = match samples.partition_point(|&v| v <= s) {
                    0 => 0,
                    p if p >= samples.len() => samples.len() - 2,
                    p => p - 1,
                };
                let (s0, s1) = (samples[k], samples[k + 1]);
                let (y0, y1) = (t[k][best], t[k + 1][best]);
                y0 + (y1 - y0) * (s - s0) / (s1 - s0)
            });
            f
        })
        .collect();

    Ok(companion_symbol(h_fns, delta, lip))
}
