//! Frequency-space discretization and quadrature primitives.
//!
//! A [`FrequencyGrid`] couples a composite Gauss–Legendre radial rule on
//! `(0, rho_max]` with a surface rule on the unit sphere: the two points of
//! `S^0` for n=1, uniformly spaced angles for n=2, and a product
//! Gauss–Legendre(polar) × uniform(azimuth) rule for n=3. Spectral integrals
//! `∫ g dξ = ∫∫ g ρ^{n-1} dρ dσ(ω)` and the oscillatory radial integrals
//! `∫ e^{iτρ} h(ρ) dρ` used by the data-class norms are evaluated here.
//!
//! All reductions run in node index order through [`crate::reduce`], so
//! values are reproducible bit for bit.

use crate::error::{Error, Result};
use crate::reduce::pairwise_sum;
use crate::C64;

/// Points per radial Gauss–Legendre panel.
pub const PANEL_POINTS: usize = 8;

/// Phase-per-gap threshold at which the oscillatory rule switches from the
/// plain Gauss path to the panel-wise Filon path.
pub const FILON_SWITCH: f64 = 0.5;

/// Angular resolution request for the sphere rule.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SphereRes {
    /// n = 1: the two points {-1, +1}; no parameters.
    Two,
    /// n = 2: number of uniformly spaced angles.
    Circle(usize),
    /// n = 3: Gauss–Legendre polar count × uniform azimuth count.
    Product { polar: usize, azimuth: usize },
}

impl SphereRes {
    /// Resolution matching the dimension from up to two integers
    /// (`a` used for n=2; `a`,`b` for n=3).
    pub fn for_dim(dim: usize, a: usize, b: usize) -> Result<Self> {
        match dim {
            1 => Ok(SphereRes::Two),
            2 => Ok(SphereRes::Circle(a)),
            3 => Ok(SphereRes::Product {
                polar: a,
                azimuth: b,
            }),
            other => Err(Error::UnsupportedDimension(other)),
        }
    }
}

/// Radial × spherical quadrature grid representing ξ-space.
#[derive(Debug, Clone)]
pub struct FrequencyGrid {
    dim: usize,
    rho_max: f64,
    rho_nodes: Vec<f64>,
    rho_weights: Vec<f64>,
    sphere_nodes: Vec<[f64; 3]>,
    sphere_weights: Vec<f64>,
    max_rho_gap: f64,
}

/// Gauss–Legendre nodes and weights on [-1, 1], computed by Newton iteration
/// on the Legendre recurrence.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        // Initial guess (Chebyshev-like).
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            // Legendre P_n(x) and derivative via recurrence.
            let mut p0 = 1.0;
            let mut p1 = x;
            for k in 2..=n {
                let pk = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = pk;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

/// Build a frequency grid.
///
/// `n_rho` is rounded up to a multiple of the panel size. For n=3,
/// `sphere_res` carries (polar, azimuth) counts.
pub fn build_grid(
    dim: usize,
    rho_max: f64,
    n_rho: usize,
    sphere_res: SphereRes,
) -> Result<FrequencyGrid> {
    if !(1..=3).contains(&dim) {
        return Err(Error::UnsupportedDimension(dim));
    }
    if rho_max <= 0.0 {
        return Err(Error::InvalidParameter {
            name: "rho_max",
            message: format!("must be positive, got {rho_max}"),
        });
    }
    if n_rho < PANEL_POINTS {
        return Err(Error::InvalidParameter {
            name: "n_rho",
            message: format!("must be at least {PANEL_POINTS}, got {n_rho}"),
        });
    }

    let panels = n_rho.div_ceil(PANEL_POINTS);
    let (gl_nodes, gl_weights) = gauss_legendre(PANEL_POINTS);
    let width = rho_max / panels as f64;
    let mut rho_nodes = Vec::with_capacity(panels * PANEL_POINTS);
    let mut rho_weights = Vec::with_capacity(panels * PANEL_POINTS);
    for p in 0..panels {
        let a = p as f64 * width;
        let half = 0.5 * width;
        let mid = a + half;
        for k in 0..PANEL_POINTS {
            rho_nodes.push(mid + half * gl_nodes[k]);
            rho_weights.push(half * gl_weights[k]);
        }
    }
    let max_rho_gap = rho_nodes
        .windows(2)
        .map(|w| w[1] - w[0])
        .fold(0.0_f64, f64::max);

    let (sphere_nodes, sphere_weights) = build_sphere(dim, sphere_res)?;

    Ok(FrequencyGrid {
        dim,
        rho_max,
        rho_nodes,
        rho_weights,
        sphere_nodes,
        sphere_weights,
        max_rho_gap,
    })
}

fn build_sphere(dim: usize, res: SphereRes) -> Result<(Vec<[f64; 3]>, Vec<f64>)> {
    match (dim, res) {
        (1, _) => Ok((vec![[-1.0, 0.0, 0.0], [1.0, 0.0, 0.0]], vec![1.0, 1.0])),
        (2, SphereRes::Circle(q)) => {
            if q < 4 {
                return Err(Error::InvalidParameter {
                    name: "sphere_res",
                    message: format!("n=2 needs at least 4 angles, got {q}"),
                });
            }
            let w = 2.0 * std::f64::consts::PI / q as f64;
            let mut nodes = Vec::with_capacity(q);
            for k in 0..q {
                let th = w * k as f64;
                nodes.push([th.cos(), th.sin(), 0.0]);
            }
            Ok((nodes, vec![w; q]))
        }
        (3, SphereRes::Product { polar, azimuth }) => {
            if polar < 2 || azimuth < 4 {
                return Err(Error::InvalidParameter {
                    name: "sphere_res",
                    message: format!(
                        "n=3 needs polar >= 2 and azimuth >= 4, got {polar}x{azimuth}"
                    ),
                });
            }
            // cos(theta) on GL nodes, uniform azimuth; weight = w_gl * (2 pi / azimuth).
            let (gl_nodes, gl_weights) = gauss_legendre(polar);
            let wphi = 2.0 * std::f64::consts::PI / azimuth as f64;
            let mut nodes = Vec::with_capacity(polar * azimuth);
            let mut weights = Vec::with_capacity(polar * azimuth);
            for p in 0..polar {
                let ct = gl_nodes[p];
                let st = (1.0 - ct * ct).sqrt();
                for a in 0..azimuth {
                    let phi = wphi * a as f64;
                    nodes.push([st * phi.cos(), st * phi.sin(), ct]);
                    weights.push(gl_weights[p] * wphi);
                }
            }
            Ok((nodes, weights))
        }
        (d, r) => Err(Error::InvalidParameter {
            name: "sphere_res",
            message: format!("resolution {r:?} does not match dimension {d}"),
        }),
    }
}

impl FrequencyGrid {
    pub fn dim(&self) -> usize {
        self.dim
    }
    pub fn rho_max(&self) -> f64 {
        self.rho_max
    }
    pub fn rho_nodes(&self) -> &[f64] {
        &self.rho_nodes
    }
    pub fn rho_weights(&self) -> &[f64] {
        &self.rho_weights
    }
    pub fn sphere_nodes(&self) -> &[[f64; 3]] {
        &self.sphere_nodes
    }
    pub fn sphere_weights(&self) -> &[f64] {
        &self.sphere_weights
    }
    pub fn n_rho(&self) -> usize {
        self.rho_nodes.len()
    }
    pub fn n_sphere(&self) -> usize {
        self.sphere_nodes.len()
    }
    /// Total node count (sphere-major layout: flat = q * n_rho + i).
    pub fn node_count(&self) -> usize {
        self.n_rho() * self.n_sphere()
    }
    pub fn flat(&self, q: usize, i: usize) -> usize {
        q * self.n_rho() + i
    }
    /// Largest spacing between consecutive radial nodes.
    pub fn max_rho_gap(&self) -> f64 {
        self.max_rho_gap
    }
    /// Unit-vector slice of dimension `dim` for sphere node q.
    pub fn omega(&self, q: usize) -> &[f64] {
        &self.sphere_nodes[q][..self.dim]
    }
    pub fn same_shape(&self, other: &FrequencyGrid) -> bool {
        self.dim == other.dim
            && self.rho_nodes.len() == other.rho_nodes.len()
            && self.sphere_nodes.len() == other.sphere_nodes.len()
            && self.rho_max == other.rho_max
    }

    /// `∫_{R^n} g dξ` for g sampled on all nodes (sphere-major layout).
    pub fn integrate_spectral(&self, g: &[f64]) -> Result<f64> {
        if g.len() != self.node_count() {
            return Err(Error::ShapeMismatch {
                expected: self.node_count(),
                got: g.len(),
            });
        }
        let n = self.dim as i32;
        let mut terms = Vec::with_capacity(g.len());
        for q in 0..self.n_sphere() {
            let vq = self.sphere_weights[q];
            for i in 0..self.n_rho() {
                let rho = self.rho_nodes[i];
                terms.push(g[self.flat(q, i)] * rho.powi(n - 1) * self.rho_weights[i] * vq);
            }
        }
        Ok(pairwise_sum(&terms))
    }

    /// Plain radial quadrature `∫_0^{rho_max} h dρ` of samples on the radial nodes.
    pub fn radial_quadrature(&self, h: &[C64]) -> Result<C64> {
        if h.len() != self.n_rho() {
            return Err(Error::ShapeMismatch {
                expected: self.n_rho(),
                got: h.len(),
            });
        }
        let re: Vec<f64> = h
            .iter()
            .zip(&self.rho_weights)
            .map(|(z, w)| z.re * w)
            .collect();
        let im: Vec<f64> = h
            .iter()
            .zip(&self.rho_weights)
            .map(|(z, w)| z.im * w)
            .collect();
        Ok(C64::new(pairwise_sum(&re), pairwise_sum(&im)))
    }

    /// Oscillatory radial integral `∫_0^{rho_max} e^{iτρ} h(ρ) dρ`.
    ///
    /// Uses the plain Gauss path while `|τ|·Δρ <= FILON_SWITCH` and a
    /// panel-wise Filon rule (polynomial panel interpolant times `e^{iτρ}`
    /// integrated exactly, so in particular exact for linear interpolants)
    /// beyond. Warns when the samples do not decay before `rho_max`.
    pub fn integrate_radial_oscillatory(&self, h: &[C64], tau: f64) -> Result<C64> {
        let path = if tau.abs() * self.max_rho_gap <= FILON_SWITCH {
            OscPath::PlainGauss
        } else {
            OscPath::Filon
        };
        self.integrate_radial_oscillatory_with(h, tau, path)
    }

    /// Oscillatory radial integral with an explicitly chosen path.
    pub fn integrate_radial_oscillatory_with(
        &self,
        h: &[C64],
        tau: f64,
        path: OscPath,
    ) -> Result<C64> {
        if h.len() != self.n_rho() {
            return Err(Error::ShapeMismatch {
                expected: self.n_rho(),
                got: h.len(),
            });
        }
        let tail = radial_tail_ratio(h);
        if tail > 1e-12 {
            log::warn!(
                "oscillatory integrand does not decay before rho_max (tail ratio {tail:.2e})"
            );
        }
        match path {
            OscPath::Auto => self.integrate_radial_oscillatory(h, tau),
            OscPath::PlainGauss => {
                let mut re = Vec::with_capacity(h.len());
                let mut im = Vec::with_capacity(h.len());
                for i in 0..h.len() {
                    let term = h[i] * C64::from_polar(self.rho_weights[i], tau * self.rho_nodes[i]);
                    re.push(term.re);
                    im.push(term.im);
                }
                Ok(C64::new(pairwise_sum(&re), pairwise_sum(&im)))
            }
            OscPath::Filon => Ok(self.filon(h, tau)),
        }
    }

    /// Panel-wise Filon rule: on each Gauss panel the samples determine the
    /// degree-(PANEL_POINTS-1) interpolant, and `p(ρ) e^{iτρ}` is integrated
    /// exactly via moment recurrences. Exact in particular for linear
    /// interpolants; spectrally accurate for smooth samples at any τ.
    fn filon(&self, h: &[C64], tau: f64) -> C64 {
        let panels = self.n_rho() / PANEL_POINTS;
        let width = self.rho_max / panels as f64;
        let vinv = monomial_map();
        let theta = tau * width;
        let moments = filon_moments(theta);

        let mut re_terms = Vec::with_capacity(panels);
        let mut im_terms = Vec::with_capacity(panels);
        for p in 0..panels {
            let base = &h[p * PANEL_POINTS..(p + 1) * PANEL_POINTS];
            // Monomial coefficients of the interpolant in panel coordinates u in [0,1].
            let mut acc = C64::new(0.0, 0.0);
            for k in 0..PANEL_POINTS {
                let mut coeff = C64::new(0.0, 0.0);
                for (i, &hi) in base.iter().enumerate() {
                    coeff += hi * vinv[k * PANEL_POINTS + i];
                }
                acc += coeff * moments[k];
            }
            let seg = acc * C64::from_polar(width, tau * p as f64 * width);
            re_terms.push(seg.re);
            im_terms.push(seg.im);
        }
        C64::new(pairwise_sum(&re_terms), pairwise_sum(&im_terms))
    }
}

/// Quadrature path selector for the oscillatory rule.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OscPath {
    Auto,
    PlainGauss,
    Filon,
}

/// Ratio `|h(last)| / max|h|`; callers size `rho_max` until this is small.
pub fn radial_tail_ratio(h: &[C64]) -> f64 {
    let peak = h.iter().fold(0.0_f64, |m, z| m.max(z.norm()));
    if peak == 0.0 {
        return 0.0;
    }
    h.last().map(|z| z.norm()).unwrap_or(0.0) / peak
}

/// Values-to-monomial-coefficients map for the Gauss nodes in panel
/// coordinates u in [0,1]: row k gives the weights producing the u^k
/// coefficient of the interpolant. Computed once.
fn monomial_map() -> &'static [f64; PANEL_POINTS * PANEL_POINTS] {
    use std::sync::OnceLock;
    static MAP: OnceLock<[f64; PANEL_POINTS * PANEL_POINTS]> = OnceLock::new();
    MAP.get_or_init(|| {
        let (nodes, _) = gauss_legendre(PANEL_POINTS);
        let u: Vec<f64> = nodes.iter().map(|x| 0.5 * (x + 1.0)).collect();
        let v = nalgebra::DMatrix::<f64>::from_fn(PANEL_POINTS, PANEL_POINTS, |i, k| {
            u[i].powi(k as i32)
        });
        let vinv = v.try_inverse().expect("Vandermonde on distinct nodes");
        let mut out = [0.0; PANEL_POINTS * PANEL_POINTS];
        for k in 0..PANEL_POINTS {
            for i in 0..PANEL_POINTS {
                out[k * PANEL_POINTS + i] = vinv[(k, i)];
            }
        }
        out
    })
}

/// Moments `M_k(θ) = ∫_0^1 u^k e^{iθu} du` for k < PANEL_POINTS.
///
/// Series for moderate phases; the integration-by-parts recurrence
/// `M_k = (e^{iθ} - k M_{k-1}) / (iθ)` is stable once `|θ|` exceeds k.
fn filon_moments(theta: f64) -> [C64; PANEL_POINTS] {
    let mut m = [C64::new(0.0, 0.0); PANEL_POINTS];
    if theta.abs() <= 8.0 {
        let it = C64::new(0.0, theta);
        for (k, mk) in m.iter_mut().enumerate() {
            let mut term = C64::new(1.0, 0.0); // (i theta)^j / j!
            let mut acc = C64::new(0.0, 0.0);
            for j in 0..48usize {
                acc += term / (j as f64 + k as f64 + 1.0);
                term = term * it / (j as f64 + 1.0);
                if term.norm() < 1e-20 {
                    break;
                }
            }
            *mk = acc;
        }
    } else {
        let it = C64::new(0.0, theta);
        let e = C64::from_polar(1.0, theta);
        m[0] = (e - 1.0) / it;
        for k in 1..PANEL_POINTS {
            m[k] = (e - m[k - 1] * k as f64) / it;
        }
    }
    m
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn grid1(rho_max: f64, n_rho: usize) -> FrequencyGrid {
        build_grid(1, rho_max, n_rho, SphereRes::Two).unwrap()
    }

    #[test]
    fn sphere_measures() {
        let g1 = grid1(10.0, 64);
        assert_eq!(g1.sphere_nodes().len(), 2);
        assert!((g1.sphere_weights().iter().sum::<f64>() - 2.0).abs() < 1e-14);

        let g2 = build_grid(2, 10.0, 64, SphereRes::Circle(128)).unwrap();
        let s2: f64 = g2.sphere_weights().iter().sum();
        assert!((s2 - 2.0 * std::f64::consts::PI).abs() < 1e-12);

        let g3 = build_grid(
            3,
            10.0,
            64,
            SphereRes::Product {
                polar: 16,
                azimuth: 32,
            },
        )
        .unwrap();
        let s3: f64 = g3.sphere_weights().iter().sum();
        assert!((s3 - 4.0 * std::f64::consts::PI).abs() < 1e-10);
        for node in g3.sphere_nodes() {
            let norm = (node[0] * node[0] + node[1] * node[1] + node[2] * node[2]).sqrt();
            assert!((norm - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn radial_nodes_increasing_and_bounded() {
        let g = grid1(10.0, 64);
        assert_eq!(g.n_rho(), 64);
        for w in g.rho_nodes().windows(2) {
            assert!(w[0] < w[1]);
        }
        assert!(g.rho_nodes()[0] > 0.0);
        assert!(*g.rho_nodes().last().unwrap() <= g.rho_max());
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(build_grid(4, 1.0, 64, SphereRes::Two).is_err());
        assert!(build_grid(1, -1.0, 64, SphereRes::Two).is_err());
        assert!(build_grid(1, 1.0, 4, SphereRes::Two).is_err());
        assert!(build_grid(2, 1.0, 64, SphereRes::Two).is_err());
    }

    #[test]
    fn spectral_zero_is_zero() {
        let g = grid1(10.0, 64);
        let zeros = vec![0.0; g.node_count()];
        assert_eq!(g.integrate_spectral(&zeros).unwrap(), 0.0);
    }

    #[test]
    fn spectral_unit_ball_volume_n3() {
        // rho_max and panel count chosen so a panel boundary sits exactly at
        // rho = 1: the indicator is then smooth on every panel.
        let g = build_grid(
            3,
            2.0,
            512,
            SphereRes::Product {
                polar: 16,
                azimuth: 32,
            },
        )
        .unwrap();
        let mut samples = vec![0.0; g.node_count()];
        for q in 0..g.n_sphere() {
            for i in 0..g.n_rho() {
                samples[g.flat(q, i)] = if g.rho_nodes()[i] <= 1.0 { 1.0 } else { 0.0 };
            }
        }
        let vol = g.integrate_spectral(&samples).unwrap();
        let exact = 4.0 * std::f64::consts::PI / 3.0;
        assert!((vol - exact).abs() < 1e-10 * exact, "vol = {vol}");
    }

    #[test]
    fn spectral_gaussian_n1() {
        let g = grid1(8.0, 128);
        let mut samples = vec![0.0; g.node_count()];
        for q in 0..g.n_sphere() {
            for i in 0..g.n_rho() {
                let rho = g.rho_nodes()[i];
                samples[g.flat(q, i)] = (-rho * rho).exp();
            }
        }
        let v = g.integrate_spectral(&samples).unwrap();
        assert!((v - std::f64::consts::PI.sqrt()).abs() < 1e-8);
    }

    #[test]
    fn oscillatory_constant_on_unit_interval() {
        let g = grid1(1.0, 64);
        let h = vec![C64::new(1.0, 0.0); g.n_rho()];
        let v = g.integrate_radial_oscillatory(&h, 2.0).unwrap();
        let exact = (C64::from_polar(1.0, 2.0) - 1.0) / C64::new(0.0, 2.0);
        assert!((v - exact).norm() < 1e-8);
        // The Filon path is exact for linear integrands as well (up to the
        // conditioning of the panel interpolation).
        let vf = g
            .integrate_radial_oscillatory_with(&h, 2.0, OscPath::Filon)
            .unwrap();
        assert!((vf - exact).norm() < 1e-10);
    }

    #[test]
    fn oscillatory_tau_zero_matches_radial_quadrature() {
        let g = grid1(8.0, 128);
        let h: Vec<C64> = g
            .rho_nodes()
            .iter()
            .map(|&r| C64::new(r * (-r * r).exp(), 0.0))
            .collect();
        let v = g.integrate_radial_oscillatory(&h, 0.0).unwrap();
        assert!((v.re - 0.5).abs() < 1e-8);
        assert!(v.im.abs() < 1e-14);
        let plain = g.radial_quadrature(&h).unwrap();
        assert!((v - plain).norm() <= 1e-12 * plain.norm());
    }

    #[test]
    fn oscillatory_high_tau_matches_oversampled_trapezoid() {
        let tau = 50.0;
        let g = grid1(8.0, 640);
        assert!(
            tau * g.max_rho_gap() > FILON_SWITCH,
            "test must hit the Filon path"
        );
        let h: Vec<C64> = g
            .rho_nodes()
            .iter()
            .map(|&r| C64::new((-r * r).exp(), 0.0))
            .collect();
        let v = g.integrate_radial_oscillatory(&h, tau).unwrap();
        // 10x-oversampled trapezoid oracle, Richardson-extrapolated once to
        // remove the O(dr^2 tau) endpoint term of the plain trapezoid.
        let trap = |n_over: usize| {
            let dr = 8.0 / n_over as f64;
            let mut acc = C64::new(0.0, 0.0);
            for k in 0..=n_over {
                let r = k as f64 * dr;
                let f = C64::from_polar((-r * r).exp(), tau * r);
                let w = if k == 0 || k == n_over { 0.5 } else { 1.0 };
                acc += f * w;
            }
            acc * dr
        };
        let oracle = (trap(12800) * 4.0 - trap(6400)) / 3.0;
        assert!(
            (v - oracle).norm() < 1e-6,
            "filon {v} vs oracle {oracle}, diff {:e}",
            (v - oracle).norm()
        );
    }

    #[test]
    fn switchover_band_agreement_on_smooth_bump() {
        // Smooth compactly supported integrand: both paths are accurate in
        // the |tau| * gap in [0.3, 0.7] band.
        let g = grid1(8.0, 256);
        let bump = |r: f64| {
            let u: f64 = (r - 4.0) / 2.5;
            if u.abs() < 1.0 {
                (1.0 - 1.0 / (1.0 - u * u)).exp()
            } else {
                0.0
            }
        };
        let h: Vec<C64> = g
            .rho_nodes()
            .iter()
            .map(|&r| C64::new(bump(r), 0.0))
            .collect();
        for frac in [0.3, 0.5, 0.7] {
            let tau = frac / g.max_rho_gap();
            let a = g
                .integrate_radial_oscillatory_with(&h, tau, OscPath::PlainGauss)
                .unwrap();
            let b = g
                .integrate_radial_oscillatory_with(&h, tau, OscPath::Filon)
                .unwrap();
            assert!(
                (a - b).norm() <= 1e-6 * a.norm(),
                "band disagreement at tau*gap = {frac}: {:e}",
                (a - b).norm() / a.norm()
            );
        }
    }

    proptest! {
        #[test]
        fn integrate_spectral_is_linear(alpha in -3.0f64..3.0, beta in -3.0f64..3.0, seed in 0u64..1000) {
            let g = grid1(4.0, 16);
            let n = g.node_count();
            let f: Vec<f64> = (0..n).map(|i| ((i as f64 + seed as f64) * 0.7).sin()).collect();
            let h: Vec<f64> = (0..n).map(|i| ((i as f64) * 1.3 + 0.2).cos()).collect();
            let combo: Vec<f64> = (0..n).map(|i| alpha * f[i] + beta * h[i]).collect();
            let lhs = g.integrate_spectral(&combo).unwrap();
            let rhs = alpha * g.integrate_spectral(&f).unwrap() + beta * g.integrate_spectral(&h).unwrap();
            let scale = lhs.abs().max(rhs.abs()).max(1.0);
            prop_assert!((lhs - rhs).abs() <= 1e-13 * scale);
        }
    }
}
