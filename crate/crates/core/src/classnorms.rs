//! Data-class norms and the smallness gate.
//!
//! The classes are told apart by iterated oscillatory integrals of products
//! `f̂_j conj(f̂_k)` with various radial weights:
//!
//! * `y_norm`: `Σ_{j,k} ∫ dτ ∫_{S^{n-1}} |∫_0^∞ e^{iτρ} f̂_j conj(f̂_k) ρ^n dρ| dσ`
//!   (modulus inside the sphere integral);
//! * `y_tilde_norm`: same with weight `ρ^{n-j-k}` for an (f0, f1) pair;
//! * `k_norm`: `Σ_{j,k} ∫ dτ |∫_{R^n} e^{iτ|ξ|} f̂_j conj(f̂_k) |ξ|^{3-j-k} dξ|`
//!   (sphere integral inside the modulus — implemented exactly as written);
//! * `m_norm`: `Σ_{k<=2} Σ_j sup_ω ∫ |∂_ρ^k f̂_j|² (1 + ρ^{max(n,2)}) dρ`.
//!
//! All four are quadratic in the data amplitude. The smallness gate
//! `‖U_0‖² + |U_0|_Y < threshold` is the computable stand-in for the
//! global-existence hypothesis.
//!
//! Data live as analytic spectral formulas; physical-space closed forms are
//! optional extras needed only for the weighted Sobolev norms.

use std::sync::Arc;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::grid::FrequencyGrid;
use crate::reduce::{pairwise_sum, trapezoid};
use crate::solver::SpectralField;
use crate::symbol::SphereFn;
use crate::C64;

/// Spectral component formula `(ρ, ω) ↦ f̂(ρω)`.
pub type RadialFn = Arc<dyn Fn(f64, &[f64]) -> C64 + Send + Sync>;
/// Physical-space formula `x ↦ f(x)`.
pub type PhysicalFn = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;

/// Named initial-data generator: analytic spectral formulas for each of the
/// m components, optional closed-form radial derivatives and physical forms,
/// and a global amplitude.
#[derive(Clone)]
pub struct DataFamily {
    pub name: String,
    pub m: usize,
    pub amplitude: f64,
    components: Vec<RadialFn>,
    dcomponents: Option<Vec<RadialFn>>,
    d2components: Option<Vec<RadialFn>>,
    physical: Option<Vec<PhysicalFn>>,
}

impl std::fmt::Debug for DataFamily {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("DataFamily")
            .field("name", &self.name)
            .field("m", &self.m)
            .field("amplitude", &self.amplitude)
            .finish()
    }
}

impl DataFamily {
    pub fn new(name: impl Into<String>, amplitude: f64, components: Vec<RadialFn>) -> Self {
        DataFamily {
            name: name.into(),
            m: components.len(),
            amplitude,
            components,
            dcomponents: None,
            d2components: None,
            physical: None,
        }
    }

    pub fn with_derivatives(mut self, d1: Vec<RadialFn>, d2: Vec<RadialFn>) -> Self {
        self.dcomponents = Some(d1);
        self.d2components = Some(d2);
        self
    }

    pub fn with_physical(mut self, physical: Vec<PhysicalFn>) -> Self {
        self.physical = Some(physical);
        self
    }

    pub fn with_amplitude(&self, amplitude: f64) -> Self {
        let mut out = self.clone();
        out.amplitude = amplitude;
        out
    }

    pub fn has_physical(&self) -> bool {
        self.physical.is_some()
    }

    /// `f̂_j(ρω)` including the amplitude.
    pub fn fhat(&self, j: usize, rho: f64, omega: &[f64]) -> C64 {
        (self.components[j])(rho, omega) * self.amplitude
    }

    /// Physical form `f_j(x)` including the amplitude.
    pub fn physical(&self, j: usize, x: &[f64]) -> Result<f64> {
        match &self.physical {
            Some(p) => Ok((p[j])(x) * self.amplitude),
            None => Err(Error::PhysicalFormUnavailable(self.name.clone())),
        }
    }

    /// `∂_ρ^order f̂_j`: closed form when provided, else central differences
    /// with the given step.
    pub fn dfhat(&self, order: usize, j: usize, rho: f64, omega: &[f64], h: f64) -> C64 {
        match order {
            0 => self.fhat(j, rho, omega),
            1 => {
                if let Some(d) = &self.dcomponents {
                    (d[j])(rho, omega) * self.amplitude
                } else {
                    (self.fhat(j, rho + h, omega) - self.fhat(j, (rho - h).max(0.0), omega))
                        / (rho + h - (rho - h).max(0.0))
                }
            }
            2 => {
                if let Some(d) = &self.d2components {
                    (d[j])(rho, omega) * self.amplitude
                } else {
                    let lo = (rho - h).max(0.0);
                    (self.fhat(j, rho + h, omega) - self.fhat(j, rho, omega) * 2.0
                        + self.fhat(j, lo, omega))
                        / (h * h)
                }
            }
            _ => unreachable!("only derivatives up to order 2 are used"),
        }
    }

    /// Sample the data on a grid as the t = 0 spectral state.
    pub fn sample_on(&self, grid: Arc<FrequencyGrid>) -> SpectralField {
        let m = self.m;
        let mut field = SpectralField::zeros(Arc::clone(&grid), m, 0.0);
        let mut values = Vec::with_capacity(grid.node_count() * m);
        for q in 0..grid.n_sphere() {
            let omega = grid.omega(q).to_vec();
            for i in 0..grid.n_rho() {
                let rho = grid.rho_nodes()[i];
                for j in 0..m {
                    values.push(self.fhat(j, rho, &omega));
                }
            }
        }
        for (flat_c, v) in values.into_iter().enumerate() {
            let flat = flat_c / m;
            let c = flat_c % m;
            let mut node = field.node(flat);
            node[c] = v;
            field.set_node(flat, &node);
        }
        field
    }

    /// Largest `|f̂_j(rho_max)| / max_i |f̂_j(ρ_i)|` over components; data
    /// should decay below ~1e-12 before the truncation radius.
    pub fn tail_ratio(&self, grid: &FrequencyGrid) -> f64 {
        let mut worst = 0.0_f64;
        for q in 0..grid.n_sphere() {
            let omega = grid.omega(q);
            for j in 0..self.m {
                let mut peak = 0.0_f64;
                for &rho in grid.rho_nodes() {
                    peak = peak.max(self.fhat(j, rho, omega).norm());
                }
                if peak > 0.0 {
                    let tail = self.fhat(j, grid.rho_max(), omega).norm() / peak;
                    worst = worst.max(tail);
                }
            }
        }
        worst
    }
}

// ---------------------------------------------------------------------------
// Catalog families

/// `f̂_j = w_j e^{-ρ²/(2σ²)}` with closed-form derivatives; physical form
/// `f_j(x) = w_j σ^n e^{-σ²|x|²/2}` (set for n = 1 usage).
pub fn gaussian(weights: &[f64], sigma: f64, amplitude: f64) -> DataFamily {
    let mut comps: Vec<RadialFn> = Vec::new();
    let mut d1: Vec<RadialFn> = Vec::new();
    let mut d2: Vec<RadialFn> = Vec::new();
    let mut phys: Vec<PhysicalFn> = Vec::new();
    for &w in weights {
        let s2 = sigma * sigma;
        comps.push(Arc::new(move |rho, _| {
            C64::new(w * (-rho * rho / (2.0 * s2)).exp(), 0.0)
        }));
        d1.push(Arc::new(move |rho, _| {
            C64::new(-w * rho / s2 * (-rho * rho / (2.0 * s2)).exp(), 0.0)
        }));
        d2.push(Arc::new(move |rho, _| {
            C64::new(
                w * (rho * rho / (s2 * s2) - 1.0 / s2) * (-rho * rho / (2.0 * s2)).exp(),
                0.0,
            )
        }));
        phys.push(Arc::new(move |x: &[f64]| {
            let r2: f64 = x.iter().map(|v| v * v).sum();
            let n = x.len() as i32;
            w * sigma.powi(n) * (-sigma * sigma * r2 / 2.0).exp()
        }));
    }
    DataFamily::new("gaussian", amplitude, comps)
        .with_derivatives(d1, d2)
        .with_physical(phys)
}

/// `f̂_j = w_j ρ^{p_j} e^{-ρ²/(2σ²)}`.
pub fn gaussian_rho(weights: &[f64], powers: &[u32], sigma: f64, amplitude: f64) -> DataFamily {
    assert_eq!(weights.len(), powers.len());
    let mut comps: Vec<RadialFn> = Vec::new();
    let mut d1: Vec<RadialFn> = Vec::new();
    let mut d2: Vec<RadialFn> = Vec::new();
    let s2 = sigma * sigma;
    for (&w, &p) in weights.iter().zip(powers) {
        comps.push(Arc::new(move |rho: f64, _: &[f64]| {
            C64::new(
                w * rho.powi(p as i32) * (-rho * rho / (2.0 * s2)).exp(),
                0.0,
            )
        }));
        d1.push(Arc::new(move |rho: f64, _: &[f64]| {
            let e = (-rho * rho / (2.0 * s2)).exp();
            let pw = if p == 0 {
                -rho / s2 * e
            } else {
                (p as f64 * rho.powi(p as i32 - 1) - rho.powi(p as i32 + 1) / s2) * e
            };
            C64::new(w * pw, 0.0)
        }));
        d2.push(Arc::new(move |rho: f64, _: &[f64]| {
            let e = (-rho * rho / (2.0 * s2)).exp();
            let p = p as i32;
            let pf = p as f64;
            // d²/dρ² [ρ^p e^{-ρ²/(2s²)}]
            let t1 = if p >= 2 {
                pf * (pf - 1.0) * rho.powi(p - 2)
            } else {
                0.0
            };
            let t2 = -(2.0 * pf + 1.0) / s2 * rho.powi(p);
            let t3 = rho.powi(p + 2) / (s2 * s2);
            C64::new(w * (t1 + t2 + t3) * e, 0.0)
        }));
    }
    DataFamily::new("gaussian_rho", amplitude, comps).with_derivatives(d1, d2)
}

/// Indicator shell `f̂_j = w_j · 1{r0 <= ρ <= r1}` (rough family; radial
/// derivatives only exist distributionally, so the m-norm diverges with
/// resolution — intended).
pub fn indicator_shell(weights: &[f64], r0: f64, r1: f64, amplitude: f64) -> DataFamily {
    let comps: Vec<RadialFn> = weights
        .iter()
        .map(|&w| {
            let f: RadialFn = Arc::new(move |rho: f64, _: &[f64]| {
                C64::new(if (r0..=r1).contains(&rho) { w } else { 0.0 }, 0.0)
            });
            f
        })
        .collect();
    DataFamily::new("shell", amplitude, comps)
}

/// Smooth compactly supported bump `w_j exp(1 - 1/(1-u²))`, `u = (ρ-c)/hw`.
pub fn bump(weights: &[f64], center: f64, halfwidth: f64, amplitude: f64) -> DataFamily {
    let comps: Vec<RadialFn> = weights
        .iter()
        .map(|&w| {
            let f: RadialFn = Arc::new(move |rho: f64, _: &[f64]| {
                let u = (rho - center) / halfwidth;
                if u.abs() < 1.0 {
                    C64::new(w * (1.0 - 1.0 / (1.0 - u * u)).exp(), 0.0)
                } else {
                    C64::new(0.0, 0.0)
                }
            });
            f
        })
        .collect();
    DataFamily::new("bump", amplitude, comps)
}

pub fn zero_data(m: usize) -> DataFamily {
    let comps: Vec<RadialFn> = (0..m)
        .map(|_| {
            let f: RadialFn = Arc::new(|_, _| C64::new(0.0, 0.0));
            f
        })
        .collect();
    DataFamily::new("zero", 0.0, comps)
}

// ---------------------------------------------------------------------------
// Oscillatory class norms

/// Uniform symmetric τ grid.
#[derive(Debug, Clone, Copy)]
pub struct TauGrid {
    pub tau_max: f64,
    pub n_tau: usize,
}

impl Default for TauGrid {
    fn default() -> Self {
        TauGrid {
            tau_max: 200.0,
            n_tau: 4001,
        }
    }
}

impl TauGrid {
    pub fn taus(&self) -> Vec<f64> {
        let n = self.n_tau.max(3);
        let dt = 2.0 * self.tau_max / (n - 1) as f64;
        (0..n).map(|k| -self.tau_max + k as f64 * dt).collect()
    }
    pub fn spacing(&self) -> f64 {
        2.0 * self.tau_max / (self.n_tau.max(3) - 1) as f64
    }
}

/// Value of an oscillatory class norm together with its τ-profile and a
/// tail estimate for sizing `tau_max`.
#[derive(Debug, Clone)]
pub struct OscNorm {
    pub value: f64,
    /// `tau_max * profile(tau_max)`: the remaining mass if the integrand
    /// decays like `⟨τ⟩^{-2}`.
    pub tail: f64,
    pub taus: Vec<f64>,
    pub profile: Vec<f64>,
}

fn osc_norm_kernel(
    data: &DataFamily,
    grid: &FrequencyGrid,
    tau_grid: &TauGrid,
    radial_power: impl Fn(usize, usize) -> i32,
    sphere_inside_modulus: bool,
) -> OscNorm {
    let m = data.m;
    let taus = tau_grid.taus();
    let mut profile = vec![0.0; taus.len()];

    for j in 0..m {
        for k in 0..m {
            let power = radial_power(j, k);
            // Samples h_i = f̂_j conj(f̂_k) ρ^power per sphere node.
            let hs: Vec<Vec<C64>> = (0..grid.n_sphere())
                .map(|q| {
                    let omega = grid.omega(q);
                    grid.rho_nodes()
                        .iter()
                        .map(|&rho| {
                            data.fhat(j, rho, omega)
                                * data.fhat(k, rho, omega).conj()
                                * rho.powi(power)
                        })
                        .collect()
                })
                .collect();
            let contrib: Vec<f64> = taus
                .par_iter()
                .map(|&tau| {
                    if sphere_inside_modulus {
                        let inner: Vec<C64> = (0..grid.n_sphere())
                            .map(|q| {
                                grid.integrate_radial_oscillatory(&hs[q], tau).unwrap()
                                    * grid.sphere_weights()[q]
                            })
                            .collect();
                        crate::reduce::pairwise_sum_c(&inner).norm()
                    } else {
                        let inner: Vec<f64> = (0..grid.n_sphere())
                            .map(|q| {
                                grid.integrate_radial_oscillatory(&hs[q], tau)
                                    .unwrap()
                                    .norm()
                                    * grid.sphere_weights()[q]
                            })
                            .collect();
                        pairwise_sum(&inner)
                    }
                })
                .collect();
            for (p, c) in profile.iter_mut().zip(&contrib) {
                *p += c;
            }
        }
    }

    let value = trapezoid(&profile, tau_grid.spacing());
    let edge = 0.5 * (profile[0] + profile[profile.len() - 1]);
    OscNorm {
        value,
        tail: tau_grid.tau_max * edge,
        taus,
        profile,
    }
}

/// The main data-class norm: modulus of the radial oscillatory integral
/// with weight `ρ^n`, integrated over the sphere and over τ.
pub fn y_norm(data: &DataFamily, grid: &FrequencyGrid, tau_grid: &TauGrid) -> OscNorm {
    let n = grid.dim() as i32;
    osc_norm_kernel(data, grid, tau_grid, |_, _| n, false)
}

/// Variant for an (f0, f1) pair with weight `ρ^{n-j-k}`.
///
/// The (1,1) term carries `ρ^{n-2}`; for n = 1 it is integrable only when
/// `f̂_1` vanishes at ρ = 0 (the homogeneous `Ḣ^{-1}` condition on f1).
pub fn y_tilde_norm(
    data: &DataFamily,
    grid: &FrequencyGrid,
    tau_grid: &TauGrid,
) -> Result<OscNorm> {
    if data.m != 2 {
        return Err(Error::InvalidParameter {
            name: "data",
            message: format!("y_tilde_norm needs an (f0, f1) pair, got m = {}", data.m),
        });
    }
    let n = grid.dim() as i32;
    Ok(osc_norm_kernel(
        data,
        grid,
        tau_grid,
        |j, k| n - j as i32 - k as i32,
        false,
    ))
}

/// Full-ξ oscillatory norm: sphere integral inside the modulus and weight
/// `|ξ|^{3-j-k}` (radial power `n - 1 + 3 - j - k` after polar coordinates).
pub fn k_norm(data: &DataFamily, grid: &FrequencyGrid, tau_grid: &TauGrid) -> Result<OscNorm> {
    if data.m != 2 {
        return Err(Error::InvalidParameter {
            name: "data",
            message: format!("k_norm needs an (f0, f1) pair, got m = {}", data.m),
        });
    }
    let n = grid.dim() as i32;
    Ok(osc_norm_kernel(
        data,
        grid,
        tau_grid,
        |j, k| n + 2 - j as i32 - k as i32,
        true,
    ))
}

/// `Σ_{k<=2} Σ_j sup_ω ∫ |∂_ρ^k f̂_j|² (1 + ρ^{max(n,2)}) dρ`.
pub fn m_norm(data: &DataFamily, grid: &FrequencyGrid) -> f64 {
    let n = grid.dim();
    let pow = n.max(2) as i32;
    // Derivative step from the grid spacing when no closed form exists.
    let h = 0.5 * grid.rho_max() / grid.n_rho() as f64;
    let mut total = 0.0;
    for order in 0..=2 {
        for j in 0..data.m {
            let mut sup = 0.0_f64;
            for q in 0..grid.n_sphere() {
                let omega = grid.omega(q);
                let samples: Vec<f64> = grid
                    .rho_nodes()
                    .iter()
                    .map(|&rho| {
                        let d = data.dfhat(order, j, rho, omega, h);
                        d.norm_sqr() * (1.0 + rho.powi(pow))
                    })
                    .collect();
                let terms: Vec<f64> = samples
                    .iter()
                    .zip(grid.rho_weights())
                    .map(|(s, w)| s * w)
                    .collect();
                sup = sup.max(pairwise_sum(&terms));
            }
            total += sup;
        }
    }
    total
}

/// `‖⟨x⟩^κ f‖_{H^σ}` by dense discrete Fourier transform on `[-box, box]`
/// (n = 1 only; physical closed form required).
pub fn weighted_sobolev_norm(
    data: &DataFamily,
    sigma: f64,
    kappa: f64,
    box_half: f64,
    resolution: usize,
) -> Result<f64> {
    if !data.has_physical() {
        return Err(Error::PhysicalFormUnavailable(data.name.clone()));
    }
    let n_pts = resolution.max(16);
    let dx = 2.0 * box_half / n_pts as f64;
    let dxi = 2.0 * std::f64::consts::PI / (n_pts as f64 * dx);
    let mut total = 0.0;
    for j in 0..data.m {
        // g(x) = <x>^kappa f(x) sampled on the box.
        let g: Vec<f64> = (0..n_pts)
            .map(|p| {
                let x = -box_half + (p as f64 + 0.5) * dx;
                let w = (1.0 + x * x).powf(kappa / 2.0);
                w * data.physical(j, &[x]).unwrap_or(0.0)
            })
            .collect();
        // ĝ(ξ_k) = (2π)^{-1/2} Δx Σ_p g(x_p) e^{-i x_p ξ_k}; then
        // ‖<D>^σ g‖² = Σ_k (1+ξ_k²)^σ |ĝ(ξ_k)|² Δξ.
        let norm_sq: Vec<f64> = (0..n_pts)
            .into_par_iter()
            .map(|kk| {
                let xi = (kk as f64 - n_pts as f64 / 2.0) * dxi;
                let mut acc = C64::new(0.0, 0.0);
                for (p, &gp) in g.iter().enumerate() {
                    let x = -box_half + (p as f64 + 0.5) * dx;
                    acc += C64::from_polar(gp, -x * xi);
                }
                let ghat = acc * dx / (2.0 * std::f64::consts::PI).sqrt();
                (1.0 + xi * xi).powf(sigma) * ghat.norm_sqr() * dxi
            })
            .collect();
        total += pairwise_sum(&norm_sq);
    }
    Ok(total.sqrt())
}

/// Gate report for the smallness hypothesis `‖U_0‖² + |U_0|_Y < threshold`.
#[derive(Debug, Clone, Serialize)]
pub struct GateReport {
    pub l2_sq: f64,
    pub y_value: f64,
    pub value: f64,
    pub threshold: f64,
    pub pass: bool,
    pub margin: f64,
}

pub fn smallness_gate(l2_sq: f64, y_value: f64, threshold: f64) -> GateReport {
    let value = l2_sq + y_value;
    GateReport {
        l2_sq,
        y_value,
        value,
        threshold,
        pass: value < threshold,
        margin: threshold - value,
    }
}

/// Aggregated norms report, serialized by the CLI.
#[derive(Debug, Clone, Serialize)]
pub struct ClassNormsReport {
    pub data_family: String,
    pub amplitude: f64,
    pub l2_sq: f64,
    pub y_norm: f64,
    pub y_tail: f64,
    pub m_norm: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub y_tilde: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k_norm: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub weighted_h1_kappa: Option<f64>,
    pub data_tail_ratio: f64,
    pub gate: GateReport,
}

/// Fitted decay exponent of the oscillatory sphere integral
/// `LHS(τ) = ∫_{S^{n-1}} |∫_0^∞ e^{iτρ} f̂_{j1} f̂_{j2} φ(ω) ρ^n dρ| dσ(ω)`
/// (no conjugation, matching the decay-estimate pairing): log-log least
/// squares of LHS against ⟨τ⟩; returns the observed κ as `-slope`.
pub struct DecayFit {
    pub exponent: f64,
    pub taus: Vec<f64>,
    pub lhs: Vec<f64>,
}

pub fn decay_exponent_fit(
    data: &DataFamily,
    j1: usize,
    j2: usize,
    phi: &SphereFn,
    grid: &FrequencyGrid,
    taus: &[f64],
) -> Result<DecayFit> {
    let n = grid.dim() as i32;
    let hs: Vec<Vec<C64>> = (0..grid.n_sphere())
        .map(|q| {
            let omega = grid.omega(q);
            let pv = phi(omega);
            grid.rho_nodes()
                .iter()
                .map(|&rho| {
                    data.fhat(j1, rho, omega) * data.fhat(j2, rho, omega) * pv * rho.powi(n)
                })
                .collect()
        })
        .collect();
    let lhs: Vec<f64> = taus
        .par_iter()
        .map(|&tau| {
            let inner: Vec<f64> = (0..grid.n_sphere())
                .map(|q| {
                    grid.integrate_radial_oscillatory(&hs[q], tau)
                        .unwrap()
                        .norm()
                        * grid.sphere_weights()[q]
                })
                .collect();
            pairwise_sum(&inner)
        })
        .collect();

    let floor = 1e-14 * lhs.iter().fold(0.0_f64, |a, &b| a.max(b));
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for (&tau, &v) in taus.iter().zip(&lhs) {
        if tau != 0.0 {
            if v <= floor || v <= 0.0 {
                return Err(Error::SignalTooSmall { floor });
            }
            xs.push((1.0 + tau * tau).sqrt().ln());
            ys.push(v.ln());
        }
    }
    if xs.len() < 2 {
        return Err(Error::InvalidParameter {
            name: "tau_samples",
            message: "need at least two nonzero τ samples".into(),
        });
    }
    let nf = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / nf;
    let my = ys.iter().sum::<f64>() / nf;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    Ok(DecayFit {
        exponent: -slope,
        taus: taus.to_vec(),
        lhs,
    })
}
