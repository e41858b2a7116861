//! Class-norm validation against 10x-oversampled brute-force quadrature.
//!
//! The oracle shares the truncations (rho_max, tau_max) with the production
//! rule and differs only in the quadrature: uniform trapezoid with 10x the
//! radial nodes and 10x the tau samples, summed naively. Agreement therefore
//! certifies the production quadrature, not the truncation.

use klab_core::classnorms::{self, k_norm, m_norm, y_norm, y_tilde_norm, DataFamily, TauGrid};
use klab_core::grid::{build_grid, FrequencyGrid, SphereRes};
use klab_core::C64;
use rayon::prelude::*;

struct Oracle {
    rho_max: f64,
    n_rho: usize,
    tau_max: f64,
    n_tau: usize,
}

impl Oracle {
    /// Brute-force version of the oscillatory norms. `power(j,k)` gives the
    /// radial exponent; `sphere_inside` switches between the two modulus
    /// placements.
    fn eval(
        &self,
        data: &DataFamily,
        grid: &FrequencyGrid,
        power: impl Fn(usize, usize) -> i32,
        sphere_inside: bool,
    ) -> f64 {
        let dr = self.rho_max / self.n_rho as f64;
        let dtau = 2.0 * self.tau_max / (self.n_tau - 1) as f64;
        let m = data.m;
        let mut total = 0.0;
        for j in 0..m {
            for k in 0..m {
                let p = power(j, k);
                // Radial samples per sphere node.
                let hs: Vec<Vec<C64>> = (0..grid.n_sphere())
                    .map(|q| {
                        let omega = grid.omega(q);
                        (0..=self.n_rho)
                            .map(|r| {
                                let rho = r as f64 * dr;
                                if rho == 0.0 && p < 0 {
                                    return C64::new(0.0, 0.0);
                                }
                                data.fhat(j, rho, omega)
                                    * data.fhat(k, rho, omega).conj()
                                    * rho.powi(p)
                            })
                            .collect()
                    })
                    .collect();
                let tau_acc: f64 = (0..self.n_tau)
                    .into_par_iter()
                    .map(|t| {
                        let tau = -self.tau_max + t as f64 * dtau;
                        let wt = if t == 0 || t == self.n_tau - 1 {
                            0.5
                        } else {
                            1.0
                        };
                        // Rotating phasor: e^{i tau rho_r} = step^r.
                        let step = C64::from_polar(1.0, tau * dr);
                        let mut sphere_acc_mod = 0.0;
                        let mut sphere_acc = C64::new(0.0, 0.0);
                        for (q, h) in hs.iter().enumerate() {
                            let mut inner = C64::new(0.0, 0.0);
                            let mut phase = C64::new(1.0, 0.0);
                            for (r, &hv) in h.iter().enumerate() {
                                let w = if r == 0 || r == self.n_rho { 0.5 } else { 1.0 };
                                inner += hv * phase * w;
                                phase *= step;
                            }
                            inner *= dr;
                            if sphere_inside {
                                sphere_acc += inner * grid.sphere_weights()[q];
                            } else {
                                sphere_acc_mod += inner.norm() * grid.sphere_weights()[q];
                            }
                        }
                        let val = if sphere_inside {
                            sphere_acc.norm()
                        } else {
                            sphere_acc_mod
                        };
                        val * wt
                    })
                    .sum();
                total += tau_acc * dtau;
            }
        }
        total
    }
}

fn setup() -> (FrequencyGrid, TauGrid, Oracle) {
    let grid = build_grid(1, 8.0, 1024, SphereRes::Two).unwrap();
    let tau = TauGrid {
        tau_max: 60.0,
        n_tau: 1201,
    };
    let oracle = Oracle {
        rho_max: 8.0,
        n_rho: 10240,
        tau_max: 60.0,
        n_tau: 12001,
    };
    (grid, tau, oracle)
}

#[test]
fn y_norm_matches_brute_force() {
    let (grid, tau, oracle) = setup();
    let data = classnorms::gaussian(&[1.0], 1.0, 1.0);
    let ours = y_norm(&data, &grid, &tau);
    let brute = oracle.eval(&data, &grid, |_, _| 1, false);
    let rel = (ours.value - brute).abs() / brute;
    assert!(
        rel < 1e-4,
        "y_norm {} vs oracle {brute}: rel {rel:e}",
        ours.value
    );
    assert!(ours.tail < 0.05 * ours.value, "tail estimate too large");
}

#[test]
fn y_tilde_norm_matches_brute_force() {
    let (grid, tau, oracle) = setup();
    // f1 chosen with a vanishing spectral value at rho = 0 so the (1,1)
    // term with weight rho^{n-2} stays integrable in n = 1.
    let data = classnorms::gaussian_rho(&[1.0, 0.6], &[0, 1], 1.0, 1.0);
    let ours = y_tilde_norm(&data, &grid, &tau).unwrap();
    let brute = oracle.eval(&data, &grid, |j, k| 1 - j as i32 - k as i32, false);
    let rel = (ours.value - brute).abs() / brute;
    assert!(
        rel < 1e-4,
        "y_tilde {} vs oracle {brute}: rel {rel:e}",
        ours.value
    );
}

#[test]
fn k_norm_matches_brute_force() {
    let (grid, tau, oracle) = setup();
    let data = classnorms::gaussian_rho(&[1.0, 0.6], &[0, 1], 1.0, 1.0);
    let ours = k_norm(&data, &grid, &tau).unwrap();
    let brute = oracle.eval(&data, &grid, |j, k| 3 - j as i32 - k as i32, true);
    let rel = (ours.value - brute).abs() / brute;
    assert!(
        rel < 1e-4,
        "k_norm {} vs oracle {brute}: rel {rel:e}",
        ours.value
    );
}

#[test]
fn inclusion_chain_finiteness_on_catalog() {
    // Finite m-norm => finite y-norm => finite k-norm on smooth families.
    let grid = build_grid(1, 8.0, 512, SphereRes::Two).unwrap();
    let tau = TauGrid {
        tau_max: 40.0,
        n_tau: 401,
    };
    for data in [
        classnorms::gaussian_rho(&[1.0, 0.5], &[0, 1], 1.0, 1.0),
        classnorms::gaussian_rho(&[0.8, 0.2], &[1, 2], 1.5, 1.0),
        classnorms::bump(&[1.0, 0.4], 3.0, 2.0, 1.0),
    ] {
        let mn = m_norm(&data, &grid);
        let yn = y_norm(&data, &grid, &tau).value;
        let kn = k_norm(&data, &grid, &tau).unwrap().value;
        assert!(mn.is_finite() && yn.is_finite() && kn.is_finite());
        assert!(yn > 0.0 && kn > 0.0);
    }
}

#[test]
fn weighted_membership_implies_finite_y_norm() {
    // Families with finite H^1_kappa norm (kappa = 1.5) have finite y-norm
    // on the same grids.
    let grid = build_grid(1, 8.0, 512, SphereRes::Two).unwrap();
    let tau = TauGrid {
        tau_max: 40.0,
        n_tau: 401,
    };
    for sigma in [0.7, 1.0, 1.6] {
        let data = classnorms::gaussian(&[1.0], sigma, 1.0);
        let h1k = classnorms::weighted_sobolev_norm(&data, 1.0, 1.5, 14.0, 1024).unwrap();
        assert!(h1k.is_finite() && h1k > 0.0);
        let y = y_norm(&data, &grid, &tau).value;
        assert!(y.is_finite() && y > 0.0);
    }
}

#[test]
fn norms_stable_under_grid_refinement() {
    let tau = TauGrid {
        tau_max: 40.0,
        n_tau: 801,
    };
    let tau_fine = TauGrid {
        tau_max: 40.0,
        n_tau: 1601,
    };
    let data = classnorms::gaussian(&[1.0, 0.5], 1.0, 1.0);
    let coarse_grid = build_grid(1, 8.0, 512, SphereRes::Two).unwrap();
    let fine_grid = build_grid(1, 8.0, 1024, SphereRes::Two).unwrap();
    let coarse = y_norm(&data, &coarse_grid, &tau).value;
    let fine = y_norm(&data, &fine_grid, &tau_fine).value;
    let rel = (coarse - fine).abs() / fine;
    assert!(rel < 1e-3, "resolution drift {rel:e}");
    let m_coarse = m_norm(&data, &coarse_grid);
    let m_fine = m_norm(&data, &fine_grid);
    assert!(((m_coarse - m_fine) / m_fine).abs() < 1e-3);
}

#[test]
fn pair_norms_stable_under_grid_refinement() {
    let tau = TauGrid {
        tau_max: 40.0,
        n_tau: 801,
    };
    let tau_fine = TauGrid {
        tau_max: 40.0,
        n_tau: 1601,
    };
    let pair = classnorms::gaussian_rho(&[1.0, 0.6], &[0, 1], 1.0, 1.0);
    let coarse_grid = build_grid(1, 8.0, 512, SphereRes::Two).unwrap();
    let fine_grid = build_grid(1, 8.0, 1024, SphereRes::Two).unwrap();
    let yt_c = y_tilde_norm(&pair, &coarse_grid, &tau).unwrap().value;
    let yt_f = y_tilde_norm(&pair, &fine_grid, &tau_fine).unwrap().value;
    assert!(((yt_c - yt_f) / yt_f).abs() < 1e-3);
    let k_c = k_norm(&pair, &coarse_grid, &tau).unwrap().value;
    let k_f = k_norm(&pair, &fine_grid, &tau_fine).unwrap().value;
    assert!(((k_c - k_f) / k_f).abs() < 1e-3);
}
