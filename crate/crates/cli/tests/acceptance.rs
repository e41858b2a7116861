//! Acceptance suite: every criterion runs at its stated tolerance and
//! prints one PASS line (run with `--nocapture` to see them). Failures
//! panic with the measured value.

use std::sync::Arc;
use std::time::Instant;

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use klab::config::RunConfig;
use klab::scenario::run_scenario;
use klab_core::asymp::{build_tables, AmplitudeMethod};
use klab_core::classnorms::{self, DataFamily, TauGrid};
use klab_core::diag::{build_diagonalizer, diag_residual, inverse_residual, DiagOptions};
use klab_core::diagnostics::sprime_split;
use klab_core::families::{self, ProblemFamily};
use klab_core::grid::{build_grid, FrequencyGrid, SphereRes};
use klab_core::linalg;
use klab_core::solver::{
    direct_solve, fixed_point_solve, theta_apply, uniqueness_probe, LinearMethod,
    NonlocalTrajectory, SolverOptions,
};
use klab_core::symbol::{
    characteristic_roots, coupled_roots_closed_form, coupled_symbol, RootOptions, SphereFn,
    SymbolModel,
};
use klab_core::C64;

fn report(criterion: usize, name: &str, detail: String, started: Instant, budget_s: f64) {
    let elapsed = started.elapsed().as_secs_f64();
    println!("PASS criterion {criterion:2} [{name}] {detail} ({elapsed:.2}s)");
    assert!(
        elapsed < budget_s,
        "criterion {criterion} exceeded its {budget_s}s budget: {elapsed:.2}s"
    );
}

fn grid_n1(n_rho: usize) -> Arc<FrequencyGrid> {
    Arc::new(build_grid(1, 8.0, n_rho, SphereRes::Two).unwrap())
}

fn scalar_family(amplitude: f64) -> ProblemFamily {
    let data = classnorms::gaussian(&[1.0, 0.5], 1.0, amplitude);
    families::scalar_kirchhoff(1, 0.5, data).unwrap()
}

fn coupled_family(amplitude: f64, grid: &FrequencyGrid) -> ProblemFamily {
    let data = classnorms::gaussian(&[1.0, 0.0, 0.5, 0.0], 1.0, amplitude);
    families::coupled(1, 1.0, 4.0, 0.1, 0.1, 0.5, grid, data).unwrap()
}

fn gate_value(data: &DataFamily, grid: &FrequencyGrid, tau: &TauGrid) -> (f64, f64) {
    let field = data.sample_on(Arc::new(grid.clone()));
    let l2 = field.l2_norm_sq().unwrap();
    let y = classnorms::y_norm(data, grid, tau).value;
    (l2, y)
}

// ---------------------------------------------------------------------------

#[test]
fn criterion_01_closed_form_roots() {
    let t0 = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    let opts = RootOptions::default();
    let probe_grid = build_grid(
        3,
        2.0,
        8,
        SphereRes::Product {
            polar: 4,
            azimuth: 8,
        },
    )
    .unwrap();
    let mut worst = 0.0_f64;
    let mut done = 0;
    while done < 1000 {
        let a1: f64 = rng.gen_range(0.5..4.0);
        let a2: f64 = rng.gen_range(0.5..4.0);
        if (a1 - a2).abs() < 0.05 {
            continue;
        }
        let q1: f64 = rng.gen_range(-0.4..0.4);
        let q2: f64 = rng.gen_range(-0.4..0.4);
        let scale = (a1 * a2).min((a1 - a2).abs());
        // Random quadratic forms on the sphere, kept within the structural
        // conditions by rejection.
        let p1: SphereFn = {
            let c = q1 * scale;
            Arc::new(move |w: &[f64]| c * (0.3 + 0.7 * w[0] * w[0]))
        };
        let p2: SphereFn = {
            let c = q2 * scale;
            Arc::new(move |w: &[f64]| {
                c * (0.3 + 0.7 * w[1.min(w.len() - 1)] * w[1.min(w.len() - 1)])
            })
        };
        let Ok(model) = coupled_symbol(a1, a2, p1.clone(), p2.clone(), 0.5, &probe_grid) else {
            continue;
        };
        let s: f64 = rng.gen_range(0.0..0.5);
        let q_idx = rng.gen_range(0..probe_grid.n_sphere());
        let omega = probe_grid.omega(q_idx);
        let roots = characteristic_roots(&model, s, omega, &opts).unwrap();
        let closed = coupled_roots_closed_form(a1, a2, p1(omega), p2(omega), s);
        let phi_scale = closed.iter().fold(0.0_f64, |m, r| m.max(r.abs()));
        for (got, want) in roots.roots.iter().zip(closed.iter()) {
            worst = worst.max((got - want).abs() / phi_scale);
        }
        done += 1;
    }
    assert!(worst < 1e-10, "closed-form mismatch {worst:e}");
    report(
        1,
        "closed_form_roots",
        format!("max rel err {worst:.2e} over 1000 draws"),
        t0,
        1.0,
    );
}

#[test]
fn criterion_02_diagonalizer_residuals() {
    let t0 = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let grid1 = build_grid(1, 4.0, 16, SphereRes::Two).unwrap();
    let families: Vec<SymbolModel> = vec![
        scalar_family(0.0).symbol,
        coupled_family(0.0, &grid1).symbol,
        families::l2_kirchhoff(3, 0.5, classnorms::zero_data(2))
            .unwrap()
            .symbol,
        families::constant_wave(1, 2.0, classnorms::zero_data(2))
            .unwrap()
            .symbol,
    ];
    let opts = RootOptions::default();
    let mut worst_res = 0.0_f64;
    let mut worst_inv = 0.0_f64;
    let mut min_det = f64::INFINITY;
    for k in 0..1000 {
        let model = &families[k % families.len()];
        let s = rng.gen_range(0.0..0.5);
        let omega = [if rng.gen_bool(0.5) { 1.0 } else { -1.0 }];
        let a = model.eval(s, &omega);
        let roots = characteristic_roots(model, s, &omega, &opts).unwrap();
        let d = build_diagonalizer(&a, &roots, 1e-6).unwrap();
        worst_res = worst_res.max(diag_residual(&a, &roots, &d) / linalg::max_abs(&a));
        worst_inv = worst_inv.max(inverse_residual(&d));
        min_det = min_det.min(d.det_abs);
    }
    assert!(worst_res < 1e-9, "residual {worst_res:e}");
    assert!(worst_inv < 1e-10, "inverse residual {worst_inv:e}");
    assert!(min_det >= 1e-6, "det {min_det:e}");
    report(
        2,
        "diagonalizer_residuals",
        format!("res {worst_res:.2e}, inv {worst_inv:.2e}, det >= {min_det:.2e}"),
        t0,
        5.0,
    );
}

#[test]
fn criterion_03_representation_equivalence() {
    let t0 = Instant::now();
    let family = scalar_family(0.02);
    let grid = grid_n1(128);
    let data = family.data.sample_on(Arc::clone(&grid));
    let dt = 1e-3_f64;
    let t_final = 5.0_f64;
    let n_steps = (t_final / dt).round() as usize;
    let s_in = NonlocalTrajectory::from_fn(
        0.0,
        dt,
        n_steps + 1,
        |t| 0.1 * (-t).exp(),
        |t| -0.1 * (-t).exp(),
    );
    let base = SolverOptions {
        dt,
        t_final,
        snapshot_times: vec![1.0, 2.0, 5.0],
        ..SolverOptions::default()
    };
    let rk4 = theta_apply(&family, &data, &s_in, &base).unwrap();
    let rep_opts = SolverOptions {
        linear: LinearMethod::Representation,
        ..base
    };
    let rep = theta_apply(&family, &data, &s_in, &rep_opts).unwrap();
    let mut worst = 0.0_f64;
    for (a, b) in rk4.fields.iter().zip(&rep.fields) {
        let rel = a.rel_l2_distance(b).unwrap();
        assert!(rel < 1e-6, "mismatch {rel:e} at t = {}", a.time());
        worst = worst.max(rel);
    }
    report(
        3,
        "representation_equivalence",
        format!("max rel L2 {worst:.2e} at t in {{1,2,5}}"),
        t0,
        30.0,
    );
}

#[test]
fn criterion_04_amplitude_bounds() {
    let t0 = Instant::now();
    let family = scalar_family(0.02);
    let grid = grid_n1(64);
    let n_steps = 1000usize;
    let half = NonlocalTrajectory::from_fn(
        0.0,
        5e-4,
        2 * n_steps + 1,
        |t| 0.1 * (-t).exp(),
        |t| -0.1 * (-t).exp(),
    );
    let tables = build_tables(
        &family.symbol,
        &half,
        Arc::clone(&grid),
        AmplitudeMethod::Rk4,
        &DiagOptions::default(),
    )
    .unwrap();
    let (c, ratio) = tables.amplitude_bound_constant();
    // The bound holds with the reported c at every node.
    let n_rho = grid.n_rho();
    for (flat, amp) in tables.amps.iter().enumerate() {
        let tv = tables.diag_paths[flat / n_rho].total_variation;
        assert!(
            amp.sup_column_ratio() <= (c * tv).exp() * (1.0 + 1e-12),
            "amplitude bound violated at node {flat}"
        );
    }

    // Picard term norms against the factorial bound, j <= 8.
    let pic_tables = build_tables(
        &family.symbol,
        &half,
        Arc::clone(&grid),
        AmplitudeMethod::Picard {
            terms: 8,
            tol: 1e-12,
        },
        &DiagOptions::default(),
    )
    .unwrap();
    let worst_ratio = klab::verify::picard_bound_ratio(&pic_tables);
    assert!(
        worst_ratio <= 1.05,
        "picard factorial bound ratio {worst_ratio}"
    );
    report(
        4,
        "amplitude_bounds",
        format!("c = {c:.3}, sup ratio {ratio:.6}, picard bound ratio {worst_ratio:.3}"),
        t0,
        30.0,
    );
}

#[test]
fn criterion_05_nonlinear_cross_solver() {
    let t0 = Instant::now();
    let grid = grid_n1(64);
    let opts = SolverOptions {
        dt: 1e-3,
        t_final: 1.0,
        fp_tol: 1e-10,
        snapshot_times: vec![1.0],
        ..SolverOptions::default()
    };
    let norms_grid = build_grid(1, 8.0, 512, SphereRes::Two).unwrap();
    let tau = TauGrid {
        tau_max: 100.0,
        n_tau: 2001,
    };
    let mut detail = String::new();
    for (name, family) in [
        ("scalar_kirchhoff", scalar_family(0.02)),
        ("coupled", coupled_family(0.02, &grid)),
    ] {
        // Gate-passing data by construction; assert it.
        let (l2, y) = gate_value(&family.data, &norms_grid, &tau);
        let gate = classnorms::smallness_gate(l2, y, 1e-2);
        assert!(gate.pass, "{name}: acceptance data must pass the gate");

        let data = family.data.sample_on(Arc::clone(&grid));
        let direct = direct_solve(&family, &data, &opts).unwrap();
        let fp = fixed_point_solve(&family, &data, &opts, None).unwrap();
        assert!(fp.iterations <= 30, "{name}: {} iterations", fp.iterations);
        let rel = fp.fields[0].rel_l2_distance(&direct.fields[0]).unwrap();
        assert!(rel < 1e-6, "{name}: cross-solver mismatch {rel:e}");
        detail.push_str(&format!(
            "{name}: rel {rel:.2e} in {} iters; ",
            fp.iterations
        ));
    }
    report(5, "nonlinear_cross_solver", detail, t0, 300.0);
}

#[test]
fn criterion_06_hamiltonian_conservation() {
    let t0 = Instant::now();
    let family = scalar_family(0.0238); // ||grad u_0||^2 ~ 1e-3
    let grid = grid_n1(64);
    let data = family.data.sample_on(Arc::clone(&grid));
    let opts = SolverOptions {
        dt: 1e-3,
        t_final: 20.0,
        record_energy: true,
        ..SolverOptions::default()
    };
    let rec = direct_solve(&family, &data, &opts).unwrap();
    let energy = rec.energy.unwrap();
    let e0 = energy[0];
    let drift = energy
        .iter()
        .fold(0.0_f64, |a, &e| a.max((e - e0).abs() / e0));
    assert!(drift < 1e-6, "relative drift {drift:e}");
    assert!(
        (rec.trajectory.s[0] - 1e-3).abs() < 2e-4,
        "s(0) = {}",
        rec.trajectory.s[0]
    );

    // RK4 self-convergence order at the same dt scale.
    let terminal = |dt: f64| {
        let o = SolverOptions {
            dt,
            t_final: 0.5,
            snapshot_times: vec![0.5],
            ..SolverOptions::default()
        };
        direct_solve(&family, &data, &o).unwrap().fields.remove(0)
    };
    let reference = terminal(1.25e-4);
    let e1 = terminal(4e-3).rel_l2_distance(&reference).unwrap();
    let e2 = terminal(2e-3).rel_l2_distance(&reference).unwrap();
    let order = (e1 / e2).log2();
    assert!(order >= 3.8, "observed order {order}");
    report(
        6,
        "hamiltonian_conservation",
        format!("drift {drift:.2e} over [0,20], RK4 order {order:.2}"),
        t0,
        120.0,
    );
}

#[test]
fn criterion_07_sprime_split() {
    let t0 = Instant::now();
    let family = scalar_family(0.02);
    let grid = grid_n1(64);
    let data = family.data.sample_on(Arc::clone(&grid));
    let opts = SolverOptions {
        dt: 1e-3,
        t_final: 1.0,
        fp_tol: 1e-10,
        ..SolverOptions::default()
    };
    let fp = fixed_point_solve(&family, &data, &opts, None).unwrap();
    let diag_opts = SolverOptions {
        linear: LinearMethod::Representation,
        final_tables: true,
        ..opts
    };
    let rep = theta_apply(&family, &data, &fp.trajectory, &diag_opts).unwrap();
    let split = sprime_split(rep.tables.as_ref().unwrap(), &family.weight, &data).unwrap();
    let rel = split.max_mismatch / split.sprime_scale;
    assert!(rel < 1e-5, "s' split mismatch {rel:e}");
    assert!(
        split.diag_residue_max < 1e-10,
        "diagonal residue {:e}",
        split.diag_residue_max
    );
    report(
        7,
        "sprime_split",
        format!(
            "|s'_fd - 2(I+J)| rel {rel:.2e}, diag residue {:.2e}",
            split.diag_residue_max
        ),
        t0,
        60.0,
    );
}

#[test]
fn criterion_08_total_variation_scaling() {
    let t0 = Instant::now();
    let grid = grid_n1(64);
    let norms_grid = build_grid(1, 8.0, 512, SphereRes::Two).unwrap();
    let tau = TauGrid {
        tau_max: 100.0,
        n_tau: 2001,
    };
    let opts = SolverOptions {
        dt: 2e-3,
        t_final: 2.0,
        ..SolverOptions::default()
    };
    let base = 0.02;
    let mut tvs = Vec::new();
    let mut ratios = Vec::new();
    for lam_scale in [0.5, 0.25, 0.125] {
        let family = scalar_family(base * lam_scale);
        let data = family.data.sample_on(Arc::clone(&grid));
        let rec = fixed_point_solve(&family, &data, &opts, None).unwrap();
        let tv = rec.trajectory.total_variation();
        let l2 = data.l2_norm_sq().unwrap();
        let y = classnorms::y_norm(&family.data, &norms_grid, &tau).value;
        tvs.push(tv);
        ratios.push(tv / (rec.k_realized * l2 + y));
    }
    // lambda -> lambda/2 must scale TV by 4 within 20%.
    for w in tvs.windows(2) {
        let ratio = w[0] / w[1];
        assert!(
            (ratio / 4.0 - 1.0).abs() < 0.2,
            "TV scaling ratio {ratio} not within 20% of 4"
        );
    }
    let rmin = ratios.iter().cloned().fold(f64::INFINITY, f64::min);
    let rmax = ratios.iter().cloned().fold(0.0_f64, f64::max);
    assert!(
        rmax / rmin - 1.0 < 0.3,
        "core-bound ratio varies by {:.2}%",
        (rmax / rmin - 1.0) * 100.0
    );
    report(
        8,
        "total_variation_scaling",
        format!(
            "TV ratios {:.3}, {:.3} (target 4); bound ratio band {:.2}%",
            tvs[0] / tvs[1],
            tvs[1] / tvs[2],
            (rmax / rmin - 1.0) * 100.0
        ),
        t0,
        300.0,
    );
}

#[test]
fn criterion_09_class_norm_oracles() {
    let t0 = Instant::now();
    let grid = build_grid(1, 8.0, 1024, SphereRes::Two).unwrap();
    let tau = TauGrid {
        tau_max: 60.0,
        n_tau: 1201,
    };

    // Brute-force double quadrature, 10x oversampled in rho and tau, same
    // truncations.
    let oracle = |data: &DataFamily, power: &dyn Fn(usize, usize) -> i32, sphere_inside: bool| {
        let n_rho = 10 * grid.n_rho();
        let n_tau = 10 * (tau.n_tau - 1) + 1;
        let dr = grid.rho_max() / n_rho as f64;
        let dtau = 2.0 * tau.tau_max / (n_tau - 1) as f64;
        let mut total = 0.0;
        for j in 0..data.m {
            for k in 0..data.m {
                let p = power(j, k);
                let hs: Vec<Vec<C64>> = (0..grid.n_sphere())
                    .map(|q| {
                        let omega = grid.omega(q);
                        (0..=n_rho)
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
                use rayon::prelude::*;
                let acc: f64 = (0..n_tau)
                    .into_par_iter()
                    .map(|t| {
                        let tv = -tau.tau_max + t as f64 * dtau;
                        let wt = if t == 0 || t == n_tau - 1 { 0.5 } else { 1.0 };
                        let step = C64::from_polar(1.0, tv * dr);
                        let mut mod_acc = 0.0;
                        let mut cacc = C64::new(0.0, 0.0);
                        for (q, h) in hs.iter().enumerate() {
                            let mut inner = C64::new(0.0, 0.0);
                            let mut phase = C64::new(1.0, 0.0);
                            for (r, &hv) in h.iter().enumerate() {
                                let w = if r == 0 || r == n_rho { 0.5 } else { 1.0 };
                                inner += hv * phase * w;
                                phase *= step;
                            }
                            inner *= dr;
                            if sphere_inside {
                                cacc += inner * grid.sphere_weights()[q];
                            } else {
                                mod_acc += inner.norm() * grid.sphere_weights()[q];
                            }
                        }
                        (if sphere_inside { cacc.norm() } else { mod_acc }) * wt
                    })
                    .sum();
                total += acc * dtau;
            }
        }
        total
    };

    // y-norm on the plain Gaussian.
    let gauss = classnorms::gaussian(&[1.0], 1.0, 1.0);
    let y = classnorms::y_norm(&gauss, &grid, &tau).value;
    let y_oracle = oracle(&gauss, &|_, _| 1, false);
    let y_rel = (y - y_oracle).abs() / y_oracle;
    assert!(y_rel < 1e-4, "y rel {y_rel:e}");

    // Pair family with vanishing f1 at rho=0 (integrable (1,1) term).
    let pair = classnorms::gaussian_rho(&[1.0, 0.6], &[0, 1], 1.0, 1.0);
    let yt = classnorms::y_tilde_norm(&pair, &grid, &tau).unwrap().value;
    let yt_oracle = oracle(&pair, &|j, k| 1 - j as i32 - k as i32, false);
    let yt_rel = (yt - yt_oracle).abs() / yt_oracle;
    assert!(yt_rel < 1e-4, "y_tilde rel {yt_rel:e}");

    let kn = classnorms::k_norm(&pair, &grid, &tau).unwrap().value;
    let kn_oracle = oracle(&pair, &|j, k| 3 - j as i32 - k as i32, true);
    let kn_rel = (kn - kn_oracle).abs() / kn_oracle;
    assert!(kn_rel < 1e-4, "k rel {kn_rel:e}");

    // m-norm against the Gaussian closed form 35 sqrt(pi) / 16.
    let m_grid = build_grid(1, 12.0, 256, SphereRes::Two).unwrap();
    let m_val = classnorms::m_norm(&gauss, &m_grid);
    let m_exact = 35.0 * std::f64::consts::PI.sqrt() / 16.0;
    let m_rel = (m_val - m_exact).abs() / m_exact;
    assert!(m_rel < 1e-4, "m rel {m_rel:e}");

    // Quadratic homogeneity, exact to 1e-12.
    for lam in [3.0_f64, 1.0 / 7.0] {
        let scaled = gauss.with_amplitude(lam);
        let ys = classnorms::y_norm(&scaled, &grid, &tau).value;
        assert!(
            ((ys - lam * lam * y) / ys).abs() < 1e-12,
            "homogeneity at {lam}"
        );
    }
    report(
        9,
        "class_norm_oracles",
        format!("rel errs: y {y_rel:.1e}, y~ {yt_rel:.1e}, k {kn_rel:.1e}, m {m_rel:.1e}"),
        t0,
        120.0,
    );
}

#[test]
fn criterion_10_decay_exponent() {
    let t0 = Instant::now();
    // Kappa-heavy Gaussian-type member of H^1_kappa (kappa = 2): smooth
    // spectral profile rho e^{-rho^2/2}.
    let grid = build_grid(1, 8.0, 16384, SphereRes::Two).unwrap();
    let data = classnorms::gaussian_rho(&[1.0], &[1], 1.0, 1.0);
    let phi: SphereFn = Arc::new(|_| 1.0);
    let taus: Vec<f64> = (0..48)
        .map(|k| 10.0 * 100.0_f64.powf(k as f64 / 47.0))
        .collect();
    let fit = classnorms::decay_exponent_fit(&data, 0, 0, &phi, &grid, &taus).unwrap();
    assert!(fit.exponent >= 2.0, "fitted decay {}", fit.exponent);
    report(
        10,
        "decay_exponent",
        format!(
            "fitted exponent {:.3} >= 2 over tau in [10, 1e3]",
            fit.exponent
        ),
        t0,
        60.0,
    );
}

#[test]
fn criterion_11_uniqueness_probe() {
    let t0 = Instant::now();
    let grid = grid_n1(64);
    let norms_grid = build_grid(1, 8.0, 512, SphereRes::Two).unwrap();
    let tau = TauGrid {
        tau_max: 100.0,
        n_tau: 2001,
    };
    let opts = SolverOptions {
        dt: 2e-3,
        t_final: 1.0,
        fp_tol: 1e-10,
        ..SolverOptions::default()
    };
    // Gate-passing catalog entries.
    let catalog: Vec<(&str, ProblemFamily)> = vec![
        ("scalar+gaussian", scalar_family(0.02)),
        (
            "scalar+bump",
            families::scalar_kirchhoff(1, 0.5, classnorms::bump(&[1.0, 0.3], 3.0, 2.0, 0.008))
                .unwrap(),
        ),
        ("coupled+gaussian", coupled_family(0.02, &grid)),
    ];
    let mut detail = String::new();
    for (name, family) in catalog {
        let (l2, y) = gate_value(&family.data, &norms_grid, &tau);
        let gate = classnorms::smallness_gate(l2, y, 1e-2);
        assert!(
            gate.pass,
            "{name} must pass the gate (value {})",
            gate.value
        );
        let data = family.data.sample_on(Arc::clone(&grid));
        let rep = uniqueness_probe(&family, &data, &opts).unwrap();
        assert!(
            rep.max_pairwise < 10.0 * opts.fp_tol,
            "{name}: multi-start spread {:e}",
            rep.max_pairwise
        );
        detail.push_str(&format!("{name}: {:.1e}; ", rep.max_pairwise));
    }
    report(11, "uniqueness_probe", detail, t0, 300.0);
}

#[test]
fn criterion_12_determinism() {
    let t0 = Instant::now();
    let mut cfg = RunConfig::default();
    cfg.apply_text(
        "grid.n_rho = 32\ntime.horizon = 0.25\ntime.dt = 2e-3\nnorms.n_rho = 256\nnorms.tau_max = 50\nnorms.n_tau = 501\noutput.fields_times = 0.25\n",
    )
    .unwrap();
    let dir_a = tempfile::tempdir().unwrap();
    let dir_b = tempfile::tempdir().unwrap();
    run_scenario(&cfg, dir_a.path()).unwrap();
    run_scenario(&cfg, dir_b.path()).unwrap();
    let mut names = Vec::new();
    for entry in std::fs::read_dir(dir_a.path()).unwrap() {
        let name = entry.unwrap().file_name();
        let a = std::fs::read(dir_a.path().join(&name)).unwrap();
        let b = std::fs::read(dir_b.path().join(&name)).unwrap();
        assert_eq!(a, b, "artifact {name:?} not byte-identical");
        names.push(name.to_string_lossy().into_owned());
    }
    names.sort();
    report(
        12,
        "determinism",
        format!("{} artifacts byte-identical across reruns", names.len()),
        t0,
        120.0,
    );
}
