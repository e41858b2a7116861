//! Nonlinear solver cross-checks: direct method-of-lines vs fixed point,
//! conservation, contraction, scaling.

use std::sync::Arc;

use klab_core::classnorms;
use klab_core::error::Error;
use klab_core::families;
use klab_core::grid::{build_grid, FrequencyGrid, SphereRes};
use klab_core::solver::{
    contraction_factor, direct_solve, fixed_point_solve, theta_apply, uniqueness_probe,
    NonlocalTrajectory, SolverOptions,
};

fn grid1() -> Arc<FrequencyGrid> {
    Arc::new(build_grid(1, 8.0, 64, SphereRes::Two).unwrap())
}

fn scalar_family(amplitude: f64) -> families::ProblemFamily {
    let data = classnorms::gaussian(&[1.0, 0.5], 1.0, amplitude);
    families::scalar_kirchhoff(1, 0.5, data).unwrap()
}

#[test]
fn zero_data_trivial_solution() {
    let grid = grid1();
    let family = scalar_family(0.0);
    let data = family.data.sample_on(Arc::clone(&grid));
    let opts = SolverOptions {
        dt: 1e-2,
        t_final: 0.5,
        ..SolverOptions::default()
    };
    let rec = direct_solve(&family, &data, &opts).unwrap();
    assert!(rec.trajectory.s.iter().all(|&s| s == 0.0));
    let fp = fixed_point_solve(&family, &data, &opts, None).unwrap();
    assert_eq!(fp.iterations, 1);
    assert!(fp.trajectory.s.iter().all(|&s| s.abs() < 1e-15));
}

#[test]
fn theta_fixes_zero_and_ignores_input_for_constant_symbol() {
    let grid = grid1();
    // Zero data: Θ maps everything to the zero trajectory.
    let family = scalar_family(0.0);
    let data = family.data.sample_on(Arc::clone(&grid));
    let opts = SolverOptions {
        dt: 1e-2,
        t_final: 0.3,
        ..SolverOptions::default()
    };
    let s_in = NonlocalTrajectory::from_fn(0.0, 1e-2, 31, |t| 0.05 * (1.0 + t), |_| 0.05);
    let out = theta_apply(&family, &data, &s_in, &opts).unwrap();
    assert!(out.trajectory.s.iter().all(|&s| s.abs() < 1e-15));

    // Constant-in-s symbol: two different inputs give identical outputs.
    let data_fam = classnorms::gaussian(&[1.0, 0.3], 1.0, 0.05);
    let cw = families::constant_wave(1, 1.0, data_fam.clone()).unwrap();
    let cdata = data_fam.sample_on(Arc::clone(&grid));
    let s_a = NonlocalTrajectory::constant(0.0, 1e-2, 31, 0.0);
    let s_b = NonlocalTrajectory::from_fn(
        0.0,
        1e-2,
        31,
        |t| 0.3 * (1.0 + (5.0 * t).sin()) / 2.0,
        |t| 0.75 * (5.0 * t).cos(),
    );
    let out_a = theta_apply(&cw, &cdata, &s_a, &opts).unwrap();
    let out_b = theta_apply(&cw, &cdata, &s_b, &opts).unwrap();
    assert!(out_a.trajectory.sup_diff(&out_b.trajectory) < 1e-12);
    // And the realized K of the image path is 0: coefficients never read s.
    let (_, k_img) = klab_core::solver::realized_class_bounds(&cw.symbol, &out_a.trajectory, &grid);
    assert_eq!(k_img, 0.0);
}

#[test]
fn fixed_point_agrees_with_direct_on_gate_passing_data() {
    let grid = grid1();
    let family = scalar_family(0.02);
    let data = family.data.sample_on(Arc::clone(&grid));
    let opts = SolverOptions {
        dt: 1e-3,
        t_final: 1.0,
        snapshot_times: vec![1.0],
        ..SolverOptions::default()
    };
    let direct = direct_solve(&family, &data, &opts).unwrap();
    let fp = fixed_point_solve(&family, &data, &opts, None).unwrap();
    assert!(
        fp.iterations <= 30,
        "fixed point took {} iterations",
        fp.iterations
    );
    // Deltas strictly decreasing after the first iteration.
    for w in fp.convergence.windows(2).skip(1) {
        assert!(w[1] < w[0], "deltas not decreasing: {:?}", fp.convergence);
    }
    let rel = fp.fields[0].rel_l2_distance(&direct.fields[0]).unwrap();
    assert!(rel < 1e-6, "cross-solver mismatch {rel:e}");
    let s_diff = fp.trajectory.sup_diff(&direct.trajectory);
    assert!(s_diff < 1e-8, "trajectory mismatch {s_diff:e}");
}

#[test]
fn hamiltonian_conserved_and_rk4_order() {
    let grid = grid1();
    let family = scalar_family(0.02);
    let data = family.data.sample_on(Arc::clone(&grid));
    let opts = SolverOptions {
        dt: 1e-3,
        t_final: 5.0,
        record_energy: true,
        ..SolverOptions::default()
    };
    let rec = direct_solve(&family, &data, &opts).unwrap();
    let energy = rec.energy.unwrap();
    let e0 = energy[0];
    let drift = energy
        .iter()
        .fold(0.0_f64, |a, &e| a.max((e - e0).abs() / e0));
    assert!(drift < 1e-6, "energy drift {drift:e}");

    // RK4 self-convergence: error vs a dt/8 reference shrinks ~16x per halving.
    let terminal = |dt: f64| {
        let o = SolverOptions {
            dt,
            t_final: 0.5,
            snapshot_times: vec![0.5],
            ..SolverOptions::default()
        };
        direct_solve(&family, &data, &o).unwrap().fields.remove(0)
    };
    let reference = terminal(5e-4 / 4.0);
    let e1 = terminal(4e-3).rel_l2_distance(&reference).unwrap();
    let e2 = terminal(2e-3).rel_l2_distance(&reference).unwrap();
    let order = (e1 / e2).log2();
    assert!(order > 3.8, "observed RK4 order {order}");
}

#[test]
fn contraction_factor_below_one_when_gate_passes() {
    let grid = grid1();
    let family = scalar_family(0.02);
    let data = family.data.sample_on(Arc::clone(&grid));
    let opts = SolverOptions {
        dt: 2e-3,
        t_final: 1.0,
        ..SolverOptions::default()
    };
    let q = contraction_factor(&family, &data, &opts, 3).unwrap();
    assert!(q < 1.0, "contraction factor {q}");
    assert!(q > 0.0);
}

#[test]
fn oversized_data_surfaces_range_error() {
    let grid = grid1();
    // lambda^2 sqrt(pi) > delta = 0.5: the initial value itself exceeds the
    // admissible parameter range.
    let family = scalar_family(0.6);
    let data = family.data.sample_on(Arc::clone(&grid));
    let opts = SolverOptions {
        dt: 1e-3,
        t_final: 0.5,
        ..SolverOptions::default()
    };
    match fixed_point_solve(&family, &data, &opts, None) {
        Err(Error::ParameterRangeExceeded { .. }) | Err(Error::NoContraction { .. }) => {}
        Err(other) => panic!("expected divergence/range error, got {other}"),
        Ok(_) => panic!("expected divergence/range error, got convergence"),
    }
    match direct_solve(&family, &data, &opts) {
        Err(Error::ParameterRangeExceeded { .. }) => {}
        Err(other) => panic!("expected range error, got {other}"),
        Ok(_) => panic!("expected range error, got success"),
    }
}

#[test]
fn total_variation_scales_quadratically_in_amplitude() {
    let grid = grid1();
    let base = 0.02;
    let opts = SolverOptions {
        dt: 2e-3,
        t_final: 2.0,
        ..SolverOptions::default()
    };
    let mut tvs = Vec::new();
    for scale in [0.5, 0.25, 0.125] {
        let family = scalar_family(base * scale);
        let data = family.data.sample_on(Arc::clone(&grid));
        let rec = fixed_point_solve(&family, &data, &opts, None).unwrap();
        tvs.push(rec.trajectory.total_variation());
    }
    for w in tvs.windows(2) {
        let ratio = w[0] / w[1];
        assert!(
            (ratio - 4.0).abs() < 0.8,
            "quadratic scaling violated: ratio {ratio}"
        );
    }
}

#[test]
fn k_realized_bounded_by_lipschitz_times_tv() {
    let grid = grid1();
    let family = scalar_family(0.02);
    let data = family.data.sample_on(Arc::clone(&grid));
    let opts = SolverOptions {
        dt: 1e-3,
        t_final: 1.0,
        ..SolverOptions::default()
    };
    let rec = direct_solve(&family, &data, &opts).unwrap();
    let tv = rec.trajectory.total_variation();
    assert!(
        rec.k_realized <= family.symbol.lip_bound() * tv * (1.0 + 1e-6) + 1e-12,
        "K {} vs lip*TV {}",
        rec.k_realized,
        family.symbol.lip_bound() * tv
    );
}

#[test]
fn uniqueness_probe_branches_agree() {
    let grid = grid1();
    let family = scalar_family(0.02);
    let data = family.data.sample_on(Arc::clone(&grid));
    let opts = SolverOptions {
        dt: 2e-3,
        t_final: 1.0,
        fp_tol: 1e-10,
        ..SolverOptions::default()
    };
    let rep = uniqueness_probe(&family, &data, &opts).unwrap();
    assert_eq!(rep.branch_names.len(), 3);
    assert!(
        rep.max_pairwise < 10.0 * opts.fp_tol,
        "branches disagree: {:e}",
        rep.max_pairwise
    );
    assert!(rep.lipschitz_c.is_finite() && rep.lipschitz_c > 0.0);
}

#[test]
fn l2_weighted_family_cross_solver_n3() {
    // The |xi|^{-2}-weighted nonlocal variant in n = 3.
    let grid = Arc::new(
        build_grid(
            3,
            6.0,
            16,
            klab_core::grid::SphereRes::Product {
                polar: 4,
                azimuth: 8,
            },
        )
        .unwrap(),
    );
    let data_fam = classnorms::gaussian(&[1.0, 0.5], 1.0, 0.05);
    let family = families::l2_kirchhoff(3, 0.5, data_fam.clone()).unwrap();
    let data = data_fam.sample_on(Arc::clone(&grid));
    let opts = SolverOptions {
        dt: 2e-3,
        t_final: 0.5,
        snapshot_times: vec![0.5],
        ..SolverOptions::default()
    };
    let direct = direct_solve(&family, &data, &opts).unwrap();
    let fp = fixed_point_solve(&family, &data, &opts, None).unwrap();
    let rel = fp.fields[0].rel_l2_distance(&direct.fields[0]).unwrap();
    assert!(rel < 1e-6, "weighted-family mismatch {rel:e}");
    // The realized s(0) equals ||u_0||^2 = int rho^{-2} |V_1|^2 dxi.
    assert!(fp.trajectory.s[0] > 0.0);
}

#[test]
fn backward_run_restores_initial_state() {
    let grid = grid1();
    let family = scalar_family(0.02);
    let data = family.data.sample_on(Arc::clone(&grid));
    let fwd_opts = SolverOptions {
        dt: 1e-3,
        t_final: 0.5,
        snapshot_times: vec![0.5],
        ..SolverOptions::default()
    };
    let fwd = direct_solve(&family, &data, &fwd_opts).unwrap();
    let mid = fwd.fields.into_iter().next().unwrap();
    let bwd_opts = SolverOptions {
        dt: -1e-3,
        t_final: -0.5,
        snapshot_times: vec![-0.5],
        ..SolverOptions::default()
    };
    let bwd = direct_solve(&family, &mid, &bwd_opts).unwrap();
    let rel = bwd.fields[0].rel_l2_distance(&data).unwrap();
    assert!(rel < 1e-8, "time reversal mismatch {rel:e}");
}

#[test]
fn total_variation_is_additive_over_subintervals() {
    let traj = NonlocalTrajectory::from_fn(
        0.0,
        1e-2,
        201,
        |t| 0.1 * (3.0 * t).sin().abs(),
        |t| 0.3 * (3.0 * t).cos() * (3.0 * t).sin().signum(),
    );
    let mid = 100;
    let left = NonlocalTrajectory {
        t0: traj.t0,
        dt: traj.dt,
        s: traj.s[..=mid].to_vec(),
        sprime: traj.sprime[..=mid].to_vec(),
    };
    let right = NonlocalTrajectory {
        t0: traj.time(mid),
        dt: traj.dt,
        s: traj.s[mid..].to_vec(),
        sprime: traj.sprime[mid..].to_vec(),
    };
    let whole = traj.total_variation();
    let split = left.total_variation() + right.total_variation();
    assert!(
        (whole - split).abs() < 1e-12,
        "TV additivity violated: {whole} vs {split}"
    );
}

#[test]
fn fixed_point_matches_direct_at_three_times() {
    let grid = grid1();
    let family = scalar_family(0.02);
    let data = family.data.sample_on(Arc::clone(&grid));
    let opts = SolverOptions {
        dt: 1e-3,
        t_final: 2.0,
        snapshot_times: vec![0.5, 1.0, 2.0],
        ..SolverOptions::default()
    };
    let direct = direct_solve(&family, &data, &opts).unwrap();
    let fp = fixed_point_solve(&family, &data, &opts, None).unwrap();
    assert_eq!(fp.fields.len(), 3);
    for (a, b) in fp.fields.iter().zip(&direct.fields) {
        let rel = a.rel_l2_distance(b).unwrap();
        assert!(rel < 1e-6, "mismatch {rel:e} at t = {}", a.time());
    }
}
