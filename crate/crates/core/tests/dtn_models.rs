use approx::assert_relative_eq;
use bfk_lab::discrete_lab::generator::chain_with_potential;
use bfk_lab::discrete_lab::q_matrix;
use bfk_lab::dtn_models::*;
use bfk_lab::model_geometries::{CircleModel, DiskModel, IntervalModel, Potential};
use bfk_lab::Error;
use num_complex::Complex64;
use proptest::prelude::*;

fn c(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

/// `I_ν(x)` from its power series; fine for moderate `x`.
fn bessel_i_series(nu: u32, x: f64) -> f64 {
    let mut term = (0.5 * x).powi(nu as i32) / (1..=nu).map(f64::from).product::<f64>();
    let mut sum = term;
    for k in 1..200 {
        term *= 0.25 * x * x / (k as f64 * (k + nu) as f64);
        sum += term;
        if term < 1e-18 * sum {
            break;
        }
    }
    sum
}

#[test]
fn interval_det_is_m2_minus_z() {
    let (m, l) = (1.3, 0.9);
    // 50 points from deep on the negative axis up to just below the first
    // Dirichlet eigenvalue, plus a few off the axis
    for i in 0..50 {
        let z = -1e3 + (1e3 + 1.69 + 10.0) * i as f64 / 49.0;
        let q = dtn_interval(c(z), m, l).unwrap();
        let det = q[(0, 0)] * q[(1, 1)] - q[(0, 1)] * q[(1, 0)];
        assert!((det - c(m * m - z)).norm() <= 1e-11 * (m * m - z).abs().max(1.0), "z = {z}");
    }
    for z in [Complex64::new(-3.0, 2.0), Complex64::new(0.5, -7.0)] {
        let q = dtn_interval(z, m, l).unwrap();
        let det = q[(0, 0)] * q[(1, 1)] - q[(0, 1)] * q[(1, 0)];
        assert!((det - (c(m * m) - z)).norm() < 1e-11 * z.norm().max(1.0));
    }
}

#[test]
fn interval_example_value() {
    // m = 1, L = 1: Q(0) = (1/sinh 1)[[cosh 1, −1], [−1, cosh 1]], det Q(0) = 1
    let q = dtn_interval(c(0.0), 1.0, 1.0).unwrap();
    assert_relative_eq!(q[(0, 0)].re, 1f64.cosh() / 1f64.sinh(), max_relative = 1e-14);
    assert_relative_eq!(q[(0, 1)].re, -1.0 / 1f64.sinh(), max_relative = 1e-14);
    let op = DtnOperator::Interval(IntervalModel::new(1.0, 1.0).unwrap());
    assert!(op.logdet_q(0.0).unwrap().value.abs() < 1e-14);
}

#[test]
fn cut_circle_is_two_mu_tanh() {
    for (m, l) in [(1.0, 2.0 * std::f64::consts::PI), (2.0, 1.0), (0.3, 5.0)] {
        for z in [0.0f64, -1.0, -50.0] {
            let mu = (m * m - z).sqrt();
            let v = dtn_cut_circle(c(z), m, l).unwrap();
            assert_relative_eq!(v.re, 2.0 * mu * (0.5 * mu * l).tanh(), max_relative = 1e-13);
        }
    }
}

#[test]
fn disk_zero_mode_matches_series() {
    for (m, r, z) in [(1.0f64, 1.0, 0.0f64), (2.0, 1.0, 0.0), (1.0, 1.5, -3.0)] {
        let x = (m * m - z).sqrt() * r;
        let exact = (m * m - z).sqrt() * bessel_i_series(1, x) / bessel_i_series(0, x);
        assert_relative_eq!(dtn_disk_mode(0, z, m, r), exact, max_relative = 1e-13);
    }
    // I₁(1)/I₀(1)
    assert_relative_eq!(dtn_disk_mode(0, 0.0, 1.0, 1.0), 0.446_389_965_896_534_5, max_relative = 1e-13);
}

#[test]
fn disk_modes_are_monotone() {
    let (m, r) = (1.0, 1.0);
    for z in [0.0, -10.0, -1e3] {
        let modes: Vec<f64> = (0..60).map(|n| dtn_disk_mode(n, z, m, r)).collect();
        assert!(modes.windows(2).all(|w| w[1] > w[0]), "modes increase with n at z = {z}");
        for n in [0, 1, 10, 59] {
            assert_eq!(dtn_disk_mode(n, z, m, r), dtn_disk_mode(-n, z, m, r));
            // for large n the mode approaches n/R from above
            assert!(modes[n as usize] >= n as f64 / r);
        }
    }
    for n in [0, 3, 30] {
        let vals: Vec<f64> = [0.0, -1.0, -10.0, -100.0].iter().map(|&z| dtn_disk_mode(n, z, m, r)).collect();
        assert!(vals.windows(2).all(|w| w[1] > w[0]), "mode {n} increases as z decreases");
    }
}

#[test]
fn positivity_on_every_geometry() {
    let grid = [-0.01, -0.5, -5.0, -50.0, -500.0];
    let bump = Potential::bump(1.0, 0.5, 0.2, 10.0, 201).unwrap();
    let ops = [
        DtnOperator::Interval(IntervalModel::new(1.0, 1.0).unwrap()),
        DtnOperator::Interval(IntervalModel::with_potential(1.0, 1.0, Some(bump)).unwrap()),
        DtnOperator::CutCircle(CircleModel::new(2.0, 0.5).unwrap()),
        DtnOperator::Disk(DiskModel::new(1.0, 1.0).unwrap()),
        DtnOperator::Identity,
    ];
    for op in &ops {
        let audit = positivity_selfadjointness_audit(op, &grid).unwrap();
        assert!(audit.pass, "{op:?}: {audit:?}");
        assert!(audit.min_eigenvalue > 0.0);
    }
    assert!(matches!(
        positivity_selfadjointness_audit(&ops[0], &[1.0]),
        Err(Error::ConfigInvalid(_))
    ));
}

#[test]
fn scalar_interpolation_matches_log_on_disk_modes() {
    let op = DtnOperator::Disk(DiskModel::new(1.0, 1.0).unwrap());
    for z in [0.0, -5.0] {
        assert!(scalar_mode_audit(&op, z, 100).unwrap() < 1e-10);
    }
}

#[test]
fn disk_derivative_matches_finite_difference() {
    let op = DtnOperator::Disk(DiskModel::new(1.0, 1.0).unwrap());
    for z in [-0.5f64, -5.0, -50.0] {
        let h = 1e-3 * (1.0 + z.abs());
        let fd = (op.logdet_q(z + h).unwrap().value - op.logdet_q(z - h).unwrap().value) / (2.0 * h);
        let exact = op.logdet_q_derivative(z).unwrap();
        assert!((fd - exact).abs() < 1e-6 * exact.abs(), "z = {z}: {fd} vs {exact}");
    }
}

#[test]
fn disk_logdet_stable_under_mode_doubling() {
    let op = DtnOperator::Disk(DiskModel::new(1.0, 2.0).unwrap());
    for z in [0.0, -10.0, -1e3] {
        let a = op.logdet_q_with(z, 256).unwrap();
        let b = op.logdet_q_with(z, 512).unwrap();
        assert!(b.mode_cutoff >= 2 * a.mode_cutoff.min(256));
        assert!((a.value - b.value).abs() <= a.error_estimate.max(1e-12), "z = {z}: {a:?} {b:?}");
        assert!(a.error_estimate < 1e-9);
    }
}

#[test]
fn identity_family_has_zero_log_det() {
    let op = DtnOperator::Identity;
    for z in [0.0, -1.0, -1e6] {
        assert_eq!(op.logdet_q(z).unwrap().value, 0.0);
    }
}

#[test]
fn riccati_agrees_with_closed_form_off_grid() {
    for (m, l) in [(0.5, 2.0), (3.0, 0.7)] {
        let model = IntervalModel::new(l, m).unwrap();
        for z in [0.1, -7.0, -1e5] {
            let (_, ld) = dtn_interval_ode(&model, z).unwrap();
            assert_relative_eq!(ld, (m * m - z).ln(), max_relative = 1e-9);
        }
    }
}

#[test]
fn riccati_with_potential_matches_discrete_limit() {
    let pot = Potential::bump(1.0, 0.5, 0.25, 8.0, 401).unwrap();
    let model = IntervalModel::with_potential(1.0, 1.0, Some(pot)).unwrap();
    let (q, ld) = dtn_interval_ode(&model, 0.0).unwrap();
    // second-order finite differences on two meshes, Richardson-extrapolated;
    // at z ≠ 0 the chain's boundary rows carry an O(h) term, so compare at z = 0
    let fd = |n: usize| {
        let p = chain_with_potential(n, 1.0, |x| model.q(x));
        q_matrix(&p, c(0.0)).unwrap().map(|v| v.re)
    };
    let (coarse, fine) = (fd(801), fd(1601));
    let extrap = (&fine * 4.0 - &coarse) / 3.0;
    assert!((&extrap - &q).norm() < 1e-6 * q.norm(), "{extrap} vs {q}");
    assert!((extrap.determinant().ln() - ld).abs() < 1e-6);
}

#[test]
fn eigenvalue_hit_is_reported() {
    let z = c(1.0 + std::f64::consts::PI.powi(2));
    assert!(matches!(dtn_interval(z, 1.0, 1.0), Err(Error::EigenvalueHit(_))));
    let model = IntervalModel::new(1.0, 1.0).unwrap();
    assert!(dtn_interval_ode(&model, 1.5).is_err());
}

#[test]
fn logdet_json_fields() {
    let op = DtnOperator::Disk(DiskModel::new(1.0, 1.0).unwrap());
    let v = serde_json::to_value(op.logdet_q(0.0).unwrap()).unwrap();
    for k in ["value", "mode_cutoff", "tail_model", "error_estimate"] {
        assert!(v.get(k).is_some(), "{k}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn interval_q_symmetric_positive(m in 0.1f64..4.0, l in 0.2f64..5.0, z in -1e4f64..0.0) {
        let q = dtn_interval(c(z), m, l).unwrap().map(|v| v.re);
        prop_assert!((q[(0, 1)] - q[(1, 0)]).abs() <= 1e-14 * q.norm());
        prop_assert!(q.symmetric_eigenvalues().iter().all(|&e| e > 0.0));
    }

    #[test]
    fn disk_logdet_increases_with_minus_z(m in 0.2f64..3.0, r in 0.5f64..2.0, z in -200.0f64..-0.1) {
        let op = DtnOperator::Disk(DiskModel::new(r, m).unwrap());
        let a = op.logdet_q(z).unwrap().value;
        let b = op.logdet_q(z - 1.0).unwrap().value;
        prop_assert!(b > a);
        prop_assert!(op.logdet_q_derivative(z).unwrap() < 0.0);
    }
}
