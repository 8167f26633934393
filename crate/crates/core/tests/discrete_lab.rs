use approx::assert_relative_eq;
use bfk_lab::contour::{seeley_power_discrete, ContourSpec};
use bfk_lab::discrete_lab::generator::{chain_with_potential, dirichlet_chain, random_chain, random_grid};
use bfk_lab::discrete_lab::*;
use bfk_lab::Error;
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use proptest::prelude::*;

fn c(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

#[test]
fn poisson_round_trips_harmonic_vectors() {
    let p = random_chain(21, 30);
    let z = c(-0.7);
    // Harmonic vector with arbitrary boundary data, then recover it from its traces.
    let g = DVector::from_vec(vec![c(1.3), c(-0.4)]);
    let h = poisson(&p, 0.0, z, &g).unwrap();
    let back = poisson(&p, 0.0, z, &(p.b0.map(c) * &h)).unwrap();
    assert!((back - &h).norm() < 1e-12 * h.norm());
    // Same round trip with the normal-derivative rows at t = 1.
    let h1 = poisson(&p, 1.0, z, &g).unwrap();
    let back1 = poisson(&p, 1.0, z, &(p.b1.map(c) * &h1)).unwrap();
    assert!((back1 - &h1).norm() < 1e-12 * h1.norm());
    assert!(poisson(&p, 0.3, z, &DVector::zeros(2)).unwrap().norm() == 0.0);
}

#[test]
fn resolvent_and_poisson_residuals() {
    let p = random_grid(3, 6, 5);
    let z = Complex64::new(-0.3, 0.2);
    let t = 0.4;
    let f = DVector::from_fn(p.n_interior(), |i, _| c((i as f64).sin()));
    let u = resolvent(&p, t, z, &f).unwrap();
    let sys = assemble(&p, t, z);
    let r = &sys.matrix * &u;
    let n_int = p.n_interior();
    assert!((r.rows(0, n_int) - &f).norm() <= 1e-12 * f.norm());
    assert!(r.rows(n_int, p.n_bdy).norm() <= 1e-12 * f.norm());
}

#[test]
fn assemble_midpoint_degenerate() {
    let p = random_chain(2, 9).with_b1_equal_b0();
    let s = assemble(&p, 0.5, c(-1.0));
    let n_int = p.n_interior();
    for i in 0..p.n_bdy {
        for j in 0..p.n_total {
            assert_eq!(s.matrix[(n_int + i, j)].re, p.b0[(i, j)]);
        }
    }
}

#[test]
fn q_matrix_is_symmetric_positive_on_negative_axis() {
    let p = random_chain(5, 50);
    let q = q_matrix(&p, c(-1.0)).unwrap().map(|v| v.re);
    assert!((&q - q.transpose()).norm() <= 1e-12 * q.norm());
    assert!(q.symmetric_eigenvalues().iter().all(|&l| l > 0.0));
}

#[test]
fn q_matrix_converges_to_interval_dtn() {
    // −u'' + u on [0, 1]: Q(0) = (1/sinh 1)[[cosh 1, −1], [−1, cosh 1]].
    let s = 1f64.sinh();
    let exact = DMatrix::from_row_slice(2, 2, &[1f64.cosh() / s, -1.0 / s, -1.0 / s, 1f64.cosh() / s]);
    let mut errs = Vec::new();
    for n in [41, 81, 161] {
        let p = chain_with_potential(n, 1.0, |_| 1.0);
        let q = q_matrix(&p, c(0.0)).unwrap().map(|v| v.re);
        errs.push((q - &exact).norm());
    }
    let order = (errs[1] / errs[2]).log2();
    assert!(order > 1.9 && order < 2.1, "observed order {order}, errors {errs:?}");
    let p = chain_with_potential(321, 1.0, |_| 1.0);
    let det = q_matrix(&p, c(0.0)).unwrap().map(|v| v.re).determinant();
    assert!((det - 1.0).abs() < 1e-5);
}

#[test]
fn spectrum_independent_of_t_when_degenerate() {
    let p = random_chain(7, 20).with_b1_equal_b0();
    let a = spectrum(&p, 0.0).unwrap();
    let b = spectrum(&p, 0.7).unwrap();
    for (x, y) in a.iter().zip(&b) {
        assert_relative_eq!(x.re, y.re, max_relative = 1e-12);
    }
}

#[test]
fn spectra_of_symmetric_problems_are_positive() {
    for seed in 0..5 {
        let p = random_chain(seed, 25);
        for t in [0.0, 0.5, 1.0] {
            let ev = spectrum(&p, t).unwrap();
            assert_eq!(ev.len(), p.n_interior());
            assert!(ev.iter().all(|l| l.re > 0.0 && l.im.abs() < 1e-8 * l.re), "seed {seed}, t {t}");
        }
    }
}

#[test]
fn schur_identity_on_grid() {
    let p = random_grid(12, 12, 12);
    assert_eq!(p.n_total, 192);
    let e = schur_identity_check(&p, c(-0.5)).unwrap();
    assert!(e < 1e-10, "{e}");
}

#[test]
fn schur_identity_on_chain() {
    let p = random_chain(17, 50);
    assert!(schur_identity_check(&p, c(-1.0)).unwrap() < 1e-10);
    assert!(schur_identity_check(&p.with_b1_equal_b0(), c(-1.0)).unwrap() < 1e-14);
}

#[test]
fn derivative_orders() {
    let p = random_chain(31, 40);
    for (t, z) in [(0.3, -1.0), (0.5, -2.0)] {
        let d = dt_resolvent_check(&p, t, c(z), 1e-3).unwrap();
        assert!(d.order >= 1.9, "dt order {d:?}");
        let d = dz_poisson_check(&p, t, c(z), 1e-3).unwrap();
        assert!(d.order >= 1.9, "dz order {d:?}");
    }
}

#[test]
fn matrix_log_round_trip() {
    let a = DMatrix::from_fn(5, 5, |i, j| ((i * 7 + j * 3) % 5) as f64 * 0.1 + if i == j { 2.0 } else { 0.0 });
    let m = &a * a.transpose();
    let l = matrix_log_spd(&m).unwrap();
    let back = l.exp();
    assert!((back - &m).norm() < 1e-12 * m.norm());
}

#[test]
fn interpolation_integral_matches_log_q() {
    let p = random_chain(41, 50);
    let e = interpolation_integral_check(&p, -1.0, 64).unwrap();
    assert!(e < 1e-8, "{e}");
    assert!(interpolation_integral_check(&p.with_b1_equal_b0(), -1.0, 64).unwrap() < 1e-12);
}

#[test]
fn interpolation_integral_converges_under_doubling() {
    let p = random_chain(43, 40);
    let errs: Vec<f64> = [16, 32, 64, 128].iter().map(|&n| interpolation_integral_check(&p, -1.0, n).unwrap()).collect();
    for w in errs.windows(2) {
        assert!(w[1] <= w[0] || w[1] < 1e-13, "{errs:?}");
    }
}

#[test]
fn trace_of_log_is_log_det() {
    let p = random_chain(44, 30);
    let q = q_matrix(&p, c(-2.0)).unwrap().map(|v| v.re);
    let l = matrix_log_spd(&q).unwrap();
    assert_relative_eq!(l.trace(), q.determinant().ln(), max_relative = 1e-12);
}

#[test]
fn finite_zeta_matches_dense_oracles() {
    let p = random_chain(45, 20);
    let a = p.reduced_operator(0.0).unwrap();
    let z1 = finite_zeta(&p, 0.0, c(1.0)).unwrap();
    assert_relative_eq!(z1.re, a.clone().try_inverse().unwrap().trace(), max_relative = 1e-10);
    let zm1 = finite_zeta(&p, 0.0, c(-1.0)).unwrap();
    assert_relative_eq!(zm1.re, a.trace(), max_relative = 1e-10);
}

#[test]
fn contour_zeta_difference_exact_in_finite_dimensions() {
    let p = random_chain(46, 30);
    let contour = default_contour(&p).unwrap();
    for s in [0.5, 2.0] {
        let e = contour_zeta_check(&p, c(s), &contour).unwrap();
        assert!(e < 1e-6, "s = {s}: {e}");
    }
    let d = p.with_b1_equal_b0();
    assert!(contour_zeta_check(&d, c(1.0), &default_contour(&d).unwrap()).unwrap() < 1e-10);
}

#[test]
fn resolvent_norm_has_simple_pole() {
    let p = random_chain(47, 20);
    let lam = spectrum(&p, 0.0).unwrap()[0].re;
    let mut products = Vec::new();
    for k in 2..8 {
        let d = 10f64.powi(-k) * lam;
        let r = p.resolvent_matrix(0.0, c(lam - d)).unwrap();
        let n = r.clone().svd(false, false).singular_values.max();
        products.push(n * d);
    }
    let (lo, hi) = products.iter().fold((f64::INFINITY, 0.0f64), |(a, b), &v| (a.min(v), b.max(v)));
    assert!(hi / lo < 1.01, "{products:?}");
}

#[test]
fn seeley_powers_match_functional_calculus() {
    let p = random_chain(48, 16);
    let a = p.reduced_operator(0.3).unwrap().map(c);
    let spec = {
        let lo = spectrum(&p, 0.3).unwrap()[0].norm();
        ContourSpec::with_epsilon(0.5 * lo)
    };
    let inv = seeley_power_discrete(&p, 0.3, c(1.0), &spec).unwrap();
    let exact = a.clone().try_inverse().unwrap();
    assert!((&inv - &exact).norm() < 1e-8 * exact.norm());
    let half = seeley_power_discrete(&p, 0.3, c(0.5), &spec).unwrap();
    assert!((&half * &half - &exact).norm() < 1e-8 * exact.norm());
    let id = seeley_power_discrete(&p, 0.3, c(0.0), &spec).unwrap();
    assert_eq!(id, DMatrix::identity(a.nrows(), a.nrows()));
    let too_big = ContourSpec::with_epsilon(10.0 * spec.epsilon);
    assert!(matches!(
        seeley_power_discrete(&p, 0.3, c(1.0), &too_big),
        Err(Error::SpectrumNotEnclosed(_))
    ));
}

#[test]
fn dirichlet_chain_json_and_checks() {
    let p = dirichlet_chain(7, 0.125);
    let recs = lab_records(&random_chain(3, 24), "chain-3").unwrap();
    assert!(recs.iter().all(|r| r.pass), "{recs:#?}");
    let s = serde_json::to_string(&p).unwrap();
    assert!(s.contains("\"interior_rows\""));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn schur_identity_holds(seed in 0u64..10_000, n in 5usize..120, z in -20.0f64..-0.05) {
        let p = random_chain(seed, n);
        prop_assert!(schur_identity_check(&p, c(z)).unwrap() < 1e-10);
    }

    #[test]
    fn q_symmetric_positive(seed in 0u64..10_000, n in 5usize..80, z in -50.0f64..-0.01) {
        let p = random_chain(seed, n);
        prop_assert!(q_positivity_audit(&p, &[z]).unwrap() <= 1e-12);
    }
}
