use std::f64::consts::PI;

use proptest::prelude::*;
use vns_core::elliptic::*;
use vns_core::geometry::{make_checkerboard_mu, make_patch_mu, PatchSpec};
use vns_core::random::{random_smooth_field, rng};
use vns_core::spectral::*;
use vns_core::Error;

fn grid(n: usize) -> Grid {
    Grid::standard(n).unwrap()
}

fn max_abs_diff(a: &ScalarField, b: &ScalarField) -> f64 {
    a.values()
        .iter()
        .zip(b.values())
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

fn smooth_mu(g: &Grid) -> Viscosity {
    let f = ScalarField::from_fn(g, |x, y| 1.0 + 0.4 * x.sin() * (2.0 * y).cos() + 0.2 * (x + y).cos());
    Viscosity::new(f, ViscosityBounds::new(0.4, 1.6).unwrap()).unwrap()
}

#[test]
fn bounds_validation() {
    assert!(matches!(ViscosityBounds::new(0.0, 1.0), Err(Error::InvalidBounds(_))));
    assert!(ViscosityBounds::new(2.0, 1.0).is_err());
    assert!(ViscosityBounds::new(1.0, f64::INFINITY).is_err());
    let b = ViscosityBounds::new(0.5, 2.0).unwrap();
    assert_eq!(b.ratio(), 4.0);
    assert_eq!(b.midpoint(), 1.25);
    let g = grid(16);
    let f = ScalarField::from_fn(&g, |x, _| 1.0 + 0.9 * x.sin());
    assert!(matches!(Viscosity::new(f, b), Err(Error::BoundsViolation { .. })));
}

#[test]
fn pure_riesz_factors() {
    let g = grid(32);
    let c = ScalarField::from_fn(&g, |x, _| x.cos());
    assert!(max_abs_diff(&apply_p1(&c), &c.scale(-1.0)) < 1e-14);
    assert!(linf_norm(&apply_p2(&c)) < 1e-14);
    let f = random_smooth_field(&g, &mut rng(1), 1.0);
    let id = apply_p1(&apply_p1(&f)).add(&apply_p2(&apply_p2(&f))).unwrap();
    assert!(relative_l2(&id, &f).unwrap() < 1e-12);
    // P₂ on (1, 1): symbol 2·1·1/2 = 1
    let d = ScalarField::from_fn(&g, |x, y| (x + y).sin());
    assert!(max_abs_diff(&apply_p2(&d), &d) < 1e-13);
    assert!(linf_norm(&apply_p1(&d)) < 1e-13);
}

#[test]
fn constant_viscosity_is_scalar_multiple() {
    let g = grid(32);
    let mu = Viscosity::constant(&g, 2.0).unwrap();
    let w = ScalarField::from_fn(&g, |_, y| (3.0 * y).sin());
    let a = apply_rmu(&mu, &w).unwrap();
    assert!(max_abs_diff(&a, &w.scale(2.0)) < 1e-13);
    let r = random_smooth_field(&g, &mut rng(5), 1.5);
    let (a, b) = apply_rmu_qmu(&Viscosity::constant(&g, 0.3).unwrap(), &r).unwrap();
    assert!(relative_l2(&a, &r.scale(0.3)).unwrap() < 1e-12);
    assert!(linf_norm(&b) < 1e-12 * linf_norm(&r));
}

#[test]
fn mode_coupling_example() {
    // P₁(cos x₁) = −cos x₁; μ·P₁ω has modes (±1, 0) and (±1, ±1); P₁ kills the diagonal ones.
    let g = grid(32);
    let mu = Viscosity::new(
        ScalarField::from_fn(&g, |_, y| 1.0 + 0.5 * y.cos()),
        ViscosityBounds::new(0.5, 1.5).unwrap(),
    )
    .unwrap();
    let w = ScalarField::from_fn(&g, |x, _| x.cos());
    let a = apply_rmu(&mu, &w).unwrap();
    assert!(max_abs_diff(&a, &w) < 1e-13);
}

#[test]
fn qmu_definition() {
    let g = grid(32);
    let mu = smooth_mu(&g);
    let w = random_smooth_field(&g, &mut rng(9), 2.0);
    let b = apply_qmu(&mu, &w).unwrap();
    let m = mu.field();
    let p1w = apply_p1(&w);
    let p2w = apply_p2(&w);
    let expect = apply_p1(&dealiased_product(m, &p2w).unwrap())
        .sub(&apply_p2(&dealiased_product(m, &p1w).unwrap()))
        .unwrap();
    assert!(relative_l2(&b, &expect).unwrap() < 1e-12);
    assert!(transform(&b).mean().abs() < 1e-14);
}

#[test]
fn lmu_examples() {
    let g = grid(32);
    let phi = ScalarField::from_fn(&g, |x, y| x.sin() * y.sin());
    let l = apply_lmu(&Viscosity::constant(&g, 1.0).unwrap(), &phi).unwrap();
    assert!(relative_l2(&l, &phi.scale(4.0)).unwrap() < 1e-11);
    let nu = 0.7;
    let r = random_smooth_field(&g, &mut rng(2), 3.0);
    let l = apply_lmu(&Viscosity::constant(&g, nu).unwrap(), &r).unwrap();
    let bih = inverse_transform(&laplacian(&laplacian(&transform(&r)))).scale(nu);
    assert!(relative_l2(&l, &bih).unwrap() < 1e-12);

    let mu = smooth_mu(&g);
    let lap = |f: &ScalarField| inverse_transform(&laplacian(&transform(f)));
    let l = apply_lmu(&mu, &r).unwrap();
    let via_r = lap(&apply_rmu(&mu, &lap(&r)).unwrap());
    assert!(relative_l2(&l, &via_r).unwrap() < 1e-10);
    let am = apply_amu(&mu, &r).unwrap();
    let via_q = lap(&apply_qmu(&mu, &lap(&r)).unwrap());
    assert!(relative_l2(&am, &via_q).unwrap() < 1e-10);
}

/// Closed-form `div(μSu)` for Taylor–Green `u` and `μ = 1 + ε sin x cos 2y`.
#[test]
fn decomposition_against_pointwise_evaluation() {
    let g = grid(64);
    let eps = 0.3;
    let mu_f = |x: f64, y: f64| 1.0 + eps * x.sin() * (2.0 * y).cos();
    let mu = Viscosity::new(ScalarField::from_fn(&g, mu_f), ViscosityBounds::new(0.7, 1.3).unwrap()).unwrap();
    let u = VectorField::from_fn(&g, |x, y| [x.sin() * y.cos(), -x.cos() * y.sin()]);
    let d = stress_decompose(&mu, &u).unwrap();
    assert!(d.residual < 1e-10, "residual {}", d.residual);

    // Su = [[2cos x cos y, 0], [0, −2cos x cos y]]; div(Su) = −2u
    let exact = VectorField::from_fn(&g, |x, y| {
        let m = mu_f(x, y);
        let mx = eps * x.cos() * (2.0 * y).cos();
        let my = -2.0 * eps * x.sin() * (2.0 * y).sin();
        let s = 2.0 * x.cos() * y.cos();
        let (u1, u2) = (x.sin() * y.cos(), -x.cos() * y.sin());
        [m * (-2.0 * u1) + s * mx, m * (-2.0 * u2) - s * my]
    });
    let ah = transform(&d.a);
    let bh = transform(&d.b);
    let rhs = VectorField::new(
        inverse_transform(&derivative(1, &bh).sub(&derivative(2, &ah)).unwrap()),
        inverse_transform(&derivative(1, &ah).add(&derivative(2, &bh)).unwrap()),
    )
    .unwrap();
    let err = lp_norm_vec(&rhs.sub(&exact).unwrap(), 2.0) / lp_norm_vec(&exact, 2.0);
    assert!(err < 1e-8, "error {err}");
}

#[test]
fn decomposition_trivial_cases() {
    let g = grid(32);
    let nu = Viscosity::constant(&g, 0.4).unwrap();
    let w = random_smooth_field(&g, &mut rng(4), 2.0);
    let u = biot_savart(&w).unwrap();
    let d = stress_decompose(&nu, &u).unwrap();
    assert!(d.residual < 1e-10);
    assert!(relative_l2(&d.a, &w.scale(0.4)).unwrap() < 1e-12);
    assert!(linf_norm(&d.b) < 1e-12);
    let z = stress_decompose(&nu, &VectorField::zeros(&g)).unwrap();
    assert_eq!(z.residual, 0.0);
    assert_eq!(linf_norm(&z.a), 0.0);
    let grad = gradient(&ScalarField::from_fn(&g, |x, y| x.sin() + y.cos()));
    assert!(matches!(stress_decompose(&nu, &grad), Err(Error::NotDivergenceFree(_))));
}

#[test]
fn inversion_roundtrip_and_iterations() {
    let g = grid(64);
    let nu = Viscosity::constant(&g, 0.25).unwrap();
    let a = random_smooth_field(&g, &mut rng(6), 1.0);
    let (w, rep) = invert_rmu(&nu, &a, 1e-10).unwrap();
    assert_eq!(rep.iterations, 1);
    assert!(relative_l2(&w, &a.scale(4.0)).unwrap() < 1e-12);

    let spec = PatchSpec::centered(&g, 1.0, 2.0, 0.5);
    let mu = Viscosity::new(
        make_patch_mu(&g, &spec).unwrap(),
        ViscosityBounds::new(0.5, 2.0).unwrap(),
    )
    .unwrap();
    let w0 = random_smooth_field(&g, &mut rng(7), 1.0);
    let a = apply_rmu(&mu, &w0).unwrap();
    let (w, rep) = invert_rmu(&mu, &a, 1e-10).unwrap();
    assert!(rep.converged && rep.residual <= 1e-10);
    assert!(relative_l2(&w, &w0).unwrap() < 1e-9);
    // CG bound with condition number 4: ((√κ−1)/(√κ+1))^k = 3^{−k}; 2·3^{−k} ≤ 1e−10 at k = 22
    assert!(rep.iterations <= 22, "iterations {}", rep.iterations);
}

#[test]
fn inversion_errors() {
    let g = grid(32);
    let mu = smooth_mu(&g);
    let a = random_smooth_field(&g, &mut rng(8), 1.0);
    assert!(matches!(invert_rmu(&mu, &a, 1e-3), Err(Error::InvalidArgument(_))));
    assert!(matches!(
        invert_rmu_with(&mu, &a, 1e-12, 2),
        Err(Error::NotConverged { iterations: 2, .. })
    ));
    let b = ViscosityBounds::new(0.5, 2.0).unwrap();
    assert_eq!(
        default_max_iterations(b, 1e-10),
        (10.0 * 2.0 * 1e10f64.ln()).ceil() as usize
    );
}

#[test]
fn rayleigh_bracket() {
    let g = grid(32);
    let (lo, hi) = rayleigh_bounds(&Viscosity::constant(&g, 0.3).unwrap(), 5, 1).unwrap();
    assert!((lo - 0.3).abs() < 1e-12 && (hi - 0.3).abs() < 1e-12);
    let spec = PatchSpec::centered(&g, 1.0, 2.0, 0.5);
    let mu = Viscosity::new(
        make_patch_mu(&g, &spec).unwrap(),
        ViscosityBounds::new(0.5, 2.0).unwrap(),
    )
    .unwrap();
    let (lo, hi) = rayleigh_bounds(&mu, 50, 2).unwrap();
    assert!(lo >= 0.5 && hi <= 2.0 && lo <= hi);
    assert!(hi / lo <= 4.0);
    assert!(rayleigh_bounds(&mu, 0, 2).is_err());
}

#[test]
fn probe_examples() {
    let g = grid(32);
    let one = Viscosity::constant(&g, 1.0).unwrap();
    let e = lp_norm_probe(&one, 4.0, 16, 0).unwrap();
    assert!((e - 1.0).abs() < 0.05);
    let sweep = epsilon_probe(&one, &[2.5, 4.0, 8.0], 1.05, 16, 0).unwrap();
    assert_eq!(sweep.onset, Some(8.0));
    assert_eq!(sweep.rows.len(), 3);
    assert_eq!(sweep.ensemble_size, 16);
    // K = 1 two-value field is constant
    let k1 = Viscosity::tight(make_checkerboard_mu(&g, 1.0, 4, 2.0).unwrap()).unwrap();
    assert_eq!(epsilon_probe(&k1, &[3.0, 6.0], 1.05, 16, 0).unwrap().onset, Some(6.0));

    let cb = make_checkerboard_mu(&g, 2.0, 4, 2.0).unwrap();
    let mu = Viscosity::tight(cb).unwrap();
    let e2 = lp_norm_probe(&mu, 2.0, 16, 0).unwrap();
    assert!(e2 <= 1.1 / mu.bounds().mu_lo);

    assert!(lp_norm_probe(&one, 9.0, 16, 0).is_err());
    assert!(lp_norm_probe(&one, 4.0, 8, 0).is_err());
    assert!(epsilon_probe(&one, &[], 1.0, 16, 0).is_err());
    assert!(epsilon_probe(&one, &[3.0, 2.5], 1.0, 16, 0).is_err());
    assert!(epsilon_probe(&one, &[2.0, 2.5], 1.0, 16, 0).is_err());
}

#[test]
fn probe_grows_with_p_for_two_value_field() {
    let g = grid(64);
    let mu = Viscosity::tight(make_checkerboard_mu(&g, 4.0, 4, 2.0).unwrap()).unwrap();
    let sweep = epsilon_probe(&mu, &[2.1, 2.5, 3.0, 4.0], f64::INFINITY, 16, 0).unwrap();
    let est: Vec<f64> = sweep.rows.iter().map(|r| r.estimate).collect();
    assert!(est.windows(2).all(|w| w[1] >= w[0]), "{est:?}");
}

#[test]
fn tight_and_constant_constructors() {
    let g = grid(16);
    let f = ScalarField::from_fn(&g, |x, _| 1.0 + 0.5 * (2.0 * PI * x / g.l()).cos());
    let t = Viscosity::tight(f.clone()).unwrap();
    assert_eq!(t.bounds().mu_lo, f.min());
    assert_eq!(t.bounds().mu_hi, f.max());
    assert!(Viscosity::constant(&g, -1.0).is_err());
}

fn arb_omega() -> impl Strategy<Value = ScalarField> {
    (any::<u64>(), 0.5f64..3.0).prop_map(|(s, slope)| random_smooth_field(&grid(32), &mut rng(s), slope))
}

fn arb_mu() -> impl Strategy<Value = Viscosity> {
    (any::<u64>(), 0.05f64..0.45).prop_map(|(s, amp)| {
        let g = grid(32);
        let r = random_smooth_field(&g, &mut rng(s), 3.0);
        let r = r.scale(1.0 / linf_norm(&r));
        let f = r.map(|v| 1.0 + amp * v);
        Viscosity::new(f, ViscosityBounds::new(0.5, 1.5).unwrap()).unwrap()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn riesz_factors_self_adjoint(f in arb_omega(), h in arb_omega()) {
        let scale = lp_norm(&f, 2.0) * lp_norm(&h, 2.0);
        prop_assert!((apply_p1(&f).dot(&h).unwrap() - f.dot(&apply_p1(&h)).unwrap()).abs() <= 1e-12 * scale);
        prop_assert!((apply_p2(&f).dot(&h).unwrap() - f.dot(&apply_p2(&h)).unwrap()).abs() <= 1e-12 * scale);
    }

    #[test]
    fn rmu_self_adjoint_and_bracketed(mu in arb_mu(), f in arb_omega(), h in arb_omega()) {
        let rf = apply_rmu(&mu, &f).unwrap();
        let rh = apply_rmu(&mu, &h).unwrap();
        let scale = lp_norm(&f, 2.0) * lp_norm(&h, 2.0);
        prop_assert!((rf.dot(&h).unwrap() - f.dot(&rh).unwrap()).abs() <= 1e-10 * scale);
        let b = mu.bounds();
        let q = rf.dot(&f).unwrap() / f.dot(&f).unwrap();
        prop_assert!(q >= b.mu_lo && q <= b.mu_hi);
        let ratio = lp_norm(&rf, 2.0) / lp_norm(&f, 2.0);
        prop_assert!(ratio >= b.mu_lo && ratio <= 8.0 * b.mu_hi);
    }

    #[test]
    fn inversion_roundtrip(mu in arb_mu(), w in arb_omega()) {
        let a = apply_rmu(&mu, &w).unwrap();
        let (back, rep) = invert_rmu(&mu, &a, 1e-11).unwrap();
        prop_assert!(rep.converged);
        prop_assert!(relative_l2(&back, &w).unwrap() < 1e-9);
    }

    #[test]
    fn decomposition_residual_smooth(mu in arb_mu(), w in arb_omega()) {
        let u = biot_savart(&w).unwrap();
        prop_assert!(stress_decompose(&mu, &u).unwrap().residual < 1e-8);
    }
}
