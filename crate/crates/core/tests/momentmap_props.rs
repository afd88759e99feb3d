use std::f64::consts::PI;

use ksoliton::momentmap::reduced::{self, moment_map_pairing, weighted_total_curvature};
use ksoliton::momentmap::{
    self, check_pointwise_identities, check_tensor_rules, futaki_pairing, random_compatible_frame,
    reduced_scalar_curvature, Polynomial, ReducedKahlerStructure,
};
use proptest::prelude::*;

/// `psi = 1/u''` for `u = u0 + eps (1 - x²)²`, written out by hand.
fn bump_psi(eps: f64, x: f64) -> f64 {
    1.0 / (1.0 / (1.0 - x * x) + eps * (12.0 * x * x - 4.0))
}

#[test]
fn scalar_curvature_of_bump_matches_difference_oracle() {
    let eps = 0.01;
    let v = Polynomial(vec![eps, 0.0, -2.0 * eps, 0.0, eps]);
    let s = ReducedKahlerStructure::new(v, 0.0, 64).unwrap();
    let scal = reduced_scalar_curvature(&s);
    let h = 1e-4;
    for (x, got) in s.nodes().iter().zip(&scal) {
        let d2 = (bump_psi(eps, x + h) - 2.0 * bump_psi(eps, *x) + bump_psi(eps, x - h)) / (h * h);
        assert!((got + 0.5 * d2).abs() < 1e-5, "x={x}: {got} vs {}", -0.5 * d2);
    }
    for (x, p) in s.nodes().iter().zip(s.psi()) {
        assert!((p - bump_psi(eps, *x)).abs() < 1e-13);
    }
}

#[test]
fn weighted_total_curvature_ignores_potential() {
    let xi = 0.3;
    let base = weighted_total_curvature(&ReducedKahlerStructure::round(xi).unwrap());
    for seed in 0..20 {
        let v = reduced::random_instance(seed).v;
        let s = ReducedKahlerStructure::new(v, xi, 256).unwrap();
        let t = weighted_total_curvature(&s);
        assert!((t - base).abs() <= 1e-6 * base.abs().max(1.0), "seed {seed}: {t} vs {base}");
    }
}

/// `int_{-1}^{1} x e^{a x} dx` in closed form.
fn first_moment(a: f64) -> f64 {
    let prim = |x: f64| (a * x).exp() * (x / a - 1.0 / (a * a));
    prim(1.0) - prim(-1.0)
}

#[test]
fn round_futaki_pairing_closed_form() {
    for c in [-0.7, 0.1, 0.25, 0.5, 1.2] {
        let s = ReducedKahlerStructure::round(c).unwrap();
        let e = (-2.0 * s.theta_constant()).exp();
        let want = 8.0 * PI * e * first_moment(-2.0 * c);
        let got = futaki_pairing(&s);
        assert!((got - want).abs() < 1e-10 * want.abs(), "c={c}: {got} vs {want}");
    }
}

#[test]
fn theta_normalization() {
    for c in [-0.4, 0.0, 0.6] {
        let s = ReducedKahlerStructure::round(c).unwrap();
        let theta = s.theta();
        let ones = vec![1.0; theta.len()];
        assert!(s.xi_product(&theta, &ones).abs() < 1e-12);
    }
}

#[test]
fn standard_frame_is_exact() {
    for n in 1..=4 {
        let fr = momentmap::PointFrame::standard(n).unwrap();
        for r in check_tensor_rules(&fr) {
            assert!(r.residual < 1e-12, "n={n} {}", r.name);
        }
    }
}

#[test]
fn report_tolerances() {
    let r = momentmap::moment_map_report(4, 128, 1e-4).unwrap();
    assert!(r.passed);
    assert!(r.checks.iter().any(|c| c.name == "round-scalar-curvature"));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn frame_rules_hold(n in 1usize..=4, seed in any::<u64>()) {
        let fr = random_compatible_frame(n, seed).unwrap();
        for r in check_tensor_rules(&fr).into_iter().chain(check_pointwise_identities(&fr)) {
            prop_assert!(r.passed(), "n={} seed={} {}: {:e}", n, seed, r.name, r.residual);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn reflection_equivariance(seed in 0u64..1000) {
        let inst = reduced::random_instance(seed);
        let s = ReducedKahlerStructure::new(inst.v.clone(), inst.xi, 128).unwrap();
        let r = s.reflect().unwrap();
        let a = momentmap::modified_scalar_curvature(&s, 0.0);
        let b = momentmap::modified_scalar_curvature(&r, 0.0);
        let n = a.len();
        for i in 0..n {
            prop_assert!((a[i] - b[n - 1 - i]).abs() < 1e-9);
        }
        let p = moment_map_pairing(&s, &inst.f);
        let q = moment_map_pairing(&r, &inst.f.reflect());
        prop_assert!((p - q).abs() < 1e-9 * p.abs().max(1.0));
    }

    #[test]
    fn moment_map_property(seed in 0u64..10_000) {
        let inst = reduced::random_instance(seed);
        let s = ReducedKahlerStructure::new(inst.v, inst.xi, 256).unwrap();
        let c = momentmap::moment_map_derivative_check(&s, &inst.f, &inst.a_dir, 1e-4).unwrap();
        prop_assert!(c.rel_err <= 1e-4, "{:?}", c);
    }
}
