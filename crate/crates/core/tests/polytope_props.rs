mod common;

use ksoliton::catalog::{example, NAMES};
use ksoliton::character::{character_value, characters_equal, hilbert_character};
use ksoliton::rational::to_f64;
use ksoliton::soliton::df_continuum;
use ksoliton::MomentPolytope;
use proptest::prelude::*;

use common::simpson;

/// Lattice points of `mP` counted by scanning a box against the facet inequalities.
fn box_count(p: &MomentPolytope, m: u32) -> usize {
    let r = p
        .vertices_f64()
        .iter()
        .flatten()
        .fold(0.0f64, |a, x| a.max(x.abs()))
        .ceil() as i64
        * m as i64;
    let n = p.dim();
    let mut u = vec![-r; n];
    let mut count = 0;
    loop {
        let inside = p.facets().iter().all(|f| {
            let pairing: i64 = f.normal.iter().zip(&u).map(|(a, b)| a * b).sum();
            pairing as f64 >= to_f64(&f.offset) * m as f64 - 1e-9
        });
        count += inside as usize;
        let mut i = 0;
        loop {
            if i == n {
                return count;
            }
            u[i] += 1;
            if u[i] <= r {
                break;
            }
            u[i] = -r;
            i += 1;
        }
    }
}

fn unimodular(n: usize, ops: &[(usize, usize, i64)]) -> Vec<Vec<i64>> {
    let mut u: Vec<Vec<i64>> = (0..n).map(|i| (0..n).map(|j| (i == j) as i64).collect()).collect();
    for &(i, j, k) in ops {
        let (i, j) = (i % n, j % n);
        if i == j {
            continue;
        }
        for c in 0..n {
            u[i][c] += k * u[j][c];
        }
    }
    u
}

fn apply(u: &[Vec<i64>], x: &[f64]) -> Vec<f64> {
    u.iter().map(|r| r.iter().zip(x).map(|(a, b)| *a as f64 * b).sum()).collect()
}

fn apply_transpose(u: &[Vec<i64>], x: &[f64]) -> Vec<f64> {
    (0..u.len()).map(|j| (0..u.len()).map(|i| u[i][j] as f64 * x[i]).sum()).collect()
}

fn two_dim() -> impl Strategy<Value = &'static str> {
    prop::sample::select(vec!["cp2", "p1xp1", "bl1cp2", "bl2cp2", "dp6"])
}

#[test]
fn lattice_counts_match_box_scan() {
    for name in NAMES {
        let p = example(name).unwrap();
        for m in 1..=4 {
            assert_eq!(p.lattice_points(m).unwrap().len(), box_count(&p, m), "{name} m={m}");
        }
    }
}

#[test]
fn known_volumes_and_barycenters() {
    let expect = [("cp1", 2.0), ("cp2", 4.5), ("p1xp1", 4.0), ("bl1cp2", 4.0), ("bl2cp2", 3.5), ("dp6", 3.0)];
    for (name, vol) in expect {
        let p = example(name).unwrap();
        assert_eq!(to_f64(&p.volume()), vol, "{name}");
    }
    let b = example("bl1cp2").unwrap().barycenter();
    assert_eq!(to_f64(&b[0]), to_f64(&b[1]));
    // the cut corner is (-1, -1), pushing the barycenter off the origin
    assert!(to_f64(&b[0]) > 0.0);
}

#[test]
fn exp_integral_matches_quadrature_on_triangle() {
    let p = example("cp2").unwrap();
    let xi = [0.7, -0.4];
    let inner = |x: f64| simpson(|y| (xi[0] * x + xi[1] * y).exp(), -1.0, 1.0 - x, 400);
    let oracle = simpson(inner, -1.0, 2.0, 400);
    let em = p.exp_moments(&xi).unwrap();
    assert!((em.value - oracle).abs() < 1e-9 * oracle, "{} vs {oracle}", em.value);
}

#[test]
fn character_counts_and_equality() {
    let cp1 = example("cp1").unwrap();
    for m in 1..=50 {
        assert_eq!(hilbert_character(&cp1, m).unwrap().total(), 2 * m as u64 + 1);
    }
    let a = hilbert_character(&example("bl1cp2").unwrap(), 2).unwrap();
    let swapped = hilbert_character(
        &ksoliton::anticanonical_polytope(&[vec![0, 1], vec![1, 0], vec![-1, -1], vec![1, 1]]).unwrap(),
        2,
    )
    .unwrap();
    assert!(characters_equal(&a, &swapped, false).unwrap());
    let sheared = example("bl1cp2").unwrap().transform_unimodular(&[vec![1, 1], vec![0, 1]]).unwrap();
    let b = hilbert_character(&sheared, 2).unwrap();
    assert_eq!(a.total(), b.total());
    let p1 = hilbert_character(&example("p1xp1").unwrap(), 2).unwrap();
    assert!(!characters_equal(&a, &p1, true).unwrap());
    assert!(!characters_equal(&a, &hilbert_character(&cp1, 2).unwrap(), false).unwrap());
    assert!(characters_equal(&a, &hilbert_character(&cp1, 3).unwrap(), false).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn unimodular_equivariance(
        name in two_dim(),
        ops in prop::collection::vec((0usize..2, 0usize..2, -2i64..=2), 0..4),
        xi in prop::collection::vec(-1.5f64..1.5, 2),
    ) {
        let p = example(name).unwrap();
        let u = unimodular(2, &ops);
        let q = p.transform_unimodular(&u).unwrap();
        prop_assert_eq!(p.volume(), q.volume());
        for m in 1..=3 {
            prop_assert_eq!(p.lattice_points(m).unwrap().len(), q.lattice_points(m).unwrap().len());
        }
        let bp: Vec<f64> = p.barycenter().iter().map(to_f64).collect();
        let bq: Vec<f64> = q.barycenter().iter().map(to_f64).collect();
        let moved = apply(&u, &bp);
        for (a, b) in moved.iter().zip(&bq) {
            prop_assert!((a - b).abs() < 1e-12);
        }
        // int_{UP} e^{<w, xi>} dw = int_P e^{<u, U^T xi>} du
        let fq = q.exp_moments(&xi).unwrap().value;
        let fp = p.exp_moments(&apply_transpose(&u, &xi)).unwrap().value;
        prop_assert!((fq - fp).abs() <= 1e-9 * fp.abs().max(1.0));
    }

    #[test]
    fn exp_gradient_and_hessian_match_differences(
        name in prop::sample::select(NAMES.to_vec()),
        seed in prop::collection::vec(-1.5f64..1.5, 2),
    ) {
        let p = example(name).unwrap();
        let n = p.dim();
        let xi: Vec<f64> = seed[..n].to_vec();
        let em = p.exp_moments(&xi).unwrap();
        let h = 1e-5;
        for i in 0..n {
            let mut up = xi.clone();
            let mut dn = xi.clone();
            up[i] += h;
            dn[i] -= h;
            let eu = p.exp_moments(&up).unwrap();
            let ed = p.exp_moments(&dn).unwrap();
            let fd = (eu.value - ed.value) / (2.0 * h);
            prop_assert!((fd - em.gradient[i]).abs() <= 1e-6 * em.gradient[i].abs().max(1.0));
            for j in 0..n {
                let fd = (eu.gradient[j] - ed.gradient[j]) / (2.0 * h);
                prop_assert!((fd - em.hessian[(i, j)]).abs() <= 1e-6 * em.hessian[(i, j)].abs().max(1.0));
            }
        }
    }

    #[test]
    fn df_continuum_is_linear_and_matches_barycenter(
        name in two_dim(),
        xi in prop::collection::vec(-1.0f64..1.0, 2),
        l1 in prop::collection::vec(-3.0f64..3.0, 2),
        l2 in prop::collection::vec(-3.0f64..3.0, 2),
        a in -2.0f64..2.0,
    ) {
        let p = example(name).unwrap();
        let comb: Vec<f64> = l1.iter().zip(&l2).map(|(x, y)| a * x + y).collect();
        let lhs = df_continuum(&p, &xi, &comb).unwrap();
        let rhs = a * df_continuum(&p, &xi, &l1).unwrap() + df_continuum(&p, &xi, &l2).unwrap();
        prop_assert!((lhs - rhs).abs() <= 1e-10 * (1.0 + lhs.abs()));
        let b: Vec<f64> = p.barycenter().iter().map(to_f64).collect();
        let at_zero = df_continuum(&p, &[0.0, 0.0], &l1).unwrap();
        let expect = -(b[0] * l1[0] + b[1] * l1[1]);
        prop_assert!((at_zero - expect).abs() <= 1e-12 * (1.0 + expect.abs()));
    }

    #[test]
    fn character_value_at_zero_is_count(name in prop::sample::select(NAMES.to_vec()), m in 1u32..5) {
        let p = example(name).unwrap();
        let chi = hilbert_character(&p, m).unwrap();
        let v = character_value(&chi, &vec![0.0; p.dim()]).unwrap();
        prop_assert_eq!(v, chi.total() as f64);
    }
}
