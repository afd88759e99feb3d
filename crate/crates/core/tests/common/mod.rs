//! Independent oracles shared by the integration tests.
#![allow(dead_code)]

use ksoliton::kempfness::{Stability, TorusRepPoint};

/// Composite Simpson rule on `[a, b]` with `n` (even) panels.
pub fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    let h = (b - a) / n as f64;
    let mut s = f(a) + f(b);
    for i in 1..n {
        let x = a + i as f64 * h;
        s += if i % 2 == 1 { 4.0 * f(x) } else { 2.0 * f(x) };
    }
    s * h / 3.0
}

/// Bisection root of a sign-changing function on `[lo, hi]`.
pub fn bisect(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    let flo = f(lo);
    assert!(flo * f(hi) < 0.0, "no sign change");
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f(mid) * flo > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Root of `int_{-1}^{1} t (t + 2) e^{a t} dt = 0`, the symmetric slice of
/// CP^2 blown up at one point.
pub fn koiso_cao_oracle() -> f64 {
    let g = |a: f64| simpson(|t| t * (t + 2.0) * (a * t).exp(), -1.0, 1.0, 20_000);
    bisect(g, -2.0, 0.0)
}

/// Half-width of the integer box searched by [`brute_force_stability`].
pub const BOX: i64 = 30;

/// Stability by sweeping integer one-parameter subgroups with `|lambda|_inf <= BOX`:
/// unstable if some `lambda` is negative on every active weight, otherwise not
/// polystable if some `lambda` is nonpositive on all and negative on one.
pub fn brute_force_stability(rp: &TorusRepPoint) -> Stability {
    let active: Vec<&Vec<i64>> = rp
        .weights()
        .iter()
        .zip(rp.point())
        .filter(|(_, b)| b.norm_sqr() > 0.0)
        .map(|(w, _)| w)
        .collect();
    let k = rp.k();
    let mut lambda = vec![-BOX; k];
    let mut semistable_only = false;
    loop {
        let pairings: Vec<i64> = active
            .iter()
            .map(|w| w.iter().zip(&lambda).map(|(a, b)| a * b).sum())
            .collect();
        if !active.is_empty() && pairings.iter().all(|&p| p < 0) {
            return Stability::Unstable;
        }
        if pairings.iter().all(|&p| p <= 0) && pairings.iter().any(|&p| p < 0) {
            semistable_only = true;
        }
        let mut i = 0;
        loop {
            if i == k {
                return if semistable_only {
                    Stability::SemistableNotPolystable
                } else {
                    Stability::Polystable
                };
            }
            lambda[i] += 1;
            if lambda[i] <= BOX {
                break;
            }
            lambda[i] = -BOX;
            i += 1;
        }
    }
}

pub fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}
