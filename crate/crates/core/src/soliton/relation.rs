//! Integer relations among the components of a vector in `N ⊗ R`.
//!
//! The closure of the one-parameter subgroup generated by `xi` is a subtorus
//! whose rank is `n` minus the number of independent integer relations
//! `c · xi = 0`. Relations are searched with LLL on the lattice spanned by
//! the rows `(e_i, round(W xi_i))`, `W = 1/tol`. A reduced row is accepted as a
//! relation when its integer part is bounded by [`MAX_COEFFICIENT`] and
//! `|c · xi| <= tol max(1, |xi|_inf)`. Floating-point input cannot certify
//! irrationality, so the result is always marked heuristic.

use num::bigint::BigInt;
use num::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{check_finite, Error, Result};
use crate::rational::{rank_int, Rational};

pub const MAX_COEFFICIENT: i64 = 1_000_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KOptimality {
    /// Rank of the torus generated by `xi`.
    pub rank: usize,
    /// Independent integer relations found, each with `c · xi ≈ 0`.
    pub relations: Vec<Vec<i64>>,
    pub heuristic: bool,
}

pub fn k_optimality_check(xi: &[f64], tol: f64) -> Result<KOptimality> {
    check_finite(xi, "xi")?;
    if !(tol > 0.0 && tol < 1.0) {
        return Err(Error::validation("tolerance must lie in (0, 1)"));
    }
    let n = xi.len();
    if n == 0 {
        return Err(Error::validation("xi must be non-empty"));
    }
    let scale = xi.iter().fold(1.0_f64, |a, x| a.max(x.abs()));
    if xi.iter().all(|x| x.abs() <= tol) {
        let relations = (0..n)
            .map(|i| (0..n).map(|j| i64::from(i == j)).collect())
            .collect();
        return Ok(KOptimality {
            rank: 0,
            relations,
            heuristic: true,
        });
    }
    let w = 1.0 / tol;
    let mut basis: Vec<Vec<BigInt>> = (0..n)
        .map(|i| {
            let mut row: Vec<BigInt> = (0..n)
                .map(|j| if i == j { BigInt::one() } else { BigInt::zero() })
                .collect();
            let last = (xi[i] / scale * w).round();
            row.push(BigInt::from(last as i128));
            row
        })
        .collect();
    lll_reduce(&mut basis);

    let mut accepted: Vec<Vec<i64>> = Vec::new();
    for row in &basis {
        let Some(c) = row[..n]
            .iter()
            .map(|x| x.to_i64().filter(|v| v.abs() <= MAX_COEFFICIENT))
            .collect::<Option<Vec<i64>>>()
        else {
            continue;
        };
        if c.iter().all(|&v| v == 0) {
            continue;
        }
        let sign = c.iter().find(|&&v| v != 0).map_or(1, |v| v.signum());
        let c: Vec<i64> = c.iter().map(|v| v * sign).collect();
        let residual: f64 = c.iter().zip(xi).map(|(&a, &b)| a as f64 * b).sum();
        if residual.abs() > tol * scale {
            continue;
        }
        let mut trial = accepted.clone();
        trial.push(c.clone());
        if rank_int(&trial, n) == trial.len() {
            accepted = trial;
        }
    }
    accepted.sort();
    Ok(KOptimality {
        rank: n - accepted.len(),
        relations: accepted,
        heuristic: true,
    })
}

/// Gram-Schmidt of integer rows in exact arithmetic: returns `(mu, |b*_i|^2)`.
fn gram_schmidt(b: &[Vec<BigInt>]) -> (Vec<Vec<Rational>>, Vec<Rational>) {
    let k = b.len();
    let dim = b[0].len();
    let mut star: Vec<Vec<Rational>> = Vec::with_capacity(k);
    let mut mu = vec![vec![Rational::zero(); k]; k];
    let mut norms = Vec::with_capacity(k);
    for i in 0..k {
        let mut v: Vec<Rational> = b[i].iter().map(|x| Rational::from_integer(x.clone())).collect();
        for j in 0..i {
            let bj: &Vec<Rational> = &star[j];
            let num: Rational = b[i]
                .iter()
                .zip(bj)
                .map(|(x, y)| Rational::from_integer(x.clone()) * y)
                .fold(Rational::zero(), |a, t| a + t);
            let m = if norms[j] == Rational::zero() {
                Rational::zero()
            } else {
                num / &norms[j]
            };
            for t in 0..dim {
                v[t] = &v[t] - &m * &bj[t];
            }
            mu[i][j] = m;
        }
        let nrm = v.iter().fold(Rational::zero(), |a, x| a + x * x);
        norms.push(nrm);
        star.push(v);
    }
    (mu, norms)
}

/// Textbook LLL with `delta = 3/4`; the lattice is tiny so the orthogonal
/// data is recomputed after every change.
fn lll_reduce(b: &mut [Vec<BigInt>]) {
    let k_max = b.len();
    if k_max < 2 {
        return;
    }
    let delta = Rational::new(BigInt::from(3), BigInt::from(4));
    let half = Rational::new(BigInt::one(), BigInt::from(2));
    let (mut mu, mut norms) = gram_schmidt(b);
    let mut k = 1;
    while k < k_max {
        for j in (0..k).rev() {
            if mu[k][j].abs() > half {
                let q = mu[k][j].round().to_integer();
                let bj = b[j].clone();
                for (x, y) in b[k].iter_mut().zip(&bj) {
                    *x -= &q * y;
                }
                let gs = gram_schmidt(b);
                mu = gs.0;
                norms = gs.1;
            }
        }
        let lhs = &norms[k];
        let rhs = (&delta - &mu[k][k - 1] * &mu[k][k - 1]) * &norms[k - 1];
        if *lhs >= rhs {
            k += 1;
        } else {
            b.swap(k, k - 1);
            let gs = gram_schmidt(b);
            mu = gs.0;
            norms = gs.1;
            k = (k - 1).max(1);
        }
    }
}
