//! Modified Donaldson-Futaki invariants and the K-optimal vector.
//!
//! The discrete invariant at level `m` is
//! `DF_m(xi; lambda) = -sum_u e^{<u,xi>/m} <u,lambda> / (m h0(m))` over `mP ∩ M`.
//! As `m -> inf` it becomes the continuum value
//! `-int_P <v,lambda> e^{<v,xi>} dv / vol(P)`, which vanishes for every
//! `lambda` exactly when `xi` is the critical point of the strictly convex
//! function `F(xi) = int_P e^{<v,xi>} dv`.
//!
//! Sign convention: the weight `e^{<u,xi>/m}` is used verbatim, so the
//! K-optimal vector of CP^2 blown up at one point has negative components
//! (about `-0.5276` each). Conventions weighting by `e^{-theta}` report the
//! same magnitude with the opposite sign.

mod relation;
mod weights;

pub use relation::{k_optimality_check, KOptimality};
pub use weights::{
    df_from_weight_table, EquivariantWeightTable, TableLevelJson, TableWeightJson, WeightTableEstimate, WeightTableJson,
};

use nalgebra::{DVector, SymmetricEigen};
use num::Zero;
use serde::{Deserialize, Serialize};

use crate::character::dot;
use crate::error::{check_dim, check_finite, Error, Result};
use crate::polytope::MomentPolytope;
use crate::rational::to_f64;
use crate::stats::loglog_slope;

pub const DEFAULT_TOL: f64 = 1e-10;
pub const MAX_NEWTON_ITERS: usize = 100;

pub fn df_discrete(p: &MomentPolytope, xi: &[f64], lambda: &[i64], m: u32) -> Result<f64> {
    check_dim(p.dim(), xi.len())?;
    check_dim(p.dim(), lambda.len())?;
    check_finite(xi, "xi")?;
    let pts = p.lattice_points(m)?;
    let mf = m as f64;
    let scaled: Vec<f64> = xi.iter().map(|x| x / mf).collect();
    let w: f64 = pts
        .iter()
        .map(|u| {
            let pairing: i64 = u.iter().zip(lambda).map(|(a, b)| a * b).sum();
            dot(u, &scaled).exp() * pairing as f64
        })
        .sum();
    Ok(-w / (mf * pts.len() as f64))
}

pub fn df_continuum(p: &MomentPolytope, xi: &[f64], lambda: &[f64]) -> Result<f64> {
    check_dim(p.dim(), lambda.len())?;
    check_finite(lambda, "lambda")?;
    let em = p.exp_moments(xi)?;
    let vol = to_f64(&p.volume());
    Ok(-em.gradient.iter().zip(lambda).map(|(g, l)| g * l).sum::<f64>() / vol)
}

/// Product test configuration twisted by `mu ∈ N`.
pub fn df_product_configuration(p: &MomentPolytope, xi: &[f64], mu: &[i64]) -> Result<f64> {
    let lambda: Vec<f64> = mu.iter().map(|&x| x as f64).collect();
    df_continuum(p, xi, &lambda)
}

/// Barycenter criterion, evaluated exactly.
pub fn is_kahler_einstein(p: &MomentPolytope) -> bool {
    p.barycenter().iter().all(|c| c.is_zero())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NewtonStep {
    pub objective: f64,
    pub grad_norm: f64,
    pub min_hessian_eigenvalue: f64,
    pub step_length: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceRow {
    pub m: u32,
    pub df_discrete: f64,
    pub df_continuum: f64,
    pub gap: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolitonReport {
    pub xi_star: Vec<f64>,
    /// `max_i |DF(xi*, e_i)|` over the standard lattice basis.
    pub residual: f64,
    pub newton_iters: usize,
    pub convergence_table: Vec<ConvergenceRow>,
    pub history: Vec<NewtonStep>,
}

impl SolitonReport {
    /// Fills the convergence table for `lambda` over the given levels.
    pub fn with_convergence_table(mut self, p: &MomentPolytope, lambda: &[i64], m_list: &[u32]) -> Result<Self> {
        self.convergence_table = convergence_rows(p, &self.xi_star, lambda, m_list)?;
        Ok(self)
    }
}

pub fn convergence_rows(p: &MomentPolytope, xi: &[f64], lambda: &[i64], m_list: &[u32]) -> Result<Vec<ConvergenceRow>> {
    let lf: Vec<f64> = lambda.iter().map(|&x| x as f64).collect();
    let cont = df_continuum(p, xi, &lf)?;
    m_list
        .iter()
        .map(|&m| {
            let d = df_discrete(p, xi, lambda, m)?;
            Ok(ConvergenceRow {
                m,
                df_discrete: d,
                df_continuum: cont,
                gap: (d - cont).abs(),
            })
        })
        .collect()
}

/// Fitted log-log slope of the gaps in a convergence table.
pub fn gap_slope(rows: &[ConvergenceRow]) -> Option<f64> {
    let ms: Vec<f64> = rows.iter().map(|r| r.m as f64).collect();
    let gaps: Vec<f64> = rows.iter().map(|r| r.gap).collect();
    loglog_slope(&ms, &gaps)
}

/// Damped Newton minimization of `F(xi) = int_P e^{<v,xi>} dv` from `xi = 0`.
/// Stops when `|grad F| / vol(P) <= tol`.
pub fn k_optimal_vector(p: &MomentPolytope, tol: f64) -> Result<SolitonReport> {
    if !(tol > 0.0) || !tol.is_finite() {
        return Err(Error::validation("tolerance must be positive"));
    }
    if !p.contains_origin_in_interior() {
        return Err(Error::Precondition(
            "origin must lie in the interior of the polytope".into(),
        ));
    }
    let n = p.dim();
    let vol = to_f64(&p.volume());
    let mut xi = DVector::<f64>::zeros(n);
    let mut em = p.exp_moments(xi.as_slice())?;
    let mut history = Vec::new();
    for iter in 0..=MAX_NEWTON_ITERS {
        let grad_norm = em.gradient.norm() / vol;
        let eig = SymmetricEigen::new(em.hessian.clone()).eigenvalues;
        let min_eig = eig.iter().copied().fold(f64::INFINITY, f64::min);
        if grad_norm <= tol {
            history.push(NewtonStep {
                objective: em.value,
                grad_norm,
                min_hessian_eigenvalue: min_eig,
                step_length: 0.0,
            });
            let residual = em
                .gradient
                .iter()
                .map(|g| (g / vol).abs())
                .fold(0.0, f64::max);
            return Ok(SolitonReport {
                xi_star: xi.iter().copied().collect(),
                residual,
                newton_iters: iter,
                convergence_table: Vec::new(),
                history,
            });
        }
        if iter == MAX_NEWTON_ITERS {
            break;
        }
        let chol = em.hessian.clone().cholesky().ok_or_else(|| Error::Solver {
            iterations: iter,
            detail: format!("hessian not positive definite (min eigenvalue {min_eig:e})"),
        })?;
        let dir = chol.solve(&(-&em.gradient));
        let slope = em.gradient.dot(&dir);
        let mut t = 1.0;
        let mut accepted = None;
        for _ in 0..60 {
            let trial = &xi + &dir * t;
            let te = p.exp_moments(trial.as_slice())?;
            let armijo = te.value <= em.value + 1e-4 * t * slope;
            // in the quadratic regime the decrease drops below the resolution of F
            let roundoff = te.value <= em.value * (1.0 + 4.0 * f64::EPSILON)
                && te.gradient.norm() < em.gradient.norm();
            if armijo || roundoff {
                accepted = Some((trial, te));
                break;
            }
            t *= 0.5;
        }
        let Some((next, next_em)) = accepted else {
            return Err(Error::Solver {
                iterations: iter,
                detail: format!("line search failed at |grad|/vol = {grad_norm:e}"),
            });
        };
        history.push(NewtonStep {
            objective: em.value,
            grad_norm,
            min_hessian_eigenvalue: min_eig,
            step_length: t,
        });
        xi = next;
        em = next_em;
    }
    Err(Error::Solver {
        iterations: MAX_NEWTON_ITERS,
        detail: format!(
            "gradient norm {:e} above tolerance {tol:e} at xi = {:?}",
            em.gradient.norm() / vol,
            xi.as_slice()
        ),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::example;
    use crate::polytope::Facet;
    use crate::rational::int;

    #[test]
    fn df_discrete_on_cp1() {
        let p = example("cp1").unwrap();
        for m in [1, 2, 7] {
            assert_eq!(df_discrete(&p, &[0.0], &[1], m).unwrap(), 0.0);
        }
        let e = 1f64.exp();
        let v = df_discrete(&p, &[1.0], &[1], 1).unwrap();
        assert!((v + (e - 1.0 / e) / 3.0).abs() < 1e-14);
        assert!((v + 0.783467).abs() < 1e-6);
    }

    #[test]
    fn df_continuum_values() {
        let cp1 = example("cp1").unwrap();
        assert!((df_continuum(&cp1, &[1.0], &[1.0]).unwrap() + (-1f64).exp()).abs() < 1e-14);
        let cp2 = example("cp2").unwrap();
        assert!(df_continuum(&cp2, &[0.0, 0.0], &[2.0, -3.0]).unwrap().abs() < 1e-15);
        let bl = example("bl1cp2").unwrap();
        assert!((df_continuum(&bl, &[0.0, 0.0], &[1.0, 1.0]).unwrap() + 1.0 / 6.0).abs() < 1e-14);
        assert!((df_product_configuration(&bl, &[0.0, 0.0], &[1, 1]).unwrap() + 1.0 / 6.0).abs() < 1e-14);
    }

    #[test]
    fn kahler_einstein_detection() {
        assert!(is_kahler_einstein(&example("cp2").unwrap()));
        assert!(is_kahler_einstein(&example("p1xp1").unwrap()));
        assert!(!is_kahler_einstein(&example("bl1cp2").unwrap()));
    }

    #[test]
    fn symmetric_polytope_has_zero_vector() {
        let r = k_optimal_vector(&example("cp2").unwrap(), 1e-10).unwrap();
        assert_eq!(r.newton_iters, 0);
        assert!(r.xi_star.iter().all(|x| x.abs() <= 1e-10));
    }

    #[test]
    fn rejects_origin_outside() {
        let facets = vec![
            Facet { normal: vec![1], offset: int(1) },
            Facet { normal: vec![-1], offset: int(-2) },
        ];
        let p = MomentPolytope::from_facets(1, facets).unwrap();
        assert!(matches!(k_optimal_vector(&p, 1e-10), Err(Error::Precondition(_))));
        assert!(k_optimal_vector(&example("cp1").unwrap(), 0.0).is_err());
    }

    #[test]
    fn newton_history_is_monotone() {
        let r = k_optimal_vector(&example("bl2cp2").unwrap(), 1e-10).unwrap();
        for w in r.history.windows(2) {
            assert!(w[1].objective <= w[0].objective * (1.0 + 1e-14));
        }
        assert!(r.history.iter().all(|s| s.min_hessian_eigenvalue > 0.0));
        assert!(r.residual <= 1e-10);
    }
}
