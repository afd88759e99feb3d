//! Linear torus representations: moment maps, stability and Kempf-Ness minimization.
//!
//! `(C^*)^k` acts on `C^N` with integer weights `w_i`; `e^{v}` for `v ∈ R^k`
//! scales `b_i` by `e^{<w_i, v>}`. The moment map is `mu(b) = sum |b_i|² w_i` and
//! the Kempf-Ness function `phi(v) = ½ sum |b_i|² e^{2<w_i, v>}` has gradient
//! `mu(e^v b)` and Hessian `2 sum |b_i(v)|² w_i w_i^T`.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num::complex::Complex64;
use num::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::rational::{int, nullspace, primitive_integer, rank, subsets, Rational};

pub const DEFAULT_TOL: f64 = 1e-10;
pub const MAX_ITERS: usize = 200;

#[derive(Debug, Clone, PartialEq)]
pub struct TorusRepPoint {
    k: usize,
    weights: Vec<Vec<i64>>,
    point: Vec<Complex64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RepJson {
    pub k: usize,
    pub weights: Vec<Vec<i64>>,
    pub point: Vec<[f64; 2]>,
}

impl TorusRepPoint {
    pub fn new(k: usize, weights: Vec<Vec<i64>>, point: Vec<Complex64>) -> Result<Self> {
        if k == 0 {
            return Err(Error::validation("torus rank must be positive"));
        }
        if weights.is_empty() {
            return Err(Error::validation("at least one weight is required"));
        }
        check_dim(weights.len(), point.len())?;
        for w in &weights {
            check_dim(k, w.len())?;
        }
        if point.iter().any(|b| !b.re.is_finite() || !b.im.is_finite()) {
            return Err(Error::validation("point coordinates must be finite"));
        }
        Ok(Self { k, weights, point })
    }

    /// Real point coordinates.
    pub fn real(k: usize, weights: Vec<Vec<i64>>, point: &[f64]) -> Result<Self> {
        Self::new(k, weights, point.iter().map(|&x| Complex64::new(x, 0.0)).collect())
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn weights(&self) -> &[Vec<i64>] {
        &self.weights
    }

    pub fn point(&self) -> &[Complex64] {
        &self.point
    }

    /// `e^{v} · b`.
    pub fn transport(&self, v: &[f64]) -> Result<Self> {
        check_dim(self.k, v.len())?;
        let point = self
            .weights
            .iter()
            .zip(&self.point)
            .map(|(w, b)| b * pairing(w, v).exp())
            .collect();
        Ok(Self {
            k: self.k,
            weights: self.weights.clone(),
            point,
        })
    }

    pub fn scaled(&self, t: f64) -> Self {
        Self {
            k: self.k,
            weights: self.weights.clone(),
            point: self.point.iter().map(|b| b * t).collect(),
        }
    }

    /// Multiplies each coordinate by a unit complex number.
    pub fn with_phases(&self, phases: &[f64]) -> Result<Self> {
        check_dim(self.point.len(), phases.len())?;
        Ok(Self {
            k: self.k,
            weights: self.weights.clone(),
            point: self
                .point
                .iter()
                .zip(phases)
                .map(|(b, p)| b * Complex64::from_polar(1.0, *p))
                .collect(),
        })
    }

    fn active(&self) -> Vec<&Vec<i64>> {
        self.weights
            .iter()
            .zip(&self.point)
            .filter(|(_, b)| !b.is_zero())
            .map(|(w, _)| w)
            .collect()
    }

    pub fn to_json(&self) -> RepJson {
        RepJson {
            k: self.k,
            weights: self.weights.clone(),
            point: self.point.iter().map(|b| [b.re, b.im]).collect(),
        }
    }

    pub fn from_json(j: &RepJson) -> Result<Self> {
        Self::new(
            j.k,
            j.weights.clone(),
            j.point.iter().map(|p| Complex64::new(p[0], p[1])).collect(),
        )
    }
}

fn pairing(w: &[i64], v: &[f64]) -> f64 {
    w.iter().zip(v).map(|(a, b)| *a as f64 * b).sum()
}

pub fn linear_moment_map(rp: &TorusRepPoint) -> Vec<f64> {
    let mut mu = vec![0.0; rp.k];
    for (w, b) in rp.weights.iter().zip(&rp.point) {
        let n = b.norm_sqr();
        for (m, wi) in mu.iter_mut().zip(w) {
            *m += n * *wi as f64;
        }
    }
    mu
}

pub fn kempf_ness_function(rp: &TorusRepPoint, v: &[f64]) -> f64 {
    0.5 * rp
        .weights
        .iter()
        .zip(&rp.point)
        .map(|(w, b)| b.norm_sqr() * (2.0 * pairing(w, v)).exp())
        .sum::<f64>()
}

/// Weighted Gram matrix `sum |b_i(v)|² w_i w_i^T`; the Hessian of `phi` is twice this.
pub fn gram_matrix(rp: &TorusRepPoint, v: &[f64]) -> DMatrix<f64> {
    let mut g = DMatrix::zeros(rp.k, rp.k);
    for (w, b) in rp.weights.iter().zip(&rp.point) {
        let c = b.norm_sqr() * (2.0 * pairing(w, v)).exp();
        let wv = DVector::from_iterator(rp.k, w.iter().map(|&x| x as f64));
        g += &wv * wv.transpose() * c;
    }
    g
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Stability {
    Polystable,
    SemistableNotPolystable,
    Unstable,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StabilityVerdict {
    pub verdict: Stability,
    /// A one-parameter subgroup `lambda` such that `e^{s lambda} b` has a limit
    /// outside the orbit as `s -> +inf` (zero when unstable).
    pub destabilizer: Option<Vec<i64>>,
    /// Minimizer and the zero-moment orbit point for polystable input.
    pub v_star: Option<Vec<f64>>,
    pub zero_moment_point: Option<Vec<[f64; 2]>>,
}

/// Extreme rays of the pointed cone `{lambda ∈ span(A) : <w, lambda> <= 0, w ∈ A}`.
fn destabilizing_rays(active: &[&Vec<i64>], k: usize) -> Vec<Vec<Rational>> {
    let rows: Vec<Vec<Rational>> = active.iter().map(|w| w.iter().map(|&x| int(x)).collect()).collect();
    let r = rank(&rows, k);
    if r == 0 {
        return vec![];
    }
    let perp = nullspace(&rows, k);
    let dot = |w: &[Rational], l: &[Rational]| w.iter().zip(l).fold(Rational::zero(), |a, (x, y)| a + x * y);
    let mut rays: Vec<Vec<Rational>> = Vec::new();
    for subset in subsets(rows.len(), r - 1) {
        let mut eqs: Vec<Vec<Rational>> = subset.iter().map(|&i| rows[i].clone()).collect();
        eqs.extend(perp.iter().cloned());
        let ns = nullspace(&eqs, k);
        if ns.len() != 1 {
            continue;
        }
        for sign in [1, -1] {
            let cand: Vec<Rational> = ns[0].iter().map(|x| x * int(sign)).collect();
            if rows.iter().all(|w| dot(w, &cand) <= Rational::zero()) {
                let prim = primitive_integer(&cand);
                let cand: Vec<Rational> = prim.iter().map(|&x| int(x)).collect();
                if !rays.contains(&cand) {
                    rays.push(cand);
                }
            }
        }
    }
    rays
}

/// Exact verdict: polystable iff 0 lies in the relative interior of the
/// convex hull of the active weights, unstable iff 0 is outside the hull.
pub fn polystable(rp: &TorusRepPoint) -> Result<StabilityVerdict> {
    let active = rp.active();
    let rays = destabilizing_rays(&active, rp.k);
    if rays.is_empty() {
        let v = minimize_in_span(rp, DEFAULT_TOL)?;
        let zero = rp.transport(&v)?;
        return Ok(StabilityVerdict {
            verdict: Stability::Polystable,
            destabilizer: None,
            v_star: Some(v),
            zero_moment_point: Some(zero.to_json().point),
        });
    }
    // if some lambda is negative on every active weight, so is the sum of the extreme rays
    let sum: Vec<Rational> = (0..rp.k)
        .map(|i| rays.iter().fold(Rational::zero(), |a, r| a + &r[i]))
        .collect();
    let strictly = active.iter().all(|w| {
        w.iter()
            .zip(&sum)
            .fold(Rational::zero(), |a, (x, y)| a + int(*x) * y)
            < Rational::zero()
    });
    let (verdict, lambda) = if strictly {
        (Stability::Unstable, primitive_integer(&sum))
    } else {
        (Stability::SemistableNotPolystable, primitive_integer(&rays[0]))
    };
    Ok(StabilityVerdict {
        verdict,
        destabilizer: Some(lambda),
        v_star: None,
        zero_moment_point: None,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum KempfNessResult {
    Minimizer { v: Vec<f64>, moment_norm: f64 },
    /// `phi` decreases to its infimum along this direction without attaining it.
    Divergent { direction: Vec<f64> },
}

/// Orthonormal basis (columns) of the span of the active weights.
fn span_basis(rp: &TorusRepPoint) -> DMatrix<f64> {
    let active = rp.active();
    if active.is_empty() {
        return DMatrix::zeros(rp.k, 0);
    }
    let a = DMatrix::from_fn(active.len(), rp.k, |i, j| active[i][j] as f64);
    let eig = SymmetricEigen::new(a.transpose() * a);
    let top = eig.eigenvalues.iter().copied().fold(0.0_f64, f64::max);
    let cols: Vec<DVector<f64>> = (0..rp.k)
        .filter(|&i| eig.eigenvalues[i] > 1e-9 * top)
        .map(|i| eig.eigenvectors.column(i).into_owned())
        .collect();
    if cols.is_empty() {
        DMatrix::zeros(rp.k, 0)
    } else {
        DMatrix::from_columns(&cols)
    }
}

/// Damped Newton on `phi` restricted to the span of the active weights, from `v = 0`.
fn minimize_in_span(rp: &TorusRepPoint, tol: f64) -> Result<Vec<f64>> {
    minimize_from(rp, &vec![0.0; rp.k], tol)
}

/// Newton steps stay in the span of the active weights, so the component of
/// `start` orthogonal to that span is carried through unchanged.
fn minimize_from(rp: &TorusRepPoint, start: &[f64], tol: f64) -> Result<Vec<f64>> {
    let q = span_basis(rp);
    let mut v = DVector::from_column_slice(start);
    if q.ncols() == 0 {
        return Ok(v.iter().copied().collect());
    }
    for iter in 0..=MAX_ITERS {
        let grad = DVector::from_vec(linear_moment_map(&rp.transport(v.as_slice())?));
        if grad.norm() <= tol {
            return Ok(v.iter().copied().collect());
        }
        if iter == MAX_ITERS {
            break;
        }
        let hess = q.transpose() * gram_matrix(rp, v.as_slice()) * &q * 2.0;
        let gy = q.transpose() * &grad;
        let step = hess.cholesky().map(|c| c.solve(&(-&gy))).ok_or_else(|| Error::Solver {
            iterations: iter,
            detail: "restricted Hessian is not positive definite".into(),
        })?;
        let dir = &q * step;
        let f0 = kempf_ness_function(rp, v.as_slice());
        let slope = grad.dot(&dir);
        let mut t = 1.0;
        let mut next = None;
        for _ in 0..60 {
            let trial = &v + &dir * t;
            let ft = kempf_ness_function(rp, trial.as_slice());
            let gt = DVector::from_vec(linear_moment_map(&rp.transport(trial.as_slice())?)).norm();
            if ft <= f0 + 1e-4 * t * slope || (ft <= f0 * (1.0 + 4.0 * f64::EPSILON) && gt < grad.norm()) {
                next = Some(trial);
                break;
            }
            t *= 0.5;
        }
        v = next.ok_or_else(|| Error::Solver {
            iterations: iter,
            detail: "line search failed".into(),
        })?;
    }
    Err(Error::Solver {
        iterations: MAX_ITERS,
        detail: format!("moment map norm above {tol:e}"),
    })
}

pub fn kempf_ness_minimize(rp: &TorusRepPoint, tol: f64) -> Result<KempfNessResult> {
    kempf_ness_minimize_from(rp, &vec![0.0; rp.k], tol)
}

pub fn kempf_ness_minimize_from(rp: &TorusRepPoint, start: &[f64], tol: f64) -> Result<KempfNessResult> {
    check_dim(rp.k, start.len())?;
    if !(tol > 0.0) {
        return Err(Error::validation("tolerance must be positive"));
    }
    let active = rp.active();
    let rays = destabilizing_rays(&active, rp.k);
    if !rays.is_empty() {
        let verdict = polystable(rp)?;
        let lambda = verdict.destabilizer.expect("non-polystable verdict carries a destabilizer");
        let norm = lambda.iter().map(|&x| (x * x) as f64).sum::<f64>().sqrt();
        return Ok(KempfNessResult::Divergent {
            direction: lambda.iter().map(|&x| x as f64 / norm).collect(),
        });
    }
    let v = minimize_from(rp, start, tol)?;
    let mu = linear_moment_map(&rp.transport(&v)?);
    Ok(KempfNessResult::Minimizer {
        moment_norm: mu.iter().map(|x| x * x).sum::<f64>().sqrt(),
        v,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LemmaReport {
    pub delta: f64,
    /// Sampled `sup_{|v| < delta} |Gram(v)^{-1}|` on the span of the active weights.
    pub lambda: f64,
    pub moment_norm: f64,
    pub v_star_norm: f64,
    pub applicable: bool,
    pub holds: bool,
}

const LEMMA_RANDOM_SAMPLES: usize = 2000;
const LEMMA_SEGMENT_SAMPLES: usize = 256;

/// Checks `|v*| <= lambda |mu(b)|` whenever `lambda |mu(b)| < delta` (Euclidean norms).
pub fn sze_lemma_bound_check(rp: &TorusRepPoint, delta: f64) -> Result<LemmaReport> {
    if !(delta > 0.0 && delta.is_finite()) {
        return Err(Error::validation("delta must be positive"));
    }
    let verdict = polystable(rp)?;
    if verdict.verdict != Stability::Polystable {
        return Err(Error::Precondition("the point is not polystable".into()));
    }
    let v_star = verdict.v_star.expect("polystable verdict carries a minimizer");
    let mu = linear_moment_map(rp);
    let moment_norm = mu.iter().map(|x| x * x).sum::<f64>().sqrt();
    let v_star_norm = v_star.iter().map(|x| x * x).sum::<f64>().sqrt();
    let q = span_basis(rp);
    if q.ncols() == 0 {
        return Ok(LemmaReport {
            delta,
            lambda: 0.0,
            moment_norm,
            v_star_norm,
            applicable: true,
            holds: v_star_norm == 0.0,
        });
    }
    let inv_norm = |v: &DVector<f64>| {
        let restricted = q.transpose() * gram_matrix(rp, v.as_slice()) * &q;
        let min = SymmetricEigen::new(restricted)
            .eigenvalues
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min);
        1.0 / min
    };
    let mut lambda: f64 = inv_norm(&DVector::zeros(rp.k));
    let vs = DVector::from_vec(v_star.clone());
    if v_star_norm > 0.0 {
        let reach = (v_star_norm.min(delta * (1.0 - 1e-12))) / v_star_norm;
        for i in 1..=LEMMA_SEGMENT_SAMPLES {
            let t = reach * i as f64 / LEMMA_SEGMENT_SAMPLES as f64;
            lambda = lambda.max(inv_norm(&(&vs * t)));
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let r = q.ncols();
    for _ in 0..LEMMA_RANDOM_SAMPLES {
        let y = DVector::from_fn(r, |_, _| rng.gen_range(-1.0..1.0));
        if y.norm() == 0.0 {
            continue;
        }
        let radius = delta * rng.gen_range(0.0..1.0_f64).powf(1.0 / r as f64);
        lambda = lambda.max(inv_norm(&(&q * y.normalize() * radius)));
    }
    let bound = lambda * moment_norm;
    let applicable = bound < delta;
    Ok(LemmaReport {
        delta,
        lambda,
        moment_norm,
        v_star_norm,
        applicable,
        holds: !applicable || v_star_norm <= bound * (1.0 + 1e-12) + 1e-12,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingReport {
    pub rows: Vec<(f64, Vec<f64>)>,
    pub max_deviation: f64,
}

/// `mu(t b) = t² mu(b)` for each `t`; deviations are relative to `max(1, |t² mu|)`.
pub fn scaling_expansion_check(rp: &TorusRepPoint, t_list: &[f64]) -> ScalingReport {
    let mu = linear_moment_map(rp);
    let mut rows = Vec::new();
    let mut max_deviation: f64 = 0.0;
    for &t in t_list {
        let mt = linear_moment_map(&rp.scaled(t));
        let expect: Vec<f64> = mu.iter().map(|m| t * t * m).collect();
        let scale = expect.iter().fold(1.0_f64, |a, x| a.max(x.abs()));
        let dev = mt
            .iter()
            .zip(&expect)
            .fold(0.0_f64, |a, (x, y)| a.max((x - y).abs() / scale));
        max_deviation = max_deviation.max(dev);
        rows.push((t, mt));
    }
    ScalingReport { rows, max_deviation }
}

/// Random instance with rank `k <= 3`, `N <= 6` weights in `[-2, 2]^k`, some coordinates zero.
pub fn random_rep_point(seed: u64) -> TorusRepPoint {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let k = rng.gen_range(1..=3);
    let n = rng.gen_range(1..=6);
    let weights = (0..n)
        .map(|_| (0..k).map(|_| rng.gen_range(-2..=2)).collect())
        .collect();
    let point = (0..n)
        .map(|_| {
            if rng.gen_bool(0.2) {
                Complex64::zero()
            } else {
                Complex64::new(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0))
            }
        })
        .collect();
    TorusRepPoint::new(k, weights, point).expect("generated instance is valid")
}
