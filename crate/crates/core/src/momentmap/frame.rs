//! Linear algebra of a compatible triple `(omega, J, g)` at one point.
//!
//! Index conventions: `omega[(i, j)] = omega_ij`, `j[(i, k)] = J^i_k`,
//! `a[(i, k)] = A^i_k`. The inverse tensors satisfy `omega^{kj} omega_ij = delta^k_i`
//! and `g^{kj} g_ij = delta^k_i`, i.e. `w = omega^{-T}` and `ginv = g^{-1}`.
//! Covectors act by `(J alpha)_i = alpha_m J^m_i`, a tensor `alpha ⊗ X` has
//! components `(alpha ⊗ X)^k_i = alpha_i X^k`, and the pointwise pairing of
//! endomorphisms is `(S, B) = g^{ij} g_kl S^k_i B^l_j`.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance for the algebraic identities.
pub const ALGEBRAIC_TOL: f64 = 1e-10;
/// Tolerance for the finite-difference metric variation.
pub const VARIATION_TOL: f64 = 1e-6;
pub const FD_STEP: f64 = 1e-5;

#[derive(Debug, Clone, PartialEq)]
pub struct PointFrame {
    pub omega: DMatrix<f64>,
    pub j: DMatrix<f64>,
    pub g: DMatrix<f64>,
    pub a: DMatrix<f64>,
    pub df: DVector<f64>,
    pub dtheta: DVector<f64>,
    pub xi_vec: DVector<f64>,
    pub f_val: f64,
    pub theta_val: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Residual {
    pub name: String,
    pub residual: f64,
    pub tolerance: f64,
}

impl Residual {
    fn new(name: &str, residual: f64, tolerance: f64) -> Self {
        Self {
            name: name.to_string(),
            residual,
            tolerance,
        }
    }

    pub fn passed(&self) -> bool {
        self.residual <= self.tolerance
    }
}

fn standard(n: usize) -> (DMatrix<f64>, DMatrix<f64>) {
    let mut omega = DMatrix::zeros(2 * n, 2 * n);
    let mut j = DMatrix::zeros(2 * n, 2 * n);
    for i in 0..n {
        omega[(i, n + i)] = 1.0;
        omega[(n + i, i)] = -1.0;
        j[(i, n + i)] = -1.0;
        j[(n + i, i)] = 1.0;
    }
    (omega, j)
}

impl PointFrame {
    pub fn dim(&self) -> usize {
        self.omega.nrows()
    }

    /// `omega^{kj}` as a matrix indexed `(k, j)`.
    pub fn omega_inv(&self) -> DMatrix<f64> {
        self.omega.transpose().try_inverse().expect("omega is nondegenerate")
    }

    pub fn g_inv(&self) -> DMatrix<f64> {
        self.g.clone().try_inverse().expect("g is nondegenerate")
    }

    /// Hamiltonian vector field of `f`: `X_f^k = -f_j omega^{kj}`.
    pub fn x_f(&self) -> DVector<f64> {
        -(self.omega_inv() * &self.df)
    }

    /// Standard pair on `R^{2n}` with `A = 0` and unit covectors.
    pub fn standard(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::validation("frame dimension must be positive"));
        }
        let (omega, j) = standard(n);
        let g = &omega * &j;
        let mut xi_vec = DVector::zeros(2 * n);
        xi_vec[0] = 1.0;
        let dtheta = -(omega.transpose() * &xi_vec);
        let mut df = DVector::zeros(2 * n);
        df[n] = 1.0;
        Ok(Self {
            omega,
            j,
            g,
            a: DMatrix::zeros(2 * n, 2 * n),
            df,
            dtheta,
            xi_vec,
            f_val: 1.0,
            theta_val: 0.0,
        })
    }

    /// Replace the Hamiltonian of `f` by that of `xi`, so `df = dtheta` and `X_f = xi`.
    pub fn with_f_equal_to_theta(mut self) -> Self {
        self.df = self.dtheta.clone();
        self.f_val = self.theta_val;
        self
    }

    /// Negative control: add `J` to `A`, which commutes with `J`.
    pub fn with_commuting_a(mut self) -> Self {
        self.a += &self.j;
        self
    }
}

/// Conjugates the standard pair by `P = I + 0.3 R` and draws `A` from the
/// tangent space `{JA + AJ = 0, A^T omega symmetric}` of compatible structures.
pub fn random_compatible_frame(n: usize, seed: u64) -> Result<PointFrame> {
    if n == 0 {
        return Err(Error::validation("frame dimension must be positive"));
    }
    let d = 2 * n;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut uniform = |rows: usize, cols: usize| DMatrix::from_fn(rows, cols, |_, _| rng.gen_range(-1.0..1.0));
    let (omega0, j0) = standard(n);
    let (p, p_inv) = loop {
        let p = DMatrix::identity(d, d) + uniform(d, d) * 0.3;
        if let Some(inv) = p.clone().try_inverse() {
            if p.norm() * inv.norm() < 1e3 {
                break (p, inv);
            }
        }
    };
    let omega = p.transpose() * &omega0 * &p;
    let j = &p_inv * &j0 * &p;
    let g = p.transpose() * &p;
    // S symmetric and J0-anticommuting, so A0 = -J0 S anticommutes with J0 and A0^T omega0 = S
    let r = uniform(d, d);
    let r = (&r + r.transpose()) * 0.5;
    let s = (&r + &j0 * &r * &j0) * 0.5;
    let a0 = -(&j0 * s);
    let a = &p_inv * a0 * &p;
    let xi_vec = DVector::from_iterator(d, uniform(d, 1).iter().copied());
    let df = DVector::from_iterator(d, uniform(d, 1).iter().copied());
    let dtheta = -(omega.transpose() * &xi_vec);
    let vals = uniform(2, 1);
    Ok(PointFrame {
        omega,
        j,
        g,
        a,
        df,
        dtheta,
        xi_vec,
        f_val: vals[0],
        theta_val: vals[1],
    })
}

fn max_abs(m: &DMatrix<f64>) -> f64 {
    m.iter().fold(0.0, |a, x| a.max(x.abs()))
}

fn max_abs_v(v: &DVector<f64>) -> f64 {
    v.iter().fold(0.0, |a, x| a.max(x.abs()))
}

/// Residuals of the basic index rules, one entry per sub-rule.
pub fn check_tensor_rules(fr: &PointFrame) -> Vec<Residual> {
    let d = fr.dim();
    let id = DMatrix::<f64>::identity(d, d);
    let (om, j, g, a) = (&fr.omega, &fr.j, &fr.g, &fr.a);
    let w = fr.omega_inv();
    let gi = fr.g_inv();
    let x = fr.x_f();
    let df = &fr.df;
    let ja = j * a;
    let tol = ALGEBRAIC_TOL;
    let pair = |l: &DMatrix<f64>, r1: &DMatrix<f64>, r2: &DMatrix<f64>| max_abs(&(l - r1)).max(max_abs(&(l - r2)));
    let pair_v = |l: &DVector<f64>, r1: &DVector<f64>, r2: &DVector<f64>| {
        max_abs_v(&(l - r1)).max(max_abs_v(&(l - r2)))
    };
    vec![
        Residual::new("A(a)", max_abs(&(om + om.transpose())), tol),
        Residual::new("A(b)", max_abs(&(j * j + &id)), tol),
        Residual::new("A(c)", max_abs(&(g - g.transpose())), tol),
        // omega_ij = g_pj J^p_i = -g_ip J^p_j
        Residual::new("B(a)", pair(om, &(j.transpose() * g), &-(g * j)), tol),
        // g_ij = omega_iq J^q_j = -omega_qj J^q_i
        Residual::new("B(b)", pair(g, &(om * j), &-(j.transpose() * om)), tol),
        // omega^{kj} = -g^{qj} J^k_q = g^{kq} J^j_q = -omega^{jk}
        Residual::new(
            "C(a)",
            pair(&w, &-(j * &gi), &(&gi * j.transpose())).max(max_abs(&(&w + w.transpose()))),
            tol,
        ),
        // g^{kj} = omega^{pj} J^k_p = -omega^{kp} J^j_p = g^{jk}
        Residual::new(
            "C(b)",
            pair(&gi, &(j * &w), &-(&w * j.transpose())).max(max_abs(&(&gi - gi.transpose()))),
            tol,
        ),
        Residual::new(
            "D(a)",
            max_abs(&(&w * om.transpose() - &id)).max(max_abs(&(w.transpose() * om - &id))),
            tol,
        ),
        Residual::new(
            "D(b)",
            max_abs(&(&gi * g.transpose() - &id)).max(max_abs(&(gi.transpose() * g - &id))),
            tol,
        ),
        // f_j = -X^i omega_ij = X^i g_pi J^p_j = -X^i J^p_i g_pj
        Residual::new(
            "E",
            pair_v(df, &-(om.transpose() * &x), &(j.transpose() * (g * &x))).max(max_abs_v(
                &(df + g.transpose() * (j * &x)),
            )),
            tol,
        ),
        // X^k = -f_j omega^{kj} = f_j g^{qj} J^k_q = -f_j J^j_q g^{qk}
        Residual::new(
            "F",
            pair_v(&x, &-(&w * df), &(j * (&gi * df))).max(max_abs_v(&(&x + gi.transpose() * (j.transpose() * df)))),
            tol,
        ),
        Residual::new("G(a)", max_abs(&(&ja + a * j)), tol),
        Residual::new("G(b)", max_abs(&(a.transpose() * om - om.transpose() * a)), tol),
        // g^{ij} g_kl (JA)^l_j = (JA)^i_k
        Residual::new("H", max_abs(&(&gi * ja.transpose() * g - &ja)), tol),
    ]
}

/// `(S, B) = g^{ij} g_kl S^k_i B^l_j`.
fn pairing(ginv: &DMatrix<f64>, g: &DMatrix<f64>, s: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    (ginv.component_mul(&(s.transpose() * g * b))).sum()
}

/// `(alpha ⊗ X)^k_i = alpha_i X^k`.
fn tensor(alpha: &DVector<f64>, x: &DVector<f64>) -> DMatrix<f64> {
    x * alpha.transpose()
}

fn relative(l: f64, r: f64) -> f64 {
    (l - r).abs() / 1f64.max(l.abs()).max(r.abs())
}

/// Compatible path through `J` with initial velocity `A`: `J_t = J exp(-t JA)`.
pub fn compatible_path(fr: &PointFrame, t: f64) -> DMatrix<f64> {
    let ja = &fr.j * &fr.a;
    &fr.j * (ja * -t).exp()
}

fn central_richardson(phi: impl Fn(f64) -> f64, h: f64) -> f64 {
    let d = |h: f64| (phi(h) - phi(-h)) / (2.0 * h);
    (4.0 * d(h / 2.0) - d(h)) / 3.0
}

/// Two-sided comparison of the integrand identities, each paired against `JA`.
pub fn check_pointwise_identities(fr: &PointFrame) -> Vec<Residual> {
    let ginv = fr.g_inv();
    let w = fr.omega_inv();
    let (j, g, a) = (&fr.j, &fr.g, &fr.a);
    let ja = j * a;
    let p = |s: &DMatrix<f64>| pairing(&ginv, g, s, &ja);
    let x = fr.x_f();
    let (dth, df, xi) = (&fr.dtheta, &fr.df, &fr.xi_vec);
    let jcov = |alpha: &DVector<f64>| j.transpose() * alpha;
    let f = fr.f_val;

    let m1 = p(&tensor(&jcov(dth), &x));
    let m1_rhs = -(dth.transpose() * &w * a.transpose() * df)[(0, 0)];
    let m2 = -p(&tensor(dth, &(j * &x)));
    let m3 = p(&tensor(&jcov(df), xi));
    let m4 = -p(&tensor(df, &(j * xi)));
    let m5 = f * p(&tensor(&jcov(dth), xi));
    let m5_rhs = -f * (dth.transpose() * a * xi)[(0, 0)];
    let m6 = -p(&tensor(&(dth * f), &(j * xi)));

    let metric = |t: f64| {
        let jt = compatible_path(fr, t);
        let gt = &fr.omega * jt;
        let gti = gt.try_inverse().expect("compatible metric is invertible");
        (dth.transpose() * gti * df)[(0, 0)]
    };
    let metric_variation = central_richardson(metric, FD_STEP);
    let xi_action = |t: f64| -(dth.transpose() * compatible_path(fr, t) * xi)[(0, 0)];
    let xi_variation = central_richardson(xi_action, FD_STEP);

    let tol = ALGEBRAIC_TOL;
    vec![
        Residual::new("moment1", relative(m1, m1_rhs), tol),
        Residual::new("moment1-variation", relative(metric_variation, m1_rhs), VARIATION_TOL),
        Residual::new("moment2", relative(m2, m1), tol),
        Residual::new("moment3", relative(m3, m2), tol),
        Residual::new("moment4", relative(m4, m3), tol),
        Residual::new("moment5", relative(m5, m5_rhs), tol),
        Residual::new("moment5-variation", relative(f * xi_variation, m5_rhs), VARIATION_TOL),
        Residual::new("moment6", relative(m6, m5), tol),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn standard_frame_is_exact() {
        let fr = PointFrame::standard(2).unwrap();
        for r in check_tensor_rules(&fr) {
            assert_eq!(r.residual, 0.0, "{}", r.name);
        }
        for r in check_pointwise_identities(&fr) {
            assert!(r.residual < 1e-14, "{} {}", r.name, r.residual);
        }
    }

    #[test]
    fn random_frames_satisfy_rules() {
        let fr = random_compatible_frame(1, 7).unwrap();
        assert!(max_abs(&(&fr.j * &fr.j + DMatrix::identity(2, 2))) < 1e-14);
        for n in 1..=4 {
            for seed in 0..10 {
                let fr = random_compatible_frame(n, seed).unwrap();
                for r in check_tensor_rules(&fr).into_iter().chain(check_pointwise_identities(&fr)) {
                    assert!(r.passed(), "n={n} seed={seed} {} {}", r.name, r.residual);
                }
            }
        }
        assert!(random_compatible_frame(0, 1).is_err());
    }

    #[test]
    fn seeded_frames_are_deterministic() {
        assert_eq!(random_compatible_frame(3, 42).unwrap(), random_compatible_frame(3, 42).unwrap());
        assert_ne!(random_compatible_frame(3, 42).unwrap(), random_compatible_frame(3, 43).unwrap());
    }

    #[test]
    fn commuting_perturbation_breaks_rule_g() {
        let fr = random_compatible_frame(2, 3).unwrap().with_commuting_a();
        let rules = check_tensor_rules(&fr);
        let g = rules.iter().find(|r| r.name == "G(a)").unwrap();
        assert!(g.residual > 1e-3);
    }

    #[test]
    fn path_stays_compatible() {
        let fr = random_compatible_frame(2, 11).unwrap();
        let jt = compatible_path(&fr, 0.3);
        assert!(max_abs(&(&jt * &jt + DMatrix::identity(4, 4))) < 1e-12);
        let gt = &fr.omega * &jt;
        assert!(max_abs(&(&gt - gt.transpose())) < 1e-12);
    }
}
