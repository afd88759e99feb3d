//! Circle-invariant Kähler structures on S² in action-angle coordinates.
//!
//! With moment coordinate `x ∈ [-1, 1]`, angle `phi` and `omega = dx ∧ dphi`
//! (area `4 pi`), an invariant compatible structure is fixed by a strictly
//! convex symplectic potential `u = u0 + v`, `u0 = ½[(1-x)ln(1-x) + (1+x)ln(1+x)]`,
//! with `v` smooth up to the poles. Writing `q = 1 - x²` and `psi = 1/u''`:
//!
//! * `psi = q / (1 + q v'')`, `g = u'' dx² + psi dphi²`,
//!   `J = [[0, -psi], [1/psi, 0]]` in the basis `(∂x, ∂phi)`;
//! * scalar curvature `s = -½ psi''`, equal to 1 for `v = 0`;
//! * the Laplacian is `Δh = -(psi h')'`;
//! * for `xi = c ∂phi` the Hamiltonian is `theta = c x + k`, and
//!   `(J xi) theta' = 2 c² psi` with `theta' = -2 theta`.
//!
//! Hence `s_{xi,zeta} = s - 1 + 2c psi' - 2c² psi + 2 theta_xi + 2 theta_zeta`.
//! Polynomials are stored as monomial coefficients so `psi'` and `psi''` are
//! evaluated from exact derivatives of `v`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{check_finite, Error, Result};

pub const DEFAULT_NODES: usize = 256;
pub const DEFAULT_STEP: f64 = 1e-4;
pub const GEOMETRIC_TOL: f64 = 1e-4;

/// Extra convexity probes between the quadrature nodes and at the poles.
const CONVEXITY_SAMPLES: usize = 513;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Polynomial(pub Vec<f64>);

impl Polynomial {
    pub fn zero() -> Self {
        Polynomial(vec![])
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.0.iter().rev().fold(0.0, |acc, c| acc * x + c)
    }

    pub fn derivative(&self) -> Self {
        Polynomial(
            self.0
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, c)| k as f64 * c)
                .collect(),
        )
    }

    pub fn nth_derivative(&self, n: usize) -> Self {
        (0..n).fold(self.clone(), |p, _| p.derivative())
    }

    pub fn add_scaled(&self, other: &Self, t: f64) -> Self {
        let len = self.0.len().max(other.0.len());
        Polynomial(
            (0..len)
                .map(|k| self.0.get(k).copied().unwrap_or(0.0) + t * other.0.get(k).copied().unwrap_or(0.0))
                .collect(),
        )
    }

    /// `p(-x)`.
    pub fn reflect(&self) -> Self {
        Polynomial(
            self.0
                .iter()
                .enumerate()
                .map(|(k, c)| if k % 2 == 1 { -c } else { *c })
                .collect(),
        )
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|c| *c == 0.0)
    }
}

/// Gauss-Legendre nodes and weights on `[-1, 1]`, nodes increasing.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n {
        let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            if n == 1 {
                p0 = 1.0;
            }
            dp = n as f64 * (z * p1 - p0) / (z * z - 1.0);
            let dz = p1 / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[n - 1 - i] = z;
        w[n - 1 - i] = 2.0 / ((1.0 - z * z) * dp * dp);
    }
    (x, w)
}

/// `k` with `int (c x + k) e^{-2(c x + k)} dx = 0`. The condition is linear in
/// `k` once the positive factor `e^{-2k}` is divided out.
fn theta_constant(c: f64, nodes: &[f64], weights: &[f64]) -> f64 {
    let (mut m0, mut m1) = (0.0, 0.0);
    for (x, w) in nodes.iter().zip(weights) {
        let e = (-2.0 * c * x).exp();
        m0 += w * e;
        m1 += w * x * e;
    }
    -c * m1 / m0
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReducedKahlerStructure {
    nodes: Vec<f64>,
    weights: Vec<f64>,
    v: Polynomial,
    xi: f64,
    theta_const: f64,
    psi: Vec<f64>,
    dpsi: Vec<f64>,
    ddpsi: Vec<f64>,
}

fn psi_jet(v2: &Polynomial, v3: &Polynomial, v4: &Polynomial, x: f64) -> (f64, f64, f64, f64) {
    let (q, dq, ddq) = (1.0 - x * x, -2.0 * x, -2.0);
    let (a2, a3, a4) = (v2.eval(x), v3.eval(x), v4.eval(x));
    let d = 1.0 + q * a2;
    let dd = dq * a2 + q * a3;
    let ddd = ddq * a2 + 2.0 * dq * a3 + q * a4;
    let psi = q / d;
    let dpsi = dq / d - q * dd / (d * d);
    let ddpsi = ddq / d - 2.0 * dq * dd / (d * d) - q * ddd / (d * d) + 2.0 * q * dd * dd / (d * d * d);
    (d, psi, dpsi, ddpsi)
}

impl ReducedKahlerStructure {
    /// Structure with potential `u0 + v` and soliton field `xi ∂phi`.
    pub fn new(v: Polynomial, xi: f64, n_nodes: usize) -> Result<Self> {
        check_finite(&v.0, "potential coefficients")?;
        check_finite(&[xi], "xi")?;
        if n_nodes < 2 {
            return Err(Error::validation("quadrature needs at least two nodes"));
        }
        let (nodes, weights) = gauss_legendre(n_nodes);
        let v2 = v.nth_derivative(2);
        let v3 = v.nth_derivative(3);
        let v4 = v.nth_derivative(4);
        let probes = (0..CONVEXITY_SAMPLES).map(|i| -1.0 + 2.0 * i as f64 / (CONVEXITY_SAMPLES - 1) as f64);
        for x in nodes.iter().copied().chain(probes) {
            let d = 1.0 + (1.0 - x * x) * v2.eval(x);
            if !(d > 0.0) {
                return Err(Error::Convexity(format!("u'' is not positive at x = {x}")));
            }
        }
        let mut psi = Vec::with_capacity(n_nodes);
        let mut dpsi = Vec::with_capacity(n_nodes);
        let mut ddpsi = Vec::with_capacity(n_nodes);
        for &x in &nodes {
            let (_, p, dp, ddp) = psi_jet(&v2, &v3, &v4, x);
            psi.push(p);
            dpsi.push(dp);
            ddpsi.push(ddp);
        }
        let theta_const = theta_constant(xi, &nodes, &weights);
        Ok(Self {
            nodes,
            weights,
            v,
            xi,
            theta_const,
            psi,
            dpsi,
            ddpsi,
        })
    }

    pub fn round(xi: f64) -> Result<Self> {
        Self::new(Polynomial::zero(), xi, DEFAULT_NODES)
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn xi(&self) -> f64 {
        self.xi
    }

    pub fn perturbation(&self) -> &Polynomial {
        &self.v
    }

    pub fn psi(&self) -> &[f64] {
        &self.psi
    }

    /// Potential values `u(x_k)`.
    pub fn potential(&self) -> Vec<f64> {
        self.nodes
            .iter()
            .map(|&x| 0.5 * ((1.0 - x) * (1.0 - x).ln() + (1.0 + x) * (1.0 + x).ln()) + self.v.eval(x))
            .collect()
    }

    pub fn u_second(&self) -> Vec<f64> {
        self.psi.iter().map(|p| 1.0 / p).collect()
    }

    pub fn theta_constant(&self) -> f64 {
        self.theta_const
    }

    /// `theta_xi(x_k)`.
    pub fn theta(&self) -> Vec<f64> {
        self.nodes.iter().map(|x| self.xi * x + self.theta_const).collect()
    }

    /// `e^{-2 theta_xi}` at the nodes.
    pub fn weight(&self) -> Vec<f64> {
        self.theta().iter().map(|t| (-2.0 * t).exp()).collect()
    }

    /// Same structure with a different potential perturbation.
    pub fn with_perturbation(&self, v: Polynomial) -> Result<Self> {
        Self::new(v, self.xi, self.nodes.len())
    }

    /// Pullback by `x -> -x`, which also reverses the circle generator.
    pub fn reflect(&self) -> Result<Self> {
        Self::new(self.v.reflect(), -self.xi, self.nodes.len())
    }

    /// `int h omega` over S² for an invariant function given at the nodes.
    pub fn integrate(&self, h: &[f64]) -> f64 {
        2.0 * PI * self.weights.iter().zip(h).map(|(w, v)| w * v).sum::<f64>()
    }

    /// `(h1, h2)_xi = int h1 h2 e^{-2 theta_xi} omega`.
    pub fn xi_product(&self, h1: &[f64], h2: &[f64]) -> f64 {
        let w = self.weight();
        let prod: Vec<f64> = h1.iter().zip(h2).zip(&w).map(|((a, b), e)| a * b * e).collect();
        self.integrate(&prod)
    }

    /// Subtracts the `e^{-2 theta_xi}`-weighted mean, so `(f, 1)_xi = 0`.
    pub fn normalize_hamiltonian(&self, f: &Polynomial) -> Polynomial {
        let vals: Vec<f64> = self.nodes.iter().map(|&x| f.eval(x)).collect();
        let ones = vec![1.0; vals.len()];
        let mean = self.xi_product(&vals, &ones) / self.xi_product(&ones, &ones);
        f.add_scaled(&Polynomial(vec![1.0]), -mean)
    }
}

pub fn reduced_scalar_curvature(s: &ReducedKahlerStructure) -> Vec<f64> {
    s.ddpsi.iter().map(|d| -0.5 * d).collect()
}

/// `s_{xi,zeta}` at the nodes; `theta_zeta` carries its own normalization.
pub fn modified_scalar_curvature(s: &ReducedKahlerStructure, zeta: f64) -> Vec<f64> {
    let c = s.xi;
    let kz = theta_constant(zeta, &s.nodes, &s.weights);
    let scal = reduced_scalar_curvature(s);
    (0..s.nodes.len())
        .map(|i| {
            let x = s.nodes[i];
            let theta_xi = c * x + s.theta_const;
            let theta_zeta = zeta * x + kz;
            scal[i] - 1.0 + 2.0 * c * s.dpsi[i] - 2.0 * c * c * s.psi[i] + 2.0 * theta_xi + 2.0 * theta_zeta
        })
        .collect()
}

/// `<S_xi(J), f> = (4 s_{xi,0}(J), f)_xi`.
pub fn moment_map_pairing(s: &ReducedKahlerStructure, f: &Polynomial) -> f64 {
    let sx: Vec<f64> = modified_scalar_curvature(s, 0.0).iter().map(|v| 4.0 * v).collect();
    let fv: Vec<f64> = s.nodes.iter().map(|&x| f.eval(x)).collect();
    s.xi_product(&sx, &fv)
}

/// Pairing of the moment map with the normalized generator `x - mean_xi(x)`.
pub fn futaki_pairing(s: &ReducedKahlerStructure) -> f64 {
    let f = s.normalize_hamiltonian(&Polynomial(vec![0.0, 1.0]));
    moment_map_pairing(s, &f)
}

/// `int s_xi e^{-2 theta_xi} omega`, fixed by `xi` alone.
pub fn weighted_total_curvature(s: &ReducedKahlerStructure) -> f64 {
    let sx = modified_scalar_curvature(s, 0.0);
    s.xi_product(&sx, &vec![1.0; sx.len()])
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentMapCheck {
    pub lhs: f64,
    pub rhs: f64,
    pub rel_err: f64,
}

/// Compares `-d/dt <S_xi(J_t), f>` along `u_t = u + t a` with
/// `Omega_xi(L_{X_f} J, J')`, where `Omega_xi(S, B) = (J S, B)_xi`.
///
/// In the basis `(∂x, ∂phi)`: `X_f = f' ∂phi`, `L_{X_f} J = psi f'' diag(-1, 1)`
/// and `J' = [[0, a'' psi²], [a'', 0]]`. The rhs is the full tensor contraction
/// `g^{ij} g_kl (J L)^k_i J'^l_j` integrated against `e^{-2 theta_xi} omega`.
/// The lhs is a central difference in `t` with one Richardson step.
/// `f` is normalized against the weighted measure before use.
pub fn moment_map_derivative_check(
    s: &ReducedKahlerStructure,
    f: &Polynomial,
    a_dir: &Polynomial,
    h: f64,
) -> Result<MomentMapCheck> {
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::validation("step must be positive"));
    }
    check_finite(&f.0, "hamiltonian coefficients")?;
    check_finite(&a_dir.0, "perturbation coefficients")?;
    let f = s.normalize_hamiltonian(f);
    let phi = |t: f64| -> Result<f64> {
        let st = s.with_perturbation(s.v.add_scaled(a_dir, t))?;
        Ok(moment_map_pairing(&st, &f))
    };
    let d = |h: f64| -> Result<f64> { Ok((phi(h)? - phi(-h)?) / (2.0 * h)) };
    let lhs = if a_dir.is_zero() || f.is_zero() {
        0.0
    } else {
        -(4.0 * d(h / 2.0)? - d(h)?) / 3.0
    };

    let f2 = f.nth_derivative(2);
    let a2 = a_dir.nth_derivative(2);
    let w = s.weight();
    let integrand: Vec<f64> = (0..s.nodes.len())
        .map(|i| {
            let x = s.nodes[i];
            let psi = s.psi[i];
            let (fpp, app) = (f2.eval(x), a2.eval(x));
            let j = [[0.0, -psi], [1.0 / psi, 0.0]];
            let l = [[-psi * fpp, 0.0], [0.0, psi * fpp]];
            let jdot = [[0.0, app * psi * psi], [app, 0.0]];
            let g = [[1.0 / psi, 0.0], [0.0, psi]];
            let ginv = [[psi, 0.0], [0.0, 1.0 / psi]];
            let mut jl = [[0.0; 2]; 2];
            for r in 0..2 {
                for c in 0..2 {
                    jl[r][c] = (0..2).map(|m| j[r][m] * l[m][c]).sum();
                }
            }
            let mut acc = 0.0;
            for ii in 0..2 {
                for jj in 0..2 {
                    for k in 0..2 {
                        for ll in 0..2 {
                            acc += ginv[ii][jj] * g[k][ll] * jl[k][ii] * jdot[ll][jj];
                        }
                    }
                }
            }
            acc * w[i]
        })
        .collect();
    let rhs = s.integrate(&integrand);
    let rel_err = (lhs - rhs).abs() / lhs.abs().max(1e-8);
    Ok(MomentMapCheck { lhs, rhs, rel_err })
}

#[derive(Debug, Clone, PartialEq)]
pub struct MomentMapInstance {
    pub v: Polynomial,
    pub f: Polynomial,
    pub a_dir: Polynomial,
    pub xi: f64,
}

fn random_poly(rng: &mut ChaCha8Rng, degree: usize, scale: f64) -> Polynomial {
    Polynomial((0..=degree).map(|_| scale * rng.gen_range(-1.0..1.0)).collect())
}

/// Random convex perturbation, Hamiltonian, direction and `xi`, deterministic in `seed`.
pub fn random_instance(seed: u64) -> MomentMapInstance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    loop {
        let v = random_poly(&mut rng, 5, 0.08);
        let f = random_poly(&mut rng, 4, 1.0);
        let a_dir = random_poly(&mut rng, 5, 0.5);
        let xi = rng.gen_range(-1.0..1.0);
        // keep a margin so that the path u + t a stays convex for small t
        let v2 = v.nth_derivative(2);
        let ok = (0..=200).all(|i| {
            let x = -1.0 + i as f64 / 100.0;
            1.0 + (1.0 - x * x) * v2.eval(x) > 0.5
        });
        if ok {
            return MomentMapInstance { v, f, a_dir, xi };
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quadrature_is_exact_on_polynomials() {
        let (x, w) = gauss_legendre(8);
        let int = |k: i32| x.iter().zip(&w).map(|(x, w)| w * x.powi(k)).sum::<f64>();
        assert!((int(0) - 2.0).abs() < 1e-14);
        assert!((int(14) - 2.0 / 15.0).abs() < 1e-14);
        assert!(int(7).abs() < 1e-15);
        let (x, _) = gauss_legendre(256);
        assert!(x.windows(2).all(|p| p[0] < p[1]));
    }

    #[test]
    fn round_sphere() {
        let s = ReducedKahlerStructure::round(0.0).unwrap();
        assert!(reduced_scalar_curvature(&s).iter().all(|v| (v - 1.0).abs() < 1e-12));
        assert!(modified_scalar_curvature(&s, 0.0).iter().all(|v| v.abs() < 1e-12));
        assert!((s.integrate(&vec![1.0; 256]) - 4.0 * PI).abs() < 1e-12);
    }

    #[test]
    fn theta_normalization() {
        for c in [0.3, -0.8, 1.7] {
            let s = ReducedKahlerStructure::round(c).unwrap();
            let th = s.theta();
            assert!(s.xi_product(&th, &vec![1.0; th.len()]).abs() < 1e-12);
        }
    }

    #[test]
    fn zeta_shift_is_affine() {
        let s = ReducedKahlerStructure::new(Polynomial(vec![0.0, 0.01, 0.02]), 0.4, 64).unwrap();
        let a = modified_scalar_curvature(&s, 0.7);
        let b = modified_scalar_curvature(&s, 0.0);
        let kz = theta_constant(0.7, s.nodes(), s.weights());
        for (i, x) in s.nodes().iter().enumerate() {
            assert!((a[i] - b[i] - 2.0 * (0.7 * x + kz)).abs() < 1e-14);
        }
    }

    #[test]
    fn nonconvex_potential_is_rejected() {
        let r = ReducedKahlerStructure::new(Polynomial(vec![0.0, 0.0, -2.0]), 0.0, 32);
        assert!(matches!(r, Err(Error::Convexity(_))));
    }

    #[test]
    fn trivial_directions() {
        let s = ReducedKahlerStructure::new(Polynomial(vec![0.0, 0.0, 0.05]), 0.3, 64).unwrap();
        let f = Polynomial(vec![0.0, 1.0, 0.5]);
        let c = moment_map_derivative_check(&s, &f, &Polynomial::zero(), 1e-4).unwrap();
        assert_eq!((c.lhs, c.rhs), (0.0, 0.0));
        let c = moment_map_derivative_check(&s, &Polynomial::zero(), &f, 1e-4).unwrap();
        assert_eq!((c.lhs, c.rhs), (0.0, 0.0));
    }

    #[test]
    fn moment_map_property_on_one_instance() {
        let inst = random_instance(5);
        let s = ReducedKahlerStructure::new(inst.v, inst.xi, 256).unwrap();
        let c = moment_map_derivative_check(&s, &inst.f, &inst.a_dir, 1e-4).unwrap();
        assert!(c.rel_err < 1e-4, "{c:?}");
    }
}
