//! Exact lattice polytopes: H/V representations, lattice points, volumes,
//! barycenters and exponential moments.
//!
//! Convention: a polytope is `{u : <u, normal_i> >= offset_i}` with integer
//! inner normals. The anticanonical polytope of a smooth toric Fano with fan
//! rays `v_i` is `{u : <u, v_i> >= -1}`, so its facet normals are the rays.

use nalgebra::{DMatrix, DVector};
use num::{Signed, Zero};
use std::collections::BTreeSet;

use crate::error::{check_dim, check_finite, Error, Result};
use crate::expint::exp_divided_difference;
use crate::rational::{self, int, Rational};

#[derive(Debug, Clone, PartialEq)]
pub struct Facet {
    pub normal: Vec<i64>,
    pub offset: Rational,
}

/// A simplex of the cached triangulation.
#[derive(Debug, Clone)]
struct Simplex {
    vertices: Vec<Vec<Rational>>,
    volume: Rational,
    vertices_f64: Vec<DVector<f64>>,
    /// `n! * volume` as a float: the Jacobian of the barycentric parametrization.
    jacobian: f64,
}

#[derive(Debug, Clone)]
pub struct MomentPolytope {
    dim: usize,
    facets: Vec<Facet>,
    vertices: Vec<Vec<Rational>>,
    simplices: Vec<Simplex>,
}

/// `F(xi) = int_P e^<v,xi> dv` with gradient and hessian.
#[derive(Debug, Clone, PartialEq)]
pub struct ExpMoments {
    pub value: f64,
    pub gradient: DVector<f64>,
    pub hessian: DMatrix<f64>,
}

/// Builds the anticanonical polytope `{u : <u, v_i> >= -1}` of a fan with the given rays.
pub fn anticanonical_polytope(rays: &[Vec<i64>]) -> Result<MomentPolytope> {
    let Some(first) = rays.first() else {
        return Err(Error::validation("at least one ray is required"));
    };
    let dim = first.len();
    if dim == 0 {
        return Err(Error::validation("rays must have positive dimension"));
    }
    let mut seen = BTreeSet::new();
    for r in rays {
        check_dim(dim, r.len())?;
        if r.iter().all(|&x| x == 0) {
            return Err(Error::validation("zero ray"));
        }
        if rational::gcd_slice(r) != 1 {
            return Err(Error::validation(format!("ray {r:?} is not primitive")));
        }
        if !seen.insert(r.clone()) {
            return Err(Error::validation(format!("duplicate ray {r:?}")));
        }
    }
    let facets = rays
        .iter()
        .map(|r| Facet {
            normal: r.clone(),
            offset: int(-1),
        })
        .collect();
    MomentPolytope::from_facets(dim, facets)
}

impl MomentPolytope {
    /// Builds a polytope from an H-representation, computing vertices and a
    /// triangulation exactly. Rejects unbounded, empty and lower-dimensional input.
    pub fn from_facets(dim: usize, facets: Vec<Facet>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::validation("dimension must be positive"));
        }
        if facets.is_empty() {
            return Err(Error::Construction("no facets: polytope is unbounded".into()));
        }
        for f in &facets {
            check_dim(dim, f.normal.len())?;
            if f.normal.iter().all(|&x| x == 0) {
                return Err(Error::validation("zero facet normal"));
            }
        }
        check_bounded(dim, &facets)?;
        let vertices = enumerate_vertices(dim, &facets);
        if vertices.is_empty() {
            return Err(Error::Construction("facet inequalities are infeasible".into()));
        }
        if affine_dim(&vertices.iter().collect::<Vec<_>>()) < dim {
            return Err(Error::Degenerate(format!(
                "polytope is not full-dimensional in dimension {dim}"
            )));
        }
        let mut p = MomentPolytope {
            dim,
            facets,
            vertices,
            simplices: Vec::new(),
        };
        p.simplices = p.triangulate();
        Ok(p)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn lattice_rank(&self) -> usize {
        self.dim
    }

    pub fn facets(&self) -> &[Facet] {
        &self.facets
    }

    /// Vertices in lexicographic order.
    pub fn vertices(&self) -> &[Vec<Rational>] {
        &self.vertices
    }

    pub fn vertices_f64(&self) -> Vec<Vec<f64>> {
        self.vertices
            .iter()
            .map(|v| v.iter().map(rational::to_f64).collect())
            .collect()
    }

    /// All offsets equal `-1` and all normals are primitive.
    pub fn is_anticanonical(&self) -> bool {
        self.facets
            .iter()
            .all(|f| f.offset == int(-1) && rational::gcd_slice(&f.normal) == 1)
    }

    pub fn contains(&self, u: &[Rational]) -> bool {
        self.facets
            .iter()
            .all(|f| rational::dot_int(u, &f.normal) >= f.offset)
    }

    /// Strictly inside every facet.
    pub fn contains_origin_in_interior(&self) -> bool {
        self.facets.iter().all(|f| f.offset.is_negative())
    }

    pub fn num_simplices(&self) -> usize {
        self.simplices.len()
    }

    /// Sorted lattice points of `mP`.
    pub fn lattice_points(&self, m: u32) -> Result<Vec<Vec<i64>>> {
        lattice_points(self, m)
    }

    pub fn volume(&self) -> Rational {
        self.simplices
            .iter()
            .fold(Rational::zero(), |acc, s| acc + &s.volume)
    }

    pub fn barycenter(&self) -> Vec<Rational> {
        let vol = self.volume();
        let n1 = int(self.dim as i64 + 1);
        let mut acc = vec![Rational::zero(); self.dim];
        for s in &self.simplices {
            for v in &s.vertices {
                for (a, x) in acc.iter_mut().zip(v) {
                    *a += &s.volume * x / &n1;
                }
            }
        }
        acc.into_iter().map(|a| a / &vol).collect()
    }

    /// Exact second moments `int_P v v^T dv`.
    pub fn second_moments(&self) -> Vec<Vec<Rational>> {
        let n = self.dim;
        let denom = int(((n + 1) * (n + 2)) as i64);
        let mut out = vec![vec![Rational::zero(); n]; n];
        for s in &self.simplices {
            let mut sum = vec![Rational::zero(); n];
            for v in &s.vertices {
                for (a, x) in sum.iter_mut().zip(v) {
                    *a += x;
                }
            }
            for i in 0..n {
                for j in 0..n {
                    let mut t = &sum[i] * &sum[j];
                    for v in &s.vertices {
                        t += &v[i] * &v[j];
                    }
                    out[i][j] += &s.volume * t / &denom;
                }
            }
        }
        out
    }

    pub fn exp_moments(&self, xi: &[f64]) -> Result<ExpMoments> {
        exp_moments(self, xi)
    }

    /// Image under a unimodular integer matrix acting on `M`.
    pub fn transform_unimodular(&self, u: &[Vec<i64>]) -> Result<Self> {
        let n = self.dim;
        if u.len() != n || u.iter().any(|r| r.len() != n) {
            return Err(Error::validation("transformation must be a square matrix of the polytope dimension"));
        }
        let uq: Vec<Vec<Rational>> = u.iter().map(|r| r.iter().map(|&x| int(x)).collect()).collect();
        let d = rational::det(&uq);
        if d != int(1) && d != int(-1) {
            return Err(Error::validation("matrix is not unimodular"));
        }
        // <U^{-1} u', n> = <u', U^{-T} n>; U^{-T} n solves U^T y = n
        let ut: Vec<Vec<Rational>> = (0..n).map(|i| (0..n).map(|j| uq[j][i].clone()).collect()).collect();
        let facets = self
            .facets
            .iter()
            .map(|f| {
                let rhs: Vec<Rational> = f.normal.iter().map(|&x| int(x)).collect();
                let y = rational::solve(&ut, &rhs).expect("unimodular matrix is invertible");
                Facet {
                    normal: y.iter().map(|q| q.to_integer().try_into().expect("normal fits i64")).collect(),
                    offset: f.offset.clone(),
                }
            })
            .collect();
        Self::from_facets(n, facets)
    }

    /// Cartesian product `P x Q`.
    pub fn product(&self, other: &Self) -> Result<Self> {
        let n = self.dim + other.dim;
        let mut facets = Vec::new();
        for f in &self.facets {
            let mut normal = f.normal.clone();
            normal.extend(std::iter::repeat_n(0, other.dim));
            facets.push(Facet { normal, offset: f.offset.clone() });
        }
        for f in &other.facets {
            let mut normal = vec![0; self.dim];
            normal.extend_from_slice(&f.normal);
            facets.push(Facet { normal, offset: f.offset.clone() });
        }
        Self::from_facets(n, facets)
    }

    fn tight_set(&self, facet: &Facet) -> Vec<usize> {
        (0..self.vertices.len())
            .filter(|&i| rational::dot_int(&self.vertices[i], &facet.normal) == facet.offset)
            .collect()
    }

    /// Cone triangulation: each face is coned from its vertex centroid over a
    /// triangulation of its facets. Facets of a face are its intersections with
    /// facets of `P` that drop the affine dimension by exactly one.
    fn triangulate(&self) -> Vec<Simplex> {
        let tight: Vec<Vec<usize>> = self.facets.iter().map(|f| self.tight_set(f)).collect();
        let all: Vec<usize> = (0..self.vertices.len()).collect();
        let chains = self.triangulate_face(&all, self.dim, &tight);
        let nfact = rational::factorial(self.dim);
        chains
            .into_iter()
            .filter_map(|verts| {
                let base = &verts[0];
                let m: Vec<Vec<Rational>> = verts[1..]
                    .iter()
                    .map(|v| v.iter().zip(base).map(|(a, b)| a - b).collect())
                    .collect();
                let volume = rational::det(&m).abs() / &nfact;
                if volume.is_zero() {
                    return None;
                }
                let vertices_f64 = verts
                    .iter()
                    .map(|v| DVector::from_iterator(v.len(), v.iter().map(rational::to_f64)))
                    .collect();
                let jacobian = rational::to_f64(&(&volume * &nfact));
                Some(Simplex {
                    vertices: verts,
                    volume,
                    vertices_f64,
                    jacobian,
                })
            })
            .collect()
    }

    fn triangulate_face(
        &self,
        face: &[usize],
        dim: usize,
        tight: &[Vec<usize>],
    ) -> Vec<Vec<Vec<Rational>>> {
        if dim == 0 {
            return vec![vec![self.vertices[face[0]].clone()]];
        }
        let mut subfaces: BTreeSet<Vec<usize>> = BTreeSet::new();
        for t in tight {
            let sub: Vec<usize> = face.iter().copied().filter(|i| t.contains(i)).collect();
            if sub.is_empty() {
                continue;
            }
            let pts: Vec<&Vec<Rational>> = sub.iter().map(|&i| &self.vertices[i]).collect();
            if affine_dim(&pts) + 1 == dim {
                subfaces.insert(sub);
            }
        }
        let apex = centroid(face.iter().map(|&i| &self.vertices[i]));
        let mut out = Vec::new();
        for sub in subfaces {
            for mut chain in self.triangulate_face(&sub, dim - 1, tight) {
                chain.insert(0, apex.clone());
                out.push(chain);
            }
        }
        out
    }
}

fn centroid<'a>(pts: impl Iterator<Item = &'a Vec<Rational>>) -> Vec<Rational> {
    let pts: Vec<&Vec<Rational>> = pts.collect();
    let k = int(pts.len() as i64);
    let n = pts[0].len();
    (0..n)
        .map(|j| pts.iter().fold(Rational::zero(), |a, p| a + &p[j]) / &k)
        .collect()
}

fn affine_dim(pts: &[&Vec<Rational>]) -> usize {
    if pts.len() <= 1 {
        return 0;
    }
    let base = pts[0];
    let diffs: Vec<Vec<Rational>> = pts[1..]
        .iter()
        .map(|p| p.iter().zip(base).map(|(a, b)| a - b).collect())
        .collect();
    rational::rank(&diffs, base.len())
}

fn normals_q(facets: &[&Facet]) -> Vec<Vec<Rational>> {
    facets
        .iter()
        .map(|f| f.normal.iter().map(|&x| int(x)).collect())
        .collect()
}

/// The recession cone `{d : <normal_i, d> >= 0}` must be trivial.
fn check_bounded(dim: usize, facets: &[Facet]) -> Result<()> {
    let all: Vec<&Facet> = facets.iter().collect();
    if rational::rank(&normals_q(&all), dim) < dim {
        return Err(Error::Construction(
            "facet normals do not span: polytope contains a line".into(),
        ));
    }
    // pointed cone: nontrivial iff some extreme ray (n-1 independent tight normals) is feasible
    for subset in rational::subsets(facets.len(), dim - 1) {
        let rows = normals_q(&subset.iter().map(|&i| &facets[i]).collect::<Vec<_>>());
        let ns = rational::nullspace(&rows, dim);
        if ns.len() != 1 {
            continue;
        }
        let d = &ns[0];
        let signs: Vec<Rational> = facets.iter().map(|f| rational::dot_int(d, &f.normal)).collect();
        if signs.iter().all(|s| !s.is_negative()) || signs.iter().all(|s| !s.is_positive()) {
            return Err(Error::Construction(
                "rays do not positively span: polytope is unbounded".into(),
            ));
        }
    }
    Ok(())
}

fn enumerate_vertices(dim: usize, facets: &[Facet]) -> Vec<Vec<Rational>> {
    let mut found = BTreeSet::new();
    for subset in rational::subsets(facets.len(), dim) {
        let chosen: Vec<&Facet> = subset.iter().map(|&i| &facets[i]).collect();
        let a = normals_q(&chosen);
        let b: Vec<Rational> = chosen.iter().map(|f| f.offset.clone()).collect();
        let Some(x) = rational::solve(&a, &b) else {
            continue;
        };
        if facets.iter().all(|f| rational::dot_int(&x, &f.normal) >= f.offset) {
            found.insert(x);
        }
    }
    found.into_iter().collect()
}

/// Lattice points of the dilate `mP`, sorted lexicographically.
pub fn lattice_points(p: &MomentPolytope, m: u32) -> Result<Vec<Vec<i64>>> {
    if m == 0 {
        return Err(Error::validation("dilation level m must be at least 1"));
    }
    let n = p.dim;
    let mq = int(m as i64);
    let mut lo = vec![i64::MAX; n];
    let mut hi = vec![i64::MIN; n];
    for v in &p.vertices {
        for j in 0..n {
            let x = &v[j] * &mq;
            lo[j] = lo[j].min(i64::try_from(x.floor().to_integer()).expect("bounding box fits i64"));
            hi[j] = hi[j].max(i64::try_from(x.ceil().to_integer()).expect("bounding box fits i64"));
        }
    }
    // <u, normal> is an integer, so >= m*offset  <=>  >= ceil(m*offset)
    let thresholds: Vec<i64> = p
        .facets
        .iter()
        .map(|f| i64::try_from((&f.offset * &mq).ceil().to_integer()).expect("threshold fits i64"))
        .collect();
    let mut out = Vec::new();
    let mut u = lo.clone();
    loop {
        if p
            .facets
            .iter()
            .zip(&thresholds)
            .all(|(f, &t)| f.normal.iter().zip(&u).map(|(a, b)| a * b).sum::<i64>() >= t)
        {
            out.push(u.clone());
        }
        // odometer, last coordinate fastest: yields lexicographic order
        let mut j = n;
        loop {
            if j == 0 {
                return Ok(out);
            }
            j -= 1;
            if u[j] < hi[j] {
                u[j] += 1;
                u[j + 1..n].copy_from_slice(&lo[j + 1..n]);
                break;
            }
        }
    }
}

pub fn volume(p: &MomentPolytope) -> Rational {
    p.volume()
}

pub fn barycenter(p: &MomentPolytope) -> Vec<Rational> {
    p.barycenter()
}

/// Exponential moments by per-simplex divided differences:
/// with `a_i = <v_i, xi>` and `J = n! vol(S)`,
/// `int_S e = J exp[a]`, `int_S l_i e = J exp[a, a_i]`,
/// `int_S l_i l_j e = (1 + d_ij) J exp[a, a_i, a_j]` in barycentric coordinates `l`.
pub fn exp_moments(p: &MomentPolytope, xi: &[f64]) -> Result<ExpMoments> {
    check_dim(p.dim, xi.len())?;
    check_finite(xi, "xi")?;
    let n = p.dim;
    let xi_v = DVector::from_column_slice(xi);
    let mut value = 0.0;
    let mut gradient = DVector::zeros(n);
    let mut hessian = DMatrix::zeros(n, n);
    let mut nodes = Vec::with_capacity(n + 3);
    for s in &p.simplices {
        let a: Vec<f64> = s.vertices_f64.iter().map(|v| v.dot(&xi_v)).collect();
        nodes.clear();
        nodes.extend_from_slice(&a);
        value += s.jacobian * exp_divided_difference(&nodes);
        for i in 0..=n {
            nodes.truncate(n + 1);
            nodes.push(a[i]);
            let w = s.jacobian * exp_divided_difference(&nodes);
            gradient.axpy(w, &s.vertices_f64[i], 1.0);
            for j in i..=n {
                nodes.truncate(n + 2);
                nodes.push(a[j]);
                let mut w2 = s.jacobian * exp_divided_difference(&nodes);
                if i == j {
                    w2 *= 2.0;
                }
                let outer = &s.vertices_f64[i] * s.vertices_f64[j].transpose();
                if i == j {
                    hessian += outer * w2;
                } else {
                    hessian += (&outer + outer.transpose()) * w2;
                }
            }
        }
    }
    Ok(ExpMoments {
        value,
        gradient,
        hessian,
    })
}
