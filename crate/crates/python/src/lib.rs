//! Python bindings: polytopes, characters, DF invariants, K-optimal vectors,
//! moment-map verification and the Kempf-Ness sandbox.

use num::complex::Complex64;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

use ksoliton::character::{character_value, hilbert_character};
use ksoliton::kempfness::{self, KempfNessResult, Stability, TorusRepPoint};
use ksoliton::momentmap::{self, Polynomial, ReducedKahlerStructure};
use ksoliton::rational::{format_rational, to_f64};
use ksoliton::{catalog, soliton, MomentPolytope};

fn err(e: ksoliton::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

#[pyclass(name = "MomentPolytope", frozen)]
struct PyPolytope {
    inner: MomentPolytope,
}

#[pymethods]
impl PyPolytope {
    /// Anticanonical polytope of the fan with the given primitive rays.
    #[staticmethod]
    fn from_rays(rays: Vec<Vec<i64>>) -> PyResult<Self> {
        Ok(Self {
            inner: ksoliton::anticanonical_polytope(&rays).map_err(err)?,
        })
    }

    #[staticmethod]
    fn example(name: &str) -> PyResult<Self> {
        Ok(Self {
            inner: catalog::example(name).map_err(err)?,
        })
    }

    #[getter]
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    /// Vertices as exact `"p/q"` strings.
    fn vertices(&self) -> Vec<Vec<String>> {
        self.inner
            .vertices()
            .iter()
            .map(|v| v.iter().map(format_rational).collect())
            .collect()
    }

    fn volume(&self) -> f64 {
        to_f64(&self.inner.volume())
    }

    fn barycenter(&self) -> Vec<f64> {
        self.inner.barycenter().iter().map(to_f64).collect()
    }

    fn lattice_points(&self, m: u32) -> PyResult<Vec<Vec<i64>>> {
        self.inner.lattice_points(m).map_err(err)
    }

    /// `(F, grad F, hess F)` for `F(xi) = int_P e^{<v, xi>} dv`.
    fn exp_moments(&self, xi: Vec<f64>) -> PyResult<(f64, Vec<f64>, Vec<Vec<f64>>)> {
        let em = self.inner.exp_moments(&xi).map_err(err)?;
        let n = em.gradient.len();
        let hess = (0..n).map(|i| (0..n).map(|j| em.hessian[(i, j)]).collect()).collect();
        Ok((em.value, em.gradient.iter().copied().collect(), hess))
    }

    fn is_kahler_einstein(&self) -> bool {
        soliton::is_kahler_einstein(&self.inner)
    }

    fn __repr__(&self) -> String {
        format!(
            "MomentPolytope(dim={}, facets={}, vertices={})",
            self.inner.dim(),
            self.inner.facets().len(),
            self.inner.vertices().len()
        )
    }
}

/// Weight multiplicities of the Hilbert character at level `m`.
#[pyfunction]
fn hilbert_character_weights(p: &PyPolytope, m: u32) -> PyResult<Vec<(Vec<i64>, u64)>> {
    let chi = hilbert_character(&p.inner, m).map_err(err)?;
    Ok(chi.iter().map(|(u, k)| (u.clone(), k)).collect())
}

#[pyfunction]
fn hilbert_character_value(p: &PyPolytope, m: u32, eta: Vec<f64>) -> PyResult<f64> {
    let chi = hilbert_character(&p.inner, m).map_err(err)?;
    character_value(&chi, &eta).map_err(err)
}

#[pyfunction]
fn df_discrete(p: &PyPolytope, xi: Vec<f64>, lambda: Vec<i64>, m: u32) -> PyResult<f64> {
    soliton::df_discrete(&p.inner, &xi, &lambda, m).map_err(err)
}

#[pyfunction]
fn df_continuum(p: &PyPolytope, xi: Vec<f64>, lambda: Vec<f64>) -> PyResult<f64> {
    soliton::df_continuum(&p.inner, &xi, &lambda).map_err(err)
}

/// `(xi_star, residual, newton_iterations)`.
#[pyfunction]
#[pyo3(signature = (p, tol = 1e-10))]
fn k_optimal_vector(p: &PyPolytope, tol: f64) -> PyResult<(Vec<f64>, f64, usize)> {
    let r = soliton::k_optimal_vector(&p.inner, tol).map_err(err)?;
    Ok((r.xi_star, r.residual, r.newton_iters))
}

/// `(rank, relations)`; the search is heuristic.
#[pyfunction]
#[pyo3(signature = (xi, tol = 1e-10))]
fn k_optimality_check(xi: Vec<f64>, tol: f64) -> PyResult<(usize, Vec<Vec<i64>>)> {
    let r = soliton::k_optimality_check(&xi, tol).map_err(err)?;
    Ok((r.rank, r.relations))
}

/// `(name, residual, tolerance, passed)` for the index rules and pointwise identities.
#[pyfunction]
#[pyo3(signature = (dims, seeds, inject_fault = false))]
fn verify_appendix_b(dims: Vec<usize>, seeds: u64, inject_fault: bool) -> PyResult<Vec<(String, f64, f64, bool)>> {
    let r = momentmap::appendix_b_report(&dims, seeds, inject_fault).map_err(err)?;
    Ok(r.checks.into_iter().map(|c| (c.name, c.residual, c.tolerance, c.passed)).collect())
}

/// Scalar curvature at the quadrature nodes of the structure `u0 + v`.
#[pyfunction]
#[pyo3(signature = (v, nodes = 256))]
fn reduced_scalar_curvature(v: Vec<f64>, nodes: usize) -> PyResult<(Vec<f64>, Vec<f64>)> {
    let s = ReducedKahlerStructure::new(Polynomial(v), 0.0, nodes).map_err(err)?;
    Ok((s.nodes().to_vec(), momentmap::reduced_scalar_curvature(&s)))
}

/// `(lhs, rhs, rel_err)` of the moment-map property along `u + t a`.
#[pyfunction]
#[pyo3(signature = (v, xi, f, a_dir, h = 1e-4, nodes = 256))]
fn moment_map_check(v: Vec<f64>, xi: f64, f: Vec<f64>, a_dir: Vec<f64>, h: f64, nodes: usize) -> PyResult<(f64, f64, f64)> {
    let s = ReducedKahlerStructure::new(Polynomial(v), xi, nodes).map_err(err)?;
    let c = momentmap::moment_map_derivative_check(&s, &Polynomial(f), &Polynomial(a_dir), h).map_err(err)?;
    Ok((c.lhs, c.rhs, c.rel_err))
}

fn rep(k: usize, weights: Vec<Vec<i64>>, point: Vec<(f64, f64)>) -> PyResult<TorusRepPoint> {
    TorusRepPoint::new(k, weights, point.into_iter().map(|(re, im)| Complex64::new(re, im)).collect()).map_err(err)
}

#[pyfunction]
fn linear_moment_map(k: usize, weights: Vec<Vec<i64>>, point: Vec<(f64, f64)>) -> PyResult<Vec<f64>> {
    Ok(kempfness::linear_moment_map(&rep(k, weights, point)?))
}

/// `(verdict, destabilizer)` with verdict one of
/// `"polystable"`, `"semistable-not-polystable"`, `"unstable"`.
#[pyfunction]
fn polystable(k: usize, weights: Vec<Vec<i64>>, point: Vec<(f64, f64)>) -> PyResult<(String, Option<Vec<i64>>)> {
    let v = kempfness::polystable(&rep(k, weights, point)?).map_err(err)?;
    let name = match v.verdict {
        Stability::Polystable => "polystable",
        Stability::SemistableNotPolystable => "semistable-not-polystable",
        Stability::Unstable => "unstable",
    };
    Ok((name.to_string(), v.destabilizer))
}

/// `("minimizer", v)` or `("divergent", direction)`.
#[pyfunction]
#[pyo3(signature = (k, weights, point, tol = 1e-10))]
fn kempf_ness_minimize(k: usize, weights: Vec<Vec<i64>>, point: Vec<(f64, f64)>, tol: f64) -> PyResult<(String, Vec<f64>)> {
    match kempfness::kempf_ness_minimize(&rep(k, weights, point)?, tol).map_err(err)? {
        KempfNessResult::Minimizer { v, .. } => Ok(("minimizer".into(), v)),
        KempfNessResult::Divergent { direction } => Ok(("divergent".into(), direction)),
    }
}

#[pymodule]
fn pyksoliton(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyPolytope>()?;
    m.add_function(wrap_pyfunction!(hilbert_character_weights, m)?)?;
    m.add_function(wrap_pyfunction!(hilbert_character_value, m)?)?;
    m.add_function(wrap_pyfunction!(df_discrete, m)?)?;
    m.add_function(wrap_pyfunction!(df_continuum, m)?)?;
    m.add_function(wrap_pyfunction!(k_optimal_vector, m)?)?;
    m.add_function(wrap_pyfunction!(k_optimality_check, m)?)?;
    m.add_function(wrap_pyfunction!(verify_appendix_b, m)?)?;
    m.add_function(wrap_pyfunction!(reduced_scalar_curvature, m)?)?;
    m.add_function(wrap_pyfunction!(moment_map_check, m)?)?;
    m.add_function(wrap_pyfunction!(linear_moment_map, m)?)?;
    m.add_function(wrap_pyfunction!(polystable, m)?)?;
    m.add_function(wrap_pyfunction!(kempf_ness_minimize, m)?)?;
    Ok(())
}
