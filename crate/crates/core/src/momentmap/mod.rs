//! Numerical checks of the scalar-curvature moment map.
//!
//! [`frame`] verifies the index rules and the pointwise integrand identities
//! at a single point with random compatible data. [`reduced`] verifies the
//! moment-map property itself on circle-invariant structures of S².

pub mod frame;
pub mod reduced;

pub use frame::{check_pointwise_identities, check_tensor_rules, random_compatible_frame, PointFrame, Residual};
pub use reduced::{
    futaki_pairing, modified_scalar_curvature, moment_map_derivative_check, reduced_scalar_curvature,
    MomentMapCheck, Polynomial, ReducedKahlerStructure,
};

use serde::{Deserialize, Serialize};

use crate::error::Result;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CheckResult {
    pub name: String,
    pub residual: f64,
    pub tolerance: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerificationReport {
    pub checks: Vec<CheckResult>,
    pub passed: bool,
}

impl VerificationReport {
    fn from_checks(checks: Vec<CheckResult>) -> Self {
        let passed = checks.iter().all(|c| c.passed);
        Self { checks, passed }
    }

    pub fn failures(&self) -> impl Iterator<Item = &CheckResult> {
        self.checks.iter().filter(|c| !c.passed)
    }
}

/// Worst residual per check name over `seeds` frames for each `n`.
/// `inject_fault` replaces `A` by a `J`-commuting matrix, which must be caught.
pub fn appendix_b_report(dims: &[usize], seeds: u64, inject_fault: bool) -> Result<VerificationReport> {
    let mut checks = Vec::new();
    for &n in dims {
        let mut worst: Vec<Residual> = Vec::new();
        for seed in 0..seeds {
            let mut fr = random_compatible_frame(n, seed)?;
            if inject_fault {
                fr = fr.with_commuting_a();
            }
            let rows = check_tensor_rules(&fr).into_iter().chain(check_pointwise_identities(&fr));
            for r in rows {
                match worst.iter_mut().find(|w| w.name == r.name) {
                    Some(w) if r.residual > w.residual || r.residual.is_nan() => w.residual = r.residual,
                    Some(_) => {}
                    None => worst.push(r),
                }
            }
        }
        checks.extend(worst.into_iter().map(|r| CheckResult {
            name: format!("n={n}/{}", r.name),
            passed: r.passed(),
            residual: r.residual,
            tolerance: r.tolerance,
        }));
    }
    Ok(VerificationReport::from_checks(checks))
}

/// Moment-map property on random reduced instances plus the round-sphere checks.
pub fn moment_map_report(seeds: u64, n_nodes: usize, h: f64) -> Result<VerificationReport> {
    let mut checks = Vec::new();
    let round = ReducedKahlerStructure::new(Polynomial::zero(), 0.0, n_nodes)?;
    let s_err = reduced_scalar_curvature(&round)
        .iter()
        .fold(0.0_f64, |a, s| a.max((s - 1.0).abs()));
    checks.push(CheckResult {
        name: "round-scalar-curvature".into(),
        residual: s_err,
        tolerance: 1e-8,
        passed: s_err <= 1e-8,
    });
    let m_err = modified_scalar_curvature(&round, 0.0)
        .iter()
        .fold(0.0_f64, |a, s| a.max(s.abs()));
    checks.push(CheckResult {
        name: "round-modified-scalar-curvature".into(),
        residual: m_err,
        tolerance: 1e-8,
        passed: m_err <= 1e-8,
    });
    for seed in 0..seeds {
        let inst = reduced::random_instance(seed);
        let s = ReducedKahlerStructure::new(inst.v, inst.xi, n_nodes)?;
        let c = moment_map_derivative_check(&s, &inst.f, &inst.a_dir, h)?;
        checks.push(CheckResult {
            name: format!("moment-map/seed={seed}"),
            residual: c.rel_err,
            tolerance: reduced::GEOMETRIC_TOL,
            passed: c.rel_err <= reduced::GEOMETRIC_TOL,
        });
    }
    Ok(VerificationReport::from_checks(checks))
}
