//! Donaldson-Futaki estimates from user-supplied central-fiber weight data.
//!
//! A table lists, for each level `m`, the weights `(u, j) ∈ M x Z` of the
//! central fiber's sections under `T x C^*` with multiplicities. The
//! distinguished one-parameter subgroup is `s -> (1, s)`, so the pairing with
//! `lambda` reads off the last coordinate `j`.

use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

use crate::character::dot;
use crate::error::{check_finite, Error, Result};
use crate::polytope::MomentPolytope;

#[derive(Debug, Clone, PartialEq)]
pub struct EquivariantWeightTable {
    /// Rank of `M` (weights carry one extra coordinate for the C^* factor).
    dim: usize,
    levels: BTreeMap<u32, Vec<(Vec<i64>, u64)>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TableWeightJson {
    pub u: Vec<i64>,
    pub mult: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TableLevelJson {
    pub m: u32,
    pub weights: Vec<TableWeightJson>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WeightTableJson {
    pub levels: Vec<TableLevelJson>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightTableEstimate {
    pub estimate: f64,
    pub error_bar: f64,
    /// `(m, -w(m; lambda) / (m h0(m)))` for every level used.
    pub levels: Vec<(u32, f64)>,
}

impl EquivariantWeightTable {
    pub fn new(dim: usize, levels: BTreeMap<u32, Vec<(Vec<i64>, u64)>>) -> Result<Self> {
        if levels.is_empty() {
            return Err(Error::validation("weight table has no levels"));
        }
        for (&m, ws) in &levels {
            if m == 0 {
                return Err(Error::validation("levels start at m = 1"));
            }
            if ws.is_empty() {
                return Err(Error::validation(format!("level {m} is empty")));
            }
            for (u, k) in ws {
                if u.len() != dim + 1 {
                    return Err(Error::validation(format!(
                        "level {m}: weight {u:?} must have {} coordinates",
                        dim + 1
                    )));
                }
                if *k == 0 {
                    return Err(Error::validation(format!("level {m}: zero multiplicity")));
                }
            }
        }
        Ok(Self { dim, levels })
    }

    /// Table of the polytope's sections with the `C^*`-grading `j = grading(u)`.
    pub fn from_polytope(p: &MomentPolytope, m_max: u32, grading: impl Fn(&[i64], u32) -> i64) -> Result<Self> {
        let mut levels = BTreeMap::new();
        for m in 1..=m_max {
            let ws = p
                .lattice_points(m)?
                .into_iter()
                .map(|mut u| {
                    let j = grading(&u, m);
                    u.push(j);
                    (u, 1)
                })
                .collect();
            levels.insert(m, ws);
        }
        Self::new(p.dim(), levels)
    }

    /// Product configuration twisted by `lambda ∈ N`: grading `j = <u, lambda>`.
    pub fn product_configuration(p: &MomentPolytope, lambda: &[i64], m_max: u32) -> Result<Self> {
        crate::error::check_dim(p.dim(), lambda.len())?;
        let l = lambda.to_vec();
        Self::from_polytope(p, m_max, move |u, _| u.iter().zip(&l).map(|(a, b)| a * b).sum())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn level(&self, m: u32) -> Option<&[(Vec<i64>, u64)]> {
        self.levels.get(&m).map(|v| v.as_slice())
    }

    /// `-w(m; lambda) / (m h0(m))` where `w = sum mult e^{<(u,j), xi_bar>/m} j`.
    pub fn df_level(&self, m: u32, xi_bar: &[f64]) -> Result<f64> {
        let xi_bar = self.extend_xi(xi_bar)?;
        let ws = self
            .levels
            .get(&m)
            .ok_or_else(|| Error::validation(format!("missing level {m}")))?;
        let mf = m as f64;
        let scaled: Vec<f64> = xi_bar.iter().map(|x| x / mf).collect();
        let mut w = 0.0;
        let mut h0 = 0u64;
        for (u, k) in ws {
            let j = *u.last().unwrap() as f64;
            w += *k as f64 * dot(u, &scaled).exp() * j;
            h0 += k;
        }
        Ok(-w / (mf * h0 as f64))
    }

    fn extend_xi(&self, xi_bar: &[f64]) -> Result<Vec<f64>> {
        check_finite(xi_bar, "xi")?;
        if xi_bar.len() == self.dim {
            let mut v = xi_bar.to_vec();
            v.push(0.0);
            Ok(v)
        } else if xi_bar.len() == self.dim + 1 {
            Ok(xi_bar.to_vec())
        } else {
            Err(Error::DimensionMismatch {
                expected: self.dim + 1,
                got: xi_bar.len(),
            })
        }
    }

    pub fn to_json(&self) -> WeightTableJson {
        WeightTableJson {
            levels: self
                .levels
                .iter()
                .map(|(&m, ws)| TableLevelJson {
                    m,
                    weights: ws
                        .iter()
                        .map(|(u, k)| TableWeightJson { u: u.clone(), mult: *k })
                        .collect(),
                })
                .collect(),
        }
    }

    pub fn from_json(j: &WeightTableJson) -> Result<Self> {
        let first = j
            .levels
            .iter()
            .flat_map(|l| l.weights.first())
            .next()
            .ok_or_else(|| Error::validation("weight table has no weights"))?;
        if first.u.is_empty() {
            return Err(Error::validation("weights need at least the C^* coordinate"));
        }
        let dim = first.u.len() - 1;
        let mut levels = BTreeMap::new();
        for l in &j.levels {
            let ws = l.weights.iter().map(|w| (w.u.clone(), w.mult)).collect();
            if levels.insert(l.m, ws).is_some() {
                return Err(Error::validation(format!("level {} listed twice", l.m)));
            }
        }
        Self::new(dim, levels)
    }
}

/// One Richardson step in `1/m` on consecutive levels:
/// `R_m = m D_m - (m-1) D_{m-1}` assuming `D_m = D + c/m + O(1/m^2)`.
/// The estimate is `R_{m_max}`; the error bar is `|R_{m_max} - R_{m_max-1}|`.
pub fn df_from_weight_table(table: &EquivariantWeightTable, xi_bar: &[f64], m_max: u32) -> Result<WeightTableEstimate> {
    if m_max < 3 {
        return Err(Error::Precondition("m_max must be at least 3".into()));
    }
    let mut levels = Vec::with_capacity(m_max as usize);
    for m in 1..=m_max {
        if table.level(m).is_none() {
            return Err(Error::validation(format!("weight table is missing level {m}")));
        }
        levels.push((m, table.df_level(m, xi_bar)?));
    }
    let d = |m: u32| levels[(m - 1) as usize].1;
    let rich = |m: u32| m as f64 * d(m) - (m - 1) as f64 * d(m - 1);
    let estimate = rich(m_max);
    let error_bar = (estimate - rich(m_max - 1)).abs();
    Ok(WeightTableEstimate {
        estimate,
        error_bar,
        levels,
    })
}
