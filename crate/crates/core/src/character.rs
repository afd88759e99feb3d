//! Hilbert characters of toric Fano manifolds.
//!
//! For a smooth toric Fano the higher cohomology of `-mK` vanishes and each
//! lattice point of `mP` spans a one-dimensional weight space, so the character
//! at level `m` is the indicator map of `mP ∩ M`.

use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

use crate::error::{check_dim, check_finite, Error, Result};
use crate::polytope::MomentPolytope;
use crate::stats::loglog_slope;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WeightedCharacter {
    level: u32,
    dim: usize,
    weights: BTreeMap<Vec<i64>, u64>,
}

impl WeightedCharacter {
    /// Builds a character from explicit weights; zero multiplicities are dropped.
    pub fn new(level: u32, dim: usize, weights: impl IntoIterator<Item = (Vec<i64>, u64)>) -> Result<Self> {
        if level == 0 {
            return Err(Error::validation("character level must be at least 1"));
        }
        let mut map = BTreeMap::new();
        for (u, k) in weights {
            check_dim(dim, u.len())?;
            if k > 0 {
                *map.entry(u).or_insert(0) += k;
            }
        }
        Ok(Self { level, dim, weights: map })
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// `h^0(m)`.
    pub fn total(&self) -> u64 {
        self.weights.values().sum()
    }

    pub fn multiplicity(&self, u: &[i64]) -> u64 {
        self.weights.get(u).copied().unwrap_or(0)
    }

    /// Weights in lexicographic order.
    pub fn iter(&self) -> impl Iterator<Item = (&Vec<i64>, u64)> {
        self.weights.iter().map(|(u, &k)| (u, k))
    }

    /// Canonical representative modulo translations and signed coordinate
    /// permutations: the lexicographically smallest sorted weight list over all
    /// signed permutations, each translated so its minimal weight sits at 0.
    pub fn normal_form(&self) -> Vec<(Vec<i64>, u64)> {
        let n = self.dim;
        let mut best: Option<Vec<(Vec<i64>, u64)>> = None;
        for perm in permutations(n) {
            for signs in 0u32..(1 << n) {
                let mut list: Vec<(Vec<i64>, u64)> = self
                    .weights
                    .iter()
                    .map(|(u, &k)| {
                        let v: Vec<i64> = (0..n)
                            .map(|i| {
                                let x = u[perm[i]];
                                if signs >> i & 1 == 1 { -x } else { x }
                            })
                            .collect();
                        (v, k)
                    })
                    .collect();
                list.sort();
                if let Some(shift) = list.first().map(|(u, _)| u.clone()) {
                    for (u, _) in list.iter_mut() {
                        for (a, s) in u.iter_mut().zip(&shift) {
                            *a -= s;
                        }
                    }
                    list.sort();
                }
                if best.as_ref().is_none_or(|b| list < *b) {
                    best = Some(list);
                }
            }
        }
        best.unwrap_or_default()
    }

    pub fn to_json(&self) -> CharacterJson {
        CharacterJson {
            m: self.level,
            weights: self
                .weights
                .iter()
                .map(|(u, &k)| WeightJson { u: u.clone(), mult: k })
                .collect(),
        }
    }

    pub fn from_json(j: &CharacterJson) -> Result<Self> {
        let dim = j
            .weights
            .first()
            .map(|w| w.u.len())
            .ok_or_else(|| Error::validation("character has no weights"))?;
        if j.weights.iter().any(|w| w.mult == 0) {
            return Err(Error::validation("multiplicities must be positive"));
        }
        Self::new(j.m, dim, j.weights.iter().map(|w| (w.u.clone(), w.mult)))
    }

    /// CSV with header `u1,...,un,mult`.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        let header: Vec<String> = (1..=self.dim).map(|i| format!("u{i}")).collect();
        out.push_str(&header.join(","));
        out.push_str(",mult\n");
        for (u, k) in self.iter() {
            let row: Vec<String> = u.iter().map(|x| x.to_string()).collect();
            out.push_str(&row.join(","));
            out.push_str(&format!(",{k}\n"));
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WeightJson {
    pub u: Vec<i64>,
    pub mult: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CharacterJson {
    pub m: u32,
    pub weights: Vec<WeightJson>,
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for pos in 0..=p.len() {
            let mut q = p.clone();
            q.insert(pos, n - 1);
            out.push(q);
        }
    }
    out.sort();
    out
}

pub fn hilbert_character(p: &MomentPolytope, m: u32) -> Result<WeightedCharacter> {
    let pts = p.lattice_points(m)?;
    WeightedCharacter::new(m, p.dim(), pts.into_iter().map(|u| (u, 1)))
}

/// `sum_u mult(u) e^<u, eta>`.
pub fn character_value(chi: &WeightedCharacter, eta: &[f64]) -> Result<f64> {
    check_dim(chi.dim, eta.len())?;
    check_finite(eta, "eta")?;
    Ok(chi
        .iter()
        .map(|(u, k)| k as f64 * dot(u, eta).exp())
        .sum())
}

pub(crate) fn dot(u: &[i64], x: &[f64]) -> f64 {
    u.iter().zip(x).map(|(&a, b)| a as f64 * b).sum()
}

/// Raw equality of weight maps. With `normalize`, compares normal forms
/// modulo translation and signed coordinate permutations instead.
pub fn characters_equal(a: &WeightedCharacter, b: &WeightedCharacter, normalize: bool) -> Result<bool> {
    if a.level != b.level {
        return Err(Error::validation(format!(
            "character levels differ: {} vs {}",
            a.level, b.level
        )));
    }
    if a.dim != b.dim {
        return Ok(false);
    }
    if normalize {
        Ok(a.normal_form() == b.normal_form())
    } else {
        Ok(a.weights == b.weights)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HrrRow {
    pub m: u32,
    pub h0: u64,
    /// `h^0(m) / m^n`
    pub normalized_count: f64,
    /// `|h^0(m)/m^n - vol(P)|`
    pub count_gap: f64,
    /// `m^{-n} sum_u e^{<u,eta>/m}`
    pub weighted_value: f64,
    /// `|weighted_value - F(eta)|`
    pub value_gap: f64,
    /// `m^{-(n+1)} sum_u u e^{<u,eta>/m}`
    pub weighted_moment: Vec<f64>,
    /// max-norm distance of `weighted_moment` from the exponential gradient
    pub moment_gap: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HrrReport {
    pub volume: f64,
    pub continuum_value: f64,
    pub continuum_moment: Vec<f64>,
    pub rows: Vec<HrrRow>,
    pub count_exponent: Option<f64>,
    pub value_exponent: Option<f64>,
    pub moment_exponent: Option<f64>,
}

/// Leading-order consistency of `chi_m` with the continuum integrals over `P`.
pub fn hrr_asymptotic_check(p: &MomentPolytope, m_list: &[u32], eta: &[f64]) -> Result<HrrReport> {
    if m_list.len() < 3 {
        return Err(Error::Precondition(
            "asymptotic check needs at least three levels".into(),
        ));
    }
    if m_list.windows(2).any(|w| w[0] >= w[1]) || m_list[0] == 0 {
        return Err(Error::Precondition("levels must be positive and increasing".into()));
    }
    check_dim(p.dim(), eta.len())?;
    let n = p.dim() as i32;
    let volume = crate::rational::to_f64(&p.volume());
    let em = p.exp_moments(eta)?;
    let mut rows = Vec::new();
    for &m in m_list {
        let chi = hilbert_character(p, m)?;
        let mf = m as f64;
        let h0 = chi.total();
        let normalized_count = h0 as f64 / mf.powi(n);
        let scaled: Vec<f64> = eta.iter().map(|e| e / mf).collect();
        let mut value = 0.0;
        let mut moment = vec![0.0; p.dim()];
        for (u, k) in chi.iter() {
            let w = k as f64 * dot(u, &scaled).exp();
            value += w;
            for (acc, &ui) in moment.iter_mut().zip(u) {
                *acc += w * ui as f64;
            }
        }
        let weighted_value = value / mf.powi(n);
        let weighted_moment: Vec<f64> = moment.iter().map(|x| x / mf.powi(n + 1)).collect();
        let moment_gap = weighted_moment
            .iter()
            .zip(em.gradient.iter())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        rows.push(HrrRow {
            m,
            h0,
            normalized_count,
            count_gap: (normalized_count - volume).abs(),
            weighted_value,
            value_gap: (weighted_value - em.value).abs(),
            weighted_moment,
            moment_gap,
        });
    }
    let ms: Vec<f64> = rows.iter().map(|r| r.m as f64).collect();
    let pick = |f: fn(&HrrRow) -> f64| loglog_slope(&ms, &rows.iter().map(f).collect::<Vec<_>>());
    Ok(HrrReport {
        volume,
        continuum_value: em.value,
        continuum_moment: em.gradient.iter().copied().collect(),
        count_exponent: pick(|r| r.count_gap),
        value_exponent: pick(|r| r.value_gap),
        moment_exponent: pick(|r| r.moment_gap),
        rows,
    })
}
