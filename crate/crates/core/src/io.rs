//! File formats and report schemas.
//!
//! Every report type rejects unknown fields, so parsing a report back is its
//! schema check: see [`roundtrip`].

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::polytope::{anticanonical_polytope, Facet, MomentPolytope};
use crate::rational::{format_rational, int, parse_rational};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FacetJson {
    pub normal: Vec<i64>,
    pub offset: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RaysJson {
    pub dim: usize,
    pub rays: Vec<Vec<i64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FacetsJson {
    pub dim: usize,
    pub facets: Vec<FacetJson>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PolytopeJson {
    Rays(RaysJson),
    Facets(FacetsJson),
}

fn parse_json<T: DeserializeOwned>(text: &str, what: &str) -> Result<T> {
    serde_json::from_str(text).map_err(|e| Error::Parse(format!("{what}: {e}")))
}

/// Reads a polytope file. Facet offsets must all be `-1`: the format
/// describes anticanonical polytopes only.
pub fn parse_polytope(text: &str) -> Result<MomentPolytope> {
    match parse_json::<PolytopeJson>(text, "polytope JSON")? {
        PolytopeJson::Rays(r) => {
            if r.rays.iter().any(|v| v.len() != r.dim) {
                return Err(Error::validation(format!("every ray must have {} coordinates", r.dim)));
            }
            anticanonical_polytope(&r.rays)
        }
        PolytopeJson::Facets(f) => {
            let mut facets = Vec::with_capacity(f.facets.len());
            for fj in &f.facets {
                let offset = parse_rational(&fj.offset)?;
                if offset != int(-1) {
                    return Err(Error::validation(format!(
                        "facet offset {} is not -1/1; only anticanonical polytopes are accepted",
                        fj.offset
                    )));
                }
                if fj.normal.len() != f.dim {
                    return Err(Error::validation(format!("every normal must have {} coordinates", f.dim)));
                }
                facets.push(fj.normal.clone());
            }
            anticanonical_polytope(&facets)
        }
    }
}

pub fn polytope_to_json(p: &MomentPolytope) -> PolytopeJson {
    PolytopeJson::Facets(FacetsJson {
        dim: p.dim(),
        facets: p
            .facets()
            .iter()
            .map(|f: &Facet| FacetJson {
                normal: f.normal.clone(),
                offset: format_rational(&f.offset),
            })
            .collect(),
    })
}

/// `m,u1,...,un` rows for each level, points in lexicographic order.
pub fn lattice_csv(p: &MomentPolytope, levels: &[u32]) -> Result<String> {
    let mut out = String::from("m");
    for i in 1..=p.dim() {
        out.push_str(&format!(",u{i}"));
    }
    out.push('\n');
    for &m in levels {
        for u in p.lattice_points(m)? {
            out.push_str(&m.to_string());
            for c in u {
                out.push_str(&format!(",{c}"));
            }
            out.push('\n');
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LevelCount {
    pub m: u32,
    pub h0: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PolytopeReport {
    pub polytope: PolytopeJson,
    pub vertices: Vec<Vec<String>>,
    pub volume: String,
    pub barycenter: Vec<String>,
    pub kahler_einstein: bool,
    pub lattice_counts: Vec<LevelCount>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct XiTableRow {
    pub m: u32,
    pub df_disc: f64,
    pub df_cont: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct XiReport {
    pub xi_star: Vec<f64>,
    pub residual: f64,
    pub iters: usize,
    pub table: Vec<XiTableRow>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConvergenceRowJson {
    pub m: u32,
    pub df_discrete: f64,
    pub df_continuum: f64,
    pub gap: f64,
    pub slope: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DfReport {
    pub xi: Vec<f64>,
    pub lambda: Vec<i64>,
    pub df_continuum: f64,
    pub rows: Vec<ConvergenceRowJson>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WeightTableReport {
    pub xi_bar: Vec<f64>,
    pub m_max: u32,
    pub estimate: f64,
    pub error_bar: f64,
    pub levels: Vec<(u32, f64)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GitReport {
    pub rep: crate::kempfness::RepJson,
    pub moment_map: Vec<f64>,
    pub verdict: crate::kempfness::StabilityVerdict,
    pub kempf_ness: crate::kempfness::KempfNessResult,
    pub lemma: Option<crate::kempfness::LemmaReport>,
    pub scaling_deviation: f64,
}

/// Serializes `value`, parses the text back with the same schema and checks
/// that nothing changed.
pub fn roundtrip<T>(value: &T) -> Result<String>
where
    T: Serialize + DeserializeOwned + PartialEq,
{
    let text = serde_json::to_string_pretty(value).map_err(|e| Error::Parse(e.to_string()))?;
    let back: T = parse_json(&text, "report")?;
    if &back != value {
        return Err(Error::Parse("report does not round-trip through its schema".into()));
    }
    Ok(text + "\n")
}

pub fn validate<T: DeserializeOwned>(text: &str) -> Result<T> {
    parse_json(text, "report")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rays_and_facets_forms() {
        let a = parse_polytope(r#"{"dim": 2, "rays": [[1,0],[0,1],[-1,-1]]}"#).unwrap();
        let text = serde_json::to_string(&polytope_to_json(&a)).unwrap();
        assert!(text.contains("\"-1/1\""));
        let b = parse_polytope(&text).unwrap();
        assert_eq!(a.vertices(), b.vertices());
    }

    #[test]
    fn rejects_malformed_input() {
        assert!(parse_polytope("{").is_err());
        assert!(parse_polytope(r#"{"dim": 1, "rays": [[1],[-1]], "extra": 0}"#).is_err());
        assert!(parse_polytope(r#"{"dim": 1, "facets": [{"normal":[1],"offset":"-2/1"},{"normal":[-1],"offset":"-1/1"}]}"#).is_err());
        assert!(parse_polytope(r#"{"dim": 2, "rays": [[1],[-1]]}"#).is_err());
    }

    #[test]
    fn lattice_dump() {
        let p = crate::catalog::example("cp1").unwrap();
        let csv = lattice_csv(&p, &[1, 2]).unwrap();
        assert!(csv.starts_with("m,u1\n1,-1\n1,0\n1,1\n2,-2\n"));
        assert_eq!(csv.lines().count(), 1 + 3 + 5);
    }

    #[test]
    fn schema_rejects_unknown_fields() {
        let r = XiReport { xi_star: vec![0.0], residual: 0.0, iters: 0, table: vec![] };
        let text = roundtrip(&r).unwrap();
        assert_eq!(validate::<XiReport>(&text).unwrap(), r);
        assert!(validate::<XiReport>(r#"{"xi_star":[],"residual":0,"iters":0,"table":[],"x":1}"#).is_err());
    }
}
