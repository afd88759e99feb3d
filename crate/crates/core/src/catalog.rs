//! Built-in smooth toric Fano examples, given by their fan rays.

use crate::error::{Error, Result};
use crate::polytope::{anticanonical_polytope, MomentPolytope};

pub const NAMES: &[&str] = &["cp1", "cp2", "p1xp1", "bl1cp2", "bl2cp2", "dp6"];

pub fn rays(name: &str) -> Option<Vec<Vec<i64>>> {
    let r: &[&[i64]] = match name {
        "cp1" => &[&[1], &[-1]],
        "cp2" => &[&[1, 0], &[0, 1], &[-1, -1]],
        "p1xp1" => &[&[1, 0], &[0, 1], &[-1, 0], &[0, -1]],
        // CP^2 blown up at one torus-fixed point
        "bl1cp2" => &[&[1, 0], &[0, 1], &[-1, -1], &[1, 1]],
        "bl2cp2" => &[&[1, 0], &[1, 1], &[0, 1], &[-1, 0], &[-1, -1]],
        // del Pezzo surface of degree 6
        "dp6" => &[&[1, 0], &[1, 1], &[0, 1], &[-1, 0], &[-1, -1], &[0, -1]],
        _ => return None,
    };
    Some(r.iter().map(|v| v.to_vec()).collect())
}

pub fn example(name: &str) -> Result<MomentPolytope> {
    let r = rays(name).ok_or_else(|| {
        Error::validation(format!(
            "unknown example {name:?}; expected one of {}",
            NAMES.join(", ")
        ))
    })?;
    anticanonical_polytope(&r)
}
