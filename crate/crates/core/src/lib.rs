//! Toolkit for K-stability computations on toric Fano data.
//!
//! * [`polytope`]: exact anticanonical polytopes, lattice points and moments.
//! * [`character`]: Hilbert characters as weight-multiplicity maps.
//! * [`soliton`]: modified Donaldson-Futaki invariants and K-optimal vectors.
//! * [`momentmap`]: numerical checks of the scalar-curvature moment map and
//!   the supporting tensor identities.
//! * [`kempfness`]: torus representations, polystability and Kempf-Ness minimization.
//! * [`cli`]: the command-line front end.

pub mod catalog;
pub mod character;
pub mod cli;
pub mod error;
pub mod expint;
pub mod io;
pub mod kempfness;
pub mod momentmap;
pub mod polytope;
pub mod rational;
pub mod soliton;
pub mod stats;

pub use error::{Error, Result};
pub use polytope::{anticanonical_polytope, ExpMoments, Facet, MomentPolytope};
