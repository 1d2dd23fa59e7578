//! Percolation of σ-trajectories on the three-dot system.
//!
//! The three-dot system is the group of F₂ configurations `x` on ℤ² with
//! `x(k,l) + x(k+1,l) + x(k,l+1) = 0` everywhere. On `Y = {x(0,0) = 1}` exactly
//! one of `Tx`, `Sx` lies in `Y` again, which defines the map σ. This crate
//! samples configurations exactly from the Haar measure and from the ribbon
//! measure `μ = μ₁ * ν`, follows σ on finite windows, and audits the counting
//! bounds that separate tree-type from ribbon-type behaviour.
//!
//! Modules:
//! * [`lattice`]: positions, windows, patches, completion from free coordinates;
//! * [`haar`]: exact Haar sampling and the F₂-rank cylinder oracle;
//! * [`ribbon`]: the doubling embedding, the ribbon measure, its decoder and state machine;
//! * [`sigma`]: σ-steps, antecedents, triangle components, deep marking, joining;
//! * [`stats`]: Burton–Keane audits, evidence curves and the tree/ribbon classifier.

pub mod bits;
pub mod error;
pub mod haar;
pub mod lattice;
pub mod ribbon;
pub mod rng;
pub mod sigma;
pub mod stats;
mod union_find;

pub use error::{Error, Result};
pub use lattice::{Geometry, Move, Patch, Position, Triangle};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/lattice.md")]
    mod lattice {}
    #[doc = include_str!("../../../book/src/haar.md")]
    mod haar {}
    #[doc = include_str!("../../../book/src/sigma.md")]
    mod sigma {}
    #[doc = include_str!("../../../book/src/ribbon.md")]
    mod ribbon {}
    #[doc = include_str!("../../../book/src/audits.md")]
    mod audits {}
    #[doc = include_str!("../../../book/src/classifier.md")]
    mod classifier {}
}
