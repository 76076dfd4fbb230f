//! Exact tracing and specification properties for closed relations.
//!
//! Systems are closed relations `F ⊆ X × X` on either a compact interval with
//! rational endpoints (finite unions of closed boxes) or a finite metric space
//! (boolean adjacency). Everything is computed with exact rationals.

pub mod catalog;
pub mod mahavier;
pub mod par;
pub mod relations;
pub mod scalar;
pub mod sets;
pub mod scenario;
pub mod specifications;
pub mod verdicts;

pub use scalar::Scalar;
