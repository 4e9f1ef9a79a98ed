//! Stochastic kinetic models (SKMs) as marked point processes.
//!
//! The crate covers the structural side (reaction networks, kinetic
//! independence graphs, triangulation and junction trees, modularization
//! checks) and the stochastic side (exact simulation, likelihoods, subprocess
//! projection and path reconstruction).

pub mod chordal;
pub mod kig;
pub mod modcheck;
pub mod netmodel;
pub mod report;
pub mod ssa;

pub use netmodel::{ReactionNetwork, ReactionSet, SpeciesSet};
pub use report::{Finding, Severity, ValidationReport};
