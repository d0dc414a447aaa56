//! Exact-arithmetic toolkit for Branch sequences: perturbed rational powers
//! `xi (p/q)^n` renormalised by powers of `q`, their carry structure, the
//! Syracuse map as a concrete instance, and a 2-adic lattice renderer.

pub mod branch;
pub mod cagrid;
pub mod carries;
pub mod cli;
pub mod error;
pub mod lemmalab;
pub mod numkernel;
pub mod syracuse;

pub use error::{Error, Result};
pub use numkernel::ExactRational;
