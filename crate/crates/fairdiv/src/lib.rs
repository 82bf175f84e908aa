//! # fairdiv
//!
//! A fair-division engine for indivisible goods. It implements and certifies
//! a family of EFX approximation algorithms — envy-cycle elimination, a
//! general partial-allocation approximation framework, top-`n` agreement
//! solvers, and an exact-EFX constructor for common tiered rankings — along
//! with exact fairness verifiers, seeded instance generators, and a
//! brute-force oracle for desk-scale ground truth.
//!
//! All arithmetic is exact rational; verdicts never depend on floating-point
//! tolerances.

pub mod allocation;
pub mod ece;
pub mod envy;
pub mod error;
pub mod instance;
pub mod valuation;
pub mod value;
pub mod verify;

pub use allocation::Allocation;
pub use envy::{build_envy_graph, envy_levels, EnvyGraph, EnvyLevels};
pub use error::Error;
pub use instance::{Hints, Instance};
pub use valuation::{check_cancelable, is_monotone, Cancelability, Valuation};
pub use value::Value;
