//! Exact distribution algebra on finitely generated abelian groups and the
//! machinery to check identical-distribution characterization theorems on
//! them: four-linear-forms instances, admissibility conditions, symbolic
//! finite-difference elimination, coefficient reduction, counterexample
//! constructions, and verdict reporting.

pub mod counterexamples;
pub mod dist;
pub mod elimination;
pub mod engine;
pub mod error;
pub mod forms;
pub mod group;
pub mod json;
pub mod linalg;
pub mod phase;
pub mod reduction;
pub mod spectral;

pub use dist::{Classification, Pmf};
pub use engine::{verify_instance, GroupClass, Verdict};
pub use error::{Error, Result};
pub use forms::{FormSystem, InstanceSpec, Mode};
pub use group::{admissible, annihilator, subgroups, DualPoint, Group, GroupElement, Subgroup};
pub use phase::{Phase, Rat, RootSum, SplitMix64};
