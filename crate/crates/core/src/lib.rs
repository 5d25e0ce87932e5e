//! GENERIC (metriplectic) formulations of damped Timoshenko and Bresse beams
//! on a periodic grid: building blocks `{L, M, E, S}`, a structure-checking
//! verifier, and an explicit integrator with energy/entropy diagnostics.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod catalog;
pub mod cli;
pub mod engine;
pub mod error;
pub mod functionals;
pub mod grid;
pub mod operators;
pub mod state;

pub use catalog::{build_model, default_initial_state, Family, ModelId, ModelSpec};
pub use engine::{
    decay_rate, direct_rhs, generic_rhs, integrate, integrate_observed, step_rk4, verify_brackets,
    verify_model, DiagnosticsRecord, GenericSystem, IntegratorConfig, VerificationReport,
};
pub use error::{Error, Result};
pub use functionals::{FunctionalKind, ModelParams};
pub use grid::{Field, Grid};
pub use operators::{BlockKind, BlockOperator, FactoredDissipator};
pub use state::{CotangentVector, FieldName, Slot, State, StateLayout};
