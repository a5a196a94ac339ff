//! Two-step (linear ramp, then hold) quench dynamics of free-fermion
//! lattice models and exact Loschmidt-echo zeros in finite systems.
//!
//! The pipeline per momentum mode is: ground spinor of the initial kernel
//! ([`models`]), evolution through the ramp ([`ramp`]), overlap
//! coefficients with the final eigenbasis and the Loschmidt product
//! ([`loschmidt`]). [`critical`] tunes the ramp duration so a chosen mode
//! hosts exact zeros; [`dtop`] tracks the geometric-phase winding; and
//! [`oracle`] is a dense many-body reference for small chains.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod critical;
pub mod dtop;
pub mod error;
pub mod loschmidt;
pub mod models;
pub mod oracle;
pub mod ramp;
pub mod roots;
pub mod spinor;

pub use error::{LezError, Result};
pub use models::{
    chain_grid, chain_momentum, haldane_phase_boundary, honeycomb_grid, tfim_spectrum, FinalEigenbasis, GridSize,
    Haldane, HaldaneConvention, HoneycombOrientation, Kernel, KernelFamily, ModeGrid, Tfim, Xy,
};
pub use ramp::{evolve_ramp, evolve_ramp_batch, RampSchedule};
pub use spinor::SpinorState;
