//! Statistical ensembles on the projective quantum phase space.
//!
//! Pure states are points of `CP^n`, stored as normalized amplitude vectors.
//! The crate provides Fubini–Study geometry, Schrödinger evolution viewed as a
//! Hamiltonian flow on phase space, and the microcanonical and canonical
//! phase-space ensembles with their density matrices, estimated by Monte Carlo
//! over the unitarily invariant measure. Closed forms for two-level systems
//! double as oracles for the estimators.
//!
//! The crate is `no_std` and only needs `alloc`. File formats and the command
//! line live in the `qphase` crate.

#![no_std]
#![forbid(unsafe_code)]
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod ensembles;
mod error;
pub mod flow;
pub mod geometry;
pub mod linalg;
pub mod sampling;
pub mod two_state;

pub use crate::error::{Error, Result};
pub use crate::geometry::{
    eigendecompose, expectation, fs_angle, observable_variance, projector, transition_probability,
    DensityMatrix, HermitianObservable, PureState, Spectrum,
};
pub use crate::linalg::{CMatrix, C64};
pub use crate::sampling::{sample_fs_uniform, FsSampler};
