//! Method of freezing combined with reduced-basis model order reduction.
//!
//! The crate is `no_std` (it needs `alloc`) and contains the numerical core:
//!
//! * [`grid`]: periodic structured grids, discrete fields, the L² product and
//!   the discrete translation group action,
//! * [`operators`]: the finite-volume Burgers operator, its frozen
//!   counterpart, the Lie-algebra shift operators and stencil-local
//!   restricted evaluation,
//! * [`freezing`]: the detailed frozen scheme (explicit Euler + orthogonality
//!   phase condition + reconstruction of the group trajectory),
//! * [`reduction`]: snapshot collection, POD, POD-Greedy and EI-Greedy,
//! * [`online`]: the reduced frozen scheme evaluated from precomputed,
//!   grid-size independent matrices.
//!
//! File formats, configuration and the command line live in the companion
//! `frozenrb` crate.
#![cfg_attr(not(test), no_std)]

extern crate alloc;

mod error;
pub mod freezing;
pub mod grid;
mod numeric;
pub mod online;
pub mod operators;
pub mod reduction;

pub use error::{Error, Result};
pub use freezing::{FrozenTrajectory, PhaseCondition, PhaseSolution};
pub use grid::{Field, GridSpec, GroupVec, LieAlgebraVec};
pub use online::{OnlineSystem, OpCount, ReducedTrajectory};
pub use operators::BurgersParams;
pub use reduction::{EIData, ReducedBasis, SnapshotSet};
