//! Convexification solver for recovering the attenuation coefficient of the
//! stationary radiative transfer equation from boundary measurements.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod boundary;
pub mod carleman;
pub mod config;
pub mod error;
pub mod field;
pub mod forward;
pub mod geometry;
pub mod inverse;
pub mod io;
pub mod kernel;
pub mod phantom;
pub mod pipeline;
pub mod recovery;
pub mod rng;
pub mod verify;

pub use error::{Error, Result};
