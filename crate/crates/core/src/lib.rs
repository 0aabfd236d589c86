//! Dyadic square families, the non-doubling measures they carry, and numerical
//! checks of the Calderón–Zygmund estimates for the associated modified
//! Ahlfors–Beurling kernels.
//!
//! The crate is organised bottom-up: [`geometry`] builds and validates the
//! families, [`measure`] discretizes the measure, [`kernels`] evaluates the
//! kernels and their regularity constants, [`operators`] applies them,
//! [`fast_sum`] accelerates the off-square sums and [`verify`] turns all of it
//! into reports. [`cli`] is the command-line front end.

pub mod cli;
pub mod error;
pub mod fast_sum;
pub mod geometry;
pub mod io;
pub mod kernels;
pub mod measure;
pub mod operators;
pub mod verify;

pub use error::{Error, Result};
