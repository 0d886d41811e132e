//! Disorder-induced non-Markovianity of an emitter in a coupled-cavity ring.
//!
//! The emitter sits at cavity 0 of a ring of `2N+1` cavities with random
//! detunings. In the single-excitation sector the excited-state amplitude
//! `α(t)` defines an amplitude-damping channel whose non-Markovianity is
//! measured from the revivals of `|α|⁴`.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod dynamics;
pub mod ensemble;
mod error;
pub mod lattice;
pub mod nonmarkov;
pub mod pheno;
pub mod report;
pub mod spectral;

pub use error::{Error, Result};
