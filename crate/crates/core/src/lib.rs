//! Canonical forms for nonderogatory complex matrices under unitary
//! similarity and for matrix pairs `(M, N)` under simultaneous similarity
//! when `M` has distinct eigenvalues.
//!
//! Both canonical forms are labeled by a forest: an undirected one for the
//! unitary case ([`unitary`]) and a directed one for pairs ([`pair`]). Two
//! inputs are equivalent exactly when their canonical forms coincide.

pub mod cli;
pub mod error;
pub mod forests;
pub mod io;
pub mod linalg;
pub mod numerics;
pub mod oracles;
pub mod pair;
pub mod triangularize;
pub mod unitary;

pub use error::{Error, Result};
pub use numerics::{ComplexMatrix, ComplexScalar, ToleranceConfig};
