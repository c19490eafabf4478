//! Adaptive quantum state preparation from matrix product states.
//!
//! A target amplitude vector is decomposed into a right-canonical MPS with
//! [`mps::decompose`], optionally truncated bond by bond with
//! [`mps::next_truncation`] and [`mps::apply_truncation`], and turned into a
//! sequential circuit of contiguous multi-qubit unitaries by
//! [`circuit::synthesize`]. [`sim`] checks the result on a statevector and
//! [`bench`] compares methods over corpora of targets.

pub mod bench;
pub mod circuit;
pub mod error;
pub mod linalg;
pub mod mps;
pub mod qubits;
pub mod report;
pub mod sim;

pub use error::{Error, Result};
