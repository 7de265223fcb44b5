//! Intrinsic bounds on two-qubit polarization entanglement generated from a
//! partially polarized pump.
//!
//! For a pump with degree of polarization `P`, any trace-preserving, unital
//! generation process yields a two-qubit state with concurrence at most
//! `(1 + P) / 2`; states supported on a 2x2 computational block obey
//! `C <= P`. The crate provides the numerics to check both statements, a
//! simulator of a tunable two-arm down-conversion source, and a seeded Monte
//! Carlo sweep over that source.

pub mod error;
pub mod matrix;
pub mod rng;

pub use error::{Error, Result};
pub use matrix::{
    hermitian_eig, random_haar_unitary, sqrt_psd, tensor, ComplexMatrix, Spectrum, C64,
};
pub mod channels;
pub mod cli;
pub mod polarization;
pub mod scheme;
pub mod sweep;
pub mod twoqubit;
