//! Fixed-depth native-gate synthesis of Haar-random unitaries, restricted and
//! Clifford randomized benchmarking on a built-in noisy density-matrix
//! simulator, decay fitting, and gate-dependent noise analysis.
//!
//! The native alphabet is `RZ` (any angle), `RX` (`±π/2`, `±π`) and `CZ`.
//! Arbitrary single-qubit unitaries compile to exactly 5 native gates and
//! two-qubit unitaries to exactly 43 (three of them CZ), so random circuits
//! have depth independent of the sampled unitary.

pub mod error;
pub mod linalg;
pub mod quantum;
pub mod gates;
pub mod synth;
pub mod rng;
pub mod stats;
pub mod haar;
pub mod analysis;
pub mod channels;
pub mod rb;

pub use error::{Error, Result};
