//! Combing generalized real functions on the circle.
//!
//! Real functions on `[-pi, pi)` are represented by Fourier coefficients and
//! by the inner analytic function on the unit disk whose boundary real part
//! they are. Distributional content (delta spikes, jumps, derivatives of
//! deltas) is reached either as boundary limits on the disk or as
//! `eps -> 0` limits of first-order low-pass filters; `classify` compares a
//! function with its combed version to certify which points are recoverable.

pub mod catalog;
pub mod classify;
pub mod disk;
pub mod error;
pub mod extrapolate;
pub mod function;
pub mod grid;
pub mod io;
pub mod quad;
pub mod realfilter;
pub mod rescale;
pub mod spectrum;

pub use error::{Error, Result};
pub use function::{EvaluatorFunction, SingularKind, SingularPoint};
pub use spectrum::{CoefficientSequence, GeneratorTag};
