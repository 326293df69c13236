//! # coherence-core
//!
//! Numerical toolkit for quantum coherence in a fixed computational basis.
//!
//! The central quantity is the *intrinsic randomness* of a state: for a pure
//! state it is the Shannon entropy of its computational-basis outcome
//! distribution, and for a mixed state it is the convex roof of that
//! functional, i.e. the smallest average over all pure-state ensembles that
//! reproduce the state.
//!
//! ## Modules
//!
//! - [`state`]: density matrices, pure states, entropies, dephasing, Bloch
//!   conversions and seeded random states.
//! - [`measures`]: closed-form coherence quantifiers (relative entropy,
//!   l1 norm, pure-state randomness, exact qubit formula via the coherence
//!   concurrence).
//! - [`roof`]: numerical convex-roof optimizer over ensemble isometries plus a
//!   brute-force qubit oracle.
//! - [`channels`]: incoherent Kraus sets and their application.
//! - [`properties`]: executable checks of the coherence-measure axioms.
//! - [`distill`]: the pure-qubit coherence distillation protocol, exact and
//!   bookkeeping modes.
//! - [`qrng`]: outcome sampling, entropy estimation and Toeplitz extraction.
//! - [`io`]: the JSON state-file format shared by the CLI.
//!
//! All entropies are in bits.

#![forbid(unsafe_code)]
// `!(x <= tol)` is used on purpose so that NaN counts as a violation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod channels;
pub mod distill;
pub mod error;
pub mod io;
pub mod measures;
pub mod properties;
pub mod qrng;
pub mod rng;
pub mod roof;
pub mod state;

pub use error::{Error, Result};
pub use measures::{MeasureId, MeasureValue};
pub use state::{BlochVector, CMatrix, CVector, DensityMatrix, ProbabilityVector, PureState, C64};
