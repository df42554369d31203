//! Stabilizer-code simulation toolkit.
//!
//! The crate is organised around five concerns:
//!
//! - [`pauli`] — Pauli-operator algebra over GF(2) symplectic vectors:
//!   multiplication with exact phase tracking, commutation, group
//!   membership and extraction of logical operator pairs.
//! - [`codes`] — repetition and planar surface-code layouts, layout
//!   validation, hole deformation (unmeasured stabilizers) and braid
//!   transformations of logical operators.
//! - [`coherent`] — dense state-vector simulation of QEC cycles under
//!   small coherent rotations, with ideal-projection and ancilla-circuit
//!   measurement modes, skip semantics for silent stabilizers and the
//!   logical-error-angle experiments.
//! - [`frame`] — Pauli-frame Monte Carlo for the discrete error model:
//!   i.i.d. flips, measurement errors, matching decoders, threshold scans
//!   and silent-failure injection.
//! - [`budget`] — the global failure-budget estimate combining the QEC
//!   suppression term with the silent-failure term, plus its inversion
//!   and code-size optimisation.
//!
//! All Monte Carlo entry points take a 64-bit master seed and derive one
//! counter-mode RNG stream per shot, so results are bit-identical for a
//! fixed seed regardless of how many worker threads run the shots.

pub mod bits;
pub mod budget;
pub mod codes;
pub mod coherent;
pub mod decoder;
pub mod frame;
pub mod pauli;

pub use codes::{CodeKind, CodeLayout, Hole, StabKind, Stabilizer};
pub use pauli::{LogicalPair, PauliOperator, SymplecticBasis};
