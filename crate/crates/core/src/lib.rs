//! Exact combinatorics of unextendible orthogonal matrices (UOMs).
//!
//! A UOM is a formal matrix whose entries are *vector variables*: symbols
//! `x` with an involutive perpendicular companion `x'`, scoped to a column.
//! Two rows are orthogonal when some column holds a pair `x` / `x'`. A matrix
//! with pairwise-orthogonal rows is *unextendible* when no further row can be
//! orthogonal to all of its rows. Evaluating the variables at unit vectors in
//! C^2 turns an m-row UOM on n columns into an unextendible product basis
//! (UPB) of n qubits, which is what makes these matrices worth cataloguing.
//!
//! The crate provides:
//! * [`matrix`] — the symbol/matrix types, parsing, and level statistics;
//! * [`unextend`] — extension search (the unextendibility test) with witnesses;
//! * [`equiv`] — canonical forms and keys under row/column permutation and
//!   involution-respecting renaming;
//! * [`order`] — identifications, covering neighbors, and Hasse diagrams of
//!   the induced partial order;
//! * [`compose`] — block composition `A ⊨ (B1,…,Br)`, factorization, and the
//!   maximality/minimality criteria for decomposable matrices;
//! * [`numeric`] — evaluations at concrete qubit states, generic sampling,
//!   the numeric UPB test, recovery of a matrix from a product set, and
//!   closure paths;
//! * [`catalog`] — parsing and verification of the bundled class catalogs and
//!   arrow tables;
//! * [`enumerate`] — orderly, isomorph-free enumeration of UOM classes;
//! * [`report`] — serializable report types shared by the CLI and the wasm
//!   demo.

pub mod catalog;
pub mod compose;
pub mod enumerate;
pub mod equiv;
pub mod error;
pub mod matrix;
pub mod numeric;
pub mod order;
pub mod report;
pub mod unextend;
pub(crate) mod util;

pub use error::{Error, Result};
pub use matrix::{rows_orthogonal, LevelProfile, Symbol, VarMatrix};
