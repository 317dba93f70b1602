//! Finite-size laboratory for the random tree fragmentation and its
//! excursion encoding.
//!
//! A uniform Cayley tree is cut edge by edge at random times. The genealogy
//! of the resulting fragments is the cut-tree; a greedy exploration of the
//! cut-tree (Pac-Man) yields a function `F` whose drifted running-minimum
//! excursions reproduce the fragment masses exactly. The crate builds every
//! object on both sides, maps between them, and checks the identities in
//! exact rational arithmetic (rank mode) or in `f64` (exponential mode).

// Negated comparisons are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cut_tree;
pub mod error;
pub mod excursion_ops;
pub mod fragmentation;
pub mod harness;
pub mod model;
pub mod pacman;
pub mod prim;
pub mod reconstruct;
pub mod samplers;
pub mod scalar;

pub use cut_tree::{build_cut_tree, CutTree, NodeId};
pub use error::{Error, Result};
pub use model::{CutSchedule, Instance, MassList, Mode, RootedTree};
pub use scalar::{Exact, Scalar};
