//! Archetypal cases for nominal multiple-choice data.
//!
//! Nominal questionnaire answers are dummy-coded into a binary design matrix,
//! and two convex-hull factorizations are fitted on it:
//!
//! * [`aa`]: archetype analysis, where archetypes are convex combinations of
//!   observations;
//! * [`ada`]: archetypoid analysis, where every archetype is an actual
//!   observation, found by BUILD initialization from an archetype fit followed
//!   by best-improvement SWAP.
//!
//! [`evaluation`] compares profile sets through Hamming distances and
//! [`projection`] places mixture weights on a circular simplex layout.
//!
//! The crate is `no_std` with `alloc`. The `parallel` feature (which implies
//! `std`) spreads row solves, restarts and swap evaluations over rayon; results
//! are identical to the sequential build.
#![cfg_attr(not(feature = "std"), no_std)]
#![deny(unsafe_code)]

extern crate alloc;

pub mod aa;
pub mod ada;
pub mod encoding;
pub mod error;
pub mod evaluation;
pub mod matrix;
pub mod projection;
pub mod simplex_ls;

mod par;
mod patterns;

pub use aa::{compute_rss, fit_aa, AaModel, AaOptions};
pub use ada::{
    build_candidates, evaluate_indices, fit_ada, fit_ada_from_aa, AdaInit, AdaModel, BuildCandidates, InitKind, StartReport,
};
pub use encoding::{decode_dummy, encode_dummy, ColumnGroup, DummyMatrix, NominalTable, Outcome, VariableSchema};
pub use error::{Error, Result};
pub use evaluation::{
    binarize, coverage_check, distance_summary, hamming_matrix, BinaryMatrix, Coverage, DistanceMatrix,
    EvaluationReport, Method,
};
pub use matrix::Matrix;
pub use projection::{project_simplex, Point, SimplexLayout};
pub use simplex_ls::{solve_simplex_ls, SimplexLs, SimplexSolution, SimplexWeights};
