//! Provably small separating-invariant embeddings for point clouds under
//! classical group actions (permutation, orthogonal, rotation, indefinite
//! orthogonal, special linear, general linear, plus translation and scaling
//! wrappers) and for weighted graphs.
//!
//! The pieces fit together like this:
//!
//! * [`numerics`] and [`rng`] hold the shared dense-matrix operations,
//!   tolerance configuration, and deterministic randomness.
//! * [`groups`] represents group elements, their actions on clouds, random
//!   element samplers, and brute-force/exact orbit-equivalence oracles used
//!   as ground truth.
//! * [`families`] evaluates one parametric invariant per group at a single
//!   weight, together with the centering and scale-normalization wrappers.
//! * [`embedding`] samples, persists and evaluates complete embedding keys:
//!   `2D+1` random invariants for full separation on a `D`-dimensional data
//!   set or `D+1` for generic separation.
//! * [`graphs`] covers the conjugation action on weighted adjacency
//!   matrices: a cheap generic separator at any size and the factorial-cost
//!   full separator at tiny sizes.
//! * [`bitbudget`] bounds the degree of the bad-weight polynomial and turns
//!   it into a per-coordinate bit count via Schwartz-Zippel.
//! * [`experiment`] reproduces a scaled-down version of the two-class toy
//!   classification task on permutation-saturated convex sets.
//! * [`verify`] is the fuzzing harness behind `verify`-style commands and
//!   the acceptance suite.

pub mod bitbudget;
pub mod embedding;
pub mod error;
pub mod experiment;
pub mod families;
pub mod graphs;
pub mod groups;
pub mod numerics;
pub mod rng;
pub mod verify;

pub use error::{Error, Result};
pub use numerics::{PointCloud, ToleranceConfig};
pub use rng::SeededRng;

pub use nalgebra::DMatrix;
