//! Discrete minimizers and free boundary diagnostics for the vectorial thin
//! one-phase problem
//!
//! ```text
//! J(G, B) = ∫_B |∇G|^2 + L_n({|G| > 0} ∩ {x_{n+1} = 0}),   G : B ⊂ R^{n+1} → R^m,
//! ```
//!
//! on structured grids covering the upper half of a box, with even reflection
//! across the plate `{x_{n+1} = 0}`.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod analysis;
pub mod blowup;
pub mod energy;
pub mod error;
pub mod field;
pub mod geometry;
pub mod profiles;
pub mod solver;
pub mod weiss;

pub use error::{Error, Result};
pub use field::{PlateMask, VectorField};
pub use geometry::{make_grid, Ball, Grid, GridSpec};
pub use profiles::{eval_u, ProfileKind, ProfileSpec};
pub use solver::{solve, SolveState, SolverConfig};
