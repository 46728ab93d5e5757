//! Support-set solver for smooth minimization over the nonnegative Stiefel
//! manifold `{X in R^{n x p} : X^T X = I, X >= 0}`.
//!
//! Every feasible matrix has at most one nonzero entry per row, so points are
//! stored as one optional `(column, value)` pair per row ([`SupportMatrix`]).
//! The solver alternates two closed-form moves on that representation:
//!
//! - a proximal-linearization step on a fixed support, with zero rows
//!   activated at the most negative gradient entry;
//! - when that step stalls, a sweep that tries relocating each small row's
//!   entry to every column and keeps the best one.
//!
//! The crate is `no_std` (it needs `alloc`). File formats, the CLI and timing
//! live in the companion `sso` crate.
//!
//! ```
//! use sso_core::{problems, solver::{solve, SolverOptions}, objective::NpcaObjective};
//!
//! let inst = problems::gen_planted_npca(40, 12, 3, 7).unwrap();
//! let obj = NpcaObjective::new(inst.a.clone());
//! let x0 = problems::gen_random_feasible(40, 3, 8).unwrap();
//! let res = solve(&obj, &x0, &SolverOptions::default()).unwrap();
//! assert!(res.f_final <= obj_value_at(&obj, &x0));
//! # fn obj_value_at(o: &NpcaObjective, x: &sso_core::SupportMatrix) -> f64 {
//! #     use sso_core::objective::Objective; o.value(x).unwrap()
//! # }
//! ```

#![cfg_attr(not(any(feature = "std", test)), no_std)]

extern crate alloc;

pub mod dense;
pub mod eigen;
mod error;
pub mod metrics;
pub mod objective;
#[cfg(feature = "oracle")]
pub mod oracle;
pub mod problems;
pub mod solver;
pub mod stationarity;
pub mod subproblem;
pub mod support;

pub use dense::DenseMatrix;
pub use error::{Error, Result};
pub use support::{SignPattern, SupportMatrix};
