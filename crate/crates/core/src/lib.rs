//! Configuration of parameterized algorithms and mechanisms whose utility is a
//! piecewise-Lipschitz function of the parameter.

// `!(x > 0.0)` is used on purpose so NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod piecewise;

pub use error::{Error, Result};
pub use piecewise::{Domain, Piece, PieceForm, PiecewiseFn1D, UtilityCurve};
pub mod dispersion;
pub mod greedy;
pub mod harness;
pub mod iqp;
pub mod market;
pub mod online;
pub mod private;
pub mod rademacher;
pub mod stats;
