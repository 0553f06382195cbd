//! Fixed-point machinery for G-metric spaces.
//!
//! * [`gspace`]: ternary distances, the derived metric, axiom and convergence checks.
//! * [`dynamics`]: self-maps, orbits, Picard iteration and its a-priori bound.
//! * [`contraction`]: the contractive conditions, gauge functions and extension clauses.
//! * [`oracle`]: exact, exhaustive theorem checks on small finite spaces.
//!
//! The crate is `no_std` and only needs `alloc`.

#![no_std]
// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

#[cfg(any(test, feature = "std"))]
extern crate std;

pub mod contraction;
pub mod dynamics;
pub mod error;
pub mod gspace;
pub mod oracle;
pub mod point;
pub mod sampling;
pub mod scalar;

pub use error::{Error, Result};
pub use gspace::{GMetricSpace, Verdict};
pub use point::{Carrier, Point};
pub use scalar::{Rational, Scalar, Tolerance};
