//! Volume-variation cocycles for `SL_n(C)` representations of cusped
//! hyperbolic 3-manifolds.
//!
//! The crate is `no_std` (with `alloc`) and purely computational:
//!
//! * [`matrix`]: dense complex matrices and the small amount of numerical
//!   linear algebra needed (Schur form, SVD, rank).
//! * [`lie`]: `sl_n`, `su_n` and Borel elements, the standard real bases,
//!   projections, exponential, simultaneous triangularization and
//!   branch-tracked logarithms.
//! * [`forms`]: the cochains `ϖ`, `β`, `γ`, `ζ`, the `var` map and the
//!   Chevalley–Eilenberg differentials used to check the cocycle chain.
//! * [`variation`]: the per-cusp volume rate, its Hodgson, BFG and DGG
//!   counterparts, the Veronese embedding and jet extraction.
//! * [`fig8`]: the figure-eight deformation space, used as a numerical
//!   oracle for the rate.
#![no_std]
// Negated comparisons reject NaN on purpose; index loops mirror the formulas.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod error;
pub mod fig8;
pub mod forms;
pub mod lie;
pub mod matrix;
pub mod variation;

pub use error::{Error, Result};
pub use matrix::ComplexMatrix;
pub use num_complex::Complex64;
