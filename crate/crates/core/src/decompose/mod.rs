//! Expansion of products and differential polynomials of theta functions in
//! the canonical basis `theta~_J[A]`.
//!
//! Coefficients are found by a least-squares solve over sampled points
//! `(Z, W)` and certified on held-out points. Restricting a decomposition to
//! `Z = 0` turns each `theta~_J[A]` into `(d/dW)^J theta[A]`.

mod expr;
mod fit;
mod sampling;
mod theorem3;

pub use expr::DiffPolyExpr;
pub use fit::{
    diff_poly_decompose, fit_in_basis, product_expand, restrict_z0, Decomposition, FitConfig, FitMode,
    FD_CHECK_POINTS, FD_CHECK_TOL, MAX_CONDITION, PRUNE_THRESHOLD,
};
pub use theorem3::{verify_theorem3, Theorem3Report, QUASI_PERIOD_TOL, THEOREM3_TOL};

pub(crate) use sampling::counter_rng;
