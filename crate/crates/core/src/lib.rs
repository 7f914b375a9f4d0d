//! Theta functions of matrix level over the Siegel upper half plane.
//!
//! The crate is organised bottom-up:
//!
//! * [`lattice`]: exact integer and rational machinery (level matrices,
//!   Smith normal form, characteristic enumeration, multi-indices) and the
//!   validated complex matrix types.
//! * [`theta`]: truncated evaluation of theta series and auxiliary theta
//!   series with certified tail bounds, plus residual checks for the
//!   quasi-periodicity and shift-operator laws.
//! * [`fd`]: nested central finite differences used as an independent
//!   derivative oracle.
//! * [`algebra`]: the graded algebra of auxiliary theta functions in its
//!   canonical basis and the Heisenberg operators acting on it.
//! * [`decompose`]: numerical expansion of products and differential
//!   polynomials of theta functions in the canonical basis.
//! * [`verify`]: the built-in desk-scale verification suites.

// `!(x <= tol)` is deliberate throughout: NaN must fail the check.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod algebra;
pub mod decompose;
pub mod error;
pub mod fd;
pub mod lattice;
pub mod theta;
pub mod verify;

mod sum;

pub use algebra::{AlgebraElement, BasisSymbol, Coefficient, Element, ExactElement, Operator};
pub use decompose::{
    diff_poly_decompose, fit_in_basis, product_expand, restrict_z0, verify_theorem3, Decomposition,
    DiffPolyExpr, FitConfig, FitMode, Theorem3Report,
};
pub use error::{Error, Result};
pub use lattice::{
    enumerate_characteristics, smith_normal_form, validate_level, Characteristic, ComplexMatrix,
    IntMatrix, LevelMatrix, MultiIndex, PeriodMatrix, Rational, SmithForm,
};
pub use num_complex::Complex64;
pub use theta::{
    aux_theta_series, choose_radius, quasi_period_residual, shift_operator_check, theta_series,
    QuasiPeriodResidual, ThetaContext, ThetaValue, TruncationConfig,
};
