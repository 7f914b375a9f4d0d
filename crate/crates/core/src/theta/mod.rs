//! Truncated theta series and auxiliary theta series of level `M`.
//!
//! For a level `M` (`h`x`h`), a period matrix `Omega` (`g`x`g`) and `h`x`g`
//! arguments `Z`, `W`, the auxiliary theta series with multi-index `J` and
//! characteristic `A` is
//!
//! ```text
//! (2 pi i)^|J| sum_N prod_{k,a} (M (Z + N + A))_ka ^ J_ka
//!     * exp(pi i tr(M ((N+A) Omega (N+A)^t + 2 W (N+A)^t)))
//! ```
//!
//! summed over the sup-norm box `|N_ka| <= R`. `J = 0` gives the theta series
//! itself. Every value is returned with a rigorous bound on the omitted tail.

pub(crate) mod checks;
mod context;
mod tail;

pub use checks::{quasi_period_factor, quasi_period_residual, shift_operator_check, QuasiPeriodResidual};
pub use context::ThetaContext;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{Characteristic, ComplexMatrix, LevelMatrix, MultiIndex, PeriodMatrix};

/// Largest radius [`choose_radius`] will return.
pub const RADIUS_CAP: u32 = 64;

/// Period matrices with `lambda_min(Im Omega)` below this are rejected.
pub const MIN_IM_EIGENVALUE: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TruncationConfig {
    /// Half-width of the lattice box.
    pub radius: u32,
    /// Absolute tail bound the evaluation must certify.
    pub tail_tol: f64,
}

impl TruncationConfig {
    pub fn new(radius: u32, tail_tol: f64) -> Result<Self> {
        if radius < 1 || !(tail_tol > 0.0) {
            return Err(Error::Malformed(format!(
                "truncation needs radius >= 1 and tail_tol > 0, got {radius}, {tail_tol}"
            )));
        }
        Ok(TruncationConfig { radius, tail_tol })
    }
}

/// A truncated sum together with a bound on the absolute value of the tail.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThetaValue {
    pub value: Complex64,
    pub tail_bound: f64,
}

/// Theta series of level `M` with characteristic `A` at `W`.
pub fn theta_series(
    level: &LevelMatrix,
    chr: &Characteristic,
    omega: &PeriodMatrix,
    w: &ComplexMatrix,
    cfg: &TruncationConfig,
) -> Result<ThetaValue> {
    let j = MultiIndex::zeros(level.h(), omega.g());
    let z = ComplexMatrix::zeros(level.h(), omega.g());
    ThetaContext::new(level, omega)?.eval(&j, chr, &z, w, cfg)
}

/// Auxiliary theta series with multi-index `J` at `(Z, W)`.
pub fn aux_theta_series(
    level: &LevelMatrix,
    j: &MultiIndex,
    chr: &Characteristic,
    omega: &PeriodMatrix,
    z: &ComplexMatrix,
    w: &ComplexMatrix,
    cfg: &TruncationConfig,
) -> Result<ThetaValue> {
    ThetaContext::new(level, omega)?.eval(j, chr, z, w, cfg)
}

/// Smallest radius whose tail estimate is at most `tail_tol` for every
/// argument with `|Im W_ka| <= w_box`, `|Re Z_ka|, |Im Z_ka| <= w_box`,
/// and `|J| <= degree`.
pub fn choose_radius(
    level: &LevelMatrix,
    omega: &PeriodMatrix,
    w_box: f64,
    tail_tol: f64,
    degree: u32,
) -> Result<u32> {
    ThetaContext::new(level, omega)?.choose_radius(w_box, tail_tol, degree)
}
