use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;

use super::{ThetaContext, TruncationConfig};
use crate::error::{Error, Result};
use crate::fd::{central_difference, SHIFT_CHECK_STEP};
use crate::lattice::{Characteristic, ComplexMatrix, IntMatrix, LevelMatrix, MultiIndex, PeriodMatrix};

/// Both forms of the quasi-periodicity residual.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QuasiPeriodResidual {
    /// `|f(Z + xi, W + xi Omega + eta) - e(xi, W) f(Z, W)|`.
    pub absolute: f64,
    /// `|e(xi, W)^-1 f(Z + xi, W + xi Omega + eta) - f(Z, W)|`, the same law
    /// measured at the magnitude of the unshifted value.
    pub scaled: f64,
    /// Sum of tail bounds in the scaled frame.
    pub tail_allowance: f64,
}

/// `e(xi, W) = exp(-pi i tr(M (xi Omega xi^t + 2 W xi^t)))`.
pub fn quasi_period_factor(level: &LevelMatrix, omega: &PeriodMatrix, w: &ComplexMatrix, xi: &IntMatrix) -> Complex64 {
    let (h, g) = (level.h(), omega.g());
    let mut s = Complex64::new(0.0, 0.0);
    for k in 0..h {
        for c in 0..g {
            let mxi: f64 = (0..h).map(|l| (level.get(k, l) * xi.get(l, c)) as f64).sum();
            let xio: Complex64 = (0..g).map(|b| omega.get(c, b) * xi.get(k, b) as f64).sum();
            s += mxi * (xio + 2.0 * w.get(k, c));
        }
    }
    (-PI * Complex64::i() * s).exp()
}

/// `Z + xi`, `W + xi Omega + eta`.
pub(crate) fn shifted_args(
    omega: &PeriodMatrix,
    z: &ComplexMatrix,
    w: &ComplexMatrix,
    xi: &IntMatrix,
    eta: &IntMatrix,
) -> Result<(ComplexMatrix, ComplexMatrix)> {
    let xi_c = xi.to_complex();
    let z2 = z.add(&xi_c)?;
    let w2 = w.add(&xi_c.mul(omega.omega())?)?.add(&eta.to_complex())?;
    Ok((z2, w2))
}

/// Residual of the joint shift law for the auxiliary theta series
/// `theta~_J[A]` under `(Z, W) -> (Z + xi, W + xi Omega + eta)`.
#[allow(clippy::too_many_arguments)]
pub fn quasi_period_residual(
    level: &LevelMatrix,
    j: &MultiIndex,
    chr: &Characteristic,
    omega: &PeriodMatrix,
    z: &ComplexMatrix,
    w: &ComplexMatrix,
    xi: &IntMatrix,
    eta: &IntMatrix,
    cfg: &TruncationConfig,
) -> Result<QuasiPeriodResidual> {
    let ctx = ThetaContext::new(level, omega)?;
    for (name, m) in [("xi", xi), ("eta", eta)] {
        if (m.rows(), m.cols()) != (level.h(), omega.g()) {
            return Err(Error::DimensionMismatch(format!("{name} is {}x{}", m.rows(), m.cols())));
        }
    }
    let base = ctx.eval(j, chr, z, w, cfg)?;
    let (z2, w2) = shifted_args(omega, z, w, xi, eta)?;
    let moved = ctx.eval(j, chr, &z2, &w2, cfg)?;
    let factor = quasi_period_factor(level, omega, w, xi);
    Ok(QuasiPeriodResidual {
        absolute: (moved.value - factor * base.value).norm(),
        scaled: (moved.value / factor - base.value).norm(),
        tail_allowance: moved.tail_bound / factor.norm() + base.tail_bound,
    })
}

/// `|theta~_{J+eps_ka} - (2 pi i (M Z)_ka theta~_J + d/dW_ka theta~_J)|`, the
/// derivative taken by a five-point central difference with step `1e-5`. Indices are
/// zero-based.
#[allow(clippy::too_many_arguments)]
pub fn shift_operator_check(
    level: &LevelMatrix,
    j: &MultiIndex,
    chr: &Characteristic,
    omega: &PeriodMatrix,
    z: &ComplexMatrix,
    w: &ComplexMatrix,
    k: usize,
    a: usize,
    cfg: &TruncationConfig,
) -> Result<f64> {
    let (h, g) = (level.h(), omega.g());
    if k >= h || a >= g {
        return Err(Error::IndexOutOfRange(format!("({k}, {a}) with h = {h}, g = {g}")));
    }
    let ctx = ThetaContext::new(level, omega)?;
    let raised = ctx.eval(&j.bump(k, a, 1)?, chr, z, w, cfg)?.value;
    let here = ctx.eval(j, chr, z, w, cfg)?.value;
    let mz: Complex64 = (0..h).map(|l| z.get(l, a) * level.get(k, l) as f64).sum();
    let dw = central_difference(|w| ctx.eval(j, chr, z, w, cfg).map(|v| v.value), w, k, a, SHIFT_CHECK_STEP)?;
    Ok((raised - (2.0 * PI * Complex64::i() * mz * here + dw)).norm())
}
