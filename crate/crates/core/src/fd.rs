//! Finite-difference derivatives in `W`, used as an oracle independent of
//! the series formulas.

use num_complex::Complex64;
use serde::Serialize;

use crate::lattice::{ComplexMatrix, MultiIndex};

/// Step of the single central difference in the shift-operator check.
pub const SHIFT_CHECK_STEP: f64 = 1e-5;

/// Base step for nested differences; divided by the total order.
pub const NESTED_BASE_STEP: f64 = 1e-3;

/// Five-point central difference in `W_ka`,
/// `(f(-2h) - 8 f(-h) + 8 f(h) - f(2h)) / 12h`, exact through degree 4.
pub fn central_difference<F, E>(mut f: F, w: &ComplexMatrix, k: usize, a: usize, step: f64) -> Result<Complex64, E>
where
    F: FnMut(&ComplexMatrix) -> Result<Complex64, E>,
{
    let mut at = |t: f64| {
        let mut p = w.clone();
        p.set(k, a, w.get(k, a) + t * step);
        f(&p)
    };
    let (m2, m1, p1, p2) = (at(-2.0)?, at(-1.0)?, at(1.0)?, at(2.0)?);
    Ok((m2 - 8.0 * m1 + 8.0 * p1 - p2) / (12.0 * step))
}

fn binomial(n: u32, k: u32) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Tensor product of central difference stencils of order `J_ka` in each
/// coordinate: `prod_ka delta_h^{J_ka}`, with
/// `delta_h^n f(x) = h^-n sum_t (-1)^t C(n, t) f(x + (n/2 - t) h)`.
pub fn nested_central<F, E>(f: &mut F, w: &ComplexMatrix, j: &MultiIndex, step: f64) -> Result<Complex64, E>
where
    F: FnMut(&ComplexMatrix) -> Result<Complex64, E>,
{
    let coords: Vec<(usize, u32)> = j.entries().iter().copied().enumerate().filter(|&(_, n)| n > 0).collect();
    let cols = w.cols();
    let mut total = Complex64::new(0.0, 0.0);
    let mut t = vec![0u32; coords.len()];
    loop {
        let mut point = w.clone();
        let mut weight = 1.0;
        for (&(i, n), &ti) in coords.iter().zip(&t) {
            let (k, a) = (i / cols, i % cols);
            let offset = (n as f64 / 2.0 - ti as f64) * step;
            point.set(k, a, point.get(k, a) + offset);
            let sign = if ti % 2 == 0 { 1.0 } else { -1.0 };
            weight *= sign * binomial(n, ti);
        }
        total += weight * f(&point)?;
        let mut p = 0;
        loop {
            if p == coords.len() {
                return Ok(total / step.powi(j.size() as i32));
            }
            if t[p] < coords[p].1 {
                t[p] += 1;
                break;
            }
            t[p] = 0;
            p += 1;
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FdEstimate {
    pub value: Complex64,
    /// `|D(h) - D(h/2)| / 3`, the Richardson error estimate.
    pub error_estimate: f64,
}

/// `(d/dW)^J f(W)` by nested central differences with step
/// `1e-3 / |J|`, Richardson-extrapolated from steps `h` and `h/2`.
pub fn derivative<F, E>(mut f: F, w: &ComplexMatrix, j: &MultiIndex) -> Result<FdEstimate, E>
where
    F: FnMut(&ComplexMatrix) -> Result<Complex64, E>,
{
    if j.is_zero() {
        return Ok(FdEstimate {
            value: f(w)?,
            error_estimate: 0.0,
        });
    }
    let h = NESTED_BASE_STEP / j.size() as f64;
    let coarse = nested_central(&mut f, w, j, h)?;
    let fine = nested_central(&mut f, w, j, h / 2.0)?;
    Ok(FdEstimate {
        value: (4.0 * fine - coarse) / 3.0,
        error_estimate: (fine - coarse).norm() / 3.0,
    })
}
