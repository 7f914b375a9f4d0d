use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::ComplexMatrix;
use crate::error::{Error, Result};

const PD_TOL: f64 = 1e-12;

/// A point of the Siegel upper half plane: complex symmetric `g`x`g` with
/// positive definite imaginary part.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ComplexMatrix", into = "ComplexMatrix")]
pub struct PeriodMatrix {
    omega: ComplexMatrix,
    im: DMatrix<f64>,
    im_inv: DMatrix<f64>,
    im_eigen: (f64, f64),
}

impl PeriodMatrix {
    pub fn new(omega: ComplexMatrix) -> Result<Self> {
        let (r, c) = omega.shape();
        if r != c {
            return Err(Error::DimensionMismatch(format!("period matrix must be square, got {r}x{c}")));
        }
        for a in 0..r {
            for b in a + 1..r {
                if omega.get(a, b) != omega.get(b, a) {
                    return Err(Error::NotSymmetric);
                }
            }
        }
        let im = DMatrix::from_fn(r, r, |a, b| omega.get(a, b).im);
        let ev = im.clone().symmetric_eigenvalues();
        let (lo, hi) = (ev.min(), ev.max());
        if lo <= PD_TOL {
            return Err(Error::NotPositiveDefinite);
        }
        let im_inv = im.clone().cholesky().ok_or(Error::NotPositiveDefinite)?.inverse();
        Ok(PeriodMatrix {
            omega,
            im,
            im_inv,
            im_eigen: (lo, hi),
        })
    }

    /// `i * I_g`.
    pub fn identity_i(g: usize) -> Self {
        let mut m = ComplexMatrix::zeros(g, g);
        for a in 0..g {
            m.set(a, a, Complex64::new(0.0, 1.0));
        }
        Self::new(m).expect("i*I is in the upper half plane")
    }

    pub fn g(&self) -> usize {
        self.omega.rows()
    }

    pub fn omega(&self) -> &ComplexMatrix {
        &self.omega
    }

    #[inline]
    pub fn get(&self, a: usize, b: usize) -> Complex64 {
        self.omega.get(a, b)
    }

    /// `Im Omega`.
    pub fn im(&self) -> &DMatrix<f64> {
        &self.im
    }

    pub fn im_inverse(&self) -> &DMatrix<f64> {
        &self.im_inv
    }

    /// Smallest and largest eigenvalue of `Im Omega`.
    pub fn im_eigen_range(&self) -> (f64, f64) {
        self.im_eigen
    }
}

impl TryFrom<ComplexMatrix> for PeriodMatrix {
    type Error = Error;

    fn try_from(m: ComplexMatrix) -> Result<Self> {
        PeriodMatrix::new(m)
    }
}

impl From<PeriodMatrix> for ComplexMatrix {
    fn from(p: PeriodMatrix) -> Self {
        p.omega
    }
}
