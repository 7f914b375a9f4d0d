use std::fmt;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::IntMatrix;
use crate::error::{Error, Result};

/// A positive definite, symmetric, even integral `h`x`h` matrix with every
/// entry nonzero: the grading index of the algebra.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "Vec<Vec<i64>>", into = "Vec<Vec<i64>>")]
pub struct LevelMatrix(IntMatrix);

/// Validates `m` as a level matrix.
///
/// Checks are run in the order: square, symmetric, even diagonal, nonzero
/// entries, positive definite (exact leading principal minors).
pub fn validate_level(m: &IntMatrix) -> Result<LevelMatrix> {
    if !m.is_square() {
        return Err(Error::DimensionMismatch(format!(
            "level matrix must be square, got {}x{}",
            m.rows(),
            m.cols()
        )));
    }
    let h = m.rows();
    for k in 0..h {
        for l in k + 1..h {
            if m.get(k, l) != m.get(l, k) {
                return Err(Error::NotSymmetric);
            }
        }
    }
    if let Some(k) = (0..h).find(|&k| m.get(k, k) % 2 != 0) {
        return Err(Error::NotEven(k));
    }
    for k in 0..h {
        for l in 0..h {
            if m.get(k, l) == 0 {
                return Err(Error::ZeroEntry(k, l));
            }
        }
    }
    if (1..=h).any(|k| m.leading_minor(k) <= 0) {
        return Err(Error::NotPositiveDefinite);
    }
    Ok(LevelMatrix(m.clone()))
}

impl LevelMatrix {
    pub fn from_rows(rows: &[Vec<i64>]) -> Result<Self> {
        validate_level(&IntMatrix::from_rows(rows)?)
    }

    /// Degree `h`.
    pub fn h(&self) -> usize {
        self.0.rows()
    }

    #[inline]
    pub fn get(&self, k: usize, l: usize) -> i64 {
        self.0.get(k, l)
    }

    pub fn matrix(&self) -> &IntMatrix {
        &self.0
    }

    pub fn det(&self) -> i64 {
        self.0.leading_minor(self.h()) as i64
    }

    /// Number of characteristics for genus `g`, `(det M)^g`.
    pub fn characteristic_count(&self, g: usize) -> usize {
        (self.det() as usize).pow(g as u32)
    }

    /// Entrywise sum, validated. Only a zero entry can break admissibility,
    /// since sums of positive definite even matrices stay positive definite
    /// and even.
    pub fn checked_add(&self, other: &LevelMatrix) -> Result<LevelMatrix> {
        let sum = self.0.add(&other.0)?;
        validate_level(&sum).map_err(|e| Error::LevelSumInvalid(format!("{:?} + {:?}: {e}", self.0.to_rows(), other.0.to_rows())))
    }

    pub fn to_f64(&self) -> DMatrix<f64> {
        let h = self.h();
        DMatrix::from_fn(h, h, |r, c| self.get(r, c) as f64)
    }

    /// Smallest and largest eigenvalue.
    pub fn eigen_range(&self) -> (f64, f64) {
        let ev = self.to_f64().symmetric_eigenvalues();
        (ev.min(), ev.max())
    }

    /// Largest absolute row sum, `max_k sum_l |M_kl|`.
    pub fn max_row_sum(&self) -> f64 {
        (0..self.h())
            .map(|k| (0..self.h()).map(|l| self.get(k, l).abs()).sum::<i64>() as f64)
            .fold(0.0, f64::max)
    }
}

impl TryFrom<Vec<Vec<i64>>> for LevelMatrix {
    type Error = Error;

    fn try_from(rows: Vec<Vec<i64>>) -> Result<Self> {
        LevelMatrix::from_rows(&rows)
    }
}

impl From<LevelMatrix> for Vec<Vec<i64>> {
    fn from(m: LevelMatrix) -> Self {
        m.0.to_rows()
    }
}

impl fmt::Display for LevelMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.0.to_rows())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn check(rows: &[Vec<i64>]) -> Result<LevelMatrix> {
        validate_level(&IntMatrix::from_rows(rows).unwrap())
    }

    #[test]
    fn accepts_smallest_levels() {
        let m = check(&[vec![2]]).unwrap();
        assert_eq!((m.h(), m.det()), (1, 2));
        let m = check(&[vec![2, 1], vec![1, 2]]).unwrap();
        assert_eq!((m.h(), m.det()), (2, 3));
    }

    #[test]
    fn rejects_each_violation() {
        assert_eq!(check(&[vec![2, 0], vec![0, 2]]), Err(Error::ZeroEntry(0, 1)));
        assert_eq!(check(&[vec![1]]), Err(Error::NotEven(0)));
        assert_eq!(check(&[vec![2, 1], vec![3, 2]]), Err(Error::NotSymmetric));
        assert_eq!(check(&[vec![-2]]), Err(Error::NotPositiveDefinite));
        assert_eq!(check(&[vec![2, 3], vec![3, 2]]), Err(Error::NotPositiveDefinite));
        assert!(matches!(check(&[vec![2, 1]]), Err(Error::DimensionMismatch(_))));
    }

    #[test]
    fn level_sum_can_hit_zero_entry() {
        let a = check(&[vec![2, 1], vec![1, 2]]).unwrap();
        let b = check(&[vec![2, -1], vec![-1, 2]]).unwrap();
        assert!(matches!(a.checked_add(&b), Err(Error::LevelSumInvalid(_))));
        let c = a.checked_add(&a).unwrap();
        assert_eq!(c.matrix().to_rows(), vec![vec![4, 2], vec![2, 4]]);
    }

    #[test]
    fn json_validates() {
        assert!(serde_json::from_str::<LevelMatrix>("[[2,1],[1,2]]").is_ok());
        assert!(serde_json::from_str::<LevelMatrix>("[[2,0],[0,2]]").is_err());
    }
}
