use std::cmp::Ordering;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Nonnegative integer `h`x`g` matrix labelling derivative orders and
/// `Z`-degrees.
///
/// The derived `Ord` is lexicographic on the entries; [`MultiIndex::graded_cmp`]
/// is the total order used for basis layout (by `|J|`, then lexicographic).
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "Vec<Vec<i64>>", into = "Vec<Vec<u32>>")]
pub struct MultiIndex {
    rows: usize,
    cols: usize,
    entries: Vec<u32>,
}

impl MultiIndex {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        MultiIndex {
            rows,
            cols,
            entries: vec![0; rows * cols],
        }
    }

    /// The unit index `eps_ka` (zero-based `k`, `a`).
    pub fn unit(rows: usize, cols: usize, k: usize, a: usize) -> Self {
        let mut j = Self::zeros(rows, cols);
        j.entries[k * cols + a] = 1;
        j
    }

    pub fn new(rows: usize, cols: usize, entries: Vec<u32>) -> Result<Self> {
        if rows == 0 || cols == 0 || entries.len() != rows * cols {
            return Err(Error::DimensionMismatch(format!(
                "{} entries for a {rows}x{cols} multi-index",
                entries.len()
            )));
        }
        Ok(MultiIndex { rows, cols, entries })
    }

    pub fn from_rows(rows: &[Vec<i64>]) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|row| row.len() != c) {
            return Err(Error::DimensionMismatch("ragged multi-index".into()));
        }
        let mut entries = Vec::with_capacity(r * c);
        for (k, row) in rows.iter().enumerate() {
            for (a, &x) in row.iter().enumerate() {
                if x < 0 {
                    return Err(Error::NegativeEntry(k, a));
                }
                entries.push(u32::try_from(x).map_err(|_| Error::Malformed("multi-index entry too large".into()))?);
            }
        }
        Self::new(r, c, entries)
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    #[inline]
    pub fn get(&self, k: usize, a: usize) -> u32 {
        self.entries[k * self.cols + a]
    }

    pub fn entries(&self) -> &[u32] {
        &self.entries
    }

    /// `|J|`, the sum of all entries.
    pub fn size(&self) -> u32 {
        self.entries.iter().sum()
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(|&x| x == 0)
    }

    /// `J!`, the product of entrywise factorials.
    pub fn factorial(&self) -> u128 {
        self.entries.iter().map(|&x| (1..=x as u128).product::<u128>()).product()
    }

    /// `J + delta * eps_ka`.
    pub fn bump(&self, k: usize, a: usize, delta: i64) -> Result<Self> {
        if k >= self.rows || a >= self.cols {
            return Err(Error::IndexOutOfRange(format!("({k}, {a}) in {}x{}", self.rows, self.cols)));
        }
        let cur = self.get(k, a) as i64 + delta;
        if cur < 0 {
            return Err(Error::NegativeEntry(k, a));
        }
        let mut j = self.clone();
        j.entries[k * self.cols + a] = cur as u32;
        Ok(j)
    }

    /// Product of entrywise binomial coefficients `C(K_ka, P_ka)`.
    pub fn binom(&self, p: &MultiIndex) -> Result<u128> {
        if self.shape() != p.shape() {
            return Err(Error::DimensionMismatch("binom of differently shaped multi-indices".into()));
        }
        let mut out = 1u128;
        for (i, (&k, &q)) in self.entries.iter().zip(&p.entries).enumerate() {
            if q > k {
                return Err(Error::InvalidBinom(i / self.cols, i % self.cols));
            }
            out *= binomial(k as u128, q as u128);
        }
        Ok(out)
    }

    /// `K - P`, defined when `P <= K` entrywise.
    pub fn checked_sub(&self, p: &MultiIndex) -> Option<MultiIndex> {
        if self.shape() != p.shape() {
            return None;
        }
        let entries = self
            .entries
            .iter()
            .zip(&p.entries)
            .map(|(&k, &q)| k.checked_sub(q))
            .collect::<Option<Vec<_>>>()?;
        Some(MultiIndex {
            rows: self.rows,
            cols: self.cols,
            entries,
        })
    }

    /// Grade by `|J|`, then lexicographic.
    pub fn graded_cmp(&self, other: &MultiIndex) -> Ordering {
        self.size().cmp(&other.size()).then_with(|| self.entries.cmp(&other.entries))
    }

    /// All `h`x`g` multi-indices with `|J| <= max_degree`, in graded order.
    pub fn all_up_to(rows: usize, cols: usize, max_degree: u32) -> Vec<MultiIndex> {
        let n = rows * cols;
        let mut out = Vec::new();
        let mut cur = vec![0u32; n];
        fn rec(pos: usize, left: u32, cur: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
            if pos == cur.len() {
                out.push(cur.clone());
                return;
            }
            for x in 0..=left {
                cur[pos] = x;
                rec(pos + 1, left - x, cur, out);
            }
            cur[pos] = 0;
        }
        let mut raw = Vec::new();
        rec(0, max_degree, &mut cur, &mut raw);
        for entries in raw {
            out.push(MultiIndex { rows, cols, entries });
        }
        out.sort_by(MultiIndex::graded_cmp);
        out
    }

    pub fn to_rows(&self) -> Vec<Vec<u32>> {
        (0..self.rows).map(|r| self.entries[r * self.cols..(r + 1) * self.cols].to_vec()).collect()
    }
}

fn binomial(n: u128, k: u128) -> u128 {
    let k = k.min(n - k);
    (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
}

impl TryFrom<Vec<Vec<i64>>> for MultiIndex {
    type Error = Error;

    fn try_from(rows: Vec<Vec<i64>>) -> Result<Self> {
        MultiIndex::from_rows(&rows)
    }
}

impl From<MultiIndex> for Vec<Vec<u32>> {
    fn from(j: MultiIndex) -> Self {
        j.to_rows()
    }
}

impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.to_rows())
    }
}
