//! Smith normal form over the integers.

use super::IntMatrix;
use crate::error::{Error, Result};

/// `u * m * v == d` with `u`, `v` unimodular and `d` diagonal with
/// `d[i] | d[i+1]`, all diagonal entries positive.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SmithForm {
    pub u: IntMatrix,
    pub d: IntMatrix,
    pub v: IntMatrix,
}

impl SmithForm {
    pub fn diagonal(&self) -> Vec<i64> {
        (0..self.d.rows()).map(|i| self.d.get(i, i)).collect()
    }
}

fn swap_rows(m: &mut IntMatrix, a: usize, b: usize) {
    for c in 0..m.cols() {
        let t = m.get(a, c);
        m.set(a, c, m.get(b, c));
        m.set(b, c, t);
    }
}

fn swap_cols(m: &mut IntMatrix, a: usize, b: usize) {
    for r in 0..m.rows() {
        let t = m.get(r, a);
        m.set(r, a, m.get(r, b));
        m.set(r, b, t);
    }
}

/// row[dst] += k * row[src]
fn add_row(m: &mut IntMatrix, dst: usize, src: usize, k: i64) {
    for c in 0..m.cols() {
        m.set(dst, c, m.get(dst, c) + k * m.get(src, c));
    }
}

/// col[dst] += k * col[src]
fn add_col(m: &mut IntMatrix, dst: usize, src: usize, k: i64) {
    for r in 0..m.rows() {
        m.set(r, dst, m.get(r, dst) + k * m.get(r, src));
    }
}

fn negate_row(m: &mut IntMatrix, r: usize) {
    for c in 0..m.cols() {
        m.set(r, c, -m.get(r, c));
    }
}

/// Smith normal form of a nonsingular square integer matrix.
pub fn smith_normal_form(m: &IntMatrix) -> Result<SmithForm> {
    if !m.is_square() {
        return Err(Error::DimensionMismatch("Smith form needs a square matrix".into()));
    }
    if m.determinant()? == 0 {
        return Err(Error::Singular);
    }
    let n = m.rows();
    let mut d = m.clone();
    let mut u = IntMatrix::identity(n);
    let mut v = IntMatrix::identity(n);

    for t in 0..n {
        loop {
            // Move the smallest nonzero entry of the trailing block to (t, t).
            let (pr, pc) = (t..n)
                .flat_map(|r| (t..n).map(move |c| (r, c)))
                .filter(|&(r, c)| d.get(r, c) != 0)
                .min_by_key(|&(r, c)| d.get(r, c).abs())
                .expect("nonsingular matrix has a nonzero trailing block");
            swap_rows(&mut d, t, pr);
            swap_rows(&mut u, t, pr);
            swap_cols(&mut d, t, pc);
            swap_cols(&mut v, t, pc);

            let p = d.get(t, t);
            let mut clean = true;
            for r in t + 1..n {
                let q = d.get(r, t) / p;
                add_row(&mut d, r, t, -q);
                add_row(&mut u, r, t, -q);
                clean &= d.get(r, t) == 0;
            }
            for c in t + 1..n {
                let q = d.get(t, c) / p;
                add_col(&mut d, c, t, -q);
                add_col(&mut v, c, t, -q);
                clean &= d.get(t, c) == 0;
            }
            if !clean {
                continue;
            }
            // Divisibility: fold an offending row into row t and retry.
            let offender = (t + 1..n).find(|&r| (t + 1..n).any(|c| d.get(r, c) % p != 0));
            match offender {
                Some(r) => {
                    add_row(&mut d, t, r, 1);
                    add_row(&mut u, t, r, 1);
                }
                None => break,
            }
        }
        if d.get(t, t) < 0 {
            negate_row(&mut d, t);
            negate_row(&mut u, t);
        }
    }
    Ok(SmithForm { u, d, v })
}
