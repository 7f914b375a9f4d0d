use serde::Serialize;

use super::{smith_normal_form, IntMatrix, LevelMatrix, Rational, RationalJson};
use crate::error::Result;

/// Canonical coset representative `A` of `M^{-1} Z^(h,g) / Z^(h,g)`, entries
/// reduced into `[0, 1)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Characteristic {
    index: usize,
    rows: usize,
    cols: usize,
    a: Vec<Rational>,
}

impl Characteristic {
    /// Ordinal in the canonical enumeration of its level.
    pub fn index(&self) -> usize {
        self.index
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn get(&self, k: usize, a: usize) -> Rational {
        self.a[k * self.cols + a]
    }

    pub fn entries(&self) -> &[Rational] {
        &self.a
    }

    pub fn to_f64(&self) -> Vec<f64> {
        self.a.iter().map(|r| *r.numer() as f64 / *r.denom() as f64).collect()
    }

    /// `M * A`, which is integral for every characteristic of level `M`.
    pub fn integral_image(&self, level: &LevelMatrix) -> Option<IntMatrix> {
        let mut out = IntMatrix::zeros(self.rows, self.cols);
        for k in 0..self.rows {
            for c in 0..self.cols {
                let s: Rational = (0..self.rows).map(|l| Rational::from(level.get(k, l)) * self.get(l, c)).sum();
                if !s.is_integer() {
                    return None;
                }
                out.set(k, c, s.to_integer());
            }
        }
        Some(out)
    }

    /// Whether `self - other` is an integer matrix.
    pub fn congruent(&self, other: &Characteristic) -> bool {
        self.shape() == other.shape() && self.a.iter().zip(&other.a).all(|(x, y)| (x - y).is_integer())
    }
}

#[derive(Serialize)]
struct CharacteristicJson {
    index: usize,
    a: Vec<Vec<RationalJson>>,
}

impl Serialize for Characteristic {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        CharacteristicJson {
            index: self.index,
            a: self
                .a
                .chunks(self.cols)
                .map(|row| row.iter().map(|&r| r.into()).collect())
                .collect(),
        }
        .serialize(s)
    }
}

fn frac(r: Rational) -> Rational {
    r - r.floor()
}

/// All residues `r` with `0 <= r_i < bound_i`, lexicographic.
fn residues(bounds: &[i64]) -> Vec<Vec<i64>> {
    let mut out = vec![vec![]];
    for &b in bounds {
        out = out
            .into_iter()
            .flat_map(|prefix| {
                (0..b).map(move |x| {
                    let mut p = prefix.clone();
                    p.push(x);
                    p
                })
            })
            .collect();
    }
    out
}

/// Column representatives of `M^{-1} Z^h / Z^h`, in residue order of the
/// Smith form of `M`.
fn column_representatives(level: &LevelMatrix) -> Result<Vec<Vec<Rational>>> {
    let m = level.matrix();
    let h = level.h();
    let snf = smith_normal_form(m)?;
    // Z^h / M Z^h ~ Z^h / U^{-1} D Z^h, so b = U^{-1} r runs over a full
    // residue system as r runs over the box [0, d_i).
    let u_inv = {
        let adj = snf.u.adjugate()?;
        let det = snf.u.determinant()? as i64;
        IntMatrix::new(h, h, adj.entries().iter().map(|x| x * det).collect())?
    };
    let adj_m = m.adjugate()?;
    let det_m = level.det();
    let reps = residues(&snf.diagonal())
        .into_iter()
        .map(|r| {
            let b: Vec<i64> = (0..h).map(|i| (0..h).map(|j| u_inv.get(i, j) * r[j]).sum()).collect();
            (0..h)
                .map(|i| {
                    let num: i64 = (0..h).map(|j| adj_m.get(i, j) * b[j]).sum();
                    frac(Rational::new(num, det_m))
                })
                .collect()
        })
        .collect();
    Ok(reps)
}

/// The `(det M)^g` canonical characteristics of level `M` in genus `g`.
///
/// Column `a` of each characteristic is drawn from the per-column residue
/// system; tuples are ordered lexicographically with column 0 most
/// significant, so indices are stable across runs.
pub fn enumerate_characteristics(level: &LevelMatrix, g: usize) -> Result<Vec<Characteristic>> {
    let h = level.h();
    let cols = column_representatives(level)?;
    let per = cols.len() as i64;
    let chars = residues(&vec![per; g])
        .into_iter()
        .enumerate()
        .map(|(index, pick)| {
            let mut a = vec![Rational::from(0); h * g];
            for (col, &p) in pick.iter().enumerate() {
                for k in 0..h {
                    a[k * g + col] = cols[p as usize][k];
                }
            }
            Characteristic {
                index,
                rows: h,
                cols: g,
                a,
            }
        })
        .collect();
    Ok(chars)
}
