use std::f64::consts::PI;

use num_complex::Complex64;

use super::tail::{one_dim_sums, worst_case_one_dim_sums};
use super::{ThetaValue, TruncationConfig, MIN_IM_EIGENVALUE, RADIUS_CAP};
use crate::error::{Error, Result};
use crate::lattice::{Characteristic, ComplexMatrix, LevelMatrix, MultiIndex, PeriodMatrix};
use crate::sum::CompensatedSum;

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// Evaluation context for one level and one period matrix.
///
/// Holds the derived constants the lattice sums and tail bounds need, so
/// repeated evaluations skip the eigen-decompositions.
#[derive(Debug, Clone)]
pub struct ThetaContext {
    level: LevelMatrix,
    omega: PeriodMatrix,
    h: usize,
    g: usize,
    /// `lambda_min(M) * lambda_min(Im Omega)`: the Gaussian decay rate.
    decay: f64,
    m_eigen_max: f64,
    row_sum: f64,
}

impl ThetaContext {
    pub fn new(level: &LevelMatrix, omega: &PeriodMatrix) -> Result<Self> {
        let (y_min, _) = omega.im_eigen_range();
        if y_min < MIN_IM_EIGENVALUE {
            return Err(Error::NearBoundary(y_min));
        }
        let (m_min, m_max) = level.eigen_range();
        Ok(ThetaContext {
            level: level.clone(),
            omega: omega.clone(),
            h: level.h(),
            g: omega.g(),
            decay: m_min * y_min,
            m_eigen_max: m_max,
            row_sum: level.max_row_sum(),
        })
    }

    pub fn level(&self) -> &LevelMatrix {
        &self.level
    }

    pub fn omega(&self) -> &PeriodMatrix {
        &self.omega
    }

    fn check_shape(&self, what: &str, shape: (usize, usize)) -> Result<()> {
        if shape != (self.h, self.g) {
            return Err(Error::DimensionMismatch(format!(
                "{what} is {}x{}, expected {}x{}",
                shape.0, shape.1, self.h, self.g
            )));
        }
        Ok(())
    }

    fn check_args(&self, j: &MultiIndex, chr: &Characteristic, z: &ComplexMatrix, w: &ComplexMatrix) -> Result<()> {
        self.check_shape("J", j.shape())?;
        self.check_shape("characteristic", chr.shape())?;
        self.check_shape("Z", z.shape())?;
        self.check_shape("W", w.shape())
    }

    /// `(M Z)_ka`.
    fn mz(&self, z: &ComplexMatrix) -> Vec<Complex64> {
        let (h, g) = (self.h, self.g);
        let mut out = vec![Complex64::new(0.0, 0.0); h * g];
        for k in 0..h {
            for a in 0..g {
                out[k * g + a] = (0..h).map(|l| z.get(l, a) * self.level.get(k, l) as f64).sum();
            }
        }
        out
    }

    /// Truncated sums for several multi-indices sharing one characteristic
    /// and one argument; the exponential is computed once per lattice point.
    pub fn sum_many(
        &self,
        js: &[MultiIndex],
        chr: &Characteristic,
        z: &ComplexMatrix,
        w: &ComplexMatrix,
        radius: u32,
    ) -> Vec<Complex64> {
        let (h, g) = (self.h, self.g);
        let n = h * g;
        let a = chr.to_f64();
        let mz = self.mz(z);
        let r = radius as i64;
        let mut acc = vec![CompensatedSum::default(); js.len()];
        let mut lattice = vec![-r; n];
        let mut x = vec![0.0; n];
        let mut mx = vec![0.0; n];
        let mut base = vec![Complex64::new(0.0, 0.0); n];
        loop {
            for i in 0..n {
                x[i] = lattice[i] as f64 + a[i];
            }
            for k in 0..h {
                for c in 0..g {
                    mx[k * g + c] = (0..h).map(|l| self.level.get(k, l) as f64 * x[l * g + c]).sum();
                }
            }
            // tr(M X Omega X^t) + 2 tr(M W X^t)
            let mut q = Complex64::new(0.0, 0.0);
            for k in 0..h {
                for c in 0..g {
                    let xo: Complex64 = (0..g).map(|b| self.omega.get(c, b) * x[k * g + b]).sum();
                    q += xo * mx[k * g + c];
                    q += 2.0 * w.get(k, c) * mx[k * g + c];
                }
            }
            let e = (PI * I * q).exp();
            for i in 0..n {
                base[i] = mz[i] + mx[i];
            }
            for (j, s) in js.iter().zip(acc.iter_mut()) {
                let mut poly = e;
                for (i, &p) in j.entries().iter().enumerate() {
                    if p > 0 {
                        poly *= base[i].powu(p);
                    }
                }
                s.add(poly);
            }
            // odometer over the box
            let mut i = 0;
            loop {
                if i == n {
                    return js
                        .iter()
                        .zip(acc)
                        .map(|(j, s)| (2.0 * PI * I).powu(j.size()) * s.value())
                        .collect();
                }
                if lattice[i] < r {
                    lattice[i] += 1;
                    break;
                }
                lattice[i] = -r;
                i += 1;
            }
        }
    }

    /// Rigorous bound on the omitted tail for total degree `degree`.
    ///
    /// Completing the square, `|exp(...)| = exp(pi s0) exp(-pi (x-x0)^t K (x-x0))`
    /// with `K = M (x) Im Omega`, `x0 = -Im W (Im Omega)^-1` and
    /// `s0 = tr(M Im W (Im Omega)^-1 Im W^t)`. Bounding `K >= c I` and the
    /// polynomial factor by `(2 pi m)^d prod_i (1 + |Z|_max + |x_i|)^d` makes the
    /// bound a product of one-dimensional sums; a point outside the box has
    /// at least one coordinate with `|N_i| > R`.
    pub fn tail_bound(&self, degree: u32, chr: &Characteristic, z: &ComplexMatrix, w: &ComplexMatrix, radius: u32) -> f64 {
        let (h, g) = (self.h, self.g);
        let a = chr.to_f64();
        let y_inv = self.omega.im_inverse();
        let v = w.imag();
        let mut x0 = vec![0.0; h * g];
        let mut s0 = 0.0;
        for k in 0..h {
            for c in 0..g {
                let vy: f64 = (0..g).map(|b| v[k * g + b] * y_inv[(b, c)]).sum();
                let mv: f64 = (0..h).map(|l| self.level.get(k, l) as f64 * v[l * g + c]).sum();
                x0[k * g + c] = -vy;
                s0 += mv * vy;
            }
        }
        let z_max = z.max_abs();
        let sums: Vec<(f64, f64)> = (0..h * g)
            .map(|i| one_dim_sums(a[i], x0[i], z_max, degree, self.decay, radius))
            .collect();
        let prefactor = (2.0 * PI * self.row_sum).powi(degree as i32) * (PI * s0).exp();
        prefactor * combine(&sums)
    }

    /// Truncated value at `cfg.radius`; fails if the tail bound exceeds
    /// `cfg.tail_tol`.
    pub fn eval(
        &self,
        j: &MultiIndex,
        chr: &Characteristic,
        z: &ComplexMatrix,
        w: &ComplexMatrix,
        cfg: &TruncationConfig,
    ) -> Result<ThetaValue> {
        self.check_args(j, chr, z, w)?;
        let tail_bound = self.tail_bound(j.size(), chr, z, w, cfg.radius);
        if !(tail_bound <= cfg.tail_tol) {
            return Err(Error::TruncationInsufficient {
                radius: cfg.radius,
                bound: tail_bound,
                tol: cfg.tail_tol,
            });
        }
        let value = self.sum_many(std::slice::from_ref(j), chr, z, w, cfg.radius)[0];
        Ok(ThetaValue { value, tail_bound })
    }

    /// Smallest radius whose actual tail bound at this argument is at most
    /// `tail_tol`.
    pub fn certified_radius(&self, degree: u32, chr: &Characteristic, z: &ComplexMatrix, w: &ComplexMatrix, tail_tol: f64) -> Result<u32> {
        self.check_shape("Z", z.shape())?;
        self.check_shape("W", w.shape())?;
        (1..=RADIUS_CAP)
            .find(|&r| self.tail_bound(degree, chr, z, w, r) <= tail_tol)
            .ok_or(Error::Unachievable {
                cap: RADIUS_CAP,
                tol: tail_tol,
            })
    }

    /// Evaluate several multi-indices at the smallest radius certifying
    /// `tail_tol` for the largest of them.
    pub fn eval_certified_many(
        &self,
        js: &[MultiIndex],
        chr: &Characteristic,
        z: &ComplexMatrix,
        w: &ComplexMatrix,
        tail_tol: f64,
    ) -> Result<Vec<ThetaValue>> {
        for j in js {
            self.check_args(j, chr, z, w)?;
        }
        let degree = js.iter().map(MultiIndex::size).max().unwrap_or(0);
        let radius = self.certified_radius(degree, chr, z, w, tail_tol)?;
        let tail_bound = self.tail_bound(degree, chr, z, w, radius);
        Ok(self
            .sum_many(js, chr, z, w, radius)
            .into_iter()
            .map(|value| ThetaValue { value, tail_bound })
            .collect())
    }

    pub fn eval_certified(
        &self,
        j: &MultiIndex,
        chr: &Characteristic,
        z: &ComplexMatrix,
        w: &ComplexMatrix,
        tail_tol: f64,
    ) -> Result<ThetaValue> {
        Ok(self.eval_certified_many(std::slice::from_ref(j), chr, z, w, tail_tol)?[0])
    }

    /// Worst case of [`ThetaContext::tail_bound`] over the argument box; see
    /// [`super::choose_radius`].
    pub fn choose_radius(&self, w_box: f64, tail_tol: f64, degree: u32) -> Result<u32> {
        if !(tail_tol > 0.0) || !(w_box >= 0.0) {
            return Err(Error::Malformed(format!("choose_radius: box {w_box}, tol {tail_tol}")));
        }
        let (h, g) = (self.h, self.g);
        let y_inv = self.omega.im_inverse();
        let (y_min, _) = self.omega.im_eigen_range();
        // |x0_ka| <= w_box * sum_b |Y^-1_ba|
        let shift: Vec<f64> = (0..h * g)
            .map(|i| {
                let c = i % g;
                w_box * (0..g).map(|b| y_inv[(b, c)].abs()).sum::<f64>()
            })
            .collect();
        let s0 = self.m_eigen_max / y_min * (h * g) as f64 * w_box * w_box;
        let z_max = w_box * std::f64::consts::SQRT_2;
        let prefactor = (2.0 * PI * self.row_sum).powi(degree as i32) * (PI * s0).exp();
        (1..=RADIUS_CAP)
            .find(|&r| {
                let sums: Vec<(f64, f64)> = shift
                    .iter()
                    .map(|&d| worst_case_one_dim_sums(d, z_max, degree, self.decay, r))
                    .collect();
                prefactor * combine(&sums) <= tail_tol
            })
            .ok_or(Error::Unachievable {
                cap: RADIUS_CAP,
                tol: tail_tol,
            })
    }
}

/// `sum_i out_i * prod_{j != i} full_j` for pairs `(full, out)`.
fn combine(sums: &[(f64, f64)]) -> f64 {
    (0..sums.len())
        .map(|i| {
            sums.iter()
                .enumerate()
                .map(|(j, &(full, out))| if i == j { out } else { full })
                .product::<f64>()
        })
        .sum()
}
