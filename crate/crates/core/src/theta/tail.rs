//! One-dimensional Gaussian sums behind the tail bounds.

use std::f64::consts::PI;

/// Beyond this many decay lengths the summands are below `exp(-900)` and
/// underflow in double precision.
const CUTOFF_EXPONENT: f64 = 900.0;

fn cutoff(center: f64, decay: f64, radius: u32) -> i64 {
    radius as i64 + center.abs().ceil() as i64 + 2 + (CUTOFF_EXPONENT / (PI * decay)).sqrt().ceil() as i64
}

/// `(sum_{n in Z} psi(n), sum_{|n| > R} psi(n))` for
/// `psi(n) = (1 + z + |n + a|)^d exp(-pi c (n + a - x0)^2)`.
pub(super) fn one_dim_sums(a: f64, x0: f64, z: f64, degree: u32, decay: f64, radius: u32) -> (f64, f64) {
    let l = cutoff(x0 - a, decay, radius);
    let r = radius as i64;
    let mut full = 0.0;
    let mut out = 0.0;
    for n in -l..=l {
        let x = n as f64 + a;
        let psi = (1.0 + z + x.abs()).powi(degree as i32) * (-PI * decay * (x - x0).powi(2)).exp();
        full += psi;
        if n.abs() > r {
            out += psi;
        }
    }
    (full, out)
}

/// Same sums with the offsets replaced by their worst case: `|n + a| <= |n| + 1`
/// and `|n + a - x0| >= max(0, |n| - 1 - shift)`.
pub(super) fn worst_case_one_dim_sums(shift: f64, z: f64, degree: u32, decay: f64, radius: u32) -> (f64, f64) {
    let l = cutoff(shift + 1.0, decay, radius);
    let r = radius as i64;
    let mut full = 0.0;
    let mut out = 0.0;
    for n in -l..=l {
        let m = n.abs() as f64;
        let dist = (m - 1.0 - shift).max(0.0);
        let psi = (2.0 + z + m).powi(degree as i32) * (-PI * decay * dist * dist).exp();
        full += psi;
        if n.abs() > r {
            out += psi;
        }
    }
    (full, out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn worst_case_dominates_actual() {
        for &(a, x0) in &[(0.0, 0.0), (0.5, 0.3), (0.75, -0.4), (0.25, 0.4)] {
            for r in 1..6 {
                let (f, o) = one_dim_sums(a, x0, 0.3, 2, 2.0, r);
                let (fw, ow) = worst_case_one_dim_sums(0.4, 0.3 * 1.5, 2, 2.0, r);
                assert!(f <= fw && o <= ow);
            }
        }
    }

    #[test]
    fn tail_shrinks_with_radius() {
        let outs: Vec<f64> = (1..6).map(|r| one_dim_sums(0.0, 0.0, 0.0, 0, 2.0, r).1).collect();
        assert!(outs.windows(2).all(|p| p[1] < p[0]));
        // sum_{|n|>1} e^{-2 pi n^2} is dominated by n = +-2
        assert!((outs[0] / (2.0 * (-8.0 * PI).exp()) - 1.0).abs() < 1e-6);
    }
}
