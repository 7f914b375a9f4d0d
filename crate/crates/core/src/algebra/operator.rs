use std::fmt;

use serde::{Deserialize, Serialize};

use super::{BasisSymbol, Coefficient, Element};
use crate::error::{Error, Result};
use crate::lattice::MultiIndex;

/// One of the Heisenberg operators. Indices are zero-based; `Display` prints
/// them one-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Operator {
    /// Multiplication by `M_kl` on the level-`M` piece.
    E { k: usize, l: usize },
    /// Lowering: `(2 pi i)^-1 d/dZ_ma`.
    D { m: usize, a: usize },
    /// Raising: `2 pi i (M Z)_nb + d/dW_nb`.
    Delta { n: usize, b: usize },
}

impl Operator {
    fn check(&self, sym: &BasisSymbol) -> Result<()> {
        let (h, g) = (sym.h(), sym.g());
        let ok = match *self {
            Operator::E { k, l } => k < h && l < h,
            Operator::D { m, a } => m < h && a < g,
            Operator::Delta { n, b } => n < h && b < g,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::IndexOutOfRange(format!("{self} on a symbol with h = {h}, g = {g}")))
        }
    }

    /// Every operator valid for shape `(h, g)`.
    pub fn all(h: usize, g: usize) -> Vec<Operator> {
        let mut ops = Vec::new();
        for k in 0..h {
            for l in 0..h {
                ops.push(Operator::E { k, l });
            }
        }
        for m in 0..h {
            for a in 0..g {
                ops.push(Operator::D { m, a });
                ops.push(Operator::Delta { n: m, b: a });
            }
        }
        ops
    }
}

impl fmt::Display for Operator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Operator::E { k, l } => write!(f, "E_{}{}", k + 1, l + 1),
            Operator::D { m, a } => write!(f, "D_{}{}", m + 1, a + 1),
            Operator::Delta { n, b } => write!(f, "Delta_{}{}", n + 1, b + 1),
        }
    }
}

/// Linear extension of the operator action on basis symbols.
pub fn apply<C: Coefficient>(op: Operator, x: &Element<C>) -> Result<Element<C>> {
    let mut out = Element::zero();
    for (sym, c) in x.terms() {
        op.check(sym)?;
        match op {
            Operator::E { k, l } => out.add_term(sym.clone(), c.clone() * C::from_i64(sym.level.get(k, l))),
            Operator::D { m, a } => {
                for l in 0..sym.h() {
                    let jla = sym.j.get(l, a) as i64;
                    if jla == 0 {
                        continue;
                    }
                    let lowered = sym.j.bump(l, a, -1)?;
                    out.add_term(sym.with_j(lowered), c.clone() * C::from_i64(sym.level.get(m, l) * jla));
                }
            }
            Operator::Delta { n, b } => out.add_term(sym.with_j(sym.j.bump(n, b, 1)?), c.clone()),
        }
    }
    Ok(out)
}

/// `Delta^J = prod_ka Delta_ka^{J_ka}`.
pub fn apply_delta_power<C: Coefficient>(j: &MultiIndex, x: &Element<C>) -> Result<Element<C>> {
    let (h, g) = j.shape();
    let mut out = x.clone();
    for n in 0..h {
        for b in 0..g {
            for _ in 0..j.get(n, b) {
                out = apply(Operator::Delta { n, b }, &out)?;
            }
        }
    }
    for s in out.shapes() {
        if s != (h, g) {
            return Err(Error::DimensionMismatch(format!("Delta^J with J {h}x{g} on a {}x{} symbol", s.0, s.1)));
        }
    }
    Ok(out)
}

/// `[op1, op2] x = op1(op2 x) - op2(op1 x)`.
pub fn commutator<C: Coefficient>(op1: Operator, op2: Operator, x: &Element<C>) -> Result<Element<C>> {
    Ok(apply(op1, &apply(op2, x)?)? - apply(op2, &apply(op1, x)?)?)
}

/// Membership in the theta subalgebra, decided by annihilation under every
/// `D_ma`. For admissible levels this coincides with every term having
/// `J = 0`.
pub fn in_theta_subalgebra<C: Coefficient>(x: &Element<C>) -> bool {
    let killed = x.shapes().into_iter().all(|(h, g)| {
        let part = Element::from_terms(
            x.terms()
                .filter(|(s, _)| (s.h(), s.g()) == (h, g))
                .map(|(s, c)| (s.clone(), c.clone())),
        );
        (0..h).all(|m| {
            (0..g).all(|a| apply(Operator::D { m, a }, &part).map(|e| e.is_empty()).unwrap_or(false))
        })
    });
    debug_assert_eq!(killed, x.is_degree_zero());
    killed
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::ExactElement;
    use crate::lattice::LevelMatrix;
    use num_complex::Complex;

    fn sym(level: &[Vec<i64>], j: &[Vec<i64>], a: usize) -> BasisSymbol {
        BasisSymbol::new(LevelMatrix::from_rows(level).unwrap(), MultiIndex::from_rows(j).unwrap(), a).unwrap()
    }

    fn gi(re: i64) -> Complex<i64> {
        Complex::new(re, 0)
    }

    #[test]
    fn lowering_level_two() {
        let x = ExactElement::from_symbol(sym(&[vec![2]], &[vec![1]], 0));
        let y = apply(Operator::D { m: 0, a: 0 }, &x).unwrap();
        assert_eq!(y, ExactElement::from_terms([(sym(&[vec![2]], &[vec![0]], 0), gi(2))]));
        let zero = apply(Operator::D { m: 0, a: 0 }, &ExactElement::from_symbol(sym(&[vec![2]], &[vec![0]], 1))).unwrap();
        assert!(zero.is_empty());
    }

    #[test]
    fn raising_level_two() {
        let x = ExactElement::from_symbol(sym(&[vec![2]], &[vec![0]], 1));
        let y = apply(Operator::Delta { n: 0, b: 0 }, &x).unwrap();
        assert_eq!(y, ExactElement::from_symbol(sym(&[vec![2]], &[vec![1]], 1)));
    }

    #[test]
    fn lowering_mixes_rows() {
        let m = vec![vec![2, 1], vec![1, 2]];
        let x = ExactElement::from_symbol(sym(&m, &[vec![1], vec![1]], 0));
        let y = apply(Operator::D { m: 0, a: 0 }, &x).unwrap();
        let expect = ExactElement::from_terms([
            (sym(&m, &[vec![0], vec![1]], 0), gi(2)),
            (sym(&m, &[vec![1], vec![0]], 0), gi(1)),
        ]);
        assert_eq!(y, expect);
    }

    #[test]
    fn delta_power() {
        let x = ExactElement::from_symbol(sym(&[vec![2]], &[vec![0]], 0));
        let j2 = MultiIndex::from_rows(&[vec![2]]).unwrap();
        assert_eq!(apply_delta_power(&j2, &x).unwrap(), ExactElement::from_symbol(sym(&[vec![2]], &[vec![2]], 0)));
        assert_eq!(apply_delta_power(&MultiIndex::zeros(1, 1), &x).unwrap(), x);
    }

    #[test]
    fn brackets_on_ground_state() {
        let s = ExactElement::from_symbol(sym(&[vec![2]], &[vec![0]], 0));
        let c = commutator(Operator::D { m: 0, a: 0 }, Operator::Delta { n: 0, b: 0 }, &s).unwrap();
        assert_eq!(c, s.scale(&gi(2)));
        let e = commutator(Operator::E { k: 0, l: 0 }, Operator::Delta { n: 0, b: 0 }, &s).unwrap();
        assert!(e.is_empty());
        let t = ExactElement::from_symbol(sym(&[vec![2]], &[vec![1, 2]], 1));
        let off = commutator(Operator::D { m: 0, a: 0 }, Operator::Delta { n: 0, b: 1 }, &t).unwrap();
        assert!(off.is_empty());
    }

    #[test]
    fn kernel_membership() {
        let x = ExactElement::from_terms([
            (sym(&[vec![2]], &[vec![0]], 0), gi(3)),
            (sym(&[vec![4]], &[vec![0]], 1), Complex::new(0, 1)),
        ]);
        assert!(in_theta_subalgebra(&x));
        assert!(!in_theta_subalgebra(&ExactElement::from_symbol(sym(&[vec![2]], &[vec![1]], 0))));
        assert!(in_theta_subalgebra(&ExactElement::zero()));
    }

    #[test]
    fn index_out_of_range() {
        let x = ExactElement::from_symbol(sym(&[vec![2]], &[vec![1]], 0));
        assert!(matches!(apply(Operator::D { m: 1, a: 0 }, &x), Err(Error::IndexOutOfRange(_))));
        assert!(matches!(apply(Operator::E { k: 0, l: 1 }, &x), Err(Error::IndexOutOfRange(_))));
    }
}
