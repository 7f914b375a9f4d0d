use std::collections::BTreeMap;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::algebra::{BasisSymbol, ElementEvaluator};
use crate::error::{Error, Result};
use crate::lattice::{ComplexMatrix, LevelMatrix, MultiIndex};

/// Polynomial expression in the derivatives `(d/dW)^J theta[A]` of theta
/// functions of one shape `(h, g)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum DiffPolyExpr {
    Deriv {
        level: LevelMatrix,
        j: MultiIndex,
        char_index: usize,
    },
    Sum {
        children: Vec<DiffPolyExpr>,
    },
    Product {
        children: Vec<DiffPolyExpr>,
    },
    Scale {
        coeff: Complex64,
        child: Box<DiffPolyExpr>,
    },
}

impl DiffPolyExpr {
    pub fn deriv(sym: BasisSymbol) -> Self {
        DiffPolyExpr::Deriv {
            level: sym.level,
            j: sym.j,
            char_index: sym.char_index,
        }
    }

    /// `theta[A]` itself.
    pub fn theta(level: LevelMatrix, g: usize, char_index: usize) -> Result<Self> {
        Ok(Self::deriv(BasisSymbol::theta(level, g, char_index)?))
    }

    pub fn sum(children: Vec<DiffPolyExpr>) -> Self {
        DiffPolyExpr::Sum { children }
    }

    pub fn product(children: Vec<DiffPolyExpr>) -> Self {
        DiffPolyExpr::Product { children }
    }

    pub fn scale(coeff: Complex64, child: DiffPolyExpr) -> Self {
        DiffPolyExpr::Scale {
            coeff,
            child: Box::new(child),
        }
    }

    /// `a - b`.
    pub fn difference(a: DiffPolyExpr, b: DiffPolyExpr) -> Self {
        Self::sum(vec![a, Self::scale(Complex64::new(-1.0, 0.0), b)])
    }

    /// Checks every symbol and returns the shared shape `(h, g)`, or `None`
    /// for an expression without symbols.
    pub fn validate(&self, g: usize) -> Result<Option<(usize, usize)>> {
        let mut shape = None;
        self.validate_into(g, &mut shape)?;
        Ok(shape)
    }

    fn validate_into(&self, g: usize, shape: &mut Option<(usize, usize)>) -> Result<()> {
        match self {
            DiffPolyExpr::Deriv { .. } => {
                let sym = self.symbol()?;
                if sym.g() != g {
                    return Err(Error::DimensionMismatch(format!("symbol {sym} has genus {} but Omega has {g}", sym.g())));
                }
                let here = (sym.h(), sym.g());
                match shape {
                    Some(s) if *s != here => {
                        return Err(Error::DimensionMismatch(format!("symbol {sym} has shape {here:?}, expected {s:?}")));
                    }
                    _ => *shape = Some(here),
                }
            }
            DiffPolyExpr::Sum { children } => {
                for c in children {
                    c.validate_into(g, shape)?;
                }
            }
            DiffPolyExpr::Product { children } => {
                if children.is_empty() {
                    return Err(Error::Malformed("empty product".into()));
                }
                for c in children {
                    c.validate_into(g, shape)?;
                }
            }
            DiffPolyExpr::Scale { coeff, child } => {
                if !(coeff.re.is_finite() && coeff.im.is_finite()) {
                    return Err(Error::Malformed(format!("non-finite coefficient {coeff}")));
                }
                child.validate_into(g, shape)?;
            }
        }
        Ok(())
    }

    pub(crate) fn symbol(&self) -> Result<BasisSymbol> {
        match self {
            DiffPolyExpr::Deriv { level, j, char_index } => BasisSymbol::new(level.clone(), j.clone(), *char_index),
            _ => Err(Error::Malformed("not a derivative symbol".into())),
        }
    }

    /// Value with every symbol replaced by `theta~_J[A](Z, W)`.
    pub fn eval_aux(&self, ev: &mut ElementEvaluator, z: &ComplexMatrix, w: &ComplexMatrix) -> Result<Complex64> {
        self.fold(&mut |sym: &BasisSymbol| Ok(ev.symbol(sym, z, w)?.value))
    }

    /// Value with every symbol replaced by a nested finite difference
    /// `(d/dW)^J theta[A](W)`.
    pub fn eval_fd(&self, ev: &mut ElementEvaluator, w: &ComplexMatrix) -> Result<Complex64> {
        let mut cache: BTreeMap<BasisSymbol, Complex64> = BTreeMap::new();
        self.fold(&mut |sym: &BasisSymbol| {
            if let Some(v) = cache.get(sym) {
                return Ok(*v);
            }
            let v = ev.theta_derivative_fd(&sym.level, sym.char_index, &sym.j, w)?.value;
            cache.insert(sym.clone(), v);
            Ok(v)
        })
    }

    fn fold<F>(&self, leaf: &mut F) -> Result<Complex64>
    where
        F: FnMut(&BasisSymbol) -> Result<Complex64>,
    {
        Ok(match self {
            DiffPolyExpr::Deriv { .. } => leaf(&self.symbol()?)?,
            DiffPolyExpr::Sum { children } => {
                let mut s = Complex64::new(0.0, 0.0);
                for c in children {
                    s += c.fold(leaf)?;
                }
                s
            }
            DiffPolyExpr::Product { children } => {
                if children.is_empty() {
                    return Err(Error::Malformed("empty product".into()));
                }
                let mut p = Complex64::new(1.0, 0.0);
                for c in children {
                    p *= c.fold(leaf)?;
                }
                p
            }
            DiffPolyExpr::Scale { coeff, child } => coeff * child.fold(leaf)?,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::PeriodMatrix;

    fn level2() -> LevelMatrix {
        LevelMatrix::from_rows(&[vec![2]]).unwrap()
    }

    fn d(j: i64, idx: usize) -> DiffPolyExpr {
        DiffPolyExpr::deriv(BasisSymbol::new(level2(), MultiIndex::from_rows(&[vec![j]]).unwrap(), idx).unwrap())
    }

    #[test]
    fn json_shape() {
        let e = DiffPolyExpr::scale(Complex64::new(2.0, 0.0), DiffPolyExpr::product(vec![d(0, 0), d(1, 1)]));
        let s = serde_json::to_string(&e).unwrap();
        assert_eq!(
            s,
            r#"{"kind":"scale","coeff":[2.0,0.0],"child":{"kind":"product","children":[{"kind":"deriv","level":[[2]],"j":[[0]],"char_index":0},{"kind":"deriv","level":[[2]],"j":[[1]],"char_index":1}]}}"#
        );
        let back: DiffPolyExpr = serde_json::from_str(&s).unwrap();
        assert_eq!(back, e);
    }

    #[test]
    fn invalid_level_is_rejected_on_parse() {
        let s = r#"{"kind":"deriv","level":[[3]],"j":[[0]],"char_index":0}"#;
        assert!(serde_json::from_str::<DiffPolyExpr>(s).is_err());
    }

    #[test]
    fn validation() {
        assert_eq!(d(1, 0).validate(1).unwrap(), Some((1, 1)));
        assert_eq!(DiffPolyExpr::sum(vec![]).validate(1).unwrap(), None);
        assert!(matches!(DiffPolyExpr::product(vec![]).validate(1), Err(Error::Malformed(_))));
        assert!(matches!(d(0, 0).validate(2), Err(Error::DimensionMismatch(_))));
        let bad = DiffPolyExpr::Deriv {
            level: level2(),
            j: MultiIndex::zeros(1, 1),
            char_index: 2,
        };
        assert!(matches!(bad.validate(1), Err(Error::IndexOutOfRange(_))));
        let h2 = LevelMatrix::from_rows(&[vec![2, 1], vec![1, 2]]).unwrap();
        let mixed = DiffPolyExpr::product(vec![d(0, 0), DiffPolyExpr::theta(h2, 1, 0).unwrap()]);
        assert!(matches!(mixed.validate(1), Err(Error::DimensionMismatch(_))));
    }

    #[test]
    fn syntactic_zero_evaluates_to_zero() {
        let om = PeriodMatrix::identity_i(1);
        let mut ev = ElementEvaluator::certified(&om, 1e-14);
        let e = DiffPolyExpr::product(vec![d(0, 0), d(2, 1)]);
        let zero = DiffPolyExpr::difference(e.clone(), e);
        let w = ComplexMatrix::scalar(Complex64::new(0.1, -0.2));
        assert_eq!(zero.eval_fd(&mut ev, &w).unwrap(), Complex64::new(0.0, 0.0));
        let z = ComplexMatrix::scalar(Complex64::new(0.3, 0.0));
        assert_eq!(zero.eval_aux(&mut ev, &z, &w).unwrap(), Complex64::new(0.0, 0.0));
    }

    #[test]
    fn aux_at_zero_matches_fd() {
        let om = PeriodMatrix::identity_i(1);
        let mut ev = ElementEvaluator::certified(&om, 1e-14);
        let e = DiffPolyExpr::difference(DiffPolyExpr::product(vec![d(0, 0), d(2, 0)]), DiffPolyExpr::product(vec![d(1, 0), d(1, 0)]));
        let w = ComplexMatrix::scalar(Complex64::new(0.1, 0.2));
        let z = ComplexMatrix::zeros(1, 1);
        let a = e.eval_aux(&mut ev, &z, &w).unwrap();
        let f = e.eval_fd(&mut ev, &w).unwrap();
        assert!((a - f).norm() < 1e-6 * a.norm().max(1.0), "{a} vs {f}");
    }
}
