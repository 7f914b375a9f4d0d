use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_complex::{Complex, Complex64};
use num_traits::Zero;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::BasisSymbol;
use crate::lattice::{LevelMatrix, MultiIndex};

/// Coefficient ring of an [`Element`].
pub trait Coefficient:
    Clone + PartialEq + fmt::Debug + Zero + Add<Output = Self> + Sub<Output = Self> + Mul<Output = Self> + Neg<Output = Self>
{
    fn from_i64(x: i64) -> Self;
    fn to_complex(&self) -> Complex64;
}

impl Coefficient for Complex64 {
    fn from_i64(x: i64) -> Self {
        Complex64::new(x as f64, 0.0)
    }

    fn to_complex(&self) -> Complex64 {
        *self
    }
}

/// Gaussian integers: exact arithmetic for the integer-coefficient identities.
impl Coefficient for Complex<i64> {
    fn from_i64(x: i64) -> Self {
        Complex::new(x, 0)
    }

    fn to_complex(&self) -> Complex64 {
        Complex64::new(self.re as f64, self.im as f64)
    }
}

/// Finite linear combination of basis symbols. Exact zero coefficients are
/// never stored.
#[derive(Debug, Clone, PartialEq)]
pub struct Element<C> {
    terms: BTreeMap<BasisSymbol, C>,
}

pub type AlgebraElement = Element<Complex64>;
pub type ExactElement = Element<Complex<i64>>;

impl<C: Coefficient> Default for Element<C> {
    fn default() -> Self {
        Self::zero()
    }
}

impl<C: Coefficient> Element<C> {
    pub fn zero() -> Self {
        Element { terms: BTreeMap::new() }
    }

    pub fn from_symbol(sym: BasisSymbol) -> Self {
        let mut e = Self::zero();
        e.add_term(sym, C::from_i64(1));
        e
    }

    pub fn from_terms(terms: impl IntoIterator<Item = (BasisSymbol, C)>) -> Self {
        let mut e = Self::zero();
        for (s, c) in terms {
            e.add_term(s, c);
        }
        e
    }

    /// Adds `c * sym`, dropping the term if it cancels exactly.
    pub fn add_term(&mut self, sym: BasisSymbol, c: C) {
        if c.is_zero() {
            return;
        }
        let slot = self.terms.entry(sym);
        match slot {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                let sum = o.get().clone() + c;
                if sum.is_zero() {
                    o.remove();
                } else {
                    *o.get_mut() = sum;
                }
            }
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (&BasisSymbol, &C)> {
        self.terms.iter()
    }

    pub fn coeff(&self, sym: &BasisSymbol) -> Option<&C> {
        self.terms.get(sym)
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn scale(&self, c: &C) -> Self {
        Self::from_terms(self.terms.iter().map(|(s, x)| (s.clone(), x.clone() * c.clone())))
    }

    /// Levels present, in symbol order.
    pub fn levels(&self) -> BTreeSet<LevelMatrix> {
        self.terms.keys().map(|s| s.level.clone()).collect()
    }

    /// The projection onto one graded piece.
    pub fn project(&self, level: &LevelMatrix) -> Self {
        Element {
            terms: self
                .terms
                .iter()
                .filter(|(s, _)| &s.level == level)
                .map(|(s, c)| (s.clone(), c.clone()))
                .collect(),
        }
    }

    /// Largest `|J|` among the terms; `None` when empty.
    pub fn degree(&self) -> Option<u32> {
        self.terms.keys().map(|s| s.j.size()).max()
    }

    /// `(h, g)` shapes present.
    pub fn shapes(&self) -> BTreeSet<(usize, usize)> {
        self.terms.keys().map(|s| (s.h(), s.g())).collect()
    }

    /// Whether every term has `J = 0`.
    pub fn is_degree_zero(&self) -> bool {
        self.terms.keys().all(|s| s.j.is_zero())
    }

    /// Sub-element of the terms with the given `J`.
    pub fn component(&self, j: &MultiIndex) -> Self {
        Element {
            terms: self
                .terms
                .iter()
                .filter(|(s, _)| &s.j == j)
                .map(|(s, c)| (s.clone(), c.clone()))
                .collect(),
        }
    }

    pub fn to_complex(&self) -> AlgebraElement {
        Element {
            terms: self.terms.iter().map(|(s, c)| (s.clone(), c.to_complex())).collect(),
        }
    }
}

impl AlgebraElement {
    /// Drops coefficients with modulus below `threshold`.
    pub fn pruned(&self, threshold: f64) -> Self {
        Element {
            terms: self
                .terms
                .iter()
                .filter(|(_, c)| c.norm() >= threshold)
                .map(|(s, c)| (s.clone(), *c))
                .collect(),
        }
    }

    /// Sup-norm distance between coefficient vectors.
    pub fn max_coeff_diff(&self, other: &Self) -> f64 {
        (self.clone() - other.clone()).terms.values().map(|c| c.norm()).fold(0.0, f64::max)
    }
}

impl<C: Coefficient> Add for Element<C> {
    type Output = Self;

    fn add(mut self, rhs: Self) -> Self {
        for (s, c) in rhs.terms {
            self.add_term(s, c);
        }
        self
    }
}

impl<C: Coefficient> Sub for Element<C> {
    type Output = Self;

    fn sub(mut self, rhs: Self) -> Self {
        for (s, c) in rhs.terms {
            self.add_term(s, -c);
        }
        self
    }
}

impl<C: Coefficient> Neg for Element<C> {
    type Output = Self;

    fn neg(self) -> Self {
        Element {
            terms: self.terms.into_iter().map(|(s, c)| (s, -c)).collect(),
        }
    }
}

impl<C: Coefficient> From<BasisSymbol> for Element<C> {
    fn from(s: BasisSymbol) -> Self {
        Self::from_symbol(s)
    }
}

impl<C: Coefficient + fmt::Display> fmt::Display for Element<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_empty() {
            return write!(f, "0");
        }
        for (i, (s, c)) in self.terms.iter().enumerate() {
            if i > 0 {
                write!(f, " + ")?;
            }
            write!(f, "({c}) {s}")?;
        }
        Ok(())
    }
}

#[derive(Serialize, Deserialize)]
struct TermJson<C> {
    level: LevelMatrix,
    j: MultiIndex,
    char_index: usize,
    coeff: C,
}

impl<C: Coefficient + Serialize> Serialize for Element<C> {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_seq(self.terms.iter().map(|(sym, c)| TermJson {
            level: sym.level.clone(),
            j: sym.j.clone(),
            char_index: sym.char_index,
            coeff: c.clone(),
        }))
    }
}

impl<'de, C: Coefficient + Deserialize<'de>> Deserialize<'de> for Element<C> {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let raw: Vec<TermJson<C>> = Vec::deserialize(d)?;
        let mut e = Element::zero();
        for t in raw {
            let sym = BasisSymbol::new(t.level, t.j, t.char_index).map_err(serde::de::Error::custom)?;
            e.add_term(sym, t.coeff);
        }
        Ok(e)
    }
}
