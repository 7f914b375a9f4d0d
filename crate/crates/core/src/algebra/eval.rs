use std::collections::BTreeMap;

use num_complex::Complex64;

use super::{AlgebraElement, BasisSymbol};
use crate::error::{Error, Result};
use crate::fd::{self, FdEstimate};
use crate::lattice::{enumerate_characteristics, Characteristic, ComplexMatrix, LevelMatrix, MultiIndex, PeriodMatrix};
use crate::theta::{ThetaContext, ThetaValue, TruncationConfig};

#[derive(Debug, Clone, Copy)]
enum Radius {
    Fixed(TruncationConfig),
    /// Smallest radius certifying this tail tolerance at each argument.
    Certified(f64),
}

#[derive(Debug, Clone)]
struct LevelData {
    ctx: ThetaContext,
    chars: Vec<Characteristic>,
}

/// Numeric bridge from symbols to functions of `(Z, W)`, caching the
/// per-level contexts and characteristic tables.
#[derive(Debug, Clone)]
pub struct ElementEvaluator {
    omega: PeriodMatrix,
    radius: Radius,
    levels: BTreeMap<LevelMatrix, LevelData>,
}

impl ElementEvaluator {
    /// Every evaluation uses `cfg.radius` and must certify `cfg.tail_tol`.
    pub fn fixed(omega: &PeriodMatrix, cfg: TruncationConfig) -> Self {
        ElementEvaluator {
            omega: omega.clone(),
            radius: Radius::Fixed(cfg),
            levels: BTreeMap::new(),
        }
    }

    /// Each evaluation picks the smallest radius certifying `tail_tol`.
    pub fn certified(omega: &PeriodMatrix, tail_tol: f64) -> Self {
        ElementEvaluator {
            omega: omega.clone(),
            radius: Radius::Certified(tail_tol),
            levels: BTreeMap::new(),
        }
    }

    pub fn omega(&self) -> &PeriodMatrix {
        &self.omega
    }

    fn data(&mut self, level: &LevelMatrix) -> Result<&LevelData> {
        if !self.levels.contains_key(level) {
            let data = LevelData {
                ctx: ThetaContext::new(level, &self.omega)?,
                chars: enumerate_characteristics(level, self.omega.g())?,
            };
            self.levels.insert(level.clone(), data);
        }
        Ok(&self.levels[level])
    }

    pub fn characteristic_count(&mut self, level: &LevelMatrix) -> Result<usize> {
        Ok(self.data(level)?.chars.len())
    }

    /// `theta~_J[A](Z, W)` for every `J` in `js`, one characteristic.
    pub fn values(
        &mut self,
        level: &LevelMatrix,
        char_index: usize,
        js: &[MultiIndex],
        z: &ComplexMatrix,
        w: &ComplexMatrix,
    ) -> Result<Vec<ThetaValue>> {
        let radius = self.radius;
        let data = self.data(level)?;
        let chr = data.chars.get(char_index).ok_or_else(|| {
            Error::IndexOutOfRange(format!("characteristic {char_index} of {} for level {level}", data.chars.len()))
        })?;
        match radius {
            Radius::Certified(tol) => data.ctx.eval_certified_many(js, chr, z, w, tol),
            Radius::Fixed(cfg) => js.iter().map(|j| data.ctx.eval(j, chr, z, w, &cfg)).collect(),
        }
    }

    pub fn symbol(&mut self, sym: &BasisSymbol, z: &ComplexMatrix, w: &ComplexMatrix) -> Result<ThetaValue> {
        Ok(self.values(&sym.level, sym.char_index, std::slice::from_ref(&sym.j), z, w)?[0])
    }

    /// `sum c * theta~(Z, W)`; the tail bound is `sum |c| * tail`.
    pub fn element(&mut self, x: &AlgebraElement, z: &ComplexMatrix, w: &ComplexMatrix) -> Result<ThetaValue> {
        // Group by (level, characteristic) so each lattice sum is shared.
        let mut groups: BTreeMap<(&LevelMatrix, usize), Vec<(&MultiIndex, Complex64)>> = BTreeMap::new();
        for (s, c) in x.terms() {
            groups.entry((&s.level, s.char_index)).or_default().push((&s.j, *c));
        }
        let mut value = Complex64::new(0.0, 0.0);
        let mut tail_bound = 0.0;
        for ((level, idx), terms) in groups {
            let js: Vec<MultiIndex> = terms.iter().map(|(j, _)| (*j).clone()).collect();
            let vals = self.values(level, idx, &js, z, w)?;
            for ((_, c), v) in terms.iter().zip(vals) {
                value += c * v.value;
                tail_bound += c.norm() * v.tail_bound;
            }
        }
        Ok(ThetaValue { value, tail_bound })
    }

    /// `(d/dW)^J theta[A](W)` by nested finite differences of the theta series.
    pub fn theta_derivative_fd(
        &mut self,
        level: &LevelMatrix,
        char_index: usize,
        j: &MultiIndex,
        w: &ComplexMatrix,
    ) -> Result<FdEstimate> {
        let zero_j = MultiIndex::zeros(level.h(), self.omega.g());
        let z = ComplexMatrix::zeros(level.h(), self.omega.g());
        fd::derivative(
            |w: &ComplexMatrix| Ok::<_, Error>(self.values(level, char_index, std::slice::from_ref(&zero_j), &z, w)?[0].value),
            w,
            j,
        )
    }
}

/// `sum c * theta~_J[A](Z, W)` at a fixed truncation radius.
pub fn evaluate_element(
    x: &AlgebraElement,
    omega: &PeriodMatrix,
    z: &ComplexMatrix,
    w: &ComplexMatrix,
    cfg: &TruncationConfig,
) -> Result<ThetaValue> {
    ElementEvaluator::fixed(omega, *cfg).element(x, z, w)
}
