use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::expr::DiffPolyExpr;
use super::sampling::{attempt_seed, Sampler, CHECK_STREAM, FIT_STREAM, HOLDOUT_STREAM};
use crate::algebra::{evaluate_element, AlgebraElement, BasisSymbol, ElementEvaluator};
use crate::error::{Error, Result};
use crate::lattice::{ComplexMatrix, LevelMatrix, MultiIndex, PeriodMatrix};
use crate::theta::{ThetaValue, TruncationConfig};

/// Coefficients below this modulus are dropped from fitted elements.
pub const PRUNE_THRESHOLD: f64 = 1e-12;
/// Largest accepted condition number of the column-normalized sample matrix.
pub const MAX_CONDITION: f64 = 1e8;
/// Number of `W` points in the finite-difference certificate.
pub const FD_CHECK_POINTS: usize = 20;
/// Largest accepted finite-difference mismatch at `Z = 0`.
pub const FD_CHECK_TOL: f64 = 1e-5;

const ATTEMPTS: u64 = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FitMode {
    /// One least-squares solve over the whole candidate basis.
    #[default]
    Global,
    /// Peel off the top `Z`-degree, one degree at a time.
    Sequential,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FitConfig {
    pub seed: u64,
    /// Sample rows per unknown, at least 1.
    pub oversample: f64,
    /// Half-width of the sampling box for real and imaginary parts of `Z`, `W`.
    pub sample_box: f64,
    /// Largest accepted holdout residual.
    pub fit_tol: f64,
    /// Number of holdout points.
    pub holdout: usize,
    /// Certified tail bound for every theta evaluation.
    pub tail_tol: f64,
    pub mode: FitMode,
}

impl Default for FitConfig {
    fn default() -> Self {
        FitConfig {
            seed: 0,
            oversample: 2.0,
            sample_box: 0.4,
            fit_tol: 1e-8,
            holdout: 16,
            tail_tol: 1e-14,
            mode: FitMode::Global,
        }
    }
}

impl FitConfig {
    pub fn with_seed(seed: u64) -> Self {
        FitConfig {
            seed,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.oversample >= 1.0 && self.oversample.is_finite()) {
            return Err(Error::Malformed(format!("oversample {} must be at least 1", self.oversample)));
        }
        if !(self.fit_tol > 0.0) {
            return Err(Error::Malformed(format!("fit_tol {} must be positive", self.fit_tol)));
        }
        if !(self.sample_box > 0.0 && self.sample_box.is_finite()) {
            return Err(Error::Malformed(format!("sample_box {} must be positive", self.sample_box)));
        }
        if self.holdout == 0 {
            return Err(Error::Malformed("holdout must be positive".into()));
        }
        if !(self.tail_tol > 0.0) {
            return Err(Error::Malformed(format!("tail_tol {} must be positive", self.tail_tol)));
        }
        Ok(())
    }
}

/// Expansion in the canonical basis with its certificates.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Decomposition {
    pub element: AlgebraElement,
    /// Largest holdout mismatch over every solve.
    pub residual: f64,
    /// Largest condition number over every solve; 1 when nothing was solved.
    pub conditioning: f64,
    /// Largest mismatch of the `Z = 0` restriction against finite
    /// differences of the input expression.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fd_residual: Option<f64>,
}

impl Decomposition {
    fn exact(element: AlgebraElement) -> Self {
        Decomposition {
            element,
            residual: 0.0,
            conditioning: 1.0,
            fd_residual: None,
        }
    }

    fn absorb(&mut self, other: Decomposition) {
        self.element = std::mem::take(&mut self.element) + other.element;
        self.residual = self.residual.max(other.residual);
        self.conditioning = self.conditioning.max(other.conditioning);
    }
}

/// Least squares on column-normalized `a`; returns the solution and the
/// condition number.
fn solve(mut a: DMatrix<Complex64>, b: DVector<Complex64>) -> (DVector<Complex64>, f64) {
    let norms: Vec<f64> = a.column_iter().map(|c| c.norm()).collect();
    for (j, n) in norms.iter().enumerate() {
        if *n > 0.0 {
            a.column_mut(j).unscale_mut(*n);
        }
    }
    let svd = a.svd(true, true);
    let s = &svd.singular_values;
    let (smax, smin) = (s.max(), s.min());
    let cond = if smin > 0.0 { smax / smin } else { f64::INFINITY };
    if !cond.is_finite() {
        return (DVector::zeros(norms.len()), cond);
    }
    let mut x = svd.solve(&b, 0.0).expect("both factors were computed");
    for (j, n) in norms.iter().enumerate() {
        if *n > 0.0 {
            x[j] /= *n;
        }
    }
    (x, cond)
}

fn row_count(unknowns: usize, oversample: f64) -> usize {
    ((unknowns as f64 * oversample).ceil() as usize).max(unknowns)
}

/// Expands `f` over `{theta~_J[A] : |J| <= max_degree}` of one level.
///
/// `f` must be a deterministic function of `(Z, W)`. Samples are drawn from
/// the box of `cfg.sample_box`; a condition number above [`MAX_CONDITION`]
/// triggers one resample with a derived seed before failing.
pub fn fit_in_basis<F>(
    mut f: F,
    level: &LevelMatrix,
    max_degree: u32,
    omega: &PeriodMatrix,
    cfg: &FitConfig,
) -> Result<Decomposition>
where
    F: FnMut(&ComplexMatrix, &ComplexMatrix) -> Result<Complex64>,
{
    cfg.validate()?;
    let mut ev = ElementEvaluator::certified(omega, cfg.tail_tol);
    let mut worst = 0.0_f64;
    for attempt in 0..ATTEMPTS {
        let sampler = Sampler::new(attempt_seed(cfg.seed, attempt), cfg.sample_box, level.h(), omega.g());
        let fitted = match cfg.mode {
            FitMode::Global => fit_global(&mut f, &mut ev, level, max_degree, &sampler, cfg)?,
            FitMode::Sequential => fit_sequential(&mut f, &mut ev, level, max_degree, &sampler, cfg)?,
        };
        let (element, conditioning) = match fitted {
            Ok(v) => v,
            Err(cond) => {
                worst = worst.max(cond);
                continue;
            }
        };
        let element = element.pruned(PRUNE_THRESHOLD);
        let mut residual = 0.0_f64;
        for i in 0..cfg.holdout as u64 {
            let (z, w) = sampler.point(HOLDOUT_STREAM + i);
            let got = ev.element(&element, &z, &w)?.value;
            residual = residual.max((f(&z, &w)? - got).norm());
        }
        if !(residual <= cfg.fit_tol) {
            return Err(Error::ResidualTooLarge {
                residual,
                tol: cfg.fit_tol,
            });
        }
        return Ok(Decomposition {
            element,
            residual,
            conditioning,
            fd_residual: None,
        });
    }
    Err(Error::IllConditioned(worst))
}

type Fitted = std::result::Result<(AlgebraElement, f64), f64>;

fn symbols(level: &LevelMatrix, js: &[MultiIndex], chars: usize) -> Result<Vec<BasisSymbol>> {
    let mut out = Vec::with_capacity(js.len() * chars);
    for idx in 0..chars {
        for j in js {
            out.push(BasisSymbol::new(level.clone(), j.clone(), idx)?);
        }
    }
    Ok(out)
}

fn fit_global<F>(
    f: &mut F,
    ev: &mut ElementEvaluator,
    level: &LevelMatrix,
    max_degree: u32,
    sampler: &Sampler,
    cfg: &FitConfig,
) -> Result<Fitted>
where
    F: FnMut(&ComplexMatrix, &ComplexMatrix) -> Result<Complex64>,
{
    let js = MultiIndex::all_up_to(level.h(), ev.omega().g(), max_degree);
    let chars = ev.characteristic_count(level)?;
    let syms = symbols(level, &js, chars)?;
    let n = syms.len();
    let rows = row_count(n, cfg.oversample);
    let mut a = DMatrix::<Complex64>::zeros(rows, n);
    let mut b = DVector::<Complex64>::zeros(rows);
    for r in 0..rows {
        let (z, w) = sampler.point(FIT_STREAM + r as u64);
        b[r] = f(&z, &w)?;
        for idx in 0..chars {
            for (c, v) in ev.values(level, idx, &js, &z, &w)?.into_iter().enumerate() {
                a[(r, idx * js.len() + c)] = v.value;
            }
        }
    }
    let (x, cond) = solve(a, b);
    if !(cond <= MAX_CONDITION) {
        return Ok(Err(cond));
    }
    Ok(Ok((AlgebraElement::from_terms(syms.into_iter().zip(x.iter().copied())), cond)))
}

/// Degree-by-degree reduction: the degree-`d` part in `Z` of the remainder
/// is isolated by averaging over `Z -> t Z` with `t^(d+1) = 1`, matched
/// against the leading terms `(2 pi i)^d (M Z)^K theta[A](W)`, and the
/// matched basis functions are subtracted.
fn fit_sequential<F>(
    f: &mut F,
    ev: &mut ElementEvaluator,
    level: &LevelMatrix,
    max_degree: u32,
    sampler: &Sampler,
    cfg: &FitConfig,
) -> Result<Fitted>
where
    F: FnMut(&ComplexMatrix, &ComplexMatrix) -> Result<Complex64>,
{
    let (h, g) = (level.h(), ev.omega().g());
    let chars = ev.characteristic_count(level)?;
    let zero_j = MultiIndex::zeros(h, g);
    let zero_z = ComplexMatrix::zeros(h, g);
    let two_pi_i = Complex64::new(0.0, 2.0 * PI);
    let mut found = AlgebraElement::zero();
    let mut worst = 1.0_f64;
    for d in (0..=max_degree).rev() {
        let js: Vec<MultiIndex> = MultiIndex::all_up_to(h, g, d).into_iter().filter(|j| j.size() == d).collect();
        let syms = symbols(level, &js, chars)?;
        let n = syms.len();
        let rows = row_count(n, cfg.oversample);
        let roots = d as usize + 1;
        let mut a = DMatrix::<Complex64>::zeros(rows, n);
        let mut b = DVector::<Complex64>::zeros(rows);
        for r in 0..rows {
            let (z, w) = sampler.point(FIT_STREAM + r as u64);
            let mut avg = Complex64::new(0.0, 0.0);
            for k in 0..roots {
                let t = Complex64::from_polar(1.0, 2.0 * PI * k as f64 / roots as f64);
                let zt = ComplexMatrix::new(h, g, z.entries().iter().map(|x| x * t).collect())?;
                let rem = f(&zt, &w)? - ev.element(&found, &zt, &w)?.value;
                avg += rem * t.powi(-(d as i32));
            }
            b[r] = avg / roots as f64;
            let mz = level.matrix().to_complex().mul(&z)?;
            for idx in 0..chars {
                let theta = ev.values(level, idx, std::slice::from_ref(&zero_j), &zero_z, &w)?[0].value;
                for (c, j) in js.iter().enumerate() {
                    let mut mono = two_pi_i.powi(d as i32);
                    for k in 0..h {
                        for s in 0..g {
                            mono *= mz.get(k, s).powi(j.get(k, s) as i32);
                        }
                    }
                    a[(r, idx * js.len() + c)] = mono * theta;
                }
            }
        }
        let (x, cond) = solve(a, b);
        if !(cond <= MAX_CONDITION) {
            return Ok(Err(cond));
        }
        worst = worst.max(cond);
        found = found + AlgebraElement::from_terms(syms.into_iter().zip(x.iter().copied()));
    }
    Ok(Ok((found, worst)))
}

fn check_operands(x: &AlgebraElement, g: usize) -> Result<()> {
    for (h, xg) in x.shapes() {
        if xg != g {
            return Err(Error::DimensionMismatch(format!("element of shape {h}x{xg} with Omega of genus {g}")));
        }
    }
    Ok(())
}

/// Expansion of the pointwise product `x1 * x2`. Each pair of graded pieces
/// of levels `M1`, `M2` is fitted at level `M1 + M2` with degree bound
/// `deg1 + deg2`.
pub fn product_expand(x1: &AlgebraElement, x2: &AlgebraElement, omega: &PeriodMatrix, cfg: &FitConfig) -> Result<Decomposition> {
    cfg.validate()?;
    check_operands(x1, omega.g())?;
    check_operands(x2, omega.g())?;
    let shapes: std::collections::BTreeSet<_> = x1.shapes().union(&x2.shapes()).copied().collect();
    if shapes.len() > 1 {
        return Err(Error::DimensionMismatch(format!("operands of shapes {shapes:?}")));
    }
    let mut out = Decomposition::exact(AlgebraElement::zero());
    for l1 in x1.levels() {
        for l2 in x2.levels() {
            let level = l1.checked_add(&l2)?;
            let (p1, p2) = (x1.project(&l1), x2.project(&l2));
            let degree = p1.degree().unwrap_or(0) + p2.degree().unwrap_or(0);
            let mut ev = ElementEvaluator::certified(omega, cfg.tail_tol);
            let part = fit_in_basis(
                |z, w| Ok(ev.element(&p1, z, w)?.value * ev.element(&p2, z, w)?.value),
                &level,
                degree,
                omega,
                cfg,
            )?;
            out.absorb(part);
        }
    }
    Ok(out)
}

fn reduce(expr: &DiffPolyExpr, omega: &PeriodMatrix, cfg: &FitConfig) -> Result<Decomposition> {
    match expr {
        DiffPolyExpr::Deriv { .. } => Ok(Decomposition::exact(AlgebraElement::from_symbol(expr.symbol()?))),
        DiffPolyExpr::Sum { children } => {
            let mut out = Decomposition::exact(AlgebraElement::zero());
            for c in children {
                out.absorb(reduce(c, omega, cfg)?);
            }
            Ok(out)
        }
        DiffPolyExpr::Scale { coeff, child } => {
            let mut d = reduce(child, omega, cfg)?;
            d.element = d.element.scale(coeff);
            Ok(d)
        }
        DiffPolyExpr::Product { children } => {
            let (first, rest) = children.split_first().ok_or_else(|| Error::Malformed("empty product".into()))?;
            let mut acc = reduce(first, omega, cfg)?;
            for c in rest {
                let right = reduce(c, omega, cfg)?;
                let step = product_expand(&acc.element, &right.element, omega, cfg)?;
                acc = Decomposition {
                    element: step.element,
                    residual: acc.residual.max(right.residual).max(step.residual),
                    conditioning: acc.conditioning.max(right.conditioning).max(step.conditioning),
                    fd_residual: None,
                };
            }
            Ok(acc)
        }
    }
}

/// Expansion of a differential polynomial in the canonical basis.
///
/// Each symbol `(d/dW)^J theta[A]` becomes `theta~_J[A]`, sums and scalings
/// are exact, and products are fitted pairwise from the left. The result is
/// certified at [`FD_CHECK_POINTS`] points with `Z = 0` against nested finite
/// differences of the input.
pub fn diff_poly_decompose(expr: &DiffPolyExpr, omega: &PeriodMatrix, cfg: &FitConfig) -> Result<Decomposition> {
    cfg.validate()?;
    let Some((h, g)) = expr.validate(omega.g())? else {
        return Ok(Decomposition {
            fd_residual: Some(0.0),
            ..Decomposition::exact(AlgebraElement::zero())
        });
    };
    let mut out = reduce(expr, omega, cfg)?;
    // Sums of fitted pieces cancel only to the noise floor.
    out.element = out.element.pruned(PRUNE_THRESHOLD);
    let sampler = Sampler::new(cfg.seed, cfg.sample_box, h, g);
    let mut ev = ElementEvaluator::certified(omega, cfg.tail_tol);
    let mut fd_residual = 0.0_f64;
    for i in 0..FD_CHECK_POINTS as u64 {
        let w = sampler.w_point(CHECK_STREAM + i);
        let lhs = expr.eval_fd(&mut ev, &w)?;
        let rhs = element_fd(&mut ev, &out.element, &w)?;
        fd_residual = fd_residual.max((lhs - rhs).norm());
    }
    if !(fd_residual <= FD_CHECK_TOL) {
        return Err(Error::ResidualTooLarge {
            residual: fd_residual,
            tol: FD_CHECK_TOL,
        });
    }
    out.fd_residual = Some(fd_residual);
    Ok(out)
}

/// `sum c (d/dW)^J theta[A](W)` by nested finite differences.
pub(crate) fn element_fd(ev: &mut ElementEvaluator, x: &AlgebraElement, w: &ComplexMatrix) -> Result<Complex64> {
    let mut s = Complex64::new(0.0, 0.0);
    for (sym, c) in x.terms() {
        s += c * ev.theta_derivative_fd(&sym.level, sym.char_index, &sym.j, w)?.value;
    }
    Ok(s)
}

/// The element evaluated at `Z = 0`, where each `theta~_J[A]` equals
/// `(d/dW)^J theta[A](W)`.
pub fn restrict_z0(x: &AlgebraElement, omega: &PeriodMatrix, w: &ComplexMatrix, cfg: &TruncationConfig) -> Result<ThetaValue> {
    if x.is_empty() {
        return Ok(ThetaValue {
            value: Complex64::new(0.0, 0.0),
            tail_bound: 0.0,
        });
    }
    let z = ComplexMatrix::zeros(w.rows(), w.cols());
    evaluate_element(x, omega, &z, w, cfg)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn level(rows: &[Vec<i64>]) -> LevelMatrix {
        LevelMatrix::from_rows(rows).unwrap()
    }

    fn sym(l: &LevelMatrix, j: i64, idx: usize) -> BasisSymbol {
        BasisSymbol::new(l.clone(), MultiIndex::from_rows(&[vec![j]]).unwrap(), idx).unwrap()
    }

    fn random_element(seed: u64, l: &LevelMatrix) -> AlgebraElement {
        let mut rng = super::super::counter_rng(seed, 0);
        let mut x = AlgebraElement::zero();
        for j in 0..=2 {
            for idx in 0..l.characteristic_count(1) {
                if rng.random_bool(0.6) {
                    x.add_term(sym(l, j, idx), c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
                }
            }
        }
        x
    }

    #[test]
    fn round_trip_recovers_coefficients() {
        let l = level(&[vec![2]]);
        let om = PeriodMatrix::identity_i(1);
        for seed in 0..3 {
            let x = random_element(seed, &l);
            let mut ev = ElementEvaluator::certified(&om, 1e-14);
            let d = fit_in_basis(|z, w| Ok(ev.element(&x, z, w)?.value), &l, 2, &om, &FitConfig::with_seed(seed)).unwrap();
            assert!(d.element.max_coeff_diff(&x) < 1e-6, "{}", d.element.max_coeff_diff(&x));
            assert!(d.residual < 1e-8);
            assert!(d.conditioning < MAX_CONDITION);
        }
    }

    #[test]
    fn sequential_mode_agrees() {
        let l = level(&[vec![2]]);
        let om = PeriodMatrix::identity_i(1);
        let x = random_element(4, &l);
        let cfg = FitConfig {
            mode: FitMode::Sequential,
            ..FitConfig::default()
        };
        let mut ev = ElementEvaluator::certified(&om, 1e-14);
        let d = fit_in_basis(|z, w| Ok(ev.element(&x, z, w)?.value), &l, 2, &om, &cfg).unwrap();
        assert!(d.element.max_coeff_diff(&x) < 1e-6, "{}", d.element.max_coeff_diff(&x));
    }

    #[test]
    fn zero_function_gives_empty_element() {
        let l = level(&[vec![2]]);
        let om = PeriodMatrix::identity_i(1);
        let d = fit_in_basis(|_, _| Ok(c(0.0, 0.0)), &l, 1, &om, &FitConfig::default()).unwrap();
        assert!(d.element.is_empty());
        assert_eq!(d.residual, 0.0);
    }

    #[test]
    fn basis_element_recovers_itself() {
        let l = level(&[vec![2]]);
        let om = PeriodMatrix::identity_i(1);
        let s = sym(&l, 1, 0);
        let x = AlgebraElement::from_symbol(s.clone());
        let mut ev = ElementEvaluator::certified(&om, 1e-14);
        let d = fit_in_basis(|z, w| Ok(ev.symbol(&s, z, w)?.value), &l, 1, &om, &FitConfig::default()).unwrap();
        assert_eq!(d.element.len(), 1);
        assert!(d.element.max_coeff_diff(&x) < 1e-6);
    }

    #[test]
    fn degree_too_small_is_reported() {
        let l = level(&[vec![2]]);
        let om = PeriodMatrix::identity_i(1);
        let s = sym(&l, 2, 1);
        let mut ev = ElementEvaluator::certified(&om, 1e-14);
        let r = fit_in_basis(|z, w| Ok(ev.symbol(&s, z, w)?.value), &l, 1, &om, &FitConfig::default());
        assert!(matches!(r, Err(Error::ResidualTooLarge { .. })), "{r:?}");
    }

    #[test]
    fn theta_squared_lands_in_level_four() {
        let l = level(&[vec![2]]);
        let om = PeriodMatrix::identity_i(1);
        let t = AlgebraElement::from_symbol(sym(&l, 0, 0));
        let d = product_expand(&t, &t, &om, &FitConfig::default()).unwrap();
        assert!(d.residual < 1e-8);
        assert!(!d.element.is_empty());
        let four = level(&[vec![4]]);
        assert!(d.element.terms().all(|(s, _)| s.level == four && s.j.is_zero()));
    }

    #[test]
    fn product_degree_is_additive() {
        let l = level(&[vec![2]]);
        let om = PeriodMatrix::identity_i(1);
        let a = AlgebraElement::from_symbol(sym(&l, 0, 1));
        let b = AlgebraElement::from_symbol(sym(&l, 1, 0));
        let d = product_expand(&a, &b, &om, &FitConfig::default()).unwrap();
        assert!(d.element.degree().unwrap() <= 1);
    }

    #[test]
    fn cancelling_level_sum_is_rejected() {
        let a = AlgebraElement::from_symbol(BasisSymbol::theta(level(&[vec![2, 1], vec![1, 2]]), 1, 0).unwrap());
        let b = AlgebraElement::from_symbol(BasisSymbol::theta(level(&[vec![2, -1], vec![-1, 2]]), 1, 0).unwrap());
        let r = product_expand(&a, &b, &PeriodMatrix::identity_i(1), &FitConfig::default());
        assert!(matches!(r, Err(Error::LevelSumInvalid(_))), "{r:?}");
    }

    #[test]
    fn config_validation() {
        let bad = FitConfig {
            oversample: 0.5,
            ..FitConfig::default()
        };
        assert!(bad.validate().is_err());
        let bad = FitConfig {
            fit_tol: 0.0,
            ..FitConfig::default()
        };
        assert!(bad.validate().is_err());
        let json = serde_json::to_string(&FitConfig::default()).unwrap();
        let back: FitConfig = serde_json::from_str(&json).unwrap();
        assert_eq!(back, FitConfig::default());
    }

    #[test]
    fn restriction_to_zero() {
        let l = level(&[vec![2]]);
        let om = PeriodMatrix::identity_i(1);
        let cfg = TruncationConfig::new(6, 1e-12).unwrap();
        let w0 = ComplexMatrix::zeros(1, 1);
        let t = restrict_z0(&AlgebraElement::from_symbol(sym(&l, 0, 0)), &om, &w0, &cfg).unwrap();
        assert!((t.value - c(1.003_734_885_487_739, 0.0)).norm() < 1e-12);
        let odd = restrict_z0(&AlgebraElement::from_symbol(sym(&l, 1, 0)), &om, &w0, &cfg).unwrap();
        assert!(odd.value.norm() <= odd.tail_bound + 1e-12);
    }

    #[test]
    fn single_symbol_decomposes_to_itself() {
        let l = level(&[vec![2]]);
        let om = PeriodMatrix::identity_i(1);
        let s = sym(&l, 1, 0);
        let d = diff_poly_decompose(&DiffPolyExpr::deriv(s.clone()), &om, &FitConfig::default()).unwrap();
        assert_eq!(d.element, AlgebraElement::from_symbol(s));
        assert!(d.fd_residual.unwrap() < 1e-6);
    }
}
