//! Built-in verification suites on desk-scale configurations.
//!
//! Every random case is drawn from a counter-based generator keyed by the
//! seed and the case index, and reports carry no timing, so a report is a
//! pure function of `(suite, seed, tol)`.

use std::fmt;
use std::str::FromStr;

use num_complex::{Complex, Complex64};
use rand::seq::IndexedRandom;
use rand::Rng;
use serde::Serialize;
use serde_json::{json, Value};

use crate::algebra::{apply, commutator, in_theta_subalgebra, AlgebraElement, BasisSymbol, ElementEvaluator, ExactElement, Operator};
use crate::decompose::{counter_rng, diff_poly_decompose, fit_in_basis, verify_theorem3, DiffPolyExpr, FitConfig};
use crate::error::{Error, Result};
use crate::lattice::{enumerate_characteristics, ComplexMatrix, IntMatrix, LevelMatrix, MultiIndex, PeriodMatrix};
use crate::theta::{choose_radius, quasi_period_residual, shift_operator_check, TruncationConfig};

pub const QUASI_PERIOD_CASES: usize = 100;
pub const SHIFT_CASES: usize = 50;
pub const KERNEL_CASES: usize = 200;
pub const ROUND_TRIP_CASES: usize = 50;
pub const COMMUTATOR_MAX_DEGREE: u32 = 3;
/// Tail tolerance for the radii of the numeric suites.
pub const SUITE_TAIL_TOL: f64 = 1e-12;
pub const DEFAULT_QUASI_PERIOD_TOL: f64 = 1e-8;
pub const DEFAULT_SHIFT_TOL: f64 = 1e-6;
pub const DEFAULT_THEOREM3_TOL: f64 = 1e-5;
/// Largest coefficient disagreement between two seeds.
pub const UNIQUENESS_TOL: f64 = 1e-6;

const SAMPLE_BOX: f64 = 0.4;
const QUASI_STREAM: u64 = 10 << 40;
const SHIFT_STREAM: u64 = 11 << 40;
const KERNEL_STREAM: u64 = 12 << 40;
const ROUND_TRIP_STREAM: u64 = 13 << 40;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    Quasiperiodicity,
    Shift,
    Commutators,
    Kernel,
    Roundtrip,
    Theorem3,
    All,
}

impl Suite {
    pub const NAMES: [&'static str; 7] = ["quasiperiodicity", "shift", "commutators", "kernel", "roundtrip", "theorem3", "all"];

    fn expand(self) -> Vec<Suite> {
        match self {
            Suite::All => vec![
                Suite::Quasiperiodicity,
                Suite::Shift,
                Suite::Commutators,
                Suite::Kernel,
                Suite::Roundtrip,
                Suite::Theorem3,
            ],
            s => vec![s],
        }
    }

    fn name(self) -> &'static str {
        match self {
            Suite::Quasiperiodicity => "quasiperiodicity",
            Suite::Shift => "shift",
            Suite::Commutators => "commutators",
            Suite::Kernel => "kernel",
            Suite::Roundtrip => "roundtrip",
            Suite::Theorem3 => "theorem3",
            Suite::All => "all",
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "quasiperiodicity" => Suite::Quasiperiodicity,
            "shift" => Suite::Shift,
            "commutators" => Suite::Commutators,
            "kernel" => Suite::Kernel,
            "roundtrip" => Suite::Roundtrip,
            "theorem3" => Suite::Theorem3,
            "all" => Suite::All,
            _ => return Err(Error::Malformed(format!("unknown suite {s:?}"))),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct VerifyOptions {
    pub seed: u64,
    /// Replaces the pass threshold of the numeric suites.
    pub tol: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConfigReport {
    pub level: LevelMatrix,
    pub g: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub omega: Option<ComplexMatrix>,
    pub cases: usize,
    pub max_residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuiteReport {
    pub suite: Suite,
    pub passed: bool,
    pub tol: f64,
    pub cases: usize,
    pub failures: usize,
    pub max_residual: f64,
    pub configurations: Vec<ConfigReport>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub details: Vec<Value>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub failing_case: Option<Value>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifyReport {
    pub seed: u64,
    pub passed: bool,
    pub suites: Vec<SuiteReport>,
}

/// Level matrices of the built-in configurations.
pub fn desk_levels() -> Vec<LevelMatrix> {
    [vec![vec![2]], vec![vec![4]], vec![vec![2, 1], vec![1, 2]]]
        .iter()
        .map(|r| LevelMatrix::from_rows(r).expect("desk levels are admissible"))
        .collect()
}

/// `[[i, 0.3i], [0.3i, 2i]]`.
pub fn desk_omega_genus_two() -> PeriodMatrix {
    let i = Complex64::i();
    PeriodMatrix::new(ComplexMatrix::from_rows(&[vec![i, 0.3 * i], vec![0.3 * i, 2.0 * i]]).expect("square")).expect("in H_2")
}

/// `(level, Omega)` pairs of the quasi-periodicity suite.
fn numeric_configs() -> Vec<(LevelMatrix, PeriodMatrix)> {
    let mut out: Vec<_> = desk_levels().into_iter().map(|l| (l, PeriodMatrix::identity_i(1))).collect();
    out.push((desk_levels()[0].clone(), desk_omega_genus_two()));
    out
}

/// `(level, Omega)` pairs of the shift suite: `[[2]]` and `[[2,1],[1,2]]`
/// at `Omega = i`.
fn shift_configs() -> Vec<(LevelMatrix, PeriodMatrix)> {
    let levels = desk_levels();
    [&levels[0], &levels[2]].into_iter().map(|l| (l.clone(), PeriodMatrix::identity_i(1))).collect()
}

pub fn run(suite: Suite, opts: &VerifyOptions) -> Result<VerifyReport> {
    if let Some(t) = opts.tol {
        if !(t > 0.0) {
            return Err(Error::Malformed(format!("tolerance {t} must be positive")));
        }
    }
    let mut suites = Vec::new();
    for s in suite.expand() {
        suites.push(match s {
            Suite::Quasiperiodicity => quasi_periodicity(opts)?,
            Suite::Shift => shift(opts)?,
            Suite::Commutators => commutators()?,
            Suite::Kernel => kernel(opts)?,
            Suite::Roundtrip => round_trip(opts)?,
            Suite::Theorem3 => theorem3(opts)?,
            Suite::All => unreachable!("expanded above"),
        });
    }
    Ok(VerifyReport {
        seed: opts.seed,
        passed: suites.iter().all(|s| s.passed),
        suites,
    })
}

fn random_complex_matrix(rng: &mut impl Rng, h: usize, g: usize) -> ComplexMatrix {
    let entries = (0..h * g)
        .map(|_| Complex64::new(rng.random_range(-SAMPLE_BOX..=SAMPLE_BOX), rng.random_range(-SAMPLE_BOX..=SAMPLE_BOX)))
        .collect();
    ComplexMatrix::new(h, g, entries).expect("shape matches")
}

fn random_int_matrix(rng: &mut impl Rng, h: usize, g: usize) -> IntMatrix {
    IntMatrix::new(h, g, (0..h * g).map(|_| rng.random_range(-1..=1)).collect()).expect("shape matches")
}

/// Bound on `|Im W|` and `|Z|` entries after a shift by `xi` with entries in
/// `{-1, 0, 1}`.
fn shifted_box(omega: &PeriodMatrix) -> f64 {
    let g = omega.g();
    let row = (0..g)
        .map(|a| (0..g).map(|b| omega.get(a, b).norm()).sum::<f64>())
        .fold(1.0, f64::max);
    SAMPLE_BOX + g as f64 * row
}

struct Tally {
    cases: usize,
    failures: usize,
    max_residual: f64,
    failing_case: Option<Value>,
}

impl Tally {
    fn new() -> Self {
        Tally {
            cases: 0,
            failures: 0,
            max_residual: 0.0,
            failing_case: None,
        }
    }

    fn record(&mut self, residual: f64, ok: bool, case: impl FnOnce() -> Value) {
        self.cases += 1;
        self.max_residual = self.max_residual.max(residual);
        if !ok {
            self.failures += 1;
            if self.failing_case.is_none() {
                self.failing_case = Some(case());
            }
        }
    }

    fn finish(self, suite: Suite, tol: f64, configurations: Vec<ConfigReport>, details: Vec<Value>) -> SuiteReport {
        SuiteReport {
            suite,
            passed: self.failures == 0,
            tol,
            cases: self.cases,
            failures: self.failures,
            max_residual: self.max_residual,
            configurations,
            details,
            failing_case: self.failing_case,
        }
    }
}

/// Joint shift law for random `J` with `|J| <= 2`, measured in the
/// unshifted frame and allowing the summed tail bounds.
fn quasi_periodicity(opts: &VerifyOptions) -> Result<SuiteReport> {
    let tol = opts.tol.unwrap_or(DEFAULT_QUASI_PERIOD_TOL);
    let mut tally = Tally::new();
    let mut configs = Vec::new();
    for (ci, (level, omega)) in numeric_configs().into_iter().enumerate() {
        let (h, g) = (level.h(), omega.g());
        let chars = enumerate_characteristics(&level, g)?;
        let js = MultiIndex::all_up_to(h, g, 2);
        let radius = choose_radius(&level, &omega, shifted_box(&omega), SUITE_TAIL_TOL, 2)?;
        let cfg = TruncationConfig::new(radius, SUITE_TAIL_TOL)?;
        let mut worst = 0.0_f64;
        for case in 0..QUASI_PERIOD_CASES {
            let mut rng = counter_rng(opts.seed, QUASI_STREAM + ((ci as u64) << 20) + case as u64);
            let chr = chars.choose(&mut rng).expect("nonempty");
            let j = js.choose(&mut rng).expect("nonempty");
            let z = random_complex_matrix(&mut rng, h, g);
            let w = random_complex_matrix(&mut rng, h, g);
            let xi = random_int_matrix(&mut rng, h, g);
            let eta = random_int_matrix(&mut rng, h, g);
            let r = quasi_period_residual(&level, j, chr, &omega, &z, &w, &xi, &eta, &cfg)?;
            worst = worst.max(r.scaled);
            tally.record(r.scaled, r.scaled <= tol + r.tail_allowance, || {
                json!({"level": level, "omega": omega.omega(), "j": j, "char_index": chr.index(),
                       "z": z, "w": w, "xi": xi, "eta": eta, "residual": r})
            });
        }
        configs.push(ConfigReport {
            level,
            g: omega.g(),
            omega: Some(omega.omega().clone()),
            cases: QUASI_PERIOD_CASES,
            max_residual: worst,
        });
    }
    Ok(tally.finish(Suite::Quasiperiodicity, tol, configs, Vec::new()))
}

/// `theta~_{J+eps_ka}` against `2 pi i (M Z)_ka theta~_J + d/dW_ka theta~_J`.
fn shift(opts: &VerifyOptions) -> Result<SuiteReport> {
    let tol = opts.tol.unwrap_or(DEFAULT_SHIFT_TOL);
    let mut tally = Tally::new();
    let mut configs = Vec::new();
    for (ci, (level, omega)) in shift_configs().into_iter().enumerate() {
        let (h, g) = (level.h(), omega.g());
        let chars = enumerate_characteristics(&level, g)?;
        let js = MultiIndex::all_up_to(h, g, 2);
        let radius = choose_radius(&level, &omega, SAMPLE_BOX + 1e-3, SUITE_TAIL_TOL, 3)?;
        let cfg = TruncationConfig::new(radius, SUITE_TAIL_TOL)?;
        let mut worst = 0.0_f64;
        for case in 0..SHIFT_CASES {
            let mut rng = counter_rng(opts.seed, SHIFT_STREAM + ((ci as u64) << 20) + case as u64);
            let chr = chars.choose(&mut rng).expect("nonempty");
            let j = js.choose(&mut rng).expect("nonempty");
            let z = random_complex_matrix(&mut rng, h, g);
            let w = random_complex_matrix(&mut rng, h, g);
            let (k, a) = (rng.random_range(0..h), rng.random_range(0..g));
            let r = shift_operator_check(&level, j, chr, &omega, &z, &w, k, a, &cfg)?;
            worst = worst.max(r);
            tally.record(r, r <= tol, || {
                json!({"level": level, "omega": omega.omega(), "j": j, "char_index": chr.index(),
                       "z": z, "w": w, "k": k, "a": a, "residual": r})
            });
        }
        configs.push(ConfigReport {
            level,
            g: omega.g(),
            omega: Some(omega.omega().clone()),
            cases: SHIFT_CASES,
            max_residual: worst,
        });
    }
    Ok(tally.finish(Suite::Shift, tol, configs, Vec::new()))
}

/// Expected value of `[op1, op2] s`: `delta_ab E_mn s` for `[D_ma, Delta_nb]`,
/// its negative for the reversed pair, zero otherwise.
fn expected_bracket(op1: Operator, op2: Operator, x: &ExactElement) -> Result<ExactElement> {
    Ok(match (op1, op2) {
        (Operator::D { m, a }, Operator::Delta { n, b }) if a == b => apply(Operator::E { k: m, l: n }, x)?,
        (Operator::Delta { n, b }, Operator::D { m, a }) if a == b => -apply(Operator::E { k: m, l: n }, x)?,
        _ => ExactElement::zero(),
    })
}

/// Every bracket of every operator pair on every symbol with
/// `|J| <= 3`, for genus 1 and 2, in exact integer arithmetic.
fn commutators() -> Result<SuiteReport> {
    let mut tally = Tally::new();
    let mut configs = Vec::new();
    for level in desk_levels() {
        for g in 1..=2 {
            let h = level.h();
            let ops = Operator::all(h, g);
            let js = MultiIndex::all_up_to(h, g, COMMUTATOR_MAX_DEGREE);
            let mut cases = 0;
            for idx in 0..level.characteristic_count(g) {
                for j in &js {
                    let s = ExactElement::from_symbol(BasisSymbol::new(level.clone(), j.clone(), idx)?);
                    for &op1 in &ops {
                        for &op2 in &ops {
                            let got = commutator(op1, op2, &s)?;
                            let want = expected_bracket(op1, op2, &s)?;
                            let ok = got == want;
                            cases += 1;
                            tally.record(if ok { 0.0 } else { 1.0 }, ok, || {
                                json!({"level": level, "g": g, "j": j, "char_index": idx,
                                       "op1": op1.to_string(), "op2": op2.to_string(),
                                       "got": got.to_complex(), "expected": want.to_complex()})
                            });
                        }
                    }
                }
            }
            configs.push(ConfigReport {
                level: level.clone(),
                g,
                omega: None,
                cases,
                max_residual: 0.0,
            });
        }
    }
    Ok(tally.finish(Suite::Commutators, 0.0, configs, Vec::new()))
}

/// Random element mixing the desk levels, with `J = 0` terms favoured so
/// both classes occur.
fn random_exact_element(rng: &mut impl Rng, g: usize) -> Result<ExactElement> {
    let levels = desk_levels();
    let mut x = ExactElement::zero();
    let level = levels.choose(rng).expect("nonempty");
    let h = level.h();
    let degree_zero = rng.random_bool(0.5);
    let js = MultiIndex::all_up_to(h, g, if degree_zero { 0 } else { 2 });
    for _ in 0..rng.random_range(1..=4) {
        let j = js.choose(rng).expect("nonempty").clone();
        let idx = rng.random_range(0..level.characteristic_count(g));
        let c = Complex::new(rng.random_range(-5..=5), rng.random_range(-5..=5));
        x.add_term(BasisSymbol::new(level.clone(), j, idx)?, c);
    }
    if rng.random_bool(0.3) {
        // A second graded piece of the same shape.
        for other in levels.iter().filter(|l| l.h() == h && *l != level) {
            let idx = rng.random_range(0..other.characteristic_count(g));
            x.add_term(BasisSymbol::theta(other.clone(), g, idx)?, Complex::new(rng.random_range(1..=3), 0));
        }
    }
    Ok(x)
}

/// Three independent classifications of random elements must agree.
fn kernel(opts: &VerifyOptions) -> Result<SuiteReport> {
    let mut tally = Tally::new();
    let mut in_kernel = 0;
    for case in 0..KERNEL_CASES {
        let mut rng = counter_rng(opts.seed, KERNEL_STREAM + case as u64);
        let g = rng.random_range(1..=2);
        let x = random_exact_element(&mut rng, g)?;
        let structural = x.terms().all(|(s, _)| s.j.is_zero());
        let (h, _) = x.shapes().into_iter().next().unwrap_or((1, g));
        let mut annihilated = true;
        for m in 0..h {
            for a in 0..g {
                annihilated &= apply(Operator::D { m, a }, &x)?.is_empty();
            }
        }
        let classified = in_theta_subalgebra(&x);
        in_kernel += usize::from(classified);
        let ok = structural == annihilated && annihilated == classified;
        tally.record(if ok { 0.0 } else { 1.0 }, ok, || {
            json!({"element": x.to_complex(), "structural": structural,
                   "annihilated": annihilated, "classified": classified})
        });
    }
    let details = vec![json!({"in_kernel": in_kernel, "outside_kernel": KERNEL_CASES - in_kernel})];
    Ok(tally.finish(Suite::Kernel, 0.0, Vec::new(), details))
}

/// Random elements of level `[[2]]` with `|J| <= 2` are evaluated and fitted
/// back; coefficients must agree to [`UNIQUENESS_TOL`] and the holdout
/// residual must meet the fit tolerance.
fn round_trip(opts: &VerifyOptions) -> Result<SuiteReport> {
    let tol = opts.tol.unwrap_or(UNIQUENESS_TOL);
    let level = desk_levels()[0].clone();
    let omega = PeriodMatrix::identity_i(1);
    let js = MultiIndex::all_up_to(1, 1, 2);
    let mut tally = Tally::new();
    let mut worst_residual = 0.0_f64;
    for case in 0..ROUND_TRIP_CASES {
        let mut rng = counter_rng(opts.seed, ROUND_TRIP_STREAM + case as u64);
        let mut x = AlgebraElement::zero();
        for j in &js {
            for idx in 0..level.characteristic_count(1) {
                if rng.random_bool(0.7) {
                    let c = Complex64::new(rng.random_range(-1.0..=1.0), rng.random_range(-1.0..=1.0));
                    x.add_term(BasisSymbol::new(level.clone(), j.clone(), idx)?, c);
                }
            }
        }
        let cfg = FitConfig::with_seed(opts.seed.wrapping_add(case as u64));
        let mut ev = ElementEvaluator::certified(&omega, cfg.tail_tol);
        match fit_in_basis(|z, w| Ok(ev.element(&x, z, w)?.value), &level, 2, &omega, &cfg) {
            Ok(d) => {
                let err = d.element.max_coeff_diff(&x);
                worst_residual = worst_residual.max(d.residual);
                tally.record(err, err <= tol, || json!({"element": x, "fitted": d.element, "error": err}));
            }
            Err(e) => tally.record(f64::INFINITY, false, || json!({"element": x, "error": e.to_string()})),
        }
    }
    let details = vec![json!({"max_holdout_residual": worst_residual})];
    Ok(tally.finish(Suite::Roundtrip, tol, Vec::new(), details))
}

/// The fixed expression set of the correspondence check.
pub fn theorem3_expressions() -> Vec<(&'static str, DiffPolyExpr, PeriodMatrix)> {
    let levels = desk_levels();
    let (two, mixed) = (&levels[0], &levels[2]);
    let om1 = PeriodMatrix::identity_i(1);
    let d = |l: &LevelMatrix, j: Vec<Vec<i64>>, idx: usize| {
        DiffPolyExpr::deriv(BasisSymbol::new(l.clone(), MultiIndex::from_rows(&j).expect("valid"), idx).expect("valid"))
    };
    let theta = |idx| d(two, vec![vec![0]], idx);
    let wronskian = DiffPolyExpr::difference(
        DiffPolyExpr::product(vec![theta(0), d(two, vec![vec![2]], 0)]),
        DiffPolyExpr::product(vec![d(two, vec![vec![1]], 0), d(two, vec![vec![1]], 0)]),
    );
    let cross = DiffPolyExpr::product(vec![theta(1), d(two, vec![vec![1]], 0)]);
    vec![
        ("theta", theta(0), om1.clone()),
        ("derivative", d(two, vec![vec![1]], 0), om1.clone()),
        ("theta_squared", DiffPolyExpr::product(vec![theta(0), theta(0)]), om1.clone()),
        ("theta_product", DiffPolyExpr::product(vec![theta(0), theta(1)]), om1.clone()),
        ("wronskian", wronskian, om1.clone()),
        ("syntactic_zero", DiffPolyExpr::difference(cross.clone(), cross), om1.clone()),
        (
            "mixed_product",
            DiffPolyExpr::product(vec![d(mixed, vec![vec![0], vec![0]], 0), d(mixed, vec![vec![1], vec![0]], 2)]),
            om1,
        ),
    ]
}

/// Decomposes each expression twice with different seeds and checks the
/// correspondence and coefficient agreement.
fn theorem3(opts: &VerifyOptions) -> Result<SuiteReport> {
    let tol = opts.tol.unwrap_or(DEFAULT_THEOREM3_TOL);
    let mut tally = Tally::new();
    let mut details = Vec::new();
    for (name, expr, omega) in theorem3_expressions() {
        let cfg = FitConfig::with_seed(opts.seed);
        let alt = FitConfig::with_seed(opts.seed.wrapping_add(1));
        let outcome = diff_poly_decompose(&expr, &omega, &cfg)
            .and_then(|d| diff_poly_decompose(&expr, &omega, &alt).map(|d2| (d, d2)));
        let (d, d2) = match outcome {
            Ok(v) => v,
            Err(e) => {
                tally.record(f64::INFINITY, false, || json!({"expression": name, "error": e.to_string()}));
                continue;
            }
        };
        let report = verify_theorem3(&expr, &d, &omega, &cfg);
        let seed_diff = d.element.max_coeff_diff(&d2.element);
        let empty_ok = name != "syntactic_zero" || d.element.is_empty();
        let ok = report.passed && report.max_residual <= tol && seed_diff <= UNIQUENESS_TOL && empty_ok;
        let entry = json!({
            "expression": name,
            "terms": d.element.len(),
            "fit_residual": d.residual,
            "fd_residual": d.fd_residual,
            "conditioning": d.conditioning,
            "seed_difference": seed_diff,
            "report": report,
        });
        tally.record(report.max_residual, ok, || {
            json!({"expression": expr, "element": d.element, "details": entry})
        });
        details.push(entry);
    }
    Ok(tally.finish(Suite::Theorem3, tol, Vec::new(), details))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suite_names_round_trip() {
        for n in Suite::NAMES {
            assert_eq!(n.parse::<Suite>().unwrap().to_string(), n);
        }
        assert!("nope".parse::<Suite>().is_err());
    }

    #[test]
    fn commutators_pass() {
        let r = run(Suite::Commutators, &VerifyOptions::default()).unwrap();
        assert!(r.passed, "{:?}", r.suites[0].failing_case);
        assert!(r.suites[0].cases > 10_000);
    }

    #[test]
    fn kernel_suite_sees_both_classes() {
        let r = run(Suite::Kernel, &VerifyOptions::default()).unwrap();
        assert!(r.passed);
        let d = &r.suites[0].details[0];
        assert!(d["in_kernel"].as_u64().unwrap() > 20);
        assert!(d["outside_kernel"].as_u64().unwrap() > 20);
    }

    #[test]
    fn bad_tolerance_is_rejected() {
        let opts = VerifyOptions { seed: 0, tol: Some(-1.0) };
        assert!(run(Suite::Shift, &opts).is_err());
    }
}
