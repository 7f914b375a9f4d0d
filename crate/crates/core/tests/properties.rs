use num_complex::Complex;
use proptest::prelude::*;
use theta_core::algebra::{apply, commutator, in_theta_subalgebra};
use theta_core::*;

fn desk_levels() -> Vec<LevelMatrix> {
    theta_core::verify::desk_levels()
}

fn int_matrix(n: usize) -> impl Strategy<Value = IntMatrix> {
    prop::collection::vec(-6i64..=6, n * n).prop_map(move |e| IntMatrix::new(n, n, e).unwrap())
}

/// Admissible 2x2 levels `[[2a, b], [b, 2c]]`.
fn level2x2() -> impl Strategy<Value = LevelMatrix> {
    (1i64..=3, prop_oneof![-3i64..=-1, 1i64..=3], 1i64..=3)
        .prop_filter("positive definite", |(a, b, c)| 4 * a * c > b * b)
        .prop_map(|(a, b, c)| LevelMatrix::from_rows(&[vec![2 * a, b], vec![b, 2 * c]]).unwrap())
}

fn symbol(g: usize) -> impl Strategy<Value = BasisSymbol> {
    (0..3usize, prop::collection::vec(0u32..=2, 4), any::<prop::sample::Index>()).prop_map(move |(li, js, idx)| {
        let level = desk_levels()[li].clone();
        let h = level.h();
        let j = MultiIndex::new(h, g, js[..h * g].to_vec()).unwrap();
        let count = level.characteristic_count(g);
        BasisSymbol::new(level, j, idx.index(count)).unwrap()
    })
}

fn exact_element(g: usize) -> impl Strategy<Value = ExactElement> {
    prop::collection::vec((symbol(g), -4i64..=4, -4i64..=4), 0..6)
        .prop_map(|terms| ExactElement::from_terms(terms.into_iter().map(|(s, re, im)| (s, Complex::new(re, im)))))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn smith_form_reconstructs(m in prop_oneof![int_matrix(2), int_matrix(3)]) {
        prop_assume!(m.determinant().unwrap() != 0);
        let s = smith_normal_form(&m).unwrap();
        prop_assert_eq!(s.u.mul(&m).unwrap().mul(&s.v).unwrap(), s.d.clone());
        prop_assert_eq!(s.u.determinant().unwrap().abs(), 1);
        prop_assert_eq!(s.v.determinant().unwrap().abs(), 1);
        let d = s.diagonal();
        prop_assert!(d.iter().all(|&x| x > 0));
        prop_assert!(d.windows(2).all(|p| p[1] % p[0] == 0));
        prop_assert_eq!(d.iter().map(|&x| x as i128).product::<i128>(), m.determinant().unwrap().abs());
    }

    #[test]
    fn characteristics_are_complete_and_distinct(level in level2x2(), g in 1usize..=2) {
        let chars = enumerate_characteristics(&level, g).unwrap();
        prop_assert_eq!(chars.len(), (level.det() as usize).pow(g as u32));
        for (i, a) in chars.iter().enumerate() {
            prop_assert!(a.integral_image(&level).is_some());
            prop_assert!(a.entries().iter().all(|r| *r >= Rational::from_integer(0) && *r < Rational::from_integer(1)));
            for b in &chars[i + 1..] {
                prop_assert!(!a.congruent(b));
            }
        }
    }

    #[test]
    fn level_validation_matches_definition(a in -3i64..=3, b in -3i64..=3, c in -3i64..=3) {
        let m = IntMatrix::from_rows(&[vec![a, b], vec![b, c]]).unwrap();
        let admissible = a % 2 == 0 && c % 2 == 0 && a != 0 && b != 0 && c != 0 && a > 0 && a * c - b * b > 0;
        prop_assert_eq!(validate_level(&m).is_ok(), admissible);
    }

    #[test]
    fn bump_round_trips(e in prop::collection::vec(0u32..4, 4), k in 0usize..2, a in 0usize..2, d in 0i64..3) {
        let j = MultiIndex::new(2, 2, e).unwrap();
        let up = j.bump(k, a, d).unwrap();
        prop_assert_eq!(up.size(), j.size() + d as u32);
        prop_assert_eq!(up.bump(k, a, -d).unwrap(), j);
    }

    #[test]
    fn binomial_matches_factorials(e in prop::collection::vec(0u32..5, 4), p in prop::collection::vec(0u32..5, 4)) {
        let j = MultiIndex::new(2, 2, e).unwrap();
        let p = MultiIndex::new(2, 2, p).unwrap();
        match j.checked_sub(&p) {
            Some(rest) => prop_assert_eq!(j.binom(&p).unwrap() * p.factorial() * rest.factorial(), j.factorial()),
            None => prop_assert!(j.binom(&p).is_err()),
        }
    }

    #[test]
    fn operators_are_linear(x in exact_element(2), y in exact_element(2), op in 0usize..16) {
        let ops = Operator::all(2, 2);
        let op = ops[op % ops.len()];
        // Only the h = 2 part is in range for every index.
        let keep = |e: &ExactElement| ExactElement::from_terms(e.terms().filter(|(s, _)| s.h() == 2).map(|(s, c)| (s.clone(), *c)));
        let (x, y) = (keep(&x), keep(&y));
        let lhs = apply(op, &(x.clone() + y.clone())).unwrap();
        prop_assert_eq!(lhs, apply(op, &x).unwrap() + apply(op, &y).unwrap());
    }

    #[test]
    fn heisenberg_relations(s in symbol(2), i in 0usize..16, k in 0usize..16) {
        let h = s.h();
        let ops = Operator::all(h, 2);
        let (op1, op2) = (ops[i % ops.len()], ops[k % ops.len()]);
        let x = ExactElement::from_symbol(s);
        let got = commutator(op1, op2, &x).unwrap();
        let want = match (op1, op2) {
            (Operator::D { m, a }, Operator::Delta { n, b }) if a == b => apply(Operator::E { k: m, l: n }, &x).unwrap(),
            (Operator::Delta { n, b }, Operator::D { m, a }) if a == b => -apply(Operator::E { k: m, l: n }, &x).unwrap(),
            _ => ExactElement::zero(),
        };
        prop_assert_eq!(got, want);
    }

    #[test]
    fn ladder_on_theta(li in 0usize..3, m in 0usize..2, n in 0usize..2, a in 0usize..2, b in 0usize..2) {
        let level = desk_levels()[li].clone();
        let h = level.h();
        let (m, n) = (m % h, n % h);
        let s = BasisSymbol::theta(level.clone(), 2, 0).unwrap();
        let x = ExactElement::from_symbol(s);
        let got = commutator(Operator::D { m, a }, Operator::Delta { n, b }, &x).unwrap();
        let want = if a == b { x.scale(&Complex::new(level.get(m, n), 0)) } else { ExactElement::zero() };
        prop_assert_eq!(got, want);
    }

    #[test]
    fn kernel_classifications_agree(x in exact_element(1)) {
        let structural = x.terms().all(|(s, _)| s.j.is_zero());
        let mut annihilated = true;
        for (h, g) in x.shapes() {
            let part = ExactElement::from_terms(x.terms().filter(|(s, _)| s.h() == h).map(|(s, c)| (s.clone(), *c)));
            for m in 0..h {
                for a in 0..g {
                    annihilated &= apply(Operator::D { m, a }, &part).unwrap().is_empty();
                }
            }
        }
        prop_assert_eq!(structural, annihilated);
        prop_assert_eq!(in_theta_subalgebra(&x), structural);
    }

    #[test]
    fn element_json_round_trips(x in exact_element(2)) {
        let y = x.to_complex();
        let s = serde_json::to_string(&y).unwrap();
        let back: AlgebraElement = serde_json::from_str(&s).unwrap();
        prop_assert_eq!(back, y);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn quasi_periodicity_holds(
        li in 0usize..3,
        parts in prop::collection::vec(-0.4f64..=0.4, 8),
        shifts in prop::collection::vec(-1i64..=1, 4),
        jdeg in prop::collection::vec(0u32..=1, 2),
        idx in any::<prop::sample::Index>(),
    ) {
        let level = desk_levels()[li].clone();
        let h = level.h();
        let om = PeriodMatrix::identity_i(1);
        let chars = enumerate_characteristics(&level, 1).unwrap();
        let chr = &chars[idx.index(chars.len())];
        let cm = |o: usize| ComplexMatrix::new(h, 1, (0..h).map(|k| Complex64::new(parts[o + 2 * k], parts[o + 2 * k + 1])).collect()).unwrap();
        let (z, w) = (cm(0), cm(4));
        let xi = IntMatrix::new(h, 1, shifts[..h].to_vec()).unwrap();
        let eta = IntMatrix::new(h, 1, shifts[2..2 + h].to_vec()).unwrap();
        let j = MultiIndex::new(h, 1, jdeg[..h].to_vec()).unwrap();
        let radius = choose_radius(&level, &om, 1.4, 1e-12, 2).unwrap();
        let cfg = TruncationConfig::new(radius, 1e-12).unwrap();
        let r = quasi_period_residual(&level, &j, chr, &om, &z, &w, &xi, &eta, &cfg).unwrap();
        prop_assert!(r.scaled <= 1e-8 + r.tail_allowance, "{:?}", r);
    }
}
