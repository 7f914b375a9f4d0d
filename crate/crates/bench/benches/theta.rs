use criterion::{criterion_group, criterion_main, Criterion};
use num_complex::Complex64;
use std::hint::black_box;
use theta_core::{
    aux_theta_series, enumerate_characteristics, product_expand, theta_series, verify, AlgebraElement, BasisSymbol,
    ComplexMatrix, FitConfig, LevelMatrix, MultiIndex, PeriodMatrix, TruncationConfig,
};

fn evaluation(c: &mut Criterion) {
    let level = LevelMatrix::from_rows(&[vec![2, 1], vec![1, 2]]).unwrap();
    let omega = PeriodMatrix::identity_i(1);
    let chars = enumerate_characteristics(&level, 1).unwrap();
    let cfg = TruncationConfig::new(8, 1e-12).unwrap();
    let z = ComplexMatrix::from_rows(&[vec![Complex64::new(0.2, 0.1)], vec![Complex64::new(-0.1, 0.0)]]).unwrap();
    let w = ComplexMatrix::from_rows(&[vec![Complex64::new(0.1, 0.2)], vec![Complex64::new(0.0, -0.1)]]).unwrap();
    let j = MultiIndex::from_rows(&[vec![1], vec![1]]).unwrap();

    c.bench_function("theta h=2 g=1 radius 8", |b| {
        b.iter(|| theta_series(&level, &chars[1], &omega, black_box(&w), &cfg).unwrap())
    });
    c.bench_function("aux theta |J|=2 h=2 g=1 radius 8", |b| {
        b.iter(|| aux_theta_series(&level, &j, &chars[1], &omega, black_box(&z), black_box(&w), &cfg).unwrap())
    });
}

fn products(c: &mut Criterion) {
    let level = LevelMatrix::from_rows(&[vec![2]]).unwrap();
    let omega = PeriodMatrix::identity_i(1);
    let sym = |j: i64, a: usize| BasisSymbol::new(level.clone(), MultiIndex::from_rows(&[vec![j]]).unwrap(), a).unwrap();
    let one = Complex64::new(1.0, 0.0);
    let x = AlgebraElement::from_terms([(sym(1, 0), one), (sym(0, 1), one)]);
    let y = AlgebraElement::from_terms([(sym(0, 0), one)]);
    let cfg = FitConfig::default();

    let mut group = c.benchmark_group("decomposition");
    group.sample_size(10);
    group.bench_function("product_expand level 2 x level 2", |b| {
        b.iter(|| product_expand(black_box(&x), &y, &omega, &cfg).unwrap())
    });
    group.bench_function("verify commutators", |b| {
        b.iter(|| verify::run(verify::Suite::Commutators, &verify::VerifyOptions::default()).unwrap())
    });
    group.finish();
}

criterion_group!(benches, evaluation, products);
criterion_main!(benches);
