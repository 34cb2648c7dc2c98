use bernoulli_core::algebraic::{classify, AlgebraicNumber};
use bernoulli_core::measure::{branching_count, local_dimension_profile, sample_digits, CylinderIndex};
use bernoulli_core::powersum::{distinct_counts, enumerate_level, gap_series, DigitAlphabet};
use bernoulli_core::spectra::trace_residual_report;
use bernoulli_core::Settings;
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

const GOLDEN: &str = "x^2-x-1";
const LEHMER: &str = "x^10+x^9-x^7-x^6-x^5-x^4-x^3+x+1";

fn num(text: &str) -> AlgebraicNumber {
    AlgebraicNumber::parse(text, &Settings::default()).unwrap()
}

fn levels(c: &mut Criterion) {
    let mut g = c.benchmark_group("levels");
    g.sample_size(10);
    for (name, p) in [("golden", GOLDEN), ("lehmer", LEHMER), ("three_halves", "2x-3")] {
        let a = num(p);
        g.bench_with_input(BenchmarkId::new("distinct_counts_16", name), &a, |b, a| {
            b.iter(|| distinct_counts(a, 16, DigitAlphabet::Binary).unwrap())
        });
        g.bench_with_input(BenchmarkId::new("sorted_level_14", name), &a, |b, a| {
            b.iter(|| enumerate_level(a, 14, DigitAlphabet::Binary).unwrap())
        });
    }
    let a = num(GOLDEN);
    g.bench_function("gap_series_10/golden", |b| b.iter(|| gap_series(&a, 10).unwrap()));
    g.finish();
}

fn measure(c: &mut Criterion) {
    let mut g = c.benchmark_group("measure");
    g.sample_size(10);
    let a = num(GOLDEN);
    g.bench_function("cylinder_index_16/golden", |b| b.iter(|| CylinderIndex::new(&a, 16).unwrap()));
    g.bench_function("local_dimension_6_16/golden", |b| b.iter(|| local_dimension_profile(&a, 6, 16).unwrap()));
    let x = sample_digits(0, 0, 28);
    g.bench_function("branching_20/golden", |b| b.iter(|| branching_count(&a, &x, 20).unwrap()));
    g.finish();
}

fn algebra(c: &mut Criterion) {
    let mut g = c.benchmark_group("algebra");
    g.bench_function("classify/lehmer", |b| b.iter(|| classify(&num(LEHMER)).unwrap()));
    let a = num(LEHMER);
    g.sample_size(10);
    g.bench_function("traces_500/lehmer", |b| b.iter(|| trace_residual_report(&a, 500).unwrap()));
    g.finish();
}

criterion_group!(benches, levels, measure, algebra);
criterion_main!(benches);
