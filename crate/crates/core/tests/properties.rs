mod common;

use std::collections::HashSet;

use bernoulli_core::algebraic::{classify, AlgebraicNumber};
use bernoulli_core::measure::{branching_growth, measure_bounds, net_level, CylinderIndex};
use bernoulli_core::powersum::{distinct_counts, enumerate_level, gap_series, DigitAlphabet};
use bernoulli_core::spectra::{power_traces, trace_residual_report, unit_circle_partial_sums};
use bernoulli_core::{FieldElem, Settings};
use common::TEST_NUMBERS;
use num_bigint::BigInt;
use num_traits::ToPrimitive;
use proptest::prelude::*;

fn num(text: &str) -> AlgebraicNumber {
    AlgebraicNumber::parse(text, &Settings::default()).unwrap()
}

fn test_number() -> impl Strategy<Value = &'static str> {
    prop::sample::select(TEST_NUMBERS.iter().map(|t| t.1).collect::<Vec<_>>())
}

fn alphabet() -> impl Strategy<Value = DigitAlphabet> {
    prop_oneof![Just(DigitAlphabet::Binary), Just(DigitAlphabet::Signed)]
}

fn level_fingerprint(a: &AlgebraicNumber, n: usize, alphabet: DigitAlphabet) -> Vec<(Vec<i64>, u64, Vec<i64>)> {
    let l = enumerate_level(a, n, alphabet).unwrap();
    (0..l.len()).map(|i| (l.key(i).to_vec(), l.multiplicity(i), l.witness(i))).collect()
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 24, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn subadditive_counts(p in test_number(), n in 1usize..=8, k in 1usize..=8) {
        let c = distinct_counts(&num(p), n + k, DigitAlphabet::Binary).unwrap();
        prop_assert!(c[n + k] <= c[n] * c[k]);
    }

    #[test]
    fn levels_are_nested(p in test_number(), n in 0usize..=7, alphabet in alphabet()) {
        let a = num(p);
        let small = enumerate_level(&a, n, alphabet).unwrap();
        let big = enumerate_level(&a, n + 1, alphabet).unwrap();
        let have: HashSet<FieldElem> = (0..big.len()).map(|i| big.residue(i)).collect();
        for i in 0..small.len() {
            prop_assert!(have.contains(&small.residue(i)));
        }
        prop_assert_eq!(small.total_multiplicity() * alphabet.size() as u128, big.total_multiplicity());
    }

    #[test]
    fn sorted_enclosures_are_disjoint(p in test_number(), n in 1usize..=9, alphabet in alphabet()) {
        let level = enumerate_level(&num(p), n.min(if alphabet == DigitAlphabet::Signed { 7 } else { 9 }), alphabet).unwrap();
        for w in level.values().windows(2) {
            prop_assert!(w[0].hi_scaled() < w[1].lo_scaled() || w[0].prec() != w[1].prec());
            prop_assert_eq!(w[0].cmp_certified(&w[1]), Some(std::cmp::Ordering::Less));
        }
    }

    #[test]
    fn level_sets_ignore_thread_count(p in test_number(), n in 1usize..=10, threads in 2usize..=8) {
        let a = num(p);
        let one = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let many = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
        let x = one.install(|| level_fingerprint(&a, n, DigitAlphabet::Binary));
        let y = many.install(|| level_fingerprint(&a, n, DigitAlphabet::Binary));
        prop_assert_eq!(x, y);
    }

    #[test]
    fn non_integer_sums_are_distinct(q in 2i64..=9, n in 1usize..=12) {
        // p/q ∈ (1, 2) with gcd(p, q) = 1
        let p = (q + 1..2 * q).find(|p| num_integer::gcd(*p, q) == 1).unwrap();
        let a = num(&format!("{q}x - {p}"));
        let level = enumerate_level(&a, n, DigitAlphabet::Binary).unwrap();
        prop_assert_eq!(level.len(), 1 << n);
        prop_assert!(level.multiplicities().iter().all(|&m| m == 1));
    }

    #[test]
    fn bounds_tighten_with_depth(p in test_number(), n in 2usize..=4, i in 0usize..64, m in 6usize..=10) {
        let a = num(p);
        let net = net_level(&a, n).unwrap();
        let i = i % (net.len() - 1);
        let (l, r) = (net.point(&a, i), net.point(&a, i + 1));
        let coarse = measure_bounds(&a, &l, &r, m).unwrap();
        let fine = measure_bounds(&a, &l, &r, m + 1).unwrap();
        prop_assert!(fine.lower_count >= 2 * coarse.lower_count);
        prop_assert!(fine.upper_count <= 2 * coarse.upper_count);
        prop_assert!(coarse.lower_count <= coarse.upper_count);
        // J ⊆ J' = [l, next-next point or r]
        let r2 = net.point(&a, (i + 2).min(net.len() - 1));
        let outer = measure_bounds(&a, &l, &r2, m).unwrap();
        prop_assert!(outer.lower_count >= coarse.lower_count && outer.upper_count >= coarse.upper_count);
    }

    #[test]
    fn gap_partition_brackets_full_mass(p in test_number(), n in 1usize..=5) {
        let a = num(p);
        let net = net_level(&a, n).unwrap();
        let index = CylinderIndex::new(&a, n + 8).unwrap();
        // the gaps cover [0, x_max]; the support ends at T
        let mut cuts: Vec<FieldElem> = (0..net.len()).map(|i| net.point(&a, i)).collect();
        cuts.push(a.field().support_constant());
        let (mut lower, mut upper) = (0u64, 0u64);
        for w in cuts.windows(2) {
            let b = index.bounds(&w[0], &w[1]).unwrap();
            lower += b.lower_count;
            upper += b.upper_count;
        }
        let total = 1u64 << index.depth();
        prop_assert!(lower <= total && total <= upper);
    }

    #[test]
    fn seeded_reports_repeat(p in test_number(), seed in any::<u64>()) {
        let a = num(p);
        let one = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let x = one.install(|| branching_growth(&a, 3, 16, 6, seed).unwrap());
        let y = branching_growth(&a, 3, 16, 6, seed).unwrap();
        prop_assert_eq!(x.mean_growth, y.mean_growth);
    }
}

#[test]
fn signed_gaps_never_grow() {
    for (name, p) in TEST_NUMBERS {
        let g = gap_series(&num(p), 7).unwrap();
        assert!(g.nonincreasing, "{name}");
    }
}

#[test]
fn conjugates_satisfy_vieta() {
    for (name, p) in TEST_NUMBERS {
        let a = num(p);
        let poly = a.minpoly();
        let d = poly.degree();
        let sum: f64 = a.conjugates().iter().map(|r| r.center_f64().re).sum();
        let radii: f64 = a.conjugates().iter().map(|r| r.radius_f64()).sum();
        let want = -poly.coeff(d - 1).to_f64().unwrap() / poly.leading().to_f64().unwrap();
        assert_eq!(a.conjugates().len(), d, "{name}");
        assert!((sum - want).abs() <= radii + 1e-12, "{name}");
    }
}

#[test]
fn classification_is_stable_under_more_precision() {
    for (name, p) in TEST_NUMBERS {
        let base = classify(&num(p)).unwrap();
        let settings = Settings { precision_bits: 256, ..Settings::default() };
        let fine = classify(&AlgebraicNumber::parse(p, &settings).unwrap()).unwrap();
        let flags = |c: &bernoulli_core::ClassificationReport| {
            [c.is_algebraic_integer, c.is_unit, c.is_pisot, c.is_salem, c.is_perron, c.is_garsia, c.has_minus_theta_conjugate]
        };
        assert_eq!(flags(&base), flags(&fine), "{name}");
        assert!(!(base.is_pisot && base.is_salem), "{name}");
        if base.is_salem {
            assert!((base.mahler.value - num(p).theta_f64()).abs() <= base.mahler.err + 1e-12);
        }
        if base.is_garsia {
            assert!(base.mahler.contains(2.0), "{name}");
        }
    }
}

#[test]
fn reciprocity_is_palindromic() {
    for (_, p) in TEST_NUMBERS {
        let poly = bernoulli_core::parse_polynomial(p).unwrap();
        let c = poly.coeffs();
        let rev: Vec<BigInt> = c.iter().rev().cloned().collect();
        assert_eq!(poly.is_reciprocal(), c == rev, "{p}");
    }
}

#[test]
fn traces_match_conjugate_powers() {
    for (name, p) in TEST_NUMBERS {
        let a = num(p);
        if !a.minpoly().is_monic() {
            continue;
        }
        let t = power_traces(a.minpoly(), 50, 1000).unwrap();
        let roots = a.conjugates_at(400).unwrap();
        for n in 1..=50 {
            let mut re = bernoulli_core::Interval::zero(roots[0].prec());
            for r in &roots {
                let z = r.to_complex_interval();
                let mut zp = bernoulli_core::ComplexInterval::one(z.prec());
                for _ in 0..n {
                    zp = zp.mul(&z);
                }
                re = re.add(&zp.re);
            }
            let tn = bernoulli_core::Interval::from_int(&t[n - 1], re.prec());
            assert!(re.overlaps(&tn), "{name} n={n}");
        }
        // t_n satisfies the minimal-polynomial recurrence exactly
        let d = a.degree();
        let asc = a.minpoly().ascending();
        for n in d + 1..=50 {
            let s: BigInt = (0..d).map(|i| &asc[i] * &t[n - d + i - 1]).sum();
            assert_eq!(-s, t[n - 1], "{name} n={n}");
        }
    }
}

#[test]
fn pisot_residuals_decay() {
    for p in ["x^2-x-1", "x^3-x-1"] {
        let r = trace_residual_report(&num(p), 200).unwrap();
        let r1 = r.rows[0].r_n.value.abs();
        let tail = r.rows[19..].iter().map(|x| x.r_n.value.abs()).fold(0.0, f64::max);
        assert!(tail < r1, "{p}");
    }
}

#[test]
fn salem_partial_sums_are_bounded() {
    let a = num(TEST_NUMBERS[2].1);
    let short = unit_circle_partial_sums(&a, 250).unwrap();
    let long = unit_circle_partial_sums(&a, 500).unwrap();
    for (s, l) in short.series.iter().zip(&long.series) {
        for w in l.sums.windows(2).zip(l.errors.windows(2)) {
            assert!((w.0[1] - w.0[0]).abs() <= 1.0 + w.1[0] + w.1[1]);
        }
        assert!(l.sup_abs <= s.bound + 1e-9 && l.sup_abs < 2.0 * s.sup_abs.max(1.0));
    }
    // conjugate pairs share real parts
    for s in &long.series {
        let partner = long.series.iter().find(|o| (o.arg + s.arg).abs() < 1e-12).unwrap();
        for (x, y) in s.sums.iter().zip(&partner.sums) {
            assert!((x - y).abs() < 1e-9);
        }
    }
}
