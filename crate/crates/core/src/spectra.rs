//! Traces `tr(θ^n)`, dominant-conjugate sums and unit-circle partial sums.

use num_bigint::BigInt;
use num_traits::{ToPrimitive, Zero};
use serde::Serialize;

use crate::algebraic::{classify, AlgebraicNumber, ModulusClass};
use crate::error::{Error, Result};
use crate::interval::{ComplexInterval, Enclosed, Interval};
use crate::poly::IntPolynomial;
use crate::powersum::least_squares_slope;

/// `t_n = tr(θ^n)` for `n = 1..=N` by Newton's identities.
pub fn power_traces(p: &IntPolynomial, big_n: usize, cap: usize) -> Result<Vec<BigInt>> {
    if !p.is_monic() {
        return Err(Error::NotMonic);
    }
    if big_n > cap {
        return Err(Error::InvalidArgument(format!("N = {big_n} exceeds the trace cap {cap}")));
    }
    let d = p.degree();
    // p = x^d + e_1 x^{d−1} + … + e_d
    let e: Vec<BigInt> = (0..=d).map(|i| p.coeff(d - i)).collect();
    let mut t: Vec<BigInt> = vec![BigInt::zero(); big_n + 1];
    for k in 1..=big_n {
        let mut s = if k <= d { BigInt::from(k) * &e[k] } else { BigInt::zero() };
        for i in 1..k.min(d + 1) {
            s += &e[i] * &t[k - i];
        }
        t[k] = -s;
    }
    t.remove(0);
    Ok(t)
}

/// Bits needed to keep `Σ|θ_j|^n` accurate to well below 1 for `n ≤ N`.
fn trace_bits(a: &AlgebraicNumber, big_n: usize) -> u32 {
    let m = a.mahler().hi().max(1.0);
    a.settings().precision_bits + (big_n as f64 * m.log2()).ceil() as u32 + 2 * big_n.ilog2().max(1) + 64
}

/// `Σ_{|θ_j|>1} |θ_j|^n` and `Σ_{|θ_j|>1} Re θ_j^n` for `n = 1..=N`.
fn dominant_sums(a: &AlgebraicNumber, big_n: usize) -> Result<(Vec<Interval>, Vec<Interval>)> {
    let bits = trace_bits(a, big_n);
    let roots = a.conjugates_at(bits)?;
    let prec = roots[0].prec();
    let mut moduli = vec![Interval::zero(prec); big_n];
    let mut reals = vec![Interval::zero(prec); big_n];
    for (r, c) in roots.iter().zip(a.modulus_classes()) {
        if *c != ModulusClass::Outside {
            continue;
        }
        let m = r.modulus();
        let z = r.to_complex_interval();
        let (mut mp, mut zp) = (Interval::one(prec), ComplexInterval::one(prec));
        for n in 0..big_n {
            mp = mp.mul(&m);
            zp = zp.mul(&z);
            moduli[n] = moduli[n].add(&mp);
            reals[n] = reals[n].add(&zp.re);
        }
    }
    Ok((moduli, reals))
}

pub fn dominant_part(a: &AlgebraicNumber, big_n: usize) -> Result<Vec<Enclosed>> {
    Ok(dominant_sums(a, big_n)?.0.iter().map(Enclosed::from).collect())
}

fn serialize_bigint<S: serde::Serializer>(v: &BigInt, s: S) -> std::result::Result<S::Ok, S::Error> {
    match v.to_i64() {
        Some(x) => s.serialize_i64(x),
        None => s.serialize_str(&v.to_string()),
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ResidualRow {
    pub n: usize,
    #[serde(serialize_with = "serialize_bigint")]
    pub t_n: BigInt,
    pub dominant: Enclosed,
    /// `t_n − Σ|θ_j|^n`
    pub r_n: Enclosed,
    /// `r_n / n^{s/2}` when `s > 0`, else `r_n`.
    pub r_n_normalized: f64,
    /// `t_n − Σ Re θ_j^n` over the same conjugates.
    pub r_n_real: Enclosed,
}

#[derive(Clone, Debug, Serialize)]
pub struct ResidualReport {
    pub s: usize,
    pub rows: Vec<ResidualRow>,
    /// `max_n |r_n| / n^{s/2}` (or `max |r_n|` when `s = 0`).
    pub max_normalized: f64,
    pub max_abs_real: f64,
}

pub fn trace_residual_report(a: &AlgebraicNumber, big_n: usize) -> Result<ResidualReport> {
    let t = power_traces(a.minpoly(), big_n, a.settings().trace_cap)?;
    let (moduli, reals) = dominant_sums(a, big_n)?;
    let s = a.s();
    let mut rows = Vec::with_capacity(big_n);
    for n in 1..=big_n {
        let prec = moduli[n - 1].prec();
        let tn = Interval::from_int(&t[n - 1], prec);
        let r = tn.sub(&moduli[n - 1]);
        let rr = tn.sub(&reals[n - 1]);
        let r_enc = Enclosed::from(&r);
        if r_enc.err > 1e-6 * r_enc.value.abs().max(1.0) {
            return Err(Error::precision(prec, "trace residual"));
        }
        let norm = if s > 0 { r_enc.value / (n as f64).powf(s as f64 / 2.0) } else { r_enc.value };
        rows.push(ResidualRow {
            n,
            t_n: t[n - 1].clone(),
            dominant: Enclosed::from(&moduli[n - 1]),
            r_n: r_enc,
            r_n_normalized: norm,
            r_n_real: Enclosed::from(&rr),
        });
    }
    let max_normalized = rows.iter().map(|r| r.r_n_normalized.abs()).fold(0.0, f64::max);
    let max_abs_real = rows.iter().map(|r| r.r_n_real.value.abs()).fold(0.0, f64::max);
    Ok(ResidualReport { s, rows, max_normalized, max_abs_real })
}

#[derive(Clone, Debug, Serialize)]
pub struct PartialSums {
    /// Index of the conjugate in [`AlgebraicNumber::conjugates`].
    pub conjugate: usize,
    pub arg: f64,
    /// `1/|sin(arg/2)|`, the bound on the geometric sum.
    pub bound: f64,
    /// `P_n = Σ_{k=1}^n Re θ_j^k` for `n = 1..=N`.
    pub sums: Vec<f64>,
    pub errors: Vec<f64>,
    pub sup_abs: f64,
    /// Least-squares slope of `log|P_n|` against `log n` over `n ∈ [N/2, N]`.
    pub exponent: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct PartialSumSeries {
    pub series: Vec<PartialSums>,
}

pub fn unit_circle_partial_sums(a: &AlgebraicNumber, big_n: usize) -> Result<PartialSumSeries> {
    if !classify(a)?.is_salem {
        return Err(Error::NotSalem);
    }
    if big_n > a.settings().trace_cap {
        return Err(Error::InvalidArgument(format!("N = {big_n} exceeds the cap {}", a.settings().trace_cap)));
    }
    let bits = a.settings().precision_bits + 2 * (big_n.max(2).ilog2() + 1) + 32;
    let roots = a.conjugates_at(bits)?;
    let mut series = Vec::new();
    for (j, (r, c)) in roots.iter().zip(a.modulus_classes()).enumerate() {
        if *c != ModulusClass::OnCircle {
            continue;
        }
        let z = r.to_complex_interval();
        let mut zp = ComplexInterval::one(z.prec());
        let mut acc = Interval::zero(z.prec());
        let mut sums = Vec::with_capacity(big_n);
        let mut errors = Vec::with_capacity(big_n);
        for _ in 0..big_n {
            zp = zp.mul(&z);
            acc = acc.add(&zp.re);
            let e = Enclosed::from(&acc);
            sums.push(e.value);
            errors.push(e.err);
        }
        let arg = r.arg_f64();
        let tail: Vec<(f64, f64)> = (big_n / 2..big_n)
            .filter(|&i| sums[i].abs() > 1e-300)
            .map(|i| (((i + 1) as f64).ln(), sums[i].abs().ln()))
            .collect();
        series.push(PartialSums {
            conjugate: j,
            arg,
            bound: 1.0 / (arg / 2.0).sin().abs(),
            sup_abs: sums.iter().fold(0.0, |m, x| m.max(x.abs())),
            exponent: least_squares_slope(&tail),
            sums,
            errors,
        });
    }
    Ok(PartialSumSeries { series })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::Settings;
    use crate::poly::parse_polynomial;

    fn num(text: &str) -> AlgebraicNumber {
        AlgebraicNumber::parse(text, &Settings::default()).unwrap()
    }

    fn ints(v: &[i64]) -> Vec<BigInt> {
        v.iter().map(|&x| BigInt::from(x)).collect()
    }

    #[test]
    fn lucas_numbers() {
        let t = power_traces(&parse_polynomial("x^2-x-1").unwrap(), 6, 1000).unwrap();
        assert_eq!(t, ints(&[1, 3, 4, 7, 11, 18]));
        let t = power_traces(&parse_polynomial("x^2-2").unwrap(), 6, 1000).unwrap();
        assert_eq!(t, ints(&[0, 4, 0, 8, 0, 16]));
        let t = power_traces(&parse_polynomial("x^3-x-2").unwrap(), 1, 1000).unwrap();
        assert_eq!(t, ints(&[0]));
        assert!(matches!(power_traces(&parse_polynomial("2x-3").unwrap(), 3, 1000), Err(Error::NotMonic)));
        assert!(power_traces(&parse_polynomial("x-2").unwrap(), 1001, 1000).is_err());
    }

    #[test]
    fn golden_residuals_are_conjugate_powers() {
        let r = trace_residual_report(&num("x^2-x-1"), 40).unwrap();
        let psi: f64 = -0.618_033_988_749_894_8;
        for row in &r.rows {
            assert!((row.r_n.value - psi.powi(row.n as i32)).abs() < 1e-12);
        }
        assert!(r.max_normalized < 1.0);
    }

    #[test]
    fn modulus_reading_differs_for_minus_sqrt2() {
        let r = trace_residual_report(&num("x^2-2"), 6).unwrap();
        assert!(r.rows[1].r_n.contains(0.0));
        assert!((r.rows[2].r_n.value + 2.0 * 2f64.sqrt().powi(3)).abs() < 1e-9);
        assert!(r.rows[2].r_n_real.contains(0.0));
    }

    #[test]
    fn lehmer_partial_sums() {
        let a = num("x^10+x^9-x^7-x^6-x^5-x^4-x^3+x+1");
        let ps = unit_circle_partial_sums(&a, 200).unwrap();
        assert_eq!(ps.series.len(), 8);
        for s in &ps.series {
            assert!((s.sums[0] - s.arg.cos()).abs() < 1e-12);
            assert!(s.sup_abs <= s.bound + 1e-9);
        }
        assert!(matches!(unit_circle_partial_sums(&num("x^2-x-1"), 10), Err(Error::NotSalem)));
    }
}
