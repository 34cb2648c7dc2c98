//! Independent fixed-point oracles over plain `BigInt`, sharing no code with
//! the library's interval or field arithmetic.
#![allow(dead_code)]

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

pub const TEST_NUMBERS: [(&str, &str); 6] = [
    ("golden", "x^2-x-1"),
    ("plastic", "x^3-x-1"),
    ("lehmer", "x^10+x^9-x^7-x^6-x^5-x^4-x^3+x+1"),
    ("garsia", "x^3-x-2"),
    ("sqrt2", "x^2-2"),
    ("three_halves", "2x-3"),
];

/// Reals as integers scaled by `2^bits`.
pub struct Fixed {
    pub bits: u32,
    pub one: BigInt,
    pub theta: BigInt,
}

impl Fixed {
    /// The root of `asc` (ascending coefficients) in `(1, 2)`, by bisection.
    pub fn new(asc: &[i64], bits: u32) -> Fixed {
        let one = BigInt::one() << bits;
        // Horner in scaled integers: value(t) = Σ c_i (t/2^b)^i, multiply by 2^{b d}
        let eval = |t: &BigInt| -> i32 {
            let d = asc.len() - 1;
            let mut acc = BigInt::from(asc[d]);
            for i in (0..d).rev() {
                acc = acc * t + BigInt::from(asc[i]) * (BigInt::one() << (bits as usize * (d - i)));
            }
            if acc.is_zero() { 0 } else if acc.is_positive() { 1 } else { -1 }
        };
        let (mut lo, mut hi) = (one.clone(), BigInt::from(2) * &one);
        let (slo, shi) = (eval(&lo), eval(&hi));
        assert!(slo * shi < 0, "no sign change on (1,2)");
        while &hi - &lo > BigInt::one() {
            let mid: BigInt = (&lo + &hi) >> 1;
            let s = eval(&mid);
            if s == 0 {
                return Fixed { bits, one, theta: mid };
            }
            if s == slo { lo = mid } else { hi = mid }
        }
        Fixed { bits, one, theta: lo }
    }

    pub fn mul(&self, a: &BigInt, b: &BigInt) -> BigInt {
        (a * b) >> self.bits
    }

    pub fn div(&self, a: &BigInt, b: &BigInt) -> BigInt {
        (a << self.bits) / b
    }

    /// `θ^0, …, θ^k`.
    pub fn powers(&self, k: usize) -> Vec<BigInt> {
        let mut out = vec![self.one.clone()];
        for _ in 0..k {
            let next = self.mul(out.last().unwrap(), &self.theta);
            out.push(next);
        }
        out
    }

    /// `1/(θ−1)`.
    pub fn support(&self) -> BigInt {
        self.div(&self.one, &(&self.theta - &self.one))
    }

    /// Tolerance for declaring two values equal.
    pub fn eps(&self) -> BigInt {
        BigInt::one() << (self.bits / 2)
    }

    pub fn to_f64(&self, v: &BigInt) -> f64 {
        let shift = self.bits.saturating_sub(60);
        let t: BigInt = v >> shift;
        t.to_string().parse::<f64>().unwrap() / 2f64.powi((self.bits - shift) as i32)
    }
}

/// Ascending integer coefficients of a `"x^2-x-1"` style test polynomial.
pub fn ascending(text: &str) -> Vec<i64> {
    let p = bernoulli_core::poly::parse_polynomial(text).unwrap();
    p.ascending().iter().map(|c| i64::try_from(c).unwrap()).collect()
}

/// Brute-force level: all strings over `digits`, sorted and grouped by value.
/// Returns `(multiplicity, least witness)` per distinct value, ascending.
pub fn brute_level(fx: &Fixed, digits: &[i64], n: usize) -> Vec<(u64, Vec<i64>)> {
    let pw = fx.powers(n);
    let base = digits.len();
    let total = base.pow(n as u32);
    let mut vals: Vec<(BigInt, Vec<i64>)> = (0..total)
        .map(|mut w| {
            let mut word = vec![0i64; n];
            for k in (0..n).rev() {
                word[k] = digits[w % base];
                w /= base;
            }
            let v = word.iter().enumerate().fold(BigInt::zero(), |acc, (k, &a)| acc + &pw[k + 1] * a);
            (v, word)
        })
        .collect();
    vals.sort_by(|a, b| a.0.cmp(&b.0).then_with(|| a.1.cmp(&b.1)));
    let eps = fx.eps();
    let mut out: Vec<(u64, Vec<i64>)> = Vec::new();
    let mut last: Option<BigInt> = None;
    for (v, w) in vals {
        match &last {
            Some(l) if (&v - l).abs() <= eps => {
                let g = out.last_mut().unwrap();
                g.0 += 1;
                if w < g.1 {
                    g.1 = w;
                }
            }
            _ => out.push((1, w)),
        }
        last = Some(v);
    }
    out
}

/// `β_n` for `n = 0..=n_max` by testing every prefix, without memoization.
pub fn brute_beta(fx: &Fixed, x: &[u8], n_max: usize) -> Vec<u64> {
    let big_n = x.len();
    let pw = fx.powers(big_n);
    let eps = fx.eps();
    let t = fx.support();
    let xs = x.iter().enumerate().fold(BigInt::zero(), |acc, (k, &b)| acc + &pw[big_n - 1 - k] * b);
    (0..=n_max)
        .map(|n| {
            let cap = fx.mul(&pw[big_n - n], &t);
            (0u64..1 << n)
                .filter(|&w| {
                    let mut r = xs.clone();
                    for k in 0..n {
                        if (w >> (n - 1 - k)) & 1 == 1 {
                            r -= &pw[big_n - 1 - k];
                        }
                    }
                    r >= -&eps && r <= &cap + &eps
                })
                .count() as u64
        })
        .collect()
}
