//! Exact arithmetic in `Q(θ)` for a real root θ of an irreducible integer
//! polynomial, with certified numeric comparison.

use std::cmp::Ordering;
use std::sync::Mutex;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::interval::Interval;
use crate::poly::{self, IntPolynomial};

/// An element `(Σ num_i θ^i) / den` of `Q(θ)` in reduced form: fewer than `d`
/// coefficients, `den > 0`, and `gcd(num, den) = 1`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct FieldElem {
    num: Vec<BigInt>,
    den: BigInt,
}

impl FieldElem {
    pub fn zero() -> Self {
        FieldElem { num: Vec::new(), den: BigInt::one() }
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_empty()
    }

    /// Numerator coefficients, constant first.
    pub fn numerators(&self) -> &[BigInt] {
        &self.num
    }

    pub fn denominator(&self) -> &BigInt {
        &self.den
    }

    /// Build from numerator coefficients and a common denominator; `num` must
    /// already be reduced modulo the minimal polynomial.
    pub fn from_parts(mut num: Vec<BigInt>, den: BigInt) -> Self {
        assert!(!den.is_zero(), "zero denominator");
        poly::trim(&mut num);
        let mut den = den;
        if den.is_negative() {
            den = -den;
            for c in num.iter_mut() {
                *c = -&*c;
            }
        }
        let g = num.iter().fold(den.clone(), |g, c| g.gcd(c));
        if !g.is_one() {
            for c in num.iter_mut() {
                *c = &*c / &g;
            }
            den = &den / &g;
        }
        if num.is_empty() {
            den = BigInt::one();
        }
        FieldElem { num, den }
    }

    fn from_rationals(coeffs: &[BigRational]) -> Self {
        let den = coeffs.iter().fold(BigInt::one(), |l, c| l.lcm(c.denom()));
        let num = coeffs.iter().map(|c| c.numer() * (&den / c.denom())).collect();
        FieldElem::from_parts(num, den)
    }

    fn to_rationals(&self) -> Vec<BigRational> {
        self.num.iter().map(|c| BigRational::new(c.clone(), self.den.clone())).collect()
    }
}

/// The field `Q(θ)` with a certified, refinable real enclosure of θ.
pub struct NumberField {
    minpoly: IntPolynomial,
    /// θ enclosure with a single root of the minimal polynomial inside.
    isolating: Interval,
    /// Sign of the minimal polynomial just left of θ.
    left_sign: Ordering,
    best: Mutex<Interval>,
    start_bits: u32,
    max_bits: u32,
}

impl std::fmt::Debug for NumberField {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("NumberField").field("minpoly", &self.minpoly).field("theta", &self.isolating).finish()
    }
}

impl NumberField {
    /// `isolating` must contain exactly one root of `minpoly`, which is real.
    pub fn new(minpoly: IntPolynomial, isolating: Interval, start_bits: u32, max_bits: u32) -> Result<Self> {
        let left_sign = if minpoly.degree() == 1 {
            Ordering::Equal
        } else {
            let l = minpoly.sign_at_dyadic(isolating.lo_scaled(), isolating.prec());
            let r = minpoly.sign_at_dyadic(isolating.hi_scaled(), isolating.prec());
            if l == Ordering::Equal || l != r.reverse() {
                return Err(Error::InvalidArgument("enclosure does not bracket a simple root".into()));
            }
            l
        };
        Ok(NumberField { best: Mutex::new(isolating.clone()), minpoly, isolating, left_sign, start_bits, max_bits })
    }

    pub fn minpoly(&self) -> &IntPolynomial {
        &self.minpoly
    }

    pub fn degree(&self) -> usize {
        self.minpoly.degree()
    }

    pub fn start_bits(&self) -> u32 {
        self.start_bits
    }

    pub fn max_bits(&self) -> u32 {
        self.max_bits
    }

    /// θ enclosed with width at most `2^(3−prec)`.
    pub fn theta(&self, prec: u32) -> Interval {
        if self.minpoly.degree() == 1 {
            let a = self.minpoly.ascending();
            return Interval::from_ratio(&-&a[0], &a[1], prec);
        }
        let mut best = self.best.lock().unwrap();
        let target = BigInt::from(8u8);
        let cur = best.to_prec(prec);
        if best.prec() >= prec && cur.width_scaled() <= target {
            return cur;
        }
        let refined = self.refine(&best, prec + 4);
        *best = refined.clone();
        refined.to_prec(prec)
    }

    fn refine(&self, from: &Interval, prec: u32) -> Interval {
        let p = &self.minpoly;
        let lo = from.to_prec(prec);
        let (lo_s, hi_s) = (lo.lo_scaled().clone(), lo.hi_scaled().clone());
        // Newton from the midpoint, then verify a sign change on a tight bracket
        let dp = p.derivative_ascending();
        let mut x = lo.midpoint();
        for _ in 0..64 {
            let fx = p.eval_interval(&x).midpoint();
            let dfx = poly::eval_interval(&dp, &x).midpoint();
            let Some(step) = fx.div(&dfx) else { break };
            let step = step.midpoint();
            x = x.sub(&step).midpoint();
            if step.lo_scaled().abs() <= BigInt::from(2u8) {
                break;
            }
        }
        let c = x.lo_scaled();
        let a = c - 4;
        let b = c + 4;
        if a >= lo_s
            && b <= hi_s
            && p.sign_at_dyadic(&a, prec) == self.left_sign
            && p.sign_at_dyadic(&b, prec) == self.left_sign.reverse()
        {
            return Interval::from_raw(a, b, prec);
        }
        // bisection fallback
        let (mut a, mut b) = (lo_s, hi_s);
        while &b - &a > BigInt::from(8u8) {
            let m: BigInt = (&a + &b) >> 1u32;
            let s = p.sign_at_dyadic(&m, prec);
            if s == Ordering::Equal {
                return Interval::from_raw(m.clone(), m, prec);
            }
            if s == self.left_sign {
                a = m;
            } else {
                b = m;
            }
        }
        Interval::from_raw(a, b, prec)
    }

    /// Enclosures of `θ^0, …, θ^n`.
    pub fn theta_powers(&self, n: usize, prec: u32) -> Vec<Interval> {
        let t = self.theta(prec);
        let mut out = Vec::with_capacity(n + 1);
        out.push(Interval::one(prec));
        for k in 1..=n {
            let next = out[k - 1].mul(&t);
            out.push(next);
        }
        out
    }

    /// Working precision sufficient to give `θ^k` for `k ≤ n` an absolute
    /// error below `2^-bits`.
    pub fn guard_bits(&self, n: usize, bits: u32) -> u32 {
        let t = self.theta(64).hi_f64().max(1.0);
        let growth = (n as f64 * t.log2()).ceil().max(0.0) as u32;
        bits + growth + 2 * (usize::BITS - n.leading_zeros()) + 8
    }

    // ---- exact arithmetic -------------------------------------------------

    /// Reduce a rational polynomial modulo the minimal polynomial.
    fn reduce(&self, mut f: Vec<BigRational>) -> FieldElem {
        let p = self.minpoly.ascending();
        let d = p.len() - 1;
        let lc = BigRational::from_integer(p[d].clone());
        while f.len() > d {
            let top = f.pop().unwrap();
            if top.is_zero() {
                continue;
            }
            let q = &top / &lc;
            let shift = f.len() - d;
            for i in 0..d {
                f[shift + i] -= &q * BigRational::from_integer(p[i].clone());
            }
        }
        FieldElem::from_rationals(&f)
    }

    pub fn from_int_poly(&self, asc: &[BigInt]) -> FieldElem {
        self.reduce(asc.iter().map(|c| BigRational::from_integer(c.clone())).collect())
    }

    pub fn from_integer(&self, v: impl Into<BigInt>) -> FieldElem {
        FieldElem::from_parts(vec![v.into()], BigInt::one())
    }

    pub fn from_rational(&self, v: &BigRational) -> FieldElem {
        FieldElem::from_parts(vec![v.numer().clone()], v.denom().clone())
    }

    /// `θ^k`.
    pub fn x_pow(&self, k: usize) -> FieldElem {
        let mut asc = vec![BigInt::zero(); k + 1];
        asc[k] = BigInt::one();
        self.from_int_poly(&asc)
    }

    pub fn add(&self, a: &FieldElem, b: &FieldElem) -> FieldElem {
        let den = &a.den * &b.den;
        let n = a.num.len().max(b.num.len());
        let num = (0..n)
            .map(|i| {
                a.num.get(i).cloned().unwrap_or_default() * &b.den + b.num.get(i).cloned().unwrap_or_default() * &a.den
            })
            .collect();
        FieldElem::from_parts(num, den)
    }

    pub fn neg(&self, a: &FieldElem) -> FieldElem {
        FieldElem { num: a.num.iter().map(|c| -c).collect(), den: a.den.clone() }
    }

    pub fn sub(&self, a: &FieldElem, b: &FieldElem) -> FieldElem {
        self.add(a, &self.neg(b))
    }

    pub fn mul(&self, a: &FieldElem, b: &FieldElem) -> FieldElem {
        let prod = poly::mul(&a.num, &b.num);
        let r = self.from_int_poly(&prod);
        FieldElem::from_parts(r.num, r.den * &a.den * &b.den)
    }

    pub fn scale(&self, a: &FieldElem, k: &BigRational) -> FieldElem {
        FieldElem::from_parts(a.num.iter().map(|c| c * k.numer()).collect(), &a.den * k.denom())
    }

    /// Multiplicative inverse of a nonzero element (extended Euclid in `Q[x]`).
    pub fn inverse(&self, a: &FieldElem) -> FieldElem {
        assert!(!a.is_zero(), "inverse of zero");
        let p: Vec<BigRational> =
            self.minpoly.ascending().iter().map(|c| BigRational::from_integer(c.clone())).collect();
        let mut r0 = p;
        let mut r1 = a.to_rationals();
        let mut s0: Vec<BigRational> = Vec::new();
        let mut s1: Vec<BigRational> = vec![BigRational::one()];
        while r1.len() > 1 {
            let (q, r) = qdivrem(&r0, &r1);
            let s2 = qsub(&s0, &qmul(&q, &s1));
            r0 = std::mem::replace(&mut r1, r);
            s0 = std::mem::replace(&mut s1, s2);
        }
        // r1 is a nonzero constant c: s1·a ≡ c
        let c = r1[0].clone();
        let inv: Vec<BigRational> = s1.iter().map(|x| x / &c).collect();
        self.reduce(inv)
    }

    /// `1/(θ − 1)`, the right end of the support of the Bernoulli convolution.
    pub fn support_constant(&self) -> FieldElem {
        let t = self.sub(&self.x_pow(1), &self.from_integer(1));
        self.inverse(&t)
    }

    // ---- numeric ----------------------------------------------------------

    pub fn eval(&self, a: &FieldElem, prec: u32) -> Interval {
        let deg = a.num.len().saturating_sub(1);
        let inner = self.guard_bits(deg, prec).max(prec);
        let pw = self.theta_powers(deg, inner);
        let mut acc = Interval::zero(inner);
        for (c, t) in a.num.iter().zip(&pw) {
            acc = acc.add(&t.mul_int(c));
        }
        acc.div_int(&a.den).to_prec(prec)
    }

    /// Certified sign, refining until decided.
    pub fn sign(&self, a: &FieldElem) -> Result<Ordering> {
        if a.is_zero() {
            return Ok(Ordering::Equal);
        }
        let mut bits = self.start_bits;
        loop {
            if let Some(s) = self.eval(a, bits).sign() {
                return Ok(s);
            }
            if bits >= self.max_bits {
                return Err(Error::precision(bits, "sign of a field element"));
            }
            bits = (bits * 2).min(self.max_bits);
        }
    }

    pub fn cmp(&self, a: &FieldElem, b: &FieldElem) -> Result<Ordering> {
        if a == b {
            return Ok(Ordering::Equal);
        }
        self.sign(&self.sub(a, b))
    }

    pub fn to_f64(&self, a: &FieldElem) -> f64 {
        self.eval(a, 80).mid_f64()
    }
}

fn qtrim(v: &mut Vec<BigRational>) {
    while v.last().is_some_and(Zero::is_zero) {
        v.pop();
    }
}

fn qsub(a: &[BigRational], b: &[BigRational]) -> Vec<BigRational> {
    let n = a.len().max(b.len());
    let mut out: Vec<BigRational> = (0..n)
        .map(|i| a.get(i).cloned().unwrap_or_else(BigRational::zero) - b.get(i).cloned().unwrap_or_else(BigRational::zero))
        .collect();
    qtrim(&mut out);
    out
}

fn qmul(a: &[BigRational], b: &[BigRational]) -> Vec<BigRational> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![BigRational::zero(); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    qtrim(&mut out);
    out
}

fn qdivrem(a: &[BigRational], b: &[BigRational]) -> (Vec<BigRational>, Vec<BigRational>) {
    let mut r = a.to_vec();
    qtrim(&mut r);
    let lb = b.last().unwrap().clone();
    if r.len() < b.len() {
        return (Vec::new(), r);
    }
    let mut q = vec![BigRational::zero(); r.len() - b.len() + 1];
    while r.len() >= b.len() && !r.is_empty() {
        let shift = r.len() - b.len();
        let c = r.last().unwrap() / &lb;
        for (j, bj) in b.iter().enumerate() {
            r[shift + j] -= &c * bj;
        }
        q[shift] = c;
        r.pop();
        qtrim(&mut r);
    }
    qtrim(&mut q);
    (q, r)
}

/// Scaled integer residues of `x^k mod p` for `k = 0..=max_exp`, sharing the
/// common denominator `lc^e` with `e = max(0, max_exp − d + 1)`.
///
/// These are the dedup keys of the enumeration: a digit polynomial's residue
/// is the integer combination of the rows.
#[derive(Clone, Debug)]
pub struct PowerTable {
    d: usize,
    den: BigInt,
    rows: Vec<Vec<i64>>,
}

impl PowerTable {
    pub fn new(field: &NumberField, max_exp: usize) -> Result<Self> {
        let d = field.degree();
        let lc = field.minpoly().leading().clone();
        let e = (max_exp + 1).saturating_sub(d);
        let den = num_traits::pow(lc, e);
        let mut rows = Vec::with_capacity(max_exp + 1);
        let mut cur = field.from_integer(1);
        let x = field.x_pow(1);
        for k in 0..=max_exp {
            if k > 0 {
                cur = field.mul(&cur, &x);
            }
            let factor = &den / cur.denominator();
            debug_assert!((&factor * cur.denominator()) == den);
            let mut row = vec![0i64; d];
            for (i, c) in cur.numerators().iter().enumerate() {
                row[i] = (c * &factor).to_i64().ok_or(Error::ResidueOverflow { level: k })?;
            }
            rows.push(row);
        }
        Ok(PowerTable { d, den, rows })
    }

    pub fn degree(&self) -> usize {
        self.d
    }

    pub fn max_exp(&self) -> usize {
        self.rows.len() - 1
    }

    /// Common denominator of all residues built from this table.
    pub fn denominator(&self) -> &BigInt {
        &self.den
    }

    pub fn row(&self, k: usize) -> &[i64] {
        &self.rows[k]
    }

    /// Exact element for a scaled residue.
    pub fn to_elem(&self, residue: &[i64]) -> FieldElem {
        FieldElem::from_parts(residue.iter().map(|&c| BigInt::from(c)).collect(), self.den.clone())
    }

    /// Scaled residue of an exact element, when representable.
    pub fn from_elem(&self, e: &FieldElem) -> Option<Vec<i64>> {
        let (q, r) = self.den.div_rem(e.denominator());
        if !r.is_zero() {
            return None;
        }
        let mut out = vec![0i64; self.d];
        for (i, c) in e.numerators().iter().enumerate() {
            out[i] = (c * &q).to_i64()?;
        }
        Some(out)
    }

    /// Evaluator for residues at `prec` bits.
    pub fn evaluator(&self, field: &NumberField, prec: u32) -> ResidueEvaluator {
        let inner = field.guard_bits(self.d, prec) + 16;
        let basis = field
            .theta_powers(self.d.saturating_sub(1), inner)
            .into_iter()
            .map(|t| t.div_int(&self.den).to_prec(prec + 16))
            .collect();
        ResidueEvaluator { prec: prec + 16, basis }
    }
}

/// Evaluates scaled residues `Σ r_i θ^i / den` by a dot product with
/// precomputed basis enclosures.
#[derive(Clone, Debug)]
pub struct ResidueEvaluator {
    prec: u32,
    basis: Vec<Interval>,
}

impl ResidueEvaluator {
    pub fn prec(&self) -> u32 {
        self.prec
    }

    pub fn eval(&self, residue: &[i64]) -> Interval {
        let mut acc = Interval::zero(self.prec);
        for (&c, b) in residue.iter().zip(&self.basis) {
            if c != 0 {
                acc = acc.add(&b.mul_i64(c));
            }
        }
        acc
    }
}
