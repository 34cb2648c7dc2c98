//! Fixed-point interval arithmetic over big integers.
//!
//! An [`Interval`] at precision `p` is a pair of integers `lo <= hi`
//! standing for the closed real interval `[lo·2^-p, hi·2^-p]`. Every
//! operation rounds outward, so the true result of the real operation on any
//! points of the operands lies in the result. All operands of a binary
//! operation must share the same precision.

use std::cmp::Ordering;
use std::fmt;

use num_bigint::{BigInt, Sign};
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// `floor(x / 2^k)`.
pub(crate) fn floor_shr(x: &BigInt, k: u32) -> BigInt {
    // num-bigint rounds arithmetic right shifts toward negative infinity
    x >> k
}

/// `ceil(x / 2^k)`.
pub(crate) fn ceil_shr(x: &BigInt, k: u32) -> BigInt {
    -((-x) >> k)
}

/// Multiply by `2^e`, stepping to avoid spurious overflow of `2^e` itself.
fn ldexp(mut v: f64, mut e: i64) -> f64 {
    while e > 1000 {
        v *= 2f64.powi(1000);
        e -= 1000;
    }
    while e < -1000 {
        v *= 2f64.powi(-1000);
        e += 1000;
    }
    v * 2f64.powi(e as i32)
}

/// Round a big integer scaled by `2^-prec` to an `f64`, toward `-inf`
/// (`up == false`) or `+inf` (`up == true`).
pub(crate) fn scaled_to_f64(x: &BigInt, prec: u32, up: bool) -> f64 {
    if x.is_zero() {
        return 0.0;
    }
    let bits = x.bits() as i64;
    // keep 64 significant bits, then scale
    let drop = (bits - 64).max(0) as u32;
    let m = if up { ceil_shr(x, drop) } else { floor_shr(x, drop) };
    let mf = m.to_f64().expect("64-bit mantissa fits in f64");
    let v = ldexp(mf, drop as i64 - prec as i64);
    // mantissa conversion and scaling round at most once each
    if up {
        v.next_up().next_up()
    } else {
        v.next_down().next_down()
    }
}

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Interval {
    lo: BigInt,
    hi: BigInt,
    prec: u32,
}

impl fmt::Debug for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{:e}, {:e}]@{}", self.lo_f64(), self.hi_f64(), self.prec)
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} ± {:.3e}", self.mid_f64(), self.rad_f64())
    }
}

impl Interval {
    pub fn from_raw(lo: BigInt, hi: BigInt, prec: u32) -> Self {
        debug_assert!(lo <= hi, "inverted interval");
        Interval { lo, hi, prec }
    }

    pub fn zero(prec: u32) -> Self {
        Interval { lo: BigInt::zero(), hi: BigInt::zero(), prec }
    }

    pub fn one(prec: u32) -> Self {
        Self::from_int(&BigInt::one(), prec)
    }

    pub fn from_int(v: &BigInt, prec: u32) -> Self {
        let x = v << prec;
        Interval { lo: x.clone(), hi: x, prec }
    }

    pub fn from_i64(v: i64, prec: u32) -> Self {
        Self::from_int(&BigInt::from(v), prec)
    }

    /// Enclosure of `num / den` (`den != 0`).
    pub fn from_ratio(num: &BigInt, den: &BigInt, prec: u32) -> Self {
        assert!(!den.is_zero(), "zero denominator");
        let (n, d) = if den.is_negative() { (-num, -den) } else { (num.clone(), den.clone()) };
        let s = n << prec;
        Interval { lo: s.div_floor(&d), hi: s.div_ceil(&d), prec }
    }

    /// Enclosure of a finite `f64` (exact when representable at `prec`).
    pub fn from_f64(x: f64, prec: u32) -> Self {
        assert!(x.is_finite(), "non-finite f64");
        if x == 0.0 {
            return Self::zero(prec);
        }
        let bits = x.to_bits();
        let neg = bits >> 63 == 1;
        let exp = ((bits >> 52) & 0x7ff) as i64;
        let frac = bits & ((1u64 << 52) - 1);
        let (mant, e) = if exp == 0 { (frac, -1074) } else { (frac | (1 << 52), exp - 1075) };
        let mut m = BigInt::from(mant);
        if neg {
            m = -m;
        }
        let shift = e + prec as i64;
        if shift >= 0 {
            let v = m << (shift as u32);
            Interval { lo: v.clone(), hi: v, prec }
        } else {
            let k = (-shift) as u32;
            Interval { lo: floor_shr(&m, k), hi: ceil_shr(&m, k), prec }
        }
    }

    /// The dyadic point `m · 2^-prec`.
    pub fn from_scaled(m: BigInt, prec: u32) -> Self {
        Interval { lo: m.clone(), hi: m, prec }
    }

    pub fn prec(&self) -> u32 {
        self.prec
    }

    pub fn lo_scaled(&self) -> &BigInt {
        &self.lo
    }

    pub fn hi_scaled(&self) -> &BigInt {
        &self.hi
    }

    pub fn lo_f64(&self) -> f64 {
        scaled_to_f64(&self.lo, self.prec, false)
    }

    pub fn hi_f64(&self) -> f64 {
        scaled_to_f64(&self.hi, self.prec, true)
    }

    /// Midpoint rounded to nearest `f64`.
    pub fn mid_f64(&self) -> f64 {
        let s: BigInt = &self.lo + &self.hi;
        let bits = s.bits() as i64;
        let drop = (bits - 64).max(0) as u32;
        let m = floor_shr(&s, drop).to_f64().unwrap_or(0.0);
        ldexp(m, drop as i64 - self.prec as i64 - 1)
    }

    /// An upper bound on `max(|x - mid_f64()|)` over the interval, as `f64`.
    pub fn rad_f64(&self) -> f64 {
        let m = self.mid_f64();
        let a = (m - self.lo_f64()).abs();
        let b = (self.hi_f64() - m).abs();
        a.max(b).next_up()
    }

    pub fn width(&self) -> Interval {
        let w = &self.hi - &self.lo;
        Interval::from_scaled(w, self.prec)
    }

    /// `hi - lo` in units of `2^-prec`.
    pub fn width_scaled(&self) -> BigInt {
        &self.hi - &self.lo
    }

    pub fn midpoint(&self) -> Interval {
        let s: BigInt = &self.lo + &self.hi;
        Interval::from_scaled(floor_shr(&s, 1), self.prec)
    }

    pub fn contains_zero(&self) -> bool {
        !self.lo.is_positive() && !self.hi.is_negative()
    }

    pub fn is_point(&self) -> bool {
        self.lo == self.hi
    }

    /// Certified sign: `Some` only if every point of the interval has that sign.
    pub fn sign(&self) -> Option<Ordering> {
        if self.lo.is_positive() {
            Some(Ordering::Greater)
        } else if self.hi.is_negative() {
            Some(Ordering::Less)
        } else if self.lo.is_zero() && self.hi.is_zero() {
            Some(Ordering::Equal)
        } else {
            None
        }
    }

    /// Certified strict order between two intervals (`None` when they overlap).
    pub fn cmp_certified(&self, other: &Interval) -> Option<Ordering> {
        self.check(other);
        if self.hi < other.lo {
            Some(Ordering::Less)
        } else if self.lo > other.hi {
            Some(Ordering::Greater)
        } else {
            None
        }
    }

    pub fn overlaps(&self, other: &Interval) -> bool {
        self.cmp_certified(other).is_none()
    }

    pub fn contains(&self, other: &Interval) -> bool {
        self.check(other);
        self.lo <= other.lo && other.hi <= self.hi
    }

    /// Re-express at another precision, rounding outward.
    pub fn to_prec(&self, prec: u32) -> Interval {
        match prec.cmp(&self.prec) {
            Ordering::Equal => self.clone(),
            Ordering::Greater => {
                let k = prec - self.prec;
                Interval { lo: &self.lo << k, hi: &self.hi << k, prec }
            }
            Ordering::Less => {
                let k = self.prec - prec;
                Interval { lo: floor_shr(&self.lo, k), hi: ceil_shr(&self.hi, k), prec }
            }
        }
    }

    fn check(&self, other: &Interval) {
        assert_eq!(self.prec, other.prec, "interval precision mismatch");
    }

    pub fn add(&self, other: &Interval) -> Interval {
        self.check(other);
        Interval { lo: &self.lo + &other.lo, hi: &self.hi + &other.hi, prec: self.prec }
    }

    pub fn sub(&self, other: &Interval) -> Interval {
        self.check(other);
        Interval { lo: &self.lo - &other.hi, hi: &self.hi - &other.lo, prec: self.prec }
    }

    pub fn neg(&self) -> Interval {
        Interval { lo: -&self.hi, hi: -&self.lo, prec: self.prec }
    }

    pub fn mul(&self, other: &Interval) -> Interval {
        self.check(other);
        let (lo, hi) = if self.lo.sign() != Sign::Minus && other.lo.sign() != Sign::Minus {
            (&self.lo * &other.lo, &self.hi * &other.hi)
        } else if self.hi.sign() != Sign::Plus && other.hi.sign() != Sign::Plus {
            (&self.hi * &other.hi, &self.lo * &other.lo)
        } else {
            let c = [&self.lo * &other.lo, &self.lo * &other.hi, &self.hi * &other.lo, &self.hi * &other.hi];
            let lo = c.iter().min().unwrap().clone();
            let hi = c.iter().max().unwrap().clone();
            (lo, hi)
        };
        Interval { lo: floor_shr(&lo, self.prec), hi: ceil_shr(&hi, self.prec), prec: self.prec }
    }

    pub fn sqr(&self) -> Interval {
        if self.contains_zero() {
            let m = self.lo.abs().max(self.hi.abs());
            let hi = &m * &m;
            Interval { lo: BigInt::zero(), hi: ceil_shr(&hi, self.prec), prec: self.prec }
        } else {
            let a = &self.lo * &self.lo;
            let b = &self.hi * &self.hi;
            let (lo, hi) = if a < b { (a, b) } else { (b, a) };
            Interval { lo: floor_shr(&lo, self.prec), hi: ceil_shr(&hi, self.prec), prec: self.prec }
        }
    }

    pub fn mul_int(&self, k: &BigInt) -> Interval {
        if k.is_negative() {
            Interval { lo: &self.hi * k, hi: &self.lo * k, prec: self.prec }
        } else {
            Interval { lo: &self.lo * k, hi: &self.hi * k, prec: self.prec }
        }
    }

    pub fn mul_i64(&self, k: i64) -> Interval {
        if k < 0 {
            Interval { lo: &self.hi * k, hi: &self.lo * k, prec: self.prec }
        } else {
            Interval { lo: &self.lo * k, hi: &self.hi * k, prec: self.prec }
        }
    }

    /// Division by a nonzero integer.
    pub fn div_int(&self, k: &BigInt) -> Interval {
        assert!(!k.is_zero(), "division by zero");
        let (a, b) = if k.is_negative() { (-&self.hi, -&self.lo) } else { (self.lo.clone(), self.hi.clone()) };
        let k = k.abs();
        Interval { lo: a.div_floor(&k), hi: b.div_ceil(&k), prec: self.prec }
    }

    /// Multiply by `2^k` (exact).
    pub fn shl(&self, k: u32) -> Interval {
        Interval { lo: &self.lo << k, hi: &self.hi << k, prec: self.prec }
    }

    /// Division; `None` when the divisor contains zero.
    pub fn div(&self, other: &Interval) -> Option<Interval> {
        self.check(other);
        if other.contains_zero() {
            return None;
        }
        let p = self.prec;
        let num = [&self.lo << p, &self.hi << p];
        let mut lo: Option<BigInt> = None;
        let mut hi: Option<BigInt> = None;
        for n in &num {
            for d in [&other.lo, &other.hi] {
                let f = n.div_floor(d);
                let c = n.div_ceil(d);
                lo = Some(match lo {
                    Some(x) if x <= f => x,
                    _ => f,
                });
                hi = Some(match hi {
                    Some(x) if x >= c => x,
                    _ => c,
                });
            }
        }
        Some(Interval { lo: lo.unwrap(), hi: hi.unwrap(), prec: p })
    }

    /// Square root of the nonnegative part.
    pub fn sqrt(&self) -> Interval {
        let p = self.prec;
        let lo = if self.lo.is_positive() { (&self.lo << p).sqrt() } else { BigInt::zero() };
        let hi = if self.hi.is_positive() {
            let h = &self.hi << p;
            let r = h.sqrt();
            if &r * &r == h {
                r
            } else {
                r + 1
            }
        } else {
            BigInt::zero()
        };
        Interval { lo, hi, prec: p }
    }

    pub fn abs(&self) -> Interval {
        if self.lo.is_negative() && self.hi.is_positive() {
            Interval { lo: BigInt::zero(), hi: self.hi.clone().max(-&self.lo), prec: self.prec }
        } else if self.hi.sign() != Sign::Plus {
            self.neg()
        } else {
            self.clone()
        }
    }

    pub fn pow(&self, e: u32) -> Interval {
        let mut base = self.clone();
        let mut acc = Interval::one(self.prec);
        let mut k = e;
        while k > 0 {
            if k & 1 == 1 {
                acc = acc.mul(&base);
            }
            k >>= 1;
            if k > 0 {
                base = base.sqr();
            }
        }
        if e.is_multiple_of(2) && acc.lo.is_negative() {
            acc.lo = BigInt::zero();
        }
        acc
    }

    /// Interval hull.
    pub fn hull(&self, other: &Interval) -> Interval {
        self.check(other);
        Interval {
            lo: self.lo.clone().min(other.lo.clone()),
            hi: self.hi.clone().max(other.hi.clone()),
            prec: self.prec,
        }
    }

    /// Intersection; `None` when disjoint.
    pub fn intersect(&self, other: &Interval) -> Option<Interval> {
        self.check(other);
        let lo = self.lo.clone().max(other.lo.clone());
        let hi = self.hi.clone().min(other.hi.clone());
        (lo <= hi).then_some(Interval { lo, hi, prec: self.prec })
    }

    /// Elementwise minimum (enclosure of `min(x, y)`).
    pub fn min(&self, other: &Interval) -> Interval {
        self.check(other);
        Interval {
            lo: self.lo.clone().min(other.lo.clone()),
            hi: self.hi.clone().min(other.hi.clone()),
            prec: self.prec,
        }
    }

    pub fn max(&self, other: &Interval) -> Interval {
        self.check(other);
        Interval {
            lo: self.lo.clone().max(other.lo.clone()),
            hi: self.hi.clone().max(other.hi.clone()),
            prec: self.prec,
        }
    }

    /// Natural logarithm as an `f64` pair `(lower, upper)`; requires a positive
    /// lower end. Bounds carry a few ulps of slack for libm rounding.
    pub fn ln_bounds(&self) -> (f64, f64) {
        let lo = self.lo_f64().max(f64::MIN_POSITIVE);
        let hi = self.hi_f64();
        (slack_down(lo.ln()), slack_up(hi.ln()))
    }
}

/// A real number reported as `value ± err`, with `err` covering both the
/// enclosure width and the rounding of `value` to `f64`.
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Enclosed {
    pub value: f64,
    pub err: f64,
}

impl Enclosed {
    pub fn exact(value: f64) -> Self {
        Enclosed { value, err: 0.0 }
    }

    pub fn lo(&self) -> f64 {
        self.value - self.err
    }

    pub fn hi(&self) -> f64 {
        self.value + self.err
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lo() <= x && x <= self.hi()
    }
}

impl From<&Interval> for Enclosed {
    fn from(iv: &Interval) -> Self {
        let (lo, hi) = (iv.lo_f64(), iv.hi_f64());
        if lo == hi {
            return Enclosed::exact(lo);
        }
        let value = iv.mid_f64();
        let err = (hi - value).max(value - lo).max(0.0);
        Enclosed { value, err: slack_up(err) }
    }
}

/// Move an `f64` a few ulps toward `-inf`.
pub(crate) fn slack_down(x: f64) -> f64 {
    x.next_down().next_down().next_down().next_down()
}

/// Move an `f64` a few ulps toward `+inf`.
pub(crate) fn slack_up(x: f64) -> f64 {
    x.next_up().next_up().next_up().next_up()
}

/// Rectangular complex interval.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ComplexInterval {
    pub re: Interval,
    pub im: Interval,
}

impl ComplexInterval {
    pub fn new(re: Interval, im: Interval) -> Self {
        assert_eq!(re.prec, im.prec, "interval precision mismatch");
        ComplexInterval { re, im }
    }

    pub fn real(re: Interval) -> Self {
        let p = re.prec;
        ComplexInterval { re, im: Interval::zero(p) }
    }

    pub fn zero(prec: u32) -> Self {
        ComplexInterval { re: Interval::zero(prec), im: Interval::zero(prec) }
    }

    pub fn one(prec: u32) -> Self {
        ComplexInterval { re: Interval::one(prec), im: Interval::zero(prec) }
    }

    pub fn prec(&self) -> u32 {
        self.re.prec
    }

    pub fn add(&self, o: &ComplexInterval) -> Self {
        ComplexInterval { re: self.re.add(&o.re), im: self.im.add(&o.im) }
    }

    pub fn sub(&self, o: &ComplexInterval) -> Self {
        ComplexInterval { re: self.re.sub(&o.re), im: self.im.sub(&o.im) }
    }

    pub fn neg(&self) -> Self {
        ComplexInterval { re: self.re.neg(), im: self.im.neg() }
    }

    pub fn conj(&self) -> Self {
        ComplexInterval { re: self.re.clone(), im: self.im.neg() }
    }

    pub fn mul(&self, o: &ComplexInterval) -> Self {
        let re = self.re.mul(&o.re).sub(&self.im.mul(&o.im));
        let im = self.re.mul(&o.im).add(&self.im.mul(&o.re));
        ComplexInterval { re, im }
    }

    pub fn sqr(&self) -> Self {
        let re = self.re.sqr().sub(&self.im.sqr());
        let im = self.re.mul(&self.im).shl(1);
        ComplexInterval { re, im }
    }

    pub fn mul_int(&self, k: &BigInt) -> Self {
        ComplexInterval { re: self.re.mul_int(k), im: self.im.mul_int(k) }
    }

    pub fn mul_real(&self, r: &Interval) -> Self {
        ComplexInterval { re: self.re.mul(r), im: self.im.mul(r) }
    }

    pub fn norm_sqr(&self) -> Interval {
        self.re.sqr().add(&self.im.sqr())
    }

    pub fn abs(&self) -> Interval {
        self.norm_sqr().sqrt()
    }

    /// Division; `None` when the divisor rectangle may contain zero.
    pub fn div(&self, o: &ComplexInterval) -> Option<Self> {
        let n = o.norm_sqr();
        let num = self.mul(&o.conj());
        Some(ComplexInterval { re: num.re.div(&n)?, im: num.im.div(&n)? })
    }

    pub fn midpoint(&self) -> Self {
        ComplexInterval { re: self.re.midpoint(), im: self.im.midpoint() }
    }

    pub fn to_prec(&self, prec: u32) -> Self {
        ComplexInterval { re: self.re.to_prec(prec), im: self.im.to_prec(prec) }
    }

    pub fn pow(&self, mut e: u32) -> Self {
        let mut base = self.clone();
        let mut acc = ComplexInterval::one(self.prec());
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.sqr();
            }
        }
        acc
    }
}
