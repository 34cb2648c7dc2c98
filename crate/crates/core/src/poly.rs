//! Integer polynomials: the input object and the exact-arithmetic oracle.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::interval::{ComplexInterval, Interval};

/// A primitive integer polynomial of degree at least one with positive
/// leading coefficient.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct IntPolynomial {
    /// Coefficients, constant term first.
    asc: Vec<BigInt>,
}

impl IntPolynomial {
    /// Build from degree-descending coefficients, normalizing content and sign.
    pub fn new<I, T>(desc: I) -> Result<Self>
    where
        I: IntoIterator<Item = T>,
        T: Into<BigInt>,
    {
        let mut asc: Vec<BigInt> = desc.into_iter().map(Into::into).collect();
        asc.reverse();
        Self::from_ascending(asc)
    }

    /// Build from constant-first coefficients, normalizing content and sign.
    pub fn from_ascending(mut asc: Vec<BigInt>) -> Result<Self> {
        trim(&mut asc);
        if asc.is_empty() {
            return Err(Error::ZeroPolynomial);
        }
        if asc.len() == 1 {
            return Err(Error::DegreeZero);
        }
        Ok(IntPolynomial { asc: primitive_part(&asc) })
    }

    pub fn degree(&self) -> usize {
        self.asc.len() - 1
    }

    /// Coefficients, highest degree first.
    pub fn coeffs(&self) -> Vec<BigInt> {
        self.asc.iter().rev().cloned().collect()
    }

    /// Coefficients, constant term first.
    pub fn ascending(&self) -> &[BigInt] {
        &self.asc
    }

    /// Coefficient of `x^k` (zero beyond the degree).
    pub fn coeff(&self, k: usize) -> BigInt {
        self.asc.get(k).cloned().unwrap_or_default()
    }

    pub fn leading(&self) -> &BigInt {
        self.asc.last().unwrap()
    }

    pub fn constant(&self) -> &BigInt {
        &self.asc[0]
    }

    pub fn is_monic(&self) -> bool {
        self.leading().is_one()
    }

    /// Largest absolute coefficient.
    pub fn height(&self) -> BigInt {
        self.asc.iter().map(|c| c.abs()).max().unwrap()
    }

    /// Palindromic coefficient sequence.
    pub fn is_reciprocal(&self) -> bool {
        self.asc.iter().eq(self.asc.iter().rev())
    }

    /// True when every odd-degree coefficient vanishes, i.e. `p(x) = q(x^2)`.
    pub fn is_even(&self) -> bool {
        self.asc.iter().skip(1).step_by(2).all(Zero::is_zero)
    }

    /// Largest `k` with `p(x) = q(x^k)`.
    pub fn exponent_gcd(&self) -> usize {
        self.asc
            .iter()
            .enumerate()
            .filter(|(i, c)| *i > 0 && !c.is_zero())
            .fold(0usize, |g, (i, _)| g.gcd(&i))
    }

    /// `p(x^2)`.
    pub fn compose_square(&self) -> IntPolynomial {
        let mut asc = vec![BigInt::zero(); 2 * self.asc.len() - 1];
        for (i, c) in self.asc.iter().enumerate() {
            asc[2 * i] = c.clone();
        }
        IntPolynomial { asc }
    }

    /// `q` with `p(x) = q(x^2)`; only valid for even polynomials.
    pub fn even_part(&self) -> Option<IntPolynomial> {
        if !self.is_even() {
            return None;
        }
        let asc: Vec<BigInt> = self.asc.iter().step_by(2).cloned().collect();
        Some(IntPolynomial { asc })
    }

    pub fn derivative_ascending(&self) -> Vec<BigInt> {
        derivative(&self.asc)
    }

    /// Coefficients as `f64`, constant first (saturating for huge values).
    pub fn ascending_f64(&self) -> Vec<f64> {
        self.asc.iter().map(|c| c.to_f64().unwrap_or(f64::NAN)).collect()
    }

    /// Interval Horner evaluation at a real enclosure.
    pub fn eval_interval(&self, x: &Interval) -> Interval {
        eval_interval(&self.asc, x)
    }

    pub fn eval_complex(&self, z: &ComplexInterval) -> ComplexInterval {
        eval_complex(&self.asc, z)
    }

    /// Exact sign of `p(m / 2^k)`.
    pub fn sign_at_dyadic(&self, m: &BigInt, k: u32) -> std::cmp::Ordering {
        sign_at_dyadic(&self.asc, m, k)
    }

    /// Exact value at a rational point.
    pub fn eval_rational(&self, x: &BigRational) -> BigRational {
        let mut acc = BigRational::zero();
        for c in self.asc.iter().rev() {
            acc = acc * x + BigRational::from_integer(c.clone());
        }
        acc
    }
}

impl fmt::Display for IntPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&format_ascending(&self.asc))
    }
}

impl fmt::Debug for IntPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "IntPolynomial({self})")
    }
}

impl FromStr for IntPolynomial {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        parse_polynomial(s)
    }
}

pub(crate) fn format_ascending(asc: &[BigInt]) -> String {
    let mut out = String::new();
    for (k, c) in asc.iter().enumerate().rev() {
        if c.is_zero() {
            continue;
        }
        let neg = c.is_negative();
        let a = c.abs();
        if out.is_empty() {
            if neg {
                out.push('-');
            }
        } else {
            out.push_str(if neg { " - " } else { " + " });
        }
        let coef = if a.is_one() && k > 0 { String::new() } else { a.to_string() };
        let sep = if !coef.is_empty() && k > 0 { "*" } else { "" };
        match k {
            0 => out.push_str(&a.to_string()),
            1 => out.push_str(&format!("{coef}{sep}x")),
            _ => out.push_str(&format!("{coef}{sep}x^{k}")),
        }
    }
    if out.is_empty() {
        out.push('0');
    }
    out
}

/// Parse either a comma-separated degree-descending coefficient list
/// (`"1,-1,-1"`) or an expression in `x` (`"x^2 - x - 1"`).
pub fn parse_polynomial(text: &str) -> Result<IntPolynomial> {
    let text = text.trim();
    if text.contains(',') || (!text.is_empty() && !text.contains(['x', 'X', '(', '*', '^'])) && is_plain_list(text) {
        let mut desc = Vec::new();
        let mut pos = 0;
        for item in text.split(',') {
            let t = item.trim();
            let v = parse_integer_literal(t).ok_or_else(|| Error::Syntax {
                pos: pos + item.find(|c: char| !c.is_whitespace()).unwrap_or(0),
                msg: format!("expected an integer, found {t:?}"),
            })?;
            desc.push(v);
            pos += item.len() + 1;
        }
        return IntPolynomial::new(desc);
    }
    let asc = ExprParser::new(text).parse()?;
    IntPolynomial::from_ascending(asc)
}

fn is_plain_list(text: &str) -> bool {
    text.split(',').all(|t| parse_integer_literal(t.trim()).is_some())
}

fn parse_integer_literal(t: &str) -> Option<BigInt> {
    let t = t.replace('\u{2212}', "-");
    let body = t.strip_prefix(['+', '-']).unwrap_or(&t);
    if body.is_empty() || !body.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    t.parse().ok()
}

struct ExprParser<'a> {
    src: &'a str,
    pos: usize,
}

impl<'a> ExprParser<'a> {
    fn new(src: &'a str) -> Self {
        ExprParser { src, pos: 0 }
    }

    fn err<T>(&self, msg: impl Into<String>) -> Result<T> {
        Err(Error::Syntax { pos: self.pos, msg: msg.into() })
    }

    fn skip_ws(&mut self) {
        while let Some(c) = self.peek_raw() {
            if c.is_whitespace() {
                self.pos += c.len_utf8();
            } else {
                break;
            }
        }
    }

    fn peek_raw(&self) -> Option<char> {
        self.src[self.pos..].chars().next()
    }

    fn peek(&mut self) -> Option<char> {
        self.skip_ws();
        self.peek_raw().map(|c| if c == '\u{2212}' { '-' } else { c })
    }

    fn bump(&mut self) {
        if let Some(c) = self.peek_raw() {
            self.pos += c.len_utf8();
        }
    }

    fn parse(mut self) -> Result<Vec<BigInt>> {
        if self.peek().is_none() {
            return self.err("empty input");
        }
        let p = self.expr()?;
        if let Some(c) = self.peek() {
            return self.err(format!("unexpected character {c:?}"));
        }
        Ok(p)
    }

    fn expr(&mut self) -> Result<Vec<BigInt>> {
        let mut acc = match self.peek() {
            Some('-') => {
                self.bump();
                neg(&self.term()?)
            }
            Some('+') => {
                self.bump();
                self.term()?
            }
            _ => self.term()?,
        };
        loop {
            match self.peek() {
                Some('+') => {
                    self.bump();
                    acc = add(&acc, &self.term()?);
                }
                Some('-') => {
                    self.bump();
                    acc = sub(&acc, &self.term()?);
                }
                _ => return Ok(acc),
            }
        }
    }

    fn term(&mut self) -> Result<Vec<BigInt>> {
        let mut acc = self.factor()?;
        loop {
            match self.peek() {
                Some('*') => {
                    self.bump();
                    acc = mul(&acc, &self.factor()?);
                }
                // implicit multiplication: "2x", "3(x+1)", "(x-1)(x+1)"
                Some(c) if c == 'x' || c == 'X' || c == '(' || c.is_ascii_digit() => {
                    acc = mul(&acc, &self.factor()?);
                }
                _ => return Ok(acc),
            }
        }
    }

    fn factor(&mut self) -> Result<Vec<BigInt>> {
        let base = self.primary()?;
        if self.peek() == Some('^') {
            self.bump();
            self.skip_ws();
            let start = self.pos;
            while matches!(self.peek_raw(), Some(c) if c.is_ascii_digit()) {
                self.bump();
            }
            if start == self.pos {
                return self.err("expected a nonnegative integer exponent");
            }
            let e: u32 = match self.src[start..self.pos].parse() {
                Ok(e) if e <= 4096 => e,
                _ => return self.err("exponent too large"),
            };
            let mut acc = vec![BigInt::one()];
            for _ in 0..e {
                acc = mul(&acc, &base);
            }
            return Ok(acc);
        }
        Ok(base)
    }

    fn primary(&mut self) -> Result<Vec<BigInt>> {
        match self.peek() {
            Some('x') | Some('X') => {
                self.bump();
                Ok(vec![BigInt::zero(), BigInt::one()])
            }
            Some('(') => {
                self.bump();
                let inner = self.expr()?;
                if self.peek() != Some(')') {
                    return self.err("expected ')'");
                }
                self.bump();
                Ok(inner)
            }
            Some(c) if c.is_ascii_digit() => {
                let start = self.pos;
                while matches!(self.peek_raw(), Some(c) if c.is_ascii_digit()) {
                    self.bump();
                }
                Ok(vec![self.src[start..self.pos].parse().unwrap()])
            }
            Some(c) => self.err(format!("unexpected character {c:?}")),
            None => self.err("unexpected end of input"),
        }
    }
}

// ---------------------------------------------------------------------------
// Dense Z[x] / Q[x] helpers on constant-first coefficient vectors.

pub(crate) fn trim(p: &mut Vec<BigInt>) {
    while p.last().is_some_and(Zero::is_zero) {
        p.pop();
    }
}

pub(crate) fn add(a: &[BigInt], b: &[BigInt]) -> Vec<BigInt> {
    let n = a.len().max(b.len());
    let mut out: Vec<BigInt> = (0..n)
        .map(|i| a.get(i).cloned().unwrap_or_default() + b.get(i).cloned().unwrap_or_default())
        .collect();
    trim(&mut out);
    out
}

pub(crate) fn neg(a: &[BigInt]) -> Vec<BigInt> {
    a.iter().map(|c| -c).collect()
}

pub(crate) fn sub(a: &[BigInt], b: &[BigInt]) -> Vec<BigInt> {
    add(a, &neg(b))
}

pub(crate) fn mul(a: &[BigInt], b: &[BigInt]) -> Vec<BigInt> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![BigInt::zero(); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        if x.is_zero() {
            continue;
        }
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    trim(&mut out);
    out
}

pub(crate) fn derivative(a: &[BigInt]) -> Vec<BigInt> {
    let mut out: Vec<BigInt> = a.iter().enumerate().skip(1).map(|(i, c)| c * BigInt::from(i)).collect();
    trim(&mut out);
    out
}

pub(crate) fn content(a: &[BigInt]) -> BigInt {
    a.iter().fold(BigInt::zero(), |g, c| g.gcd(c))
}

/// Divide out the content and make the leading coefficient positive.
pub(crate) fn primitive_part(a: &[BigInt]) -> Vec<BigInt> {
    let mut g = content(a);
    if g.is_zero() {
        return a.to_vec();
    }
    if a.last().is_some_and(Signed::is_negative) {
        g = -g;
    }
    a.iter().map(|c| c / &g).collect()
}

/// Exact division in Z[x]: `Some(q)` iff `b` divides `a` with integer quotient.
pub(crate) fn exact_div(a: &[BigInt], b: &[BigInt]) -> Option<Vec<BigInt>> {
    if b.is_empty() {
        return None;
    }
    let mut r = a.to_vec();
    trim(&mut r);
    if r.len() < b.len() {
        return r.is_empty().then(Vec::new);
    }
    let lb = b.last().unwrap();
    let mut q = vec![BigInt::zero(); r.len() - b.len() + 1];
    while r.len() >= b.len() && !r.is_empty() {
        let shift = r.len() - b.len();
        let (c, rem) = r.last().unwrap().div_rem(lb);
        if !rem.is_zero() {
            return None;
        }
        for (j, bj) in b.iter().enumerate() {
            r[shift + j] -= &c * bj;
        }
        q[shift] = c;
        trim(&mut r);
    }
    r.is_empty().then_some(q)
}

/// Pseudo-remainder of `a` by `b` (`b` nonzero).
fn pseudo_rem(a: &[BigInt], b: &[BigInt]) -> Vec<BigInt> {
    let mut r = a.to_vec();
    trim(&mut r);
    let lb = b.last().unwrap().clone();
    while r.len() >= b.len() && !r.is_empty() {
        let shift = r.len() - b.len();
        let lr = r.last().unwrap().clone();
        for c in r.iter_mut() {
            *c *= &lb;
        }
        for (j, bj) in b.iter().enumerate() {
            r[shift + j] -= &lr * bj;
        }
        trim(&mut r);
    }
    r
}

/// Primitive gcd in Z[x] (positive leading coefficient).
pub(crate) fn gcd(a: &[BigInt], b: &[BigInt]) -> Vec<BigInt> {
    let mut x = a.to_vec();
    let mut y = b.to_vec();
    trim(&mut x);
    trim(&mut y);
    if x.is_empty() {
        return primitive_part(&y);
    }
    if y.is_empty() {
        return primitive_part(&x);
    }
    x = primitive_part(&x);
    y = primitive_part(&y);
    while !y.is_empty() {
        let r = pseudo_rem(&x, &y);
        x = y;
        y = if r.is_empty() { r } else { primitive_part(&r) };
    }
    primitive_part(&x)
}

pub(crate) fn eval_interval(asc: &[BigInt], x: &Interval) -> Interval {
    let mut acc = Interval::zero(x.prec());
    for c in asc.iter().rev() {
        acc = acc.mul(x).add(&Interval::from_int(c, x.prec()));
    }
    acc
}

pub(crate) fn eval_complex(asc: &[BigInt], z: &ComplexInterval) -> ComplexInterval {
    let p = z.prec();
    let mut acc = ComplexInterval::zero(p);
    for c in asc.iter().rev() {
        acc = acc.mul(z).add(&ComplexInterval::real(Interval::from_int(c, p)));
    }
    acc
}

pub(crate) fn sign_at_dyadic(asc: &[BigInt], m: &BigInt, k: u32) -> std::cmp::Ordering {
    // p(m/2^k)·2^{k·deg} = Σ c_i m^i 2^{k(deg-i)}
    let deg = asc.len() - 1;
    let mut acc = asc[deg].clone();
    for j in 1..=deg {
        acc = acc * m + (&asc[deg - j] << (k as usize * j));
    }
    acc.sign().cmp(&num_bigint::Sign::NoSign)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ints(v: &[i64]) -> Vec<BigInt> {
        v.iter().map(|&x| BigInt::from(x)).collect()
    }

    #[test]
    fn both_syntaxes_agree() {
        let a = parse_polynomial("x^2 - x - 1").unwrap();
        let b = parse_polynomial("1,-1,-1").unwrap();
        assert_eq!(a, b);
        assert_eq!(a.coeffs(), ints(&[1, -1, -1]));
    }

    #[test]
    fn normalization_examples() {
        assert_eq!(parse_polynomial("2*x - 3").unwrap().coeffs(), ints(&[2, -3]));
        assert_eq!(parse_polynomial("-x^2 + 2").unwrap().coeffs(), ints(&[1, 0, -2]));
        assert_eq!(parse_polynomial("2x-3").unwrap().coeffs(), ints(&[2, -3]));
        assert_eq!(parse_polynomial("4x^2 - 6").unwrap().coeffs(), ints(&[2, 0, -3]));
        assert_eq!(parse_polynomial("(x-1)(x+1)").unwrap().coeffs(), ints(&[1, 0, -1]));
        assert_eq!(parse_polynomial(" 1 , 0 , −2 ").unwrap().coeffs(), ints(&[1, 0, -2]));
    }

    #[test]
    fn lehmer_round_trips_through_display() {
        let p = parse_polynomial("x^10+x^9-x^7-x^6-x^5-x^4-x^3+x+1").unwrap();
        assert_eq!(p.degree(), 10);
        assert!(p.is_reciprocal());
        let q = parse_polynomial(&p.to_string()).unwrap();
        assert_eq!(p, q);
    }

    #[test]
    fn parse_errors() {
        assert!(matches!(parse_polynomial("x^"), Err(Error::Syntax { .. })));
        assert!(matches!(parse_polynomial("x + y"), Err(Error::Syntax { .. })));
        assert!(matches!(parse_polynomial(""), Err(Error::Syntax { .. })));
        assert!(matches!(parse_polynomial("1,a,2"), Err(Error::Syntax { .. })));
        assert!(matches!(parse_polynomial("0,0"), Err(Error::ZeroPolynomial)));
        assert!(matches!(parse_polynomial("x - x"), Err(Error::ZeroPolynomial)));
        assert!(matches!(parse_polynomial("7"), Err(Error::DegreeZero)));
        assert!(matches!(parse_polynomial("0,5"), Err(Error::DegreeZero)));
    }

    #[test]
    fn predicates() {
        let p = parse_polynomial("x^4 - 3x^2 + 1").unwrap();
        assert!(p.is_even());
        assert_eq!(p.exponent_gcd(), 2);
        assert_eq!(p.even_part().unwrap().coeffs(), ints(&[1, -3, 1]));
        let q = parse_polynomial("x^3 - x - 2").unwrap();
        assert!(!q.is_even());
        assert_eq!(q.height(), BigInt::from(2));
        assert_eq!(parse_polynomial("x^3-2").unwrap().exponent_gcd(), 3);
    }

    #[test]
    fn gcd_and_division() {
        let a = ints(&[-1, 0, 1]); // x^2 - 1
        let b = ints(&[1, 2, 1]); // (x+1)^2
        assert_eq!(gcd(&a, &b), ints(&[1, 1]));
        assert_eq!(exact_div(&a, &ints(&[-1, 1])), Some(ints(&[1, 1])));
        assert_eq!(exact_div(&a, &ints(&[-2, 1])), None);
        assert_eq!(exact_div(&ints(&[-3, 2]), &ints(&[-3, 2])), Some(ints(&[1])));
    }

    #[test]
    fn dyadic_sign() {
        let p = parse_polynomial("x^2 - 2").unwrap();
        // 1.5^2 - 2 > 0, 1.25^2 - 2 < 0
        assert_eq!(p.sign_at_dyadic(&BigInt::from(3), 1), std::cmp::Ordering::Greater);
        assert_eq!(p.sign_at_dyadic(&BigInt::from(5), 2), std::cmp::Ordering::Less);
        assert_eq!(p.sign_at_dyadic(&BigInt::from(-6), 2), std::cmp::Ordering::Greater);
    }
}
