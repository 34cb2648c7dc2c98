//! Irreducibility, conjugates, the choice of θ, and classification.

use std::cmp::Ordering;
use std::sync::Arc;

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::Serialize;

use crate::config::Settings;
use crate::error::{Error, Result};
use crate::field::NumberField;
use crate::interval::{ComplexInterval, Enclosed, Interval};
use crate::poly::{self, IntPolynomial};
use crate::roots::{certify_on_unit_circle, isolate_roots, RootEnclosure};

/// Outcome of the factor search.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Verdict {
    Irreducible,
    Reducible(IntPolynomial),
    /// Degree above the configured cap; nothing was decided.
    Inconclusive,
}

/// Position of a conjugate relative to the unit circle.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ModulusClass {
    Inside,
    OnCircle,
    Outside,
}

/// Certified enclosures of all roots of a squarefree polynomial.
pub fn conjugates(p: &IntPolynomial, bits: u32, max_bits: u32) -> Result<Vec<RootEnclosure>> {
    isolate_roots(p, bits, max_bits.max(bits))
}

pub fn irreducibility_check(p: &IntPolynomial, settings: &Settings) -> Result<Verdict> {
    let d = p.degree();
    if d == 1 {
        return Ok(Verdict::Irreducible);
    }
    if p.constant().is_zero() {
        return Ok(Verdict::Reducible(IntPolynomial::new([1, 0])?));
    }
    let g = poly::gcd(p.ascending(), &p.derivative_ascending());
    if g.len() > 1 {
        return Ok(Verdict::Reducible(IntPolynomial::from_ascending(g)?));
    }
    if d > settings.degree_cap {
        return Ok(Verdict::Inconclusive);
    }
    let mut bits = settings.precision_bits;
    loop {
        let roots = isolate_roots(p, bits, settings.max_bits())?;
        match search_factor(p, &roots, 1..=d / 2, None) {
            Search::Found(f) => return Ok(Verdict::Reducible(IntPolynomial::from_ascending(f)?)),
            Search::NotFound => return Ok(Verdict::Irreducible),
            Search::Undecided => {}
        }
        if bits >= settings.max_bits() {
            return Err(Error::precision(bits, "factor reconstruction"));
        }
        bits = (bits * 2).min(settings.max_bits());
    }
}

enum Search {
    Found(Vec<BigInt>),
    NotFound,
    Undecided,
}

/// Roots grouped so every subset is closed under complex conjugation.
struct Unit {
    idx: Vec<usize>,
    re_sum: f64,
    rad: f64,
}

fn units(roots: &[RootEnclosure]) -> Vec<Unit> {
    let mut used = vec![false; roots.len()];
    let mut out = Vec::new();
    for i in 0..roots.len() {
        if used[i] {
            continue;
        }
        used[i] = true;
        let ci = roots[i].center_f64();
        let mut idx = vec![i];
        if !roots[i].is_real() {
            // partner: the nearest unused root to the mirror image
            let j = (0..roots.len())
                .filter(|&j| !used[j] && !roots[j].is_real())
                .min_by(|&a, &b| {
                    let da = (roots[a].center_f64() - ci.conj()).norm();
                    let db = (roots[b].center_f64() - ci.conj()).norm();
                    da.total_cmp(&db)
                })
                .expect("non-real roots come in pairs");
            used[j] = true;
            idx.push(j);
        }
        let re_sum = idx.iter().map(|&k| roots[k].center_f64().re).sum();
        let rad = idx.iter().map(|&k| roots[k].radius_f64()).sum();
        out.push(Unit { idx, re_sum, rad });
    }
    out
}

/// Look for an integer factor `lc·Π_{i∈S}(x − z_i)` with `|S|` in `sizes`,
/// optionally requiring root `must ∈ S`.
fn search_factor(
    p: &IntPolynomial,
    roots: &[RootEnclosure],
    sizes: std::ops::RangeInclusive<usize>,
    must: Option<usize>,
) -> Search {
    let us = units(roots);
    let lc = p.leading().to_f64().unwrap_or(f64::MAX);
    let forced = must.map(|m| us.iter().position(|u| u.idx.contains(&m)).unwrap());
    let abs_scale: f64 = roots.iter().map(|r| r.center_f64().norm()).sum::<f64>() * lc + 1.0;
    let mut undecided = false;
    for k in sizes {
        let mut chosen: Vec<usize> = forced.into_iter().collect();
        let (size0, sum0, rad0) = match forced {
            Some(f) => (us[f].idx.len(), us[f].re_sum, us[f].rad),
            None => (0, 0.0, 0.0),
        };
        let mut ctx = Ctx { p, roots, us: &us, lc, abs_scale, k, forced, undecided: false, found: None };
        ctx.walk(0, size0, sum0, rad0, &mut chosen);
        if let Some(f) = ctx.found {
            return Search::Found(f);
        }
        undecided |= ctx.undecided;
    }
    if undecided {
        Search::Undecided
    } else {
        Search::NotFound
    }
}

struct Ctx<'a> {
    p: &'a IntPolynomial,
    roots: &'a [RootEnclosure],
    us: &'a [Unit],
    lc: f64,
    abs_scale: f64,
    k: usize,
    forced: Option<usize>,
    undecided: bool,
    found: Option<Vec<BigInt>>,
}

impl Ctx<'_> {
    fn walk(&mut self, start: usize, size: usize, sum: f64, rad: f64, chosen: &mut Vec<usize>) {
        if self.found.is_some() {
            return;
        }
        if size == self.k {
            self.test(sum, rad, chosen);
            return;
        }
        for u in start..self.us.len() {
            if Some(u) == self.forced {
                continue;
            }
            let s = size + self.us[u].idx.len();
            if s > self.k {
                continue;
            }
            chosen.push(u);
            self.walk(u + 1, s, sum + self.us[u].re_sum, rad + self.us[u].rad, chosen);
            chosen.pop();
            if self.found.is_some() {
                return;
            }
        }
    }

    fn test(&mut self, sum: f64, rad: f64, chosen: &[usize]) {
        // the x^{k-1} coefficient −lc·Σz must be an integer
        let t = self.lc * sum;
        let tol = self.lc * rad + 1e-7 * self.abs_scale;
        if (t - t.round()).abs() > tol {
            return;
        }
        let idx: Vec<usize> = chosen.iter().flat_map(|&u| self.us[u].idx.iter().copied()).collect();
        match product_coefficients(self.p, self.roots, &idx) {
            Some(Some(f)) => {
                if poly::exact_div(self.p.ascending(), &f).is_some() {
                    self.found = Some(poly::primitive_part(&f));
                }
            }
            Some(None) => {}
            None => self.undecided = true,
        }
    }
}

/// Coefficients of `lc·Π_{i∈idx}(x − z_i)`: `Some(Some(c))` when each
/// coefficient enclosure holds exactly one integer, `Some(None)` when some
/// enclosure holds none, `None` when an enclosure is too wide to decide.
fn product_coefficients(p: &IntPolynomial, roots: &[RootEnclosure], idx: &[usize]) -> Option<Option<Vec<BigInt>>> {
    let prec = roots[idx[0]].prec();
    let mut acc = vec![ComplexInterval::real(Interval::from_int(p.leading(), prec))];
    for &i in idx {
        let z = roots[i].to_complex_interval().neg();
        let mut next = vec![ComplexInterval::zero(prec); acc.len() + 1];
        for (j, c) in acc.iter().enumerate() {
            next[j + 1] = next[j + 1].add(c);
            next[j] = next[j].add(&c.mul(&z));
        }
        acc = next;
    }
    let mut out = Vec::with_capacity(acc.len());
    let mut wide = false;
    for c in &acc {
        let lo = crate::interval::ceil_shr(c.re.lo_scaled(), prec);
        let hi = crate::interval::floor_shr(c.re.hi_scaled(), prec);
        match lo.cmp(&hi) {
            Ordering::Greater => return Some(None),
            Ordering::Equal => out.push(lo),
            Ordering::Less => wide = true,
        }
    }
    if wide {
        None
    } else {
        Some(Some(out))
    }
}

/// θ with its conjugates, Mahler measure and position data.
#[derive(Clone, Debug)]
pub struct AlgebraicNumber {
    minpoly: IntPolynomial,
    conjugates: Vec<RootEnclosure>,
    classes: Vec<ModulusClass>,
    s: usize,
    mahler: Interval,
    in_range: bool,
    field: Arc<NumberField>,
    settings: Settings,
}

impl AlgebraicNumber {
    /// Check irreducibility, isolate the conjugates and select θ.
    pub fn from_minpoly(p: &IntPolynomial, settings: &Settings) -> Result<Self> {
        match irreducibility_check(p, settings)? {
            Verdict::Irreducible => {}
            Verdict::Reducible(factor) => return Err(Error::Reducible { factor }),
            Verdict::Inconclusive => {
                return Err(Error::DegreeCapExceeded { degree: p.degree(), cap: settings.degree_cap })
            }
        }
        let roots = conjugates(p, settings.precision_bits, settings.max_bits())?;
        select_theta(p, roots, settings)
    }

    pub fn parse(text: &str, settings: &Settings) -> Result<Self> {
        Self::from_minpoly(&poly::parse_polynomial(text)?, settings)
    }

    pub fn minpoly(&self) -> &IntPolynomial {
        &self.minpoly
    }

    pub fn degree(&self) -> usize {
        self.minpoly.degree()
    }

    /// Number of non-real conjugates.
    pub fn s(&self) -> usize {
        self.s
    }

    /// All conjugates; θ comes first.
    pub fn conjugates(&self) -> &[RootEnclosure] {
        &self.conjugates
    }

    pub fn modulus_classes(&self) -> &[ModulusClass] {
        &self.classes
    }

    pub fn theta_enclosure(&self) -> &RootEnclosure {
        &self.conjugates[0]
    }

    /// θ to `prec` bits.
    pub fn theta(&self, prec: u32) -> Interval {
        self.field.theta(prec)
    }

    pub fn theta_f64(&self) -> f64 {
        self.field.theta(64).mid_f64()
    }

    pub fn mahler(&self) -> Enclosed {
        Enclosed::from(&self.mahler)
    }

    pub fn mahler_interval(&self) -> &Interval {
        &self.mahler
    }

    /// False when θ ≥ 2; everything stays defined for θ > 1.
    pub fn in_range_1_2(&self) -> bool {
        self.in_range
    }

    pub fn field(&self) -> &NumberField {
        &self.field
    }

    pub fn settings(&self) -> &Settings {
        &self.settings
    }

    /// Re-isolate the conjugates at `bits`, keeping θ first and the
    /// unit-circle decisions already made.
    pub fn conjugates_at(&self, bits: u32) -> Result<Vec<RootEnclosure>> {
        if bits <= self.conjugates[0].prec() {
            return Ok(self.conjugates.clone());
        }
        let max = self.settings.max_bits().max(bits);
        let fresh = isolate_roots(&self.minpoly, bits, max)?;
        // match to the stored discs so indices stay aligned
        let mut out = Vec::with_capacity(fresh.len());
        for old in &self.conjugates {
            let c = old.center_f64();
            let best = fresh
                .iter()
                .min_by(|a, b| (a.center_f64() - c).norm().total_cmp(&(b.center_f64() - c).norm()))
                .unwrap();
            out.push(best.clone());
        }
        Ok(out)
    }
}

/// Pick θ as the largest real root, certify θ > 1, decide every modulus
/// against 1 and compute the Mahler measure.
pub fn select_theta(p: &IntPolynomial, roots: Vec<RootEnclosure>, settings: &Settings) -> Result<AlgebraicNumber> {
    let max_bits = settings.max_bits();
    let mut roots = roots;
    let mut bits = roots.first().map_or(settings.precision_bits, |r| r.prec().max(settings.precision_bits));
    // θ > 1
    loop {
        let Some(first) = roots.first().filter(|r| r.is_real()) else {
            return Err(Error::NoRealRootAboveOne);
        };
        let iv = first.real_interval();
        match iv.cmp_certified(&Interval::one(iv.prec())) {
            Some(Ordering::Greater) => break,
            Some(_) => return Err(Error::NoRealRootAboveOne),
            None if p.degree() == 1 => return Err(Error::NoRealRootAboveOne),
            None => {}
        }
        if bits >= max_bits {
            return Err(Error::precision(bits, "θ against 1"));
        }
        bits = (bits * 2).min(max_bits);
        roots = isolate_roots(p, bits, max_bits)?;
    }
    let (roots, classes) = classify_moduli(p, roots, settings)?;
    let s = roots.iter().filter(|r| !r.is_real()).count();
    let prec = roots[0].prec();
    let mut mahler = Interval::one(prec);
    for (r, c) in roots.iter().zip(&classes) {
        if *c == ModulusClass::Outside {
            mahler = mahler.mul(&r.modulus());
        }
    }
    let field = NumberField::new(p.clone(), roots[0].real_interval(), settings.precision_bits, max_bits)?;
    let in_range = field.cmp(&field.x_pow(1), &field.from_integer(2))? == Ordering::Less;
    Ok(AlgebraicNumber {
        minpoly: p.clone(),
        conjugates: roots,
        classes,
        s,
        mahler,
        in_range,
        field: Arc::new(field),
        settings: settings.clone(),
    })
}

fn classify_moduli(
    p: &IntPolynomial,
    mut roots: Vec<RootEnclosure>,
    settings: &Settings,
) -> Result<(Vec<RootEnclosure>, Vec<ModulusClass>)> {
    let max_bits = settings.max_bits();
    loop {
        let bits = roots[0].prec();
        let mut classes = Vec::with_capacity(roots.len());
        for i in 0..roots.len() {
            let m = roots[i].modulus();
            let c = match m.cmp_certified(&Interval::one(m.prec())) {
                Some(Ordering::Greater) => Some(ModulusClass::Outside),
                Some(Ordering::Less) => Some(ModulusClass::Inside),
                _ if certify_on_unit_circle(p, &roots, i) => Some(ModulusClass::OnCircle),
                _ => None,
            };
            match c {
                Some(c) => classes.push(c),
                None => break,
            }
        }
        if classes.len() == roots.len() {
            return Ok((roots, classes));
        }
        if bits >= max_bits {
            return Err(Error::precision(bits, "conjugate modulus against 1"));
        }
        roots = isolate_roots(p, (bits * 2).min(max_bits), max_bits)?;
    }
}

fn serialize_bigint<S: serde::Serializer>(v: &BigInt, s: S) -> std::result::Result<S::Ok, S::Error> {
    match v.to_i64() {
        Some(x) => s.serialize_i64(x),
        None => s.serialize_str(&v.to_string()),
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ClassificationReport {
    pub is_algebraic_integer: bool,
    pub is_unit: bool,
    #[serde(serialize_with = "serialize_bigint")]
    pub height: BigInt,
    pub is_pisot: bool,
    pub is_salem: bool,
    pub is_perron: bool,
    pub is_garsia: bool,
    pub has_minus_theta_conjugate: bool,
    pub in_range_1_2: bool,
    pub degree: usize,
    pub s: usize,
    pub mahler: Enclosed,
}

pub fn classify(a: &AlgebraicNumber) -> Result<ClassificationReport> {
    let p = a.minpoly();
    let monic = p.is_monic();
    let c0 = p.constant().abs();
    let others = &a.classes[1..];
    let outside = a.classes.iter().filter(|&&c| c == ModulusClass::Outside).count();
    Ok(ClassificationReport {
        is_algebraic_integer: monic,
        is_unit: monic && c0.is_one(),
        height: p.height(),
        is_pisot: monic && others.iter().all(|&c| c == ModulusClass::Inside),
        is_salem: monic && p.is_reciprocal() && p.degree() >= 4 && outside == 1,
        is_perron: is_perron(a)?,
        is_garsia: monic && c0 == BigInt::from(2) && outside == a.degree(),
        has_minus_theta_conjugate: p.is_even(),
        in_range_1_2: a.in_range,
        degree: a.degree(),
        s: a.s,
        mahler: a.mahler(),
    })
}

/// θ strictly exceeds every other conjugate in modulus.
fn is_perron(a: &AlgebraicNumber) -> Result<bool> {
    if a.degree() == 1 {
        return Ok(true);
    }
    // p(x) = q(x^k) with k > 1 puts θ·e^{2πi/k} among the conjugates
    if a.minpoly.exponent_gcd() > 1 {
        return Ok(false);
    }
    let max_bits = a.settings.max_bits();
    let mut roots = a.conjugates.clone();
    loop {
        let bits = roots[0].prec();
        let theta = roots[0].real_interval();
        let mut decided = true;
        for r in &roots[1..] {
            match r.modulus().cmp_certified(&theta) {
                Some(Ordering::Less) => {}
                Some(_) => return Ok(false),
                None => decided = false,
            }
        }
        if decided {
            return Ok(true);
        }
        if bits >= max_bits {
            return Err(Error::precision(bits, "conjugate modulus against θ"));
        }
        roots = a.conjugates_at((bits * 2).min(max_bits))?;
    }
}

/// One square-root step: the minimal polynomial of `√θ`, taken as the factor
/// of `p(x^2)` whose roots include the positive real square root of θ.
pub fn sqrt_step(a: &AlgebraicNumber) -> Result<AlgebraicNumber> {
    let settings = &a.settings;
    let p2 = a.minpoly.compose_square();
    if p2.degree() > settings.degree_cap {
        return Err(Error::DegreeCapExceeded { degree: p2.degree(), cap: settings.degree_cap });
    }
    let mut bits = settings.precision_bits;
    let d = a.degree();
    let factor = loop {
        let roots = isolate_roots(&p2, bits, settings.max_bits())?;
        // √θ is the largest real root of p(x^2), hence first
        match search_factor(&p2, &roots, 1..=d, Some(0)) {
            Search::Found(f) => break IntPolynomial::from_ascending(f)?,
            Search::NotFound => break p2.clone(),
            Search::Undecided => {}
        }
        if bits >= settings.max_bits() {
            return Err(Error::precision(bits, "square-root factor"));
        }
        bits = (bits * 2).min(settings.max_bits());
    };
    let roots = conjugates(&factor, settings.precision_bits, settings.max_bits())?;
    select_theta(&factor, roots, settings)
}

/// Result of [`sqrt_tower_reduce`]: `alpha^(2^steps) = θ`.
#[derive(Clone, Debug)]
pub struct Reduction {
    pub alpha: AlgebraicNumber,
    pub steps: usize,
}

/// Extract square roots while the minimal polynomial has only even powers.
pub fn sqrt_tower_reduce(a: &AlgebraicNumber, max_steps: usize) -> Result<Reduction> {
    let mut cur = a.clone();
    for steps in 0..=max_steps {
        if !cur.minpoly.is_even() {
            return Ok(Reduction { alpha: cur, steps });
        }
        if steps == max_steps {
            break;
        }
        cur = sqrt_step(&cur)?;
    }
    Err(Error::ReductionDidNotTerminate { steps: max_steps })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn num(text: &str) -> AlgebraicNumber {
        AlgebraicNumber::parse(text, &Settings::default()).unwrap()
    }

    fn verdict(text: &str) -> Verdict {
        irreducibility_check(&poly::parse_polynomial(text).unwrap(), &Settings::default()).unwrap()
    }

    #[test]
    fn irreducibility_examples() {
        assert_eq!(verdict("x^2 - x - 1"), Verdict::Irreducible);
        assert_eq!(verdict("x^4 - 2x^2"), Verdict::Reducible(poly::parse_polynomial("x").unwrap()));
        assert_eq!(verdict("x^2 - 1"), Verdict::Reducible(poly::parse_polynomial("x - 1").unwrap()));
        assert_eq!(verdict("x^10+x^9-x^7-x^6-x^5-x^4-x^3+x+1"), Verdict::Irreducible);
        // (x^2 + 1)(x^3 - x - 1): no rational root, factor found from a conjugate pair
        let Verdict::Reducible(f) = verdict("(x^2+1)(x^3-x-1)") else { panic!() };
        assert!([poly::parse_polynomial("x^2+1").unwrap(), poly::parse_polynomial("x^3-x-1").unwrap()].contains(&f));
        // x^4 + 4 = (x^2 + 2x + 2)(x^2 − 2x + 2)
        assert!(matches!(verdict("x^4 + 4"), Verdict::Reducible(_)));
        assert_eq!(verdict("x^4 - 10x^2 + 1"), Verdict::Irreducible);
    }

    #[test]
    fn degree_cap_is_inconclusive() {
        let s = Settings { degree_cap: 4, ..Settings::default() };
        let p = poly::parse_polynomial("x^5 - x - 1").unwrap();
        assert_eq!(irreducibility_check(&p, &s).unwrap(), Verdict::Inconclusive);
        assert!(matches!(AlgebraicNumber::from_minpoly(&p, &s), Err(Error::DegreeCapExceeded { .. })));
    }

    #[test]
    fn selects_theta() {
        let g = num("x^2 - x - 1");
        assert!((g.theta_f64() - 1.618_033_988_749_895).abs() < 1e-15);
        assert_eq!((g.degree(), g.s()), (2, 0));
        let l = num("x^10+x^9-x^7-x^6-x^5-x^4-x^3+x+1");
        assert!((l.theta_f64() - 1.176_280_818_259_917).abs() < 1e-14);
        assert_eq!((l.degree(), l.s()), (10, 8));
        assert!(matches!(AlgebraicNumber::parse("x^2 + 1", &Settings::default()), Err(Error::NoRealRootAboveOne)));
        assert!(matches!(AlgebraicNumber::parse("2x - 1", &Settings::default()), Err(Error::NoRealRootAboveOne)));
        assert!(!num("x^2 - 3x + 1").in_range_1_2());
    }

    #[test]
    fn mahler_examples() {
        assert!(num("x^2 - x - 1").mahler().contains(1.618_033_988_749_895));
        let m = num("x^2 - 2").mahler();
        assert!(m.contains(2.0) && m.err < 1e-12);
        let l = num("x^10+x^9-x^7-x^6-x^5-x^4-x^3+x+1");
        assert!(l.mahler().contains(l.theta_f64()));
        assert!((num("2x - 3").mahler().value - 1.5).abs() < 1e-15);
    }

    #[test]
    fn classification_examples() {
        let g = classify(&num("x^2 - x - 1")).unwrap();
        assert!(g.is_pisot && !g.is_salem && g.is_perron && g.is_unit && !g.is_garsia);
        assert_eq!(g.height, BigInt::one());
        let l = classify(&num("x^10+x^9-x^7-x^6-x^5-x^4-x^3+x+1")).unwrap();
        assert!(l.is_salem && !l.is_pisot && l.is_perron && l.is_unit);
        let ga = classify(&num("x^3 - x - 2")).unwrap();
        assert!(ga.is_garsia && !ga.is_pisot);
        let t = classify(&num("x^2 - 2")).unwrap();
        assert!(!t.is_perron && t.has_minus_theta_conjugate);
        let r = classify(&num("2x - 3")).unwrap();
        assert!(!r.is_algebraic_integer && r.is_perron);
        assert!(classify(&num("x^3 - x - 1")).unwrap().is_pisot);
    }

    #[test]
    fn sqrt_reduction() {
        let g = num("x^2 - x - 1");
        let r = sqrt_tower_reduce(&g, 6).unwrap();
        assert_eq!(r.steps, 0);
        assert_eq!(r.alpha.minpoly(), g.minpoly());
        let e = sqrt_tower_reduce(&num("x^2 - 3"), 2);
        assert!(matches!(e, Err(Error::ReductionDidNotTerminate { steps: 2 })));
        // φ² has minimal polynomial x^2 − 3x + 1; its square root is φ
        let s = sqrt_step(&num("x^2 - 3x + 1")).unwrap();
        assert_eq!(s.minpoly(), g.minpoly());
        // √φ: p(x^2) = x^4 − x^2 − 1 is irreducible
        let s = sqrt_step(&g).unwrap();
        assert_eq!(s.minpoly(), &poly::parse_polynomial("x^4 - x^2 - 1").unwrap());
        assert!((s.theta_f64() - 1.618_033_988_749_895f64.sqrt()).abs() < 1e-14);
    }
}
