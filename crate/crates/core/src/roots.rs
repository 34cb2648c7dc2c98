//! Certified isolation of all complex roots of a squarefree integer
//! polynomial.
//!
//! Approximations come from the Aberth–Ehrlich iteration (first in `f64`,
//! then polished in fixed-point big-integer arithmetic). They are certified
//! with Smith's Gershgorin-type bound: for distinct approximations `z_i` put
//! `w_i = p(z_i) / (lc · Π_{j≠i} (z_i − z_j))`; every root lies in the union
//! of the discs `D(z_i, d·|w_i|)` and a connected component made of `k`
//! discs holds exactly `k` roots. Pairwise disjoint discs therefore isolate
//! one root each. The `w_i` are bounded with outward-rounded intervals.

use std::cmp::Ordering;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_traits::{Signed, Zero};

use crate::error::{Error, Result};
use crate::interval::{scaled_to_f64, ComplexInterval, Interval};
use crate::poly::{derivative, eval_complex, IntPolynomial};

/// A closed disc `D(center, radius)` containing exactly one root.
///
/// Center and radius are dyadic numbers with `prec` fractional bits.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RootEnclosure {
    re: BigInt,
    im: BigInt,
    rad: BigInt,
    prec: u32,
    is_real: bool,
}

impl RootEnclosure {
    pub fn is_real(&self) -> bool {
        self.is_real
    }

    pub fn prec(&self) -> u32 {
        self.prec
    }

    pub fn center_f64(&self) -> Complex64 {
        Complex64::new(
            crate::interval::Interval::from_scaled(self.re.clone(), self.prec).mid_f64(),
            crate::interval::Interval::from_scaled(self.im.clone(), self.prec).mid_f64(),
        )
    }

    pub fn radius_f64(&self) -> f64 {
        scaled_to_f64(&self.rad, self.prec, true)
    }

    /// Rectangle enclosing the disc.
    pub fn to_complex_interval(&self) -> ComplexInterval {
        let p = self.prec;
        ComplexInterval::new(
            Interval::from_raw(&self.re - &self.rad, &self.re + &self.rad, p),
            Interval::from_raw(&self.im - &self.rad, &self.im + &self.rad, p),
        )
    }

    /// Real enclosure `[c − r, c + r]`; only meaningful for real roots.
    pub fn real_interval(&self) -> Interval {
        Interval::from_raw(&self.re - &self.rad, &self.re + &self.rad, self.prec)
    }

    /// Enclosure of the modulus `|z|` of the root.
    pub fn modulus(&self) -> Interval {
        let p = self.prec;
        let c = ComplexInterval::new(
            Interval::from_scaled(self.re.clone(), p),
            Interval::from_scaled(self.im.clone(), p),
        )
        .abs();
        let r = Interval::from_raw(-&self.rad, self.rad.clone(), p);
        let m = c.add(&r);
        m.max(&Interval::zero(p))
    }

    /// Enclosure of the argument in `[-π, π]`, as `f64` bounds. Only used for
    /// diagnostics.
    pub fn arg_f64(&self) -> f64 {
        self.center_f64().arg()
    }

    /// Center rounded to `prec` bits as a point enclosure.
    pub fn center(&self) -> ComplexInterval {
        ComplexInterval::new(
            Interval::from_scaled(self.re.clone(), self.prec),
            Interval::from_scaled(self.im.clone(), self.prec),
        )
    }

    pub fn is_upper(&self) -> bool {
        self.im.is_positive()
    }

    fn disjoint(&self, other: &RootEnclosure) -> bool {
        let dx = &self.re - &other.re;
        let dy = &self.im - &other.im;
        let d2 = &dx * &dx + &dy * &dy;
        let rr = &self.rad + &other.rad;
        d2 > &rr * &rr
    }
}

/// `ceil(sqrt(dx^2 + dy^2))`.
fn dist_up(dx: &BigInt, dy: &BigInt) -> BigInt {
    let d2 = dx * dx + dy * dy;
    let r = d2.sqrt();
    if &r * &r == d2 {
        r
    } else {
        r + 1
    }
}

/// Isolate all roots of the squarefree polynomial `p`, with radii at most
/// `2^(1−bits)·max(1, |center|)`. Gives up with `PrecisionExhausted` once the
/// working precision would exceed `max_bits`.
pub fn isolate_roots(p: &IntPolynomial, bits: u32, max_bits: u32) -> Result<Vec<RootEnclosure>> {
    let asc = p.ascending();
    let d = p.degree();
    if d == 1 {
        // −c0/c1, enclosed exactly
        let prec = bits + 8;
        let iv = Interval::from_ratio(&-&asc[0], &asc[1], prec);
        let re = iv.lo_scaled().clone();
        let rad = iv.width_scaled();
        return Ok(vec![RootEnclosure { re, im: BigInt::zero(), rad, prec, is_real: true }]);
    }
    let mut approx = aberth_f64(&p.ascending_f64());
    let log_d = usize::BITS - d.leading_zeros();
    let mut prec = bits + 32 + 2 * log_d;
    loop {
        let pts = aberth_mp(asc, &approx, prec);
        if let Some(discs) = certify(asc, &pts, prec, bits) {
            return Ok(discs);
        }
        // re-seed from the polished points so the next round starts close
        approx = pts.iter().map(|z| Complex64::new(z.re.mid_f64(), z.im.mid_f64())).collect();
        if prec >= max_bits {
            return Err(Error::precision(prec, format!("root isolation of {p}")));
        }
        prec = (prec * 2).min(max_bits);
    }
}

fn initial_points(asc: &[f64]) -> Vec<Complex64> {
    let d = asc.len() - 1;
    let lc = asc[d].abs();
    let c0 = asc[0].abs().max(f64::MIN_POSITIVE);
    let r = (c0 / lc).powf(1.0 / d as f64).clamp(0.1, 1e6);
    (0..d)
        .map(|k| {
            let t = std::f64::consts::TAU * k as f64 / d as f64 + 0.4;
            Complex64::from_polar(r * (1.0 + 0.01 * k as f64), t)
        })
        .collect()
}

fn aberth_f64(asc: &[f64]) -> Vec<Complex64> {
    let d = asc.len() - 1;
    let dasc: Vec<f64> = asc.iter().enumerate().skip(1).map(|(i, c)| c * i as f64).collect();
    let eval = |c: &[f64], z: Complex64| c.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, &a| acc * z + a);
    let mut z = initial_points(asc);
    for _ in 0..500 {
        let mut worst = 0f64;
        for i in 0..d {
            let pz = eval(asc, z[i]);
            let dz = eval(&dasc, z[i]);
            if pz.norm() == 0.0 {
                continue;
            }
            let ratio = pz / dz;
            let s: Complex64 = (0..d).filter(|&j| j != i).map(|j| 1.0 / (z[i] - z[j])).sum();
            let w = ratio / (1.0 - ratio * s);
            if w.is_finite() {
                z[i] -= w;
                worst = worst.max(w.norm() / z[i].norm().max(1.0));
            }
        }
        if worst < 1e-15 {
            break;
        }
    }
    if z.iter().any(|v| !v.is_finite()) {
        return initial_points(asc);
    }
    z
}

fn aberth_mp(asc: &[BigInt], seed: &[Complex64], prec: u32) -> Vec<ComplexInterval> {
    let d = seed.len();
    let dasc = derivative(asc);
    let mut z: Vec<ComplexInterval> = seed
        .iter()
        .map(|c| ComplexInterval::new(Interval::from_f64(c.re, prec), Interval::from_f64(c.im, prec)))
        .collect();
    let one = ComplexInterval::one(prec);
    let tol = BigInt::from(1u8) << 6u32;
    let mut quiet_rounds = 0;
    for _ in 0..200 {
        let mut done = true;
        for i in 0..d {
            let pz = eval_complex(asc, &z[i]).midpoint();
            if pz.re.lo_scaled().is_zero() && pz.im.lo_scaled().is_zero() {
                continue;
            }
            let dz = eval_complex(&dasc, &z[i]).midpoint();
            let Some(ratio) = pz.div(&dz).map(|r| r.midpoint()) else { continue };
            let mut s = ComplexInterval::zero(prec);
            let mut ok = true;
            for j in 0..d {
                if j == i {
                    continue;
                }
                match one.div(&z[i].sub(&z[j])) {
                    Some(q) => s = s.add(&q.midpoint()),
                    None => ok = false,
                }
            }
            if !ok {
                continue;
            }
            let denom = one.sub(&ratio.mul(&s).midpoint());
            let Some(w) = ratio.div(&denom).map(|w| w.midpoint()) else { continue };
            if w.re.lo_scaled().abs() > tol || w.im.lo_scaled().abs() > tol {
                done = false;
            }
            z[i] = z[i].sub(&w).midpoint();
        }
        if done {
            quiet_rounds += 1;
            if quiet_rounds >= 2 {
                break;
            }
        }
    }
    z
}

fn certify(asc: &[BigInt], pts: &[ComplexInterval], prec: u32, bits: u32) -> Option<Vec<RootEnclosure>> {
    let d = pts.len();
    let lc = asc.last().unwrap();
    let mut discs: Vec<RootEnclosure> = Vec::with_capacity(d);
    for i in 0..d {
        let num = eval_complex(asc, &pts[i]).abs();
        let mut den = ComplexInterval::real(Interval::from_int(lc, prec));
        for j in 0..d {
            if j != i {
                den = den.mul(&pts[i].sub(&pts[j]));
            }
        }
        let den = den.abs();
        if !den.lo_scaled().is_positive() {
            return None;
        }
        let w = Interval::from_scaled(num.hi_scaled().clone(), prec)
            .div(&Interval::from_scaled(den.lo_scaled().clone(), prec))?;
        let rad = w.hi_scaled() * BigInt::from(d) + 1;
        discs.push(RootEnclosure {
            re: pts[i].re.lo_scaled().clone(),
            im: pts[i].im.lo_scaled().clone(),
            rad,
            prec,
            is_real: false,
        });
    }
    for i in 0..d {
        for j in i + 1..d {
            if !discs[i].disjoint(&discs[j]) {
                return None;
            }
        }
    }
    // Real roots: recentre on the axis; the widened disc still meets no other
    // disc, so it holds one root, which must equal its own conjugate.
    let original = discs.clone();
    for i in 0..d {
        let di = &original[i];
        if di.im.abs() > di.rad {
            continue;
        }
        let widened = RootEnclosure {
            re: di.re.clone(),
            im: BigInt::zero(),
            rad: &di.rad + di.im.abs(),
            prec,
            is_real: true,
        };
        if (0..d).all(|j| j == i || widened.disjoint(&original[j])) {
            discs[i] = widened;
        } else {
            return None;
        }
    }
    // Non-real roots: mirror each upper-half disc onto its partner.
    let mut paired = vec![false; d];
    for i in 0..d {
        if discs[i].is_real || !discs[i].im.is_positive() || paired[i] {
            continue;
        }
        let mirror = RootEnclosure { im: -&discs[i].im, ..discs[i].clone() };
        let partners: Vec<usize> = (0..d).filter(|&j| j != i && !mirror.disjoint(&original[j])).collect();
        let [j] = partners[..] else { return None };
        if discs[j].is_real || paired[j] {
            return None;
        }
        let shift = dist_up(&(&original[j].re - &mirror.re), &(&original[j].im - &mirror.im));
        let rad = (&original[j].rad + shift).max(discs[i].rad.clone());
        discs[i].rad = rad.clone();
        discs[j] = RootEnclosure { re: mirror.re.clone(), im: mirror.im.clone(), rad, prec, is_real: false };
        paired[i] = true;
        paired[j] = true;
    }
    if (0..d).any(|i| !discs[i].is_real && !paired[i]) {
        return None;
    }
    for i in 0..d {
        for j in i + 1..d {
            if !discs[i].disjoint(&discs[j]) {
                return None;
            }
        }
    }
    // radius ≤ 2^(1−bits)·max(1, |c|)
    let unit = BigInt::from(1u8) << prec;
    for disc in &discs {
        let c = (&disc.re * &disc.re + &disc.im * &disc.im).sqrt();
        let scale = c.max(unit.clone());
        if (&disc.rad << (bits - 1)) > scale {
            return None;
        }
    }
    discs.sort_by(canonical_order);
    Some(discs)
}

/// Real roots first (descending), then non-real roots by descending real part,
/// upper half-plane member of each pair first.
fn canonical_order(a: &RootEnclosure, b: &RootEnclosure) -> Ordering {
    match (a.is_real, b.is_real) {
        (true, false) => Ordering::Less,
        (false, true) => Ordering::Greater,
        (true, true) => b.re.cmp(&a.re),
        (false, false) => b.re.cmp(&a.re).then_with(|| b.im.cmp(&a.im)),
    }
}

/// Certify that the root in `discs[i]` lies on the unit circle.
///
/// If the root `z` is in `D` and `p` is reciprocal then `1/z̄` is a root in
/// the inverted disc `D*`. When a disc containing both `D` and `D*` meets no
/// other isolating disc, it holds a single root, so `z = 1/z̄` and `|z| = 1`.
pub fn certify_on_unit_circle(p: &IntPolynomial, discs: &[RootEnclosure], i: usize) -> bool {
    if !p.is_reciprocal() {
        return false;
    }
    let di = &discs[i];
    let prec = di.prec;
    // |c|^2 − r^2 at scale 2^{-2p}
    let c2 = &di.re * &di.re + &di.im * &di.im;
    let r2 = &di.rad * &di.rad;
    let denom = &c2 - &r2;
    if !denom.is_positive() {
        return false;
    }
    // D* = D(c / (|c|^2 − r^2), r / (|c|^2 − r^2)); values at scale 2^{-prec}
    let shift = prec;
    let cre = crate::interval::Interval::from_ratio(&(&di.re << shift), &denom, prec);
    let cim = crate::interval::Interval::from_ratio(&(&di.im << shift), &denom, prec);
    let rstar = crate::interval::Interval::from_ratio(&(&di.rad << shift), &denom, prec);
    // enclosing disc: center c, radius max(r, |c − c*| + r*)
    let dx = (&di.re - cre.lo_scaled()).abs().max((&di.re - cre.hi_scaled()).abs());
    let dy = (&di.im - cim.lo_scaled()).abs().max((&di.im - cim.hi_scaled()).abs());
    let reach = dist_up(&dx, &dy) + rstar.hi_scaled();
    let big = RootEnclosure { rad: reach.max(di.rad.clone()), ..di.clone() };
    discs.iter().enumerate().all(|(j, dj)| j == i || big.disjoint(dj))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::parse_polynomial;

    fn roots(text: &str, bits: u32) -> Vec<RootEnclosure> {
        isolate_roots(&parse_polynomial(text).unwrap(), bits, 1 << 14).unwrap()
    }

    #[test]
    fn golden_ratio_roots_match_quadratic_formula() {
        let r = roots("x^2 - x - 1", 64);
        assert_eq!(r.len(), 2);
        assert!(r.iter().all(|e| e.is_real()));
        let phi = (1.0 + 5f64.sqrt()) / 2.0;
        assert!((r[0].center_f64().re - phi).abs() < 1e-15);
        assert!((r[1].center_f64().re + 1.0 / phi).abs() < 1e-15);
        assert!(r[0].radius_f64() < 2f64.powi(-63) * phi);
    }

    #[test]
    fn sqrt_two() {
        let r = roots("x^2 - 2", 64);
        assert!((r[0].center_f64().re - 2f64.sqrt()).abs() < 1e-15);
        assert!((r[1].center_f64().re + 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn lehmer_structure() {
        let p = parse_polynomial("x^10+x^9-x^7-x^6-x^5-x^4-x^3+x+1").unwrap();
        let r = isolate_roots(&p, 128, 1 << 14).unwrap();
        assert_eq!(r.len(), 10);
        let real: Vec<_> = r.iter().filter(|e| e.is_real()).collect();
        assert_eq!(real.len(), 2);
        assert!((real[0].center_f64().re - 1.176_280_818_259_917).abs() < 1e-12);
        assert!((real[1].center_f64().re - 0.850_137_130_927_042_8).abs() < 1e-12);
        for i in 2..10 {
            assert!(!r[i].is_real());
            assert!(certify_on_unit_circle(&p, &r, i), "root {i} not certified on circle");
        }
        assert!(!certify_on_unit_circle(&p, &r, 0));
    }

    #[test]
    fn conjugate_pairs_are_exact_mirrors() {
        let r = roots("x^3 - x - 2", 96);
        let c: Vec<_> = r.iter().filter(|e| !e.is_real()).collect();
        assert_eq!(c.len(), 2);
        assert_eq!(c[0].re, c[1].re);
        assert_eq!(c[0].im, -c[1].im.clone());
        assert_eq!(c[0].rad, c[1].rad);
        let m = c[0].modulus();
        assert!((m.mid_f64() - 1.146_558_42).abs() < 1e-6);
    }

    #[test]
    fn vieta_sum_of_centers() {
        let p = parse_polynomial("3x^5 - 7x^3 + x^2 + 2x - 5").unwrap();
        let r = isolate_roots(&p, 80, 1 << 14).unwrap();
        let sum: f64 = r.iter().map(|e| e.center_f64().re).sum();
        let radii: f64 = r.iter().map(|e| e.radius_f64()).sum();
        assert!((sum - 0.0).abs() <= radii + 1e-12);
        let im: f64 = r.iter().map(|e| e.center_f64().im).sum();
        assert!(im.abs() < 1e-12);
    }

    #[test]
    fn rational_root() {
        let r = roots("2x - 3", 64);
        assert_eq!(r.len(), 1);
        assert!(r[0].is_real());
        assert!(r[0].real_interval().lo_f64() <= 1.5 && r[0].real_interval().hi_f64() >= 1.5);
    }

    #[test]
    fn wilkinson_like_cluster() {
        // close real roots 1, 1.001, 1.002 scaled to integers
        let r = roots("(1000x - 1000)(1000x - 1001)(1000x - 1002)(x^2+1)", 100);
        assert_eq!(r.len(), 5);
        assert_eq!(r.iter().filter(|e| e.is_real()).count(), 3);
    }
}
