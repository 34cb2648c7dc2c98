//! The Bernoulli convolution seen through exact cylinder counting.
//!
//! A depth-`m` prefix `a_1…a_m` gives the cylinder `[S, S + θ^{−m}T]` with
//! `S = Σ a_k θ^{−k}` and `T = 1/(θ−1)`, each of mass `2^{−m}`. Multiplying by
//! `θ^m` turns `S` into the power sum `Σ a_k θ^{m−k}` and the cylinder into
//! `[P, P + T]`, so every comparison is between elements of `Q(θ)`.

use std::cmp::Ordering;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::algebraic::{classify, AlgebraicNumber};
use crate::cache::Record;
use crate::error::{Error, Result};
use crate::field::{FieldElem, PowerTable};
use crate::interval::{Enclosed, Interval};
use crate::powersum::{
    cached_level, certified_order, check_budget, garsia_entropy, merge, permute, shifted, start_precision,
    DigitAlphabet, KIND_NET,
};

/// The sorted points `Σ_{k=1}^n a_k θ^{−k}` with multiplicities.
#[derive(Clone, Debug)]
pub struct NetLevel {
    n: usize,
    table: PowerTable,
    rec: Record,
    /// Enclosures of `Σ a_k θ^{n−k}` (the points scaled by `θ^n`).
    scaled: Vec<Interval>,
    /// Enclosures of the points themselves.
    values: Vec<Interval>,
    inv_theta_n: FieldElem,
}

impl NetLevel {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.rec.mult.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rec.mult.is_empty()
    }

    pub fn multiplicity(&self, i: usize) -> u64 {
        self.rec.mult[i]
    }

    pub fn value(&self, i: usize) -> &Interval {
        &self.values[i]
    }

    fn key(&self, i: usize) -> &[i64] {
        &self.rec.keys[i * self.rec.d..(i + 1) * self.rec.d]
    }

    /// Exact point `i` of the net.
    pub fn point(&self, a: &AlgebraicNumber, i: usize) -> FieldElem {
        a.field().mul(&self.table.to_elem(self.key(i)), &self.inv_theta_n)
    }

    /// Point `i` multiplied by `θ^n`, exactly.
    fn scaled_point(&self, i: usize) -> FieldElem {
        self.table.to_elem(self.key(i))
    }
}

pub fn net_level(a: &AlgebraicNumber, n: usize) -> Result<NetLevel> {
    check_budget(DigitAlphabet::Binary.strings(n), a.settings().budget)?;
    let field = a.field();
    let table = PowerTable::new(field, n.saturating_sub(1))?;
    let exps: Vec<usize> = (0..n).rev().collect();
    let rec = cached_level(a, &table, DigitAlphabet::Binary, KIND_NET, &exps)?;
    let (order, scaled) = certified_order(a, &table, &rec, n)?;
    let rec = permute(&rec, &order);
    let prec = scaled[0].prec();
    let theta_n = a.theta(prec + 8).pow(n as u32).to_prec(prec);
    let values = scaled.iter().map(|v| v.div(&theta_n).expect("θ^n > 0")).collect();
    let inv_theta_n = field.inverse(&field.x_pow(n));
    Ok(NetLevel { n, table, rec, scaled, values, inv_theta_n })
}

/// Rigorous bounds `lower ≤ μ_θ(J) ≤ upper`, as counts of depth-`m` prefixes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct MeasureBound {
    pub depth: usize,
    pub lower_count: u64,
    pub upper_count: u64,
}

impl MeasureBound {
    pub fn lower(&self) -> f64 {
        self.lower_count as f64 / (self.depth as f64).exp2()
    }

    pub fn upper(&self) -> f64 {
        self.upper_count as f64 / (self.depth as f64).exp2()
    }
}

struct Threshold {
    elem: FieldElem,
    iv: Interval,
}

/// Depth-`m` cylinders sorted by left endpoint, for repeated interval queries.
pub struct CylinderIndex<'a> {
    a: &'a AlgebraicNumber,
    net: NetLevel,
    prefix: Vec<u64>,
    theta_m: FieldElem,
    support: FieldElem,
}

impl<'a> CylinderIndex<'a> {
    pub fn new(a: &'a AlgebraicNumber, m: usize) -> Result<Self> {
        let net = net_level(a, m)?;
        let mut prefix = Vec::with_capacity(net.len() + 1);
        prefix.push(0u64);
        for &x in &net.rec.mult {
            prefix.push(prefix.last().unwrap() + x);
        }
        let field = a.field();
        Ok(CylinderIndex { a, prefix, theta_m: field.x_pow(m), support: field.support_constant(), net })
    }

    pub fn depth(&self) -> usize {
        self.net.n
    }

    fn threshold(&self, elem: FieldElem) -> Threshold {
        let prec = self.net.scaled[0].prec();
        let iv = self.a.field().eval(&elem, prec + 8).to_prec(prec);
        Threshold { elem, iv }
    }

    fn cmp(&self, i: usize, t: &Threshold) -> Result<Ordering> {
        match self.net.scaled[i].cmp_certified(&t.iv) {
            Some(o) => Ok(o),
            None => self.a.field().cmp(&self.net.scaled_point(i), &t.elem),
        }
    }

    /// Number of cylinders whose left end is `< t` (`≤ t` when `inclusive`).
    fn count_below(&self, t: &Threshold, inclusive: bool) -> Result<usize> {
        let (mut lo, mut hi) = (0, self.net.len());
        while lo < hi {
            let mid = (lo + hi) / 2;
            let c = self.cmp(mid, t)?;
            let below = if inclusive { c != Ordering::Greater } else { c == Ordering::Less };
            if below {
                lo = mid + 1;
            } else {
                hi = mid;
            }
        }
        Ok(lo)
    }

    fn mass(&self, from: usize, to: usize) -> u64 {
        if to > from {
            self.prefix[to] - self.prefix[from]
        } else {
            0
        }
    }

    /// Bounds for the closed interval `[left, right]` given by exact endpoints.
    pub fn bounds(&self, left: &FieldElem, right: &FieldElem) -> Result<MeasureBound> {
        let f = self.a.field();
        let lm = f.mul(left, &self.theta_m);
        let rm = f.mul(right, &self.theta_m);
        // contained: L ≤ P and P + T ≤ R
        let t1 = self.threshold(lm.clone());
        let t2 = self.threshold(f.sub(&rm, &self.support));
        let lower = self.mass(self.count_below(&t1, false)?, self.count_below(&t2, true)?);
        // meeting: P ≤ R and P + T ≥ L
        let t3 = self.threshold(f.sub(&lm, &self.support));
        let t4 = self.threshold(rm);
        let upper = self.mass(self.count_below(&t3, false)?, self.count_below(&t4, true)?);
        Ok(MeasureBound { depth: self.depth(), lower_count: lower, upper_count: upper })
    }
}

pub fn measure_bounds(a: &AlgebraicNumber, left: &FieldElem, right: &FieldElem, m: usize) -> Result<MeasureBound> {
    CylinderIndex::new(a, m)?.bounds(left, right)
}

#[derive(Clone, Debug, Serialize)]
pub struct LocalDimSample {
    pub index: usize,
    pub left: Enclosed,
    pub right: Enclosed,
    pub length: Enclosed,
    pub bound: MeasureBound,
    pub lower: f64,
    pub upper: f64,
    /// Lower bound on `log μ(J) / log |J|`.
    pub ratio_low: Option<f64>,
    /// Upper bound on `log μ(J) / log |J|`; `None` when the lower mass is 0.
    pub ratio_high: Option<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct LocalDimSummary {
    pub n: usize,
    pub depth: usize,
    pub gaps: usize,
    pub d_n: usize,
    pub min_ratio_low: Option<f64>,
    pub median_ratio_low: Option<f64>,
    /// Median of the upper ratio bounds, counting an unbounded ratio as +∞.
    pub median_ratio_high: Option<f64>,
    /// `max_J upper(μ(J))·d_n`
    pub upper_times_dn: f64,
    /// `min_J lower(μ(J))·M(θ)^n·n^s`
    pub lower_times_mahler: f64,
    /// `min_J lower(μ(J))·θ^n·n^{d/2−1}`, for Salem θ only.
    pub salem_statistic: Option<f64>,
    /// Range of `μ(J)/(|J|·|log|J||)` over the gaps (lower masses, upper
    /// masses), for Salem θ only. The absolute value of the logarithm is
    /// used because `log|J| < 0`.
    pub log_statistic: Option<(f64, f64)>,
    pub log_sign_flag: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct LocalDimProfile {
    pub samples: Vec<LocalDimSample>,
    pub summary: LocalDimSummary,
}

fn median(mut v: Vec<f64>) -> Option<f64> {
    if v.is_empty() {
        return None;
    }
    v.sort_by(f64::total_cmp);
    let k = v.len();
    Some(if k % 2 == 1 { v[k / 2] } else { (v[k / 2 - 1] + v[k / 2]) / 2.0 })
}

fn ratio_bounds(b: &MeasureBound, length: &Interval) -> (Option<f64>, Option<f64>) {
    let (ln_lo, ln_hi) = length.ln_bounds();
    if b.upper_count == 0 || ln_hi >= 0.0 {
        return (None, None);
    }
    // log|J| ∈ [ln_lo, ln_hi] < 0 and the ratio falls as μ grows
    let low = -b.upper().ln() / -ln_lo;
    let high = if b.lower_count == 0 { None } else { Some(-b.lower().ln() / -ln_hi) };
    (Some(low.max(0.0)), high)
}

/// Measure bounds and local-dimension ratios for every gap of the level-`n` net.
pub fn local_dimension_profile(a: &AlgebraicNumber, n: usize, m: usize) -> Result<LocalDimProfile> {
    local_dimension_profile_with(a, n, m, |_| {})
}

pub fn local_dimension_profile_with(
    a: &AlgebraicNumber,
    n: usize,
    m: usize,
    mut on_sample: impl FnMut(&LocalDimSample),
) -> Result<LocalDimProfile> {
    if m < n + a.settings().guard {
        return Err(Error::InvalidArgument(format!("depth {m} must be at least n + guard = {}", n + a.settings().guard)));
    }
    let net = net_level(a, n)?;
    let index = CylinderIndex::new(a, m)?;
    let samples = (1..net.len())
        .into_par_iter()
        .map(|i| {
            let bound = index.bounds(&net.point(a, i - 1), &net.point(a, i))?;
            let length = net.value(i).sub(net.value(i - 1));
            let (ratio_low, ratio_high) = ratio_bounds(&bound, &length);
            Ok(LocalDimSample {
                index: i - 1,
                left: Enclosed::from(net.value(i - 1)),
                right: Enclosed::from(net.value(i)),
                length: Enclosed::from(&length),
                lower: bound.lower(),
                upper: bound.upper(),
                bound,
                ratio_low,
                ratio_high,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    samples.iter().for_each(&mut on_sample);

    let report = classify(a)?;
    let theta = a.theta_f64();
    let (d, s) = (a.degree() as i32, a.s() as i32);
    let nf = n as f64;
    let lows: Vec<f64> = samples.iter().filter_map(|x| x.ratio_low).collect();
    let highs: Vec<f64> = samples.iter().filter(|x| x.ratio_low.is_some()).map(|x| x.ratio_high.unwrap_or(f64::INFINITY)).collect();
    let min_lower = samples.iter().map(|x| x.lower).fold(f64::INFINITY, f64::min);
    let salem_statistic = report.is_salem.then(|| min_lower * theta.powi(n as i32) * nf.powi(d / 2 - 1));
    let log_statistic = report.is_salem.then(|| {
        samples.iter().fold((f64::INFINITY, 0.0f64), |(lo, hi), x| {
            let len = x.length.value;
            let denom = len * len.ln().abs();
            (lo.min(x.lower / denom), hi.max(x.upper / denom))
        })
    });
    let summary = LocalDimSummary {
        n,
        depth: m,
        gaps: samples.len(),
        d_n: net.len(),
        min_ratio_low: lows.iter().copied().reduce(f64::min),
        median_ratio_low: median(lows),
        median_ratio_high: median(highs),
        upper_times_dn: samples.iter().map(|x| x.upper).fold(0.0, f64::max) * net.len() as f64,
        lower_times_mahler: min_lower * a.mahler().value.powi(n as i32) * nf.powi(s),
        salem_statistic,
        log_statistic,
        log_sign_flag: true,
    };
    Ok(LocalDimProfile { samples, summary })
}

/// Number of length-`n` prefixes extendable to an expansion of `x`, for
/// `n = 0..=n_max`.
#[derive(Clone, Debug, Serialize)]
pub struct BranchingResult {
    pub digits: Vec<u8>,
    pub beta: Vec<u64>,
    /// `log β_n / (n log θ)` for `n = 1..=n_max`.
    pub growth: Vec<f64>,
}

/// `β_n(x)` for `x = Σ_{k=1}^N x_k θ^{−k}` and every `n ≤ n_max`, by
/// breadth-first branching with equal residuals merged.
pub fn branching_count(a: &AlgebraicNumber, digits: &[u8], n_max: usize) -> Result<BranchingResult> {
    let big_n = digits.len();
    let guard = a.settings().guard;
    if n_max + guard > big_n {
        return Err(Error::InvalidArgument(format!("n = {n_max} needs at least {} digits of x", n_max + guard)));
    }
    if digits.iter().any(|&x| x > 1) {
        return Err(Error::InvalidArgument("digits of x must be 0 or 1".into()));
    }
    check_budget(1u128 << n_max.min(127), a.settings().budget)?;
    let field = a.field();
    let table = PowerTable::new(field, big_n)?;
    let d = table.degree();
    // X = Σ x_k θ^{N−k}
    let mut x = vec![0i64; d];
    for (k, &xk) in digits.iter().enumerate() {
        if xk == 1 {
            for (xi, r) in x.iter_mut().zip(table.row(big_n - 1 - k)) {
                *xi = xi.checked_add(*r).ok_or(Error::ResidueOverflow { level: k + 1 })?;
            }
        }
    }
    let support = field.support_constant();
    let prec = start_precision(a, big_n);
    let ev = table.evaluator(field, prec);
    let mut states = Record { d, den: table.denominator().clone(), keys: x, mult: vec![1], witness: vec![0] };
    let mut beta = vec![1u64];
    for j in 0..n_max {
        let row = table.row(big_n - 1 - j);
        let parts = [shifted(&states, row, 0, 0, 2, j + 1)?, shifted(&states, row, -1, 1, 2, j + 1)?];
        let merged = merge(&parts);
        // keep residuals R with 0 ≤ R ≤ θ^{N−j−1}·T
        let cap = field.mul(&field.x_pow(big_n - j - 1), &support);
        let cap_iv = field.eval(&cap, ev.prec() + 8).to_prec(ev.prec());
        let keep = (0..merged.mult.len())
            .into_par_iter()
            .map(|i| {
                let key = &merged.keys[i * d..(i + 1) * d];
                let v = ev.eval(key);
                let nonneg = match v.sign() {
                    Some(s) => s != Ordering::Less,
                    None => key.iter().all(|&c| c == 0) || field.sign(&table.to_elem(key))? != Ordering::Less,
                };
                if !nonneg {
                    return Ok(false);
                }
                Ok(match v.cmp_certified(&cap_iv) {
                    Some(o) => o != Ordering::Greater,
                    None => field.cmp(&table.to_elem(key), &cap)? != Ordering::Greater,
                })
            })
            .collect::<Result<Vec<bool>>>()?;
        let mut next = Record { d, den: merged.den.clone(), keys: Vec::new(), mult: Vec::new(), witness: Vec::new() };
        for (i, &k) in keep.iter().enumerate() {
            if k {
                next.keys.extend_from_slice(&merged.keys[i * d..(i + 1) * d]);
                next.mult.push(merged.mult[i]);
                next.witness.push(0);
            }
        }
        beta.push(next.mult.iter().sum());
        states = next;
    }
    let ln_theta = a.theta_f64().ln();
    let growth = (1..=n_max).map(|n| (beta[n] as f64).ln() / (n as f64 * ln_theta)).collect();
    Ok(BranchingResult { digits: digits.to_vec(), beta, growth })
}

/// Digits `x_1…x_N` of sample `index`: i.i.d. fair bits from the ChaCha8
/// stream `index` of `seed`, redrawn in the same stream if all are zero.
pub fn sample_digits(seed: u64, index: u64, big_n: usize) -> Vec<u8> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    loop {
        let v: Vec<u8> = (0..big_n).map(|_| rng.gen::<bool>() as u8).collect();
        if v.contains(&1) {
            return v;
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct BranchingGrowthReport {
    pub samples: usize,
    pub digits: usize,
    pub n_max: usize,
    pub seed: u64,
    /// Sample mean of `log β_n / (n log θ)` for `n = 1..=n_max`.
    pub mean_growth: Vec<f64>,
    /// `min{H_{n_max}, 1}`
    pub dim_estimate: f64,
    /// `|mean_growth[n_max] − dim_estimate|`
    pub agreement_gap: f64,
    /// `log_θ 2 − dim_estimate`, the exponent of `2θ^{−dim}`.
    pub entropy_complement: f64,
    /// `|mean_growth[n_max] − entropy_complement|`
    pub complement_gap: f64,
}

pub fn branching_growth(a: &AlgebraicNumber, samples: usize, big_n: usize, n_max: usize, seed: u64) -> Result<BranchingGrowthReport> {
    branching_growth_with(a, samples, big_n, n_max, seed, |_, _| {})
}

/// Samples processed per parallel batch; callbacks arrive in sample order.
const BATCH: usize = 8;

/// As [`branching_growth`], reporting each sample once its batch completes.
pub fn branching_growth_with(
    a: &AlgebraicNumber,
    samples: usize,
    big_n: usize,
    n_max: usize,
    seed: u64,
    mut on_sample: impl FnMut(usize, &BranchingResult),
) -> Result<BranchingGrowthReport> {
    if samples == 0 || n_max == 0 {
        return Err(Error::InvalidArgument("need at least one sample and n_max ≥ 1".into()));
    }
    let mut runs = Vec::with_capacity(samples);
    for start in (0..samples).step_by(BATCH) {
        let batch = (start..samples.min(start + BATCH))
            .into_par_iter()
            .map(|i| branching_count(a, &sample_digits(seed, i as u64, big_n), n_max))
            .collect::<Result<Vec<_>>>()?;
        for (k, r) in batch.iter().enumerate() {
            on_sample(start + k, r);
        }
        runs.extend(batch);
    }
    let mean_growth: Vec<f64> =
        (0..n_max).map(|k| runs.iter().map(|r| r.growth[k]).sum::<f64>() / samples as f64).collect();
    let entropy = garsia_entropy(a, n_max)?;
    let dim_estimate = entropy.rows.last().map_or(1.0, |r| r.dim_estimate);
    let agreement_gap = (mean_growth[n_max - 1] - dim_estimate).abs();
    let entropy_complement = 2f64.ln() / a.theta_f64().ln() - dim_estimate;
    let complement_gap = (mean_growth[n_max - 1] - entropy_complement).abs();
    Ok(BranchingGrowthReport {
        samples,
        digits: big_n,
        n_max,
        seed,
        mean_growth,
        dim_estimate,
        agreement_gap,
        entropy_complement,
        complement_gap,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct DensityRow {
    pub point: usize,
    pub x: Enclosed,
    pub m: usize,
    pub radius: Enclosed,
    pub bound: MeasureBound,
    /// Bounds on `μ([x−r, x+r]) / 2r`.
    pub density_low: f64,
    pub density_high: f64,
}

/// Two-sided density estimates at `x` with radius `θ^{−m}`, counting
/// cylinders at depth `m + guard`.
pub fn density_profile(a: &AlgebraicNumber, points: &[FieldElem], m_list: &[usize]) -> Result<Vec<DensityRow>> {
    let field = a.field();
    let mut rows = Vec::new();
    for &m in m_list {
        let index = CylinderIndex::new(a, m + a.settings().guard)?;
        let r = field.inverse(&field.x_pow(m));
        let r_iv = field.eval(&r, 96);
        for (pi, x) in points.iter().enumerate() {
            let bound = index.bounds(&field.sub(x, &r), &field.add(x, &r))?;
            let two_r = r_iv.mul_i64(2);
            rows.push(DensityRow {
                point: pi,
                x: Enclosed::from(&field.eval(x, 96)),
                m,
                radius: Enclosed::from(&r_iv),
                bound,
                density_low: bound.lower() / two_r.hi_f64(),
                density_high: bound.upper() / two_r.lo_f64(),
            });
        }
    }
    Ok(rows)
}
