//! Level-n power-sum sets with exact deduplication.
//!
//! A digit string `a_1…a_n` is identified with the residue of `Σ a_k x^{e_k}`
//! modulo the minimal polynomial, stored as integer numerators over the
//! common denominator of a [`PowerTable`]. Two strings have the same value
//! exactly when their residues agree.
//!
//! Levels are built one digit at a time. Lexicographic order on residue
//! vectors is translation invariant, so each shifted copy `S + a·x^e` of a
//! sorted level is still sorted and the next level is a `|A|`-way merge.

use std::cmp::Ordering;
use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_traits::Zero;
use rayon::prelude::*;
use serde::Serialize;

use crate::algebraic::{sqrt_step, AlgebraicNumber};
use crate::cache::{self, CacheKey, Record};
use crate::error::{Error, Result};
use crate::field::{FieldElem, PowerTable};
use crate::interval::{Enclosed, Interval};

/// Digit alphabets for power sums.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum DigitAlphabet {
    /// `{0, 1}`
    #[serde(rename = "0,1")]
    Binary,
    /// `{−1, 0, 1}`
    #[serde(rename = "-1,0,1")]
    Signed,
}

impl DigitAlphabet {
    pub fn digits(self) -> &'static [i64] {
        match self {
            DigitAlphabet::Binary => &[0, 1],
            DigitAlphabet::Signed => &[-1, 0, 1],
        }
    }

    pub fn size(self) -> usize {
        self.digits().len()
    }

    /// `|A|^n`, saturating.
    pub fn strings(self, n: usize) -> u128 {
        (self.size() as u128).checked_pow(n as u32).unwrap_or(u128::MAX)
    }
}

impl std::str::FromStr for DigitAlphabet {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.replace(' ', "").as_str() {
            "0,1" | "01" | "binary" => Ok(DigitAlphabet::Binary),
            "-1,0,1" | "signed" => Ok(DigitAlphabet::Signed),
            _ => Err(Error::InvalidArgument(format!("unsupported alphabet {s:?}"))),
        }
    }
}

pub(crate) fn check_budget(strings: u128, budget: u64) -> Result<()> {
    if strings > budget as u128 {
        return Err(Error::BudgetExceeded { required: strings, budget });
    }
    Ok(())
}

fn empty_level(d: usize, den: &BigInt) -> Record {
    Record { d, den: den.clone(), keys: vec![0; d], mult: vec![1], witness: vec![0] }
}

/// `rec + a·row` with witnesses extended by digit index `di`.
pub(crate) fn shifted(rec: &Record, row: &[i64], a: i64, di: u64, base: u64, level: usize) -> Result<Record> {
    let d = rec.d;
    let mut keys = rec.keys.clone();
    if a != 0 && d > 0 {
        let ok = keys.par_chunks_mut(d).all(|k| {
            for (x, &r) in k.iter_mut().zip(row) {
                match a.checked_mul(r).and_then(|t| x.checked_add(t)) {
                    Some(v) => *x = v,
                    None => return false,
                }
            }
            true
        });
        if !ok {
            return Err(Error::ResidueOverflow { level });
        }
    }
    let witness = rec
        .witness
        .iter()
        .map(|&w| w.checked_mul(base).and_then(|w| w.checked_add(di)))
        .collect::<Option<Vec<u64>>>()
        .ok_or_else(|| Error::InvalidArgument("digit string too long for a 64-bit witness".into()))?;
    Ok(Record { d, den: rec.den.clone(), keys, mult: rec.mult.clone(), witness })
}

/// Merge sorted levels, summing multiplicities of equal residues and keeping
/// the smallest witness.
pub(crate) fn merge(parts: &[Record]) -> Record {
    let d = parts[0].d;
    let mut heads = vec![0usize; parts.len()];
    let total: usize = parts.iter().map(|p| p.mult.len()).sum();
    let mut out = Record {
        d,
        den: parts[0].den.clone(),
        keys: Vec::with_capacity(total * d),
        mult: Vec::with_capacity(total),
        witness: Vec::with_capacity(total),
    };
    fn key(p: &Record, i: usize) -> &[i64] {
        &p.keys[i * p.d..(i + 1) * p.d]
    }
    loop {
        let mut best: Option<usize> = None;
        for (j, p) in parts.iter().enumerate() {
            if heads[j] < p.mult.len() {
                best = match best {
                    Some(b) if key(&parts[b], heads[b]) <= key(p, heads[j]) => Some(b),
                    _ => Some(j),
                };
            }
        }
        let Some(b) = best else { break };
        let k = key(&parts[b], heads[b]).to_vec();
        let mut m = 0u64;
        let mut w = u64::MAX;
        for (j, p) in parts.iter().enumerate() {
            if heads[j] < p.mult.len() && key(p, heads[j]) == k.as_slice() {
                m += p.mult[heads[j]];
                w = w.min(p.witness[heads[j]]);
                heads[j] += 1;
            }
        }
        out.keys.extend_from_slice(&k);
        out.mult.push(m);
        out.witness.push(w);
    }
    out
}

/// Build the levels for exponents `exps` (digit `a_k` multiplies
/// `x^{exps[k−1]}`), calling `each(k, level_k)` after every digit.
pub(crate) fn build_levels(
    table: &PowerTable,
    alphabet: DigitAlphabet,
    exps: &[usize],
    mut each: impl FnMut(usize, &Record) -> Result<()>,
) -> Result<Record> {
    let digits = alphabet.digits();
    let base = digits.len() as u64;
    let mut cur = empty_level(table.degree(), table.denominator());
    each(0, &cur)?;
    for (k, &e) in exps.iter().enumerate() {
        let row = table.row(e);
        let parts = digits
            .par_iter()
            .enumerate()
            .map(|(di, &a)| shifted(&cur, row, a, di as u64, base, k + 1))
            .collect::<Result<Vec<_>>>()?;
        cur = merge(&parts);
        each(k + 1, &cur)?;
    }
    Ok(cur)
}

/// Working precision for separating values of a level built from powers up
/// to `x^n`: `max(start, ⌈n·log₂ M⌉ + 64)`.
pub(crate) fn start_precision(a: &AlgebraicNumber, n: usize) -> u32 {
    let m = a.mahler().hi().max(a.theta_f64()).max(1.0);
    let need = (n as f64 * m.log2()).ceil() as u32 + 64;
    a.settings().precision_bits.max(need)
}

/// Evaluate and sort by value, doubling precision until adjacent enclosures
/// are disjoint. Returns the permutation and the enclosures in sorted order.
pub(crate) fn certified_order(a: &AlgebraicNumber, table: &PowerTable, rec: &Record, n: usize) -> Result<(Vec<usize>, Vec<Interval>)> {
    let start = start_precision(a, n);
    let cap = start.saturating_mul(16);
    let mut prec = start;
    let d = rec.d;
    loop {
        let ev = table.evaluator(a.field(), prec);
        let vals: Vec<Interval> = (0..rec.mult.len()).into_par_iter().map(|i| ev.eval(&rec.keys[i * d..(i + 1) * d])).collect();
        let mut order: Vec<usize> = (0..vals.len()).collect();
        order.par_sort_unstable_by(|&i, &j| {
            vals[i].lo_scaled().cmp(vals[j].lo_scaled()).then_with(|| rec.keys[i * d..(i + 1) * d].cmp(&rec.keys[j * d..(j + 1) * d]))
        });
        let disjoint = order.windows(2).all(|w| vals[w[0]].hi_scaled() < vals[w[1]].lo_scaled());
        if disjoint {
            let sorted = order.iter().map(|&i| vals[i].clone()).collect();
            return Ok((order, sorted));
        }
        if prec >= cap {
            return Err(Error::precision(prec, "separating level values"));
        }
        prec = (prec * 2).min(cap);
    }
}

pub(crate) fn permute(rec: &Record, order: &[usize]) -> Record {
    let d = rec.d;
    let mut keys = Vec::with_capacity(rec.keys.len());
    for &i in order {
        keys.extend_from_slice(&rec.keys[i * d..(i + 1) * d]);
    }
    Record {
        d,
        den: rec.den.clone(),
        keys,
        mult: order.iter().map(|&i| rec.mult[i]).collect(),
        witness: order.iter().map(|&i| rec.witness[i]).collect(),
    }
}

/// A deduplicated level sorted by certified value.
#[derive(Clone, Debug)]
pub struct LevelSet {
    n: usize,
    alphabet: DigitAlphabet,
    table: PowerTable,
    rec: Record,
    values: Vec<Interval>,
}

impl LevelSet {
    pub(crate) fn from_sorted(n: usize, alphabet: DigitAlphabet, table: PowerTable, rec: Record, values: Vec<Interval>) -> Self {
        LevelSet { n, alphabet, table, rec, values }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn alphabet(&self) -> DigitAlphabet {
        self.alphabet
    }

    pub fn len(&self) -> usize {
        self.rec.mult.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rec.mult.is_empty()
    }

    /// Scaled residue numerators of entry `i`.
    pub fn key(&self, i: usize) -> &[i64] {
        &self.rec.keys[i * self.rec.d..(i + 1) * self.rec.d]
    }

    /// Exact value of entry `i` as an element of `Q(θ)`.
    pub fn residue(&self, i: usize) -> FieldElem {
        self.table.to_elem(self.key(i))
    }

    pub fn multiplicity(&self, i: usize) -> u64 {
        self.rec.mult[i]
    }

    pub fn multiplicities(&self) -> &[u64] {
        &self.rec.mult
    }

    pub fn total_multiplicity(&self) -> u128 {
        self.rec.mult.iter().map(|&m| m as u128).sum()
    }

    /// Lexicographically least digit string `a_1…a_n` with this value.
    pub fn witness(&self, i: usize) -> Vec<i64> {
        decode_witness(self.rec.witness[i], self.alphabet, self.n)
    }

    pub fn value(&self, i: usize) -> &Interval {
        &self.values[i]
    }

    pub fn values(&self) -> &[Interval] {
        &self.values
    }

    pub fn table(&self) -> &PowerTable {
        &self.table
    }
}

pub(crate) fn decode_witness(mut w: u64, alphabet: DigitAlphabet, n: usize) -> Vec<i64> {
    let digits = alphabet.digits();
    let base = digits.len() as u64;
    let mut out = vec![0i64; n];
    for k in (0..n).rev() {
        out[k] = digits[(w % base) as usize];
        w /= base;
    }
    out
}

pub(crate) const KIND_POWER_SUM: u8 = 0;
pub(crate) const KIND_NET: u8 = 1;

/// Re-express a record over the denominator `den`, when `den` is a
/// multiple of the stored one.
fn rescale(rec: Record, den: &BigInt, level: usize) -> Result<Option<Record>> {
    if rec.den == *den {
        return Ok(Some(rec));
    }
    if rec.den.is_zero() || !(den % &rec.den).is_zero() {
        return Ok(None);
    }
    let f = i64::try_from(den / &rec.den).map_err(|_| Error::ResidueOverflow { level })?;
    let keys = rec
        .keys
        .iter()
        .map(|&k| k.checked_mul(f).ok_or(Error::ResidueOverflow { level }))
        .collect::<Result<Vec<_>>>()?;
    Ok(Some(Record { keys, den: den.clone(), ..rec }))
}

fn load_level(a: &AlgebraicNumber, table: &PowerTable, alphabet: DigitAlphabet, kind: u8, n: usize) -> Result<Option<Record>> {
    let Some(dir) = &a.settings().cache_dir else { return Ok(None) };
    match cache::load(dir, &CacheKey::new(kind, a.minpoly(), n, alphabet.size()))? {
        Some(rec) => rescale(rec, table.denominator(), n),
        None => Ok(None),
    }
}

fn store_level(a: &AlgebraicNumber, alphabet: DigitAlphabet, kind: u8, n: usize, rec: &Record) -> Result<()> {
    match &a.settings().cache_dir {
        Some(dir) => cache::store(dir, &CacheKey::new(kind, a.minpoly(), n, alphabet.size()), rec),
        None => Ok(()),
    }
}

/// Deduplicated residues of `Σ a_k x^{exps[k−1]}`, from the cache when present.
pub(crate) fn cached_level(
    a: &AlgebraicNumber,
    table: &PowerTable,
    alphabet: DigitAlphabet,
    kind: u8,
    exps: &[usize],
) -> Result<Record> {
    let n = exps.len();
    check_budget(alphabet.strings(n), a.settings().budget)?;
    if let Some(rec) = load_level(a, table, alphabet, kind, n)? {
        return Ok(rec);
    }
    let rec = build_levels(table, alphabet, exps, |_, _| Ok(()))?;
    store_level(a, alphabet, kind, n, &rec)?;
    Ok(rec)
}

/// Every power-sum level `0..=n` in order, read from the cache when all of
/// them are present and built (and stored) incrementally otherwise.
pub(crate) fn cached_levels(
    a: &AlgebraicNumber,
    table: &PowerTable,
    alphabet: DigitAlphabet,
    n: usize,
    mut each: impl FnMut(usize, &Record) -> Result<()>,
) -> Result<()> {
    check_budget(alphabet.strings(n), a.settings().budget)?;
    if a.settings().cache_dir.is_some() {
        let mut loaded = Vec::with_capacity(n);
        for k in 1..=n {
            match load_level(a, table, alphabet, KIND_POWER_SUM, k)? {
                Some(rec) => loaded.push(rec),
                None => break,
            }
        }
        if loaded.len() == n {
            each(0, &empty_level(table.degree(), table.denominator()))?;
            for (k, rec) in loaded.iter().enumerate() {
                each(k + 1, rec)?;
            }
            return Ok(());
        }
    }
    let exps: Vec<usize> = (1..=n).collect();
    build_levels(table, alphabet, &exps, |k, rec| {
        if k > 0 {
            store_level(a, alphabet, KIND_POWER_SUM, k, rec)?;
        }
        each(k, rec)
    })?;
    Ok(())
}

fn raw_level(a: &AlgebraicNumber, table: &PowerTable, n: usize, alphabet: DigitAlphabet) -> Result<Record> {
    let exps: Vec<usize> = (1..=n).collect();
    cached_level(a, table, alphabet, KIND_POWER_SUM, &exps)
}

pub fn enumerate_level(a: &AlgebraicNumber, n: usize, alphabet: DigitAlphabet) -> Result<LevelSet> {
    check_budget(alphabet.strings(n), a.settings().budget)?;
    let table = PowerTable::new(a.field(), n)?;
    let rec = raw_level(a, &table, n, alphabet)?;
    let (order, values) = certified_order(a, &table, &rec, n)?;
    Ok(LevelSet { n, alphabet, rec: permute(&rec, &order), table, values })
}

/// `d_n`, the number of distinct values at level `n`.
pub fn count_distinct(a: &AlgebraicNumber, n: usize, alphabet: DigitAlphabet) -> Result<usize> {
    check_budget(alphabet.strings(n), a.settings().budget)?;
    let table = PowerTable::new(a.field(), n)?;
    Ok(raw_level(a, &table, n, alphabet)?.mult.len())
}

/// Distinct counts `d_0, …, d_{n_max}` from a single incremental pass.
pub fn distinct_counts(a: &AlgebraicNumber, n_max: usize, alphabet: DigitAlphabet) -> Result<Vec<usize>> {
    check_budget(alphabet.strings(n_max), a.settings().budget)?;
    let table = PowerTable::new(a.field(), n_max)?;
    let mut counts = Vec::with_capacity(n_max + 1);
    cached_levels(a, &table, alphabet, n_max, |_, rec| {
        counts.push(rec.mult.len());
        Ok(())
    })?;
    Ok(counts)
}

/// Relative slack used for the `θ ≤ d_n^{1/n} ≤ M(θ)` check.
pub const GROWTH_TOLERANCE: f64 = 0.02;

#[derive(Clone, Debug, Serialize)]
pub struct GrowthRow {
    pub n: usize,
    pub d_n: u64,
    /// `d_n^{1/n}`
    pub root: f64,
    /// `d_n / θ^n`
    pub c_n: Enclosed,
    pub within_bounds: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct GrowthReport {
    pub theta: Enclosed,
    pub mahler: Enclosed,
    pub rows: Vec<GrowthRow>,
    /// `d_{n+k} ≤ d_n·d_k` for every computed pair.
    pub subadditive: bool,
    pub c_n_nondecreasing: bool,
}

pub fn growth_report(a: &AlgebraicNumber, n_max: usize) -> Result<GrowthReport> {
    growth_report_with(a, n_max, |_| {})
}

/// As [`growth_report`], reporting each row as soon as its level is built.
pub fn growth_report_with(a: &AlgebraicNumber, n_max: usize, mut on_row: impl FnMut(&GrowthRow)) -> Result<GrowthReport> {
    let alphabet = DigitAlphabet::Binary;
    check_budget(alphabet.strings(n_max), a.settings().budget)?;
    let table = PowerTable::new(a.field(), n_max)?;
    let prec = 64 + (n_max as u32);
    let theta = a.theta(prec);
    let (t, m) = (a.theta_f64(), a.mahler());
    let mut counts = Vec::with_capacity(n_max + 1);
    let mut rows = Vec::with_capacity(n_max);
    let mut pow = Interval::one(prec);
    cached_levels(a, &table, alphabet, n_max, |n, rec| {
        let dn = rec.mult.len();
        counts.push(dn);
        if n == 0 {
            return Ok(());
        }
        pow = pow.mul(&theta);
        let root = (dn as f64).powf(1.0 / n as f64);
        let c_n = Interval::from_i64(dn as i64, prec).div(&pow).expect("θ^n > 0");
        let within_bounds = root >= t * (1.0 - GROWTH_TOLERANCE) && root <= m.hi() * (1.0 + GROWTH_TOLERANCE);
        let row = GrowthRow { n, d_n: dn as u64, root, c_n: Enclosed::from(&c_n), within_bounds };
        on_row(&row);
        rows.push(row);
        Ok(())
    })?;
    let subadditive = (1..=n_max).all(|n| (1..=n_max - n).all(|k| counts[n + k] as u128 <= counts[n] as u128 * counts[k] as u128));
    let c_n_nondecreasing = rows.windows(2).all(|w: &[GrowthRow]| w[1].c_n.hi() >= w[0].c_n.lo());
    Ok(GrowthReport { theta: Enclosed::from(&a.theta(64)), mahler: m, rows, subadditive, c_n_nondecreasing })
}

/// Exact adjacent gap: residue of the difference plus its enclosure.
#[derive(Clone, Debug)]
pub struct Gap {
    pub key: Vec<i64>,
    pub value: Interval,
}

/// Smallest and largest adjacent gap of a sorted level, with ties between
/// overlapping enclosures settled exactly.
pub fn extreme_gaps(a: &AlgebraicNumber, level: &LevelSet) -> Result<Option<(Gap, Gap)>> {
    if level.len() < 2 {
        return Ok(None);
    }
    let gaps: Vec<Gap> = (1..level.len())
        .map(|i| Gap {
            key: level.key(i).iter().zip(level.key(i - 1)).map(|(x, y)| x - y).collect(),
            value: level.value(i).sub(level.value(i - 1)),
        })
        .collect();
    let field = a.field();
    let table = level.table();
    let cmp = |x: &Gap, y: &Gap| -> Result<Ordering> {
        if x.key == y.key {
            return Ok(Ordering::Equal);
        }
        match x.value.cmp_certified(&y.value) {
            Some(o) => Ok(o),
            None => field.cmp(&table.to_elem(&x.key), &table.to_elem(&y.key)),
        }
    };
    let mut lo = 0;
    let mut hi = 0;
    for i in 1..gaps.len() {
        // cheap rejections before the exact comparison
        if gaps[i].value.lo_scaled() <= gaps[lo].value.hi_scaled() && cmp(&gaps[i], &gaps[lo])? == Ordering::Less {
            lo = i;
        }
        if gaps[i].value.hi_scaled() >= gaps[hi].value.lo_scaled() && cmp(&gaps[i], &gaps[hi])? == Ordering::Greater {
            hi = i;
        }
    }
    Ok(Some((gaps[lo].clone(), gaps[hi].clone())))
}

#[derive(Clone, Debug, Serialize)]
pub struct GapRow {
    pub n: usize,
    pub count: usize,
    pub min_gap: Enclosed,
    pub max_gap: Enclosed,
    /// The minimal gap equals the one at level `n − 1` exactly.
    pub min_gap_unchanged: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct GapSeries {
    pub rows: Vec<GapRow>,
    /// No certified increase of the minimal gap between consecutive levels.
    pub nonincreasing: bool,
    /// Level-`n_max` proxy for the liminf of gaps.
    pub lower_proxy: Enclosed,
    /// Largest `G_n` over the upper half of the computed levels.
    pub upper_proxy: Enclosed,
    #[serde(skip)]
    pub min_gaps: Vec<Interval>,
}

/// Gap statistics of the signed power-sum sets `Y_1, …, Y_{n_max}`.
pub fn gap_series(a: &AlgebraicNumber, n_max: usize) -> Result<GapSeries> {
    gap_series_with(a, n_max, |_| {})
}

/// As [`gap_series`], reporting each row as soon as it is computed.
pub fn gap_series_with(a: &AlgebraicNumber, n_max: usize, mut on_row: impl FnMut(&GapRow)) -> Result<GapSeries> {
    if n_max == 0 {
        return Err(Error::InvalidArgument("gap series needs n_max ≥ 1".into()));
    }
    let alphabet = DigitAlphabet::Signed;
    check_budget(alphabet.strings(n_max), a.settings().budget)?;
    let table = PowerTable::new(a.field(), n_max)?;
    let mut rows: Vec<GapRow> = Vec::new();
    let mut mins: Vec<Gap> = Vec::new();
    let mut maxs: Vec<Interval> = Vec::new();
    cached_levels(a, &table, alphabet, n_max, |n, rec| {
        if n == 0 {
            return Ok(());
        }
        let (order, values) = certified_order(a, &table, rec, n)?;
        let level = LevelSet::from_sorted(n, alphabet, table.clone(), permute(rec, &order), values);
        let (g, big) = extreme_gaps(a, &level)?.expect("Y_n has at least three points");
        let unchanged = mins.last().is_some_and(|prev| prev.key == g.key);
        let row = GapRow {
            n,
            count: level.len(),
            min_gap: Enclosed::from(&g.value),
            max_gap: Enclosed::from(&big.value),
            min_gap_unchanged: unchanged,
        };
        on_row(&row);
        rows.push(row);
        mins.push(g);
        maxs.push(big.value);
        Ok(())
    })?;
    let nonincreasing = mins.windows(2).all(|w| w[1].value.cmp_certified(&w[0].value) != Some(Ordering::Greater));
    let tail = &maxs[(n_max - 1) / 2..];
    let upper = tail.iter().skip(1).fold(tail[0].clone(), |m, x| m.max(x));
    Ok(GapSeries {
        lower_proxy: Enclosed::from(&mins.last().unwrap().value),
        upper_proxy: Enclosed::from(&upper),
        min_gaps: mins.into_iter().map(|g| g.value).collect(),
        rows,
        nonincreasing,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct EntropyRow {
    pub n: usize,
    pub distinct: usize,
    /// `H_n = Σ −p ln p / (n ln θ)`
    pub h: f64,
    pub dim_estimate: f64,
    /// `n·H_n − (n−1)·H_{n−1}`, the entropy gained by the `n`-th digit.
    pub conditional: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct EntropyReport {
    pub rows: Vec<EntropyRow>,
}

/// `H_k` for `k = 1..=n` from the exact multiplicity partition of each level.
pub fn garsia_entropy(a: &AlgebraicNumber, n: usize) -> Result<EntropyReport> {
    garsia_entropy_with(a, n, |_| {})
}

pub fn garsia_entropy_with(a: &AlgebraicNumber, n: usize, mut on_row: impl FnMut(&EntropyRow)) -> Result<EntropyReport> {
    let alphabet = DigitAlphabet::Binary;
    check_budget(alphabet.strings(n), a.settings().budget)?;
    let table = PowerTable::new(a.field(), n)?;
    let ln_theta = a.theta(128).mid_f64().ln();
    let mut rows = Vec::with_capacity(n);
    cached_levels(a, &table, alphabet, n, |k, rec| {
        if k == 0 {
            return Ok(());
        }
        let mut row = entropy_row(k, &rec.mult, ln_theta);
        let prev = rows.last().map_or(0.0, |r: &EntropyRow| r.n as f64 * r.h);
        row.conditional = k as f64 * row.h - prev;
        on_row(&row);
        rows.push(row);
        Ok(())
    })?;
    Ok(EntropyReport { rows })
}

/// Entropy of the partition with probabilities `m·2^{−k}`, grouping equal
/// multiplicities.
pub(crate) fn entropy_row(k: usize, mult: &[u64], ln_theta: f64) -> EntropyRow {
    let mut groups: BTreeMap<u64, u64> = BTreeMap::new();
    for &m in mult {
        *groups.entry(m).or_default() += 1;
    }
    let total: u128 = groups.iter().map(|(&m, &c)| m as u128 * c as u128).sum();
    assert_eq!(total, 1u128 << k, "multiplicities must partition all digit strings");
    let ln2 = std::f64::consts::LN_2;
    // Σ_v −p_v ln p_v with p_v = m/2^k equals Σ_m c_m·(m/2^k)·(k ln 2 − ln m)
    let mut s = 0.0f64;
    for (&m, &c) in &groups {
        let p = m as f64 / (1u128 << k) as f64;
        s += c as f64 * p * (k as f64 * ln2 - (m as f64).ln());
    }
    let h = s / (k as f64 * ln_theta);
    EntropyRow { n: k, distinct: mult.len(), h, dim_estimate: h.min(1.0), conditional: h }
}

#[derive(Clone, Debug, Serialize)]
pub struct GapReductionReport {
    pub sqrt_minpoly: String,
    pub theta: GapSeries,
    pub sqrt_theta: GapSeries,
    /// `g_{2n}(√θ) ≤ g_n(θ)` for every `2n ≤ n_max`, as forced by
    /// `Y_n(θ) ⊆ Y_{2n}(√θ)`.
    pub sqrt_gaps_dominate: bool,
    /// Least-squares slope of `ln g_n` against `n` for θ and for √θ.
    pub theta_slope: f64,
    pub sqrt_slope: f64,
}

pub fn gap_reduction_check(a: &AlgebraicNumber, n_max: usize) -> Result<GapReductionReport> {
    let b = sqrt_step(a)?;
    let ga = gap_series(a, n_max)?;
    let gb = gap_series(&b, n_max)?;
    let dominate = (1..=n_max / 2).all(|n| gb.min_gaps[2 * n - 1].cmp_certified(&ga.min_gaps[n - 1]) != Some(Ordering::Greater));
    Ok(GapReductionReport {
        sqrt_minpoly: b.minpoly().to_string(),
        theta_slope: log_slope(&ga),
        sqrt_slope: log_slope(&gb),
        theta: ga,
        sqrt_theta: gb,
        sqrt_gaps_dominate: dominate,
    })
}

fn log_slope(s: &GapSeries) -> f64 {
    let pts: Vec<(f64, f64)> = s.rows.iter().map(|r| (r.n as f64, r.min_gap.value.max(f64::MIN_POSITIVE).ln())).collect();
    least_squares_slope(&pts)
}

pub(crate) fn least_squares_slope(pts: &[(f64, f64)]) -> f64 {
    let n = pts.len() as f64;
    if pts.len() < 2 {
        return 0.0;
    }
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    sxy / sxx
}
