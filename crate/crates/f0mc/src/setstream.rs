//! F0 over structured set streams. Each stream item is a succinct set
//! description — a DNF formula, a multidimensional range or arithmetic
//! progression, an affine space, or (via reduction) a weighted DNF term —
//! and the estimators consume items whole, never expanding a set into its
//! elements. Ranges compile to DNF terms lazily, one term at a time, so the
//! working space stays O(nd) even though a d-dimensional range can have
//! (2n)^d terms.

use std::collections::BTreeSet;

use crate::error::{Error, Result};
use crate::f0stream::{bucketing_estimate, minimum_estimate, ApproxParams, Strategy};
use crate::formula::{parse_lines, DnfFormula, Literal, Term};
use crate::gf2::{BitMatrix, BitString};
use crate::hashing::{pick_hash_functions, HashCollection, HashFamily};
use crate::solvers::{affine_find_min_into, bounded_sat_dnf, find_min_terms};

// ---------------------------------------------------------------------------
// Range specifications
// ---------------------------------------------------------------------------

/// One dimension of a range item: the integers in `[lo, hi]` congruent to
/// `lo` modulo `2^step_log2`. A plain interval has `step_log2 = 0`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RangeDim {
    pub lo: u64,
    pub hi: u64,
    pub step_log2: u32,
}

impl RangeDim {
    pub fn cardinality(&self) -> u128 {
        (((self.hi - self.lo) >> self.step_log2) + 1) as u128
    }
}

/// A d-dimensional range (or arithmetic progression when steps are present)
/// over n-bit coordinates. Encodings place dimension j at variables
/// `[j*n, (j+1)*n)`, MSB first within each dimension.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RangeSpec {
    pub n: usize,
    pub dims: Vec<RangeDim>,
}

impl RangeSpec {
    pub fn new(n: usize, dims: Vec<RangeDim>) -> Result<Self> {
        if n == 0 || n > 64 {
            return Err(Error::InvalidParams { msg: format!("range width {n} out of 1..=64") });
        }
        if dims.is_empty() {
            return Err(Error::InvalidParams { msg: "range needs at least one dimension".into() });
        }
        let max = if n == 64 { u64::MAX } else { (1u64 << n) - 1 };
        for (j, d) in dims.iter().enumerate() {
            if d.lo > d.hi {
                return Err(Error::InvalidParams {
                    msg: format!("dimension {j}: lo {} > hi {}", d.lo, d.hi),
                });
            }
            if d.hi > max {
                return Err(Error::InvalidParams {
                    msg: format!("dimension {j}: bound {} exceeds {n}-bit range", d.hi),
                });
            }
            if d.step_log2 as usize >= n && d.step_log2 != 0 {
                return Err(Error::InvalidParams {
                    msg: format!("dimension {j}: step 2^{} too wide", d.step_log2),
                });
            }
        }
        Ok(RangeSpec { n, dims })
    }

    pub fn d(&self) -> usize {
        self.dims.len()
    }

    /// Exact number of tuples in the set.
    pub fn cardinality(&self) -> u128 {
        self.dims.iter().map(|d| d.cardinality()).product()
    }
}

#[inline]
fn low_mask(width: usize) -> u64 {
    if width == 0 {
        0
    } else if width >= 64 {
        u64::MAX
    } else {
        (1u64 << width) - 1
    }
}

/// Fixes the top `count` MSB-first bits of `value` (a `width`-bit number)
/// starting at variable `base`.
fn prefix_literals(value: u64, width: usize, count: usize, base: usize) -> Vec<Literal> {
    (0..count)
        .map(|i| Literal { var: base + i, positive: (value >> (width - 1 - i)) & 1 == 1 })
        .collect()
}

/// Raw interval terms for `[lo, hi]` over `width` bits, indexed: the terms
/// partition the interval. Index layout follows the split construction:
/// common prefix, then the low branch (x >= lo with the split bit 0), then
/// the high branch (x <= hi with the split bit 1).
fn interval_term(lo: u64, hi: u64, width: usize, idx: usize) -> Option<Term> {
    debug_assert!(lo <= hi);
    if lo == 0 && hi == low_mask(width) {
        // The whole cube: one tautological term.
        return (idx == 0).then(Term::tautology);
    }
    if lo == hi {
        return (idx == 0).then(|| Term::new(prefix_literals(lo, width, width, 0)).unwrap());
    }
    let split = width - 1 - (63 - (lo ^ hi).leading_zeros()) as usize; // first differing MSB index
    let suffix = width - split - 1;
    let a = lo & low_mask(suffix);
    let b = hi & low_mask(suffix);
    let mut base = prefix_literals(lo, width, split, 0);

    // Low branch: split bit 0, suffix >= a.
    let lo_count = if a == 0 { 1 } else { suffix - (a - 1).count_ones() as usize };
    if idx < lo_count {
        base.push(Literal::neg(split));
        if a == 0 {
            return Some(Term::new(base).unwrap());
        }
        let d = a - 1;
        // idx-th zero bit of d (MSB-first over `suffix` bits): fix bits
        // above it to d's and set it to 1.
        let mut seen = 0usize;
        for i in 0..suffix {
            if (d >> (suffix - 1 - i)) & 1 == 0 {
                if seen == idx {
                    base.extend(prefix_literals(d, suffix, i, split + 1));
                    base.push(Literal::pos(split + 1 + i));
                    return Some(Term::new(base).unwrap());
                }
                seen += 1;
            }
        }
        unreachable!("idx < lo_count");
    }

    // High branch: split bit 1, suffix <= b.
    let idx = idx - lo_count;
    let hi_count = if b == low_mask(suffix) { 1 } else { (b + 1).count_ones() as usize };
    if idx >= hi_count {
        return None;
    }
    base.push(Literal::pos(split));
    if b == low_mask(suffix) {
        return Some(Term::new(base).unwrap());
    }
    let e = b + 1;
    let mut seen = 0usize;
    for i in 0..suffix {
        if (e >> (suffix - 1 - i)) & 1 == 1 {
            if seen == idx {
                base.extend(prefix_literals(e, suffix, i, split + 1));
                base.push(Literal::neg(split + 1 + i));
                return Some(Term::new(base).unwrap());
            }
            seen += 1;
        }
    }
    unreachable!("idx < hi_count");
}

/// The step constraint of a progression dimension: the `step_log2` least
/// significant bits fixed to `lo`'s.
fn step_term(dim: &RangeDim, width: usize) -> Term {
    let lits: Vec<Literal> = (0..dim.step_log2 as usize)
        .map(|b| Literal { var: width - 1 - b, positive: (dim.lo >> b) & 1 == 1 })
        .collect();
    Term::new(lits).unwrap()
}

/// The idx-th surviving term of one dimension (range terms conjoined with
/// the step constraint, contradictions dropped). O(n) time, O(n) space.
fn dim_term(dim: &RangeDim, width: usize, idx: usize) -> Option<Term> {
    let step = step_term(dim, width);
    let mut seen = 0usize;
    for raw in 0.. {
        let t = interval_term(dim.lo, dim.hi, width, raw)?;
        if let Some(merged) = t.conjoin(&step) {
            if seen == idx {
                return Some(merged);
            }
            seen += 1;
        }
    }
    None
}

fn dim_term_count(dim: &RangeDim, width: usize) -> usize {
    let step = step_term(dim, width);
    let mut count = 0usize;
    for raw in 0.. {
        match interval_term(dim.lo, dim.hi, width, raw) {
            Some(t) => {
                if t.conjoin(&step).is_some() {
                    count += 1;
                }
            }
            None => break,
        }
    }
    count
}

/// Lazy term generator for a compiled range: term i is assembled on demand
/// from the per-dimension constructions, so space stays O(nd) while the
/// full formula can have up to (2n)^d terms.
#[derive(Clone, Debug)]
pub struct RangeTermGen {
    spec: RangeSpec,
    counts: Vec<usize>,
    total: u128,
}

impl RangeTermGen {
    pub fn new(spec: &RangeSpec) -> Self {
        let counts: Vec<usize> = spec.dims.iter().map(|d| dim_term_count(d, spec.n)).collect();
        let total = counts.iter().map(|&c| c as u128).product();
        RangeTermGen { spec: spec.clone(), counts, total }
    }

    /// Number of terms of the compiled DNF.
    pub fn total_terms(&self) -> u128 {
        self.total
    }

    /// Variable count of the compiled DNF (n per dimension).
    pub fn var_count(&self) -> usize {
        self.spec.n * self.spec.d()
    }

    /// The i-th term, mixed-radix over dimensions (last dimension fastest).
    pub fn term_at(&self, i: u128) -> Option<Term> {
        if i >= self.total {
            return None;
        }
        let n = self.spec.n;
        let mut rem = i;
        let mut idxs = vec![0usize; self.counts.len()];
        for j in (0..self.counts.len()).rev() {
            idxs[j] = (rem % self.counts[j] as u128) as usize;
            rem /= self.counts[j] as u128;
        }
        let mut lits = Vec::new();
        for (j, (&idx, dim)) in idxs.iter().zip(&self.spec.dims).enumerate() {
            let t = dim_term(dim, n, idx).expect("idx < per-dim count");
            lits.extend(t.shift_vars(j * n).literals().iter().copied());
        }
        Some(Term::new(lits).expect("dimensions use disjoint variables"))
    }

    pub fn iter(&self) -> RangeTermIter<'_> {
        RangeTermIter { gen: self, next: 0 }
    }
}

#[derive(Clone)]
pub struct RangeTermIter<'a> {
    gen: &'a RangeTermGen,
    next: u128,
}

impl Iterator for RangeTermIter<'_> {
    type Item = Term;

    fn next(&mut self) -> Option<Term> {
        let t = self.gen.term_at(self.next)?;
        self.next += 1;
        Some(t)
    }
}

/// Eagerly compiles a step-free range to its DNF over `n*d` variables.
pub fn range_to_dnf(spec: &RangeSpec) -> Result<DnfFormula> {
    if spec.dims.iter().any(|d| d.step_log2 != 0) {
        return Err(Error::InvalidParams {
            msg: "range_to_dnf takes step-free ranges; use progression_to_dnf".into(),
        });
    }
    progression_to_dnf(spec)
}

/// Eagerly compiles a range or progression to its DNF over `n*d` variables.
pub fn progression_to_dnf(spec: &RangeSpec) -> Result<DnfFormula> {
    let gen = RangeTermGen::new(spec);
    if gen.total_terms() > 1 << 22 {
        return Err(Error::InvalidParams {
            msg: format!(
                "eager compilation would produce {} terms; use the lazy generator",
                gen.total_terms()
            ),
        });
    }
    DnfFormula::new(gen.var_count(), gen.iter().collect())
}

/// Exact cardinality of a union of step-free ranges sharing (n, d), by
/// inclusion-exclusion over rectangle intersections. Exponential in the
/// item count; an independent oracle for tests and the weighted reduction.
pub fn ranges_union_cardinality(items: &[RangeSpec]) -> Result<u128> {
    if items.len() > 24 {
        return Err(Error::InvalidParams { msg: "union oracle handles at most 24 items".into() });
    }
    for r in items {
        if r.dims.iter().any(|d| d.step_log2 != 0) {
            return Err(Error::InvalidParams { msg: "union oracle is step-free only".into() });
        }
    }
    let k = items.len();
    let mut acc: i128 = 0;
    for subset in 1u32..(1u32 << k) {
        let mut dims: Option<Vec<RangeDim>> = None;
        for (idx, item) in items.iter().enumerate() {
            if (subset >> idx) & 1 == 0 {
                continue;
            }
            dims = match dims {
                None => Some(item.dims.clone()),
                Some(cur) => {
                    let merged: Vec<RangeDim> = cur
                        .iter()
                        .zip(&item.dims)
                        .map(|(a, b)| RangeDim {
                            lo: a.lo.max(b.lo),
                            hi: a.hi.min(b.hi),
                            step_log2: 0,
                        })
                        .collect();
                    if merged.iter().any(|d| d.lo > d.hi) {
                        None
                    } else {
                        Some(merged)
                    }
                }
            };
            if dims.is_none() {
                break;
            }
        }
        if let Some(dims) = dims {
            let size: u128 = dims.iter().map(|d| d.cardinality()).product();
            if subset.count_ones() % 2 == 1 {
                acc += size as i128;
            } else {
                acc -= size as i128;
            }
        }
    }
    Ok(acc as u128)
}

// ---------------------------------------------------------------------------
// Affine sets and weighted DNF
// ---------------------------------------------------------------------------

/// The solution set of `Ax = B` over n variables, as a stream item.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AffineSet {
    pub a: BitMatrix,
    pub b: BitString,
}

impl AffineSet {
    pub fn new(a: BitMatrix, b: BitString) -> Result<Self> {
        if a.nrows() != b.len() {
            return Err(Error::WidthMismatch { expected: a.nrows(), got: b.len() });
        }
        Ok(AffineSet { a, b })
    }

    pub fn n(&self) -> usize {
        self.a.ncols()
    }
}

/// Per-variable weight `k / 2^m` with `1 <= k < 2^m`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct DyadicWeight {
    pub k: u64,
    pub m: u32,
}

impl DyadicWeight {
    pub fn value(&self) -> f64 {
        self.k as f64 / 2f64.powi(self.m as i32)
    }
}

/// A DNF with dyadic literal weights, for weighted model counting.
#[derive(Clone, Debug)]
pub struct WeightedDnf {
    pub phi: DnfFormula,
    pub weights: Vec<DyadicWeight>,
}

impl WeightedDnf {
    pub fn new(phi: DnfFormula, weights: Vec<DyadicWeight>) -> Result<Self> {
        if weights.len() != phi.n {
            return Err(Error::InvalidParams {
                msg: format!("expected {} weights, got {}", phi.n, weights.len()),
            });
        }
        for (i, w) in weights.iter().enumerate() {
            if w.m == 0 || w.m > 32 || w.k == 0 || w.k >= 1u64 << w.m {
                return Err(Error::InvalidParams {
                    msg: format!("weight for variable {}: need 1 <= k < 2^m, m in 1..=32", i + 1),
                });
            }
        }
        Ok(WeightedDnf { phi, weights })
    }

    /// Sum of the weight's denominators' exponents: the reduction divides
    /// the range-stream F0 by `2^total_m`.
    pub fn total_m(&self) -> u32 {
        self.weights.iter().map(|w| w.m).sum()
    }
}

/// Maps each term to a product of per-variable intervals, one dimension per
/// variable: `x_i -> [0, k_i - 1]`, `not x_i -> [k_i, 2^{m_i} - 1]`, and a
/// variable absent from the term spans its full interval so the rectangle
/// covers all completions. (These are the 0-based twins of the 1-based
/// intervals `[1, k]` / `[k+1, 2^m]`.) All dimensions share the width
/// `max m_i`; padding high bits does not change tuple counts because the
/// intervals themselves are unchanged.
pub fn weighted_to_ranges(wphi: &WeightedDnf) -> Result<Vec<RangeSpec>> {
    let width = wphi.weights.iter().map(|w| w.m).max().unwrap_or(1) as usize;
    let mut items = Vec::with_capacity(wphi.phi.terms.len());
    for term in &wphi.phi.terms {
        let mut dims: Vec<RangeDim> = wphi
            .weights
            .iter()
            .map(|w| RangeDim { lo: 0, hi: (1u64 << w.m) - 1, step_log2: 0 })
            .collect();
        for lit in term.literals() {
            let w = &wphi.weights[lit.var];
            dims[lit.var] = if lit.positive {
                RangeDim { lo: 0, hi: w.k - 1, step_log2: 0 }
            } else {
                RangeDim { lo: w.k, hi: (1u64 << w.m) - 1, step_log2: 0 }
            };
        }
        items.push(RangeSpec::new(width, dims)?);
    }
    Ok(items)
}

// ---------------------------------------------------------------------------
// Stream estimators
// ---------------------------------------------------------------------------

/// F0 estimator over a stream of DNF-described sets. The Minimum strategy
/// (the default choice) merges per-item FindMin outputs row by row; the
/// Bucketing alternative keeps cell contents per row and re-derives them
/// from a replay log of all items whenever a level rises, trading memory
/// linear in the stream length for the alternative formulation.
pub struct DnfStreamEstimator {
    n: usize,
    strategy: Strategy,
    thresh: u64,
    hashes: HashCollection,
    min_rows: Vec<BTreeSet<BitString>>,
    bucket_rows: Vec<(BTreeSet<BitString>, u32)>,
    replay: Vec<DnfFormula>,
}

impl DnfStreamEstimator {
    pub fn new(n: usize, strategy: Strategy, params: &ApproxParams, seed: u64) -> Result<Self> {
        let hashes = match strategy {
            Strategy::Minimum => {
                pick_hash_functions(HashFamily::Toeplitz, n, 3 * n, params.t, seed)?
            }
            Strategy::Bucketing => {
                pick_hash_functions(HashFamily::Toeplitz, n, n, params.t, seed)?
            }
            Strategy::Estimation => {
                return Err(Error::InvalidParams {
                    msg: "set streams support the minimum and bucketing strategies".into(),
                })
            }
        };
        Ok(DnfStreamEstimator {
            n,
            strategy,
            thresh: params.thresh,
            min_rows: vec![BTreeSet::new(); params.t],
            bucket_rows: vec![(BTreeSet::new(), 0); params.t],
            hashes,
            replay: Vec::new(),
        })
    }

    pub fn strategy(&self) -> Strategy {
        self.strategy
    }

    /// Minimum rows, for merge/equality tests.
    pub fn min_rows(&self) -> &[BTreeSet<BitString>] {
        &self.min_rows
    }

    /// Processes one DNF item.
    pub fn push_formula(&mut self, phi: &DnfFormula) -> Result<()> {
        if phi.n != self.n {
            return Err(Error::InconsistentStream {
                msg: format!("item has {} variables, stream is over {}", phi.n, self.n),
            });
        }
        match self.strategy {
            Strategy::Minimum => {
                for (i, row) in self.min_rows.iter_mut().enumerate() {
                    find_min_terms(
                        self.n,
                        phi.terms.iter().cloned(),
                        self.hashes.get(i),
                        self.thresh,
                        row,
                    )?;
                }
                Ok(())
            }
            Strategy::Bucketing => {
                self.replay.push(phi.clone());
                let replay = &self.replay;
                let hashes = &self.hashes;
                let n = self.n;
                let thresh = self.thresh;
                for (i, (cell, level)) in self.bucket_rows.iter_mut().enumerate() {
                    let h = hashes.get(i);
                    let res = bounded_sat_dnf(phi, &h.prefix_slice(*level as usize)?, thresh + 1)?;
                    cell.extend(res.witnesses);
                    'raise: while cell.len() as u64 > thresh {
                        if *level as usize >= n {
                            return Err(Error::PathologicalHash { row: i, level: *level });
                        }
                        *level += 1;
                        cell.clear();
                        // Capped witness sets cannot be filtered in place;
                        // re-derive the cell from every item seen so far.
                        for item in replay {
                            let res = bounded_sat_dnf(
                                item,
                                &h.prefix_slice(*level as usize)?,
                                thresh + 1,
                            )?;
                            for w in res.witnesses {
                                cell.insert(w);
                                if cell.len() as u64 > thresh {
                                    continue 'raise;
                                }
                            }
                        }
                    }
                }
                Ok(())
            }
            Strategy::Estimation => unreachable!("rejected at construction"),
        }
    }

    /// Processes one item given as a lazily generated term sequence
    /// (Minimum strategy only — the Bucketing path needs a replayable
    /// formula).
    pub fn push_terms<I>(&mut self, var_count: usize, terms: I) -> Result<()>
    where
        I: Iterator<Item = Term> + Clone,
    {
        if var_count != self.n {
            return Err(Error::InconsistentStream {
                msg: format!("item has {var_count} variables, stream is over {}", self.n),
            });
        }
        if self.strategy != Strategy::Minimum {
            return Err(Error::InvalidParams {
                msg: "lazy term items require the minimum strategy".into(),
            });
        }
        for (i, row) in self.min_rows.iter_mut().enumerate() {
            find_min_terms(self.n, terms.clone(), self.hashes.get(i), self.thresh, row)?;
        }
        Ok(())
    }

    pub fn estimate(&self) -> f64 {
        match self.strategy {
            Strategy::Minimum => minimum_estimate(self.min_rows.iter(), self.thresh, 3 * self.n),
            Strategy::Bucketing => {
                let counts: Vec<(u64, u32)> =
                    self.bucket_rows.iter().map(|(c, m)| (c.len() as u64, *m)).collect();
                bucketing_estimate(&counts)
            }
            Strategy::Estimation => unreachable!("rejected at construction"),
        }
    }
}

/// (eps, delta)-estimate of `|sol(phi_1 v ... v phi_M)|` over a DNF stream.
pub fn f0_dnf_stream<'a, I>(
    items: I,
    eps: f64,
    delta: f64,
    seed: u64,
    strategy: Strategy,
) -> Result<f64>
where
    I: IntoIterator<Item = &'a DnfFormula>,
{
    let params = ApproxParams::new(eps, delta)?;
    let mut est: Option<DnfStreamEstimator> = None;
    for phi in items {
        let e = match &mut est {
            Some(e) => e,
            None => est.insert(DnfStreamEstimator::new(phi.n, strategy, &params, seed)?),
        };
        e.push_formula(phi)?;
    }
    Ok(est.map(|e| e.estimate()).unwrap_or(0.0))
}

/// (eps, delta)-estimate of the union cardinality of range items, all
/// sharing (n, d). Items compile lazily and feed the Minimum-strategy DNF
/// stream over `n*d` variables.
pub fn f0_ranges<'a, I>(items: I, eps: f64, delta: f64, seed: u64) -> Result<f64>
where
    I: IntoIterator<Item = &'a RangeSpec>,
{
    let params = ApproxParams::new(eps, delta)?;
    let mut est: Option<DnfStreamEstimator> = None;
    let mut shape: Option<(usize, usize)> = None;
    for spec in items {
        match shape {
            None => shape = Some((spec.n, spec.d())),
            Some((n, d)) if (spec.n, spec.d()) != (n, d) => {
                return Err(Error::InconsistentStream {
                    msg: format!(
                        "range item has shape n={} d={}, stream is n={n} d={d}",
                        spec.n,
                        spec.d()
                    ),
                });
            }
            _ => {}
        }
        let gen = RangeTermGen::new(spec);
        let e = match &mut est {
            Some(e) => e,
            None => est.insert(DnfStreamEstimator::new(
                gen.var_count(),
                Strategy::Minimum,
                &params,
                seed,
            )?),
        };
        e.push_terms(gen.var_count(), gen.iter())?;
    }
    Ok(est.map(|e| e.estimate()).unwrap_or(0.0))
}

/// (eps, delta)-estimate of `|U_i {x : A_i x = B_i}|` over affine items.
pub fn f0_affine_stream<'a, I>(items: I, eps: f64, delta: f64, seed: u64) -> Result<f64>
where
    I: IntoIterator<Item = &'a AffineSet>,
{
    let params = ApproxParams::new(eps, delta)?;
    let mut state: Option<(HashCollection, Vec<BTreeSet<BitString>>, usize)> = None;
    for item in items {
        let n = item.n();
        let (hashes, rows, width) = match &mut state {
            Some(s) => s,
            None => {
                let hashes = pick_hash_functions(HashFamily::Toeplitz, n, 3 * n, params.t, seed)?;
                state.insert((hashes, vec![BTreeSet::new(); params.t], n))
            }
        };
        if n != *width {
            return Err(Error::InconsistentStream {
                msg: format!("affine item over {n} variables, stream is over {width}"),
            });
        }
        for (i, row) in rows.iter_mut().enumerate() {
            affine_find_min_into(&item.a, &item.b, hashes.get(i), params.thresh, row)?;
        }
    }
    Ok(state
        .map(|(_, rows, width)| minimum_estimate(rows.iter(), params.thresh, 3 * width))
        .unwrap_or(0.0))
}

/// (eps, delta)-estimate of the weighted model count `W(phi)` via the
/// range-stream reduction: each term becomes an n-dimensional rectangle,
/// and `W(phi) = F0 / 2^{sum_i m_i}`.
pub fn weighted_dnf_count(wphi: &WeightedDnf, eps: f64, delta: f64, seed: u64) -> Result<f64> {
    let items = weighted_to_ranges(wphi)?;
    if items.is_empty() {
        return Ok(0.0);
    }
    let f0 = f0_ranges(items.iter(), eps, delta, seed)?;
    Ok(f0 / 2f64.powi(wphi.total_m() as i32))
}

// ---------------------------------------------------------------------------
// Stream file formats
// ---------------------------------------------------------------------------

/// Range stream file: header `n=<int> d=<int>`, then one item per line,
/// dimensions separated by `;`, each `lo hi [step]`.
pub fn parse_range_stream(text: &str) -> Result<(usize, usize, Vec<RangeSpec>)> {
    let mut header: Option<(usize, usize)> = None;
    let mut items = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = lineno + 1;
        let trimmed = raw.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        match header {
            None => {
                let mut n = None;
                let mut d = None;
                for tok in trimmed.split_whitespace() {
                    if let Some(v) = tok.strip_prefix("n=") {
                        n = v.parse().ok();
                    } else if let Some(v) = tok.strip_prefix("d=") {
                        d = v.parse().ok();
                    }
                }
                match (n, d) {
                    (Some(n), Some(d)) => header = Some((n, d)),
                    _ => return Err(Error::parse(line, 1, "expected header 'n=<int> d=<int>'")),
                }
            }
            Some((n, d)) => {
                let dims: Vec<RangeDim> = trimmed
                    .split(';')
                    .map(|part| {
                        let nums: Vec<u64> = part
                            .split_whitespace()
                            .map(|t| {
                                t.parse::<u64>()
                                    .map_err(|_| Error::parse(line, 1, format!("bad number '{t}'")))
                            })
                            .collect::<Result<_>>()?;
                        match nums.as_slice() {
                            [lo, hi] => Ok(RangeDim { lo: *lo, hi: *hi, step_log2: 0 }),
                            [lo, hi, step] => {
                                if !step.is_power_of_two() {
                                    return Err(Error::parse(
                                        line,
                                        1,
                                        format!("step {step} must be a power of two"),
                                    ));
                                }
                                Ok(RangeDim { lo: *lo, hi: *hi, step_log2: step.trailing_zeros() })
                            }
                            _ => Err(Error::parse(line, 1, "dimension needs 'lo hi [step]'")),
                        }
                    })
                    .collect::<Result<_>>()?;
                if dims.len() != d {
                    return Err(Error::parse(line, 1, format!("expected {d} dimensions")));
                }
                items.push(
                    RangeSpec::new(n, dims).map_err(|e| Error::parse(line, 1, e.to_string()))?,
                );
            }
        }
    }
    let (n, d) = header.ok_or_else(|| Error::parse(1, 1, "missing 'n=<int> d=<int>' header"))?;
    Ok((n, d, items))
}

/// Affine stream file: header `n=<int>`, then per item n hex rows of A
/// followed by a `|`-prefixed hex B line.
pub fn parse_affine_stream(text: &str) -> Result<(usize, Vec<AffineSet>)> {
    let mut n: Option<usize> = None;
    let mut items = Vec::new();
    let mut rows: Vec<BitString> = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = lineno + 1;
        let trimmed = raw.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        match n {
            None => {
                n = Some(
                    trimmed
                        .strip_prefix("n=")
                        .and_then(|v| v.parse().ok())
                        .ok_or_else(|| Error::parse(line, 1, "expected header 'n=<int>'"))?,
                );
            }
            Some(width) => {
                if let Some(rest) = trimmed.strip_prefix('|') {
                    if rows.len() != width {
                        return Err(Error::parse(
                            line,
                            1,
                            format!("item has {} rows of A, expected {width}", rows.len()),
                        ));
                    }
                    let b = BitString::parse(rest.trim(), width)
                        .map_err(|e| Error::parse(line, 1, e.to_string()))?;
                    items.push(AffineSet::new(
                        BitMatrix::from_rows(std::mem::take(&mut rows)),
                        b,
                    )?);
                } else {
                    let row = BitString::parse(trimmed, width)
                        .map_err(|e| Error::parse(line, 1, e.to_string()))?;
                    if rows.len() == width {
                        return Err(Error::parse(line, 1, "too many matrix rows before '|'"));
                    }
                    rows.push(row);
                }
            }
        }
    }
    if !rows.is_empty() {
        return Err(Error::parse(text.lines().count(), 1, "unterminated affine item"));
    }
    let n = n.ok_or_else(|| Error::parse(1, 1, "missing 'n=<int>' header"))?;
    Ok((n, items))
}

/// DNF stream file: `.dnf` blocks separated by `---` lines.
pub fn parse_dnf_stream(text: &str) -> Result<Vec<DnfFormula>> {
    text.split("\n---")
        .map(|block| block.trim_start_matches('-'))
        .filter(|block| !block.trim().is_empty())
        .map(crate::formula::parse_dnf)
        .collect()
}

/// Weighted DNF file: the `.dnf` format with header kind `wdnf` and
/// trailing weight lines `w <var> <k> <m>` declaring `rho(var) = k / 2^m`.
/// Unweighted variables default to 1/2.
pub fn parse_weighted_dnf(text: &str) -> Result<WeightedDnf> {
    let mut formula_lines = Vec::new();
    let mut weight_lines = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let trimmed = raw.trim();
        if trimmed.starts_with("w ") {
            weight_lines.push((lineno + 1, trimmed.to_string()));
        } else {
            formula_lines.push(raw);
        }
    }
    let (n, _, groups) = parse_lines(&formula_lines.join("\n"), "wdnf")?;
    let terms = groups.into_iter().map(Term::new).collect::<Result<_>>()?;
    let phi = DnfFormula::new(n, terms)?;
    let mut weights = vec![DyadicWeight { k: 1, m: 1 }; n];
    for (line, text) in weight_lines {
        let toks: Vec<&str> = text.split_whitespace().collect();
        if toks.len() != 4 || toks[0] != "w" {
            return Err(Error::parse(line, 1, "expected 'w <var> <k> <m>'"));
        }
        let var: usize = toks[1]
            .parse()
            .map_err(|_| Error::parse(line, 1, "bad variable index"))?;
        if var == 0 || var > n {
            return Err(Error::parse(line, 1, format!("variable {var} out of range 1..={n}")));
        }
        let k: u64 = toks[2].parse().map_err(|_| Error::parse(line, 1, "bad k"))?;
        let m: u32 = toks[3].parse().map_err(|_| Error::parse(line, 1, "bad m"))?;
        weights[var - 1] = DyadicWeight { k, m };
    }
    WeightedDnf::new(phi, weights)
}
