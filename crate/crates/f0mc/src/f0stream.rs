//! The unified streaming architecture: one estimator shell with three
//! interchangeable strategies. Each strategy keeps a sketch whose final
//! contents depend only on the *set* of stream elements (given the hash
//! draw), never on order or multiplicity, so the same sketches can later be
//! rebuilt from a formula instead of a stream.
//!
//! Strategy summary, per row i of `t` rows:
//!
//! - Bucketing: the elements hashing to the all-zero m_i-bit prefix, with
//!   m_i raised whenever the cell overflows `Thresh`.
//! - Minimum: the `Thresh` lexicographically smallest distinct hash values.
//! - Estimation: per (i, j) cell, the largest trailing-zero count seen.

use std::collections::BTreeSet;

use crate::error::{Error, Result};
use crate::gf2::BitString;
use crate::hashing::{
    pick_hash_functions, pick_poly_grid, trail_zero, HashCollection, HashFamily,
};

/// Which of the three estimation strategies drives a sketch.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Strategy {
    Bucketing,
    Minimum,
    Estimation,
}

impl Strategy {
    pub fn name(self) -> &'static str {
        match self {
            Strategy::Bucketing => "bucketing",
            Strategy::Minimum => "minimum",
            Strategy::Estimation => "estimation",
        }
    }
}

impl std::str::FromStr for Strategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "bucketing" | "bucket" => Ok(Strategy::Bucketing),
            "minimum" | "min" => Ok(Strategy::Minimum),
            "estimation" | "est" => Ok(Strategy::Estimation),
            other => Err(Error::InvalidParams { msg: format!("unknown strategy '{other}'") }),
        }
    }
}

/// Accuracy parameters and the sketch dimensions they induce.
///
/// `thresh = ceil(96 / eps^2)`; `t` is the smallest odd integer at least
/// `35 ln(1/delta)` (odd so the median is an element of the sample); `s` is
/// the polynomial degree for the Estimation family,
/// `max(2, ceil(10 ln(1/eps)))`.
#[derive(Clone, Copy, Debug)]
pub struct ApproxParams {
    pub eps: f64,
    pub delta: f64,
    pub thresh: u64,
    pub t: usize,
    pub s: usize,
}

impl ApproxParams {
    pub fn new(eps: f64, delta: f64) -> Result<Self> {
        if !(eps > 0.0 && eps <= 1.0) {
            return Err(Error::InvalidParams { msg: format!("eps must be in (0, 1], got {eps}") });
        }
        if !(delta > 0.0 && delta < 1.0) {
            return Err(Error::InvalidParams { msg: format!("delta must be in (0, 1), got {delta}") });
        }
        let thresh = (96.0 / (eps * eps)).ceil() as u64;
        let raw_t = 35.0 * (1.0 / delta).ln();
        let mut t = (raw_t.ceil() as usize).max(1);
        if t % 2 == 0 {
            t += 1;
        }
        let s = ((10.0 * (1.0 / eps).ln()).ceil() as usize).max(2);
        Ok(ApproxParams { eps, delta, thresh, t, s })
    }
}

/// Lower median of a sample; for odd lengths this is the middle element.
/// Infinities participate via total order.
pub fn median(values: &mut [f64]) -> f64 {
    debug_assert!(!values.is_empty());
    values.sort_by(f64::total_cmp);
    values[(values.len() - 1) / 2]
}

// ---------------------------------------------------------------------------
// Sketches
// ---------------------------------------------------------------------------

/// One Bucketing row: the raw elements currently in the cell and the
/// sampling level. Every stored element satisfies the prefix condition at
/// the current level, and the cell never exceeds `thresh` elements.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BucketRow {
    pub elements: BTreeSet<BitString>,
    pub level: u32,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BucketSketch {
    pub rows: Vec<BucketRow>,
}

impl BucketSketch {
    pub fn new(t: usize) -> Self {
        BucketSketch {
            rows: (0..t).map(|_| BucketRow { elements: BTreeSet::new(), level: 0 }).collect(),
        }
    }

    /// The counting-side view: (cell size, level) per row.
    pub fn counts(&self) -> Vec<(u64, u32)> {
        self.rows.iter().map(|r| (r.elements.len() as u64, r.level)).collect()
    }
}

/// Minimum-strategy sketch: per row, the `thresh` smallest distinct hash
/// values seen, each `value_width` bits wide.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MinSketch {
    pub rows: Vec<BTreeSet<BitString>>,
    pub value_width: usize,
}

impl MinSketch {
    pub fn new(t: usize, value_width: usize) -> Self {
        MinSketch { rows: vec![BTreeSet::new(); t], value_width }
    }
}

/// Estimation-strategy sketch: a `t x width` grid of trailing-zero maxima.
/// A fresh cell holds 0, which is indistinguishable from "seen only values
/// with no trailing zeros"; the estimator only reads cells through
/// indicators at r >= 1, where the two coincide.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EstSketch {
    pub t: usize,
    pub width: usize,
    pub cells: Vec<u32>,
}

impl EstSketch {
    pub fn new(t: usize, width: usize) -> Self {
        EstSketch { t, width, cells: vec![0; t * width] }
    }

    pub fn cell(&self, i: usize, j: usize) -> u32 {
        self.cells[i * self.width + j]
    }

    pub fn cell_mut(&mut self, i: usize, j: usize) -> &mut u32 {
        &mut self.cells[i * self.width + j]
    }

    /// Cell-wise maximum with another sketch of the same shape.
    pub fn merge_max(&mut self, other: &EstSketch) {
        debug_assert_eq!((self.t, self.width), (other.t, other.width));
        for (a, b) in self.cells.iter_mut().zip(&other.cells) {
            *a = (*a).max(*b);
        }
    }
}

// ---------------------------------------------------------------------------
// Update rules
// ---------------------------------------------------------------------------

/// Bucketing update: insert when the hashed prefix is all zero, then raise
/// the level (re-filtering survivors) while the cell is over `thresh`.
/// Exhausting all n levels while still over threshold is a pathological-hash
/// event and errors.
pub fn process_update_bucketing(
    sketch: &mut BucketSketch,
    hashes: &HashCollection,
    x: &BitString,
    thresh: u64,
) -> Result<()> {
    for (i, row) in sketch.rows.iter_mut().enumerate() {
        let h = hashes.get(i);
        let y = h.eval(x)?;
        if !y.prefix(row.level as usize).is_zero() {
            continue;
        }
        row.elements.insert(x.clone());
        while row.elements.len() as u64 > thresh {
            if row.level as usize >= hashes.m {
                return Err(Error::PathologicalHash { row: i, level: row.level });
            }
            row.level += 1;
            let level = row.level as usize;
            let mut kept = BTreeSet::new();
            for e in &row.elements {
                if h.eval(e)?.prefix(level).is_zero() {
                    kept.insert(e.clone());
                }
            }
            row.elements = kept;
        }
    }
    Ok(())
}

/// Minimum update: keep the `thresh` smallest distinct hash values per row.
pub fn process_update_minimum(
    sketch: &mut MinSketch,
    hashes: &HashCollection,
    x: &BitString,
    thresh: u64,
) -> Result<()> {
    for (i, row) in sketch.rows.iter_mut().enumerate() {
        let y = hashes.get(i).eval(x)?;
        if row.contains(&y) {
            continue;
        }
        if (row.len() as u64) < thresh {
            row.insert(y);
        } else if let Some(max) = row.last() {
            if y < *max {
                let max = max.clone();
                row.remove(&max);
                row.insert(y);
            }
        }
    }
    Ok(())
}

/// Estimation update: cell-wise max with the trailing-zero count of each
/// grid hash.
pub fn process_update_estimation(
    sketch: &mut EstSketch,
    hashes: &HashCollection,
    x: &BitString,
) -> Result<()> {
    for i in 0..sketch.t {
        for j in 0..sketch.width {
            let tz = trail_zero(&hashes.get2(i, j).eval(x)?);
            let cell = sketch.cell_mut(i, j);
            *cell = (*cell).max(tz);
        }
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Estimates
// ---------------------------------------------------------------------------

/// Bucketing estimate: median over rows of `count * 2^level`.
pub fn bucketing_estimate(rows: &[(u64, u32)]) -> f64 {
    let mut vals: Vec<f64> =
        rows.iter().map(|&(c, m)| c as f64 * 2f64.powi(m as i32)).collect();
    median(&mut vals)
}

/// Minimum estimate: median over rows of `thresh * 2^m / max(row)`, where
/// the max is the numeric value of the largest stored string. A row holding
/// fewer than `thresh` values has seen the whole hash image, so its distinct
/// count is known exactly and the row short-circuits to its size.
pub fn minimum_estimate<'a, I>(rows: I, thresh: u64, value_width: usize) -> f64
where
    I: IntoIterator<Item = &'a BTreeSet<BitString>>,
{
    let mut vals: Vec<f64> = rows
        .into_iter()
        .map(|row| {
            if (row.len() as u64) < thresh {
                row.len() as f64
            } else {
                let max = row.last().expect("row is non-empty at thresh > 0");
                thresh as f64 * 2f64.powi(value_width as i32) / max.to_f64()
            }
        })
        .collect();
    if vals.is_empty() {
        return 0.0;
    }
    median(&mut vals)
}

/// Estimation estimate at resolution `r`: per row,
/// `ln(1 - mean_j 1{cell >= r}) / ln(1 - 2^-r)`, with a fully saturated row
/// treated as +inf. All rows saturated is an "r too small" error.
pub fn estimation_estimate(sketch: &EstSketch, r: u32) -> Result<f64> {
    if r < 1 {
        return Err(Error::InvalidParams { msg: "estimation requires r >= 1".into() });
    }
    let mut vals = Vec::with_capacity(sketch.t);
    let mut saturated = 0usize;
    for i in 0..sketch.t {
        let hits = (0..sketch.width).filter(|&j| sketch.cell(i, j) >= r).count();
        if hits == sketch.width {
            saturated += 1;
            vals.push(f64::INFINITY);
        } else {
            let mean = hits as f64 / sketch.width as f64;
            vals.push((1.0 - mean).ln() / (1.0 - 0.5f64.powi(r as i32)).ln());
        }
    }
    if saturated == sketch.t {
        return Err(Error::RTooSmall { r });
    }
    Ok(median(&mut vals))
}

/// The strategy-tagged sketch state.
#[derive(Clone, Debug)]
pub enum SketchState {
    Bucketing(BucketSketch),
    Minimum(MinSketch),
    Estimation(EstSketch),
}

/// Estimate dispatch over a finished sketch (Algorithm-4 shape).
/// Estimation requires `r`.
pub fn compute_est(state: &SketchState, thresh: u64, r: Option<u32>) -> Result<f64> {
    match state {
        SketchState::Bucketing(sk) => Ok(bucketing_estimate(&sk.counts())),
        SketchState::Minimum(sk) => Ok(minimum_estimate(sk.rows.iter(), thresh, sk.value_width)),
        SketchState::Estimation(sk) => {
            let r = r.ok_or(Error::InvalidParams { msg: "estimation needs r".into() })?;
            estimation_estimate(sk, r)
        }
    }
}

// ---------------------------------------------------------------------------
// The estimator shell
// ---------------------------------------------------------------------------

/// Seed offset for the rough-estimator hash draw, so the Estimation
/// strategy's auxiliary hashes never collide with the sketch's own.
const FM_SEED_SALT: u64 = 0x9e37_79b9_7f4a_7c15;

/// Tracks, per repetition, the largest trailing-zero count of an xor-family
/// hash over the stream; the median is the rough log2(F0) estimate.
#[derive(Clone, Debug)]
pub struct FmTracker {
    hashes: HashCollection,
    pub maxes: Vec<u32>,
}

impl FmTracker {
    pub fn new(n: usize, repetitions: usize, seed: u64) -> Result<Self> {
        let hashes = pick_hash_functions(HashFamily::Xor, n, n, repetitions, seed)?;
        Ok(FmTracker { hashes, maxes: vec![0; repetitions] })
    }

    pub fn push(&mut self, x: &BitString) -> Result<()> {
        for (i, max) in self.maxes.iter_mut().enumerate() {
            *max = (*max).max(trail_zero(&self.hashes.get(i).eval(x)?));
        }
        Ok(())
    }

    /// Lower median of the per-repetition maxima.
    pub fn r_raw(&self) -> u32 {
        let mut m = self.maxes.clone();
        m.sort_unstable();
        m[(m.len() - 1) / 2]
    }
}

/// Picks `r` for the Estimation estimate given a rough log-estimate `r_raw`.
///
/// Candidates `r in [r_raw - 3, r_raw + 3]` (clamped to `[1, n]`) are tried
/// in ascending order and the first whose estimate `e` is self-consistent
/// with the validity window (`2e <= 2^r <= 50e`) wins. If none is, the
/// smallest candidate with a finite positive estimate wins; an all-zero
/// sketch yields 0; otherwise the sketch is saturated everywhere and the
/// error propagates.
pub fn select_r(sketch: &EstSketch, n: usize, r_raw: u32) -> Result<(u32, f64)> {
    let lo = r_raw.saturating_sub(3).max(1);
    let hi = (r_raw + 3).min(n as u32).max(lo);
    let mut first_finite: Option<(u32, f64)> = None;
    let mut all_zero = true;
    for r in lo..=hi {
        match estimation_estimate(sketch, r) {
            Ok(e) if e.is_finite() => {
                if e > 0.0 {
                    all_zero = false;
                    if first_finite.is_none() {
                        first_finite = Some((r, e));
                    }
                    let cells = 2f64.powi(r as i32);
                    if 2.0 * e <= cells && cells <= 50.0 * e {
                        return Ok((r, e));
                    }
                }
            }
            Ok(_) => all_zero = false, // non-finite median, keep scanning
            Err(Error::RTooSmall { .. }) => all_zero = false,
            Err(e) => return Err(e),
        }
    }
    if let Some(hit) = first_finite {
        return Ok(hit);
    }
    if all_zero {
        return Ok((lo, 0.0));
    }
    Err(Error::RTooSmall { r: hi })
}

/// Incremental F0 estimator over a plain element stream.
pub struct F0Estimator {
    n: usize,
    strategy: Strategy,
    thresh: u64,
    hashes: HashCollection,
    state: SketchState,
    fm: Option<FmTracker>,
}

impl F0Estimator {
    /// Draws the strategy's hash functions from the seed and initializes an
    /// empty sketch. For the Estimation strategy a rough-estimator tracker is
    /// maintained alongside so `estimate(None)` can derive `r` itself.
    pub fn new(n: usize, strategy: Strategy, params: &ApproxParams, seed: u64) -> Result<Self> {
        let (hashes, state) = match strategy {
            Strategy::Bucketing => (
                pick_hash_functions(HashFamily::Toeplitz, n, n, params.t, seed)?,
                SketchState::Bucketing(BucketSketch::new(params.t)),
            ),
            Strategy::Minimum => (
                pick_hash_functions(HashFamily::Toeplitz, n, 3 * n, params.t, seed)?,
                SketchState::Minimum(MinSketch::new(params.t, 3 * n)),
            ),
            Strategy::Estimation => (
                pick_poly_grid(n, params.s, params.t, params.thresh as usize, seed)?,
                SketchState::Estimation(EstSketch::new(params.t, params.thresh as usize)),
            ),
        };
        let fm = match strategy {
            Strategy::Estimation => Some(FmTracker::new(n, params.t, seed ^ FM_SEED_SALT)?),
            _ => None,
        };
        Ok(F0Estimator { n, strategy, thresh: params.thresh, hashes, state, fm })
    }

    /// Wraps an explicit hash draw; used when two code paths must share H.
    pub fn from_hashes(
        n: usize,
        strategy: Strategy,
        hashes: HashCollection,
        thresh: u64,
    ) -> Result<Self> {
        let state = match strategy {
            Strategy::Bucketing => SketchState::Bucketing(BucketSketch::new(hashes.rows())),
            Strategy::Minimum => SketchState::Minimum(MinSketch::new(hashes.rows(), hashes.m)),
            Strategy::Estimation => {
                SketchState::Estimation(EstSketch::new(hashes.rows(), hashes.cols()))
            }
        };
        Ok(F0Estimator { n, strategy, thresh, hashes, state, fm: None })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn strategy(&self) -> Strategy {
        self.strategy
    }

    pub fn state(&self) -> &SketchState {
        &self.state
    }

    pub fn hashes(&self) -> &HashCollection {
        &self.hashes
    }

    pub fn push(&mut self, x: &BitString) -> Result<()> {
        if x.len() != self.n {
            return Err(Error::WidthMismatch { expected: self.n, got: x.len() });
        }
        match &mut self.state {
            SketchState::Bucketing(sk) => {
                process_update_bucketing(sk, &self.hashes, x, self.thresh)?
            }
            SketchState::Minimum(sk) => process_update_minimum(sk, &self.hashes, x, self.thresh)?,
            SketchState::Estimation(sk) => process_update_estimation(sk, &self.hashes, x)?,
        }
        if let Some(fm) = &mut self.fm {
            fm.push(x)?;
        }
        Ok(())
    }

    /// Final estimate. For Estimation, `r` may be supplied; otherwise it is
    /// chosen via the tracked rough estimate (see [`select_r`]).
    pub fn estimate(&self, r: Option<u32>) -> Result<f64> {
        match (&self.state, r) {
            (SketchState::Estimation(sk), None) => {
                let fm = self.fm.as_ref().ok_or(Error::InvalidParams {
                    msg: "estimation sketch built from explicit hashes needs r".into(),
                })?;
                Ok(select_r(sk, self.n, fm.r_raw())?.1)
            }
            _ => compute_est(&self.state, self.thresh, r),
        }
    }

    /// Stable textual dump of the sketch, one row per line.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        match &self.state {
            SketchState::Bucketing(sk) => {
                for (i, row) in sk.rows.iter().enumerate() {
                    let elems: Vec<String> =
                        row.elements.iter().map(|e| e.to_hex_string()).collect();
                    out.push_str(&format!(
                        "row {i} level={} count={} elems={}\n",
                        row.level,
                        row.elements.len(),
                        elems.join(",")
                    ));
                }
            }
            SketchState::Minimum(sk) => {
                for (i, row) in sk.rows.iter().enumerate() {
                    let vals: Vec<String> = row.iter().map(|e| e.to_hex_string()).collect();
                    out.push_str(&format!("row {i} values={}\n", vals.join(",")));
                }
            }
            SketchState::Estimation(sk) => {
                for i in 0..sk.t {
                    let cells: Vec<String> =
                        (0..sk.width).map(|j| sk.cell(i, j).to_string()).collect();
                    out.push_str(&format!("row {i} cells={}\n", cells.join(",")));
                }
            }
        }
        out
    }
}

/// One-shot convenience wrapper over [`F0Estimator`].
pub fn compute_f0<I>(
    n: usize,
    stream: I,
    strategy: Strategy,
    params: &ApproxParams,
    seed: u64,
    r: Option<u32>,
) -> Result<f64>
where
    I: IntoIterator<Item = BitString>,
{
    let mut est = F0Estimator::new(n, strategy, params, seed)?;
    for x in stream {
        est.push(&x)?;
    }
    est.estimate(r)
}

/// Parses a stream file: a header `n=<int>`, then one element per line in
/// binary (`0b`), hex (`0x`), or decimal form; `#` lines are comments.
pub fn parse_stream_file(text: &str) -> Result<(usize, Vec<BitString>)> {
    let mut n: Option<usize> = None;
    let mut items = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = lineno + 1;
        let trimmed = raw.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        match n {
            None => {
                let width = trimmed
                    .strip_prefix("n=")
                    .and_then(|v| v.parse().ok())
                    .ok_or_else(|| Error::parse(line, 1, "expected header 'n=<int>'"))?;
                n = Some(width);
            }
            Some(width) => {
                let x = BitString::parse(trimmed, width)
                    .map_err(|e| Error::parse(line, 1, e.to_string()))?;
                items.push(x);
            }
        }
    }
    let n = n.ok_or_else(|| Error::parse(1, 1, "missing 'n=<int>' header"))?;
    Ok((n, items))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hashing::HashFn;
    use rand::seq::SliceRandom;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn bs(v: u64, len: usize) -> BitString {
        BitString::from_u64(v, len).unwrap()
    }

    #[test]
    fn params_match_contract() {
        let p = ApproxParams::new(0.8, 0.2).unwrap();
        assert_eq!(p.thresh, 150);
        assert_eq!(p.t, 57);
        assert!(p.t % 2 == 1);
        assert_eq!(p.s, 3);
        let p = ApproxParams::new(1.0, 0.5).unwrap();
        assert_eq!(p.thresh, 96);
        assert!(p.t % 2 == 1);
        assert!(ApproxParams::new(0.0, 0.2).is_err());
        assert!(ApproxParams::new(0.5, 1.0).is_err());
    }

    #[test]
    fn single_repeated_element_all_strategies() {
        let params = ApproxParams::new(0.5, 0.3).unwrap();
        let stream: Vec<BitString> = std::iter::repeat(bs(0x2a, 8)).take(50).collect();
        for strategy in [Strategy::Bucketing, Strategy::Minimum] {
            let est = compute_f0(8, stream.clone(), strategy, &params, 3, None).unwrap();
            assert_eq!(est, 1.0, "{strategy:?} must be exact on one distinct element");
        }
        let est = compute_f0(8, stream, Strategy::Estimation, &params, 3, None).unwrap();
        assert!(est >= 1.0 / 1.5 && est <= 1.5, "estimation gave {est}");
    }

    #[test]
    fn empty_stream_estimates_zero() {
        let params = ApproxParams::new(0.8, 0.2).unwrap();
        for strategy in [Strategy::Bucketing, Strategy::Minimum, Strategy::Estimation] {
            let est = compute_f0(6, Vec::new(), strategy, &params, 1, None).unwrap();
            assert_eq!(est, 0.0);
        }
    }

    #[test]
    fn bucketing_no_subsampling_when_thresh_exceeds_universe() {
        // Thresh = 96/eps^2 >= 2^n keeps every level at zero: exact counting.
        let params = ApproxParams::new(0.8, 0.3).unwrap(); // thresh 150 > 2^7
        let mut stream: Vec<BitString> = (0..100u64).map(|v| bs(v, 7)).collect();
        stream.extend((0..50u64).map(|v| bs(v, 7))); // duplicates
        let mut est = F0Estimator::new(7, Strategy::Bucketing, &params, 9).unwrap();
        for x in &stream {
            est.push(x).unwrap();
        }
        let SketchState::Bucketing(sk) = est.state() else { panic!() };
        assert!(sk.rows.iter().all(|r| r.level == 0));
        assert_eq!(est.estimate(None).unwrap(), 100.0);
    }

    #[test]
    fn minimum_full_sample_is_exact() {
        // F0 = 256 <= Thresh = 384: the sketch holds every hash value.
        let params = ApproxParams::new(0.5, 0.2).unwrap();
        assert_eq!(params.thresh, 384);
        let stream: Vec<BitString> = (0..256u64).map(|v| bs(v, 8)).collect();
        for seed in [1u64, 5, 9] {
            let est = compute_f0(8, stream.clone(), Strategy::Minimum, &params, seed, None).unwrap();
            assert_eq!(est, 256.0);
        }
    }

    #[test]
    fn scripted_bucketing_overflow_matches_filter() {
        // Hand-built identity-like hash: h(x) = x, thresh 4. Feed elements
        // whose top bits differ so the level-1 filter keeps exactly those
        // starting with 0.
        let ident = crate::gf2::BitMatrix::identity(4);
        let h = HashFn::Xor(
            crate::hashing::XorHash::from_parts(ident, BitString::zeros(4)).unwrap(),
        );
        let hashes =
            HashCollection::from_entries(HashFamily::Xor, 4, 4, 1, 1, vec![h.clone()]).unwrap();
        let mut sk = BucketSketch::new(1);
        let items: Vec<BitString> = [0b0001u64, 0b0010, 0b1001, 0b0100, 0b0011]
            .iter()
            .map(|&v| bs(v, 4))
            .collect();
        for x in &items {
            process_update_bucketing(&mut sk, &hashes, x, 4).unwrap();
        }
        // Overflow on the fifth insert bumps the level to 1 and keeps only
        // elements with h(x) starting in 0.
        assert_eq!(sk.rows[0].level, 1);
        let expect: BTreeSet<BitString> = items
            .iter()
            .filter(|x| h.eval(x).unwrap().prefix(1).is_zero())
            .cloned()
            .collect();
        assert_eq!(sk.rows[0].elements, expect);
    }

    #[test]
    fn estimation_cells_replay_equivalence() {
        let params = ApproxParams::new(1.0, 0.6).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let stream: Vec<BitString> = (0..40).map(|_| bs(rng.random_range(0..64), 6)).collect();
        let mut est = F0Estimator::new(6, Strategy::Estimation, &params, 2).unwrap();
        for x in &stream {
            est.push(x).unwrap();
        }
        let SketchState::Estimation(sk) = est.state() else { panic!() };
        for i in 0..sk.t {
            for j in 0..sk.width {
                let direct = stream
                    .iter()
                    .map(|x| trail_zero(&est.hashes().get2(i, j).eval(x).unwrap()))
                    .max()
                    .unwrap();
                assert_eq!(sk.cell(i, j), direct);
            }
        }
    }

    #[test]
    fn order_insensitivity_and_idempotence() {
        let params = ApproxParams::new(1.0, 0.5).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        for _trial in 0..20 {
            let n = 6;
            let stream: Vec<BitString> =
                (0..48).map(|_| bs(rng.random_range(0..64), n)).collect();
            // Duplicate every element; sketches must not change.
            let mut doubled = stream.clone();
            doubled.extend(stream.clone());
            let mut shuffled = doubled.clone();
            shuffled.shuffle(&mut rng);
            for strategy in [Strategy::Bucketing, Strategy::Minimum, Strategy::Estimation] {
                let run = |items: &[BitString]| {
                    let mut e = F0Estimator::new(n, strategy, &params, 7).unwrap();
                    for x in items {
                        e.push(x).unwrap();
                    }
                    e
                };
                let a = run(&stream);
                let b = run(&doubled);
                let c = run(&shuffled);
                match (a.state(), b.state(), c.state()) {
                    (SketchState::Bucketing(x), SketchState::Bucketing(y), SketchState::Bucketing(z)) => {
                        assert_eq!(x.counts(), y.counts());
                        assert_eq!(x.counts(), z.counts());
                    }
                    (SketchState::Minimum(x), SketchState::Minimum(y), SketchState::Minimum(z)) => {
                        assert_eq!(x, y);
                        assert_eq!(x, z);
                    }
                    (SketchState::Estimation(x), SketchState::Estimation(y), SketchState::Estimation(z)) => {
                        assert_eq!(x, y);
                        assert_eq!(x, z);
                    }
                    _ => unreachable!(),
                }
            }
        }
    }

    #[test]
    fn estimate_formulas_on_fixed_rows() {
        // Bucketing: identical rows (c=5, m=3) give 40.
        let rows = vec![(5u64, 3u32); 7];
        assert_eq!(bucketing_estimate(&rows), 40.0);

        // Minimum: a full row with known max follows the closed form.
        let thresh = 4u64;
        let width = 12usize;
        let mut row = BTreeSet::new();
        for v in [50u64, 90, 700, 1200] {
            row.insert(bs(v, width));
        }
        let est = minimum_estimate(std::iter::once(&row), thresh, width);
        assert!((est - (4.0 * 4096.0 / 1200.0)).abs() < 1e-9);

        // Estimation: all cells below r gives 0.
        let sk = EstSketch::new(3, 5);
        assert_eq!(estimation_estimate(&sk, 2).unwrap(), 0.0);
        // All rows saturated is an error.
        let mut sk = EstSketch::new(2, 2);
        sk.cells = vec![4, 4, 4, 4];
        assert!(matches!(estimation_estimate(&sk, 2), Err(Error::RTooSmall { r: 2 })));
    }

    #[test]
    fn stream_file_roundtrip() {
        let (n, items) = parse_stream_file("# demo\nn=6\n0b000011\n0x2a\n7\n").unwrap();
        assert_eq!(n, 6);
        assert_eq!(items, vec![bs(3, 6), bs(42, 6), bs(7, 6)]);
        assert!(parse_stream_file("0b1\n").is_err());
        assert!(parse_stream_file("n=4\n0x2a\n").is_err());
    }
}
