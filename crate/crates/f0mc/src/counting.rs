//! The three model counters, each a formula-side reconstruction of one
//! streaming sketch: bucketing rows via BoundedSAT level search, minimum
//! rows via FindMin, estimation cells via FindMaxRange, plus the
//! rough-estimator run that supplies the Estimation resolution `r`.
//!
//! Rows (and grid cells) are independent given the hash draw, which is
//! sampled up front from the seed; parallel execution therefore produces
//! bit-identical results to the deterministic mode.

use std::collections::BTreeSet;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::f0stream::{
    bucketing_estimate, estimation_estimate, minimum_estimate, select_r, ApproxParams, EstSketch,
};
use crate::formula::{CnfFormula, DnfFormula, FormulaRef};
use crate::gf2::BitString;
use crate::hashing::{pick_hash_functions, pick_poly_grid, HashCollection, HashFamily};
use crate::solvers::{
    bounded_sat_cnf, bounded_sat_dnf, find_max_range, find_min, find_min_cnf,
    max_trailing_zeros_dnf, NpOracle,
};

/// How the bucketing level m_i is located per row.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SearchMode {
    /// Scan m = 0, 1, 2, ... until the cell fits (the streaming order).
    Linear,
    /// Binary-search the smallest fitting level; cell counts are monotone in
    /// the prefix width, and both level conditions are re-verified.
    Binary,
}

/// Whether independent rows/cells run on a worker pool. Results are
/// bit-identical either way; only wall time differs.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ExecMode {
    Deterministic,
    Parallel,
}

/// One finished bucketing row: the capped cell count at the final level.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BucketingRow {
    pub count: u64,
    pub level: u32,
}

/// Outcome of a bucketing-strategy count.
#[derive(Clone, Debug)]
pub struct BucketingRun {
    pub estimate: f64,
    pub rows: Vec<BucketingRow>,
    /// Distinct BoundedSAT level measurements per row.
    pub calls_per_row: Vec<u32>,
}

impl BucketingRun {
    pub fn total_calls(&self) -> u64 {
        self.calls_per_row.iter().map(|&c| c as u64).sum()
    }
}

/// Outcome of a minimum-strategy count.
#[derive(Clone, Debug)]
pub struct MinimumRun {
    pub estimate: f64,
    pub rows: Vec<BTreeSet<BitString>>,
    pub value_width: usize,
}

/// Outcome of an estimation-strategy count.
#[derive(Clone, Debug)]
pub struct EstimationRun {
    pub estimate: f64,
    pub sketch: EstSketch,
    pub r: u32,
}

// ---------------------------------------------------------------------------
// Bucketing
// ---------------------------------------------------------------------------

/// Finds the row's level and capped count given a measurement function
/// `cell(m) = min(thresh + 1, |solutions with the m-bit prefix zero|)`.
///
/// The row is done at the smallest m whose cell holds at most `thresh`
/// solutions, matching the streaming overflow rule (a cell overflows only
/// when it exceeds `thresh`). Returns the row and the number of distinct
/// measurements taken.
fn locate_level(
    mut cell: impl FnMut(u32) -> Result<u64>,
    n: u32,
    thresh: u64,
    mode: SearchMode,
) -> Result<(BucketingRow, u32)> {
    let mut probes = 0u32;
    let mut measured: Vec<Option<u64>> = vec![None; n as usize + 1];
    let mut measure = |m: u32, probes: &mut u32, measured: &mut Vec<Option<u64>>| -> Result<u64> {
        if let Some(c) = measured[m as usize] {
            return Ok(c);
        }
        *probes += 1;
        let c = cell(m)?;
        measured[m as usize] = Some(c);
        Ok(c)
    };

    let linear = |probes: &mut u32, measured: &mut Vec<Option<u64>>, measure: &mut dyn FnMut(u32, &mut u32, &mut Vec<Option<u64>>) -> Result<u64>| -> Result<BucketingRow> {
        let mut m = 0u32;
        loop {
            let c = measure(m, probes, measured)?;
            if c <= thresh {
                return Ok(BucketingRow { count: c, level: m });
            }
            if m == n {
                return Err(Error::PathologicalHash { row: 0, level: m });
            }
            m += 1;
        }
    };

    let row = match mode {
        SearchMode::Linear => linear(&mut probes, &mut measured, &mut measure)?,
        SearchMode::Binary => {
            // Smallest m with cell(m) <= thresh; counts are nonincreasing in
            // m because the prefix constraints nest.
            let mut lo = 0u32;
            let mut hi = n;
            while lo < hi {
                let mid = (lo + hi) / 2;
                if measure(mid, &mut probes, &mut measured)? <= thresh {
                    hi = mid;
                } else {
                    lo = mid + 1;
                }
            }
            let c = measure(lo, &mut probes, &mut measured)?;
            let upper_ok = c <= thresh;
            let lower_ok =
                lo == 0 || measure(lo - 1, &mut probes, &mut measured)? > thresh;
            if !upper_ok && lo == n {
                return Err(Error::PathologicalHash { row: 0, level: lo });
            }
            if upper_ok && lower_ok {
                BucketingRow { count: c, level: lo }
            } else {
                // Monotonicity failed (should not happen for nested
                // prefixes); fall back to the streaming scan.
                linear(&mut probes, &mut measured, &mut measure)?
            }
        }
    };
    Ok((row, probes))
}

/// Builds all bucketing rows for a formula against an explicit hash draw.
/// This is the sketch-construction core shared by the public counters, the
/// bridge-equivalence checker, and the distributed sites.
pub fn bucketing_rows_dnf(
    phi: &DnfFormula,
    hashes: &HashCollection,
    thresh: u64,
    mode: SearchMode,
    exec: ExecMode,
) -> Result<(Vec<BucketingRow>, Vec<u32>)> {
    let row = |i: usize| -> Result<(BucketingRow, u32)> {
        let h = hashes.get(i);
        locate_level(
            |m| Ok(bounded_sat_dnf(phi, &h.prefix_slice(m as usize)?, thresh + 1)?.count),
            hashes.m as u32,
            thresh,
            mode,
        )
        .map_err(|e| match e {
            Error::PathologicalHash { level, .. } => Error::PathologicalHash { row: i, level },
            other => other,
        })
    };
    let results: Vec<(BucketingRow, u32)> = match exec {
        ExecMode::Deterministic => (0..hashes.rows()).map(row).collect::<Result<_>>()?,
        ExecMode::Parallel => {
            (0..hashes.rows()).into_par_iter().map(row).collect::<Result<_>>()?
        }
    };
    Ok(results.into_iter().unzip())
}

/// CNF counterpart of [`bucketing_rows_dnf`], via the oracle.
pub fn bucketing_rows_cnf(
    phi: &CnfFormula,
    hashes: &HashCollection,
    thresh: u64,
    mode: SearchMode,
    oracle: &NpOracle,
    exec: ExecMode,
) -> Result<(Vec<BucketingRow>, Vec<u32>)> {
    let row = |i: usize| -> Result<(BucketingRow, u32)> {
        let h = hashes.get(i);
        locate_level(
            |m| Ok(bounded_sat_cnf(phi, &h.prefix_slice(m as usize)?, thresh + 1, oracle)?.count),
            hashes.m as u32,
            thresh,
            mode,
        )
        .map_err(|e| match e {
            Error::PathologicalHash { level, .. } => Error::PathologicalHash { row: i, level },
            other => other,
        })
    };
    let results: Vec<(BucketingRow, u32)> = match exec {
        ExecMode::Deterministic => (0..hashes.rows()).map(row).collect::<Result<_>>()?,
        ExecMode::Parallel => {
            (0..hashes.rows()).into_par_iter().map(row).collect::<Result<_>>()?
        }
    };
    Ok(results.into_iter().unzip())
}

fn bucketing_run(rows: Vec<BucketingRow>, calls: Vec<u32>) -> BucketingRun {
    let pairs: Vec<(u64, u32)> = rows.iter().map(|r| (r.count, r.level)).collect();
    BucketingRun { estimate: bucketing_estimate(&pairs), rows, calls_per_row: calls }
}

/// Bucketing-strategy model counter for DNF: iteratively partitions the
/// solution space with hash-prefix constraints until each row's cell is
/// small, then returns the median of `count * 2^level`.
pub fn approx_mc_dnf(
    phi: &DnfFormula,
    eps: f64,
    delta: f64,
    seed: u64,
    mode: SearchMode,
    exec: ExecMode,
) -> Result<BucketingRun> {
    let params = ApproxParams::new(eps, delta)?;
    let hashes = pick_hash_functions(HashFamily::Toeplitz, phi.n, phi.n, params.t, seed)?;
    let (rows, calls) = bucketing_rows_dnf(phi, &hashes, params.thresh, mode, exec)?;
    Ok(bucketing_run(rows, calls))
}

/// Bucketing-strategy model counter for CNF (desk scale, oracle-backed).
pub fn approx_mc_cnf(
    phi: &CnfFormula,
    eps: f64,
    delta: f64,
    seed: u64,
    mode: SearchMode,
    oracle: &NpOracle,
    exec: ExecMode,
) -> Result<BucketingRun> {
    let params = ApproxParams::new(eps, delta)?;
    let hashes = pick_hash_functions(HashFamily::Toeplitz, phi.n, phi.n, params.t, seed)?;
    let (rows, calls) = bucketing_rows_cnf(phi, &hashes, params.thresh, mode, oracle, exec)?;
    Ok(bucketing_run(rows, calls))
}

// ---------------------------------------------------------------------------
// Minimum
// ---------------------------------------------------------------------------

/// Builds all minimum rows for a DNF formula against an explicit hash draw.
pub fn minimum_rows_dnf(
    phi: &DnfFormula,
    hashes: &HashCollection,
    thresh: u64,
    exec: ExecMode,
) -> Result<Vec<BTreeSet<BitString>>> {
    let row = |i: usize| -> Result<BTreeSet<BitString>> {
        Ok(find_min(phi, hashes.get(i), thresh)?.into_iter().collect())
    };
    match exec {
        ExecMode::Deterministic => (0..hashes.rows()).map(row).collect(),
        ExecMode::Parallel => (0..hashes.rows()).into_par_iter().map(row).collect(),
    }
}

/// Minimum-strategy model counter for DNF: per row, the `Thresh` smallest
/// hash-image values over `3n`-bit outputs; full rows estimate through
/// `Thresh * 2^{3n} / max`, short rows have seen the whole image and report
/// it exactly.
pub fn approx_model_count_min(
    phi: &DnfFormula,
    eps: f64,
    delta: f64,
    seed: u64,
    exec: ExecMode,
) -> Result<MinimumRun> {
    let params = ApproxParams::new(eps, delta)?;
    let hashes = pick_hash_functions(HashFamily::Toeplitz, phi.n, 3 * phi.n, params.t, seed)?;
    let rows = minimum_rows_dnf(phi, &hashes, params.thresh, exec)?;
    let estimate = minimum_estimate(rows.iter(), params.thresh, 3 * phi.n);
    Ok(MinimumRun { estimate, rows, value_width: 3 * phi.n })
}

/// CNF counterpart of [`approx_model_count_min`] via oracle prefix search.
pub fn approx_model_count_min_cnf(
    phi: &CnfFormula,
    eps: f64,
    delta: f64,
    seed: u64,
    oracle: &NpOracle,
    exec: ExecMode,
) -> Result<MinimumRun> {
    let params = ApproxParams::new(eps, delta)?;
    let hashes = pick_hash_functions(HashFamily::Toeplitz, phi.n, 3 * phi.n, params.t, seed)?;
    let row = |i: usize| -> Result<BTreeSet<BitString>> {
        Ok(find_min_cnf(phi, hashes.get(i), params.thresh, oracle)?.into_iter().collect())
    };
    let rows: Vec<BTreeSet<BitString>> = match exec {
        ExecMode::Deterministic => (0..hashes.rows()).map(row).collect::<Result<_>>()?,
        ExecMode::Parallel => (0..hashes.rows()).into_par_iter().map(row).collect::<Result<_>>()?,
    };
    let estimate = minimum_estimate(rows.iter(), params.thresh, 3 * phi.n);
    Ok(MinimumRun { estimate, rows, value_width: 3 * phi.n })
}

// ---------------------------------------------------------------------------
// Estimation
// ---------------------------------------------------------------------------

/// Fills the estimation sketch for any formula kind by running FindMaxRange
/// per grid cell through the oracle.
pub fn estimation_sketch(
    formula: FormulaRef<'_>,
    hashes: &HashCollection,
    oracle: &NpOracle,
    exec: ExecMode,
) -> Result<EstSketch> {
    let (t, width) = (hashes.rows(), hashes.cols());
    let cell = |idx: usize| -> Result<u32> {
        let (i, j) = (idx / width, idx % width);
        find_max_range(formula, hashes.get2(i, j), oracle)
    };
    let cells: Vec<u32> = match exec {
        ExecMode::Deterministic => (0..t * width).map(cell).collect::<Result<_>>()?,
        ExecMode::Parallel => (0..t * width).into_par_iter().map(cell).collect::<Result<_>>()?,
    };
    Ok(EstSketch { t, width, cells })
}

/// Estimation-strategy model counter at a caller-supplied resolution `r`
/// (valid when `2 F0 <= 2^r <= 50 F0`). Unsatisfiable formulas estimate 0.
pub fn approx_model_count_est(
    phi: &CnfFormula,
    eps: f64,
    delta: f64,
    r: u32,
    seed: u64,
    oracle: &NpOracle,
    exec: ExecMode,
) -> Result<EstimationRun> {
    let params = ApproxParams::new(eps, delta)?;
    if !oracle.is_satisfiable(FormulaRef::Cnf(phi))? {
        return Ok(EstimationRun {
            estimate: 0.0,
            sketch: EstSketch::new(params.t, params.thresh as usize),
            r,
        });
    }
    let hashes = pick_poly_grid(phi.n, params.s, params.t, params.thresh as usize, seed)?;
    let sketch = estimation_sketch(FormulaRef::Cnf(phi), &hashes, oracle, exec)?;
    let estimate = estimation_estimate(&sketch, r)?;
    Ok(EstimationRun { estimate, sketch, r })
}

/// Estimation counter that derives `r` itself: a rough-estimator run gives
/// `r_raw`, the sketch is built once, and [`select_r`] scans nearby
/// resolutions for a self-consistent estimate.
pub fn approx_model_count_est_auto(
    phi: &CnfFormula,
    eps: f64,
    delta: f64,
    seed: u64,
    oracle: &NpOracle,
    exec: ExecMode,
) -> Result<EstimationRun> {
    let params = ApproxParams::new(eps, delta)?;
    let Some(r_raw) = flajolet_martin_cnf(phi, seed ^ FM_COUNT_SALT, params.t, oracle)? else {
        return Ok(EstimationRun {
            estimate: 0.0,
            sketch: EstSketch::new(params.t, params.thresh as usize),
            r: 1,
        });
    };
    let hashes = pick_poly_grid(phi.n, params.s, params.t, params.thresh as usize, seed)?;
    let sketch = estimation_sketch(FormulaRef::Cnf(phi), &hashes, oracle, exec)?;
    let (r, estimate) = select_r(&sketch, phi.n, r_raw)?;
    Ok(EstimationRun { estimate, sketch, r })
}

// ---------------------------------------------------------------------------
// Rough estimator
// ---------------------------------------------------------------------------

const FM_COUNT_SALT: u64 = 0x5bd1_e995_9d1b_54a1;

/// Per-repetition rough-estimator draws for a DNF formula: the largest
/// trailing-zero count of a fresh xor-family hash over the solution set.
/// `None` when unsatisfiable.
pub fn fm_draws_dnf(phi: &DnfFormula, seed: u64, repetitions: usize) -> Result<Option<Vec<u32>>> {
    if phi.is_trivially_unsat() {
        return Ok(None);
    }
    let hashes = pick_hash_functions(HashFamily::Xor, phi.n, phi.n, repetitions, seed)?;
    let mut draws = Vec::with_capacity(repetitions);
    for i in 0..repetitions {
        let r = max_trailing_zeros_dnf(phi, hashes.get(i))?.expect("satisfiable");
        draws.push(r);
    }
    Ok(Some(draws))
}

fn lower_median(mut draws: Vec<u32>) -> u32 {
    draws.sort_unstable();
    draws[(draws.len() - 1) / 2]
}

/// Rough log2 estimate of a DNF model count: the median over seeded
/// repetitions of the largest trailing-zero count (each single draw has
/// `2^r` within a factor 5 of the count with probability 3/5). `None` for
/// unsatisfiable formulas. Callers derive a usable Estimation resolution by
/// scanning nearby candidates (see `select_r`).
pub fn flajolet_martin_dnf(phi: &DnfFormula, seed: u64, repetitions: usize) -> Result<Option<u32>> {
    if repetitions == 0 {
        return Err(Error::InvalidParams { msg: "repetitions must be at least 1".into() });
    }
    Ok(fm_draws_dnf(phi, seed, repetitions)?.map(lower_median))
}

/// CNF rough estimator through the oracle (binary search per repetition).
pub fn flajolet_martin_cnf(
    phi: &CnfFormula,
    seed: u64,
    repetitions: usize,
    oracle: &NpOracle,
) -> Result<Option<u32>> {
    if repetitions == 0 {
        return Err(Error::InvalidParams { msg: "repetitions must be at least 1".into() });
    }
    if !oracle.is_satisfiable(FormulaRef::Cnf(phi))? {
        return Ok(None);
    }
    let hashes = pick_hash_functions(HashFamily::Xor, phi.n, phi.n, repetitions, seed)?;
    let mut draws = Vec::with_capacity(repetitions);
    for i in 0..repetitions {
        draws.push(find_max_range(FormulaRef::Cnf(phi), hashes.get(i), oracle)?);
    }
    Ok(Some(lower_median(draws)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::{brute_count, parse_dnf};
    use crate::harness::random_dnf;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn small_counts_are_exact() {
        // |sol| = 128 < Thresh = 150: every row stays at level 0.
        let phi = parse_dnf("p dnf 10 2\n1 2 3 4 0\n-1 -2 -3 -4 0\n").unwrap();
        let truth = brute_count(FormulaRef::Dnf(&phi)).unwrap() as f64;
        for mode in [SearchMode::Linear, SearchMode::Binary] {
            let run = approx_mc_dnf(&phi, 0.8, 0.3, 5, mode, ExecMode::Deterministic).unwrap();
            assert_eq!(run.estimate, truth);
            assert!(run.rows.iter().all(|r| r.level == 0));
        }
        let run = approx_model_count_min(&phi, 0.8, 0.3, 5, ExecMode::Deterministic).unwrap();
        assert_eq!(run.estimate, truth);
    }

    #[test]
    fn unsatisfiable_formulas_estimate_zero() {
        let phi = parse_dnf("p dnf 8 0\n").unwrap();
        let run =
            approx_mc_dnf(&phi, 0.8, 0.3, 1, SearchMode::Linear, ExecMode::Deterministic).unwrap();
        assert_eq!(run.estimate, 0.0);
        let run = approx_model_count_min(&phi, 0.8, 0.3, 1, ExecMode::Deterministic).unwrap();
        assert_eq!(run.estimate, 0.0);
        assert!(flajolet_martin_dnf(&phi, 3, 9).unwrap().is_none());
    }

    #[test]
    fn single_solution_minimum_row() {
        let phi = parse_dnf("p dnf 6 1\n1 -2 3 -4 5 -6 0\n").unwrap();
        let run = approx_model_count_min(&phi, 0.8, 0.3, 9, ExecMode::Deterministic).unwrap();
        assert_eq!(run.estimate, 1.0);
        assert!(run.rows.iter().all(|r| r.len() == 1));
    }

    #[test]
    fn linear_and_binary_search_agree_per_row() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        for trial in 0..50u64 {
            let phi = random_dnf(&mut rng, 10, 4, 2..=4);
            let lin = approx_mc_dnf(&phi, 0.9, 0.45, trial, SearchMode::Linear, ExecMode::Deterministic)
                .unwrap();
            let bin = approx_mc_dnf(&phi, 0.9, 0.45, trial, SearchMode::Binary, ExecMode::Deterministic)
                .unwrap();
            assert_eq!(lin.rows, bin.rows);
            assert_eq!(lin.estimate, bin.estimate);
        }
    }

    #[test]
    fn row_postconditions_hold() {
        // Final cell fits; the previous level overflowed.
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let phi = random_dnf(&mut rng, 12, 5, 2..=3);
        let params = ApproxParams::new(1.0, 0.6).unwrap();
        let hashes =
            pick_hash_functions(HashFamily::Toeplitz, phi.n, phi.n, params.t, 3).unwrap();
        let (rows, _) = bucketing_rows_dnf(
            &phi,
            &hashes,
            params.thresh,
            SearchMode::Binary,
            ExecMode::Deterministic,
        )
        .unwrap();
        for (i, row) in rows.iter().enumerate() {
            assert!(row.count <= params.thresh);
            let h = hashes.get(i);
            if row.level > 0 {
                let below = bounded_sat_dnf(
                    &phi,
                    &h.prefix_slice(row.level as usize - 1).unwrap(),
                    params.thresh + 2,
                )
                .unwrap()
                .count;
                assert!(below > params.thresh, "row {i}: predecessor cell must overflow");
            }
        }
    }

    #[test]
    fn parallel_mode_is_bit_identical() {
        let mut rng = ChaCha8Rng::seed_from_u64(19);
        let phi = random_dnf(&mut rng, 10, 4, 2..=4);
        let a = approx_mc_dnf(&phi, 0.9, 0.4, 7, SearchMode::Linear, ExecMode::Deterministic).unwrap();
        let b = approx_mc_dnf(&phi, 0.9, 0.4, 7, SearchMode::Linear, ExecMode::Parallel).unwrap();
        assert_eq!(a.rows, b.rows);
        let a = approx_model_count_min(&phi, 0.9, 0.4, 7, ExecMode::Deterministic).unwrap();
        let b = approx_model_count_min(&phi, 0.9, 0.4, 7, ExecMode::Parallel).unwrap();
        assert_eq!(a.rows, b.rows);
    }

    #[test]
    fn fm_single_repetition_is_deterministic() {
        let phi = parse_dnf("p dnf 8 1\n1 0\n").unwrap();
        let a = flajolet_martin_dnf(&phi, 42, 1).unwrap();
        let b = flajolet_martin_dnf(&phi, 42, 1).unwrap();
        assert_eq!(a, b);
        assert!(a.is_some());
    }
}
