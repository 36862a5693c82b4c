//! Shared verification machinery: seeded random-formula generators,
//! independent counting oracles, the statistical acceptance runner that turns
//! an (eps, delta) guarantee into a deterministic pass/fail, and the
//! bridge-equivalence check that replays a formula's solution set as a plain
//! stream and demands bit-identical sketches from both code paths.

use rand::seq::index::sample;
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::counting::{bucketing_rows_dnf, estimation_sketch, minimum_rows_dnf, ExecMode, SearchMode};
use crate::error::{Error, Result};
use crate::f0stream::{ApproxParams, F0Estimator, SketchState, Strategy};
use crate::formula::{
    brute_solutions, Clause, CnfFormula, DnfFormula, FormulaRef, Literal, Term,
};
use crate::hashing::{pick_hash_functions, pick_poly_grid, HashFamily};
use crate::solvers::NpOracle;

// ---------------------------------------------------------------------------
// Generators
// ---------------------------------------------------------------------------

fn random_literals(
    rng: &mut impl RngCore,
    n: usize,
    widths: &std::ops::RangeInclusive<usize>,
) -> Vec<Literal> {
    let lo = *widths.start();
    let hi = (*widths.end()).min(n);
    let w = if lo >= hi { hi } else { rng.random_range(lo..=hi) };
    sample(rng, n, w)
        .into_iter()
        .map(|var| Literal { var, positive: rng.random() })
        .collect()
}

/// Random DNF with `k` terms of widths drawn from the given range.
pub fn random_dnf(
    rng: &mut impl RngCore,
    n: usize,
    k: usize,
    widths: std::ops::RangeInclusive<usize>,
) -> DnfFormula {
    let terms =
        (0..k).map(|_| Term::new(random_literals(rng, n, &widths)).expect("distinct vars")).collect();
    DnfFormula::new(n, terms).expect("vars in range")
}

/// Random CNF with `k` clauses of widths drawn from the given range.
pub fn random_cnf(
    rng: &mut impl RngCore,
    n: usize,
    k: usize,
    widths: std::ops::RangeInclusive<usize>,
) -> CnfFormula {
    let clauses = (0..k)
        .map(|_| Clause::new(random_literals(rng, n, &widths)).expect("distinct vars"))
        .collect();
    CnfFormula::new(n, clauses).expect("vars in range")
}

/// Rejection-samples DNFs whose exact count lands in `[count_lo, count_hi]`,
/// returning them with their counts. Deterministic in `seed`.
pub fn dnf_corpus_with_counts(
    seed: u64,
    size: usize,
    n: usize,
    count_lo: u64,
    count_hi: u64,
) -> Vec<(DnfFormula, u64)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(size);
    while out.len() < size {
        let k = rng.random_range(2..=6);
        let wlo = (n.saturating_sub(9)).max(2);
        let whi = n.saturating_sub(2).max(wlo);
        let phi = random_dnf(&mut rng, n, k, wlo..=whi);
        let count = crate::formula::brute_count(FormulaRef::Dnf(&phi)).expect("n under cap");
        if (count_lo..=count_hi).contains(&count) {
            out.push((phi, count));
        }
    }
    out
}

/// Rejection-samples satisfiable CNFs with counts in range.
pub fn cnf_corpus_with_counts(
    seed: u64,
    size: usize,
    n: usize,
    count_lo: u64,
    count_hi: u64,
) -> Vec<(CnfFormula, u64)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(size);
    while out.len() < size {
        let k = rng.random_range(4..=14);
        let phi = random_cnf(&mut rng, n, k, 2..=3);
        let count = crate::formula::brute_count(FormulaRef::Cnf(&phi)).expect("n under cap");
        if (count_lo..=count_hi).contains(&count) {
            out.push((phi, count));
        }
    }
    out
}

/// The fixed seed list used by statistical tests: `base, base+1, ...`.
pub fn seed_list(base: u64, count: usize) -> Vec<u64> {
    (0..count as u64).map(|i| base + i).collect()
}

// ---------------------------------------------------------------------------
// Independent counting oracles
// ---------------------------------------------------------------------------

/// Exact DNF model count by inclusion-exclusion over term intersections;
/// exponential in the term count but independent of enumeration.
pub fn dnf_inclusion_exclusion_count(phi: &DnfFormula) -> u64 {
    let k = phi.terms.len();
    assert!(k <= 24, "inclusion-exclusion oracle is 2^k in the term count");
    let mut acc: i128 = 0;
    for subset in 1u32..(1u32 << k) {
        let mut merged = Some(Term::tautology());
        for (idx, term) in phi.terms.iter().enumerate() {
            if (subset >> idx) & 1 == 1 {
                merged = merged.and_then(|m| m.conjoin(term));
            }
        }
        if let Some(m) = merged {
            let size = 1i128 << (phi.n - m.width());
            if subset.count_ones() % 2 == 1 {
                acc += size;
            } else {
                acc -= size;
            }
        }
    }
    acc as u64
}

/// Exact weighted model count scaled to an integer: returns
/// `W(phi) * 2^{sum_i m_i}` as `sum over solutions of prod_i (k_i or
/// 2^{m_i} - k_i)`, computed in exact integer arithmetic.
pub fn weighted_brute_scaled_sum(wphi: &crate::setstream::WeightedDnf) -> u128 {
    let n = wphi.phi.n;
    assert!(n <= 24, "weighted brute oracle is desk scale");
    let mut acc = 0u128;
    for v in 0u64..1 << n {
        let x = crate::gf2::BitString::from_u64(v, n).expect("v < 2^n");
        if !wphi.phi.satisfied_by(&x) {
            continue;
        }
        let mut prod = 1u128;
        for (i, w) in wphi.weights.iter().enumerate() {
            prod *= if x.get(i) { w.k as u128 } else { (1u128 << w.m) - w.k as u128 };
        }
        acc += prod;
    }
    acc
}

// ---------------------------------------------------------------------------
// Statistical acceptance
// ---------------------------------------------------------------------------

/// Result of a statistical acceptance run.
#[derive(Clone, Copy, Debug)]
pub struct StatOutcome {
    pub fraction: f64,
    pub threshold: f64,
    pub trials: usize,
}

impl StatOutcome {
    pub fn passed(&self) -> bool {
        self.fraction >= self.threshold
    }
}

/// Runs `runner` once per seed and checks that the fraction of estimates
/// within a multiplicative `(1 + eps)` of `truth` is at least
/// `(1 - delta) - z`, with Monte-Carlo slack `z = 3 sqrt(delta (1-delta) / trials)`.
/// Fewer than 30 trials is an error.
pub fn statistical_accept(
    mut runner: impl FnMut(u64) -> Result<f64>,
    seeds: &[u64],
    eps: f64,
    delta: f64,
    truth: f64,
) -> Result<StatOutcome> {
    if seeds.len() < 30 {
        return Err(Error::TooFewTrials { got: seeds.len() });
    }
    let mut hits = 0usize;
    for &seed in seeds {
        let est = runner(seed)?;
        if est >= truth / (1.0 + eps) && est <= truth * (1.0 + eps) {
            hits += 1;
        }
    }
    let trials = seeds.len();
    let slack = 3.0 * (delta * (1.0 - delta) / trials as f64).sqrt();
    Ok(StatOutcome {
        fraction: hits as f64 / trials as f64,
        threshold: (1.0 - delta) - slack,
        trials,
    })
}

// ---------------------------------------------------------------------------
// Bridge equivalence
// ---------------------------------------------------------------------------

/// Outcome of a bridge check; a failure carries a human-readable diff.
#[derive(Clone, Debug)]
pub enum BridgeOutcome {
    Pass,
    Fail(String),
}

impl BridgeOutcome {
    pub fn passed(&self) -> bool {
        matches!(self, BridgeOutcome::Pass)
    }
}

/// Feeds `brute_solutions(phi)` through the streaming estimator and builds
/// the same strategy's sketch from the formula directly, under one shared
/// hash draw, then demands exact sketch equality: per-row (count, level) for
/// Bucketing, value sets for Minimum, cell grids for Estimation.
pub fn bridge_equivalence_check(
    phi: &DnfFormula,
    strategy: Strategy,
    seed: u64,
    eps: f64,
    delta: f64,
) -> Result<BridgeOutcome> {
    if phi.n > 12 {
        return Err(Error::InvalidParams { msg: "bridge check is desk-scale (n <= 12)".into() });
    }
    let params = ApproxParams::new(eps, delta)?;
    let hashes = match strategy {
        Strategy::Bucketing => {
            pick_hash_functions(HashFamily::Toeplitz, phi.n, phi.n, params.t, seed)?
        }
        Strategy::Minimum => {
            pick_hash_functions(HashFamily::Toeplitz, phi.n, 3 * phi.n, params.t, seed)?
        }
        Strategy::Estimation => {
            pick_poly_grid(phi.n, params.s, params.t, params.thresh as usize, seed)?
        }
    };

    let mut stream_side =
        F0Estimator::from_hashes(phi.n, strategy, hashes.clone(), params.thresh)?;
    for x in brute_solutions(FormulaRef::Dnf(phi))? {
        stream_side.push(&x)?;
    }

    match (strategy, stream_side.state()) {
        (Strategy::Bucketing, SketchState::Bucketing(sk)) => {
            let (rows, _) = bucketing_rows_dnf(
                phi,
                &hashes,
                params.thresh,
                SearchMode::Linear,
                ExecMode::Deterministic,
            )?;
            let stream_rows = sk.counts();
            let formula_rows: Vec<(u64, u32)> =
                rows.iter().map(|r| (r.count, r.level)).collect();
            if stream_rows != formula_rows {
                return Ok(BridgeOutcome::Fail(format!(
                    "bucketing rows differ\n stream:  {stream_rows:?}\n formula: {formula_rows:?}"
                )));
            }
        }
        (Strategy::Minimum, SketchState::Minimum(sk)) => {
            let formula_rows = minimum_rows_dnf(phi, &hashes, params.thresh, ExecMode::Deterministic)?;
            if sk.rows != formula_rows {
                for (i, (a, b)) in sk.rows.iter().zip(&formula_rows).enumerate() {
                    if a != b {
                        return Ok(BridgeOutcome::Fail(format!(
                            "minimum row {i} differs: stream {} values vs formula {}",
                            a.len(),
                            b.len()
                        )));
                    }
                }
            }
        }
        (Strategy::Estimation, SketchState::Estimation(sk)) => {
            // An unsatisfiable formula yields no stream elements and no
            // formula-side cells: both sketches are all-zero by definition.
            let oracle = NpOracle::brute_force(crate::formula::DEFAULT_BRUTE_CAP);
            let formula_sketch = if phi.is_trivially_unsat() {
                crate::f0stream::EstSketch::new(sk.t, sk.width)
            } else {
                estimation_sketch(FormulaRef::Dnf(phi), &hashes, &oracle, ExecMode::Deterministic)?
            };
            if *sk != formula_sketch {
                let diff = (0..sk.t)
                    .flat_map(|i| (0..sk.width).map(move |j| (i, j)))
                    .find(|&(i, j)| sk.cell(i, j) != formula_sketch.cell(i, j))
                    .map(|(i, j)| {
                        format!(
                            "cell ({i},{j}): stream {} vs formula {}",
                            sk.cell(i, j),
                            formula_sketch.cell(i, j)
                        )
                    })
                    .unwrap_or_default();
                return Ok(BridgeOutcome::Fail(diff));
            }
        }
        _ => unreachable!("state matches strategy by construction"),
    }
    Ok(BridgeOutcome::Pass)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn statistical_accept_threshold_formula() {
        // eps = 0.8, delta = 0.2, 100 trials: threshold 0.8 - 3*0.04 = 0.68.
        let seeds = seed_list(0, 100);
        let out = statistical_accept(|_| Ok(100.0), &seeds, 0.8, 0.2, 100.0).unwrap();
        assert!((out.threshold - 0.68).abs() < 1e-12);
        assert_eq!(out.fraction, 1.0);
        assert!(out.passed());
    }

    #[test]
    fn statistical_accept_rejects_small_samples_and_bias() {
        let seeds = seed_list(0, 10);
        assert!(matches!(
            statistical_accept(|_| Ok(1.0), &seeds, 0.8, 0.2, 1.0),
            Err(Error::TooFewTrials { got: 10 })
        ));
        // A three-fold biased estimator must fail at eps = 0.8.
        let seeds = seed_list(0, 100);
        let out = statistical_accept(|_| Ok(300.0), &seeds, 0.8, 0.2, 100.0).unwrap();
        assert!(!out.passed());
        // A huge tolerance passes anything consistent.
        let out = statistical_accept(|_| Ok(300.0), &seeds, 3.0, 0.2, 100.0).unwrap();
        assert!(out.passed());
    }

    #[test]
    fn bridge_check_small_cases() {
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        for strategy in [Strategy::Bucketing, Strategy::Minimum, Strategy::Estimation] {
            for trial in 0..3u64 {
                let phi = random_dnf(&mut rng, 7, 3, 1..=4);
                let out = bridge_equivalence_check(&phi, strategy, trial, 1.0, 0.5).unwrap();
                assert!(out.passed(), "{strategy:?} trial {trial}: {out:?}");
            }
            // Unsatisfiable: both sides are empty and estimate zero.
            let empty = DnfFormula::new(7, vec![]).unwrap();
            let out = bridge_equivalence_check(&empty, strategy, 1, 1.0, 0.5).unwrap();
            assert!(out.passed());
        }
    }
}
