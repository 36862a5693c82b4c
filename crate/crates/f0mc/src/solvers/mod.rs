//! Formula-side sketch ingredients: every operation here computes, from a
//! formula, a quantity that the streaming side would obtain by hashing each
//! solution — capped solution counts under a hash constraint (BoundedSAT),
//! the p smallest hash-image values (FindMin / AffineFindMin), and the
//! largest trailing-zero count of a hash over the solution set
//! (FindMaxRange). DNF paths are polynomial via GF(2) elimination; CNF paths
//! go through the NP oracle.

mod oracle;
mod prefix;

pub use oracle::{NpOracle, OracleBackend};

use std::collections::BTreeSet;

use crate::error::{Error, Result};
use crate::formula::{term_affine_form, CnfFormula, DnfFormula, FormulaRef, Term};
use crate::gf2::{enumerate_solutions, gaussian_solve, AffineSystem, BitMatrix, BitString};
use crate::hashing::HashFn;
use prefix::ImageSearcher;

/// A capped count of hash-constrained solutions together with the witnesses
/// themselves (sorted ascending; exactly `count` of them).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BoundedResult {
    pub count: u64,
    pub witnesses: Vec<BitString>,
}

impl BoundedResult {
    fn from_set(set: BTreeSet<BitString>) -> Self {
        BoundedResult { count: set.len() as u64, witnesses: set.into_iter().collect() }
    }
}

/// `min(p, |sol(phi and h(x) = 0^m)|)` for a DNF formula and an affine hash
/// slice, with the witnesses found. Per term, the hash constraint restricted
/// to the term is an affine system over the free variables; its solutions
/// are enumerated, lifted back to full assignments, and deduplicated across
/// terms until `p` distinct ones are in hand.
pub fn bounded_sat_dnf(phi: &DnfFormula, sliced: &HashFn, p: u64) -> Result<BoundedResult> {
    if sliced.input_width() != phi.n {
        return Err(Error::WidthMismatch { expected: phi.n, got: sliced.input_width() });
    }
    let mut found: BTreeSet<BitString> = BTreeSet::new();
    if p == 0 {
        return Ok(BoundedResult::from_set(found));
    }
    for term in &phi.terms {
        let form = term_affine_form(term, sliced, phi.n)?;
        // h(x) = 0 on the term's solutions iff A_T x' = b_T.
        let space = gaussian_solve(&AffineSystem::new(form.matrix.clone(), form.offset.clone()));
        for free in enumerate_solutions(&space, p) {
            found.insert(form.lift(&free));
            if found.len() as u64 == p {
                return Ok(BoundedResult::from_set(found));
            }
        }
    }
    Ok(BoundedResult::from_set(found))
}

/// CNF counterpart of [`bounded_sat_dnf`]: solutions are drawn one at a time
/// from the oracle with previously found witnesses blocked, so the oracle is
/// consulted at most `p + 1` times.
pub fn bounded_sat_cnf(
    phi: &CnfFormula,
    sliced: &HashFn,
    p: u64,
    oracle: &NpOracle,
) -> Result<BoundedResult> {
    if sliced.input_width() != phi.n {
        return Err(Error::WidthMismatch { expected: phi.n, got: sliced.input_width() });
    }
    let mut found: BTreeSet<BitString> = BTreeSet::new();
    while (found.len() as u64) < p {
        match oracle.first_solution_excluding(FormulaRef::Cnf(phi), sliced, &found)? {
            Some(x) => {
                found.insert(x);
            }
            None => break,
        }
    }
    Ok(BoundedResult::from_set(found))
}

/// Keeps `buffer` holding the `p` smallest values of `buffer U image(term)`.
/// The term's minima are walked in ascending order and the walk stops as
/// soon as the next value cannot displace anything (buffer full and value
/// beyond its maximum).
fn merge_term_minima(
    searcher: &mut ImageSearcher,
    p: u64,
    buffer: &mut BTreeSet<BitString>,
) {
    if p == 0 {
        return;
    }
    while let Some(v) = searcher.next() {
        if buffer.len() as u64 == p {
            let max = buffer.last().expect("buffer non-empty");
            if v > *max {
                break;
            }
        }
        buffer.insert(v);
        if buffer.len() as u64 > p {
            let max = buffer.last().unwrap().clone();
            buffer.remove(&max);
        }
    }
}

/// Merges the `p` lexicographically smallest hash-image values of a term
/// sequence into `buffer`. This is the streaming-friendly core of FindMin:
/// terms arrive as an iterator (lazily compiled structured sets plug in
/// here) and an existing buffer from earlier stream items keeps the merge
/// associative.
pub fn find_min_terms<I>(
    n: usize,
    terms: I,
    hash: &HashFn,
    p: u64,
    buffer: &mut BTreeSet<BitString>,
) -> Result<()>
where
    I: IntoIterator<Item = Term>,
{
    if hash.input_width() != n {
        return Err(Error::WidthMismatch { expected: n, got: hash.input_width() });
    }
    for term in terms {
        let form = term_affine_form(&term, hash, n)?;
        let mut searcher = ImageSearcher::new(&form.matrix, &form.offset, [])?
            .expect("term images are never empty");
        merge_term_minima(&mut searcher, p, buffer);
    }
    Ok(())
}

/// The `p` lexicographically smallest elements of `h(sol(phi))` for a DNF
/// formula (all of them when the image is smaller), sorted ascending.
pub fn find_min(phi: &DnfFormula, hash: &HashFn, p: u64) -> Result<Vec<BitString>> {
    let mut buffer = BTreeSet::new();
    find_min_terms(phi.n, phi.terms.iter().cloned(), hash, p, &mut buffer)?;
    Ok(buffer.into_iter().collect())
}

/// CNF counterpart of [`find_min`] via oracle-guided prefix search: each
/// feasibility probe ("does some solution hash to this prefix?") is one
/// oracle query, so a successor costs O(m) queries and the whole run O(p m).
pub fn find_min_cnf(
    phi: &CnfFormula,
    hash: &HashFn,
    p: u64,
    oracle: &NpOracle,
) -> Result<Vec<BitString>> {
    if hash.input_width() != phi.n {
        return Err(Error::WidthMismatch { expected: phi.n, got: hash.input_width() });
    }
    let m = hash.output_width();
    if p == 0 || !oracle.is_satisfiable(FormulaRef::Cnf(phi))? {
        return Ok(Vec::new());
    }
    let feasible = |prefix: &BitString| -> Result<bool> {
        oracle.exists_with_hash_prefix(FormulaRef::Cnf(phi), hash, prefix)
    };
    // Greedy smallest completion of a feasible prefix held in `bits[..from]`.
    let extend_min = |bits: &mut BitString, from: usize| -> Result<()> {
        for l in from..m {
            bits.set(l, false);
            if !feasible(&bits.prefix(l + 1))? {
                // The prefix is feasible, so the 1-branch must be.
                bits.set(l, true);
            }
        }
        Ok(())
    };

    let mut out = Vec::with_capacity(p as usize);
    let mut cur = BitString::zeros(m);
    extend_min(&mut cur, 0)?;
    out.push(cur.clone());
    'outer: while (out.len() as u64) < p {
        // Successor of `cur`: flip the rightmost feasible 0 to 1.
        for r in (0..m).rev() {
            if cur.get(r) {
                continue;
            }
            let mut candidate = BitString::zeros(m);
            for i in 0..r {
                if cur.get(i) {
                    candidate.set(i, true);
                }
            }
            candidate.set(r, true);
            if feasible(&candidate.prefix(r + 1))? {
                extend_min(&mut candidate, r + 1)?;
                out.push(candidate.clone());
                cur = candidate;
                continue 'outer;
            }
        }
        break; // cur is the image maximum
    }
    Ok(out)
}

/// The largest `t` such that some solution's hash value ends in `t` zeros,
/// found by binary search over oracle queries. Unsatisfiable formulas are an
/// error (distinguished from a legitimate t = 0).
///
/// The CNF path matches the polynomial-time story; DNF formulas are accepted
/// too but only the brute-force oracle backend can serve them, at desk
/// scale — no efficient DNF implementation is known.
pub fn find_max_range(formula: FormulaRef<'_>, hash: &HashFn, oracle: &NpOracle) -> Result<u32> {
    if hash.input_width() != formula.n() {
        return Err(Error::WidthMismatch { expected: formula.n(), got: hash.input_width() });
    }
    if !oracle.is_satisfiable(formula)? {
        return Err(Error::InvalidParams {
            msg: "find_max_range is undefined on unsatisfiable formulas".into(),
        });
    }
    let mut lo = 0u32;
    let mut hi = hash.output_width() as u32;
    while lo < hi {
        let mid = (lo + hi + 1) / 2;
        if oracle.exists_with_trailing_zeros(formula, hash, mid)? {
            lo = mid;
        } else {
            hi = mid - 1;
        }
    }
    Ok(lo)
}

/// Largest trailing-zero count of an affine hash over a DNF solution set,
/// without any oracle: forcing `t` trailing zeros on a term's image is an
/// affine feasibility check, binary-searched per term. `None` for the
/// unsatisfiable (zero-term) formula.
pub fn max_trailing_zeros_dnf(phi: &DnfFormula, hash: &HashFn) -> Result<Option<u32>> {
    if hash.input_width() != phi.n {
        return Err(Error::WidthMismatch { expected: phi.n, got: hash.input_width() });
    }
    let m = hash.output_width() as u32;
    let mut best: Option<u32> = None;
    for term in &phi.terms {
        let feasible = |t: u32| -> Result<bool> {
            let sliced = hash.suffix_slice(t as usize)?;
            let form = term_affine_form(term, &sliced, phi.n)?;
            let space =
                gaussian_solve(&AffineSystem::new(form.matrix.clone(), form.offset.clone()));
            Ok(space.consistent)
        };
        let mut lo = 0u32;
        let mut hi = m;
        while lo < hi {
            let mid = (lo + hi + 1) / 2;
            if feasible(mid)? {
                lo = mid;
            } else {
                hi = mid - 1;
            }
        }
        best = Some(best.map_or(lo, |b| b.max(lo)));
        if best == Some(m) {
            break;
        }
    }
    Ok(best)
}

/// Merges the `t` smallest values of `{h(x) : Ax = B}` into `buffer`.
/// The stacked system (hash rows as the image, `A|B` as base constraints)
/// feeds the same prefix search as FindMin. An inconsistent system
/// contributes nothing.
pub fn affine_find_min_into(
    a: &BitMatrix,
    b: &BitString,
    hash: &HashFn,
    t: u64,
    buffer: &mut BTreeSet<BitString>,
) -> Result<()> {
    if hash.input_width() != a.ncols() {
        return Err(Error::WidthMismatch { expected: a.ncols(), got: hash.input_width() });
    }
    if a.nrows() != b.len() {
        return Err(Error::WidthMismatch { expected: a.nrows(), got: b.len() });
    }
    let (rows, offset) = hash
        .affine_parts()
        .ok_or(Error::UnsupportedSlice { family: "poly" })?;
    let base = a.rows().iter().cloned().zip((0..b.len()).map(|i| b.get(i)));
    let Some(mut searcher) = ImageSearcher::new(rows, offset, base)? else {
        return Ok(()); // Ax = B has no solutions
    };
    merge_term_minima(&mut searcher, t, buffer);
    Ok(())
}

/// The `t` lexicographically smallest elements of `{h(x) : Ax = B}`, sorted
/// ascending; empty when the system is inconsistent.
pub fn affine_find_min(
    a: &BitMatrix,
    b: &BitString,
    hash: &HashFn,
    t: u64,
) -> Result<Vec<BitString>> {
    let mut buffer = BTreeSet::new();
    affine_find_min_into(a, b, hash, t, &mut buffer)?;
    Ok(buffer.into_iter().collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::{brute_count, brute_solutions, parse_dnf, Literal};
    use crate::harness::{random_cnf, random_dnf};
    use crate::hashing::{pick_hash_functions, HashFamily};
    use crate::hashing::trail_zero;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn toeplitz(n: usize, m: usize, seed: u64) -> HashFn {
        pick_hash_functions(HashFamily::Toeplitz, n, m, 1, seed).unwrap().get(0).clone()
    }

    #[test]
    fn bounded_sat_empty_constraint() {
        let phi = parse_dnf("p dnf 4 2\n1 0\n-1 2 0\n").unwrap();
        let h = toeplitz(4, 4, 3).prefix_slice(0).unwrap();
        let total = brute_count(FormulaRef::Dnf(&phi)).unwrap();
        let res = bounded_sat_dnf(&phi, &h, 100).unwrap();
        assert_eq!(res.count, total);
        for w in &res.witnesses {
            assert!(phi.satisfied_by(w));
        }
        let capped = bounded_sat_dnf(&phi, &h, 3).unwrap();
        assert_eq!(capped.count, 3);
        assert_eq!(capped.witnesses.len(), 3);
    }

    #[test]
    fn bounded_sat_singleton_term() {
        // A full-width term has one solution; the count is the indicator of
        // the hash constraint on that point.
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for seed in 0..20u64 {
            let n = 6;
            let lits: Vec<Literal> =
                (0..n).map(|v| Literal { var: v, positive: rng.random() }).collect();
            let point = BitString::from_bits(lits.iter().map(|l| l.positive));
            let phi = DnfFormula::new(n, vec![Term::new(lits).unwrap()]).unwrap();
            let h = toeplitz(n, n, seed).prefix_slice(2).unwrap();
            let res = bounded_sat_dnf(&phi, &h, 10).unwrap();
            let expect = u64::from(h.eval(&point).unwrap().is_zero());
            assert_eq!(res.count, expect);
        }
    }

    #[test]
    fn bounded_sat_matches_brute_force() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for trial in 0..50u64 {
            let n = 10;
            let phi = random_dnf(&mut rng, n, 3, 1..=5);
            let h = toeplitz(n, n, 1000 + trial).prefix_slice(3).unwrap();
            let res = bounded_sat_dnf(&phi, &h, 20).unwrap();
            let brute = brute_solutions(FormulaRef::Dnf(&phi))
                .unwrap()
                .into_iter()
                .filter(|x| h.eval(x).unwrap().is_zero())
                .count() as u64;
            assert_eq!(res.count, brute.min(20));
            for w in &res.witnesses {
                assert!(phi.satisfied_by(w) && h.eval(w).unwrap().is_zero());
            }
        }
    }

    #[test]
    fn bounded_sat_cnf_agrees_with_dnf_route() {
        // Encode the same solution set both ways: a single literal.
        let oracle = NpOracle::brute_force(16);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for trial in 0..20u64 {
            let n = 8;
            let v = rng.random_range(0..n);
            let dnf = DnfFormula::new(n, vec![Term::new(vec![Literal::pos(v)]).unwrap()]).unwrap();
            let cnf = CnfFormula::new(
                n,
                vec![crate::formula::Clause::new(vec![Literal::pos(v)]).unwrap()],
            )
            .unwrap();
            let h = toeplitz(n, n, 2000 + trial).prefix_slice(2).unwrap();
            let a = bounded_sat_dnf(&dnf, &h, 30).unwrap();
            let b = bounded_sat_cnf(&cnf, &h, 30, &oracle).unwrap();
            assert_eq!(a.count, b.count);
            if a.count < 30 {
                // Uncapped: both routes return the entire cell.
                assert_eq!(a.witnesses, b.witnesses);
            }
            for w in a.witnesses.iter().chain(&b.witnesses) {
                assert!(cnf.satisfied_by(w) && h.eval(w).unwrap().is_zero());
            }
        }
        // p = 0 needs no oracle work; unsatisfiable formulas count 0.
        let unsat = CnfFormula::new(2, vec![crate::formula::Clause::new(vec![]).unwrap()]).unwrap();
        let h = toeplitz(2, 2, 1).prefix_slice(0).unwrap();
        assert_eq!(bounded_sat_cnf(&unsat, &h, 0, &oracle).unwrap().count, 0);
        assert_eq!(bounded_sat_cnf(&unsat, &h, 5, &oracle).unwrap().count, 0);
    }

    #[test]
    fn bounded_sat_cnf_query_budget_is_linear_in_p() {
        let oracle = NpOracle::brute_force(16);
        let cnf = random_cnf(&mut ChaCha8Rng::seed_from_u64(3), 10, 3, 1..=3);
        let h = toeplitz(10, 10, 77).prefix_slice(1).unwrap();
        let before = oracle.queries();
        let res = bounded_sat_cnf(&cnf, &h, 12, &oracle).unwrap();
        let used = oracle.queries() - before;
        assert!(used <= res.count + 1, "used {used} queries for count {}", res.count);
    }

    #[test]
    fn bounded_sat_is_monotone_in_prefix_width() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for trial in 0..20u64 {
            let phi = random_dnf(&mut rng, 8, 3, 1..=4);
            let h = toeplitz(8, 8, 3000 + trial);
            let mut prev = u64::MAX;
            for m in 0..=8 {
                let c = bounded_sat_dnf(&phi, &h.prefix_slice(m).unwrap(), 1 << 8).unwrap().count;
                assert!(c <= prev, "cell counts must shrink as the prefix grows");
                prev = c;
            }
        }
    }

    #[test]
    fn find_min_whole_image_and_unsat() {
        let phi = parse_dnf("p dnf 5 1\n1 -2 0\n").unwrap();
        let h = toeplitz(5, 15, 4);
        let image: BTreeSet<BitString> = brute_solutions(FormulaRef::Dnf(&phi))
            .unwrap()
            .iter()
            .map(|x| h.eval(x).unwrap())
            .collect();
        let got = find_min(&phi, &h, 1000).unwrap();
        assert_eq!(got, image.into_iter().collect::<Vec<_>>());
        let unsat = parse_dnf("p dnf 5 0\n").unwrap();
        assert!(find_min(&unsat, &h, 10).unwrap().is_empty());
    }

    #[test]
    fn find_min_matches_brute_image_sort() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        for trial in 0..100u64 {
            let n = 8;
            let k = 1 + (trial % 4) as usize;
            let phi = random_dnf(&mut rng, n, k, 1..=6);
            let h = toeplitz(n, 3 * n, 4000 + trial);
            let p = 16u64;
            let mut image: Vec<BitString> = brute_solutions(FormulaRef::Dnf(&phi))
                .unwrap()
                .iter()
                .map(|x| h.eval(x).unwrap())
                .collect::<BTreeSet<_>>()
                .into_iter()
                .collect();
            image.truncate(p as usize);
            assert_eq!(find_min(&phi, &h, p).unwrap(), image);
        }
    }

    #[test]
    fn find_min_cnf_mirrors_dnf_and_counts_queries() {
        let oracle = NpOracle::brute_force(16);
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        for trial in 0..10u64 {
            let n = 6;
            let v = rng.random_range(0..n);
            let w = (v + 1) % n;
            // x_v OR x_w as CNF (one clause) and as DNF (two terms).
            let cnf = CnfFormula::new(
                n,
                vec![crate::formula::Clause::new(vec![Literal::pos(v), Literal::pos(w)]).unwrap()],
            )
            .unwrap();
            let dnf = DnfFormula::new(
                n,
                vec![
                    Term::new(vec![Literal::pos(v)]).unwrap(),
                    Term::new(vec![Literal::pos(w)]).unwrap(),
                ],
            )
            .unwrap();
            let h = toeplitz(n, 3 * n, 5000 + trial);
            let p = 10u64;
            let before = oracle.queries();
            let via_cnf = find_min_cnf(&cnf, &h, p, &oracle).unwrap();
            let used = oracle.queries() - before;
            assert_eq!(via_cnf, find_min(&dnf, &h, p).unwrap());
            let m = (3 * n) as u64;
            assert!(used <= 2 * m * (p + 1), "oracle usage {used} above O(p m) budget");
        }
        // Tautology: image of all points; p = 1 returns the global minimum.
        let taut = CnfFormula::new(4, vec![]).unwrap();
        let h = toeplitz(4, 12, 6);
        let all: BTreeSet<BitString> = (0u64..16)
            .map(|v| h.eval(&BitString::from_u64(v, 4).unwrap()).unwrap())
            .collect();
        assert_eq!(
            find_min_cnf(&taut, &h, 100, &oracle).unwrap(),
            all.iter().cloned().collect::<Vec<_>>()
        );
        assert_eq!(
            find_min_cnf(&taut, &h, 1, &oracle).unwrap(),
            vec![all.first().unwrap().clone()]
        );
    }

    #[test]
    fn find_max_range_cases() {
        let oracle = NpOracle::brute_force(16);
        // Single solution: exactly its trailing-zero count.
        let n = 6;
        let lits: Vec<Literal> = (0..n).map(Literal::pos).collect();
        let point = BitString::from_bits(std::iter::repeat(true).take(n));
        let phi = DnfFormula::new(n, vec![Term::new(lits).unwrap()]).unwrap();
        let grid = crate::hashing::pick_poly_grid(n, 3, 1, 1, 8).unwrap();
        let h = grid.get2(0, 0);
        let expect = trail_zero(&h.eval(&point).unwrap());
        assert_eq!(find_max_range(FormulaRef::Dnf(&phi), h, &oracle).unwrap(), expect);

        // Constant-zero polynomial: n for any satisfiable formula.
        let zero = HashFn::Poly(
            crate::hashing::PolyHash::from_coeffs(n, vec![crate::gf2::Gf2nElement::zero(n).unwrap()])
                .unwrap(),
        );
        assert_eq!(find_max_range(FormulaRef::Dnf(&phi), &zero, &oracle).unwrap(), n as u32);

        // Unsatisfiable input is an error, not t = 0.
        let unsat = parse_dnf("p dnf 6 0\n").unwrap();
        assert!(find_max_range(FormulaRef::Dnf(&unsat), h, &oracle).is_err());
    }

    #[test]
    fn find_max_range_matches_brute_max() {
        let oracle = NpOracle::brute_force(16);
        let mut rng = ChaCha8Rng::seed_from_u64(51);
        for trial in 0..100u64 {
            let n = 10;
            let phi = random_dnf(&mut rng, n, 3, 1..=5);
            if phi.terms.is_empty() {
                continue;
            }
            let grid = crate::hashing::pick_poly_grid(n, 3, 1, 1, 6000 + trial).unwrap();
            let h = grid.get2(0, 0);
            let brute = brute_solutions(FormulaRef::Dnf(&phi))
                .unwrap()
                .iter()
                .map(|x| trail_zero(&h.eval(x).unwrap()))
                .max()
                .unwrap();
            assert_eq!(find_max_range(FormulaRef::Dnf(&phi), h, &oracle).unwrap(), brute);
        }
    }

    #[test]
    fn find_max_range_query_count_is_logarithmic() {
        let oracle = NpOracle::brute_force(16);
        let phi = random_cnf(&mut ChaCha8Rng::seed_from_u64(1), 12, 3, 2..=3);
        let grid = crate::hashing::pick_poly_grid(12, 3, 1, 1, 17).unwrap();
        let before = oracle.queries();
        let _ = find_max_range(FormulaRef::Cnf(&phi), grid.get2(0, 0), &oracle).unwrap();
        let used = oracle.queries() - before;
        let bound = ((12f64 + 1.0).log2().ceil() as u64) + 1;
        assert!(used <= bound, "used {used}, bound {bound}");
    }

    #[test]
    fn max_trailing_zeros_dnf_matches_brute() {
        let mut rng = ChaCha8Rng::seed_from_u64(61);
        for trial in 0..50u64 {
            let n = 9;
            let phi = random_dnf(&mut rng, n, 3, 1..=5);
            let coll = pick_hash_functions(HashFamily::Xor, n, n, 1, 7000 + trial).unwrap();
            let h = coll.get(0);
            let got = max_trailing_zeros_dnf(&phi, h).unwrap();
            let brute = brute_solutions(FormulaRef::Dnf(&phi))
                .unwrap()
                .iter()
                .map(|x| trail_zero(&h.eval(x).unwrap()))
                .max();
            assert_eq!(got, brute);
        }
    }

    #[test]
    fn affine_find_min_cases() {
        let n = 8;
        let h = toeplitz(n, 3 * n, 9);
        // Identity system: the unique solution is B.
        let b = BitString::from_u64(0xa5, n).unwrap();
        let got = affine_find_min(&BitMatrix::identity(n), &b, &h, 5).unwrap();
        assert_eq!(got, vec![h.eval(&b).unwrap()]);

        // Zero system: image over the whole cube.
        let zero = BitMatrix::zeros(n, n);
        let z = BitString::zeros(n);
        let all: BTreeSet<BitString> =
            (0u64..256).map(|v| h.eval(&BitString::from_u64(v, n).unwrap()).unwrap()).collect();
        let t = 12;
        let expect: Vec<BitString> = all.iter().take(t).cloned().collect();
        assert_eq!(affine_find_min(&zero, &z, &h, t as u64).unwrap(), expect);

        // Inconsistent system: empty result.
        let mut a = BitMatrix::zeros(1, n);
        let _ = &mut a;
        let inconsistent =
            affine_find_min(&a, &BitString::from_u64(1, 1).unwrap(), &h, 4).unwrap();
        assert!(inconsistent.is_empty());
    }

    #[test]
    fn affine_find_min_matches_brute_enumeration() {
        let mut rng = ChaCha8Rng::seed_from_u64(71);
        for trial in 0..100u64 {
            let n = 8;
            let rows = rng.random_range(1..=n);
            let a = BitMatrix::random(&mut rng, rows, n);
            let b = BitString::random(&mut rng, rows);
            let h = toeplitz(n, 3 * n, 8000 + trial);
            let expect: BTreeSet<BitString> = (0u64..256)
                .map(|v| BitString::from_u64(v, n).unwrap())
                .filter(|x| a.mul_vec(x) == b)
                .map(|x| h.eval(&x).unwrap())
                .collect();
            let t = 10u64;
            let expect: Vec<BitString> = expect.into_iter().take(t as usize).collect();
            assert_eq!(affine_find_min(&a, &b, &h, t).unwrap(), expect);
        }
    }
}
