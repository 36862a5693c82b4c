//! Boolean formula model: DNF terms, CNF clauses, text parsing, the
//! term-to-affine-form compilation used by the hash-constraint solvers, and
//! exact brute-force oracles that double as the desk-scale NP oracle.
//!
//! Variables are 0-based internally and occupy MSB-first positions of an
//! assignment `BitString`: variable 0 is the most significant bit. The text
//! format mirrors DIMACS with 1-based signed indices.

use std::collections::BTreeMap;
use std::fmt;

use crate::error::{Error, Result};
use crate::gf2::{BitMatrix, BitString};
use crate::hashing::HashFn;

/// Exact enumeration refuses instances wider than this by default.
pub const DEFAULT_BRUTE_CAP: usize = 24;

/// A single literal: a variable index with a polarity.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Literal {
    pub var: usize,
    pub positive: bool,
}

impl Literal {
    pub fn pos(var: usize) -> Self {
        Literal { var, positive: true }
    }

    pub fn neg(var: usize) -> Self {
        Literal { var, positive: false }
    }
}

/// A conjunction of literals over distinct variables. The empty term is the
/// tautology (all of `{0,1}^n`). Terms are unsatisfiable-free by invariant:
/// no variable appears twice.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Term {
    literals: Vec<Literal>,
}

impl Term {
    /// Builds a term, sorting by variable; duplicate variables are rejected.
    pub fn new(mut literals: Vec<Literal>) -> Result<Self> {
        literals.sort_unstable();
        for pair in literals.windows(2) {
            if pair[0].var == pair[1].var {
                return Err(Error::InvalidParams {
                    msg: format!("variable {} appears twice in a term", pair[0].var + 1),
                });
            }
        }
        Ok(Term { literals })
    }

    pub fn tautology() -> Self {
        Term { literals: Vec::new() }
    }

    pub fn literals(&self) -> &[Literal] {
        &self.literals
    }

    /// Number of fixed variables.
    pub fn width(&self) -> usize {
        self.literals.len()
    }

    pub fn satisfied_by(&self, x: &BitString) -> bool {
        self.literals.iter().all(|l| x.get(l.var) == l.positive)
    }

    /// `(mask, value)` such that `x` satisfies the term iff
    /// `x & mask == value`, in the numeric u64 view. Requires `n <= 64`.
    pub fn mask_value(&self, n: usize) -> (u64, u64) {
        let mut mask = 0u64;
        let mut value = 0u64;
        for l in &self.literals {
            let bit = 1u64 << (n - 1 - l.var);
            mask |= bit;
            if l.positive {
                value |= bit;
            }
        }
        (mask, value)
    }

    /// Conjoins two terms; `None` if they clash on some variable.
    pub fn conjoin(&self, other: &Term) -> Option<Term> {
        let mut merged: BTreeMap<usize, bool> =
            self.literals.iter().map(|l| (l.var, l.positive)).collect();
        for l in &other.literals {
            match merged.insert(l.var, l.positive) {
                Some(prev) if prev != l.positive => return None,
                _ => {}
            }
        }
        Some(Term {
            literals: merged.into_iter().map(|(var, positive)| Literal { var, positive }).collect(),
        })
    }

    /// Shifts all variable indices by `offset` (for multi-dimensional
    /// encodings where dimension j occupies variables `[j*n, (j+1)*n)`).
    pub fn shift_vars(&self, offset: usize) -> Term {
        Term {
            literals: self
                .literals
                .iter()
                .map(|l| Literal { var: l.var + offset, positive: l.positive })
                .collect(),
        }
    }
}

/// A disjunction of terms over `n` variables. Zero terms = unsatisfiable.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct DnfFormula {
    pub n: usize,
    pub terms: Vec<Term>,
}

/// A disjunction of literals over distinct variables. The empty clause is
/// unsatisfiable.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Clause {
    literals: Vec<Literal>,
}

impl Clause {
    pub fn new(mut literals: Vec<Literal>) -> Result<Self> {
        literals.sort_unstable();
        for pair in literals.windows(2) {
            if pair[0].var == pair[1].var {
                return Err(Error::InvalidParams {
                    msg: format!("variable {} appears twice in a clause", pair[0].var + 1),
                });
            }
        }
        Ok(Clause { literals })
    }

    pub fn literals(&self) -> &[Literal] {
        &self.literals
    }

    pub fn satisfied_by(&self, x: &BitString) -> bool {
        self.literals.iter().any(|l| x.get(l.var) == l.positive)
    }

    /// `(pos_mask, neg_mask)` in the numeric u64 view: satisfied iff
    /// `x & pos_mask != 0 || !x & neg_mask != 0`.
    pub fn masks(&self, n: usize) -> (u64, u64) {
        let mut pos = 0u64;
        let mut neg = 0u64;
        for l in &self.literals {
            let bit = 1u64 << (n - 1 - l.var);
            if l.positive {
                pos |= bit;
            } else {
                neg |= bit;
            }
        }
        (pos, neg)
    }
}

/// A conjunction of clauses over `n` variables. Zero clauses = tautology.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct CnfFormula {
    pub n: usize,
    pub clauses: Vec<Clause>,
}

impl DnfFormula {
    pub fn new(n: usize, terms: Vec<Term>) -> Result<Self> {
        for t in &terms {
            if let Some(l) = t.literals.iter().find(|l| l.var >= n) {
                return Err(Error::InvalidParams {
                    msg: format!("variable {} out of range for n={n}", l.var + 1),
                });
            }
        }
        Ok(DnfFormula { n, terms })
    }

    pub fn satisfied_by(&self, x: &BitString) -> bool {
        self.terms.iter().any(|t| t.satisfied_by(x))
    }

    pub fn is_trivially_unsat(&self) -> bool {
        self.terms.is_empty()
    }
}

impl CnfFormula {
    pub fn new(n: usize, clauses: Vec<Clause>) -> Result<Self> {
        for c in &clauses {
            if let Some(l) = c.literals.iter().find(|l| l.var >= n) {
                return Err(Error::InvalidParams {
                    msg: format!("variable {} out of range for n={n}", l.var + 1),
                });
            }
        }
        Ok(CnfFormula { n, clauses })
    }

    pub fn satisfied_by(&self, x: &BitString) -> bool {
        self.clauses.iter().all(|c| c.satisfied_by(x))
    }
}

// ---------------------------------------------------------------------------
// Text format
// ---------------------------------------------------------------------------

pub(crate) fn parse_lines(text: &str, kind: &str) -> Result<(usize, usize, Vec<Vec<Literal>>)> {
    let mut header: Option<(usize, usize)> = None;
    let mut groups: Vec<Vec<Literal>> = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = lineno + 1;
        let trimmed = raw.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        // Token start columns for pinpointed diagnostics.
        let tokens: Vec<(usize, &str)> = raw
            .split_whitespace()
            .map(|tok| {
                let col = tok.as_ptr() as usize - raw.as_ptr() as usize + 1;
                (col, tok)
            })
            .collect();
        if header.is_none() {
            if tokens.len() != 4 || tokens[0].1 != "p" || tokens[1].1 != kind {
                return Err(Error::parse(
                    line,
                    tokens.first().map(|t| t.0).unwrap_or(1),
                    format!("expected header 'p {kind} <vars> <count>'"),
                ));
            }
            let n: usize = tokens[2]
                .1
                .parse()
                .map_err(|_| Error::parse(line, tokens[2].0, "variable count must be an integer"))?;
            let k: usize = tokens[3]
                .1
                .parse()
                .map_err(|_| Error::parse(line, tokens[3].0, "item count must be an integer"))?;
            header = Some((n, k));
            continue;
        }
        let (n, _) = header.unwrap();
        let mut lits = Vec::new();
        let mut terminated = false;
        for &(col, tok) in &tokens {
            if terminated {
                return Err(Error::parse(line, col, "tokens after terminating 0"));
            }
            let v: i64 = tok
                .parse()
                .map_err(|_| Error::parse(line, col, format!("expected signed index, got '{tok}'")))?;
            if v == 0 {
                terminated = true;
                continue;
            }
            let var = v.unsigned_abs() as usize - 1;
            if var >= n {
                return Err(Error::parse(line, col, format!("variable {} out of range 1..={n}", v.abs())));
            }
            if lits.iter().any(|l: &Literal| l.var == var) {
                return Err(Error::parse(line, col, format!("variable {} repeated", v.abs())));
            }
            lits.push(Literal { var, positive: v > 0 });
        }
        if !terminated {
            return Err(Error::parse(line, raw.len() + 1, "line must end with 0"));
        }
        groups.push(lits);
    }
    let Some((n, k)) = header else {
        return Err(Error::parse(1, 1, format!("missing 'p {kind}' header")));
    };
    if groups.len() != k {
        return Err(Error::parse(
            text.lines().count().max(1),
            1,
            format!("header declares {k} items, found {}", groups.len()),
        ));
    }
    Ok((n, k, groups))
}

/// Parses the `.dnf` text format: `p dnf <n> <k>` then one term per line as
/// signed 1-based indices terminated by `0`. `#` lines are comments.
pub fn parse_dnf(text: &str) -> Result<DnfFormula> {
    let (n, _, groups) = parse_lines(text, "dnf")?;
    let terms = groups.into_iter().map(Term::new).collect::<Result<_>>()?;
    DnfFormula::new(n, terms)
}

/// Parses the `.cnf` text format (same shape with `p cnf`).
pub fn parse_cnf(text: &str) -> Result<CnfFormula> {
    let (n, _, groups) = parse_lines(text, "cnf")?;
    let clauses = groups.into_iter().map(Clause::new).collect::<Result<_>>()?;
    CnfFormula::new(n, clauses)
}

fn write_lits(f: &mut fmt::Formatter<'_>, lits: &[Literal]) -> fmt::Result {
    for l in lits {
        let idx = l.var as i64 + 1;
        write!(f, "{} ", if l.positive { idx } else { -idx })?;
    }
    writeln!(f, "0")
}

impl fmt::Display for DnfFormula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "p dnf {} {}", self.n, self.terms.len())?;
        for t in &self.terms {
            write_lits(f, &t.literals)?;
        }
        Ok(())
    }
}

impl fmt::Display for CnfFormula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "p cnf {} {}", self.n, self.clauses.len())?;
        for c in &self.clauses {
            write_lits(f, &c.literals)?;
        }
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// Term-to-affine compilation
// ---------------------------------------------------------------------------

/// The image of a hash restricted to a term's solutions, in affine form:
/// `{h(x) : x satisfies T} = {matrix * x' + offset : x' in {0,1}^(n-w)}`,
/// where `x'` ranges over the term's free variables in ascending order.
#[derive(Clone, Debug)]
pub struct TermAffineForm {
    pub matrix: BitMatrix,
    pub offset: BitString,
    free_vars: Vec<usize>,
    fixed: BitString,
}

impl TermAffineForm {
    pub fn free_count(&self) -> usize {
        self.free_vars.len()
    }

    /// Reconstructs the full assignment from a free-variable vector.
    pub fn lift(&self, free: &BitString) -> BitString {
        debug_assert_eq!(free.len(), self.free_vars.len());
        let mut x = self.fixed.clone();
        for (j, &var) in self.free_vars.iter().enumerate() {
            if free.get(j) {
                x.set(var, true);
            }
        }
        x
    }
}

/// Compiles a term against an affine hash: selecting the free columns of A
/// gives the matrix, and hashing the fixed assignment gives the offset.
pub fn term_affine_form(term: &Term, hash: &HashFn, n: usize) -> Result<TermAffineForm> {
    let (matrix, _) = hash
        .affine_parts()
        .ok_or(Error::UnsupportedSlice { family: "poly" })?;
    if hash.input_width() != n {
        return Err(Error::WidthMismatch { expected: n, got: hash.input_width() });
    }
    let mut fixed = BitString::zeros(n);
    let mut is_fixed = vec![false; n];
    for l in term.literals() {
        is_fixed[l.var] = true;
        if l.positive {
            fixed.set(l.var, true);
        }
    }
    let free_vars: Vec<usize> = (0..n).filter(|&v| !is_fixed[v]).collect();
    let sub = matrix.select_columns(&free_vars);
    let offset = hash.eval(&fixed)?;
    Ok(TermAffineForm { matrix: sub, offset, free_vars, fixed })
}

// ---------------------------------------------------------------------------
// Brute-force oracles
// ---------------------------------------------------------------------------

/// Either kind of formula, for code paths that accept both.
#[derive(Clone, Copy, Debug)]
pub enum FormulaRef<'a> {
    Dnf(&'a DnfFormula),
    Cnf(&'a CnfFormula),
}

impl<'a> FormulaRef<'a> {
    pub fn n(&self) -> usize {
        match self {
            FormulaRef::Dnf(d) => d.n,
            FormulaRef::Cnf(c) => c.n,
        }
    }

    pub fn satisfied_by_u64(&self, v: u64) -> bool {
        let n = self.n();
        match self {
            FormulaRef::Dnf(d) => d.terms.iter().any(|t| {
                let (mask, value) = t.mask_value(n);
                v & mask == value
            }),
            FormulaRef::Cnf(c) => c.clauses.iter().all(|cl| {
                let (pos, neg) = cl.masks(n);
                v & pos != 0 || !v & neg != 0
            }),
        }
    }
}

fn brute_scan(formula: FormulaRef<'_>, cap: usize) -> Result<Vec<u64>> {
    let n = formula.n();
    if n > cap {
        return Err(Error::BruteCapExceeded { n, cap });
    }
    let n_u32 = n as u32;
    let mut out = Vec::new();
    match formula {
        FormulaRef::Dnf(d) => {
            let masks: Vec<(u64, u64)> = d.terms.iter().map(|t| t.mask_value(n)).collect();
            for v in 0..(1u64 << n_u32) {
                if masks.iter().any(|&(m, val)| v & m == val) {
                    out.push(v);
                }
            }
        }
        FormulaRef::Cnf(c) => {
            let masks: Vec<(u64, u64)> = c.clauses.iter().map(|cl| cl.masks(n)).collect();
            for v in 0..(1u64 << n_u32) {
                if masks.iter().all(|&(p, ng)| v & p != 0 || !v & ng != 0) {
                    out.push(v);
                }
            }
        }
    }
    Ok(out)
}

/// Exact model count by exhaustive enumeration; errors above the cap.
pub fn brute_count(formula: FormulaRef<'_>) -> Result<u64> {
    brute_count_with_cap(formula, DEFAULT_BRUTE_CAP)
}

pub fn brute_count_with_cap(formula: FormulaRef<'_>, cap: usize) -> Result<u64> {
    Ok(brute_scan(formula, cap)?.len() as u64)
}

/// All satisfying assignments in ascending (lexicographic) order.
pub fn brute_solutions(formula: FormulaRef<'_>) -> Result<Vec<BitString>> {
    brute_solutions_with_cap(formula, DEFAULT_BRUTE_CAP)
}

pub fn brute_solutions_with_cap(formula: FormulaRef<'_>, cap: usize) -> Result<Vec<BitString>> {
    let n = formula.n();
    Ok(brute_scan(formula, cap)?
        .into_iter()
        .map(|v| BitString::from_u64(v, n).expect("v < 2^n"))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hashing::{pick_hash_functions, HashFamily};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::collections::BTreeSet;

    fn bs(v: u64, len: usize) -> BitString {
        BitString::from_u64(v, len).unwrap()
    }

    #[test]
    fn parse_simple_dnf() {
        let d = parse_dnf("p dnf 2 1\n1 -2 0\n").unwrap();
        assert_eq!(d.n, 2);
        assert_eq!(d.terms.len(), 1);
        assert!(d.satisfied_by(&bs(0b10, 2)));
        assert!(!d.satisfied_by(&bs(0b11, 2)));
    }

    #[test]
    fn parse_empty_formula_and_comments() {
        let d = parse_dnf("# empty\np dnf 3 0\n").unwrap();
        assert!(d.is_trivially_unsat());
        assert_eq!(brute_count(FormulaRef::Dnf(&d)).unwrap(), 0);
    }

    #[test]
    fn parse_errors_are_pinpointed() {
        match parse_dnf("p dnf 2 1\n1 3 0\n") {
            Err(Error::Parse { line, col, .. }) => {
                assert_eq!(line, 2);
                assert_eq!(col, 3);
            }
            other => panic!("expected parse error, got {other:?}"),
        }
        assert!(parse_dnf("p cnf 2 1\n1 0\n").is_err()); // wrong kind
        assert!(parse_dnf("p dnf 2 2\n1 0\n").is_err()); // count mismatch
        assert!(parse_dnf("p dnf 2 1\n1 -1 0\n").is_err()); // repeated variable
        assert!(parse_dnf("p dnf 2 1\n1 2\n").is_err()); // missing terminator
    }

    #[test]
    fn roundtrip_random_corpus() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..100 {
            let n = rng.random_range(1..=10);
            let k = rng.random_range(0..=6);
            let d = crate::harness::random_dnf(&mut rng, n, k, 0..=n.min(4));
            let text = d.to_string();
            assert_eq!(parse_dnf(&text).unwrap(), d);
        }
    }

    #[test]
    fn tautology_and_small_counts() {
        let taut = DnfFormula::new(4, vec![Term::tautology()]).unwrap();
        assert_eq!(brute_count(FormulaRef::Dnf(&taut)).unwrap(), 16);
        // x1 or x2 over two variables has 3 solutions.
        let d = parse_dnf("p dnf 2 2\n1 0\n2 0\n").unwrap();
        assert_eq!(brute_count(FormulaRef::Dnf(&d)).unwrap(), 3);
    }

    #[test]
    fn brute_cap_is_enforced() {
        let d = DnfFormula::new(30, vec![Term::tautology()]).unwrap();
        assert!(matches!(
            brute_count(FormulaRef::Dnf(&d)),
            Err(Error::BruteCapExceeded { n: 30, cap: 24 })
        ));
    }

    #[test]
    fn term_solution_sizes() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..20 {
            let n = rng.random_range(1..=10);
            let w = rng.random_range(0..=n);
            let d = crate::harness::random_dnf(&mut rng, n, 1, w..=w);
            assert_eq!(brute_count(FormulaRef::Dnf(&d)).unwrap(), 1u64 << (n - w));
        }
    }

    #[test]
    fn inclusion_exclusion_matches_enumeration() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..40 {
            let n = rng.random_range(2..=10);
            let k = rng.random_range(1..=5);
            let d = crate::harness::random_dnf(&mut rng, n, k, 1..=n.min(5));
            assert_eq!(
                crate::harness::dnf_inclusion_exclusion_count(&d),
                brute_count(FormulaRef::Dnf(&d)).unwrap()
            );
        }
    }

    #[test]
    fn affine_form_degenerate_cases() {
        let coll = pick_hash_functions(HashFamily::Toeplitz, 6, 6, 1, 11).unwrap();
        let h = coll.get(0);
        // Full-width term: empty matrix, offset = hash of the unique point.
        let lits: Vec<Literal> =
            (0..6).map(|v| Literal { var: v, positive: v % 2 == 0 }).collect();
        let point = BitString::from_bits((0..6).map(|v| v % 2 == 0));
        let t = Term::new(lits).unwrap();
        let form = term_affine_form(&t, h, 6).unwrap();
        assert_eq!(form.free_count(), 0);
        assert_eq!(form.offset, h.eval(&point).unwrap());
        // Empty term: matrix = A, offset = b.
        let form = term_affine_form(&Term::tautology(), h, 6).unwrap();
        let (a, b) = h.affine_parts().unwrap();
        assert_eq!(&form.matrix, a);
        assert_eq!(&form.offset, b);
    }

    #[test]
    fn affine_form_image_equals_direct_hashing() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        for seed in 0..30u64 {
            let n = 6;
            let coll = pick_hash_functions(HashFamily::Xor, n, 4, 1, seed).unwrap();
            let h = coll.get(0);
            let d = crate::harness::random_dnf(&mut rng, n, 1, 0..=n);
            let t = &d.terms[0];
            let form = term_affine_form(t, h, n).unwrap();
            let mut via_form = BTreeSet::new();
            for fv in 0u64..1 << form.free_count() {
                let free = bs(fv, form.free_count());
                let x = form.lift(&free);
                assert!(t.satisfied_by(&x));
                let mut y = form.matrix.mul_vec(&free);
                y.xor_assign(&form.offset);
                via_form.insert(y);
            }
            let direct: BTreeSet<BitString> = brute_solutions(FormulaRef::Dnf(&d))
                .unwrap()
                .iter()
                .map(|x| h.eval(x).unwrap())
                .collect();
            assert_eq!(via_form, direct);
        }
    }
}
