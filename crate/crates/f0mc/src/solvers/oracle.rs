//! The NP-oracle abstraction behind the CNF code paths. The brute-force
//! backend answers the query shapes the solvers need by bounded enumeration
//! and is exact up to its width cap; the external stub exists so the query
//! surface is pinned down for a future real solver, and errors on use.

use std::collections::{BTreeSet, HashMap};
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, Mutex};

use crate::error::{Error, Result};
use crate::formula::{brute_solutions_with_cap, CnfFormula, DnfFormula, FormulaRef};
use crate::gf2::BitString;
use crate::hashing::{trail_zero, HashFn};

#[derive(Clone, Copy, Debug)]
pub enum OracleBackend {
    /// Exhaustive enumeration, exact for formulas up to `cap` variables.
    BruteForce { cap: usize },
    /// Placeholder for an external solver; every query errors.
    ExternalStub,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
enum CacheKey {
    Dnf(DnfFormula),
    Cnf(CnfFormula),
}

/// A decision-procedure handle with a query budget counter. Each public
/// query increments the counter once, so tests can assert the call-count
/// bounds of the algorithms built on top. Queries are safe to issue
/// concurrently.
pub struct NpOracle {
    backend: OracleBackend,
    queries: AtomicU64,
    budget: Option<u64>,
    solutions: Mutex<HashMap<CacheKey, Arc<Vec<u64>>>>,
}

impl NpOracle {
    pub fn brute_force(cap: usize) -> Self {
        NpOracle {
            backend: OracleBackend::BruteForce { cap },
            queries: AtomicU64::new(0),
            budget: None,
            solutions: Mutex::new(HashMap::new()),
        }
    }

    pub fn external_stub() -> Self {
        NpOracle {
            backend: OracleBackend::ExternalStub,
            queries: AtomicU64::new(0),
            budget: None,
            solutions: Mutex::new(HashMap::new()),
        }
    }

    /// Caps the total number of queries; exceeding it errors.
    pub fn with_budget(mut self, budget: u64) -> Self {
        self.budget = Some(budget);
        self
    }

    pub fn queries(&self) -> u64 {
        self.queries.load(Ordering::Relaxed)
    }

    pub fn backend(&self) -> OracleBackend {
        self.backend
    }

    fn charge(&self) -> Result<usize> {
        let used = self.queries.fetch_add(1, Ordering::Relaxed) + 1;
        if let Some(budget) = self.budget {
            if used > budget {
                return Err(Error::OracleBudgetExceeded { cap: budget });
            }
        }
        match self.backend {
            OracleBackend::BruteForce { cap } => Ok(cap),
            OracleBackend::ExternalStub => Err(Error::OracleUnavailable),
        }
    }

    /// Cached full solution list; building it is an implementation detail of
    /// the brute backend and is not charged as extra queries.
    fn solution_list(&self, formula: FormulaRef<'_>, cap: usize) -> Result<Arc<Vec<u64>>> {
        let key = match formula {
            FormulaRef::Dnf(d) => CacheKey::Dnf(d.clone()),
            FormulaRef::Cnf(c) => CacheKey::Cnf(c.clone()),
        };
        {
            let cache = self.solutions.lock().unwrap();
            if let Some(hit) = cache.get(&key) {
                return Ok(hit.clone());
            }
        }
        let sols: Vec<u64> = brute_solutions_with_cap(formula, cap)?
            .iter()
            .map(|x| x.to_u64().expect("cap <= 64"))
            .collect();
        let arc = Arc::new(sols);
        self.solutions.lock().unwrap().insert(key, arc.clone());
        Ok(arc)
    }

    /// Is the formula satisfiable at all?
    pub fn is_satisfiable(&self, formula: FormulaRef<'_>) -> Result<bool> {
        let cap = self.charge()?;
        Ok(!self.solution_list(formula, cap)?.is_empty())
    }

    /// The lexicographically first solution of `formula` with
    /// `constraint(x) = 0^m` that is not in `blocked`, if any.
    pub fn first_solution_excluding(
        &self,
        formula: FormulaRef<'_>,
        constraint: &HashFn,
        blocked: &BTreeSet<BitString>,
    ) -> Result<Option<BitString>> {
        let cap = self.charge()?;
        let n = formula.n();
        for &v in self.solution_list(formula, cap)?.iter() {
            let x = BitString::from_u64(v, n).expect("v < 2^n");
            if !constraint.eval(&x)?.is_zero() {
                continue;
            }
            if !blocked.contains(&x) {
                return Ok(Some(x));
            }
        }
        Ok(None)
    }

    /// Does some solution hash to a value starting with `prefix`?
    pub fn exists_with_hash_prefix(
        &self,
        formula: FormulaRef<'_>,
        hash: &HashFn,
        prefix: &BitString,
    ) -> Result<bool> {
        let cap = self.charge()?;
        let n = formula.n();
        for &v in self.solution_list(formula, cap)?.iter() {
            let x = BitString::from_u64(v, n).expect("v < 2^n");
            if hash.eval(&x)?.has_prefix(prefix) {
                return Ok(true);
            }
        }
        Ok(false)
    }

    /// Does some solution hash to a value with at least `t` trailing zeros?
    pub fn exists_with_trailing_zeros(
        &self,
        formula: FormulaRef<'_>,
        hash: &HashFn,
        t: u32,
    ) -> Result<bool> {
        let cap = self.charge()?;
        let n = formula.n();
        if let Some(poly) = hash.as_poly() {
            // Numeric fast path: no per-candidate bit strings.
            let m = hash.output_width() as u32;
            for &v in self.solution_list(formula, cap)?.iter() {
                let y = poly.eval_u64(v)?;
                let tz = if y == 0 { m } else { y.trailing_zeros() };
                if tz >= t {
                    return Ok(true);
                }
            }
            return Ok(false);
        }
        for &v in self.solution_list(formula, cap)?.iter() {
            let x = BitString::from_u64(v, n).expect("v < 2^n");
            if trail_zero(&hash.eval(&x)?) >= t {
                return Ok(true);
            }
        }
        Ok(false)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::parse_cnf;
    use crate::hashing::{pick_hash_functions, HashFamily};

    #[test]
    fn stub_backend_errors() {
        let oracle = NpOracle::external_stub();
        let f = parse_cnf("p cnf 2 1\n1 2 0\n").unwrap();
        assert!(matches!(
            oracle.is_satisfiable(FormulaRef::Cnf(&f)),
            Err(Error::OracleUnavailable)
        ));
    }

    #[test]
    fn budget_is_enforced_and_counted() {
        let oracle = NpOracle::brute_force(16).with_budget(2);
        let f = parse_cnf("p cnf 3 1\n1 -2 0\n").unwrap();
        let coll = pick_hash_functions(HashFamily::Toeplitz, 3, 3, 1, 1).unwrap();
        let h = coll.get(0);
        assert!(oracle.is_satisfiable(FormulaRef::Cnf(&f)).unwrap());
        assert!(oracle
            .exists_with_trailing_zeros(FormulaRef::Cnf(&f), h, 0)
            .unwrap());
        assert_eq!(oracle.queries(), 2);
        assert!(matches!(
            oracle.is_satisfiable(FormulaRef::Cnf(&f)),
            Err(Error::OracleBudgetExceeded { cap: 2 })
        ));
    }
}
