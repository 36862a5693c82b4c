use rand::RngCore;

use super::bits::BitString;

/// A dense matrix over GF(2), stored as one `BitString` per row.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BitMatrix {
    rows: Vec<BitString>,
    cols: usize,
}

impl BitMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        BitMatrix { rows: vec![BitString::zeros(cols); rows], cols }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, true);
        }
        m
    }

    /// Builds a matrix from rows, which must all share a width.
    pub fn from_rows(rows: Vec<BitString>) -> Self {
        let cols = rows.first().map(|r| r.len()).unwrap_or(0);
        debug_assert!(rows.iter().all(|r| r.len() == cols));
        BitMatrix { rows, cols }
    }

    pub fn random(rng: &mut impl RngCore, rows: usize, cols: usize) -> Self {
        BitMatrix { rows: (0..rows).map(|_| BitString::random(rng, cols)).collect(), cols }
    }

    pub fn nrows(&self) -> usize {
        self.rows.len()
    }

    pub fn ncols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &BitString {
        &self.rows[i]
    }

    pub fn rows(&self) -> &[BitString] {
        &self.rows
    }

    pub fn get(&self, i: usize, j: usize) -> bool {
        self.rows[i].get(j)
    }

    pub fn set(&mut self, i: usize, j: usize, v: bool) {
        self.rows[i].set(j, v);
    }

    /// Matrix-vector product over GF(2); `x` must have width `ncols`.
    pub fn mul_vec(&self, x: &BitString) -> BitString {
        debug_assert_eq!(x.len(), self.cols);
        BitString::from_bits(self.rows.iter().map(|r| r.and_parity(x)))
    }

    /// The submatrix keeping the given columns, in the given order.
    pub fn select_columns(&self, cols: &[usize]) -> BitMatrix {
        let mut out = BitMatrix::zeros(self.rows.len(), cols.len());
        for (i, row) in self.rows.iter().enumerate() {
            for (jj, &j) in cols.iter().enumerate() {
                if row.get(j) {
                    out.set(i, jj, true);
                }
            }
        }
        out
    }

    /// The submatrix keeping rows `lo..hi`.
    pub fn row_range(&self, lo: usize, hi: usize) -> BitMatrix {
        BitMatrix { rows: self.rows[lo..hi].to_vec(), cols: self.cols }
    }
}

/// A linear system `Mx = v` over GF(2).
#[derive(Clone, Debug)]
pub struct AffineSystem {
    pub matrix: BitMatrix,
    pub rhs: BitString,
}

impl AffineSystem {
    pub fn new(matrix: BitMatrix, rhs: BitString) -> Self {
        debug_assert_eq!(matrix.nrows(), rhs.len());
        AffineSystem { matrix, rhs }
    }
}

/// The solution set of an affine system, as `particular + span(nullspace_basis)`.
///
/// `nullspace_basis[j]` corresponds to the j-th free column in ascending
/// column order; it has a 1 in that column and zeros in all other free
/// columns, which makes enumeration order well defined.
#[derive(Clone, Debug)]
pub struct SolutionSpace {
    pub consistent: bool,
    pub particular: Option<BitString>,
    pub nullspace_basis: Vec<BitString>,
}

impl SolutionSpace {
    pub fn inconsistent() -> Self {
        SolutionSpace { consistent: false, particular: None, nullspace_basis: Vec::new() }
    }

    /// Dimension of the solution set (number of free variables).
    pub fn dim(&self) -> usize {
        self.nullspace_basis.len()
    }

    /// Number of solutions, if it fits in u64.
    pub fn count(&self) -> Option<u64> {
        if !self.consistent {
            return Some(0);
        }
        if self.dim() >= 64 {
            None
        } else {
            Some(1u64 << self.dim())
        }
    }
}

/// Solves `Mx = v` by Gaussian elimination.
///
/// Inconsistent systems are reported via `consistent = false`, not an error.
/// When consistent, the basis has `ncols - rank` elements.
pub fn gaussian_solve(sys: &AffineSystem) -> SolutionSpace {
    let m = &sys.matrix;
    let cols = m.ncols();
    // Work rows carry their RHS bit alongside.
    let mut work: Vec<(BitString, bool)> =
        m.rows().iter().cloned().zip((0..m.nrows()).map(|i| sys.rhs.get(i))).collect();

    let mut pivot_of_col: Vec<Option<usize>> = vec![None; cols]; // col -> work row index
    let mut next_row = 0usize;
    for col in 0..cols {
        let Some(pr) = (next_row..work.len()).find(|&r| work[r].0.get(col)) else {
            continue;
        };
        work.swap(next_row, pr);
        let (pivot_row, rest) = {
            let (head, tail) = work.split_at_mut(next_row + 1);
            (&head[next_row], tail)
        };
        for (row, rhs) in rest.iter_mut() {
            if row.get(col) {
                row.xor_assign(&pivot_row.0);
                *rhs ^= pivot_row.1;
            }
        }
        pivot_of_col[col] = Some(next_row);
        next_row += 1;
        if next_row == work.len() {
            break;
        }
    }
    // Any residual all-zero row with RHS 1 is a contradiction.
    for (row, rhs) in &work[next_row..] {
        debug_assert!(row.is_zero());
        if *rhs {
            return SolutionSpace::inconsistent();
        }
    }

    let free_cols: Vec<usize> = (0..cols).filter(|&c| pivot_of_col[c].is_none()).collect();

    // Back-substitution for a given assignment of the free variables.
    let solve_with = |free_vals: &dyn Fn(usize) -> bool| -> BitString {
        let mut x = BitString::zeros(cols);
        for (slot, &c) in free_cols.iter().enumerate() {
            if free_vals(slot) {
                x.set(c, true);
            }
        }
        for col in (0..cols).rev() {
            if let Some(r) = pivot_of_col[col] {
                let (row, rhs) = &work[r];
                // Pivot bit = rhs + sum of already-fixed columns right of it.
                let mut acc = *rhs;
                for j in col + 1..cols {
                    if row.get(j) && x.get(j) {
                        acc = !acc;
                    }
                }
                x.set(col, acc);
            }
        }
        x
    };

    let particular = solve_with(&|_| false);
    let basis: Vec<BitString> = (0..free_cols.len())
        .map(|j| {
            let mut v = solve_with(&move |slot| slot == j);
            v.xor_assign(&particular);
            v
        })
        .collect();

    SolutionSpace { consistent: true, particular: Some(particular), nullspace_basis: basis }
}

/// Enumerates up to `limit` solutions of a consistent space.
///
/// Order is lexicographic over the free-variable assignment, free columns
/// taken in ascending column order with the first free column most
/// significant. An inconsistent space yields an empty list.
pub fn enumerate_solutions(space: &SolutionSpace, limit: u64) -> Vec<BitString> {
    let Some(particular) = &space.particular else {
        return Vec::new();
    };
    let dim = space.dim();
    let total = if dim >= 64 { u64::MAX } else { 1u64 << dim };
    let take = limit.min(total);
    let mut out = Vec::with_capacity(take as usize);
    let mut current = particular.clone();
    let mut prev = 0u64;
    for q in 0..take {
        // Incremental update: flip the basis vectors whose assignment bit changed.
        let diff = prev ^ q;
        for j in 0..dim {
            if (diff >> (dim - 1 - j)) & 1 == 1 {
                current.xor_assign(&space.nullspace_basis[j]);
            }
        }
        prev = q;
        out.push(current.clone());
    }
    out
}
