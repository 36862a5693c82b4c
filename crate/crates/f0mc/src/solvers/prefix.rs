//! Incremental prefix search over the image of an affine map.
//!
//! Everything here reasons about sets of the form
//! `C = {R x + o : x in {0,1}^c, B x = v}` — the image of a (possibly
//! constrained) affine map — and walks `C` in ascending order without
//! materializing it. Forcing an output prefix is a linear-system
//! consistency check; the row echelon is kept incrementally with an undo
//! journal, so stepping from one image element to the next costs a handful
//! of single-row reductions rather than fresh eliminations.
//!
//! Rows are packed into `u128`, which caps the domain at 128 free
//! variables; every desk-scale path (hash inputs up to 64 bits, range
//! encodings up to n*d = 128) fits.

use crate::error::{Error, Result};
use crate::gf2::{BitMatrix, BitString};

enum AddOutcome {
    Consistent,
    Inconsistent,
}

/// Row-echelon accumulator with undo. New rows are reduced against existing
/// pivots only (no back-elimination), so rollback just forgets pivots.
struct Echelon {
    pivots: Vec<Option<(u128, bool)>>,
    journal: Vec<Option<usize>>,
}

impl Echelon {
    fn new(cols: usize) -> Self {
        Echelon { pivots: vec![None; cols], journal: Vec::new() }
    }

    /// Adds `row . x = rhs`. On inconsistency the state is unchanged and
    /// nothing is journaled.
    fn add(&mut self, mut row: u128, mut rhs: bool) -> AddOutcome {
        loop {
            if row == 0 {
                if rhs {
                    return AddOutcome::Inconsistent;
                }
                self.journal.push(None);
                return AddOutcome::Consistent;
            }
            let lead = 127 - row.leading_zeros() as usize;
            match &self.pivots[lead] {
                Some((prow, prhs)) => {
                    row ^= prow;
                    rhs ^= prhs;
                }
                None => {
                    self.pivots[lead] = Some((row, rhs));
                    self.journal.push(Some(lead));
                    return AddOutcome::Consistent;
                }
            }
        }
    }

    fn mark(&self) -> usize {
        self.journal.len()
    }

    fn rollback_to(&mut self, mark: usize) {
        while self.journal.len() > mark {
            if let Some(col) = self.journal.pop().unwrap() {
                self.pivots[col] = None;
            }
        }
    }
}

fn pack_row(row: &BitString) -> u128 {
    let mut v = 0u128;
    for i in 0..row.len() {
        if row.get(i) {
            v |= 1u128 << (row.len() - 1 - i);
        }
    }
    v
}

/// Ascending walk over `C = {rows * x + offset : x, base constraints hold}`.
///
/// `first()` yields the lexicographic minimum; each `next()` yields the
/// successor of the last value returned. The echelon state carries the full
/// prefix of the current value between steps, so a step only pops the tail
/// it changes.
pub(crate) struct ImageSearcher {
    rows: Vec<u128>,
    offset: Vec<bool>,
    ech: Echelon,
    /// marks[l] = journal mark with output bits 0..l forced to `cur`'s.
    marks: Vec<usize>,
    cur: Option<BitString>,
    started: bool,
}

impl ImageSearcher {
    /// `Ok(None)` when the base constraints are inconsistent (empty image);
    /// an error when the domain exceeds 128 variables.
    pub fn new(
        image: &BitMatrix,
        offset: &BitString,
        base: impl IntoIterator<Item = (BitString, bool)>,
    ) -> Result<Option<Self>> {
        if image.ncols() > 128 {
            return Err(Error::InvalidParams {
                msg: format!(
                    "prefix search supports at most 128 free variables, got {}",
                    image.ncols()
                ),
            });
        }
        let mut ech = Echelon::new(image.ncols().max(1));
        for (row, rhs) in base {
            if matches!(ech.add(pack_row(&row), rhs), AddOutcome::Inconsistent) {
                return Ok(None);
            }
        }
        let m = image.nrows();
        let mut marks = Vec::with_capacity(m + 1);
        marks.push(ech.mark());
        Ok(Some(ImageSearcher {
            rows: image.rows().iter().map(pack_row).collect(),
            offset: (0..offset.len()).map(|i| offset.get(i)).collect(),
            ech,
            marks,
            cur: None,
            started: false,
        }))
    }

    fn width(&self) -> usize {
        self.rows.len()
    }

    /// Tries to force output bit `l` to `bit`; on success the constraint is
    /// journaled and marks[l+1] recorded.
    fn force(&mut self, l: usize, bit: bool) -> bool {
        let rhs = bit ^ self.offset[l];
        match self.ech.add(self.rows[l], rhs) {
            AddOutcome::Consistent => {
                self.marks.truncate(l + 1);
                self.marks.push(self.ech.mark());
                true
            }
            AddOutcome::Inconsistent => false,
        }
    }

    /// Forces output bit `l` to its smallest feasible value in one reduction
    /// pass: if the row is dependent the bit is determined, otherwise 0 is
    /// feasible and the reduced row becomes a pivot. Returns the bit.
    fn force_min(&mut self, l: usize) -> bool {
        let mut row = self.rows[l];
        let mut acc = false;
        let bit = loop {
            if row == 0 {
                break acc ^ self.offset[l]; // determined value
            }
            let lead = 127 - row.leading_zeros() as usize;
            match &self.ech.pivots[lead] {
                Some((prow, prhs)) => {
                    row ^= prow;
                    acc ^= prhs;
                }
                None => {
                    // Free: pick 0, i.e. row . x = offset[l].
                    self.ech.pivots[lead] = Some((row, acc ^ self.offset[l]));
                    self.ech.journal.push(Some(lead));
                    self.marks.truncate(l + 1);
                    self.marks.push(self.ech.mark());
                    return false;
                }
            }
        };
        self.ech.journal.push(None); // redundant constraint
        self.marks.truncate(l + 1);
        self.marks.push(self.ech.mark());
        bit
    }

    /// Greedily extends the forced prefix `0..from` to the smallest
    /// completion, writing bits into `out`.
    fn extend_min(&mut self, from: usize, out: &mut BitString) {
        for l in from..self.width() {
            if self.force_min(l) {
                out.set(l, true);
            }
        }
    }

    /// The smallest image element; `None` on an exhausted or restarted walk.
    fn first(&mut self) -> Option<BitString> {
        debug_assert!(!self.started);
        self.started = true;
        let mut out = BitString::zeros(self.width());
        self.extend_min(0, &mut out);
        self.cur = Some(out.clone());
        Some(out)
    }

    /// The next image element in ascending order.
    #[allow(clippy::should_implement_trait)]
    pub fn next(&mut self) -> Option<BitString> {
        if !self.started {
            return self.first();
        }
        let y = self.cur.take()?;
        let m = self.width();
        for r in (0..m).rev() {
            self.ech.rollback_to(self.marks[r]);
            self.marks.truncate(r + 1);
            if y.get(r) {
                continue;
            }
            if self.force(r, true) {
                let mut out = BitString::zeros(m);
                for i in 0..r {
                    if y.get(i) {
                        out.set(i, true);
                    }
                }
                out.set(r, true);
                self.extend_min(r + 1, &mut out);
                self.cur = Some(out.clone());
                return Some(out);
            }
        }
        None // y was the maximum; cur stays None
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gf2::BitMatrix;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::collections::BTreeSet;

    fn brute_image(
        image: &BitMatrix,
        offset: &BitString,
        base: &[(BitString, bool)],
    ) -> BTreeSet<BitString> {
        let c = image.ncols();
        let mut out = BTreeSet::new();
        for v in 0u64..1 << c {
            let x = BitString::from_u64(v, c).unwrap();
            if base.iter().all(|(row, rhs)| row.and_parity(&x) == *rhs) {
                let mut y = image.mul_vec(&x);
                y.xor_assign(offset);
                out.insert(y);
            }
        }
        out
    }

    #[test]
    fn walks_entire_image_in_order() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        for _ in 0..30 {
            let c = 5;
            let m = 7;
            let image = BitMatrix::random(&mut rng, m, c);
            let offset = BitString::random(&mut rng, m);
            let base = vec![(BitString::random(&mut rng, c), false)];
            let expect = brute_image(&image, &offset, &base);
            let Some(mut searcher) = ImageSearcher::new(&image, &offset, base.clone()).unwrap()
            else {
                assert!(expect.is_empty());
                continue;
            };
            let mut walked = Vec::new();
            let mut prev: Option<BitString> = None;
            while let Some(v) = searcher.next() {
                if let Some(p) = &prev {
                    assert!(v > *p);
                }
                prev = Some(v.clone());
                walked.push(v);
            }
            let expect_vec: Vec<BitString> = expect.into_iter().collect();
            assert_eq!(walked, expect_vec);
        }
    }

    #[test]
    fn zero_width_image() {
        let image = BitMatrix::zeros(0, 3);
        let offset = BitString::zeros(0);
        let mut s = ImageSearcher::new(&image, &offset, []).unwrap().unwrap();
        assert_eq!(s.next().unwrap().len(), 0);
        assert!(s.next().is_none());
    }

    #[test]
    fn inconsistent_base_is_empty() {
        let image = BitMatrix::identity(3);
        let offset = BitString::zeros(3);
        let base = vec![
            (BitString::from_u64(0b100, 3).unwrap(), false),
            (BitString::from_u64(0b100, 3).unwrap(), true),
        ];
        assert!(ImageSearcher::new(&image, &offset, base).unwrap().is_none());
    }

    #[test]
    fn wide_domains_are_rejected() {
        let image = BitMatrix::zeros(1, 129);
        let offset = BitString::zeros(1);
        assert!(ImageSearcher::new(&image, &offset, []).is_err());
    }
}
