//! The three hash-function families behind every estimator: Toeplitz-affine
//! and fully-random-affine maps `h(x) = Ax + b` over GF(2), and degree-s
//! polynomials over GF(2^n). Sampling is driven by an explicitly seeded
//! ChaCha8 generator (a counter-mode stream construction, `rand_chacha` 0.9),
//! so every draw is reproducible from `(seed, parameters)` alone.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::gf2::{gf2n_poly_eval, BitMatrix, BitString, Gf2nElement};

/// Family tag, as used in collection metadata and serialized forms.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum HashFamily {
    /// `h(x) = Ax + b` with A a random Toeplitz matrix: Θ(n + m) bits.
    Toeplitz,
    /// `h(x) = Ax + b` with A fully random: Θ(nm) bits.
    Xor,
    /// Degree-s polynomial over GF(2^n); (s+1)-wise independent.
    PolyWise,
}

impl HashFamily {
    pub fn name(self) -> &'static str {
        match self {
            HashFamily::Toeplitz => "toeplitz",
            HashFamily::Xor => "xor",
            HashFamily::PolyWise => "poly",
        }
    }
}

/// Affine hash from the Toeplitz family. The matrix is determined by the
/// m+n-1 diagonal bits: `A[i][j] = diag[i - j + n - 1]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ToeplitzHash {
    n: usize,
    m: usize,
    diag: BitString,
    offset: BitString,
    rows: BitMatrix,
}

impl ToeplitzHash {
    pub fn from_parts(n: usize, m: usize, diag: BitString, offset: BitString) -> Result<Self> {
        if diag.len() != (m + n).saturating_sub(1) && !(m == 0 && n == 0) {
            return Err(Error::InvalidParams {
                msg: format!("Toeplitz diagonal needs {} bits, got {}", m + n - 1, diag.len()),
            });
        }
        if offset.len() != m {
            return Err(Error::WidthMismatch { expected: m, got: offset.len() });
        }
        let mut rows = BitMatrix::zeros(m, n);
        for i in 0..m {
            for j in 0..n {
                if diag.get(i + n - 1 - j) {
                    rows.set(i, j, true);
                }
            }
        }
        Ok(ToeplitzHash { n, m, diag, offset, rows })
    }

    fn sample(rng: &mut impl RngCore, n: usize, m: usize) -> Self {
        let diag = BitString::random(rng, m + n - 1);
        let offset = BitString::random(rng, m);
        Self::from_parts(n, m, diag, offset).expect("sampled widths are consistent")
    }

    pub fn diag(&self) -> &BitString {
        &self.diag
    }
}

/// Affine hash with a fully random matrix.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct XorHash {
    n: usize,
    m: usize,
    matrix: BitMatrix,
    offset: BitString,
}

impl XorHash {
    pub fn from_parts(matrix: BitMatrix, offset: BitString) -> Result<Self> {
        if matrix.nrows() != offset.len() {
            return Err(Error::WidthMismatch { expected: matrix.nrows(), got: offset.len() });
        }
        Ok(XorHash { n: matrix.ncols(), m: matrix.nrows(), matrix, offset })
    }

    fn sample(rng: &mut impl RngCore, n: usize, m: usize) -> Self {
        let matrix = BitMatrix::random(rng, m, n);
        let offset = BitString::random(rng, m);
        XorHash { n, m, matrix, offset }
    }
}

/// Degree-s polynomial over GF(2^n), mapping `{0,1}^n -> {0,1}^n` through the
/// numeric identification of strings with field elements.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PolyHash {
    n: usize,
    s: usize,
    coeffs: Vec<Gf2nElement>,
}

impl PolyHash {
    pub fn from_coeffs(n: usize, coeffs: Vec<Gf2nElement>) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(Error::InvalidParams { msg: "polynomial needs at least one coefficient".into() });
        }
        for c in &coeffs {
            if c.degree() != n {
                return Err(Error::ModulusMismatch {
                    left: crate::gf2::field_modulus(n)?,
                    right: c.modulus(),
                });
            }
        }
        Ok(PolyHash { n, s: coeffs.len() - 1, coeffs })
    }

    fn sample(rng: &mut impl RngCore, n: usize, s: usize) -> Result<Self> {
        let mask = if n == 64 { u64::MAX } else { (1u64 << n) - 1 };
        let coeffs = (0..=s)
            .map(|_| Gf2nElement::new(n, rng.next_u64() & mask))
            .collect::<Result<Vec<_>>>()?;
        Ok(PolyHash { n, s, coeffs })
    }

    pub fn independence_degree(&self) -> usize {
        self.s
    }

    /// Horner evaluation on the numeric value of an n-bit input, avoiding
    /// the bit-string round trip. The hot path for trailing-zero probes.
    pub fn eval_u64(&self, x: u64) -> Result<u64> {
        let xe = Gf2nElement::new(self.n, x)?;
        Ok(gf2n_poly_eval(&self.coeffs, xe)?.value())
    }
}

/// A member of any of the three families.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum HashFn {
    Toeplitz(ToeplitzHash),
    Xor(XorHash),
    Poly(PolyHash),
}

impl HashFn {
    pub fn family(&self) -> HashFamily {
        match self {
            HashFn::Toeplitz(_) => HashFamily::Toeplitz,
            HashFn::Xor(_) => HashFamily::Xor,
            HashFn::Poly(_) => HashFamily::PolyWise,
        }
    }

    pub fn input_width(&self) -> usize {
        match self {
            HashFn::Toeplitz(h) => h.n,
            HashFn::Xor(h) => h.n,
            HashFn::Poly(h) => h.n,
        }
    }

    pub fn output_width(&self) -> usize {
        match self {
            HashFn::Toeplitz(h) => h.m,
            HashFn::Xor(h) => h.m,
            HashFn::Poly(h) => h.n,
        }
    }

    /// Applies the hash to an input of the declared width.
    pub fn eval(&self, x: &BitString) -> Result<BitString> {
        if x.len() != self.input_width() {
            return Err(Error::WidthMismatch { expected: self.input_width(), got: x.len() });
        }
        Ok(match self {
            HashFn::Toeplitz(h) => {
                let mut y = h.rows.mul_vec(x);
                y.xor_assign(&h.offset);
                y
            }
            HashFn::Xor(h) => {
                let mut y = h.matrix.mul_vec(x);
                y.xor_assign(&h.offset);
                y
            }
            HashFn::Poly(h) => {
                let xe = Gf2nElement::from_bitstring(x)?;
                gf2n_poly_eval(&h.coeffs, xe)?.to_bitstring()
            }
        })
    }

    /// The hash keeping only the first `m` output bits. For affine families
    /// this is the submatrix of the first `m` rows (Toeplitz stays Toeplitz);
    /// slicing a polynomial hash is not defined and errors.
    pub fn prefix_slice(&self, m: usize) -> Result<HashFn> {
        if m > self.output_width() {
            return Err(Error::SliceTooWide { requested: m, available: self.output_width() });
        }
        match self {
            HashFn::Toeplitz(h) => {
                let diag = h.diag.prefix(m + h.n - 1);
                let offset = h.offset.prefix(m);
                Ok(HashFn::Toeplitz(ToeplitzHash::from_parts(h.n, m, diag, offset)?))
            }
            HashFn::Xor(h) => {
                let matrix = h.matrix.row_range(0, m);
                let offset = h.offset.prefix(m);
                Ok(HashFn::Xor(XorHash::from_parts(matrix, offset)?))
            }
            HashFn::Poly(_) => Err(Error::UnsupportedSlice { family: "poly" }),
        }
    }

    /// The hash keeping only the last `m` output bits, so that
    /// `sliced(x) = 0^m` iff `trail_zero(self(x)) >= m`.
    pub(crate) fn suffix_slice(&self, m: usize) -> Result<HashFn> {
        if m > self.output_width() {
            return Err(Error::SliceTooWide { requested: m, available: self.output_width() });
        }
        match self {
            HashFn::Toeplitz(h) => {
                let diag = h.diag.suffix(m + h.n - 1);
                let offset = h.offset.suffix(m);
                Ok(HashFn::Toeplitz(ToeplitzHash::from_parts(h.n, m, diag, offset)?))
            }
            HashFn::Xor(h) => {
                let matrix = h.matrix.row_range(h.m - m, h.m);
                let offset = h.offset.suffix(m);
                Ok(HashFn::Xor(XorHash::from_parts(matrix, offset)?))
            }
            HashFn::Poly(_) => Err(Error::UnsupportedSlice { family: "poly" }),
        }
    }

    /// Matrix/offset view for the affine families; `None` for polynomials.
    pub fn affine_parts(&self) -> Option<(&BitMatrix, &BitString)> {
        match self {
            HashFn::Toeplitz(h) => Some((&h.rows, &h.offset)),
            HashFn::Xor(h) => Some((&h.matrix, &h.offset)),
            HashFn::Poly(_) => None,
        }
    }

    pub fn as_poly(&self) -> Option<&PolyHash> {
        match self {
            HashFn::Poly(h) => Some(h),
            _ => None,
        }
    }

    /// Exact size of the function's parameters in bits: the payload the
    /// distributed ledger charges for a hash-function message.
    pub fn param_bits(&self) -> u64 {
        match self {
            HashFn::Toeplitz(h) => (h.m + h.n - 1 + h.m) as u64,
            HashFn::Xor(h) => (h.m * h.n + h.m) as u64,
            HashFn::Poly(h) => ((h.s + 1) * h.n) as u64,
        }
    }

    /// Hex textual form: family tag, widths, parameter bits MSB-first.
    pub fn serialize(&self) -> String {
        match self {
            HashFn::Toeplitz(h) => format!(
                "toeplitz {} {} {} {}",
                h.n,
                h.m,
                h.diag.to_hex_string(),
                h.offset.to_hex_string()
            ),
            HashFn::Xor(h) => {
                let rows: Vec<String> =
                    h.matrix.rows().iter().map(|r| r.to_hex_string()).collect();
                format!("xor {} {} {} {}", h.n, h.m, rows.join(";"), h.offset.to_hex_string())
            }
            HashFn::Poly(h) => {
                let cs: Vec<String> =
                    h.coeffs.iter().map(|c| c.to_bitstring().to_hex_string()).collect();
                format!("poly {} {} {}", h.n, h.s, cs.join(","))
            }
        }
    }

    pub fn deserialize(text: &str) -> Result<HashFn> {
        let mut parts = text.split_whitespace();
        let bad = |msg: &str| Error::InvalidParams { msg: format!("hash literal: {msg}") };
        let tag = parts.next().ok_or_else(|| bad("empty"))?;
        let n: usize = parts.next().and_then(|t| t.parse().ok()).ok_or_else(|| bad("missing n"))?;
        let second: usize =
            parts.next().and_then(|t| t.parse().ok()).ok_or_else(|| bad("missing m/s"))?;
        match tag {
            "toeplitz" => {
                let m = second;
                let diag = BitString::parse(parts.next().ok_or_else(|| bad("missing diag"))?, m + n - 1)?;
                let offset = BitString::parse(parts.next().ok_or_else(|| bad("missing offset"))?, m)?;
                Ok(HashFn::Toeplitz(ToeplitzHash::from_parts(n, m, diag, offset)?))
            }
            "xor" => {
                let m = second;
                let rows = parts.next().ok_or_else(|| bad("missing rows"))?;
                let rows: Vec<BitString> =
                    rows.split(';').map(|r| BitString::parse(r, n)).collect::<Result<_>>()?;
                if rows.len() != m {
                    return Err(bad(&format!("expected {m} rows, got {}", rows.len())));
                }
                let offset = BitString::parse(parts.next().ok_or_else(|| bad("missing offset"))?, m)?;
                Ok(HashFn::Xor(XorHash::from_parts(BitMatrix::from_rows(rows), offset)?))
            }
            "poly" => {
                let s = second;
                let cs = parts.next().ok_or_else(|| bad("missing coefficients"))?;
                let coeffs: Vec<Gf2nElement> = cs
                    .split(',')
                    .map(|c| Gf2nElement::from_bitstring(&BitString::parse(c, n)?))
                    .collect::<Result<_>>()?;
                if coeffs.len() != s + 1 {
                    return Err(bad(&format!("expected {} coefficients, got {}", s + 1, coeffs.len())));
                }
                Ok(HashFn::Poly(PolyHash::from_coeffs(n, coeffs)?))
            }
            other => Err(bad(&format!("unknown family '{other}'"))),
        }
    }
}

/// Number of trailing (least-significant) zero bits of a hash output.
/// The all-zero string reports its full width.
pub fn trail_zero(y: &BitString) -> u32 {
    y.trailing_zeros()
}

/// A seeded draw of hash functions sharing (family, n, m), laid out as a
/// `rows x cols` grid (`cols = 1` for the one-dimensional collections).
#[derive(Clone, Debug)]
pub struct HashCollection {
    pub family: HashFamily,
    pub n: usize,
    pub m: usize,
    rows: usize,
    cols: usize,
    entries: Vec<HashFn>,
}

impl HashCollection {
    /// Wraps pre-built functions; all entries must share (family, n, m).
    pub fn from_entries(
        family: HashFamily,
        n: usize,
        m: usize,
        rows: usize,
        cols: usize,
        entries: Vec<HashFn>,
    ) -> Result<Self> {
        if rows * cols != entries.len() {
            return Err(Error::InvalidParams {
                msg: format!("grid {rows}x{cols} does not match {} entries", entries.len()),
            });
        }
        for h in &entries {
            if h.family() != family || h.input_width() != n || h.output_width() != m {
                return Err(Error::InvalidParams {
                    msg: "collection entries must share family and widths".into(),
                });
            }
        }
        Ok(HashCollection { family, n, m, rows, cols, entries })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize) -> &HashFn {
        debug_assert_eq!(self.cols, 1, "use get2 for grid collections");
        &self.entries[i]
    }

    pub fn get2(&self, i: usize, j: usize) -> &HashFn {
        &self.entries[i * self.cols + j]
    }

    pub fn iter(&self) -> impl Iterator<Item = &HashFn> {
        self.entries.iter()
    }
}

fn sample_one(rng: &mut ChaCha8Rng, family: HashFamily, n: usize, m: usize) -> Result<HashFn> {
    if n == 0 || m == 0 {
        return Err(Error::UnsupportedFamily {
            msg: format!("{} with n={n}, m={m}", family.name()),
        });
    }
    Ok(match family {
        HashFamily::Toeplitz => HashFn::Toeplitz(ToeplitzHash::sample(rng, n, m)),
        HashFamily::Xor => HashFn::Xor(XorHash::sample(rng, n, m)),
        HashFamily::PolyWise => unreachable!("poly sampling goes through pick_poly_grid"),
    })
}

/// Draws `count` independent members of an affine family, deterministically
/// from the seed.
pub fn pick_hash_functions(
    family: HashFamily,
    n: usize,
    m: usize,
    count: usize,
    seed: u64,
) -> Result<HashCollection> {
    if count == 0 {
        return Err(Error::InvalidParams { msg: "count must be at least 1".into() });
    }
    if family == HashFamily::PolyWise {
        return Err(Error::UnsupportedFamily {
            msg: "poly collections need an independence degree; use pick_poly_grid".into(),
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let entries = (0..count).map(|_| sample_one(&mut rng, family, n, m)).collect::<Result<_>>()?;
    Ok(HashCollection { family, n, m, rows: count, cols: 1, entries })
}

/// Draws a `rows x cols` grid of degree-`degree` polynomial hashes over
/// GF(2^n), deterministically from the seed.
pub fn pick_poly_grid(
    n: usize,
    degree: usize,
    rows: usize,
    cols: usize,
    seed: u64,
) -> Result<HashCollection> {
    if rows == 0 || cols == 0 {
        return Err(Error::InvalidParams { msg: "grid dimensions must be at least 1".into() });
    }
    crate::gf2::field_modulus(n)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let entries = (0..rows * cols)
        .map(|_| PolyHash::sample(&mut rng, n, degree).map(HashFn::Poly))
        .collect::<Result<_>>()?;
    Ok(HashCollection { family: HashFamily::PolyWise, n, m: n, rows, cols, entries })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::SeedableRng;

    fn bs(v: u64, len: usize) -> BitString {
        BitString::from_u64(v, len).unwrap()
    }

    #[test]
    fn seeded_draws_are_deterministic() {
        let a = pick_hash_functions(HashFamily::Toeplitz, 4, 4, 3, 7).unwrap();
        let b = pick_hash_functions(HashFamily::Toeplitz, 4, 4, 3, 7).unwrap();
        for i in 0..3 {
            assert_eq!(a.get(i), b.get(i));
        }
        let c = pick_hash_functions(HashFamily::Toeplitz, 4, 4, 3, 8).unwrap();
        assert!((0..3).any(|i| a.get(i) != c.get(i)));
    }

    #[test]
    fn widths_for_minimum_strategy() {
        let h = pick_hash_functions(HashFamily::Toeplitz, 8, 24, 1, 1).unwrap();
        let y = h.get(0).eval(&bs(0xa5, 8)).unwrap();
        assert_eq!(y.len(), 24);
    }

    #[test]
    fn constant_and_identity_maps() {
        let beta = bs(0b1011, 4);
        let zero_a = ToeplitzHash::from_parts(4, 4, BitString::zeros(7), beta.clone()).unwrap();
        for v in 0..16u64 {
            assert_eq!(HashFn::Toeplitz(zero_a.clone()).eval(&bs(v, 4)).unwrap(), beta);
        }
        let ident = XorHash::from_parts(BitMatrix::identity(4), BitString::zeros(4)).unwrap();
        assert_eq!(HashFn::Xor(ident).eval(&bs(0b1010, 4)).unwrap(), bs(0b1010, 4));
    }

    #[test]
    fn toeplitz_matches_naive_dot_products() {
        let coll = pick_hash_functions(HashFamily::Toeplitz, 9, 6, 1, 42).unwrap();
        let HashFn::Toeplitz(h) = coll.get(0) else { panic!() };
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
        for _ in 0..50 {
            let x = BitString::random(&mut rng, 9);
            let y = HashFn::Toeplitz(h.clone()).eval(&x).unwrap();
            for i in 0..6 {
                let mut dot = h.offset.get(i);
                for j in 0..9 {
                    // A[i][j] = diag[i - j + n - 1]
                    if h.diag.get(i + 9 - 1 - j) && x.get(j) {
                        dot = !dot;
                    }
                }
                assert_eq!(y.get(i), dot);
            }
        }
    }

    #[test]
    fn prefix_slice_truncates() {
        let coll = pick_hash_functions(HashFamily::Toeplitz, 8, 6, 1, 5).unwrap();
        let h = coll.get(0);
        let h3 = h.prefix_slice(3).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(2);
        for _ in 0..20 {
            let x = BitString::random(&mut rng, 8);
            assert_eq!(h3.eval(&x).unwrap(), h.eval(&x).unwrap().prefix(3));
        }
        // m' = 0: the empty-output hash holds h_0(x) = () for all x.
        let h0 = h.prefix_slice(0).unwrap();
        assert_eq!(h0.eval(&bs(3, 8)).unwrap().len(), 0);
        // m' = m is the hash itself.
        assert_eq!(&h.prefix_slice(6).unwrap(), h);
        assert!(h.prefix_slice(7).is_err());
    }

    #[test]
    fn suffix_slice_tracks_trailing_zeros() {
        let coll = pick_hash_functions(HashFamily::Xor, 8, 10, 1, 5).unwrap();
        let h = coll.get(0);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        for _ in 0..30 {
            let x = BitString::random(&mut rng, 8);
            let y = h.eval(&x).unwrap();
            for m in 0..=10 {
                let sliced = h.suffix_slice(m).unwrap();
                assert_eq!(sliced.eval(&x).unwrap().is_zero(), trail_zero(&y) >= m as u32);
            }
        }
    }

    #[test]
    fn poly_slice_is_an_error() {
        let grid = pick_poly_grid(8, 3, 1, 1, 4).unwrap();
        assert!(matches!(grid.get2(0, 0).prefix_slice(2), Err(Error::UnsupportedSlice { .. })));
    }

    #[test]
    fn trail_zero_conventions() {
        assert_eq!(trail_zero(&bs(0b100, 3)), 2);
        assert_eq!(trail_zero(&bs(0b0001, 4)), 0);
        assert_eq!(trail_zero(&BitString::zeros(4)), 4);
    }

    #[test]
    fn serialization_roundtrip_and_sizes() {
        let t = pick_hash_functions(HashFamily::Toeplitz, 8, 24, 1, 9).unwrap();
        let x = pick_hash_functions(HashFamily::Xor, 8, 24, 1, 9).unwrap();
        let p = pick_poly_grid(12, 3, 1, 1, 9).unwrap();
        for h in [t.get(0), x.get(0), p.get2(0, 0)] {
            let text = h.serialize();
            let back = HashFn::deserialize(&text).unwrap();
            assert_eq!(&back, h);
        }
        // Toeplitz is Theta(n + m) bits vs Theta(nm) for the xor family.
        assert_eq!(t.get(0).param_bits(), (24 + 8 - 1 + 24) as u64);
        assert_eq!(x.get(0).param_bits(), (24 * 8 + 24) as u64);
        assert_eq!(p.get2(0, 0).param_bits(), 4 * 12);
    }

    /// Monte-Carlo check of 2-wise independence for the Toeplitz family:
    /// for fixed x != x', the empirical probability of one particular output
    /// pair over seeded draws stays within 3 sigma of 2^{-2m}.
    #[test]
    fn toeplitz_pairwise_independence_monte_carlo() {
        let (x1, x2) = (bs(0b0011, 4), bs(0b1010, 4));
        let (a1, a2) = (bs(0b0110, 4), bs(0b1100, 4));
        let trials = 100_000u32;
        let mut rng = ChaCha8Rng::seed_from_u64(987);
        let mut hits = 0u32;
        for _ in 0..trials {
            let h = HashFn::Toeplitz(ToeplitzHash::sample(&mut rng, 4, 4));
            if h.eval(&x1).unwrap() == a1 && h.eval(&x2).unwrap() == a2 {
                hits += 1;
            }
        }
        let p = 1.0 / 256.0;
        let sigma = (p * (1.0 - p) / trials as f64).sqrt();
        let observed = hits as f64 / trials as f64;
        assert!(
            (observed - p).abs() <= 3.0 * sigma,
            "observed {observed}, expected {p} +- {}",
            3.0 * sigma
        );
    }

    proptest! {
        #[test]
        fn prefix_slice_composes(m1 in 0usize..=12, m2 in 0usize..=12, seed in 0u64..500) {
            prop_assume!(m2 <= m1);
            let coll = pick_hash_functions(HashFamily::Toeplitz, 6, 12, 1, seed).unwrap();
            let h = coll.get(0);
            let once = h.prefix_slice(m2).unwrap();
            let twice = h.prefix_slice(m1).unwrap().prefix_slice(m2).unwrap();
            prop_assert_eq!(once, twice);
        }
    }
}
