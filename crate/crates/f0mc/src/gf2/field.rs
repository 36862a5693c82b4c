use super::bits::BitString;
use crate::error::{Error, Result};

/// Low coefficients `g` of the compiled-in modulus `x^n + g` for GF(2^n),
/// indexed by `n - 1`. Each entry is the lexicographically least `g` (as an
/// integer) making `x^n + g` irreducible over GF(2); a unit test re-derives
/// the table with an independent irreducibility check.
const LEAST_IRREDUCIBLE_LOW: [u64; 64] = [
    0x1, 0x3, 0x3, 0x3, 0x5, 0x3, 0x3, 0x1b, 0x3, 0x9, 0x5, 0x9, 0x1b, 0x21, 0x3, 0x2b, 0x9, 0x9,
    0x27, 0x9, 0x5, 0x3, 0x21, 0x1b, 0x9, 0x1b, 0x27, 0x3, 0x5, 0x3, 0x9, 0x8d, 0x4b, 0x1b, 0x5,
    0x35, 0x3f, 0x63, 0x11, 0x39, 0x9, 0x27, 0x59, 0x21, 0x1b, 0x3, 0x21, 0x2d, 0x71, 0x1d, 0x4b,
    0x9, 0x47, 0x7d, 0x47, 0x95, 0x11, 0x63, 0x7b, 0x3, 0x27, 0x69, 0x3, 0x1b,
];

/// The compiled-in modulus for GF(2^n), as a GF(2)[x] polynomial with bit i
/// holding the coefficient of x^i.
pub fn field_modulus(n: usize) -> Result<u128> {
    if n == 0 || n > 64 {
        return Err(Error::UnsupportedFieldDegree { n });
    }
    Ok((1u128 << n) | LEAST_IRREDUCIBLE_LOW[n - 1] as u128)
}

/// An element of GF(2^n) under the compiled-in modulus for its degree.
///
/// The value is the coefficient vector of a polynomial of degree < n, packed
/// with bit i = coefficient of x^i. Converting to a `BitString` of length n
/// uses the numeric interpretation, so the MSB of the string is the x^{n-1}
/// coefficient.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Gf2nElement {
    n: u32,
    value: u64,
}

#[inline]
fn poly_deg(a: u128) -> i32 {
    127 - a.leading_zeros() as i32
}

fn poly_mod(mut a: u128, f: u128) -> u128 {
    let df = poly_deg(f);
    while a != 0 && poly_deg(a) >= df {
        a ^= f << (poly_deg(a) - df);
    }
    a
}

/// Carryless product of two polynomials of degree < 64.
fn clmul(a: u64, b: u64) -> u128 {
    let mut r = 0u128;
    let wide = a as u128;
    let mut b = b;
    while b != 0 {
        let i = b.trailing_zeros();
        r ^= wide << i;
        b &= b - 1;
    }
    r
}

impl Gf2nElement {
    pub fn new(n: usize, value: u64) -> Result<Self> {
        field_modulus(n)?;
        if n < 64 && value >> n != 0 {
            return Err(Error::InvalidParams {
                msg: format!("field value 0x{value:x} has degree >= {n}"),
            });
        }
        Ok(Gf2nElement { n: n as u32, value })
    }

    pub fn zero(n: usize) -> Result<Self> {
        Self::new(n, 0)
    }

    pub fn one(n: usize) -> Result<Self> {
        Self::new(n, 1)
    }

    pub fn from_bitstring(bits: &BitString) -> Result<Self> {
        let value = bits.to_u64().ok_or(Error::UnsupportedFieldDegree { n: bits.len() })?;
        Self::new(bits.len(), value)
    }

    pub fn to_bitstring(self) -> BitString {
        BitString::from_u64(self.value, self.n as usize).expect("value fits by invariant")
    }

    pub fn degree(self) -> usize {
        self.n as usize
    }

    pub fn value(self) -> u64 {
        self.value
    }

    pub fn is_zero(self) -> bool {
        self.value == 0
    }

    pub fn modulus(self) -> u128 {
        field_modulus(self.n as usize).expect("validated at construction")
    }

    fn check_same(self, other: Self) -> Result<()> {
        if self.n != other.n {
            return Err(Error::ModulusMismatch { left: self.modulus(), right: other.modulus() });
        }
        Ok(())
    }

    pub fn add(self, other: Self) -> Result<Self> {
        self.check_same(other)?;
        Ok(Gf2nElement { n: self.n, value: self.value ^ other.value })
    }

    pub fn mul(self, other: Self) -> Result<Self> {
        self.check_same(other)?;
        let reduced = poly_mod(clmul(self.value, other.value), self.modulus());
        Ok(Gf2nElement { n: self.n, value: reduced as u64 })
    }

    pub fn pow(self, mut e: u64) -> Self {
        let mut base = self;
        let mut acc = Gf2nElement { n: self.n, value: 1 };
        while e != 0 {
            if e & 1 == 1 {
                acc = acc.mul(base).expect("same field");
            }
            base = base.mul(base).expect("same field");
            e >>= 1;
        }
        acc
    }

    /// Multiplicative inverse via the extended Euclidean algorithm on
    /// GF(2)[x]; undefined (error) for zero.
    pub fn inverse(self) -> Result<Self> {
        if self.value == 0 {
            return Err(Error::InvalidParams { msg: "zero has no inverse".into() });
        }
        let modulus = self.modulus();
        let (mut r0, mut r1) = (modulus, self.value as u128);
        let (mut s0, mut s1) = (0u128, 1u128);
        while r1 != 0 {
            let mut r = r0;
            let mut q_times_s1 = 0u128;
            let d1 = poly_deg(r1);
            while r != 0 && poly_deg(r) >= d1 {
                let shift = poly_deg(r) - d1;
                r ^= r1 << shift;
                q_times_s1 ^= s1 << shift;
            }
            (r0, r1) = (r1, r);
            (s0, s1) = (s1, s0 ^ q_times_s1);
        }
        debug_assert_eq!(r0, 1, "modulus is irreducible so gcd must be 1");
        let inv = poly_mod(s0, modulus) as u64;
        Ok(Gf2nElement { n: self.n, value: inv })
    }
}

/// Horner evaluation of `sum coeffs[i] * x^i` in GF(2^n).
///
/// `coeffs[0]` is the constant term. All elements must live in the same
/// field; a degree mismatch is an error.
pub fn gf2n_poly_eval(coeffs: &[Gf2nElement], x: Gf2nElement) -> Result<Gf2nElement> {
    let mut acc = Gf2nElement::zero(x.degree())?;
    for c in coeffs.iter().rev() {
        acc = acc.mul(x)?.add(*c)?;
    }
    Ok(acc)
}

/// Rabin irreducibility test for a monic polynomial of degree n over GF(2).
/// Used by tests to validate the compiled-in modulus table.
#[doc(hidden)]
pub fn is_irreducible(f: u128, n: u32) -> bool {
    fn pmulmod(a: u128, b: u128, f: u128) -> u128 {
        let mut a = poly_mod(a, f);
        let mut b = poly_mod(b, f);
        let df = poly_deg(f);
        let mut r = 0u128;
        while b != 0 {
            if b & 1 == 1 {
                r ^= a;
            }
            b >>= 1;
            a <<= 1;
            if (a >> df) & 1 == 1 {
                a ^= f;
            }
        }
        r
    }
    fn pgcd(mut a: u128, mut b: u128) -> u128 {
        while b != 0 {
            let t = poly_mod(a, b);
            a = b;
            b = t;
        }
        a
    }
    let x = poly_mod(2, f);
    let mut h = x;
    for _ in 0..n {
        h = pmulmod(h, h, f);
    }
    if h != x {
        return false;
    }
    let mut rem = n;
    let mut primes = Vec::new();
    let mut d = 2;
    while d * d <= rem {
        if rem % d == 0 {
            primes.push(d);
            while rem % d == 0 {
                rem /= d;
            }
        }
        d += 1;
    }
    if rem > 1 {
        primes.push(rem);
    }
    for q in primes {
        let mut h = x;
        for _ in 0..(n / q) {
            h = pmulmod(h, h, f);
        }
        if pgcd(h ^ x, f) != 1 {
            return false;
        }
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn modulus_table_is_least_irreducible() {
        for n in 1u32..=64 {
            let g = LEAST_IRREDUCIBLE_LOW[n as usize - 1];
            let f = (1u128 << n) | g as u128;
            assert!(is_irreducible(f, n), "table entry for n={n} is reducible");
            let mut smaller = 1u64;
            while smaller < g {
                assert!(
                    !is_irreducible((1u128 << n) | smaller as u128, n),
                    "n={n}: 0x{smaller:x} < 0x{g:x} is also irreducible"
                );
                smaller += 2;
            }
        }
    }

    #[test]
    fn field_axioms_sampled() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for &n in &[1usize, 5, 8, 16, 33, 64] {
            let mask = if n == 64 { u64::MAX } else { (1u64 << n) - 1 };
            let sample = |rng: &mut ChaCha8Rng| Gf2nElement::new(n, rng.random::<u64>() & mask).unwrap();
            for _ in 0..50 {
                let (a, b, c) = (sample(&mut rng), sample(&mut rng), sample(&mut rng));
                assert_eq!(a.mul(b.mul(c).unwrap()).unwrap(), a.mul(b).unwrap().mul(c).unwrap());
                assert_eq!(
                    a.mul(b.add(c).unwrap()).unwrap(),
                    a.mul(b).unwrap().add(a.mul(c).unwrap()).unwrap()
                );
                assert_eq!(a.add(a).unwrap(), Gf2nElement::zero(n).unwrap());
                if !a.is_zero() {
                    assert_eq!(a.mul(a.inverse().unwrap()).unwrap(), Gf2nElement::one(n).unwrap());
                }
            }
        }
    }

    #[test]
    fn mixed_fields_error() {
        let a = Gf2nElement::new(8, 3).unwrap();
        let b = Gf2nElement::new(9, 3).unwrap();
        assert!(a.mul(b).is_err());
        assert!(gf2n_poly_eval(&[a, b], a).is_err());
    }

    #[test]
    fn poly_eval_degenerate() {
        let c0 = Gf2nElement::new(8, 0x5d).unwrap();
        let x = Gf2nElement::new(8, 0xa7).unwrap();
        assert_eq!(gf2n_poly_eval(&[c0], x).unwrap(), c0);
        let ident = [Gf2nElement::zero(8).unwrap(), Gf2nElement::one(8).unwrap()];
        assert_eq!(gf2n_poly_eval(&ident, x).unwrap(), x);
        assert_eq!(gf2n_poly_eval(&[], x).unwrap(), Gf2nElement::zero(8).unwrap());
    }

    /// Log/antilog-table oracle for GF(256): builds exp/log tables from a
    /// generator by repeated schoolbook multiplication, then checks Horner
    /// evaluation of random degree-3 polynomials against table arithmetic.
    #[test]
    fn gf256_table_oracle() {
        let modulus = field_modulus(8).unwrap() as u64; // 0x11b
        let mul_slow = |a: u64, b: u64| -> u64 {
            let mut r = 0u64;
            let mut a = a;
            for i in 0..8 {
                if (b >> i) & 1 == 1 {
                    r ^= a << i;
                }
            }
            let _ = a;
            for i in (8..16).rev() {
                if (r >> i) & 1 == 1 {
                    r ^= modulus << (i - 8);
                }
            }
            r
        };
        // x (=0b10) generates the multiplicative group for 0x11b? Not in
        // general; use 0x03 which is a known generator for this modulus.
        let gen = 0x03u64;
        let mut exp = [0u64; 255];
        let mut log = [0usize; 256];
        let mut acc = 1u64;
        for (i, e) in exp.iter_mut().enumerate() {
            *e = acc;
            log[acc as usize] = i;
            acc = mul_slow(acc, gen);
        }
        assert_eq!(acc, 1, "0x03 must have order 255");
        let table_mul = |a: u64, b: u64| -> u64 {
            if a == 0 || b == 0 {
                0
            } else {
                exp[(log[a as usize] + log[b as usize]) % 255]
            }
        };

        let mut rng = ChaCha8Rng::seed_from_u64(23);
        for _ in 0..20 {
            let coeffs: Vec<Gf2nElement> =
                (0..4).map(|_| Gf2nElement::new(8, rng.random::<u64>() & 0xff).unwrap()).collect();
            let x = Gf2nElement::new(8, rng.random::<u64>() & 0xff).unwrap();
            let got = gf2n_poly_eval(&coeffs, x).unwrap().value();
            let mut expect = 0u64;
            let mut xpow = 1u64;
            for c in &coeffs {
                expect ^= table_mul(c.value(), xpow);
                xpow = table_mul(xpow, x.value());
            }
            assert_eq!(got, expect);
        }
    }
}
