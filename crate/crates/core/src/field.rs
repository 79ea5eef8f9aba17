//! Arithmetic in GF(p^e) for odd primes p.
//!
//! Elements are stored as their coefficient vector over GF(p), packed
//! little-endian into a single integer `c_0 + c_1 p + ... + c_{e-1} p^{e-1}`.
//! Multiplication and inversion go through discrete log tables built once
//! per field from a primitive element, so every operation after
//! construction is O(e) or better.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};

/// Largest field order accepted by [`Field::new`].
pub const MAX_FIELD_ORDER: u64 = 1 << 20;

/// Below this many element pairs an explicit addition table is kept.
const ADD_TABLE_LIMIT: u64 = 1 << 20;

/// An element of a finite field, tagged with the field order `q`.
///
/// The tag lets the checked operations in [`Field::arith`] reject elements
/// that came from a different field. Two fields of the same order are
/// identical, since the modulus choice is deterministic.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FieldElem {
    raw: u32,
    q: u32,
}

impl FieldElem {
    /// The packed coefficient vector, an integer in `[0, q)`.
    #[inline]
    pub fn raw(self) -> u32 {
        self.raw
    }

    /// Order of the field this element belongs to.
    #[inline]
    pub fn field_order(self) -> u32 {
        self.q
    }

    #[inline]
    pub fn is_zero(self) -> bool {
        self.raw == 0
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ArithOp {
    Add,
    Sub,
    Mul,
}

/// The field GF(p^e) together with its lookup tables.
///
/// Immutable after construction and shared through [`Arc`].
pub struct Field {
    p: u32,
    e: u32,
    q: u32,
    /// Monic modulus, little-endian, `e + 1` coefficients.
    modulus: Vec<u32>,
    /// `p^i` for `i < e`.
    place: Vec<u32>,
    exp: Vec<u32>,
    log: Vec<u32>,
    neg: Vec<u32>,
    squares: Vec<bool>,
    add_table: Option<Vec<u32>>,
}

impl fmt::Debug for Field {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Field({})", self.spec_string())
    }
}

impl PartialEq for Field {
    fn eq(&self, other: &Self) -> bool {
        self.p == other.p && self.e == other.e && self.modulus == other.modulus
    }
}

impl Eq for Field {}

pub(crate) fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

pub(crate) fn prime_factors(mut n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut d = 2;
    while d * d <= n {
        if n % d == 0 {
            out.push(d);
            while n % d == 0 {
                n /= d;
            }
        }
        d += 1;
    }
    if n > 1 {
        out.push(n);
    }
    out
}

/// Remainder of `a` modulo the monic polynomial `m` over GF(p). Both little-endian.
fn poly_rem(a: &[u32], m: &[u32], p: u32) -> Vec<u32> {
    let mut r: Vec<u64> = a.iter().map(|&c| c as u64).collect();
    let dm = m.len() - 1;
    let p64 = p as u64;
    while r.len() > dm {
        let lead = r.pop().unwrap() % p64;
        if lead != 0 {
            let off = r.len() - dm;
            for (i, &c) in m[..dm].iter().enumerate() {
                // r[off + i] -= lead * c
                let sub = lead * c as u64 % p64;
                r[off + i] = (r[off + i] + p64 - sub) % p64;
            }
        }
    }
    r.into_iter().map(|c| (c % p64) as u32).collect()
}

fn poly_mulmod(a: &[u32], b: &[u32], m: &[u32], p: u32) -> Vec<u32> {
    let mut prod = vec![0u64; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        if x == 0 {
            continue;
        }
        for (j, &y) in b.iter().enumerate() {
            prod[i + j] = (prod[i + j] + x as u64 * y as u64) % p as u64;
        }
    }
    let prod: Vec<u32> = prod.into_iter().map(|c| c as u32).collect();
    poly_rem(&prod, m, p)
}

/// Irreducibility by trial division against every monic polynomial of
/// degree `1..=deg/2`.
fn is_irreducible(poly: &[u32], p: u32) -> bool {
    let deg = poly.len() - 1;
    if deg <= 1 {
        return true;
    }
    for d in 1..=deg / 2 {
        let count = (p as u64).pow(d as u32);
        for idx in 0..count {
            let mut div = Vec::with_capacity(d + 1);
            let mut v = idx;
            for _ in 0..d {
                div.push((v % p as u64) as u32);
                v /= p as u64;
            }
            div.push(1);
            if poly_rem(poly, &div, p).iter().all(|&c| c == 0) {
                return false;
            }
        }
    }
    true
}

/// Smallest monic irreducible of degree `e`, ordering candidates by their
/// coefficients `(c_0, c_1, ..., c_{e-1})` lexicographically.
fn smallest_irreducible(p: u32, e: u32) -> Vec<u32> {
    let count = (p as u64).pow(e);
    for idx in 0..count {
        // c_0 is the most significant digit of idx.
        let mut coeffs = vec![0u32; e as usize + 1];
        let mut v = idx;
        for i in (0..e as usize).rev() {
            coeffs[i] = (v % p as u64) as u32;
            v /= p as u64;
        }
        coeffs[e as usize] = 1;
        if is_irreducible(&coeffs, p) {
            return coeffs;
        }
    }
    unreachable!("irreducible polynomials exist in every degree")
}

/// Splits `q = p^e`, or `None` when q is not a prime power.
pub fn prime_power(q: u32) -> Option<(u32, u32)> {
    let p = (2..=q).find(|d| q % d == 0)?;
    let mut e = 0;
    let mut r = q;
    while r % p == 0 {
        r /= p;
        e += 1;
    }
    (r == 1).then_some((p, e))
}

impl Field {
    /// Builds GF(p^e) with the lexicographically smallest monic irreducible
    /// modulus (coefficients compared from the constant term up).
    pub fn new(p: u32, e: u32) -> Result<Arc<Field>> {
        if !is_prime(p as u64) {
            return Err(Error::InvalidField(format!("{p} is not prime")));
        }
        if p == 2 {
            return Err(Error::InvalidField(
                "characteristic 2 is not supported".into(),
            ));
        }
        if e == 0 {
            return Err(Error::InvalidField("extension degree must be at least 1".into()));
        }
        let q64 = (p as u64).checked_pow(e).filter(|&q| q <= MAX_FIELD_ORDER);
        let q = match q64 {
            Some(q) => q as u32,
            None => {
                return Err(Error::InvalidField(format!(
                    "{p}^{e} exceeds the supported field order {MAX_FIELD_ORDER}"
                )))
            }
        };
        let modulus = smallest_irreducible(p, e);
        let place: Vec<u32> = (0..e).map(|i| p.pow(i)).collect();

        let to_coeffs = |raw: u32| -> Vec<u32> {
            let mut v = raw;
            (0..e)
                .map(|_| {
                    let c = v % p;
                    v /= p;
                    c
                })
                .collect()
        };
        let from_coeffs = |c: &[u32]| -> u32 {
            let mut raw = 0u32;
            for (i, &ci) in c.iter().enumerate() {
                raw += ci * place[i];
            }
            raw
        };
        let slow_pow = |base: &[u32], mut n: u64| -> Vec<u32> {
            let mut acc = vec![0u32; e as usize];
            acc[0] = 1;
            let mut b = base.to_vec();
            while n > 0 {
                if n & 1 == 1 {
                    acc = poly_mulmod(&acc, &b, &modulus, p);
                }
                b = poly_mulmod(&b, &b, &modulus, p);
                n >>= 1;
            }
            acc.resize(e as usize, 0);
            acc
        };

        // Primitive element: the first g whose order is exactly q - 1.
        let group_order = q as u64 - 1;
        let factors = prime_factors(group_order);
        let one = {
            let mut v = vec![0u32; e as usize];
            v[0] = 1;
            v
        };
        let generator = (1..q)
            .map(to_coeffs)
            .find(|g| {
                factors
                    .iter()
                    .all(|&r| slow_pow(g, group_order / r) != one)
            })
            .expect("the multiplicative group of a finite field is cyclic");

        let mut exp = Vec::with_capacity(group_order as usize);
        let mut log = vec![0u32; q as usize];
        let mut cur = one.clone();
        for i in 0..group_order {
            let raw = from_coeffs(&cur);
            exp.push(raw);
            log[raw as usize] = i as u32;
            cur = poly_mulmod(&cur, &generator, &modulus, p);
            cur.resize(e as usize, 0);
        }

        let digit_add = |a: u32, b: u32| -> u32 {
            let (mut a, mut b) = (a, b);
            let mut out = 0;
            for &pl in &place {
                out += ((a % p + b % p) % p) * pl;
                a /= p;
                b /= p;
            }
            out
        };
        let neg: Vec<u32> = (0..q)
            .map(|a| {
                let mut v = a;
                let mut out = 0;
                for &pl in &place {
                    out += ((p - v % p) % p) * pl;
                    v /= p;
                }
                out
            })
            .collect();
        let add_table = if (q as u64) * (q as u64) <= ADD_TABLE_LIMIT {
            let mut t = vec![0u32; q as usize * q as usize];
            for a in 0..q {
                for b in 0..q {
                    t[(a * q + b) as usize] = digit_add(a, b);
                }
            }
            Some(t)
        } else {
            None
        };

        let mut field = Field {
            p,
            e,
            q,
            modulus,
            place,
            exp,
            log,
            neg,
            squares: Vec::new(),
            add_table,
        };
        let mut squares = vec![false; q as usize];
        for x in 0..q {
            let x = field.elem_unchecked(x);
            squares[field.mul(x, x).raw as usize] = true;
        }
        field.squares = squares;
        Ok(Arc::new(field))
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    pub fn e(&self) -> u32 {
        self.e
    }

    pub fn q(&self) -> u32 {
        self.q
    }

    /// Modulus coefficients, little-endian, including the leading 1.
    pub fn modulus(&self) -> &[u32] {
        &self.modulus
    }

    #[inline]
    pub(crate) fn elem_unchecked(&self, raw: u32) -> FieldElem {
        debug_assert!(raw < self.q);
        FieldElem { raw, q: self.q }
    }

    pub fn elem(&self, raw: u32) -> Result<FieldElem> {
        if raw >= self.q {
            return Err(Error::InvalidElement(format!(
                "{raw} is not an element of GF({})",
                self.q
            )));
        }
        Ok(self.elem_unchecked(raw))
    }

    pub fn zero(&self) -> FieldElem {
        self.elem_unchecked(0)
    }

    pub fn one(&self) -> FieldElem {
        self.elem_unchecked(1)
    }

    /// The image of an integer in the prime subfield.
    pub fn from_int(&self, n: i64) -> FieldElem {
        self.elem_unchecked(n.rem_euclid(self.p as i64) as u32)
    }

    pub fn from_coeffs(&self, coeffs: &[u32]) -> Result<FieldElem> {
        if coeffs.len() > self.e as usize || coeffs.iter().any(|&c| c >= self.p) {
            return Err(Error::InvalidElement(format!(
                "coefficients {coeffs:?} do not describe an element of GF({}^{})",
                self.p, self.e
            )));
        }
        let raw = coeffs
            .iter()
            .zip(&self.place)
            .map(|(&c, &pl)| c * pl)
            .sum();
        Ok(self.elem_unchecked(raw))
    }

    /// Little-endian coefficient vector of length `e`.
    pub fn coeffs(&self, a: FieldElem) -> Vec<u32> {
        let mut v = a.raw;
        (0..self.e)
            .map(|_| {
                let c = v % self.p;
                v /= self.p;
                c
            })
            .collect()
    }

    pub fn elements(&self) -> impl Iterator<Item = FieldElem> + '_ {
        (0..self.q).map(move |raw| self.elem_unchecked(raw))
    }

    #[inline]
    pub fn add(&self, a: FieldElem, b: FieldElem) -> FieldElem {
        debug_assert!(a.q == self.q && b.q == self.q);
        let raw = if self.e == 1 {
            let s = a.raw + b.raw;
            if s >= self.p {
                s - self.p
            } else {
                s
            }
        } else if let Some(t) = &self.add_table {
            t[(a.raw * self.q + b.raw) as usize]
        } else {
            let (mut x, mut y) = (a.raw, b.raw);
            let mut out = 0;
            for &pl in &self.place {
                out += ((x % self.p + y % self.p) % self.p) * pl;
                x /= self.p;
                y /= self.p;
            }
            out
        };
        self.elem_unchecked(raw)
    }

    #[inline]
    pub fn neg(&self, a: FieldElem) -> FieldElem {
        self.elem_unchecked(self.neg[a.raw as usize])
    }

    #[inline]
    pub fn sub(&self, a: FieldElem, b: FieldElem) -> FieldElem {
        self.add(a, self.neg(b))
    }

    #[inline]
    pub fn mul(&self, a: FieldElem, b: FieldElem) -> FieldElem {
        debug_assert!(a.q == self.q && b.q == self.q);
        if a.raw == 0 || b.raw == 0 {
            return self.zero();
        }
        let n = self.q - 1;
        let mut s = self.log[a.raw as usize] + self.log[b.raw as usize];
        if s >= n {
            s -= n;
        }
        self.elem_unchecked(self.exp[s as usize])
    }

    pub fn inv(&self, a: FieldElem) -> Result<FieldElem> {
        if a.raw == 0 {
            return Err(Error::DivisionByZero);
        }
        let n = self.q - 1;
        let l = self.log[a.raw as usize];
        Ok(self.elem_unchecked(self.exp[((n - l) % n) as usize]))
    }

    pub fn pow(&self, a: FieldElem, n: u64) -> FieldElem {
        if n == 0 {
            return self.one();
        }
        if a.raw == 0 {
            return self.zero();
        }
        let ord = (self.q - 1) as u64;
        let l = self.log[a.raw as usize] as u64 * (n % ord) % ord;
        self.elem_unchecked(self.exp[l as usize])
    }

    /// Checked binary arithmetic: fails when an operand belongs to another field.
    pub fn arith(&self, op: ArithOp, a: FieldElem, b: FieldElem) -> Result<FieldElem> {
        self.check(a)?;
        self.check(b)?;
        Ok(match op {
            ArithOp::Add => self.add(a, b),
            ArithOp::Sub => self.sub(a, b),
            ArithOp::Mul => self.mul(a, b),
        })
    }

    pub fn check(&self, a: FieldElem) -> Result<()> {
        if a.q != self.q || a.raw >= self.q {
            return Err(Error::FieldMismatch {
                expected: self.q,
                found: a.q,
            });
        }
        Ok(())
    }

    /// True iff `a = x^2` for some x (zero counts as a square).
    #[inline]
    pub fn is_square(&self, a: FieldElem) -> bool {
        self.squares[a.raw as usize]
    }

    fn fmt_digits(&self, digits: &[u32]) -> String {
        if self.p <= 10 {
            digits.iter().map(|d| char::from(b'0' + *d as u8)).collect()
        } else if digits.len() == 1 {
            digits[0].to_string()
        } else {
            digits
                .iter()
                .map(|d| d.to_string())
                .collect::<Vec<_>>()
                .join(".")
        }
    }

    fn parse_digits(&self, s: &str, len: usize) -> Result<Vec<u32>> {
        let bad = || Error::Parse(format!("bad field digits {s:?} for GF({}^{})", self.p, self.e));
        let digits: Vec<u32> = if s.contains('.') || (len == 1 && self.p > 10) {
            s.split('.')
                .map(|d| d.trim().parse::<u32>().map_err(|_| bad()))
                .collect::<Result<_>>()?
        } else {
            s.trim()
                .chars()
                .map(|c| c.to_digit(10).ok_or_else(bad))
                .collect::<Result<_>>()?
        };
        if digits.len() != len || digits.iter().any(|&d| d >= self.p) {
            return Err(bad());
        }
        Ok(digits)
    }

    /// Little-endian base-p digit string, e.g. `"21"` for `2 + x` in GF(9).
    ///
    /// For p > 10 the digits of a multi-digit element are joined with `.`.
    pub fn format_elem(&self, a: FieldElem) -> String {
        self.fmt_digits(&self.coeffs(a))
    }

    pub fn parse_elem(&self, s: &str) -> Result<FieldElem> {
        let digits = self.parse_digits(s, self.e as usize)?;
        self.from_coeffs(&digits)
    }

    /// `"p^e:modulus-digits"`, with all `e + 1` modulus coefficients little-endian.
    pub fn spec_string(&self) -> String {
        format!("{}^{}:{}", self.p, self.e, self.fmt_digits(&self.modulus))
    }

    /// Rebuilds a field from [`Field::spec_string`] output, rejecting a
    /// modulus other than the one this library would choose.
    pub fn from_spec_string(s: &str) -> Result<Arc<Field>> {
        let bad = || Error::Parse(format!("bad field spec {s:?}"));
        let (pe, modulus) = s.split_once(':').ok_or_else(bad)?;
        let (p, e) = pe.split_once('^').ok_or_else(bad)?;
        let p: u32 = p.trim().parse().map_err(|_| bad())?;
        let e: u32 = e.trim().parse().map_err(|_| bad())?;
        let field = Field::new(p, e)?;
        let given = field.parse_digits(modulus, e as usize + 1)?;
        if given != field.modulus {
            return Err(Error::Parse(format!(
                "modulus {modulus} differs from the canonical modulus of GF({p}^{e})"
            )));
        }
        Ok(field)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn prime_powers() {
        assert_eq!(prime_power(9), Some((3, 2)));
        assert_eq!(prime_power(13), Some((13, 1)));
        assert_eq!(prime_power(12), None);
        assert_eq!(prime_power(1), None);
    }

    #[test]
    fn prime_field_modulus_is_x() {
        let f = Field::new(5, 1).unwrap();
        assert_eq!(f.modulus(), &[0, 1]);
        assert_eq!(f.q(), 5);
        assert_eq!(Field::new(7, 1).unwrap().elements().count(), 7);
    }

    #[test]
    fn gf9_modulus_is_x2_plus_1() {
        let f = Field::new(3, 2).unwrap();
        assert_eq!(f.modulus(), &[1, 0, 1]);
        let x = f.from_coeffs(&[0, 1]).unwrap();
        assert_eq!(f.mul(x, x), f.from_int(2));
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(matches!(Field::new(9, 1), Err(Error::InvalidField(_))));
        assert!(matches!(Field::new(2, 3), Err(Error::InvalidField(_))));
        assert!(matches!(Field::new(3, 0), Err(Error::InvalidField(_))));
        assert!(matches!(Field::new(3, 13), Err(Error::InvalidField(_))));
        assert!(Field::new(3, 12).is_ok());
    }

    #[test]
    fn small_arithmetic() {
        let f = Field::new(5, 1).unwrap();
        let e = |n| f.from_int(n);
        assert_eq!(f.add(e(2), e(4)), e(1));
        assert_eq!(f.mul(e(3), e(4)), e(2));
        assert_eq!(f.inv(e(2)).unwrap(), e(3));
        assert_eq!(f.inv(e(1)).unwrap(), e(1));
        assert!(matches!(f.inv(e(0)), Err(Error::DivisionByZero)));
    }

    #[test]
    fn mismatched_fields_are_rejected() {
        let f5 = Field::new(5, 1).unwrap();
        let f7 = Field::new(7, 1).unwrap();
        let a = f5.from_int(3);
        let b = f7.from_int(3);
        assert!(matches!(
            f5.arith(ArithOp::Add, a, b),
            Err(Error::FieldMismatch { .. })
        ));
        assert_eq!(f5.arith(ArithOp::Sub, a, a).unwrap(), f5.zero());
    }

    #[test]
    fn squares_in_gf5() {
        let f = Field::new(5, 1).unwrap();
        assert!(f.is_square(f.zero()));
        assert!(f.is_square(f.from_int(4)));
        assert!(!f.is_square(f.from_int(2)));
    }

    #[test]
    fn square_count_is_half_plus_one() {
        for (p, e) in [(5, 1), (7, 1), (3, 2), (13, 1)] {
            let f = Field::new(p, e).unwrap();
            let n = f.elements().filter(|&a| f.is_square(a)).count() as u32;
            assert_eq!(n, (f.q() + 1) / 2);
        }
    }

    #[test]
    fn text_formats() {
        let f = Field::new(3, 2).unwrap();
        let a = f.from_coeffs(&[2, 1]).unwrap();
        assert_eq!(f.format_elem(a), "21");
        assert_eq!(f.parse_elem("21").unwrap(), a);
        assert_eq!(f.spec_string(), "3^2:101");
        assert_eq!(*Field::from_spec_string("3^2:101").unwrap(), *f);
        assert!(Field::from_spec_string("3^2:201").is_err());
        assert!(f.parse_elem("3").is_err());

        let g = Field::new(13, 1).unwrap();
        assert_eq!(g.format_elem(g.from_int(12)), "12");
        assert_eq!(g.parse_elem("12").unwrap(), g.from_int(12));
        let h = Field::new(11, 2).unwrap();
        let b = h.from_coeffs(&[10, 3]).unwrap();
        assert_eq!(h.format_elem(b), "10.3");
        assert_eq!(h.parse_elem("10.3").unwrap(), b);
    }

    #[test]
    fn construction_is_deterministic() {
        for (p, e) in [(3, 3), (5, 2), (7, 2), (3, 4)] {
            let a = Field::new(p, e).unwrap();
            let b = Field::new(p, e).unwrap();
            assert_eq!(a.modulus(), b.modulus());
            assert!(is_irreducible(a.modulus(), p));
        }
    }
}
