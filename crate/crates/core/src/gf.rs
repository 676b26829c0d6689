//! Arithmetic in GF(p^e).
//!
//! Elements are encoded as integers in `[0, q)` whose base-`p` digits are the
//! polynomial coefficients, little-endian. The modulus for `e > 1` is the monic
//! irreducible polynomial of degree `e` with the smallest encoding of its
//! non-leading coefficients, so a field is fully determined by `(p, e)`.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A field element, stored as its integer encoding.
#[derive(
    Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize,
)]
#[serde(transparent)]
pub struct Fe(pub u32);

impl Fe {
    pub const ZERO: Fe = Fe(0);
    pub const ONE: Fe = Fe(1);

    #[inline]
    pub fn is_zero(self) -> bool {
        self.0 == 0
    }
}

impl fmt::Display for Fe {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Serializable description of a field: the header written into every file.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FieldSpec {
    pub p: u32,
    pub e: u32,
    pub q: u32,
    /// `e + 1` coefficients, constant term first; the last one is 1.
    pub modulus: Vec<u32>,
}

/// Fields up to this order get log/exp tables.
const TABLE_LIMIT: u32 = 1 << 16;
/// Odd-characteristic extension fields up to this order get an addition table.
const ADD_TABLE_LIMIT: u32 = 256;

enum Repr {
    Prime,
    Tables {
        /// exp[i] = g^i for i in [0, 2(q-1)).
        exp: Vec<u32>,
        log: Vec<u32>,
        add: Option<Vec<u32>>,
    },
    Poly,
}

struct Inner {
    p: u32,
    e: u32,
    q: u32,
    modulus: Vec<u32>,
    repr: Repr,
}

/// A finite field GF(p^e). Cheap to clone; equality is by `(p, e)`.
#[derive(Clone)]
pub struct Field {
    inner: Arc<Inner>,
}

impl PartialEq for Field {
    fn eq(&self, other: &Self) -> bool {
        self.inner.p == other.inner.p && self.inner.e == other.inner.e
    }
}

impl Eq for Field {}

impl fmt::Debug for Field {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "GF({}^{})", self.inner.p, self.inner.e)
    }
}

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2u64;
    while d * d <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

fn digits(mut v: u64, p: u32, len: usize) -> Vec<u32> {
    let mut out = Vec::with_capacity(len);
    for _ in 0..len {
        out.push((v % p as u64) as u32);
        v /= p as u64;
    }
    out
}

fn undigits(d: &[u32], p: u32) -> u32 {
    d.iter()
        .rev()
        .fold(0u64, |acc, &c| acc * p as u64 + c as u64) as u32
}

/// Remainder of `f` modulo the monic polynomial `m` over F_p.
fn poly_rem(f: &[u32], m: &[u32], p: u32) -> Vec<u32> {
    let p64 = p as u64;
    let mut r: Vec<u64> = f.iter().map(|&c| c as u64).collect();
    let dm = m.len() - 1;
    while r.len() > dm {
        let lead = r.pop().unwrap() % p64;
        if lead != 0 {
            let off = r.len() - dm;
            for (i, &mc) in m[..dm].iter().enumerate() {
                r[off + i] = (r[off + i] + (p64 - lead) * mc as u64) % p64;
            }
        }
    }
    r.into_iter().map(|c| (c % p64) as u32).collect()
}

/// Trial division against every monic polynomial of degree `1..=deg/2`.
pub fn is_irreducible(f: &[u32], p: u32) -> bool {
    let deg = f.len() - 1;
    for d in 1..=deg / 2 {
        let count = (p as u64).pow(d as u32);
        for enc in 0..count {
            let mut g = digits(enc, p, d);
            g.push(1);
            if poly_rem(f, &g, p).iter().all(|&c| c == 0) {
                return false;
            }
        }
    }
    true
}

fn canonical_modulus(p: u32, e: u32) -> Vec<u32> {
    if e == 1 {
        return vec![0, 1];
    }
    let count = (p as u64).pow(e);
    for enc in 0..count {
        let mut f = digits(enc, p, e as usize);
        f.push(1);
        if f[0] != 0 && is_irreducible(&f, p) {
            return f;
        }
    }
    unreachable!("irreducible polynomials exist in every degree")
}

impl Field {
    /// Builds GF(p^e) with the canonical modulus.
    pub fn new(p: u64, e: u32) -> Result<Field> {
        if e == 0 {
            return Err(Error::DegreeZero);
        }
        if !is_prime(p) {
            return Err(Error::NonPrimeCharacteristic(p));
        }
        let q = (p as u128)
            .checked_pow(e)
            .filter(|&q| q <= u32::MAX as u128);
        let q = match q {
            Some(q) => q as u32,
            None => return Err(Error::OrderOverflow { p, e }),
        };
        let p = p as u32;
        let modulus = canonical_modulus(p, e);
        let mut inner = Inner {
            p,
            e,
            q,
            modulus,
            repr: Repr::Poly,
        };
        if e == 1 {
            inner.repr = Repr::Prime;
        } else if q <= TABLE_LIMIT {
            inner.repr = build_tables(&inner);
        }
        Ok(Field {
            inner: Arc::new(inner),
        })
    }

    /// Convenience for tests and fixed constructions.
    pub fn of_order(q: u32) -> Result<Field> {
        let mut p = 2u32;
        while p <= q {
            if q.is_multiple_of(p) {
                let mut e = 0;
                let mut r = q;
                while r.is_multiple_of(p) {
                    r /= p;
                    e += 1;
                }
                if r != 1 {
                    return Err(Error::NonPrimeCharacteristic(q as u64));
                }
                return Field::new(p as u64, e);
            }
            p += 1;
        }
        Err(Error::NonPrimeCharacteristic(q as u64))
    }

    #[inline]
    pub fn p(&self) -> u32 {
        self.inner.p
    }
    #[inline]
    pub fn e(&self) -> u32 {
        self.inner.e
    }
    #[inline]
    pub fn q(&self) -> u32 {
        self.inner.q
    }
    pub fn modulus(&self) -> &[u32] {
        &self.inner.modulus
    }

    /// Integer encoding of the non-leading modulus coefficients.
    pub fn modulus_encoding(&self) -> u64 {
        let m = &self.inner.modulus;
        m[..m.len() - 1]
            .iter()
            .rev()
            .fold(0u64, |acc, &c| acc * self.inner.p as u64 + c as u64)
    }

    pub fn spec(&self) -> FieldSpec {
        FieldSpec {
            p: self.p(),
            e: self.e(),
            q: self.q(),
            modulus: self.inner.modulus.clone(),
        }
    }

    /// `p e modulus-encoding`
    pub fn header(&self) -> String {
        format!("{} {} {}", self.p(), self.e(), self.modulus_encoding())
    }

    /// Parses a header line and rebuilds the field, rejecting a non-canonical modulus.
    pub fn from_header(line: &str) -> Result<Field> {
        let parts: Vec<u64> = line
            .split_whitespace()
            .map(|s| {
                s.parse::<u64>()
                    .map_err(|e| Error::Parse(format!("field header: {e}")))
            })
            .collect::<Result<_>>()?;
        if parts.len() != 3 {
            return Err(Error::Parse(format!(
                "field header needs 3 integers, got {}",
                parts.len()
            )));
        }
        let field = Field::new(parts[0], parts[1] as u32)?;
        if field.modulus_encoding() != parts[2] {
            return Err(Error::Parse(format!(
                "modulus encoding {} is not the canonical {}",
                parts[2],
                field.modulus_encoding()
            )));
        }
        Ok(field)
    }

    pub fn zero(&self) -> Fe {
        Fe::ZERO
    }
    pub fn one(&self) -> Fe {
        Fe::ONE
    }

    pub fn elem(&self, value: u64) -> Result<Fe> {
        if value < self.q() as u64 {
            Ok(Fe(value as u32))
        } else {
            Err(Error::ElementOutOfRange { value, q: self.q() })
        }
    }

    /// Image of an integer in the prime subfield.
    pub fn from_int(&self, n: i64) -> Fe {
        Fe(n.rem_euclid(self.p() as i64) as u32)
    }

    pub fn elements(&self) -> impl DoubleEndedIterator<Item = Fe> + ExactSizeIterator + Clone {
        (0..self.q()).map(Fe)
    }

    pub fn nonzero_elements(
        &self,
    ) -> impl DoubleEndedIterator<Item = Fe> + ExactSizeIterator + Clone {
        (1..self.q()).map(Fe)
    }

    #[inline]
    pub fn add(&self, a: Fe, b: Fe) -> Fe {
        let inner = &*self.inner;
        match &inner.repr {
            Repr::Prime => {
                let s = a.0 as u64 + b.0 as u64;
                let p = inner.p as u64;
                Fe(if s >= p { s - p } else { s } as u32)
            }
            _ if inner.p == 2 => Fe(a.0 ^ b.0),
            Repr::Tables { add: Some(t), .. } => Fe(t[(a.0 * inner.q + b.0) as usize]),
            _ => self.add_digits(a, b),
        }
    }

    fn add_digits(&self, a: Fe, b: Fe) -> Fe {
        let p = self.p();
        let (mut x, mut y) = (a.0, b.0);
        let mut out = 0u64;
        let mut place = 1u64;
        for _ in 0..self.e() {
            let d = (x % p + y % p) % p;
            out += d as u64 * place;
            place *= p as u64;
            x /= p;
            y /= p;
        }
        Fe(out as u32)
    }

    #[inline]
    pub fn neg(&self, a: Fe) -> Fe {
        if a.0 == 0 {
            return a;
        }
        match self.inner.repr {
            Repr::Prime => Fe(self.inner.p - a.0),
            _ if self.inner.p == 2 => a,
            _ => {
                let p = self.p();
                let d: Vec<u32> = digits(a.0 as u64, p, self.e() as usize)
                    .into_iter()
                    .map(|c| (p - c) % p)
                    .collect();
                Fe(undigits(&d, p))
            }
        }
    }

    #[inline]
    pub fn sub(&self, a: Fe, b: Fe) -> Fe {
        self.add(a, self.neg(b))
    }

    #[inline]
    pub fn mul(&self, a: Fe, b: Fe) -> Fe {
        if a.0 == 0 || b.0 == 0 {
            return Fe::ZERO;
        }
        let inner = &*self.inner;
        match &inner.repr {
            Repr::Prime => Fe(((a.0 as u64 * b.0 as u64) % inner.p as u64) as u32),
            Repr::Tables { exp, log, .. } => {
                Fe(exp[(log[a.0 as usize] + log[b.0 as usize]) as usize])
            }
            Repr::Poly => Fe(poly_mul(inner, a.0, b.0)),
        }
    }

    pub fn inv(&self, a: Fe) -> Result<Fe> {
        if a.0 == 0 {
            return Err(Error::DivisionByZero);
        }
        let inner = &*self.inner;
        Ok(match &inner.repr {
            Repr::Tables { exp, log, .. } => {
                let l = log[a.0 as usize];
                exp[((inner.q - 1 - l) % (inner.q - 1)) as usize].into()
            }
            _ => self.pow_u(a, inner.q as u64 - 2),
        })
    }

    pub fn div(&self, a: Fe, b: Fe) -> Result<Fe> {
        Ok(self.mul(a, self.inv(b)?))
    }

    fn pow_u(&self, mut base: Fe, mut exp: u64) -> Fe {
        let mut acc = Fe::ONE;
        while exp > 0 {
            if exp & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            exp >>= 1;
        }
        acc
    }

    /// `a^n` for any integer `n`; negative exponents go through the inverse.
    pub fn pow(&self, a: Fe, n: i64) -> Result<Fe> {
        if n >= 0 {
            Ok(self.pow_u(a, n as u64))
        } else {
            Ok(self.pow_u(self.inv(a)?, n.unsigned_abs()))
        }
    }

    /// `(-1)^n`
    #[inline]
    pub fn sign(&self, n: usize) -> Fe {
        if n.is_multiple_of(2) {
            Fe::ONE
        } else {
            self.neg(Fe::ONE)
        }
    }

    pub fn product<I: IntoIterator<Item = Fe>>(&self, it: I) -> Fe {
        it.into_iter().fold(Fe::ONE, |acc, x| self.mul(acc, x))
    }

    pub fn sum<I: IntoIterator<Item = Fe>>(&self, it: I) -> Fe {
        it.into_iter().fold(Fe::ZERO, |acc, x| self.add(acc, x))
    }

    /// `dst[j] += c * src[j]`, the elimination inner loop.
    pub fn axpy(&self, dst: &mut [Fe], c: Fe, src: &[Fe]) {
        debug_assert_eq!(dst.len(), src.len());
        if c.0 == 0 {
            return;
        }
        let inner = &*self.inner;
        let q = inner.q;
        if q <= 1024 {
            let scaled: Vec<u32> = (0..q).map(|s| self.mul(c, Fe(s)).0).collect();
            match &inner.repr {
                Repr::Prime => {
                    let p = inner.p;
                    for (d, s) in dst.iter_mut().zip(src) {
                        let v = d.0 + scaled[s.0 as usize];
                        d.0 = if v >= p { v - p } else { v };
                    }
                }
                _ if inner.p == 2 => {
                    for (d, s) in dst.iter_mut().zip(src) {
                        d.0 ^= scaled[s.0 as usize];
                    }
                }
                Repr::Tables { add: Some(t), .. } => {
                    for (d, s) in dst.iter_mut().zip(src) {
                        d.0 = t[(d.0 * q + scaled[s.0 as usize]) as usize];
                    }
                }
                _ => {
                    for (d, s) in dst.iter_mut().zip(src) {
                        *d = self.add(*d, Fe(scaled[s.0 as usize]));
                    }
                }
            }
        } else {
            for (d, s) in dst.iter_mut().zip(src) {
                *d = self.add(*d, self.mul(c, *s));
            }
        }
    }

    pub fn scale(&self, row: &mut [Fe], c: Fe) {
        for x in row.iter_mut() {
            *x = self.mul(*x, c);
        }
    }

    /// Arithmetic through polynomial multiplication only, ignoring any tables.
    /// Used as an independent route in tests.
    pub fn mul_by_polynomials(&self, a: Fe, b: Fe) -> Fe {
        if self.e() == 1 {
            return Fe(((a.0 as u64 * b.0 as u64) % self.p() as u64) as u32);
        }
        Fe(poly_mul(&self.inner, a.0, b.0))
    }

    pub fn add_by_digits(&self, a: Fe, b: Fe) -> Fe {
        self.add_digits(a, b)
    }
}

impl From<u32> for Fe {
    fn from(v: u32) -> Self {
        Fe(v)
    }
}

fn poly_mul(inner: &Inner, a: u32, b: u32) -> u32 {
    let p = inner.p;
    let e = inner.e as usize;
    let da = digits(a as u64, p, e);
    let db = digits(b as u64, p, e);
    let mut prod = vec![0u32; 2 * e - 1];
    for (i, &x) in da.iter().enumerate() {
        if x == 0 {
            continue;
        }
        for (j, &y) in db.iter().enumerate() {
            prod[i + j] = ((prod[i + j] as u64 + x as u64 * y as u64) % p as u64) as u32;
        }
    }
    let r = poly_rem(&prod, &inner.modulus, p);
    undigits(&r, p)
}

fn build_tables(inner: &Inner) -> Repr {
    let q = inner.q;
    let order = q - 1;
    let mut generator = None;
    'search: for g in 2..q {
        let mut x = 1u32;
        for i in 1..=order {
            x = poly_mul(inner, x, g);
            if x == 1 {
                if i == order {
                    generator = Some(g);
                    break 'search;
                }
                continue 'search;
            }
        }
    }
    let g = generator.expect("multiplicative group is cyclic");
    let mut exp = vec![0u32; 2 * order as usize];
    let mut log = vec![0u32; q as usize];
    let mut x = 1u32;
    for i in 0..order {
        exp[i as usize] = x;
        exp[(i + order) as usize] = x;
        log[x as usize] = i;
        x = poly_mul(inner, x, g);
    }
    let add = if inner.p != 2 && q <= ADD_TABLE_LIMIT {
        let p = inner.p;
        let e = inner.e as usize;
        let mut t = vec![0u32; (q * q) as usize];
        for a in 0..q {
            let da = digits(a as u64, p, e);
            for b in 0..q {
                let db = digits(b as u64, p, e);
                let s: Vec<u32> = da.iter().zip(&db).map(|(x, y)| (x + y) % p).collect();
                t[(a * q + b) as usize] = undigits(&s, p);
            }
        }
        Some(t)
    } else {
        None
    };
    Repr::Tables { exp, log, add }
}

/// Elements paired with their field, for callers that need the checked API.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FieldElement {
    pub field: Field,
    pub value: Fe,
}

/// Operations accepted by [`field_arith`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ArithOp {
    Add,
    Sub,
    Mul,
    Div,
    /// Inverse of the first operand; the second is ignored.
    Inv,
    /// First operand raised to the given integer exponent.
    Pow(i64),
}

/// Checked arithmetic on elements that carry their field.
pub fn field_arith(a: &FieldElement, b: &FieldElement, op: ArithOp) -> Result<FieldElement> {
    if a.field != b.field {
        return Err(Error::MixedFields);
    }
    let f = &a.field;
    for v in [a.value, b.value] {
        if v.0 >= f.q() {
            return Err(Error::ElementOutOfRange {
                value: v.0 as u64,
                q: f.q(),
            });
        }
    }
    let value = match op {
        ArithOp::Add => f.add(a.value, b.value),
        ArithOp::Sub => f.sub(a.value, b.value),
        ArithOp::Mul => f.mul(a.value, b.value),
        ArithOp::Div => f.div(a.value, b.value)?,
        ArithOp::Inv => f.inv(a.value)?,
        ArithOp::Pow(n) => f.pow(a.value, n)?,
    };
    Ok(FieldElement {
        field: f.clone(),
        value,
    })
}

/// The element of smallest encoding with `eta^4 = -1` in GF(9).
pub fn find_eta(field: &Field) -> Result<Fe> {
    if field.q() != 9 {
        return Err(Error::WrongFieldOrder {
            expected: 9,
            actual: field.q(),
        });
    }
    let minus_one = field.neg(Fe::ONE);
    field
        .elements()
        .find(|&x| field.pow_u(x, 4) == minus_one)
        .ok_or(Error::WrongFieldOrder {
            expected: 9,
            actual: field.q(),
        })
}
