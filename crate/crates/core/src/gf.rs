//! Exact arithmetic in GF(p^s).
//!
//! Elements are encoded as integers in `[0, q)` whose base-p digits
//! (little-endian) are the coefficients of the element in the polynomial
//! basis `1, x, x^2, ...` modulo the field's defining polynomial. The
//! defining polynomial is the lexicographically smallest monic irreducible
//! of degree `s` (coefficients compared from the constant term upward), so
//! every build agrees on the encoding.
//!
//! Multiplication goes through log/antilog tables built once per field from
//! the reference polynomial multiplication.

use std::fmt;
use std::str::FromStr;
use std::sync::{Arc, RwLock};

use thiserror::Error;

/// Largest supported field order.
pub const MAX_ORDER: u64 = 1 << 16;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FieldError {
    #[error("{0} is not a prime")]
    NotPrime(u64),
    #[error("exponent must be at least 1, got {0}")]
    BadExponent(u32),
    #[error("{0} is not a prime power")]
    NotPrimePower(u64),
    #[error("field order {0} exceeds the supported maximum of 65536")]
    TooLarge(u64),
    #[error("defining polynomial {0:?} is not monic irreducible of the right degree")]
    BadModulus(Vec<u32>),
    #[error("division by zero")]
    DivisionByZero,
    #[error("element {value} out of range for GF({order})")]
    OutOfRange { value: u64, order: u32 },
    #[error("malformed field string {0:?}")]
    Parse(String),
}

/// A field element in canonical integer encoding.
///
/// An `Elem` carries no reference to its field; all arithmetic goes through
/// [`Field`]. `Elem::ZERO` and `Elem::ONE` are valid in every field.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Elem(pub(crate) u32);

impl Elem {
    pub const ZERO: Elem = Elem(0);
    pub const ONE: Elem = Elem(1);

    pub fn value(self) -> u32 {
        self.0
    }

    pub fn is_zero(self) -> bool {
        self.0 == 0
    }
}

impl fmt::Display for Elem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

struct Inner {
    p: u32,
    s: u32,
    q: u32,
    /// `c_0, ..., c_s` with `c_s = 1`. Empty for prime fields.
    modulus: Vec<u32>,
    /// `exp[k] = g^k` for `k < 2(q-1)`, `g` the primitive element.
    exp: Vec<u32>,
    log: Vec<u32>,
    primitive: Elem,
    /// Pascal's triangle reduced mod p; row `a` holds `C(a, 0..=a)`.
    pascal: RwLock<Vec<Vec<u16>>>,
}

/// The finite field GF(p^s). Cheap to clone; clones share tables.
#[derive(Clone)]
pub struct Field {
    inner: Arc<Inner>,
}

impl PartialEq for Field {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.inner, &other.inner)
            || (self.inner.p == other.inner.p
                && self.inner.s == other.inner.s
                && self.inner.modulus == other.inner.modulus)
    }
}

impl Eq for Field {}

impl fmt::Debug for Field {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "GF({}) [{}]", self.inner.q, self)
    }
}

/// Renders the field string `q=<p>^<s>` or `q=<p>^<s>;mod=<c_0,...,c_s>`.
impl fmt::Display for Field {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "q={}^{}", self.inner.p, self.inner.s)?;
        if self.inner.s > 1 {
            let coeffs: Vec<String> = self.inner.modulus.iter().map(|c| c.to_string()).collect();
            write!(f, ";mod={}", coeffs.join(","))?;
        }
        Ok(())
    }
}

impl FromStr for Field {
    type Err = FieldError;

    fn from_str(text: &str) -> Result<Self, Self::Err> {
        let bad = || FieldError::Parse(text.to_string());
        let text = text.trim();
        let (order, modulus) = match text.split_once(';') {
            Some((order, rest)) => (order, Some(rest.strip_prefix("mod=").ok_or_else(bad)?)),
            None => (text, None),
        };
        let (p, s) = order
            .strip_prefix("q=")
            .and_then(|o| o.split_once('^'))
            .ok_or_else(bad)?;
        let p: u64 = p.parse().map_err(|_| bad())?;
        let s: u32 = s.parse().map_err(|_| bad())?;
        match modulus {
            None if s == 1 => Field::new(p, s),
            None => Err(bad()),
            Some(_) if s == 1 => Err(bad()),
            Some(m) => {
                let coeffs = m
                    .split(',')
                    .map(|c| c.trim().parse::<u32>().map_err(|_| bad()))
                    .collect::<Result<Vec<_>, _>>()?;
                Field::with_modulus(p, coeffs)
            }
        }
    }
}

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

fn prime_factors(mut n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut d = 2;
    while d * d <= n {
        if n.is_multiple_of(d) {
            out.push(d);
            while n.is_multiple_of(d) {
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

/// Splits a prime power `q` into `(p, s)`.
pub fn factor_prime_power(q: u64) -> Result<(u64, u32), FieldError> {
    let factors = prime_factors(q);
    if factors.len() != 1 {
        return Err(FieldError::NotPrimePower(q));
    }
    let p = factors[0];
    let mut s = 0;
    let mut rest = q;
    while rest > 1 {
        rest /= p;
        s += 1;
    }
    Ok((p, s))
}

// Polynomial helpers over GF(p) on little-endian coefficient vectors.

fn poly_trim(v: &mut Vec<u32>) {
    while v.last() == Some(&0) {
        v.pop();
    }
}

/// Remainder of `a` modulo the monic polynomial `m`.
fn poly_rem(mut a: Vec<u32>, m: &[u32], p: u32) -> Vec<u32> {
    let dm = m.len() - 1;
    poly_trim(&mut a);
    while a.len() > dm {
        let lead = *a.last().unwrap();
        let shift = a.len() - 1 - dm;
        for (k, &c) in m.iter().enumerate() {
            let idx = shift + k;
            a[idx] = (a[idx] + p - (lead * c) % p) % p;
        }
        poly_trim(&mut a);
    }
    a
}

fn is_irreducible(m: &[u32], p: u32) -> bool {
    let deg = m.len() - 1;
    if deg <= 1 {
        return deg == 1;
    }
    // Trial division by every monic polynomial of degree 1..=deg/2.
    for d in 1..=deg / 2 {
        let count = (p as u64).pow(d as u32);
        for idx in 0..count {
            let mut divisor = Vec::with_capacity(d + 1);
            let mut x = idx;
            for _ in 0..d {
                divisor.push((x % p as u64) as u32);
                x /= p as u64;
            }
            divisor.push(1);
            if poly_rem(m.to_vec(), &divisor, p).is_empty() {
                return false;
            }
        }
    }
    true
}

/// Lexicographically smallest monic irreducible of degree `s`, comparing the
/// coefficient list from the constant term upward.
fn smallest_irreducible(p: u32, s: u32) -> Vec<u32> {
    let count = (p as u64).pow(s);
    for idx in 0..count {
        // Most significant digit of `idx` is c_0, so counting up walks the
        // coefficient lists in lexicographic order.
        let mut coeffs = vec![0u32; s as usize + 1];
        let mut x = idx;
        for k in (0..s as usize).rev() {
            coeffs[k] = (x % p as u64) as u32;
            x /= p as u64;
        }
        coeffs[s as usize] = 1;
        if is_irreducible(&coeffs, p) {
            return coeffs;
        }
    }
    unreachable!("an irreducible polynomial of every degree exists over GF(p)")
}

fn digits(v: u32, p: u32, s: u32) -> Vec<u32> {
    let mut out = Vec::with_capacity(s as usize);
    let mut x = v;
    for _ in 0..s {
        out.push(x % p);
        x /= p;
    }
    out
}

fn pack(d: &[u32], p: u32) -> u32 {
    d.iter().rev().fold(0, |acc, &c| acc * p + c)
}

/// Reference multiplication by polynomial product modulo `modulus`.
fn mul_reference(a: u32, b: u32, p: u32, s: u32, modulus: &[u32]) -> u32 {
    if s == 1 {
        return ((a as u64 * b as u64) % p as u64) as u32;
    }
    let da = digits(a, p, s);
    let db = digits(b, p, s);
    let mut prod = vec![0u32; 2 * s as usize - 1];
    for (i, &x) in da.iter().enumerate() {
        for (j, &y) in db.iter().enumerate() {
            prod[i + j] = (prod[i + j] + x * y) % p;
        }
    }
    let mut r = poly_rem(prod, modulus, p);
    r.resize(s as usize, 0);
    pack(&r, p)
}

fn pow_reference(a: u32, mut e: u64, p: u32, s: u32, modulus: &[u32]) -> u32 {
    let mut base = a;
    let mut acc = 1;
    while e > 0 {
        if e & 1 == 1 {
            acc = mul_reference(acc, base, p, s, modulus);
        }
        base = mul_reference(base, base, p, s, modulus);
        e >>= 1;
    }
    acc
}

impl Field {
    /// GF(p^s) with the canonical defining polynomial.
    pub fn new(p: u64, s: u32) -> Result<Field, FieldError> {
        if !is_prime(p) {
            return Err(FieldError::NotPrime(p));
        }
        if s < 1 {
            return Err(FieldError::BadExponent(s));
        }
        let q = p.checked_pow(s).filter(|&q| q <= MAX_ORDER);
        let Some(_) = q else {
            return Err(FieldError::TooLarge(p.saturating_pow(s)));
        };
        let modulus = if s == 1 {
            Vec::new()
        } else {
            smallest_irreducible(p as u32, s)
        };
        Ok(Self::build(p as u32, s, modulus))
    }

    /// GF(q) for a prime power `q`.
    pub fn from_order(q: u64) -> Result<Field, FieldError> {
        if q > MAX_ORDER {
            return Err(FieldError::TooLarge(q));
        }
        let (p, s) = factor_prime_power(q)?;
        Field::new(p, s)
    }

    /// GF(p^s) with an explicit defining polynomial `c_0, ..., c_s`.
    pub fn with_modulus(p: u64, modulus: Vec<u32>) -> Result<Field, FieldError> {
        if !is_prime(p) {
            return Err(FieldError::NotPrime(p));
        }
        if modulus.len() < 3
            || modulus.last() != Some(&1)
            || modulus.iter().any(|&c| c as u64 >= p)
            || !is_irreducible(&modulus, p as u32)
        {
            return Err(FieldError::BadModulus(modulus));
        }
        let s = modulus.len() as u32 - 1;
        if (p as u128).pow(s) > MAX_ORDER as u128 {
            return Err(FieldError::TooLarge(p.saturating_pow(s)));
        }
        Ok(Self::build(p as u32, s, modulus))
    }

    fn build(p: u32, s: u32, modulus: Vec<u32>) -> Field {
        let q = p.pow(s);
        let group = (q - 1) as u64;
        let factors = prime_factors(group);
        let primitive = (1..q)
            .find(|&g| {
                factors
                    .iter()
                    .all(|&r| pow_reference(g, group / r, p, s, &modulus) != 1)
            })
            .expect("the multiplicative group of a finite field is cyclic");

        let n = (q - 1) as usize;
        let mut exp = vec![0u32; 2 * n.max(1)];
        let mut log = vec![0u32; q as usize];
        let mut x = 1u32;
        for (k, slot) in exp.iter_mut().take(n).enumerate() {
            *slot = x;
            log[x as usize] = k as u32;
            x = mul_reference(x, primitive, p, s, &modulus);
        }
        exp.copy_within(0..n, n);
        Field {
            inner: Arc::new(Inner {
                p,
                s,
                q,
                modulus,
                exp,
                log,
                primitive: Elem(primitive),
                pascal: RwLock::new(vec![vec![1]]),
            }),
        }
    }

    pub fn characteristic(&self) -> u32 {
        self.inner.p
    }

    pub fn degree(&self) -> u32 {
        self.inner.s
    }

    pub fn order(&self) -> u32 {
        self.inner.q
    }

    /// Defining polynomial `c_0, ..., c_s`; `None` for prime fields.
    pub fn modulus(&self) -> Option<&[u32]> {
        (self.inner.s > 1).then_some(self.inner.modulus.as_slice())
    }

    pub fn zero(&self) -> Elem {
        Elem::ZERO
    }

    pub fn one(&self) -> Elem {
        Elem::ONE
    }

    /// Validates a canonical encoding.
    pub fn element(&self, value: u64) -> Result<Elem, FieldError> {
        if value < self.inner.q as u64 {
            Ok(Elem(value as u32))
        } else {
            Err(FieldError::OutOfRange {
                value,
                order: self.inner.q,
            })
        }
    }

    pub fn elements(&self) -> impl Iterator<Item = Elem> {
        (0..self.inner.q).map(Elem)
    }

    pub fn contains(&self, a: Elem) -> bool {
        a.0 < self.inner.q
    }

    pub fn add(&self, a: Elem, b: Elem) -> Elem {
        let Inner { p, s, .. } = *self.inner;
        if s == 1 {
            return Elem((a.0 + b.0) % p);
        }
        if p == 2 {
            return Elem(a.0 ^ b.0);
        }
        let (mut x, mut y, mut out, mut place) = (a.0, b.0, 0, 1);
        for _ in 0..s {
            out += ((x % p + y % p) % p) * place;
            x /= p;
            y /= p;
            place *= p;
        }
        Elem(out)
    }

    pub fn neg(&self, a: Elem) -> Elem {
        let Inner { p, s, .. } = *self.inner;
        if p == 2 {
            return a;
        }
        if s == 1 {
            return Elem((p - a.0) % p);
        }
        let (mut x, mut out, mut place) = (a.0, 0, 1);
        for _ in 0..s {
            out += ((p - x % p) % p) * place;
            x /= p;
            place *= p;
        }
        Elem(out)
    }

    pub fn sub(&self, a: Elem, b: Elem) -> Elem {
        self.add(a, self.neg(b))
    }

    pub fn mul(&self, a: Elem, b: Elem) -> Elem {
        if a.0 == 0 || b.0 == 0 {
            return Elem::ZERO;
        }
        let inner = &*self.inner;
        Elem(inner.exp[(inner.log[a.0 as usize] + inner.log[b.0 as usize]) as usize])
    }

    pub fn inv(&self, a: Elem) -> Result<Elem, FieldError> {
        if a.0 == 0 {
            return Err(FieldError::DivisionByZero);
        }
        let inner = &*self.inner;
        let n = inner.q - 1;
        Ok(Elem(
            inner.exp[((n - inner.log[a.0 as usize]) % n.max(1)) as usize],
        ))
    }

    pub fn div(&self, a: Elem, b: Elem) -> Result<Elem, FieldError> {
        Ok(self.mul(a, self.inv(b)?))
    }

    /// `a^e` with `a^0 = 1` for every `a`, including zero.
    pub fn pow(&self, a: Elem, e: u64) -> Elem {
        if e == 0 {
            return Elem::ONE;
        }
        if a.0 == 0 {
            return Elem::ZERO;
        }
        let inner = &*self.inner;
        let n = (inner.q - 1) as u64;
        let k = (inner.log[a.0 as usize] as u64 * (e % n)) % n;
        Elem(inner.exp[k as usize])
    }

    /// `a^e` for a signed exponent; negative exponents go through `a^{-1}`.
    pub fn pow_signed(&self, a: Elem, e: i64) -> Result<Elem, FieldError> {
        if e >= 0 {
            return Ok(self.pow(a, e as u64));
        }
        let inv = self.inv(a)?;
        Ok(self.pow(inv, e.unsigned_abs()))
    }

    /// Image of an integer in the prime subfield.
    pub fn nat_map(&self, z: i64) -> Elem {
        Elem(z.rem_euclid(self.inner.p as i64) as u32)
    }

    /// The primitive element of smallest canonical encoding.
    pub fn primitive_element(&self) -> Elem {
        self.inner.primitive
    }

    /// Multiplicative order of a nonzero element.
    pub fn multiplicative_order(&self, a: Elem) -> Result<u64, FieldError> {
        if a.0 == 0 {
            return Err(FieldError::DivisionByZero);
        }
        let mut x = a;
        let mut k = 1;
        while x != Elem::ONE {
            x = self.mul(x, a);
            k += 1;
        }
        Ok(k)
    }

    /// Binomial coefficient `C(a, b)` mapped into the prime subfield.
    ///
    /// `C(a, 0) = 1`, `C(a, b) = 0` for negative `b`, and otherwise the
    /// Pascal recurrence carried out in GF(p). Rows of the triangle are
    /// memoized per field.
    pub fn binom(&self, a: i64, b: i64) -> Elem {
        if b < 0 {
            return Elem::ZERO;
        }
        if b == 0 {
            return Elem::ONE;
        }
        if a < 0 {
            // Upper negation C(a, b) = (-1)^b C(b - a - 1, b), which follows
            // from the recurrence run toward negative a.
            let c = self.binom(b - a - 1, b);
            return if b % 2 == 0 { c } else { self.neg(c) };
        }
        if b > a {
            return Elem::ZERO;
        }
        let (a, b) = (a as usize, b as usize);
        {
            let rows = self
                .inner
                .pascal
                .read()
                .expect("pascal table lock poisoned");
            if let Some(row) = rows.get(a) {
                return Elem(row[b] as u32);
            }
        }
        let p = self.inner.p;
        let mut rows = self
            .inner
            .pascal
            .write()
            .expect("pascal table lock poisoned");
        while rows.len() <= a {
            let prev = rows.last().unwrap();
            let mut row = Vec::with_capacity(prev.len() + 1);
            row.push(1u16);
            for k in 1..prev.len() {
                row.push(((prev[k - 1] as u32 + prev[k] as u32) % p) as u16);
            }
            row.push(1);
            rows.push(row);
        }
        Elem(rows[a][b] as u32)
    }

    /// Multiplication by polynomial product modulo the defining polynomial,
    /// bypassing the log tables.
    pub fn mul_reference(&self, a: Elem, b: Elem) -> Elem {
        let inner = &*self.inner;
        Elem(mul_reference(a.0, b.0, inner.p, inner.s, &inner.modulus))
    }

    /// Inner product of two element sequences.
    pub fn dot(
        &self,
        a: impl IntoIterator<Item = Elem>,
        b: impl IntoIterator<Item = Elem>,
    ) -> Elem {
        a.into_iter()
            .zip(b)
            .fold(Elem::ZERO, |acc, (x, y)| self.add(acc, self.mul(x, y)))
    }
}
