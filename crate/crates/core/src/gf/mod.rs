//! Exact arithmetic over the small finite fields the constructions need.
//!
//! Three families are supported:
//!
//! - prime fields `GF(p)` for primes `p <= 65521`, with the least primitive
//!   root as the designated generator;
//! - binary extensions `GF(2^w)` for `1 <= w <= 8`, reduced by a fixed
//!   primitive polynomial so that `x` itself generates the multiplicative
//!   group;
//! - `GF(9)`, built as `GF(3)[y] / (y^2 + y + 2)` with generator `y`.
//!
//! Elements are stored as their canonical integer representative. For an
//! extension field the representative is the coefficient vector read as a
//! base-`p` integer, lowest coefficient first (so for `GF(2^w)` it is the
//! usual bit-vector). Nothing is table driven.

mod linalg;

pub use linalg::{rank, solve_linear, LinalgError, Matrix};

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

/// Largest prime accepted by [`Field::prime`].
pub const MAX_PRIME: u32 = 65521;

/// Primitive moduli for `GF(2^w)`, as bit masks including the leading term.
const BINARY_MODULI: [u32; 9] = [
    0,
    0b11,        // x + 1
    0b111,       // x^2 + x + 1
    0b1011,      // x^3 + x + 1
    0b1_0011,    // x^4 + x + 1
    0b10_0101,   // x^5 + x^2 + 1
    0b100_0011,  // x^6 + x + 1
    0b1000_0011, // x^7 + x + 1
    0x11d,       // x^8 + x^4 + x^3 + x^2 + 1
];

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FieldError {
    #[error("{0} is not a prime no larger than {MAX_PRIME}")]
    NotPrime(u32),
    #[error("extension degree {0} is outside [1, 8]")]
    DegreeOutOfRange(u32),
    #[error("no supported field of order {0}")]
    UnsupportedOrder(u64),
    #[error("cannot parse field token {0:?}")]
    BadToken(String),
    #[error("inverse of zero")]
    InverseOfZero,
    #[error("value {value} is not an element of a field of order {order}")]
    NotAnElement { value: u32, order: u32 },
}

/// A field element, identified by its canonical representative in `[0, q)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Elem(u32);

impl Elem {
    pub const ZERO: Elem = Elem(0);
    pub const ONE: Elem = Elem(1);

    pub const fn value(self) -> u32 {
        self.0
    }

    pub const fn is_zero(self) -> bool {
        self.0 == 0
    }
}

impl fmt::Display for Elem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FieldKind {
    Prime,
    Extension,
}

/// A concrete finite field with a designated primitive element.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Field {
    kind: FieldKind,
    characteristic: u32,
    degree: u32,
    /// Monic modulus, lowest coefficient first. Empty for prime fields.
    modulus: Vec<u32>,
    order: u32,
    primitive: Elem,
}

impl Field {
    pub fn prime(p: u32) -> Result<Field, FieldError> {
        if p > MAX_PRIME || !is_prime(p as u64) {
            return Err(FieldError::NotPrime(p));
        }
        let primitive = least_primitive_root(p);
        Ok(Field {
            kind: FieldKind::Prime,
            characteristic: p,
            degree: 1,
            modulus: Vec::new(),
            order: p,
            primitive: Elem(primitive),
        })
    }

    /// `GF(2^w)`. The degenerate `w = 1` case is `GF(2)` itself.
    pub fn binary(w: u32) -> Result<Field, FieldError> {
        if !(1..=8).contains(&w) {
            return Err(FieldError::DegreeOutOfRange(w));
        }
        if w == 1 {
            return Field::prime(2);
        }
        let mask = BINARY_MODULI[w as usize];
        let modulus = (0..=w).map(|i| (mask >> i) & 1).collect();
        Ok(Field {
            kind: FieldKind::Extension,
            characteristic: 2,
            degree: w,
            modulus,
            order: 1 << w,
            primitive: Elem(2),
        })
    }

    /// `GF(9) = GF(3)[y] / (y^2 + y + 2)`, generated by `y`.
    pub fn gf9() -> Field {
        Field {
            kind: FieldKind::Extension,
            characteristic: 3,
            degree: 2,
            modulus: vec![2, 1, 1],
            order: 9,
            primitive: Elem(3),
        }
    }

    /// The supported field with exactly `q` elements.
    pub fn with_order(q: u64) -> Result<Field, FieldError> {
        if q == 9 {
            return Ok(Field::gf9());
        }
        if q >= 4 && q.is_power_of_two() && q <= 256 {
            return Field::binary(q.trailing_zeros());
        }
        if q <= MAX_PRIME as u64 && is_prime(q) {
            return Field::prime(q as u32);
        }
        Err(FieldError::UnsupportedOrder(q))
    }

    pub fn kind(&self) -> FieldKind {
        self.kind
    }

    pub fn characteristic(&self) -> u32 {
        self.characteristic
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }

    /// Modulus coefficients, lowest degree first (empty for prime fields).
    pub fn modulus(&self) -> &[u32] {
        &self.modulus
    }

    pub fn order(&self) -> u32 {
        self.order
    }

    pub fn primitive(&self) -> Elem {
        self.primitive
    }

    /// Canonical config token: `gf(p)`, `gf(2^w)` or `gf(9)`.
    pub fn token(&self) -> String {
        match (self.kind, self.characteristic) {
            (FieldKind::Extension, 2) => format!("gf(2^{})", self.degree),
            _ => format!("gf({})", self.order),
        }
    }

    pub fn elem(&self, value: u32) -> Result<Elem, FieldError> {
        if value < self.order {
            Ok(Elem(value))
        } else {
            Err(FieldError::NotAnElement {
                value,
                order: self.order,
            })
        }
    }

    pub fn elements(&self) -> impl Iterator<Item = Elem> {
        (0..self.order).map(Elem)
    }

    pub fn add(&self, a: Elem, b: Elem) -> Elem {
        match (self.kind, self.characteristic) {
            (FieldKind::Prime, p) => Elem(((a.0 as u64 + b.0 as u64) % p as u64) as u32),
            (FieldKind::Extension, 2) => Elem(a.0 ^ b.0),
            (FieldKind::Extension, p) => {
                self.digitwise(a, b, |x, y| (x + y) % p)
            }
        }
    }

    pub fn neg(&self, a: Elem) -> Elem {
        match (self.kind, self.characteristic) {
            (FieldKind::Prime, p) => Elem((p - a.0) % p),
            (FieldKind::Extension, 2) => a,
            (FieldKind::Extension, p) => self.digitwise(a, Elem::ZERO, |x, _| (p - x) % p),
        }
    }

    pub fn sub(&self, a: Elem, b: Elem) -> Elem {
        self.add(a, self.neg(b))
    }

    pub fn mul(&self, a: Elem, b: Elem) -> Elem {
        if a.is_zero() || b.is_zero() {
            return Elem::ZERO;
        }
        match (self.kind, self.characteristic) {
            (FieldKind::Prime, p) => Elem(((a.0 as u64 * b.0 as u64) % p as u64) as u32),
            (FieldKind::Extension, 2) => Elem(self.clmul_reduce(a.0, b.0)),
            (FieldKind::Extension, _) => self.poly_mul(a, b),
        }
    }

    pub fn inv(&self, a: Elem) -> Result<Elem, FieldError> {
        if a.is_zero() {
            return Err(FieldError::InverseOfZero);
        }
        Ok(self.pow_unsigned(a, self.order as u64 - 2))
    }

    pub fn div(&self, a: Elem, b: Elem) -> Result<Elem, FieldError> {
        Ok(self.mul(a, self.inv(b)?))
    }

    /// `a^e` for a signed exponent; nonzero bases reduce `e` modulo `q - 1`.
    pub fn pow(&self, a: Elem, e: i64) -> Result<Elem, FieldError> {
        if a.is_zero() {
            return match e {
                0 => Ok(Elem::ONE),
                e if e > 0 => Ok(Elem::ZERO),
                _ => Err(FieldError::InverseOfZero),
            };
        }
        let e = e.rem_euclid(self.order as i64 - 1) as u64;
        Ok(self.pow_unsigned(a, e))
    }

    /// Power of the primitive element, `a^e` with `e` taken modulo `q - 1`.
    pub fn exp(&self, e: i64) -> Elem {
        let e = e.rem_euclid(self.order as i64 - 1) as u64;
        self.pow_unsigned(self.primitive, e)
    }

    /// Multiplicative order of a nonzero element, by repeated multiplication.
    pub fn multiplicative_order(&self, a: Elem) -> Option<u32> {
        if a.is_zero() {
            return None;
        }
        let mut x = a;
        let mut n = 1;
        while x != Elem::ONE {
            x = self.mul(x, a);
            n += 1;
        }
        Some(n)
    }

    fn pow_unsigned(&self, mut base: Elem, mut e: u64) -> Elem {
        let mut acc = Elem::ONE;
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            e >>= 1;
        }
        acc
    }

    fn clmul_reduce(&self, a: u32, b: u32) -> u32 {
        let mut product = 0u32;
        for i in 0..self.degree {
            if (b >> i) & 1 == 1 {
                product ^= a << i;
            }
        }
        let mask = BINARY_MODULI[self.degree as usize];
        for bit in (self.degree..2 * self.degree).rev() {
            if (product >> bit) & 1 == 1 {
                product ^= mask << (bit - self.degree);
            }
        }
        product
    }

    fn digits(&self, a: Elem) -> Vec<u32> {
        let p = self.characteristic;
        let mut v = a.0;
        (0..self.degree)
            .map(|_| {
                let d = v % p;
                v /= p;
                d
            })
            .collect()
    }

    fn from_digits(&self, digits: &[u32]) -> Elem {
        let p = self.characteristic;
        Elem(digits.iter().rev().fold(0, |acc, &d| acc * p + d))
    }

    fn digitwise(&self, a: Elem, b: Elem, op: impl Fn(u32, u32) -> u32) -> Elem {
        let (da, db) = (self.digits(a), self.digits(b));
        let out: Vec<u32> = da.iter().zip(&db).map(|(&x, &y)| op(x, y)).collect();
        self.from_digits(&out)
    }

    fn poly_mul(&self, a: Elem, b: Elem) -> Elem {
        let p = self.characteristic;
        let d = self.degree as usize;
        let (da, db) = (self.digits(a), self.digits(b));
        let mut prod = vec![0u32; 2 * d - 1];
        for (i, &x) in da.iter().enumerate() {
            for (j, &y) in db.iter().enumerate() {
                prod[i + j] = (prod[i + j] + x * y) % p;
            }
        }
        // modulus is monic: x^d = -(m_0 + ... + m_{d-1} x^{d-1})
        for top in (d..prod.len()).rev() {
            let c = prod[top];
            if c == 0 {
                continue;
            }
            prod[top] = 0;
            for (i, &m) in self.modulus[..d].iter().enumerate() {
                let idx = top - d + i;
                prod[idx] = (prod[idx] + (p - c) * m) % p;
            }
        }
        self.from_digits(&prod[..d])
    }
}

impl fmt::Display for Field {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.token())
    }
}

impl FromStr for Field {
    type Err = FieldError;

    /// Accepts `gf(p)`, `gf(2^w)`, `gf(3^2)` and plain orders such as `gf(16)`.
    fn from_str(s: &str) -> Result<Field, FieldError> {
        let bad = || FieldError::BadToken(s.to_string());
        let inner = s
            .trim()
            .strip_prefix("gf(")
            .and_then(|rest| rest.strip_suffix(')'))
            .ok_or_else(bad)?;
        let order = match inner.split_once('^') {
            Some((base, exp)) => {
                let base: u64 = base.trim().parse().map_err(|_| bad())?;
                let exp: u32 = exp.trim().parse().map_err(|_| bad())?;
                if base == 2 {
                    return Field::binary(exp);
                }
                base.checked_pow(exp).ok_or_else(bad)?
            }
            None => inner.trim().parse().map_err(|_| bad())?,
        };
        Field::with_order(order)
    }
}

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

fn least_primitive_root(p: u32) -> u32 {
    if p == 2 {
        return 1;
    }
    let phi = (p - 1) as u64;
    let mut factors = Vec::new();
    let mut n = phi;
    let mut d = 2;
    while d * d <= n {
        if n % d == 0 {
            factors.push(d);
            while n % d == 0 {
                n /= d;
            }
        }
        d += 1;
    }
    if n > 1 {
        factors.push(n);
    }
    let modpow = |mut b: u64, mut e: u64| {
        let mut acc = 1u64;
        b %= p as u64;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc * b % p as u64;
            }
            b = b * b % p as u64;
            e >>= 1;
        }
        acc
    };
    (2..p)
        .find(|&g| factors.iter().all(|&f| modpow(g as u64, phi / f) != 1))
        .expect("every prime field has a primitive root")
}
