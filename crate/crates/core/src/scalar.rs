//! Scalar types shared by the exact and floating pipelines.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use thiserror::Error;

/// Exact rational number.
pub type Q = BigRational;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("malformed rational literal {literal:?}")]
pub struct RationalParseError {
    pub literal: String,
}

/// Parses `[-]digits[/digits]`. Floats and exponents are rejected.
pub fn parse_rational(s: &str) -> Result<Q, RationalParseError> {
    let err = || RationalParseError { literal: s.to_string() };
    let t = s.trim();
    let (neg, body) = match t.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, t),
    };
    let (num, den) = match body.split_once('/') {
        Some((n, d)) => (n, Some(d)),
        None => (body, None),
    };
    let digits = |d: &str| !d.is_empty() && d.bytes().all(|b| b.is_ascii_digit());
    if !digits(num) || den.is_some_and(|d| !digits(d)) {
        return Err(err());
    }
    let n: BigInt = num.parse().map_err(|_| err())?;
    let d: BigInt = match den {
        Some(d) => d.parse().map_err(|_| err())?,
        None => BigInt::one(),
    };
    if d.is_zero() {
        return Err(err());
    }
    let q = Q::new(n, d);
    Ok(if neg { -q } else { q })
}

/// Renders as `p/q` (or `p` when the denominator is one).
pub fn format_rational(q: &Q) -> String {
    if q.denom().is_one() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

pub fn q_to_f64(q: &Q) -> f64 {
    q.to_f64().unwrap_or_else(|| {
        // huge numerators/denominators: scale down through the ratio of bit lengths
        let n = q.numer().to_f64().unwrap_or(f64::INFINITY);
        let d = q.denom().to_f64().unwrap_or(f64::INFINITY);
        n / d
    })
}

pub fn qi(n: i64) -> Q {
    Q::from_integer(BigInt::from(n))
}

pub fn qr(n: i64, d: i64) -> Q {
    Q::new(BigInt::from(n), BigInt::from(d))
}

/// Commutative ring operations used by the generic jet recursion.
///
/// Implemented for exact rationals, `f64`, and multivariate polynomials, so the
/// same recursion builds symbolic constraint systems, solves branches in
/// parameter space, and evaluates numerically.
pub trait Ring: Clone + std::fmt::Debug {
    fn ring_zero() -> Self;
    fn from_rational(q: &Q) -> Self;
    fn add(&self, other: &Self) -> Self;
    fn sub(&self, other: &Self) -> Self;
    fn mul(&self, other: &Self) -> Self;
    fn neg(&self) -> Self;
    fn is_ring_zero(&self) -> bool;

    fn scale_int(&self, k: i64) -> Self {
        self.mul(&Self::from_rational(&qi(k)))
    }

    fn scale_q(&self, k: &Q) -> Self {
        self.mul(&Self::from_rational(k))
    }
}

impl Ring for Q {
    fn ring_zero() -> Self {
        Zero::zero()
    }
    fn from_rational(q: &Q) -> Self {
        q.clone()
    }
    fn add(&self, other: &Self) -> Self {
        self + other
    }
    fn sub(&self, other: &Self) -> Self {
        self - other
    }
    fn mul(&self, other: &Self) -> Self {
        self * other
    }
    fn neg(&self) -> Self {
        -self
    }
    fn is_ring_zero(&self) -> bool {
        Zero::is_zero(self)
    }
}

impl Ring for f64 {
    fn ring_zero() -> Self {
        0.0
    }
    fn from_rational(q: &Q) -> Self {
        q_to_f64(q)
    }
    fn add(&self, other: &Self) -> Self {
        self + other
    }
    fn sub(&self, other: &Self) -> Self {
        self - other
    }
    fn mul(&self, other: &Self) -> Self {
        self * other
    }
    fn neg(&self) -> Self {
        -self
    }
    fn is_ring_zero(&self) -> bool {
        *self == 0.0
    }
}
