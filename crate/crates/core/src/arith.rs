//! Exact scalars and multi-index combinatorics.
//!
//! Coefficients of the D'Angelo maps are square roots of multinomial
//! coefficients, so the exact scalar type is `q * sqrt(r)` with `q` a Gaussian
//! rational and `r` a squarefree integer radicand. Everything squared-modulus
//! related stays in [`Rational`] and is compared with exact equality.

use std::cmp::Ordering;
use std::fmt;

use num_bigint::{BigInt, BigUint};
use num_complex::{Complex, Complex64};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Arbitrary precision rational, always in lowest terms with positive denominator.
pub type Rational = BigRational;

/// `re + i im` with rational parts.
pub type GaussianRational = Complex<Rational>;

pub fn rational(numer: i64, denom: i64) -> Rational {
    Rational::new(BigInt::from(numer), BigInt::from(denom))
}

pub fn rational_int(value: i64) -> Rational {
    Rational::from_integer(BigInt::from(value))
}

pub fn gaussian(re: Rational, im: Rational) -> GaussianRational {
    Complex::new(re, im)
}

pub fn rational_to_f64(r: &Rational) -> f64 {
    // Ratio::to_f64 handles huge numerators/denominators without overflow.
    r.to_f64().unwrap_or(f64::NAN)
}

pub fn gaussian_to_complex(q: &GaussianRational) -> Complex64 {
    Complex64::new(rational_to_f64(&q.re), rational_to_f64(&q.im))
}

/// Parses `"p"`, `"-p"` or `"p/q"`.
pub fn parse_rational(text: &str) -> Result<Rational> {
    let text = text.trim();
    let (num, den) = match text.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (text, "1"),
    };
    let num: BigInt = num
        .parse()
        .map_err(|_| Error::Parse(format!("bad rational numerator in {text:?}")))?;
    let den: BigInt = den
        .parse()
        .map_err(|_| Error::Parse(format!("bad rational denominator in {text:?}")))?;
    if den.is_zero() {
        return Err(Error::Parse(format!("zero denominator in {text:?}")));
    }
    Ok(Rational::new(num, den))
}

pub fn format_rational(r: &Rational) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

pub fn factorial(n: u32) -> BigUint {
    (1..=n).fold(BigUint::one(), |acc, k| acc * k)
}

/// Splits `n` as `square^2 * free` with `free` squarefree.
fn squarefree_split(n: &BigUint) -> (BigUint, BigUint) {
    let mut rest = n.clone();
    let mut square = BigUint::one();
    let mut free = BigUint::one();
    let mut d = BigUint::from(2u32);
    while &d * &d <= rest {
        let mut count = 0u32;
        while (&rest % &d).is_zero() {
            rest /= &d;
            count += 1;
        }
        for _ in 0..count / 2 {
            square *= &d;
        }
        if count % 2 == 1 {
            free *= &d;
        }
        d += 1u32;
    }
    free *= rest;
    (square, free)
}

/// Exact scalar `q * sqrt(radicand)`.
///
/// Canonical form: the radicand is a squarefree positive integer, and the
/// zero value is `(0, 1)`. Two canonical surds are in the same class iff
/// their radicands are equal.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct SurdScalar {
    q: GaussianRational,
    radicand: Rational,
}

impl SurdScalar {
    pub fn new(q: GaussianRational, radicand: Rational) -> Result<Self> {
        if radicand.is_negative() {
            return Err(Error::Precondition(format!(
                "surd radicand must be nonnegative, got {radicand}"
            )));
        }
        if q.is_zero() || radicand.is_zero() {
            return Ok(Self::zero());
        }
        // sqrt(n/d) = sqrt(n*d)/d, then pull squares out of n*d.
        let n = radicand.numer().to_biguint().expect("nonnegative");
        let d = radicand.denom().to_biguint().expect("positive");
        let (square, free) = squarefree_split(&(n * &d));
        let factor = Rational::new(BigInt::from(square), BigInt::from(d));
        let q = Complex::new(&q.re * &factor, &q.im * &factor);
        Ok(Self {
            q,
            radicand: Rational::from_integer(BigInt::from(free)),
        })
    }

    pub fn zero() -> Self {
        Self {
            q: Complex::zero(),
            radicand: Rational::one(),
        }
    }

    pub fn one() -> Self {
        Self::from_gaussian(Complex::one())
    }

    pub fn from_gaussian(q: GaussianRational) -> Self {
        Self::new(q, Rational::one()).expect("radicand 1 is valid")
    }

    pub fn from_rational(r: Rational) -> Self {
        Self::from_gaussian(Complex::new(r, Rational::zero()))
    }

    /// `sqrt(r)` for a nonnegative rational `r`.
    pub fn sqrt_of(r: Rational) -> Result<Self> {
        Self::new(Complex::one(), r)
    }

    pub fn q(&self) -> &GaussianRational {
        &self.q
    }

    pub fn radicand(&self) -> &Rational {
        &self.radicand
    }

    pub fn is_zero(&self) -> bool {
        self.q.is_zero()
    }

    /// `|q|^2 * radicand`, exact.
    pub fn squared_modulus(&self) -> Rational {
        self.q.norm_sqr() * &self.radicand
    }

    pub fn conj(&self) -> Self {
        Self {
            q: self.q.conj(),
            radicand: self.radicand.clone(),
        }
    }

    pub fn mul(&self, other: &Self) -> Self {
        Self::new(&self.q * &other.q, &self.radicand * &other.radicand)
            .expect("product of nonnegative radicands")
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        if self.is_zero() {
            return Ok(other.clone());
        }
        if other.is_zero() {
            return Ok(self.clone());
        }
        if self.radicand != other.radicand {
            return Err(Error::IncompatibleSurd(self.to_string(), other.to_string()));
        }
        Self::new(&self.q + &other.q, self.radicand.clone())
    }

    pub fn scale(&self, k: &Rational) -> Self {
        Self::new(
            Complex::new(&self.q.re * k, &self.q.im * k),
            self.radicand.clone(),
        )
        .expect("radicand unchanged")
    }

    pub fn to_complex(&self) -> Complex64 {
        gaussian_to_complex(&self.q) * rational_to_f64(&self.radicand).sqrt()
    }
}

impl fmt::Display for SurdScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let re = format_rational(&self.q.re);
        let im = format_rational(&self.q.im);
        let q = if self.q.im.is_zero() {
            re
        } else if self.q.re.is_zero() {
            format!("{im}i")
        } else {
            format!("({re}{}{}i)", if self.q.im.is_negative() { "" } else { "+" }, im)
        };
        if self.radicand.is_one() {
            write!(f, "{q}")
        } else if self.q.is_one() {
            write!(f, "sqrt({})", format_rational(&self.radicand))
        } else {
            write!(f, "{q}*sqrt({})", format_rational(&self.radicand))
        }
    }
}

/// Exponent vector. Ordered graded-lexicographically: total degree first,
/// then entries lexicographically.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct MultiIndex(pub Vec<u32>);

impl MultiIndex {
    pub fn zeros(len: usize) -> Self {
        Self(vec![0; len])
    }

    pub fn unit(len: usize, at: usize) -> Self {
        let mut e = vec![0; len];
        e[at] = 1;
        Self(e)
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn entries(&self) -> &[u32] {
        &self.0
    }

    pub fn add(&self, other: &Self) -> Self {
        Self(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }
}

impl Ord for MultiIndex {
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree()
            .cmp(&other.degree())
            .then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for MultiIndex {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (k, e) in self.0.iter().enumerate() {
            if k > 0 {
                write!(f, ",")?;
            }
            write!(f, "{e}")?;
        }
        write!(f, ")")
    }
}

/// Number of exponent vectors of length `m` and total degree `degree`:
/// `(degree + m - 1)! / (degree! (m - 1)!)`.
pub fn count_t(degree: u32, m: u32) -> Result<BigUint> {
    if degree == 0 {
        return Err(Error::Precondition(
            "degree 0 (constant block) is outside the classification".into(),
        ));
    }
    if m == 0 {
        return Err(Error::Precondition("block dimension must be positive".into()));
    }
    Ok(factorial(degree + m - 1) / (factorial(degree) * factorial(m - 1)))
}

/// `count_t` as a machine integer, for dimension comparisons.
pub fn count_t_usize(degree: u32, m: u32) -> Result<usize> {
    count_t(degree, m)?
        .to_usize()
        .ok_or_else(|| Error::Precondition("dimension count overflows usize".into()))
}

/// All exponent vectors of length `m` with total degree `degree`, first entry
/// descending (graded-lex descending).
pub fn enumerate_degree(m: usize, degree: u32) -> Vec<MultiIndex> {
    fn fill(prefix: &mut Vec<u32>, slots: usize, left: u32, out: &mut Vec<MultiIndex>) {
        if slots == 1 {
            prefix.push(left);
            out.push(MultiIndex(prefix.clone()));
            prefix.pop();
            return;
        }
        for first in (0..=left).rev() {
            prefix.push(first);
            fill(prefix, slots - 1, left - first, out);
            prefix.pop();
        }
    }
    assert!(m >= 1, "enumerate_degree needs m >= 1");
    let mut out = Vec::new();
    fill(&mut Vec::with_capacity(m), m, degree, &mut out);
    out
}

/// `degree! / (p_1! ... p_m!)`, the square of the D'Angelo coefficient.
pub fn coeff_c_squared(degree: u32, p: &MultiIndex) -> Result<Rational> {
    if p.degree() != degree {
        return Err(Error::Precondition(format!(
            "multi-index {p} has degree {} but {degree} was requested",
            p.degree()
        )));
    }
    let denom = p.0.iter().fold(BigUint::one(), |acc, &e| acc * factorial(e));
    let (quot, rem) = factorial(degree).div_rem(&denom);
    debug_assert!(rem.is_zero());
    Ok(Rational::from_integer(BigInt::from(quot)))
}
