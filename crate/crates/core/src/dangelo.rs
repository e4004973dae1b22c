//! D'Angelo's homogeneous proper maps `H_M : B^m -> B^{T(M, m)}`.
//!
//! `H_M(z)` lists `sqrt(M!/p!) z^p` over all `|p| = M` in graded-lex
//! descending order and satisfies `||H_M(z)||^2 = ||z||^{2M}`.

use std::collections::HashMap;

use num_complex::Complex64;
use num_traits::{pow, Zero};

use crate::arith::{
    coeff_c_squared, enumerate_degree, GaussianRational, MultiIndex, Rational, SurdScalar,
};
use crate::error::{Error, Result};

/// A homogeneous monomial map with exact coefficients.
#[derive(Clone, Debug, PartialEq)]
pub struct MonomialMap {
    source_dim: usize,
    degree: u32,
    terms: Vec<(SurdScalar, MultiIndex)>,
}

impl MonomialMap {
    pub fn source_dim(&self) -> usize {
        self.source_dim
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }

    pub fn target_dim(&self) -> usize {
        self.terms.len()
    }

    pub fn terms(&self) -> &[(SurdScalar, MultiIndex)] {
        &self.terms
    }
}

/// Pairwise products in the order `(v_1 v_1, v_2 v_1, ..., v_n v_1, v_1 v_2, ..., v_n v_n)`.
/// Monomials are exponent vectors; equal monomials are kept as separate slots.
pub fn tensor_product(a: &[MultiIndex], b: &[MultiIndex]) -> Vec<MultiIndex> {
    b.iter()
        .flat_map(|right| a.iter().map(move |left| left.add(right)))
        .collect()
}

pub fn tensor_square(v: &[MultiIndex]) -> Vec<MultiIndex> {
    tensor_product(v, v)
}

/// `z^{(x) degree}` before collection: `m^degree` slots.
pub fn tensor_power(m: usize, degree: u32) -> Vec<MultiIndex> {
    let base: Vec<MultiIndex> = (0..m).map(|i| MultiIndex::unit(m, i)).collect();
    (1..degree).fold(base.clone(), |acc, _| tensor_product(&acc, &base))
}

/// `H_M` on `C^m` in collected form.
pub fn h_map(m: usize, degree: u32) -> Result<MonomialMap> {
    if m == 0 {
        return Err(Error::Precondition("source dimension must be positive".into()));
    }
    if degree == 0 {
        return Err(Error::Precondition(
            "degree 0 (constant block) is outside the classification".into(),
        ));
    }
    let terms = enumerate_degree(m, degree)
        .into_iter()
        .map(|p| {
            let c2 = coeff_c_squared(degree, &p)?;
            Ok((SurdScalar::sqrt_of(c2)?, p))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(MonomialMap {
        source_dim: m,
        degree,
        terms,
    })
}

/// Builds `H_M` by expanding the raw tensor power and collecting equal
/// monomials: `k` unit-coefficient copies of `z^p` collapse to `sqrt(k) z^p`.
pub fn h_map_from_tensor_power(m: usize, degree: u32) -> Result<MonomialMap> {
    if m == 0 || degree == 0 {
        return Err(Error::Precondition("need m >= 1 and M >= 1".into()));
    }
    let mut multiplicity: HashMap<MultiIndex, i64> = HashMap::new();
    for p in tensor_power(m, degree) {
        *multiplicity.entry(p).or_default() += 1;
    }
    let mut terms = multiplicity
        .into_iter()
        .map(|(p, k)| Ok((SurdScalar::sqrt_of(Rational::from_integer(k.into()))?, p)))
        .collect::<Result<Vec<_>>>()?;
    terms.sort_by(|a, b| b.1.cmp(&a.1));
    Ok(MonomialMap {
        source_dim: m,
        degree,
        terms,
    })
}

pub fn monomial_value(p: &MultiIndex, z: &[Complex64]) -> Complex64 {
    p.entries()
        .iter()
        .zip(z)
        .fold(Complex64::new(1.0, 0.0), |acc, (&e, zi)| acc * zi.powu(e))
}

pub fn eval_h(h: &MonomialMap, z: &[Complex64]) -> Result<Vec<Complex64>> {
    if z.len() != h.source_dim {
        return Err(Error::ShapeMismatch(format!(
            "H_M expects {} variables, got {}",
            h.source_dim,
            z.len()
        )));
    }
    Ok(h.terms
        .iter()
        .map(|(c, p)| c.to_complex() * monomial_value(p, z))
        .collect())
}

/// `||H_M(z)||^2` computed exactly from the map's own coefficients.
pub fn squared_norm_exact(h: &MonomialMap, z: &[GaussianRational]) -> Result<Rational> {
    if z.len() != h.source_dim {
        return Err(Error::ShapeMismatch(format!(
            "H_M expects {} variables, got {}",
            h.source_dim,
            z.len()
        )));
    }
    let moduli: Vec<Rational> = z.iter().map(|zi| zi.norm_sqr()).collect();
    Ok(h.terms
        .iter()
        .map(|(c, p)| {
            p.entries()
                .iter()
                .zip(&moduli)
                .fold(c.squared_modulus(), |acc, (&e, r)| acc * pow(r.clone(), e as usize))
        })
        .sum())
}

/// Exact check of `||H_M(z)||^2 = ||z||^{2M}` at a Gaussian-rational point.
pub fn norm_identity_exact(m: usize, degree: u32, z: &[GaussianRational]) -> Result<bool> {
    let h = h_map(m, degree)?;
    let lhs = squared_norm_exact(&h, z)?;
    let base: Rational = z.iter().map(|zi| zi.norm_sqr()).fold(Rational::zero(), |a, b| a + b);
    Ok(lhs == pow(base, degree as usize))
}

/// Deterministic Gaussian-rational points: real and imaginary parts `p/q`
/// with `|p| <= 30`, `1 <= q <= 12`.
pub fn sample_gaussian_rational(m: usize, count: usize, seed: u64) -> Vec<Vec<GaussianRational>> {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut part = move || {
        let q: i64 = rng.random_range(1..=12);
        crate::arith::rational(rng.random_range(-30..=30), q)
    };
    (0..count)
        .map(|_| (0..m).map(|_| crate::arith::gaussian(part(), part())).collect())
        .collect()
}
