//! Generalized pseudoellipsoids, their unbounded (Siegel-type) models and
//! the Cayley-type transform between them.
//!
//! Bounded model: `|z|^2 + sum_{j<N} ||w_j||^{2 a_j} + ||w_N||^2 < 1`.
//! Unbounded model: `Im z > |||w|||^{2a}` with the same block weights.
//! Block indices are 0-based throughout the crate; the last block always has
//! exponent 1.

use std::fmt;
use std::path::Path;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const DEFAULT_BOUNDARY_TOL: f64 = 1e-9;
pub const DEFAULT_SP_MARGIN: f64 = 1e-2;

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Shape data of a domain: block dimensions and exponents.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct BlockSignature {
    dims: Vec<usize>,
    exponents: Vec<u32>,
}

/// On-disk form: `exponents` lists only the first N-1 exponents.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SignatureFile {
    pub blocks: Vec<usize>,
    #[serde(default)]
    pub exponents: Vec<u32>,
}

impl SignatureFile {
    pub fn into_signature(self) -> Result<BlockSignature> {
        BlockSignature::new(self.blocks, self.exponents)
    }
}

impl From<&BlockSignature> for SignatureFile {
    fn from(sig: &BlockSignature) -> Self {
        Self {
            blocks: sig.dims.clone(),
            exponents: sig.exponents[..sig.exponents.len() - 1].to_vec(),
        }
    }
}

impl BlockSignature {
    /// `leading_exponents` are the exponents of blocks `0..N-1`; the last
    /// block gets exponent 1.
    pub fn new(dims: Vec<usize>, leading_exponents: Vec<u32>) -> Result<Self> {
        if dims.is_empty() {
            return Err(Error::InvalidSignature("`blocks` must list at least one block".into()));
        }
        if leading_exponents.len() + 1 != dims.len() {
            return Err(Error::InvalidSignature(format!(
                "`exponents` must have {} entries (one per block except the last), got {}",
                dims.len() - 1,
                leading_exponents.len()
            )));
        }
        if let Some(j) = dims.iter().position(|&m| m == 0) {
            return Err(Error::InvalidSignature(format!(
                "`blocks` entry {} is 0; block dimensions must be positive",
                j + 1
            )));
        }
        if let Some(j) = leading_exponents.iter().position(|&a| a < 2) {
            return Err(Error::InvalidSignature(format!(
                "`exponents` entry {} is {}; exponents of the first N-1 blocks must be >= 2",
                j + 1,
                leading_exponents[j]
            )));
        }
        let mut exponents = leading_exponents;
        exponents.push(1);
        Ok(Self { dims, exponents })
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        let file: SignatureFile =
            toml::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        file.into_signature()
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(&SignatureFile::from(self)).expect("signature serializes")
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
        Self::from_toml_str(&text).map_err(|e| match e {
            Error::Parse(msg) => Error::Parse(format!("{}: {msg}", path.display())),
            Error::InvalidSignature(msg) => {
                Error::InvalidSignature(format!("{}: {msg}", path.display()))
            }
            other => other,
        })
    }

    pub fn n_blocks(&self) -> usize {
        self.dims.len()
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn dim(&self, block: usize) -> usize {
        self.dims[block]
    }

    /// Full exponent list, last entry 1.
    pub fn exponents(&self) -> &[u32] {
        &self.exponents
    }

    pub fn exponent(&self, block: usize) -> u32 {
        self.exponents[block]
    }

    /// `m = sum m_j`.
    pub fn total_dim(&self) -> usize {
        self.dims.iter().sum()
    }

    /// Offset of each block inside the flattened `w` vector.
    pub fn offsets(&self) -> Vec<usize> {
        self.dims
            .iter()
            .scan(0, |acc, &m| {
                let start = *acc;
                *acc += m;
                Some(start)
            })
            .collect()
    }

    pub fn check_blocks(&self, w: &[Vec<Complex64>]) -> Result<()> {
        if w.len() != self.dims.len()
            || w.iter().zip(&self.dims).any(|(block, &m)| block.len() != m)
        {
            let got: Vec<usize> = w.iter().map(Vec::len).collect();
            return Err(Error::ShapeMismatch(format!(
                "blocks {got:?} do not match signature {:?}",
                self.dims
            )));
        }
        Ok(())
    }

    /// Splits a flat coordinate vector into blocks.
    pub fn split(&self, flat: &[Complex64]) -> Result<Vec<Vec<Complex64>>> {
        if flat.len() != self.total_dim() {
            return Err(Error::ShapeMismatch(format!(
                "expected {} coordinates, got {}",
                self.total_dim(),
                flat.len()
            )));
        }
        let mut rest = flat;
        Ok(self
            .dims
            .iter()
            .map(|&m| {
                let (head, tail) = rest.split_at(m);
                rest = tail;
                head.to_vec()
            })
            .collect())
    }
}

impl fmt::Display for BlockSignature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "blocks={:?} exponents={:?}", self.dims, self.exponents)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Model {
    Bounded,
    Unbounded,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum PointClass {
    Interior,
    Boundary,
    Exterior,
}

/// A point `(z, w_1, ..., w_N)` of `C x C^{m_1} x ... x C^{m_N}`.
#[derive(Clone, Debug, PartialEq)]
pub struct AmbientPoint {
    pub z: Complex64,
    pub w: Vec<Vec<Complex64>>,
    pub model: Model,
}

impl AmbientPoint {
    pub fn new(z: Complex64, w: Vec<Vec<Complex64>>, model: Model) -> Self {
        Self { z, w, model }
    }

    pub fn origin(sig: &BlockSignature, model: Model) -> Self {
        Self {
            z: Complex64::new(0.0, 0.0),
            w: sig.dims().iter().map(|&m| vec![Complex64::new(0.0, 0.0); m]).collect(),
            model,
        }
    }

    pub fn flat_w(&self) -> Vec<Complex64> {
        self.w.iter().flatten().copied().collect()
    }

    /// Largest componentwise modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        let mut worst = (self.z - other.z).norm();
        for (a, b) in self.w.iter().zip(&other.w) {
            for (x, y) in a.iter().zip(b) {
                worst = worst.max((x - y).norm());
            }
        }
        if self.w.len() != other.w.len()
            || self.w.iter().zip(&other.w).any(|(a, b)| a.len() != b.len())
        {
            return f64::INFINITY;
        }
        worst
    }
}

/// A point of the unbounded boundary in the coordinates `(x, w)`, standing for
/// `(x + i |||w|||^{2a}, w)`.
#[derive(Clone, Debug, PartialEq)]
pub struct BoundaryPoint {
    pub x: f64,
    pub w: Vec<Vec<Complex64>>,
}

impl BoundaryPoint {
    pub fn new(x: f64, w: Vec<Vec<Complex64>>) -> Self {
        Self { x, w }
    }

    pub fn to_ambient(&self, sig: &BlockSignature) -> Result<AmbientPoint> {
        let rho = block_norm_sum(sig, &self.w)?;
        Ok(AmbientPoint::new(
            Complex64::new(self.x, rho),
            self.w.clone(),
            Model::Unbounded,
        ))
    }

    pub fn block_norm_sq(&self, block: usize) -> f64 {
        norm_sq(&self.w[block])
    }

    pub fn is_strongly_pseudoconvex(&self, sp_margin: f64) -> bool {
        self.w.iter().all(|b| norm_sq(b).sqrt() >= sp_margin)
    }
}

pub(crate) fn norm_sq(v: &[Complex64]) -> f64 {
    v.iter().map(|c| c.norm_sqr()).sum()
}

/// `|||w|||^{2a} = sum_j ||w_j||^{2 a_j}`.
pub fn block_norm_sum(sig: &BlockSignature, w: &[Vec<Complex64>]) -> Result<f64> {
    sig.check_blocks(w)?;
    Ok(w.iter()
        .zip(sig.exponents())
        .map(|(block, &a)| norm_sq(block).powi(a as i32))
        .sum())
}

/// `R(z, w) = |z|^2 + |||w|||^{2a} - 1`, negative inside the bounded model.
pub fn defining_r(sig: &BlockSignature, p: &AmbientPoint) -> Result<f64> {
    require_model(p, Model::Bounded)?;
    Ok(p.z.norm_sqr() + block_norm_sum(sig, &p.w)? - 1.0)
}

/// `|||w|||^{2a} - Im z`, negative inside the unbounded model.
pub fn defining_unbounded(sig: &BlockSignature, p: &AmbientPoint) -> Result<f64> {
    require_model(p, Model::Unbounded)?;
    Ok(block_norm_sum(sig, &p.w)? - p.z.im)
}

/// Defining function of whichever model `p` lives in.
pub fn defining_function(sig: &BlockSignature, p: &AmbientPoint) -> Result<f64> {
    match p.model {
        Model::Bounded => defining_r(sig, p),
        Model::Unbounded => defining_unbounded(sig, p),
    }
}

pub fn classify_point(sig: &BlockSignature, p: &AmbientPoint, tol: f64) -> Result<PointClass> {
    if !(tol > 0.0) {
        return Err(Error::Precondition(format!("tolerance must be positive, got {tol}")));
    }
    let r = defining_function(sig, p)?;
    Ok(if r.abs() <= tol {
        PointClass::Boundary
    } else if r < 0.0 {
        PointClass::Interior
    } else {
        PointClass::Exterior
    })
}

fn require_model(p: &AmbientPoint, model: Model) -> Result<()> {
    if p.model != model {
        return Err(Error::ShapeMismatch(format!(
            "expected a point of the {model:?} model, got {:?}",
            p.model
        )));
    }
    Ok(())
}

/// Principal branch of `base^(1/a)`.
fn principal_root(base: Complex64, a: u32) -> Complex64 {
    if a == 1 {
        base
    } else {
        base.powf(1.0 / a as f64)
    }
}

/// Unbounded model to bounded model.
pub fn cayley(sig: &BlockSignature, p: &AmbientPoint) -> Result<AmbientPoint> {
    require_model(p, Model::Unbounded)?;
    sig.check_blocks(&p.w)?;
    let denom = I + p.z;
    if denom.norm() == 0.0 {
        return Err(Error::Pole);
    }
    let w = p
        .w
        .iter()
        .zip(sig.exponents())
        .map(|(block, &a)| {
            let scale = 2f64.powf(1.0 / a as f64) / principal_root(denom, a);
            block.iter().map(|c| c * scale).collect()
        })
        .collect();
    Ok(AmbientPoint::new((I - p.z) / denom, w, Model::Bounded))
}

/// Bounded model to unbounded model; `z = -1` is the pole.
pub fn cayley_inverse(sig: &BlockSignature, p: &AmbientPoint) -> Result<AmbientPoint> {
    require_model(p, Model::Bounded)?;
    sig.check_blocks(&p.w)?;
    let one_plus = Complex64::new(1.0, 0.0) + p.z;
    if one_plus.norm() == 0.0 {
        return Err(Error::Pole);
    }
    let z = I * (Complex64::new(1.0, 0.0) - p.z) / one_plus;
    let denom = I + z;
    let w = p
        .w
        .iter()
        .zip(sig.exponents())
        .map(|(block, &a)| {
            let scale = principal_root(denom, a) / 2f64.powf(1.0 / a as f64);
            block.iter().map(|c| c * scale).collect()
        })
        .collect();
    Ok(AmbientPoint::new(z, w, Model::Unbounded))
}

fn disc_point(rng: &mut ChaCha8Rng) -> Complex64 {
    let r = rng.random::<f64>().sqrt();
    let t = rng.random_range(0.0..std::f64::consts::TAU);
    Complex64::from_polar(r, t)
}

/// Random direction on the unit sphere of `C^m` (never zero).
fn unit_vector(rng: &mut ChaCha8Rng, m: usize) -> Vec<Complex64> {
    loop {
        let v: Vec<Complex64> = (0..m).map(|_| disc_point(rng)).collect();
        let n = norm_sq(&v).sqrt();
        if n > 1e-3 {
            return v.into_iter().map(|c| c / n).collect();
        }
    }
}

/// Deterministic boundary samples away from the vanishing-block locus.
///
/// Entries are drawn in the unit disc, each block is rescaled to a norm drawn
/// uniformly from `[2 sp_margin, 1]`, and `x` is uniform in `[-1, 1]`.
pub fn sample_boundary(
    sig: &BlockSignature,
    count: usize,
    seed: u64,
    sp_margin: f64,
) -> Result<Vec<BoundaryPoint>> {
    if count == 0 {
        return Err(Error::Precondition("sample count must be at least 1".into()));
    }
    if !(sp_margin > 0.0 && sp_margin < 0.5) {
        return Err(Error::Precondition(format!(
            "sp_margin must lie in (0, 0.5), got {sp_margin}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok((0..count)
        .map(|_| {
            let w = sig
                .dims()
                .iter()
                .map(|&m| {
                    let s = rng.random_range(2.0 * sp_margin..=1.0);
                    unit_vector(&mut rng, m).into_iter().map(|c| c * s).collect()
                })
                .collect();
            BoundaryPoint::new(rng.random_range(-1.0..=1.0), w)
        })
        .collect())
}

/// Interior points of the unbounded model: a boundary sample lifted by
/// `Im z += t` with `t` uniform in `[0.01, 1]`.
pub fn sample_interior_unbounded(
    sig: &BlockSignature,
    count: usize,
    seed: u64,
    sp_margin: f64,
) -> Result<Vec<AmbientPoint>> {
    let base = sample_boundary(sig, count, seed, sp_margin)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9e37_79b9_7f4a_7c15);
    base.iter()
        .map(|b| {
            let mut p = b.to_ambient(sig)?;
            p.z.im += rng.random_range(0.01..=1.0);
            Ok(p)
        })
        .collect()
}

/// Interior points of the bounded model with `R <= -(1 - fill)`.
///
/// The budget `fill` is split at random among `|z|^2` and the block terms
/// `||w_j||^{2 a_j}`, so every block is reached with comparable probability.
pub fn sample_interior_bounded(
    sig: &BlockSignature,
    count: usize,
    seed: u64,
    fill: f64,
) -> Result<Vec<AmbientPoint>> {
    if count == 0 {
        return Err(Error::Precondition("sample count must be at least 1".into()));
    }
    if !(fill > 0.0 && fill < 1.0) {
        return Err(Error::Precondition(format!("fill must lie in (0, 1), got {fill}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok((0..count)
        .map(|_| {
            let budget = fill * rng.random::<f64>();
            let weights: Vec<f64> = (0..=sig.n_blocks())
                .map(|_| -rng.random::<f64>().max(1e-12).ln())
                .collect();
            let total: f64 = weights.iter().sum();
            let share: Vec<f64> = weights.iter().map(|x| budget * x / total).collect();
            let z = Complex64::from_polar(
                share[0].sqrt(),
                rng.random_range(0.0..std::f64::consts::TAU),
            );
            let w = sig
                .dims()
                .iter()
                .zip(sig.exponents())
                .zip(&share[1..])
                .map(|((&m, &a), &s)| {
                    let norm = s.powf(1.0 / (2.0 * a as f64));
                    unit_vector(&mut rng, m).into_iter().map(|c| c * norm).collect()
                })
                .collect();
            AmbientPoint::new(z, w, Model::Bounded)
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn sig(dims: &[usize], exps: &[u32]) -> BlockSignature {
        BlockSignature::new(dims.to_vec(), exps.to_vec()).unwrap()
    }

    #[test]
    fn signature_validation() {
        assert!(BlockSignature::new(vec![], vec![]).is_err());
        assert!(BlockSignature::new(vec![2, 2], vec![1]).is_err());
        assert!(BlockSignature::new(vec![2, 0], vec![2]).is_err());
        assert!(BlockSignature::new(vec![2, 2], vec![2, 3]).is_err());
        let s = sig(&[2, 3, 1], &[4, 6]);
        assert_eq!(s.exponents(), &[4, 6, 1]);
        assert_eq!(s.total_dim(), 6);
        assert_eq!(s.offsets(), vec![0, 2, 5]);
    }

    #[test]
    fn signature_file_round_trip() {
        let s = sig(&[2, 3, 1], &[4, 6]);
        let text = s.to_toml_string();
        assert_eq!(BlockSignature::from_toml_str(&text).unwrap(), s);
        let err = BlockSignature::from_toml_str("blocks = [2, 2]\nexponents = [1]\n").unwrap_err();
        assert!(err.to_string().contains("`exponents` entry 1"), "{err}");
        let err = BlockSignature::from_toml_str("blocks = [2,\n").unwrap_err();
        assert!(matches!(err, Error::Parse(_)));
    }

    #[test]
    fn defining_function_examples() {
        let s = sig(&[2, 1], &[2]);
        let origin = AmbientPoint::origin(&s, Model::Bounded);
        assert_eq!(defining_r(&s, &origin).unwrap(), -1.0);
        let mut p = origin.clone();
        p.z = c(1.0, 0.0);
        assert_eq!(defining_r(&s, &p).unwrap(), 0.0);
        assert_eq!(classify_point(&s, &origin, 1e-9).unwrap(), PointClass::Interior);
        assert_eq!(classify_point(&s, &p, 1e-9).unwrap(), PointClass::Boundary);
    }

    #[test]
    fn block_norm_sum_examples() {
        let s = sig(&[2, 1], &[2]);
        let w = vec![vec![c(1.0, 0.0), c(0.0, 0.0)], vec![c(2.0, 0.0)]];
        assert_eq!(block_norm_sum(&s, &w).unwrap(), 5.0);
        let zero = vec![vec![c(0.0, 0.0); 2], vec![c(0.0, 0.0)]];
        assert_eq!(block_norm_sum(&s, &zero).unwrap(), 0.0);
        let single = sig(&[3], &[]);
        let w = vec![vec![c(1.0, 1.0), c(0.0, 2.0), c(0.5, 0.0)]];
        assert!((block_norm_sum(&single, &w).unwrap() - 6.25).abs() < 1e-15);
        assert!(block_norm_sum(&s, &[vec![c(1.0, 0.0)]]).is_err());
    }

    #[test]
    fn unbounded_classification() {
        let s = sig(&[2, 1], &[3]);
        let w = vec![vec![c(0.3, 0.1), c(-0.2, 0.4)], vec![c(0.5, 0.5)]];
        let rho = block_norm_sum(&s, &w).unwrap();
        let on = AmbientPoint::new(c(0.7, rho), w.clone(), Model::Unbounded);
        assert_eq!(classify_point(&s, &on, 1e-12).unwrap(), PointClass::Boundary);
        let below = AmbientPoint::new(c(0.0, -1.0), AmbientPoint::origin(&s, Model::Unbounded).w, Model::Unbounded);
        assert_eq!(classify_point(&s, &below, 1e-9).unwrap(), PointClass::Exterior);
        assert!(classify_point(&s, &on, 0.0).is_err());
    }

    #[test]
    fn cayley_base_points() {
        let s = sig(&[2, 2], &[3]);
        let p = AmbientPoint::new(c(0.0, 1.0), AmbientPoint::origin(&s, Model::Unbounded).w, Model::Unbounded);
        let image = cayley(&s, &p).unwrap();
        assert!(image.max_abs_diff(&AmbientPoint::origin(&s, Model::Bounded)) < 1e-15);
        let back = cayley_inverse(&s, &AmbientPoint::origin(&s, Model::Bounded)).unwrap();
        assert!(back.max_abs_diff(&p) < 1e-15);
        let mut pole = AmbientPoint::origin(&s, Model::Bounded);
        pole.z = c(-1.0, 0.0);
        assert_eq!(cayley_inverse(&s, &pole), Err(Error::Pole));
        let mut upole = AmbientPoint::origin(&s, Model::Unbounded);
        upole.z = c(0.0, -1.0);
        assert_eq!(cayley(&s, &upole), Err(Error::Pole));
    }

    #[test]
    fn cayley_round_trip_and_boundary() {
        let s = sig(&[2, 3, 1], &[2, 4]);
        for p in sample_interior_bounded(&s, 200, 7, 0.95).unwrap() {
            let back = cayley(&s, &cayley_inverse(&s, &p).unwrap()).unwrap();
            assert!(back.max_abs_diff(&p) < 1e-12);
            assert!(defining_r(&s, &p).unwrap() < 0.0);
        }
        for b in sample_boundary(&s, 200, 8, DEFAULT_SP_MARGIN).unwrap() {
            let p = b.to_ambient(&s).unwrap();
            let image = cayley(&s, &p).unwrap();
            assert!(defining_r(&s, &image).unwrap().abs() < 1e-10);
        }
        for p in sample_interior_unbounded(&s, 200, 9, DEFAULT_SP_MARGIN).unwrap() {
            let image = cayley(&s, &p).unwrap();
            assert_eq!(classify_point(&s, &image, 1e-12).unwrap(), PointClass::Interior);
        }
    }

    #[test]
    fn boundary_sampling_is_deterministic_and_strongly_pseudoconvex() {
        let s = sig(&[2, 2, 1], &[2, 3]);
        let a = sample_boundary(&s, 50, 42, DEFAULT_SP_MARGIN).unwrap();
        let b = sample_boundary(&s, 50, 42, DEFAULT_SP_MARGIN).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, sample_boundary(&s, 50, 43, DEFAULT_SP_MARGIN).unwrap());
        for p in &a {
            assert!(p.is_strongly_pseudoconvex(DEFAULT_SP_MARGIN));
            assert!(p.x.abs() <= 1.0);
            let amb = p.to_ambient(&s).unwrap();
            assert_eq!(classify_point(&s, &amb, DEFAULT_BOUNDARY_TOL).unwrap(), PointClass::Boundary);
        }
        assert!(sample_boundary(&s, 0, 1, 0.01).is_err());
        assert!(sample_boundary(&s, 1, 1, 0.0).is_err());
    }

    #[test]
    fn interior_rejection_oracle() {
        // Independent check: rejection-sample the unit polydisc and keep points
        // with R < 0; every kept point must classify as interior.
        let s = sig(&[1, 1], &[2]);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut kept = 0;
        for _ in 0..2000 {
            let z = disc_point(&mut rng);
            let w = vec![vec![disc_point(&mut rng)], vec![disc_point(&mut rng)]];
            let r = z.norm_sqr() + w[0][0].norm_sqr().powi(2) + w[1][0].norm_sqr() - 1.0;
            if r < -1e-6 {
                kept += 1;
                let p = AmbientPoint::new(z, w, Model::Bounded);
                assert_eq!(classify_point(&s, &p, 1e-9).unwrap(), PointClass::Interior);
            }
        }
        assert!(kept > 100);
    }
}
