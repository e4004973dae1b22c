//! Admissible `(sigma, M)` data, normal forms, automorphisms and sample-based
//! equivalence.
//!
//! Block indices are 0-based here. `sigma[j]` is the source block carried into
//! target block `j` for `j < N - 1`; the last block always goes to the last block.

use itertools::Itertools;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::arith::{count_t, MultiIndex};
use crate::dangelo::h_map;
use crate::error::{Error, Result};
use crate::geometry::{cayley, cayley_inverse, AmbientPoint, BlockSignature, Model};
use crate::holomap::{Coefficient, EvaluableMap, PolyMap, Polynomial, Term};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Tolerance for `U U^* = I`.
pub const UNITARY_TOL: f64 = 1e-12;

/// Printed with every empty admissible list.
pub const EMPTY_LIST_CAVEAT: &str = "No admissible (sigma, M) exists, so there is no proper holomorphic map \
between these domains that is holomorphic up to the boundary with all components nonconstant \
(source blocks j < N of dimension at least 2); maps outside these hypotheses are not ruled out.";

#[derive(Clone, Debug, PartialEq)]
pub struct ClassificationProblem {
    source: BlockSignature,
    target: BlockSignature,
}

impl ClassificationProblem {
    pub fn new(source: BlockSignature, target: BlockSignature) -> Result<Self> {
        if source.n_blocks() != target.n_blocks() {
            return Err(Error::StructureMismatch(format!(
                "source has {} blocks, target has {}",
                source.n_blocks(),
                target.n_blocks()
            )));
        }
        let n = source.n_blocks();
        if let Some(j) = (0..n - 1).find(|&j| source.dim(j) < 2) {
            return Err(Error::HypothesisViolation(format!(
                "source block {} has dimension {} (blocks before the last need at least 2)",
                j + 1,
                source.dim(j)
            )));
        }
        Ok(Self { source, target })
    }

    pub fn source(&self) -> &BlockSignature {
        &self.source
    }

    pub fn target(&self) -> &BlockSignature {
        &self.target
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Admissible {
    /// `sigma[j]`: source block sent to target block `j`, for `j < N - 1`.
    pub sigma: Vec<usize>,
    pub multipliers: Vec<u32>,
}

impl Admissible {
    /// `sigma` extended by `N -> N`.
    pub fn full_sigma(&self) -> Vec<usize> {
        let mut s = self.sigma.clone();
        s.push(self.sigma.len());
        s
    }

    /// For each source block, the target block it lands in.
    pub fn assignment(&self) -> Vec<usize> {
        let full = self.full_sigma();
        let mut out = vec![0; full.len()];
        for (j, &i) in full.iter().enumerate() {
            out[i] = j;
        }
        out
    }
}

fn check_candidate(p: &ClassificationProblem, sigma: &[usize]) -> Result<Option<Admissible>> {
    let mut multipliers = Vec::with_capacity(sigma.len());
    for (j, &i) in sigma.iter().enumerate() {
        let alpha = p.source.exponent(i);
        let beta = p.target.exponent(j);
        if !alpha.is_multiple_of(beta) {
            return Ok(None);
        }
        let degree = alpha / beta;
        if count_t(degree, p.source.dim(i) as u32)? > (p.target.dim(j) as u64).into() {
            return Ok(None);
        }
        multipliers.push(degree);
    }
    Ok(Some(Admissible {
        sigma: sigma.to_vec(),
        multipliers,
    }))
}

/// All admissible `(sigma, M)`, lexicographic in `sigma`.
pub fn admissible_embeddings(p: &ClassificationProblem) -> Result<Vec<Admissible>> {
    let n = p.source.n_blocks();
    if p.target.dim(n - 1) < p.source.dim(n - 1) {
        return Ok(Vec::new());
    }
    let mut out = Vec::new();
    for sigma in (0..n - 1).permutations(n - 1) {
        if let Some(a) = check_candidate(p, &sigma)? {
            out.push(a);
        }
    }
    Ok(out)
}

/// Whether `a` is one of the admissible outputs for `p`.
pub fn is_admissible(p: &ClassificationProblem, a: &Admissible) -> Result<bool> {
    let n = p.source.n_blocks();
    let mut sorted = a.sigma.clone();
    sorted.sort_unstable();
    if sorted != (0..n - 1).collect::<Vec<_>>() || p.target.dim(n - 1) < p.source.dim(n - 1) {
        return Ok(false);
    }
    Ok(check_candidate(p, &a.sigma)?.as_ref() == Some(a))
}

/// `F = z`, `G_j = (H_{M_j}(w_{sigma(j)}), 0)`, `G_N = (w_N, 0)` without
/// the admissibility check; the target only needs room for each block.
pub fn normal_form_unchecked(
    source: &BlockSignature,
    target: &BlockSignature,
    sigma: &[usize],
    multipliers: &[u32],
) -> Result<PolyMap> {
    let n = source.n_blocks();
    if target.n_blocks() != n || sigma.len() != n - 1 || multipliers.len() != n - 1 {
        return Err(Error::ShapeMismatch(format!(
            "sigma and multipliers need {} entries for {n}-block signatures",
            n - 1
        )));
    }
    let n_vars = 1 + source.total_dim();
    let offsets = source.offsets();
    let mut full_sigma = sigma.to_vec();
    full_sigma.push(n - 1);
    let mut full_mult = multipliers.to_vec();
    full_mult.push(1);
    let mut g = Vec::with_capacity(n);
    for (j, (&i, &degree)) in full_sigma.iter().zip(&full_mult).enumerate() {
        let h = h_map(source.dim(i), degree)?;
        if h.target_dim() > target.dim(j) {
            return Err(Error::Precondition(format!(
                "H_{degree} on block {} needs {} coordinates, target block {} has {}",
                i + 1,
                h.target_dim(),
                j + 1,
                target.dim(j)
            )));
        }
        let mut block: Vec<Polynomial> = h
            .terms()
            .iter()
            .map(|(c, p)| {
                let mut e = vec![0; n_vars];
                e[1 + offsets[i]..1 + offsets[i] + p.len()].copy_from_slice(p.entries());
                Polynomial::new(
                    n_vars,
                    vec![Term {
                        coeff: Coefficient::exact(c.clone()),
                        exponent: MultiIndex(e),
                    }],
                )
            })
            .collect::<Result<_>>()?;
        block.resize(target.dim(j), Polynomial::zero(n_vars));
        g.push(block);
    }
    PolyMap::new(
        source.clone(),
        target.clone(),
        Polynomial::variable(n_vars, 0),
        g,
    )
}

/// Normal form of an admissible pair on the unbounded models.
pub fn build_normal_form(p: &ClassificationProblem, a: &Admissible) -> Result<PolyMap> {
    if !is_admissible(p, a)? {
        return Err(Error::Precondition(format!(
            "sigma={:?}, M={:?} is not admissible for this problem",
            a.sigma, a.multipliers
        )));
    }
    normal_form_unchecked(&p.source, &p.target, &a.sigma, &a.multipliers)
}

/// The normal form on the bounded models, in two independent evaluations.
#[derive(Clone, Debug)]
pub struct BoundedNormalForm {
    unbounded: PolyMap,
}

impl BoundedNormalForm {
    pub fn unbounded(&self) -> &PolyMap {
        &self.unbounded
    }

    /// The polynomial formula applied directly to bounded coordinates.
    pub fn eval_direct(&self, p: &AmbientPoint) -> Result<AmbientPoint> {
        require_model(p, Model::Bounded)?;
        let mut q = p.clone();
        q.model = Model::Unbounded;
        let mut out = self.unbounded.eval_map(&q)?;
        out.model = Model::Bounded;
        Ok(out)
    }

    /// `Psi~ o Phi o Psi^{-1}`.
    pub fn eval_conjugated(&self, p: &AmbientPoint) -> Result<AmbientPoint> {
        let up = cayley_inverse(self.unbounded.source(), p)?;
        cayley(self.unbounded.target(), &self.unbounded.eval_map(&up)?)
    }
}

impl EvaluableMap for BoundedNormalForm {
    fn source(&self) -> &BlockSignature {
        self.unbounded.source()
    }

    fn target(&self) -> &BlockSignature {
        self.unbounded.target()
    }

    fn eval(&self, p: &AmbientPoint) -> Result<AmbientPoint> {
        self.eval_direct(p)
    }
}

pub fn build_normal_form_bounded(p: &ClassificationProblem, a: &Admissible) -> Result<BoundedNormalForm> {
    Ok(BoundedNormalForm {
        unbounded: build_normal_form(p, a)?,
    })
}

fn require_model(p: &AmbientPoint, model: Model) -> Result<()> {
    if p.model != model {
        return Err(Error::Precondition(format!(
            "expected a point of the {model:?} model, got {:?}",
            p.model
        )));
    }
    Ok(())
}

/// Automorphisms of the unbounded model.
#[derive(Clone, Debug, PartialEq)]
pub enum AutomorphismSpec {
    /// `(z, w_j) -> ((z - a0) / a1, w_j / a1^{1/(2 b_j)})`.
    AffineZ { a0: f64, a1: f64 },
    /// `w_j -> w_j conj(U)^t` (row convention); `u` is given by rows.
    BlockUnitary { block: usize, u: Vec<Vec<Complex64>> },
    RealTranslation { t: f64 },
}

impl AutomorphismSpec {
    /// The automorphism undoing this one.
    pub fn inverse(&self) -> Self {
        match self {
            Self::AffineZ { a0, a1 } => Self::AffineZ {
                a0: -a0 / a1,
                a1: 1.0 / a1,
            },
            Self::BlockUnitary { block, u } => Self::BlockUnitary {
                block: *block,
                u: conjugate_transpose(u),
            },
            Self::RealTranslation { t } => Self::RealTranslation { t: -t },
        }
    }
}

pub fn conjugate_transpose(u: &[Vec<Complex64>]) -> Vec<Vec<Complex64>> {
    let n = u.len();
    (0..n).map(|i| (0..n).map(|j| u[j][i].conj()).collect()).collect()
}

/// Largest entry of `U U^* - I`, or an error when `U` is not square.
pub fn unitarity_defect(u: &[Vec<Complex64>]) -> Result<f64> {
    let n = u.len();
    if u.iter().any(|row| row.len() != n) {
        return Err(Error::InvalidAutomorphism(format!("matrix is not {n}x{n}")));
    }
    let mut worst: f64 = 0.0;
    for i in 0..n {
        for j in 0..n {
            let dot: Complex64 = u[i].iter().zip(&u[j]).map(|(a, b)| a * b.conj()).sum();
            let expect = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((dot - expect).norm());
        }
    }
    Ok(worst)
}

pub fn apply_automorphism(sig: &BlockSignature, a: &AutomorphismSpec, p: &AmbientPoint) -> Result<AmbientPoint> {
    require_model(p, Model::Unbounded)?;
    sig.check_blocks(&p.w)?;
    let mut out = p.clone();
    match a {
        AutomorphismSpec::AffineZ { a0, a1 } => {
            if !(*a1 > 0.0 && a1.is_finite() && a0.is_finite()) {
                return Err(Error::InvalidAutomorphism(format!(
                    "AffineZ needs real a0 and a1 > 0, got a0={a0}, a1={a1}"
                )));
            }
            out.z = (p.z - a0) / a1;
            for (block, &b) in out.w.iter_mut().zip(sig.exponents()) {
                let scale = a1.powf(-1.0 / (2.0 * b as f64));
                block.iter_mut().for_each(|c| *c *= scale);
            }
        }
        AutomorphismSpec::BlockUnitary { block, u } => {
            if *block >= sig.n_blocks() {
                return Err(Error::InvalidAutomorphism(format!(
                    "block {} out of range (signature has {})",
                    block + 1,
                    sig.n_blocks()
                )));
            }
            if u.len() != sig.dim(*block) {
                return Err(Error::InvalidAutomorphism(format!(
                    "block {} has dimension {}, matrix is {}x{}",
                    block + 1,
                    sig.dim(*block),
                    u.len(),
                    u.len()
                )));
            }
            let defect = unitarity_defect(u)?;
            if defect > UNITARY_TOL {
                return Err(Error::InvalidAutomorphism(format!(
                    "matrix is not unitary (|U U* - I| = {defect:e})"
                )));
            }
            let w = &p.w[*block];
            out.w[*block] = u
                .iter()
                .map(|row| row.iter().zip(w).map(|(x, y)| x.conj() * y).sum())
                .collect();
        }
        AutomorphismSpec::RealTranslation { t } => {
            if !t.is_finite() {
                return Err(Error::InvalidAutomorphism(format!("translation {t} is not finite")));
            }
            out.z += t;
        }
    }
    Ok(out)
}

/// Completes orthonormal rows to a unitary matrix by Gram-Schmidt against the
/// standard basis. The given rows come first, unchanged.
pub fn unitary_completion(rows: &[Vec<Complex64>], n: usize) -> Result<Vec<Vec<Complex64>>> {
    if rows.len() > n || rows.iter().any(|r| r.len() != n) {
        return Err(Error::ShapeMismatch(format!(
            "need at most {n} rows of length {n}"
        )));
    }
    let mut out: Vec<Vec<Complex64>> = rows.to_vec();
    if unitarity_defect_rect(&out) > 1e-10 {
        return Err(Error::Precondition("rows are not orthonormal".into()));
    }
    for k in 0..n {
        if out.len() == n {
            break;
        }
        let mut v = vec![ZERO; n];
        v[k] = Complex64::new(1.0, 0.0);
        for u in &out {
            let dot: Complex64 = v.iter().zip(u).map(|(a, b)| a * b.conj()).sum();
            v.iter_mut().zip(u).for_each(|(a, b)| *a -= dot * b);
        }
        let norm = v.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        if norm > 1e-6 {
            out.push(v.into_iter().map(|c| c / norm).collect());
        }
    }
    Ok(out)
}

fn unitarity_defect_rect(rows: &[Vec<Complex64>]) -> f64 {
    let mut worst: f64 = 0.0;
    for (i, a) in rows.iter().enumerate() {
        for (j, b) in rows.iter().enumerate() {
            let dot: Complex64 = a.iter().zip(b).map(|(x, y)| x * y.conj()).sum();
            let expect = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((dot - expect).norm());
        }
    }
    worst
}

/// A random unitary (QR of a complex Gaussian-ish matrix via Gram-Schmidt).
pub fn random_unitary(n: usize, rng: &mut impl Rng) -> Vec<Vec<Complex64>> {
    loop {
        let mut out: Vec<Vec<Complex64>> = Vec::with_capacity(n);
        for _ in 0..n {
            let mut v: Vec<Complex64> = (0..n)
                .map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
                .collect();
            for u in &out {
                let dot: Complex64 = v.iter().zip(u).map(|(a, b)| a * b.conj()).sum();
                v.iter_mut().zip(u).for_each(|(a, b)| *a -= dot * b);
            }
            let norm = v.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
            if norm < 1e-3 {
                break;
            }
            out.push(v.into_iter().map(|c| c / norm).collect());
        }
        if out.len() == n {
            return out;
        }
    }
}

/// The fixed family used when no automorphisms are supplied: affine maps on a
/// small grid, real translations, and a few random unitaries per block. Each
/// entry is a single automorphism (or the identity, as an empty list).
pub fn automorphism_family(sig: &BlockSignature, seed: u64) -> Vec<Vec<AutomorphismSpec>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut family = vec![Vec::new()];
    for a0 in [-1.0, 0.0, 1.0] {
        for a1 in [0.5, 1.0, 2.0] {
            if a0 != 0.0 || a1 != 1.0 {
                family.push(vec![AutomorphismSpec::AffineZ { a0, a1 }]);
            }
        }
    }
    for t in [-0.5, 0.5] {
        family.push(vec![AutomorphismSpec::RealTranslation { t }]);
    }
    for block in 0..sig.n_blocks() {
        for _ in 0..3 {
            family.push(vec![AutomorphismSpec::BlockUnitary {
                block,
                u: random_unitary(sig.dim(block), &mut rng),
            }]);
        }
    }
    family
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct EquivalenceReport {
    pub equivalent: bool,
    pub max_deviation: f64,
}

/// Whether `post o m2 o pre` agrees with `m1` at every sample (unbounded
/// model). `pre` acts on the common source, `post` on the target of `m2`;
/// the two targets must have the same block dimensions.
pub fn equivalent_at_samples(
    m1: &dyn EvaluableMap,
    m2: &dyn EvaluableMap,
    pre: &[AutomorphismSpec],
    post: &[AutomorphismSpec],
    samples: &[AmbientPoint],
    tol: f64,
) -> Result<EquivalenceReport> {
    if m1.source() != m2.source() || m1.target().dims() != m2.target().dims() {
        return Err(Error::ShapeMismatch(format!(
            "maps {} -> {} and {} -> {} are not comparable",
            m1.source(),
            m1.target(),
            m2.source(),
            m2.target()
        )));
    }
    let mut max_deviation: f64 = 0.0;
    for p in samples {
        let mut q = p.clone();
        for a in pre {
            q = apply_automorphism(m2.source(), a, &q)?;
        }
        let mut image = m2.eval(&q)?;
        for a in post {
            image = apply_automorphism(m2.target(), a, &image)?;
        }
        max_deviation = max_deviation.max(m1.eval(p)?.max_abs_diff(&image));
    }
    Ok(EquivalenceReport {
        equivalent: max_deviation <= tol,
        max_deviation,
    })
}

/// Smallest deviation over a family of post-compositions.
pub fn best_over_family(
    m1: &dyn EvaluableMap,
    m2: &dyn EvaluableMap,
    family: &[Vec<AutomorphismSpec>],
    samples: &[AmbientPoint],
    tol: f64,
) -> Result<EquivalenceReport> {
    let mut best = EquivalenceReport {
        equivalent: false,
        max_deviation: f64::INFINITY,
    };
    for post in family {
        let r = equivalent_at_samples(m1, m2, &[], post, samples, tol)?;
        if r.max_deviation < best.max_deviation {
            best = r;
        }
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::{rational_int, SurdScalar};
    use crate::geometry::{
        classify_point, sample_boundary, sample_interior_bounded, sample_interior_unbounded,
        DEFAULT_SP_MARGIN,
    };
    use crate::holomap::{block_structure, verify_proper, DEFAULT_HIT_THRESHOLD};
    use proptest::prelude::*;

    fn sig(dims: &[usize], exps: &[u32]) -> BlockSignature {
        BlockSignature::new(dims.to_vec(), exps.to_vec()).unwrap()
    }

    fn problem(m: &[usize], a: &[u32], n: &[usize], b: &[u32]) -> ClassificationProblem {
        ClassificationProblem::new(sig(m, a), sig(n, b)).unwrap()
    }

    /// Independent enumerator: recursive permutations, naive binomials.
    fn brute_force(m: &[usize], a: &[u32], n: &[usize], b: &[u32]) -> Vec<(Vec<usize>, Vec<u32>)> {
        fn binom(top: u128, k: u128) -> u128 {
            let mut num = 1u128;
            let mut den = 1u128;
            for i in 0..k {
                num *= top - i;
                den *= i + 1;
            }
            num / den
        }
        fn perms(k: usize) -> Vec<Vec<usize>> {
            if k == 0 {
                return vec![vec![]];
            }
            let mut out = Vec::new();
            for first in 0..k {
                for rest in perms(k - 1) {
                    let mut p = vec![first];
                    p.extend(rest.into_iter().map(|x| if x >= first { x + 1 } else { x }));
                    out.push(p);
                }
            }
            out
        }
        let nn = m.len();
        if n[nn - 1] < m[nn - 1] {
            return vec![];
        }
        let mut out = Vec::new();
        'outer: for p in perms(nn - 1) {
            let mut mult = Vec::new();
            for j in 0..nn - 1 {
                let (alpha, beta) = (a[p[j]], b[j]);
                if !alpha.is_multiple_of(beta) {
                    continue 'outer;
                }
                let big_m = alpha / beta;
                let t = binom(big_m as u128 + m[p[j]] as u128 - 1, big_m as u128);
                if t > n[j] as u128 {
                    continue 'outer;
                }
                mult.push(big_m);
            }
            out.push((p, mult));
        }
        out
    }

    #[test]
    fn worked_example() {
        let p = problem(&[2, 2, 2], &[4, 6], &[3, 10, 2], &[2, 3]);
        let list = admissible_embeddings(&p).unwrap();
        assert_eq!(
            list,
            vec![Admissible {
                sigma: vec![0, 1],
                multipliers: vec![2, 2]
            }]
        );
        let nf = build_normal_form(&p, &list[0]).unwrap();
        // sqrt(2) w^1_1 w^2_1 in the middle slot of G_1
        let sqrt2 = SurdScalar::sqrt_of(rational_int(2)).unwrap();
        let t = &nf.g()[0][1].terms()[0];
        assert_eq!(t.coeff.as_exact(), Some(&sqrt2));
        assert_eq!(t.exponent, MultiIndex(vec![0, 1, 1, 0, 0, 0, 0]));
        assert!(nf.g()[1][3..].iter().all(Polynomial::is_zero));
        assert_eq!(nf.g()[2], vec![Polynomial::variable(7, 5), Polynomial::variable(7, 6)]);
        assert!(verify_proper(&nf, 300, 300, 1, 1e-9).unwrap().pass);
    }

    #[test]
    fn hypothesis_and_structure_errors() {
        assert!(matches!(
            ClassificationProblem::new(sig(&[2, 1], &[2]), sig(&[2, 2, 1], &[2, 2])),
            Err(Error::StructureMismatch(_))
        ));
        assert!(matches!(
            ClassificationProblem::new(sig(&[1, 2], &[2]), sig(&[2, 2], &[2])),
            Err(Error::HypothesisViolation(_))
        ));
    }

    #[test]
    fn trivial_cases() {
        // no divisibility anywhere
        assert!(admissible_embeddings(&problem(&[2, 2, 1], &[3, 5], &[9, 9, 1], &[2, 2])).unwrap().is_empty());
        // last block too small
        assert!(admissible_embeddings(&problem(&[2, 3], &[2], &[2, 2], &[2])).unwrap().is_empty());
        // equal signatures
        let p = problem(&[2, 2, 1], &[2, 3], &[2, 2, 1], &[2, 3]);
        assert_eq!(
            admissible_embeddings(&p).unwrap(),
            vec![Admissible { sigma: vec![0, 1], multipliers: vec![1, 1] }]
        );
        let p = problem(&[2, 2, 1], &[2, 2], &[2, 2, 1], &[2, 2]);
        let list = admissible_embeddings(&p).unwrap();
        assert_eq!(list.len(), 2);
        assert_eq!(list[0].sigma, vec![0, 1]);
        assert_eq!(list[1].sigma, vec![1, 0]);
        // single block: only the last block condition
        let p = problem(&[3], &[], &[4], &[]);
        assert_eq!(admissible_embeddings(&p).unwrap(), vec![Admissible { sigma: vec![], multipliers: vec![] }]);
    }

    #[test]
    fn identity_form_when_all_multipliers_are_one() {
        let p = problem(&[2, 3, 1], &[2, 4], &[4, 2, 2], &[4, 2]);
        let list = admissible_embeddings(&p).unwrap();
        assert_eq!(list, vec![Admissible { sigma: vec![1, 0], multipliers: vec![1, 1] }]);
        let nf = build_normal_form(&p, &list[0]).unwrap();
        let pt = sample_interior_unbounded(p.source(), 1, 2, DEFAULT_SP_MARGIN).unwrap().remove(0);
        let image = nf.eval_map(&pt).unwrap();
        assert_eq!(image.z, pt.z);
        assert_eq!(&image.w[0][..3], &pt.w[1][..]);
        assert_eq!(image.w[0][3], ZERO);
        assert_eq!(image.w[1], pt.w[0]);
        assert_eq!(image.w[2], vec![pt.w[2][0], ZERO]);
    }

    #[test]
    fn inadmissible_input_is_rejected() {
        let p = problem(&[2, 2, 2], &[4, 6], &[3, 10, 2], &[2, 3]);
        let swap = Admissible { sigma: vec![1, 0], multipliers: vec![3, 2] };
        assert!(matches!(build_normal_form(&p, &swap), Err(Error::Precondition(_))));
        let wrong_m = Admissible { sigma: vec![0, 1], multipliers: vec![2, 3] };
        assert!(build_normal_form(&p, &wrong_m).is_err());
    }

    #[test]
    fn normal_forms_have_permutation_structure() {
        let p = problem(&[2, 3, 2], &[6, 2], &[3, 10, 3], &[2, 3]);
        let list = admissible_embeddings(&p).unwrap();
        assert!(!list.is_empty());
        for a in &list {
            let nf = build_normal_form(&p, a).unwrap();
            let samples = sample_boundary(p.source(), 40, 3, DEFAULT_SP_MARGIN).unwrap();
            let st = block_structure(&nf, &samples, DEFAULT_HIT_THRESHOLD).unwrap();
            assert!(st.matches_assignment(p.source(), &a.assignment(), 1e-9), "{a:?} {st:?}");
            assert!(st.is_disjoint());
        }
    }

    #[test]
    fn bounded_forms_agree() {
        let p = problem(&[2, 2, 2], &[4, 6], &[3, 10, 2], &[2, 3]);
        let a = &admissible_embeddings(&p).unwrap()[0];
        let nf = build_normal_form_bounded(&p, a).unwrap();
        let origin = AmbientPoint::origin(p.source(), Model::Bounded);
        assert!(nf.eval_direct(&origin).unwrap().max_abs_diff(&AmbientPoint::origin(p.target(), Model::Bounded)) == 0.0);
        for pt in sample_interior_bounded(p.source(), 200, 4, 0.95).unwrap() {
            let d = nf.eval_direct(&pt).unwrap();
            let c = nf.eval_conjugated(&pt).unwrap();
            assert!(d.max_abs_diff(&c) < 1e-10, "{}", d.max_abs_diff(&c));
        }
    }

    #[test]
    fn automorphisms_preserve_the_domain() {
        let s = sig(&[2, 3, 1], &[2, 3]);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let u = random_unitary(3, &mut rng);
        let autos = [
            AutomorphismSpec::AffineZ { a0: 0.7, a1: 2.5 },
            AutomorphismSpec::RealTranslation { t: -1.3 },
            AutomorphismSpec::BlockUnitary { block: 1, u },
        ];
        let boundary = sample_boundary(&s, 100, 6, DEFAULT_SP_MARGIN).unwrap();
        let interior = sample_interior_unbounded(&s, 100, 7, DEFAULT_SP_MARGIN).unwrap();
        for a in &autos {
            for p in boundary.iter().map(|b| b.to_ambient(&s).unwrap()).chain(interior.iter().cloned()) {
                let before = classify_point(&s, &p, 1e-9).unwrap();
                let q = apply_automorphism(&s, a, &p).unwrap();
                assert_eq!(classify_point(&s, &q, 1e-9).unwrap(), before);
                let back = apply_automorphism(&s, &a.inverse(), &q).unwrap();
                assert!(back.max_abs_diff(&p) < 1e-12);
            }
        }
        let p = interior[0].clone();
        assert_eq!(apply_automorphism(&s, &AutomorphismSpec::AffineZ { a0: 0.0, a1: 1.0 }, &p).unwrap(), p);
        let bad = AutomorphismSpec::BlockUnitary {
            block: 0,
            u: vec![vec![Complex64::new(1.0, 0.0), ZERO], vec![ZERO, Complex64::new(2.0, 0.0)]],
        };
        assert!(matches!(apply_automorphism(&s, &bad, &p), Err(Error::InvalidAutomorphism(_))));
        assert!(apply_automorphism(&s, &AutomorphismSpec::AffineZ { a0: 0.0, a1: -1.0 }, &p).is_err());
    }

    #[test]
    fn completion_is_unitary() {
        let s = 0.5f64.sqrt();
        let rows = vec![vec![Complex64::new(s, 0.0), ZERO, Complex64::new(0.0, s)]];
        let u = unitary_completion(&rows, 3).unwrap();
        assert_eq!(u[0], rows[0]);
        assert!(unitarity_defect(&u).unwrap() < 1e-14);
        assert!(unitary_completion(&[vec![Complex64::new(2.0, 0.0)]], 1).is_err());
    }

    #[test]
    fn equivalence_checks() {
        let p = problem(&[2, 2, 1], &[4, 2], &[4, 3, 2], &[2, 2]);
        let a = &admissible_embeddings(&p).unwrap()[0];
        assert_eq!(a.multipliers, vec![2, 1]);
        let nf = build_normal_form(&p, a).unwrap();
        let samples = sample_interior_unbounded(p.source(), 100, 8, DEFAULT_SP_MARGIN).unwrap();
        let same = equivalent_at_samples(&nf, &nf, &[], &[], &samples, 1e-12).unwrap();
        assert!(same.equivalent);
        assert_eq!(same.max_deviation, 0.0);

        // m1 = U o nf for a completion of the normalized H_2 rows
        let s = 0.5f64.sqrt();
        let rows = vec![vec![Complex64::new(s, 0.0), Complex64::new(0.0, s), ZERO, ZERO]];
        let u = unitary_completion(&rows, 4).unwrap();
        let rotate = AutomorphismSpec::BlockUnitary { block: 0, u };
        let rotated = Rotated { inner: &nf, post: rotate.clone() };
        let r = equivalent_at_samples(&rotated, &nf, &[], std::slice::from_ref(&rotate), &samples, 1e-12).unwrap();
        assert!(r.equivalent, "{r:?}");
        let r = equivalent_at_samples(&nf, &rotated, &[], &[rotate.inverse()], &samples, 1e-12).unwrap();
        assert!(r.equivalent, "{r:?}");

        // degree 2 against degree 1 on the same source and target dimensions
        let linear = normal_form_unchecked(p.source(), &sig(&[4, 3, 2], &[4, 2]), &a.sigma, &[1, 1]).unwrap();
        let family = automorphism_family(linear.target(), 9);
        let best = best_over_family(&nf, &linear, &family, &samples, 1e-9).unwrap();
        assert!(!best.equivalent);
        assert!(best.max_deviation > 1e-3);
    }

    struct Rotated<'a> {
        inner: &'a PolyMap,
        post: AutomorphismSpec,
    }

    impl EvaluableMap for Rotated<'_> {
        fn source(&self) -> &BlockSignature {
            self.inner.source()
        }
        fn target(&self) -> &BlockSignature {
            self.inner.target()
        }
        fn eval(&self, p: &AmbientPoint) -> Result<AmbientPoint> {
            apply_automorphism(self.inner.target(), &self.post, &self.inner.eval_map(p)?)
        }
    }

    proptest! {
        #[test]
        fn matches_brute_force(
            n_blocks in 1usize..=4,
            m in proptest::collection::vec(2usize..=6, 4),
            n in proptest::collection::vec(1usize..=12, 4),
            a in proptest::collection::vec(2u32..=12, 3),
            b in proptest::collection::vec(2u32..=12, 3),
            last_m in 1usize..=4,
        ) {
            let mut m = m[..n_blocks].to_vec();
            m[n_blocks - 1] = last_m;
            let n = n[..n_blocks].to_vec();
            let a = &a[..n_blocks - 1];
            let b = &b[..n_blocks - 1];
            let p = problem(&m, a, &n, b);
            let got: Vec<(Vec<usize>, Vec<u32>)> = admissible_embeddings(&p)
                .unwrap()
                .into_iter()
                .map(|x| (x.sigma, x.multipliers))
                .collect();
            prop_assert_eq!(got, brute_force(&m, a, &n, b));
        }

        #[test]
        fn regime_forces_linear_multipliers(
            m in proptest::collection::vec(2usize..=5, 3),
            n in proptest::collection::vec(2usize..=10, 3),
            a in proptest::collection::vec(2u32..=8, 2),
            b in proptest::collection::vec(2u32..=8, 2),
        ) {
            let p = problem(&m, &a, &n, &b);
            for adm in admissible_embeddings(&p).unwrap() {
                for (j, &i) in adm.sigma.iter().enumerate() {
                    if n[j] < 2 * m[i] - 1 {
                        prop_assert_eq!(adm.multipliers[j], 1);
                    }
                }
            }
        }
    }
}
