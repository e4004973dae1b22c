//! Polynomial holomorphic maps `(F, G_1, ..., G_N)` between unbounded models.
//!
//! Every component is a polynomial in the ambient variables `(z, w)` (flattened
//! as `z, w_1^1, ..., w_N^{m_N}`). Pushforwards of CR vectors are computed from
//! the real Jacobian of the boundary-restricted map
//! `(x, w) -> (Re F, G)` with `z = x + i |||w|||^{2a}`; the `(0,1)` part of the
//! image is reported as a holomorphy residual.

use std::collections::BTreeSet;
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::arith::{format_rational, gaussian, parse_rational, MultiIndex, SurdScalar};
use crate::crframe::{self, CoordTangent};
use crate::error::{Error, Result};
use crate::geometry::{
    block_norm_sum, classify_point, defining_unbounded, sample_boundary,
    sample_interior_unbounded, AmbientPoint, BlockSignature, BoundaryPoint, PointClass,
    SignatureFile, DEFAULT_SP_MARGIN,
};

const I: Complex64 = Complex64::new(0.0, 1.0);
const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Relative tolerance for "the image of a boundary point is on the target boundary".
pub const BOUNDARY_MATCH_TOL: f64 = 1e-9;

/// Magnitude above which a frame component counts as structurally nonzero.
pub const DEFAULT_HIT_THRESHOLD: f64 = 1e-7;

/// A coefficient, exact when it has a surd representation.
#[derive(Clone, Debug, PartialEq)]
pub struct Coefficient {
    exact: Option<SurdScalar>,
    value: Complex64,
}

impl Coefficient {
    pub fn exact(s: SurdScalar) -> Self {
        Self {
            value: s.to_complex(),
            exact: Some(s),
        }
    }

    pub fn float(value: Complex64) -> Self {
        Self { exact: None, value }
    }

    pub fn value(&self) -> Complex64 {
        self.value
    }

    pub fn as_exact(&self) -> Option<&SurdScalar> {
        self.exact.as_ref()
    }

    pub fn is_exact(&self) -> bool {
        self.exact.is_some()
    }

    pub fn is_zero(&self) -> bool {
        match &self.exact {
            Some(s) => s.is_zero(),
            None => self.value == ZERO,
        }
    }

    fn times_integer(&self, k: u32) -> Self {
        match &self.exact {
            Some(s) => Self::exact(s.scale(&crate::arith::rational_int(k as i64))),
            None => Self::float(self.value * k as f64),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Term {
    pub coeff: Coefficient,
    /// Exponents over `(z, w flattened)`.
    pub exponent: MultiIndex,
}

/// Polynomial in `n_vars` complex variables.
#[derive(Clone, Debug, PartialEq)]
pub struct Polynomial {
    n_vars: usize,
    terms: Vec<Term>,
}

impl Polynomial {
    pub fn zero(n_vars: usize) -> Self {
        Self {
            n_vars,
            terms: Vec::new(),
        }
    }

    pub fn new(n_vars: usize, terms: Vec<Term>) -> Result<Self> {
        if let Some(t) = terms.iter().find(|t| t.exponent.len() != n_vars) {
            return Err(Error::ShapeMismatch(format!(
                "monomial {} has {} exponents, expected {n_vars}",
                t.exponent,
                t.exponent.len()
            )));
        }
        Ok(Self { n_vars, terms })
    }

    /// The single variable `var` with coefficient 1.
    pub fn variable(n_vars: usize, var: usize) -> Self {
        Self {
            n_vars,
            terms: vec![Term {
                coeff: Coefficient::exact(SurdScalar::one()),
                exponent: MultiIndex::unit(n_vars, var),
            }],
        }
    }

    pub fn n_vars(&self) -> usize {
        self.n_vars
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.iter().all(|t| t.coeff.is_zero())
    }

    pub fn eval(&self, vars: &[Complex64]) -> Complex64 {
        debug_assert_eq!(vars.len(), self.n_vars);
        self.terms
            .iter()
            .map(|t| {
                t.exponent
                    .entries()
                    .iter()
                    .zip(vars)
                    .filter(|(&e, _)| e > 0)
                    .fold(t.coeff.value, |acc, (&e, v)| acc * v.powu(e))
            })
            .sum()
    }

    /// Exact partial derivative in `var`.
    pub fn derivative(&self, var: usize) -> Self {
        let terms = self
            .terms
            .iter()
            .filter(|t| t.exponent.entries()[var] > 0 && !t.coeff.is_zero())
            .map(|t| {
                let e = t.exponent.entries()[var];
                let mut exponent = t.exponent.clone();
                exponent.0[var] -= 1;
                Term {
                    coeff: t.coeff.times_integer(e),
                    exponent,
                }
            })
            .collect();
        Self {
            n_vars: self.n_vars,
            terms,
        }
    }
}

/// Partials of every component (F first, then G flattened) in every variable
/// (z first, then w flattened).
#[derive(Clone, Debug, PartialEq)]
pub struct DerivativeTable {
    pub rows: Vec<Vec<Polynomial>>,
}

/// `Phi = (F, G_1, ..., G_N)` from the unbounded source model to the unbounded
/// target model.
#[derive(Clone, Debug, PartialEq)]
pub struct PolyMap {
    source: BlockSignature,
    target: BlockSignature,
    f: Polynomial,
    g: Vec<Vec<Polynomial>>,
}

impl PolyMap {
    pub fn new(
        source: BlockSignature,
        target: BlockSignature,
        f: Polynomial,
        g: Vec<Vec<Polynomial>>,
    ) -> Result<Self> {
        let n_vars = 1 + source.total_dim();
        if g.len() != target.n_blocks()
            || g.iter().zip(target.dims()).any(|(block, &n)| block.len() != n)
        {
            return Err(Error::ShapeMismatch(format!(
                "G block shape {:?} does not match target {:?}",
                g.iter().map(Vec::len).collect::<Vec<_>>(),
                target.dims()
            )));
        }
        if std::iter::once(&f).chain(g.iter().flatten()).any(|p| p.n_vars() != n_vars) {
            return Err(Error::ShapeMismatch(format!(
                "components must be polynomials in {n_vars} variables (z and w)"
            )));
        }
        Ok(Self { source, target, f, g })
    }

    /// Identity map of a signature onto itself.
    pub fn identity(sig: &BlockSignature) -> Self {
        let n_vars = 1 + sig.total_dim();
        let offsets = sig.offsets();
        let g = sig
            .dims()
            .iter()
            .zip(&offsets)
            .map(|(&m, &off)| (0..m).map(|l| Polynomial::variable(n_vars, 1 + off + l)).collect())
            .collect();
        Self {
            source: sig.clone(),
            target: sig.clone(),
            f: Polynomial::variable(n_vars, 0),
            g,
        }
    }

    pub fn source(&self) -> &BlockSignature {
        &self.source
    }

    pub fn target(&self) -> &BlockSignature {
        &self.target
    }

    pub fn f(&self) -> &Polynomial {
        &self.f
    }

    pub fn g(&self) -> &[Vec<Polynomial>] {
        &self.g
    }

    /// `F, G_1^1, ..., G_N^{n_N}`.
    pub fn components(&self) -> impl Iterator<Item = &Polynomial> {
        std::iter::once(&self.f).chain(self.g.iter().flatten())
    }

    /// True when every coefficient has an exact representation.
    pub fn is_exact(&self) -> bool {
        self.components().flat_map(|p| p.terms()).all(|t| t.coeff.is_exact())
    }

    fn variables(&self, p: &AmbientPoint) -> Result<Vec<Complex64>> {
        self.source.check_blocks(&p.w)?;
        let mut vars = Vec::with_capacity(1 + self.source.total_dim());
        vars.push(p.z);
        vars.extend(p.w.iter().flatten());
        Ok(vars)
    }

    /// Componentwise evaluation; the result is a point of the target model.
    pub fn eval_map(&self, p: &AmbientPoint) -> Result<AmbientPoint> {
        let vars = self.variables(p)?;
        let g = self
            .g
            .iter()
            .map(|block| block.iter().map(|q| q.eval(&vars)).collect())
            .collect();
        Ok(AmbientPoint::new(self.f.eval(&vars), g, p.model))
    }

    pub fn differentiate(&self) -> DerivativeTable {
        let n_vars = 1 + self.source.total_dim();
        DerivativeTable {
            rows: self
                .components()
                .map(|p| (0..n_vars).map(|v| p.derivative(v)).collect())
                .collect(),
        }
    }

    pub fn to_toml_string(&self) -> String {
        let mut terms = Vec::new();
        for (component, poly) in self.components().enumerate() {
            for t in poly.terms() {
                let mut entry = MapTermFile {
                    component,
                    exponent: t.exponent.entries().to_vec(),
                    coeff: None,
                    radicand: None,
                    float: None,
                };
                match t.coeff.as_exact() {
                    Some(s) => {
                        entry.coeff = Some([format_rational(&s.q().re), format_rational(&s.q().im)]);
                        entry.radicand = Some(format_rational(s.radicand()));
                    }
                    None => entry.float = Some([t.coeff.value.re, t.coeff.value.im]),
                }
                terms.push(entry);
            }
        }
        let file = MapFile {
            source: SignatureFile::from(&self.source),
            target: SignatureFile::from(&self.target),
            terms,
        };
        toml::to_string(&file).expect("map serializes")
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        let file: MapFile = toml::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        let source = file.source.into_signature()?;
        let target = file.target.into_signature()?;
        let n_vars = 1 + source.total_dim();
        let n_components = 1 + target.total_dim();
        let mut buckets: Vec<Vec<Term>> = vec![Vec::new(); n_components];
        for (k, t) in file.terms.into_iter().enumerate() {
            if t.component >= n_components {
                return Err(Error::Parse(format!(
                    "terms[{k}]: component {} out of range (map has {n_components})",
                    t.component
                )));
            }
            if t.exponent.len() != n_vars {
                return Err(Error::Parse(format!(
                    "terms[{k}]: exponent has {} entries, expected {n_vars}",
                    t.exponent.len()
                )));
            }
            let coeff = match (t.coeff, t.radicand, t.float) {
                (Some([re, im]), radicand, None) => {
                    let radicand = radicand.as_deref().unwrap_or("1");
                    let q = gaussian(parse_rational(&re)?, parse_rational(&im)?);
                    Coefficient::exact(
                        SurdScalar::new(q, parse_rational(radicand)?)
                            .map_err(|e| Error::Parse(format!("terms[{k}]: {e}")))?,
                    )
                }
                (None, None, Some([re, im])) => Coefficient::float(Complex64::new(re, im)),
                _ => {
                    return Err(Error::Parse(format!(
                        "terms[{k}]: give either `coeff` (+ optional `radicand`) or `float`"
                    )))
                }
            };
            buckets[t.component].push(Term {
                coeff,
                exponent: MultiIndex(t.exponent),
            });
        }
        let mut buckets = buckets.into_iter().map(|terms| Polynomial { n_vars, terms });
        let f = buckets.next().expect("F component");
        let g = target
            .dims()
            .iter()
            .map(|&n| buckets.by_ref().take(n).collect())
            .collect();
        Self::new(source, target, f, g)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
        Self::from_toml_str(&text).map_err(|e| match e {
            Error::Parse(msg) => Error::Parse(format!("{}: {msg}", path.display())),
            other => other,
        })
    }
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct MapFile {
    source: SignatureFile,
    target: SignatureFile,
    #[serde(default)]
    terms: Vec<MapTermFile>,
}

/// One monomial: `component` 0 is F, then the G coordinates in block order.
#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct MapTermFile {
    component: usize,
    exponent: Vec<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    coeff: Option<[String; 2]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    radicand: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    float: Option<[f64; 2]>,
}

/// Anything that can be evaluated pointwise between two signatures.
pub trait EvaluableMap {
    fn source(&self) -> &BlockSignature;
    fn target(&self) -> &BlockSignature;
    fn eval(&self, p: &AmbientPoint) -> Result<AmbientPoint>;
}

impl EvaluableMap for PolyMap {
    fn source(&self) -> &BlockSignature {
        &self.source
    }

    fn target(&self) -> &BlockSignature {
        &self.target
    }

    fn eval(&self, p: &AmbientPoint) -> Result<AmbientPoint> {
        self.eval_map(p)
    }
}

/// Proportionality `Phi^* theta~ = f theta` at one boundary point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PullbackReport {
    pub f: f64,
    pub residual: f64,
}

/// Values and complex partials of a map at a boundary point.
struct Jet {
    image: BoundaryPoint,
    /// `d phi / d var` for each component phi (F, G...) and variable (z, w...).
    partials: Vec<Vec<Complex64>>,
}

/// Differential of a [`PolyMap`] restricted to the source boundary.
pub struct BoundaryDifferential<'a> {
    map: &'a PolyMap,
    derivatives: DerivativeTable,
}

impl<'a> BoundaryDifferential<'a> {
    pub fn new(map: &'a PolyMap) -> Self {
        Self {
            map,
            derivatives: map.differentiate(),
        }
    }

    pub fn map(&self) -> &PolyMap {
        self.map
    }

    fn jet(&self, pt: &BoundaryPoint) -> Result<Jet> {
        let source = &self.map.source;
        let target = &self.map.target;
        let amb = pt.to_ambient(source)?;
        let image = self.map.eval_map(&amb)?;
        let rho = block_norm_sum(target, &image.w)?;
        let residual = (image.z.im - rho).abs();
        if residual > BOUNDARY_MATCH_TOL * (1.0 + image.z.im.abs()) {
            return Err(Error::NotBoundaryPreserving(residual));
        }
        let vars = self.map.variables(&amb)?;
        let partials = self
            .derivatives
            .rows
            .iter()
            .map(|row| row.iter().map(|p| p.eval(&vars)).collect())
            .collect();
        Ok(Jet {
            image: BoundaryPoint::new(image.z.re, image.w),
            partials,
        })
    }

    /// Real Jacobian of `(x, Re w, Im w) -> (Re F, Re G, Im G)`.
    /// Rows: `x~, (a~, b~) per target coordinate`; columns likewise for the source.
    fn real_jacobian(&self, pt: &BoundaryPoint, jet: &Jet) -> Vec<Vec<f64>> {
        let source = &self.map.source;
        // d rho / d a_k and d rho / d b_k on the source boundary
        let mut drho = Vec::with_capacity(2 * source.total_dim());
        for j in 0..source.n_blocks() {
            let a = source.exponent(j);
            let scale = 2.0 * a as f64 * pt.block_norm_sq(j).powi(a as i32 - 1);
            for w in &pt.w[j] {
                drho.push(scale * w.re);
                drho.push(scale * w.im);
            }
        }
        let complex_row = |partials: &[Complex64]| -> Vec<Complex64> {
            let dz = partials[0];
            let mut row = vec![dz];
            for (k, dw) in partials[1..].iter().enumerate() {
                row.push(dz * I * drho[2 * k] + dw);
                row.push(dz * I * drho[2 * k + 1] + I * dw);
            }
            row
        };
        let mut out = Vec::with_capacity(1 + 2 * self.map.target.total_dim());
        let f_row = complex_row(&jet.partials[0]);
        out.push(f_row.iter().map(|c| c.re).collect());
        for partials in &jet.partials[1..] {
            let row = complex_row(partials);
            out.push(row.iter().map(|c| c.re).collect());
            out.push(row.iter().map(|c| c.im).collect());
        }
        out
    }

    /// Image point on the target boundary.
    pub fn image(&self, pt: &BoundaryPoint) -> Result<BoundaryPoint> {
        Ok(self.jet(pt)?.image)
    }

    /// `Phi_* X` as a (1,0) vector at the image point, plus the size of the
    /// `(0,1)` part (zero for holomorphic maps).
    pub fn pushforward(&self, pt: &BoundaryPoint, x: &CoordTangent) -> Result<(BoundaryPoint, CoordTangent, f64)> {
        self.map.source.check_blocks(&x.c_w)?;
        let jet = self.jet(pt)?;
        let jac = self.real_jacobian(pt, &jet);
        let mut real_x = vec![x.c_x];
        for c in x.c_w.iter().flatten() {
            real_x.push(c / 2.0);
            real_x.push(-I * c / 2.0);
        }
        let pushed: Vec<Complex64> = jac
            .iter()
            .map(|row| row.iter().zip(&real_x).map(|(j, v)| v * j).sum())
            .collect();
        let mut flat = Vec::with_capacity(self.map.target.total_dim());
        let mut residual: f64 = 0.0;
        for pq in pushed[1..].chunks(2) {
            flat.push(pq[0] + I * pq[1]);
            residual = residual.max((pq[0] - I * pq[1]).norm());
        }
        let image_vec = CoordTangent {
            c_x: pushed[0],
            c_w: self.map.target.split(&flat)?,
        };
        Ok((jet.image, image_vec, residual))
    }

    /// `f = (Phi^* theta~)(d/dx)` and the largest deviation of
    /// `Phi^* theta~ - f theta` over the real coordinate basis.
    pub fn theta_pullback_factor(&self, pt: &BoundaryPoint) -> Result<PullbackReport> {
        let source = &self.map.source;
        let target = &self.map.target;
        let jet = self.jet(pt)?;
        let jac = self.real_jacobian(pt, &jet);
        let image = &jet.image;

        let mut target_weights = Vec::new();
        for j in 0..target.n_blocks() {
            let b = target.exponent(j);
            let scale = 2.0 * b as f64 * image.block_norm_sq(j).powi(b as i32 - 1);
            for w in &image.w[j] {
                target_weights.push((scale, *w));
            }
        }
        let theta_target = |col: usize| -> f64 {
            let mut acc = jac[0][col];
            for (k, (scale, w)) in target_weights.iter().enumerate() {
                let da = jac[1 + 2 * k][col];
                let db = jac[2 + 2 * k][col];
                acc += scale * (w.re * db - w.im * da);
            }
            acc
        };
        let mut theta_source = vec![1.0];
        for j in 0..source.n_blocks() {
            let a = source.exponent(j);
            let scale = 2.0 * a as f64 * pt.block_norm_sq(j).powi(a as i32 - 1);
            for w in &pt.w[j] {
                theta_source.push(-scale * w.im);
                theta_source.push(scale * w.re);
            }
        }
        let f = theta_target(0);
        let residual = theta_source
            .iter()
            .enumerate()
            .map(|(col, t)| (theta_target(col) - f * t).abs())
            .fold(0.0, f64::max);
        Ok(PullbackReport { f, residual })
    }
}

pub fn pushforward(map: &PolyMap, pt: &BoundaryPoint, x: &CoordTangent) -> Result<(CoordTangent, f64)> {
    let (_, v, residual) = BoundaryDifferential::new(map).pushforward(pt, x)?;
    Ok((v, residual))
}

pub fn theta_pullback_factor(map: &PolyMap, pt: &BoundaryPoint) -> Result<PullbackReport> {
    BoundaryDifferential::new(map).theta_pullback_factor(pt)
}

/// How the frame blocks of the source are carried into the target frame.
#[derive(Clone, Debug, PartialEq)]
pub struct BlockStructure {
    /// For each source block `i`: target blocks whose W-component of
    /// `Phi_* W_i` exceeds the threshold somewhere.
    pub hits: Vec<BTreeSet<usize>>,
    /// `[i][l]`: largest W~_l-component size of `Phi_* W^lambda_i`.
    pub w_magnitudes: Vec<Vec<f64>>,
    /// Largest E~-component of any `Phi_* W^lambda_i`.
    pub max_e_component: f64,
    /// `[i][l]`: largest `|E~_l|`-coefficient of `Phi_* E_i`.
    pub radial_magnitudes: Vec<Vec<f64>>,
    /// Largest W~-component of any `Phi_* E_i`.
    pub radial_w_leak: f64,
    /// Largest `(0,1)` residual seen over all pushforwards.
    pub max_cr_residual: f64,
}

impl BlockStructure {
    pub fn is_disjoint(&self) -> bool {
        let mut seen = BTreeSet::new();
        self.hits.iter().flatten().all(|l| seen.insert(*l))
    }

    /// True when source block `i` hits exactly `{assignment[i]}` (or nothing,
    /// for one-dimensional source blocks whose W bundle is zero) and the
    /// E-components stay below `threshold`.
    pub fn matches_assignment(&self, source: &BlockSignature, assignment: &[usize], threshold: f64) -> bool {
        if assignment.len() != self.hits.len() {
            return false;
        }
        let w_ok = self.hits.iter().enumerate().all(|(i, hits)| {
            if source.dim(i) < 2 {
                hits.is_empty()
            } else {
                hits.len() == 1 && hits.contains(&assignment[i])
            }
        });
        let radial_ok = self.radial_magnitudes.iter().enumerate().all(|(i, row)| {
            row.iter()
                .enumerate()
                .all(|(l, &v)| l == assignment[i] || v <= threshold)
        });
        w_ok && radial_ok && self.max_e_component <= threshold && self.radial_w_leak <= threshold
    }
}

pub fn block_structure(map: &PolyMap, samples: &[BoundaryPoint], threshold: f64) -> Result<BlockStructure> {
    let source = map.source();
    let target = map.target();
    let diff = BoundaryDifferential::new(map);
    let n = source.n_blocks();
    let nt = target.n_blocks();
    let mut out = BlockStructure {
        hits: vec![BTreeSet::new(); n],
        w_magnitudes: vec![vec![0.0; nt]; n],
        max_e_component: 0.0,
        radial_magnitudes: vec![vec![0.0; nt]; n],
        radial_w_leak: 0.0,
        max_cr_residual: 0.0,
    };
    for pt in samples {
        for i in 0..n {
            for lambda in 0..source.dim(i) {
                let w = crframe::field_w(source, pt, i, lambda)?;
                let (image, pushed, residual) = diff.pushforward(pt, &w)?;
                out.max_cr_residual = out.max_cr_residual.max(residual);
                let parts = crframe::frame_decompose(target, &image, &pushed)?;
                for l in 0..nt {
                    let size = parts.w_magnitude(l);
                    out.w_magnitudes[i][l] = out.w_magnitudes[i][l].max(size);
                    if size > threshold {
                        out.hits[i].insert(l);
                    }
                    out.max_e_component = out.max_e_component.max(parts.e_parts[l].norm());
                }
            }
            let e = crframe::field_e(source, pt, i)?;
            let (image, pushed, residual) = diff.pushforward(pt, &e)?;
            out.max_cr_residual = out.max_cr_residual.max(residual);
            let parts = crframe::frame_decompose(target, &image, &pushed)?;
            for l in 0..nt {
                out.radial_magnitudes[i][l] = out.radial_magnitudes[i][l].max(parts.e_parts[l].norm());
                out.radial_w_leak = out.radial_w_leak.max(parts.w_magnitude(l));
            }
        }
    }
    Ok(out)
}

/// Boundary-to-boundary and interior-to-interior check by sampling.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ProperReport {
    pub boundary_samples: usize,
    pub boundary_pass_fraction: f64,
    pub max_boundary_residual: f64,
    pub interior_samples: usize,
    pub interior_pass_fraction: f64,
    pub pass: bool,
}

pub fn verify_proper(
    map: &PolyMap,
    n_boundary: usize,
    n_interior: usize,
    seed: u64,
    tol: f64,
) -> Result<ProperReport> {
    let source = map.source();
    let target = map.target();
    let mut boundary_ok = 0;
    let mut max_residual: f64 = 0.0;
    if n_boundary > 0 {
        for pt in sample_boundary(source, n_boundary, seed, DEFAULT_SP_MARGIN)? {
            let image = map.eval_map(&pt.to_ambient(source)?)?;
            let r = defining_unbounded(target, &image)?.abs();
            max_residual = max_residual.max(r);
            if r < tol {
                boundary_ok += 1;
            }
        }
    }
    let mut interior_ok = 0;
    if n_interior > 0 {
        for p in sample_interior_unbounded(source, n_interior, seed.wrapping_add(1), DEFAULT_SP_MARGIN)? {
            let image = map.eval_map(&p)?;
            if classify_point(target, &image, tol)? == PointClass::Interior {
                interior_ok += 1;
            }
        }
    }
    let fraction = |ok: usize, n: usize| if n == 0 { 1.0 } else { ok as f64 / n as f64 };
    let boundary_pass_fraction = fraction(boundary_ok, n_boundary);
    let interior_pass_fraction = fraction(interior_ok, n_interior);
    Ok(ProperReport {
        boundary_samples: n_boundary,
        boundary_pass_fraction,
        max_boundary_residual: max_residual,
        interior_samples: n_interior,
        interior_pass_fraction,
        pass: boundary_pass_fraction == 1.0 && interior_pass_fraction == 1.0,
    })
}
