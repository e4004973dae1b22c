//! CR frame on the strongly pseudoconvex part of the unbounded boundary.
//!
//! In the coordinates `(x, w)` the CR fields are
//! `L^l_j = d/dw^l_j + i a_j ||w_j||^{2(a_j-1)} conj(w^l_j) d/dx`, the radial
//! fields are `E_j = (1/a_j) sum_m w^m_j L^m_j`, and `W^l_j` is the projection
//! of `L^l_j` Levi-orthogonal to all `E_k`. A (1,0) tangent vector is stored by
//! its `d/dx` and `d/dw` coefficients.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::geometry::{norm_sq, BlockSignature, BoundaryPoint};

const I: Complex64 = Complex64::new(0.0, 1.0);
const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Relative tolerance on `|theta(X)|` before a vector is rejected as non-tangent.
pub const TANGENCY_TOL: f64 = 1e-8;

/// Coefficients of `c_x d/dx + sum c^l_j d/dw^l_j` at some base point.
#[derive(Clone, Debug, PartialEq)]
pub struct CoordTangent {
    pub c_x: Complex64,
    pub c_w: Vec<Vec<Complex64>>,
}

impl CoordTangent {
    pub fn zero(sig: &BlockSignature) -> Self {
        Self {
            c_x: ZERO,
            c_w: sig.dims().iter().map(|&m| vec![ZERO; m]).collect(),
        }
    }

    /// `d/dx`.
    pub fn dx(sig: &BlockSignature) -> Self {
        Self {
            c_x: Complex64::new(1.0, 0.0),
            ..Self::zero(sig)
        }
    }

    /// The unique (1,0) CR vector with the given `d/dw` coefficients,
    /// i.e. `sum c^l_j L^l_j`.
    pub fn from_l_coefficients(
        sig: &BlockSignature,
        pt: &BoundaryPoint,
        c_w: Vec<Vec<Complex64>>,
    ) -> Result<Self> {
        sig.check_blocks(&c_w)?;
        sig.check_blocks(&pt.w)?;
        let c_x = I * weighted_pairing(sig, pt, &c_w);
        Ok(Self { c_x, c_w })
    }

    pub fn scale(&self, s: Complex64) -> Self {
        Self {
            c_x: self.c_x * s,
            c_w: self.c_w.iter().map(|b| b.iter().map(|c| c * s).collect()).collect(),
        }
    }

    /// `self += s * other`.
    pub fn add_scaled(&mut self, s: Complex64, other: &Self) {
        self.c_x += s * other.c_x;
        for (a, b) in self.c_w.iter_mut().zip(&other.c_w) {
            for (x, y) in a.iter_mut().zip(b) {
                *x += s * y;
            }
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        let mut out = self.clone();
        out.add_scaled(Complex64::new(-1.0, 0.0), other);
        out
    }

    /// Largest coefficient modulus.
    pub fn max_abs(&self) -> f64 {
        self.c_w
            .iter()
            .flatten()
            .map(|c| c.norm())
            .fold(self.c_x.norm(), f64::max)
    }
}

/// Label of a frame field.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum FrameLabel {
    W { block: usize, index: usize },
    E { block: usize },
}

/// Coordinates of a (1,0) tangent vector in the frame `{W^l_j} u {E_j}`.
///
/// `w_parts[j]` is determined only modulo the kernel direction `w_j`
/// (`sum_l w^l_j W^l_j = 0`); the representative returned has
/// `sum_l w_parts[j][l] conj(w^l_j) = 0`.
#[derive(Clone, Debug, PartialEq)]
pub struct FrameCoefficients {
    pub w_parts: Vec<Vec<Complex64>>,
    pub e_parts: Vec<Complex64>,
}

impl FrameCoefficients {
    /// Euclidean size of the W-part in block `j`.
    pub fn w_magnitude(&self, block: usize) -> f64 {
        norm_sq(&self.w_parts[block]).sqrt()
    }
}

/// `a_j ||w_j||^{2(a_j - 1)}`.
fn weight(sig: &BlockSignature, pt: &BoundaryPoint, block: usize) -> f64 {
    let a = sig.exponent(block);
    a as f64 * pt.block_norm_sq(block).powi(a as i32 - 1)
}

/// `sum_j a_j ||w_j||^{2(a_j-1)} sum_l conj(w^l_j) c^l_j`.
fn weighted_pairing(sig: &BlockSignature, pt: &BoundaryPoint, c_w: &[Vec<Complex64>]) -> Complex64 {
    (0..sig.n_blocks())
        .map(|j| {
            let s: Complex64 = pt.w[j].iter().zip(&c_w[j]).map(|(w, c)| w.conj() * c).sum();
            s * weight(sig, pt, j)
        })
        .sum()
}

fn check_index(sig: &BlockSignature, block: usize, index: Option<usize>) -> Result<()> {
    if block >= sig.n_blocks() {
        return Err(Error::IndexOutOfRange(format!(
            "block {block} (signature has {} blocks)",
            sig.n_blocks()
        )));
    }
    if let Some(l) = index {
        if l >= sig.dim(block) {
            return Err(Error::IndexOutOfRange(format!(
                "index {l} in block {block} of dimension {}",
                sig.dim(block)
            )));
        }
    }
    Ok(())
}

fn nondegenerate(pt: &BoundaryPoint, block: usize) -> Result<f64> {
    let r = pt.block_norm_sq(block);
    if r == 0.0 {
        return Err(Error::DegenerateBasePoint(block));
    }
    Ok(r)
}

fn require_strongly_pseudoconvex(sig: &BlockSignature, pt: &BoundaryPoint) -> Result<()> {
    sig.check_blocks(&pt.w)?;
    for j in 0..sig.n_blocks() {
        nondegenerate(pt, j)?;
    }
    Ok(())
}

pub fn field_l(sig: &BlockSignature, pt: &BoundaryPoint, block: usize, index: usize) -> Result<CoordTangent> {
    check_index(sig, block, Some(index))?;
    sig.check_blocks(&pt.w)?;
    let mut t = CoordTangent::zero(sig);
    t.c_w[block][index] = Complex64::new(1.0, 0.0);
    t.c_x = I * weight(sig, pt, block) * pt.w[block][index].conj();
    Ok(t)
}

pub fn field_e(sig: &BlockSignature, pt: &BoundaryPoint, block: usize) -> Result<CoordTangent> {
    check_index(sig, block, None)?;
    sig.check_blocks(&pt.w)?;
    let a = sig.exponent(block) as f64;
    let mut t = CoordTangent::zero(sig);
    for (mu, w) in pt.w[block].iter().enumerate() {
        t.add_scaled(w / a, &field_l(sig, pt, block, mu)?);
    }
    Ok(t)
}

/// `W^l_j = sum_m (delta_lm - conj(w^l_j) w^m_j / ||w_j||^2) L^m_j`.
pub fn field_w(sig: &BlockSignature, pt: &BoundaryPoint, block: usize, index: usize) -> Result<CoordTangent> {
    check_index(sig, block, Some(index))?;
    sig.check_blocks(&pt.w)?;
    let r = nondegenerate(pt, block)?;
    let wl = pt.w[block][index].conj();
    let mut t = CoordTangent::zero(sig);
    for (mu, w) in pt.w[block].iter().enumerate() {
        let delta = if mu == index { 1.0 } else { 0.0 };
        t.add_scaled(delta - wl * w / r, &field_l(sig, pt, block, mu)?);
    }
    Ok(t)
}

pub fn frame_field(sig: &BlockSignature, pt: &BoundaryPoint, label: FrameLabel) -> Result<CoordTangent> {
    match label {
        FrameLabel::W { block, index } => field_w(sig, pt, block, index),
        FrameLabel::E { block } => field_e(sig, pt, block),
    }
}

/// Every frame label of a signature, W fields first.
pub fn frame_labels(sig: &BlockSignature) -> Vec<FrameLabel> {
    let mut out: Vec<FrameLabel> = (0..sig.n_blocks())
        .flat_map(|block| (0..sig.dim(block)).map(move |index| FrameLabel::W { block, index }))
        .collect();
    out.extend((0..sig.n_blocks()).map(|block| FrameLabel::E { block }));
    out
}

/// `theta(v)` for a (1,0) vector (the `d conj(w)` part of theta pairs to 0).
pub fn theta_eval(sig: &BlockSignature, pt: &BoundaryPoint, v: &CoordTangent) -> Result<Complex64> {
    sig.check_blocks(&v.c_w)?;
    sig.check_blocks(&pt.w)?;
    Ok(v.c_x - I * weighted_pairing(sig, pt, &v.c_w))
}

/// Levi form `Levi(X, conj Y)` of two (1,0) CR vectors, from the bracket
/// `theta([L^l_j, conj L^m_j]) = -2i a_j ||w_j||^{2(a_j-1)} (delta + (a_j-1) conj(w^l) w^m / ||w_j||^2)`.
pub fn levi_form(sig: &BlockSignature, pt: &BoundaryPoint, x: &CoordTangent, y: &CoordTangent) -> Result<Complex64> {
    sig.check_blocks(&x.c_w)?;
    sig.check_blocks(&y.c_w)?;
    sig.check_blocks(&pt.w)?;
    let mut total = ZERO;
    for j in 0..sig.n_blocks() {
        let a = sig.exponent(j) as i32;
        let r = pt.block_norm_sq(j);
        let cd: Complex64 = x.c_w[j].iter().zip(&y.c_w[j]).map(|(c, d)| c * d.conj()).sum();
        let mut value = r.powi(a - 1) * cd;
        if a > 1 {
            let cw: Complex64 = x.c_w[j].iter().zip(&pt.w[j]).map(|(c, w)| c * w.conj()).sum();
            let dw: Complex64 = y.c_w[j].iter().zip(&pt.w[j]).map(|(d, w)| d.conj() * w).sum();
            value += (a - 1) as f64 * r.powi(a - 2) * cw * dw;
        }
        total += 2.0 * a as f64 * value;
    }
    Ok(total)
}

/// Closed-form Levi table on frame labels, transcribed entry by entry:
///
/// * `Levi(W^l_j, conj W^m_j) = -2 a_j ||w_j||^{2(a_j-1)} conj(w^l_j) w^m_j / ||w_j||^2`
/// * `Levi(W^l_j, conj W^m_k) = 0` for `j != k`
/// * `Levi(W^l_j, conj E_k) = 0`
/// * `Levi(E_j, conj E_j) = 2 ||w_j||^{2 a_j}`, and `0` across blocks.
///
/// The W-diagonal entry disagrees with [`levi_form`] (which carries the
/// `delta` term and the opposite sign); `verify_frame` reports the gap.
pub fn levi_pair(sig: &BlockSignature, pt: &BoundaryPoint, x: FrameLabel, y: FrameLabel) -> Result<Complex64> {
    require_strongly_pseudoconvex(sig, pt)?;
    for label in [x, y] {
        match label {
            FrameLabel::W { block, index } => check_index(sig, block, Some(index))?,
            FrameLabel::E { block } => check_index(sig, block, None)?,
        }
    }
    Ok(match (x, y) {
        (FrameLabel::W { block: j, index: l }, FrameLabel::W { block: k, index: m }) => {
            if j != k {
                ZERO
            } else {
                let r = pt.block_norm_sq(j);
                -2.0 * weight(sig, pt, j) * pt.w[j][l].conj() * pt.w[j][m] / r
            }
        }
        (FrameLabel::W { .. }, FrameLabel::E { .. }) | (FrameLabel::E { .. }, FrameLabel::W { .. }) => ZERO,
        (FrameLabel::E { block: j }, FrameLabel::E { block: k }) => {
            if j != k {
                ZERO
            } else {
                Complex64::new(2.0 * pt.block_norm_sq(j).powi(sig.exponent(j) as i32), 0.0)
            }
        }
    })
}

/// `Q(X) = X - sum_j Levi(X, conj E_j) / Levi(E_j, conj E_j) E_j`.
pub fn project_q(sig: &BlockSignature, pt: &BoundaryPoint, x: &CoordTangent) -> Result<CoordTangent> {
    require_strongly_pseudoconvex(sig, pt)?;
    let mut out = x.clone();
    for j in 0..sig.n_blocks() {
        let e = field_e(sig, pt, j)?;
        let coeff = levi_form(sig, pt, x, &e)? / levi_form(sig, pt, &e, &e)?;
        out.add_scaled(-coeff, &e);
    }
    Ok(out)
}

/// Splits a (1,0) tangent vector along `W_1 + ... + W_N + E`.
pub fn frame_decompose(sig: &BlockSignature, pt: &BoundaryPoint, x: &CoordTangent) -> Result<FrameCoefficients> {
    require_strongly_pseudoconvex(sig, pt)?;
    let theta = theta_eval(sig, pt, x)?;
    if theta.norm() > TANGENCY_TOL * x.max_abs().max(1.0) {
        return Err(Error::NotTangent(theta.norm()));
    }
    let mut w_parts = Vec::with_capacity(sig.n_blocks());
    let mut e_parts = Vec::with_capacity(sig.n_blocks());
    for j in 0..sig.n_blocks() {
        let a = sig.exponent(j) as f64;
        let e = field_e(sig, pt, j)?;
        let levi_ee = 2.0 * pt.block_norm_sq(j).powi(sig.exponent(j) as i32);
        let coeff = levi_form(sig, pt, x, &e)? / levi_ee;
        // What is left of block j after removing coeff * E_j is orthogonal
        // to w_j, so it is its own W-coordinate in the chosen gauge.
        let part = x.c_w[j]
            .iter()
            .zip(&pt.w[j])
            .map(|(c, w)| c - coeff * w / a)
            .collect();
        w_parts.push(part);
        e_parts.push(coeff);
    }
    Ok(FrameCoefficients { w_parts, e_parts })
}

/// `sum w_parts W + sum e_parts E`, assembled from the frame fields.
pub fn frame_reconstruct(sig: &BlockSignature, pt: &BoundaryPoint, coeffs: &FrameCoefficients) -> Result<CoordTangent> {
    let mut out = CoordTangent::zero(sig);
    for j in 0..sig.n_blocks() {
        for (l, u) in coeffs.w_parts[j].iter().enumerate() {
            out.add_scaled(*u, &field_w(sig, pt, j, l)?);
        }
        out.add_scaled(coeffs.e_parts[j], &field_e(sig, pt, j)?);
    }
    Ok(out)
}

/// Real coordinates `(x, Re w, Im w)` of a boundary point.
fn real_coords(pt: &BoundaryPoint) -> Vec<f64> {
    let mut out = vec![pt.x];
    for c in pt.w.iter().flatten() {
        out.push(c.re);
        out.push(c.im);
    }
    out
}

fn from_real_coords(sig: &BlockSignature, coords: &[f64]) -> BoundaryPoint {
    let flat: Vec<Complex64> = coords[1..]
        .chunks(2)
        .map(|p| Complex64::new(p[0], p[1]))
        .collect();
    BoundaryPoint::new(coords[0], sig.split(&flat).expect("shape preserved"))
}

/// A complex vector with components on `d/dx`, `d/dw`, `d/dconj(w)`.
struct FullVector {
    x: Complex64,
    dw: Vec<Complex64>,
    dwbar: Vec<Complex64>,
}

impl FullVector {
    fn of(v: &CoordTangent) -> Self {
        let dw: Vec<Complex64> = v.c_w.iter().flatten().copied().collect();
        Self {
            x: v.c_x,
            dwbar: vec![ZERO; dw.len()],
            dw,
        }
    }

    fn conj_of(v: &CoordTangent) -> Self {
        let dwbar: Vec<Complex64> = v.c_w.iter().flatten().map(|c| c.conj()).collect();
        Self {
            x: v.c_x.conj(),
            dw: vec![ZERO; dwbar.len()],
            dwbar,
        }
    }

    /// Components on the real coordinate basis `(d/dx, d/da, d/db)`.
    fn real_components(&self) -> Vec<Complex64> {
        let mut out = vec![self.x];
        for (p, q) in self.dw.iter().zip(&self.dwbar) {
            out.push((p + q) / 2.0);
            out.push(I * (q - p) / 2.0);
        }
        out
    }
}

/// `theta` at a point, applied to a complex vector with w and conj(w) parts.
fn theta_full(sig: &BlockSignature, pt: &BoundaryPoint, v: &FullVector) -> Complex64 {
    let mut acc = v.x;
    let mut k = 0;
    for j in 0..sig.n_blocks() {
        let wt = weight(sig, pt, j);
        for w in &pt.w[j] {
            acc -= I * wt * (w.conj() * v.dw[k] - w * v.dwbar[k]);
            k += 1;
        }
    }
    acc
}

/// Derivative of `f` along a constant complex vector field, by second-order
/// central differences in the real coordinates.
fn directional<F: Fn(&BoundaryPoint) -> Complex64>(
    sig: &BlockSignature,
    pt: &BoundaryPoint,
    v: &FullVector,
    h: f64,
    f: F,
) -> Complex64 {
    let base = real_coords(pt);
    let comps = v.real_components();
    let along = |dir: &[f64]| -> Complex64 {
        let shifted = |s: f64| {
            let c: Vec<f64> = base.iter().zip(dir).map(|(b, d)| b + s * d).collect();
            f(&from_real_coords(sig, &c))
        };
        (shifted(h) - shifted(-h)) / (2.0 * h)
    };
    let re: Vec<f64> = comps.iter().map(|c| c.re).collect();
    let im: Vec<f64> = comps.iter().map(|c| c.im).collect();
    along(&re) + I * along(&im)
}

/// `-i d theta(X, conj Y)` by finite differences, extending `X` and `conj Y`
/// as constant-coefficient fields (so their bracket vanishes).
pub fn levi_finite_difference(
    sig: &BlockSignature,
    pt: &BoundaryPoint,
    x: &CoordTangent,
    y: &CoordTangent,
    h: f64,
) -> Result<Complex64> {
    sig.check_blocks(&x.c_w)?;
    sig.check_blocks(&y.c_w)?;
    sig.check_blocks(&pt.w)?;
    let xv = FullVector::of(x);
    let ybar = FullVector::conj_of(y);
    let x_theta_ybar = directional(sig, pt, &xv, h, |p| theta_full(sig, p, &ybar));
    let ybar_theta_x = directional(sig, pt, &ybar, h, |p| theta_full(sig, p, &xv));
    Ok(-I * (x_theta_ybar - ybar_theta_x))
}

/// Largest violation of each frame invariant over a sample set.
#[derive(Clone, Debug, PartialEq)]
pub struct FrameInvariantReport {
    /// `|theta(v)|` over every L, E and W field.
    pub theta_annihilation: f64,
    /// `|sum_l w^l_j W^l_j|`.
    pub kernel_relation: f64,
    /// Levi entries that vanish in the closed-form table, evaluated on the fields.
    pub levi_zero_entries: f64,
    pub q_idempotence: f64,
    /// `|Levi(Q X, conj E_j)|`.
    pub q_orthogonality: f64,
    pub reconstruction: f64,
    /// Relative gap between finite differences and the table on `E_j, E_j`.
    pub e_diagonal_fd_relative: f64,
    /// Relative gap between finite differences and the table on `W^l_j, W^m_j`.
    pub w_diagonal_table_gap: f64,
    /// Relative gap between finite differences and [`levi_form`] on the W diagonal.
    pub w_diagonal_bracket_gap: f64,
}

/// Runs every frame check at `points`; finite-difference checks use the first
/// `fd_points` of them. Random test vectors come from `seed`.
pub fn check_frame_invariants(
    sig: &BlockSignature,
    points: &[BoundaryPoint],
    fd_points: usize,
    seed: u64,
) -> Result<FrameInvariantReport> {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut r = FrameInvariantReport {
        theta_annihilation: 0.0,
        kernel_relation: 0.0,
        levi_zero_entries: 0.0,
        q_idempotence: 0.0,
        q_orthogonality: 0.0,
        reconstruction: 0.0,
        e_diagonal_fd_relative: 0.0,
        w_diagonal_table_gap: 0.0,
        w_diagonal_bracket_gap: 0.0,
    };
    let labels = frame_labels(sig);
    for (k, pt) in points.iter().enumerate() {
        require_strongly_pseudoconvex(sig, pt)?;
        let fields: Vec<CoordTangent> = labels
            .iter()
            .map(|&l| frame_field(sig, pt, l))
            .collect::<Result<_>>()?;
        for j in 0..sig.n_blocks() {
            for l in 0..sig.dim(j) {
                let v = field_l(sig, pt, j, l)?;
                r.theta_annihilation = r.theta_annihilation.max(theta_eval(sig, pt, &v)?.norm());
            }
            let mut kernel = CoordTangent::zero(sig);
            for (l, w) in pt.w[j].iter().enumerate() {
                kernel.add_scaled(*w, &field_w(sig, pt, j, l)?);
            }
            r.kernel_relation = r.kernel_relation.max(kernel.max_abs());
        }
        for (a, x) in labels.iter().zip(&fields) {
            r.theta_annihilation = r.theta_annihilation.max(theta_eval(sig, pt, x)?.norm());
            for (b, y) in labels.iter().zip(&fields) {
                if levi_pair(sig, pt, *a, *b)? == ZERO {
                    r.levi_zero_entries = r.levi_zero_entries.max(levi_form(sig, pt, x, y)?.norm());
                }
            }
        }
        let c_w = sig
            .dims()
            .iter()
            .map(|&m| {
                (0..m)
                    .map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
                    .collect()
            })
            .collect();
        let x = CoordTangent::from_l_coefficients(sig, pt, c_w)?;
        let q = project_q(sig, pt, &x)?;
        r.q_idempotence = r.q_idempotence.max(project_q(sig, pt, &q)?.sub(&q).max_abs());
        for j in 0..sig.n_blocks() {
            let e = field_e(sig, pt, j)?;
            r.q_orthogonality = r.q_orthogonality.max(levi_form(sig, pt, &q, &e)?.norm());
        }
        let back = frame_reconstruct(sig, pt, &frame_decompose(sig, pt, &x)?)?;
        r.reconstruction = r.reconstruction.max(back.sub(&x).max_abs());

        if k < fd_points {
            for j in 0..sig.n_blocks() {
                let e = field_e(sig, pt, j)?;
                let table = levi_pair(sig, pt, FrameLabel::E { block: j }, FrameLabel::E { block: j })?;
                let fd = levi_finite_difference(sig, pt, &e, &e, FD_STEP)?;
                r.e_diagonal_fd_relative = r.e_diagonal_fd_relative.max((fd - table).norm() / table.norm());
                for l in 0..sig.dim(j) {
                    let wl = field_w(sig, pt, j, l)?;
                    for m in 0..sig.dim(j) {
                        let wm = field_w(sig, pt, j, m)?;
                        let fd = levi_finite_difference(sig, pt, &wl, &wm, FD_STEP)?;
                        let scale = 2.0 * weight(sig, pt, j);
                        let table = levi_pair(
                            sig,
                            pt,
                            FrameLabel::W { block: j, index: l },
                            FrameLabel::W { block: j, index: m },
                        )?;
                        let bracket = levi_form(sig, pt, &wl, &wm)?;
                        r.w_diagonal_table_gap = r.w_diagonal_table_gap.max((fd - table).norm() / scale);
                        r.w_diagonal_bracket_gap = r.w_diagonal_bracket_gap.max((fd - bracket).norm() / scale);
                    }
                }
            }
        }
    }
    Ok(r)
}

/// Step for the central differences in [`check_frame_invariants`].
pub const FD_STEP: f64 = 1e-5;
