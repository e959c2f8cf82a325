//! Group elements, their actions on point clouds, random element samplers,
//! and orbit-equivalence oracles used as ground truth by the verification
//! harness and the test suites.
//!
//! The oracles are exact up to documented tolerance semantics: two clouds
//! count as orbit-equal when some group element maps one onto the other
//! within `eq_tol` relative to the cloud scale. For the non-compact groups
//! (indefinite orthogonal, special linear, general linear) the oracles are
//! only sound on full-rank clouds and report `RankDeficient` otherwise.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{det, gram, numeric_rank, PointCloud, ToleranceConfig};
use crate::rng::SeededRng;

/// Hard cap on factorial enumeration of column permutations.
pub const PERM_BRUTE_FORCE_LIMIT: usize = 8;

/// Rejection threshold on |det| when sampling SL(d) / GL(d) elements.
const DET_REJECT: f64 = 1e-6;

/// The supported group actions on `d x n` point clouds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GroupTag {
    /// Column permutations (right multiplication).
    Perm,
    /// Orthogonal matrices from the left.
    Orth,
    /// Rotations (orthogonal, det +1) from the left.
    SpecialOrth,
    /// Isometries of an indefinite diagonal form with `p` plus and `q` minus signs.
    IndefOrth { p: usize, q: usize },
    /// Volume-preserving matrices (det 1) from the left.
    SpecialLinear,
    /// Invertible matrices from the left.
    GeneralLinear,
    /// Adding a fixed vector to every column.
    Translation,
    /// Positive scalar multiplication.
    Scaling,
}

impl GroupTag {
    /// Groups acting by left matrix multiplication.
    pub fn is_matrix_group(&self) -> bool {
        matches!(
            self,
            GroupTag::Orth
                | GroupTag::SpecialOrth
                | GroupTag::IndefOrth { .. }
                | GroupTag::SpecialLinear
                | GroupTag::GeneralLinear
        )
    }

    /// Groups whose orbit oracle is only sound on full-rank clouds.
    pub fn oracle_requires_full_rank(&self) -> bool {
        matches!(
            self,
            GroupTag::IndefOrth { .. } | GroupTag::SpecialLinear | GroupTag::GeneralLinear
        )
    }

    pub fn label(&self) -> String {
        match self {
            GroupTag::Perm => "perm".into(),
            GroupTag::Orth => "orth".into(),
            GroupTag::SpecialOrth => "so".into(),
            GroupTag::IndefOrth { p, q } => format!("indef({p},{q})"),
            GroupTag::SpecialLinear => "sl".into(),
            GroupTag::GeneralLinear => "gl".into(),
            GroupTag::Translation => "translation".into(),
            GroupTag::Scaling => "scaling".into(),
        }
    }
}

/// A symmetric invertible bilinear form.
#[derive(Debug, Clone, PartialEq)]
pub struct QForm {
    mat: DMatrix<f64>,
}

impl QForm {
    /// Diagonal form with `p` entries `+1` followed by `q` entries `-1`.
    pub fn from_signature(p: usize, q: usize) -> Self {
        let d = p + q;
        Self {
            mat: DMatrix::from_fn(d, d, |i, j| {
                if i != j {
                    0.0
                } else if i < p {
                    1.0
                } else {
                    -1.0
                }
            }),
        }
    }

    /// General symmetric invertible form.
    pub fn new(mat: DMatrix<f64>, cfg: &ToleranceConfig) -> Result<Self> {
        if mat.nrows() != mat.ncols() {
            return Err(Error::ShapeMismatch("Q must be square".into()));
        }
        if (&mat - mat.transpose()).amax() > cfg.eq_tol * mat.amax().max(1.0) {
            return Err(Error::InvalidArgument("Q must be symmetric".into()));
        }
        if crate::numerics::numeric_rank_mat(&mat, cfg.rank_tol) < mat.nrows() {
            return Err(Error::RankDeficient("Q must be invertible".into()));
        }
        Ok(Self { mat })
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.mat
    }
}

/// One concrete element of a group action.
#[derive(Debug, Clone, PartialEq)]
pub enum GroupElement {
    /// `sigma`, acting by `Y[:, j] = X[:, sigma[j]]`.
    Permutation(Vec<usize>),
    Orthogonal(DMatrix<f64>),
    SpecialOrthogonal(DMatrix<f64>),
    QIsometry {
        mat: DMatrix<f64>,
        p: usize,
        q: usize,
    },
    SpecialLinear(DMatrix<f64>),
    GeneralLinear(DMatrix<f64>),
    Translation(Vec<f64>),
    Scaling(f64),
}

impl GroupElement {
    pub fn tag(&self) -> GroupTag {
        match self {
            GroupElement::Permutation(_) => GroupTag::Perm,
            GroupElement::Orthogonal(_) => GroupTag::Orth,
            GroupElement::SpecialOrthogonal(_) => GroupTag::SpecialOrth,
            GroupElement::QIsometry { p, q, .. } => GroupTag::IndefOrth { p: *p, q: *q },
            GroupElement::SpecialLinear(_) => GroupTag::SpecialLinear,
            GroupElement::GeneralLinear(_) => GroupTag::GeneralLinear,
            GroupElement::Translation(_) => GroupTag::Translation,
            GroupElement::Scaling(_) => GroupTag::Scaling,
        }
    }

    /// Checks the defining constraint of the element's group.
    pub fn validate(&self, cfg: &ToleranceConfig) -> Result<()> {
        match self {
            GroupElement::Permutation(p) => {
                let mut seen = vec![false; p.len()];
                for &i in p {
                    if i >= p.len() || seen[i] {
                        return Err(Error::InvalidArgument("not a permutation".into()));
                    }
                    seen[i] = true;
                }
                Ok(())
            }
            GroupElement::Orthogonal(m) => {
                let d = m.nrows();
                let dev = (m.transpose() * m - DMatrix::identity(d, d)).norm();
                if dev > cfg.eq_tol {
                    return Err(Error::InvalidArgument(format!(
                        "not orthogonal: |g^T g - I| = {dev:.3e}"
                    )));
                }
                Ok(())
            }
            GroupElement::SpecialOrthogonal(m) => {
                GroupElement::Orthogonal(m.clone()).validate(cfg)?;
                if (det(m) - 1.0).abs() > cfg.eq_tol {
                    return Err(Error::InvalidArgument("not a rotation: det != 1".into()));
                }
                Ok(())
            }
            GroupElement::QIsometry { mat, p, q } => {
                let form = QForm::from_signature(*p, *q);
                let dev = (mat.transpose() * form.matrix() * mat - form.matrix()).norm();
                // boosts amplify roundoff, so allow the deviation to scale with |U|^2
                let scale = mat.norm_squared().max(1.0);
                if dev > cfg.eq_tol * scale {
                    return Err(Error::InvalidArgument(format!(
                        "not a Q-isometry: |U^T Q U - Q| = {dev:.3e}"
                    )));
                }
                Ok(())
            }
            GroupElement::SpecialLinear(m) => {
                if (det(m) - 1.0).abs() > cfg.eq_tol {
                    return Err(Error::InvalidArgument("det != 1".into()));
                }
                Ok(())
            }
            GroupElement::GeneralLinear(m) => {
                if det(m).abs() <= cfg.rank_tol {
                    return Err(Error::InvalidArgument("matrix is singular".into()));
                }
                Ok(())
            }
            GroupElement::Translation(t) => {
                if t.iter().any(|v| !v.is_finite()) {
                    return Err(Error::NonFinite("translation vector".into()));
                }
                Ok(())
            }
            GroupElement::Scaling(c) => {
                if !(c.is_finite() && *c > 0.0) {
                    return Err(Error::InvalidArgument("scale must be positive".into()));
                }
                Ok(())
            }
        }
    }
}

/// Applies a group element to a cloud.
pub fn apply(g: &GroupElement, x: &PointCloud) -> Result<PointCloud> {
    match g {
        GroupElement::Permutation(p) => {
            if p.len() != x.n() {
                return Err(Error::ShapeMismatch(format!(
                    "permutation length {} vs n = {}",
                    p.len(),
                    x.n()
                )));
            }
            let mat = DMatrix::from_fn(x.d(), x.n(), |i, j| x.matrix()[(i, p[j])]);
            PointCloud::new(mat)
        }
        GroupElement::Orthogonal(m)
        | GroupElement::SpecialOrthogonal(m)
        | GroupElement::QIsometry { mat: m, .. }
        | GroupElement::SpecialLinear(m)
        | GroupElement::GeneralLinear(m) => {
            if m.ncols() != x.d() {
                return Err(Error::ShapeMismatch(format!(
                    "matrix is {}x{} but cloud has d = {}",
                    m.nrows(),
                    m.ncols(),
                    x.d()
                )));
            }
            PointCloud::new(m * x.matrix())
        }
        GroupElement::Translation(t) => {
            if t.len() != x.d() {
                return Err(Error::ShapeMismatch(format!(
                    "translation length {} vs d = {}",
                    t.len(),
                    x.d()
                )));
            }
            let mat = DMatrix::from_fn(x.d(), x.n(), |i, j| x.matrix()[(i, j)] + t[i]);
            PointCloud::new(mat)
        }
        GroupElement::Scaling(c) => PointCloud::new(x.matrix() * *c),
    }
}

/// Haar-distributed orthogonal matrix: QR of a Gaussian matrix with the
/// R-diagonal sign correction.
pub fn haar_orthogonal(d: usize, rng: &mut SeededRng) -> DMatrix<f64> {
    let g = DMatrix::from_fn(d, d, |_, _| rng.normal());
    let qr = g.qr();
    let r = qr.r();
    let mut q = qr.q();
    for i in 0..d {
        if r[(i, i)] < 0.0 {
            for k in 0..d {
                q[(k, i)] = -q[(k, i)];
            }
        }
    }
    q
}

fn sample_special_orthogonal(d: usize, rng: &mut SeededRng) -> DMatrix<f64> {
    let mut m = haar_orthogonal(d, rng);
    if det(&m) < 0.0 {
        for k in 0..d {
            m[(k, d - 1)] = -m[(k, d - 1)];
        }
    }
    m
}

/// Product of `2(p+q)` random planar rotations (within like-sign coordinate
/// pairs) and hyperbolic rotations (across mixed-sign pairs). Not Haar, but
/// full of variety for invariance fuzzing.
fn sample_q_isometry(p: usize, q: usize, rng: &mut SeededRng) -> DMatrix<f64> {
    let d = p + q;
    let mut u = DMatrix::identity(d, d);
    if d < 2 {
        return u;
    }
    let sign = |i: usize| i < p;
    for _ in 0..2 * d {
        let i = rng.index(d);
        let mut j = rng.index(d - 1);
        if j >= i {
            j += 1;
        }
        let (i, j) = (i.min(j), i.max(j));
        let (a, b, c, e) = if sign(i) == sign(j) {
            let theta = rng.uniform(0.0, std::f64::consts::TAU);
            (theta.cos(), -theta.sin(), theta.sin(), theta.cos())
        } else {
            let r = rng.uniform(-2.0, 2.0);
            (r.cosh(), r.sinh(), r.sinh(), r.cosh())
        };
        // rows i and j of u <- factor * u
        for col in 0..d {
            let (ri, rj) = (u[(i, col)], u[(j, col)]);
            u[(i, col)] = a * ri + b * rj;
            u[(j, col)] = c * ri + e * rj;
        }
    }
    u
}

fn sample_special_linear(d: usize, rng: &mut SeededRng) -> DMatrix<f64> {
    loop {
        let mut m = DMatrix::from_fn(d, d, |_, _| rng.normal());
        let dt = det(&m);
        if dt.abs() < DET_REJECT {
            continue;
        }
        if dt < 0.0 {
            for k in 0..d {
                m[(k, 0)] = -m[(k, 0)];
            }
        }
        let s = dt.abs().powf(-1.0 / d as f64);
        return m * s;
    }
}

fn sample_general_linear(d: usize, rng: &mut SeededRng) -> DMatrix<f64> {
    loop {
        let m = DMatrix::from_fn(d, d, |_, _| rng.normal());
        if det(&m).abs() >= DET_REJECT {
            return m;
        }
    }
}

/// Draws a random element of the given group.
///
/// For the non-compact groups the sampling distribution is a pragmatic
/// choice with wide support, not a canonical measure.
pub fn sample_element(tag: GroupTag, d: usize, n: usize, rng: &mut SeededRng) -> GroupElement {
    match tag {
        GroupTag::Perm => GroupElement::Permutation(rng.permutation(n)),
        GroupTag::Orth => GroupElement::Orthogonal(haar_orthogonal(d, rng)),
        GroupTag::SpecialOrth => GroupElement::SpecialOrthogonal(sample_special_orthogonal(d, rng)),
        GroupTag::IndefOrth { p, q } => {
            assert_eq!(p + q, d, "signature must satisfy p + q = d");
            GroupElement::QIsometry {
                mat: sample_q_isometry(p, q, rng),
                p,
                q,
            }
        }
        GroupTag::SpecialLinear => GroupElement::SpecialLinear(sample_special_linear(d, rng)),
        GroupTag::GeneralLinear => GroupElement::GeneralLinear(sample_general_linear(d, rng)),
        GroupTag::Translation => GroupElement::Translation(rng.normal_vec(d)),
        GroupTag::Scaling => GroupElement::Scaling(rng.normal().exp()),
    }
}

/// True iff some element of the tagged group maps `x` onto `y` within
/// `eq_tol` of the cloud scale.
pub fn orbit_equal(
    tag: GroupTag,
    x: &PointCloud,
    y: &PointCloud,
    cfg: &ToleranceConfig,
) -> Result<bool> {
    if x.d() != y.d() || x.n() != y.n() {
        return Err(Error::ShapeMismatch(format!(
            "clouds are {}x{} and {}x{}",
            x.d(),
            x.n(),
            y.d(),
            y.n()
        )));
    }
    match tag {
        GroupTag::Perm => perm_orbit_equal(x, y, cfg),
        GroupTag::Orth => gram_close(x, y, None, cfg),
        GroupTag::SpecialOrth => so_orbit_equal(x, y, cfg),
        GroupTag::IndefOrth { p, q } => {
            if p + q != x.d() {
                return Err(Error::InvalidArgument(format!(
                    "signature ({p},{q}) does not match d = {}",
                    x.d()
                )));
            }
            require_full_rank(x, y, cfg, "indefinite-orthogonal")?;
            let form = QForm::from_signature(p, q);
            gram_close(x, y, Some(form.matrix()), cfg)
        }
        GroupTag::SpecialLinear => sl_orbit_equal(x, y, cfg),
        GroupTag::GeneralLinear => gl_orbit_equal(x, y, cfg),
        GroupTag::Translation => translation_orbit_equal(x, y, cfg),
        GroupTag::Scaling => scaling_orbit_equal(x, y, cfg),
    }
}

fn cloud_scale(x: &PointCloud, y: &PointCloud) -> f64 {
    x.frobenius_norm().max(y.frobenius_norm()).max(1.0)
}

fn require_full_rank(
    x: &PointCloud,
    y: &PointCloud,
    cfg: &ToleranceConfig,
    what: &str,
) -> Result<()> {
    let d = x.d();
    if numeric_rank(x, cfg) < d || numeric_rank(y, cfg) < d {
        return Err(Error::RankDeficient(format!(
            "{what} orbit test requires both clouds to have rank {d}"
        )));
    }
    Ok(())
}

/// Gram-matrix comparison: sound for any rank when Q is positive definite,
/// and for full-rank clouds otherwise.
fn gram_close(
    x: &PointCloud,
    y: &PointCloud,
    q: Option<&DMatrix<f64>>,
    cfg: &ToleranceConfig,
) -> Result<bool> {
    let gx = gram(x, q)?;
    let gy = gram(y, q)?;
    Ok((&gx - &gy).norm() <= cfg.eq_tol * gx.norm().max(1.0))
}

fn so_orbit_equal(x: &PointCloud, y: &PointCloud, cfg: &ToleranceConfig) -> Result<bool> {
    if !gram_close(x, y, None, cfg)? {
        return Ok(false);
    }
    let d = x.d();
    if numeric_rank(x, cfg) < d {
        // a reflection fixing the deficient column span turns any orthogonal
        // witness into a rotation witness
        return Ok(true);
    }
    let idx = greedy_independent_columns(x.matrix(), d);
    let det_x = det(&select_columns(x.matrix(), &idx));
    let det_y = det(&select_columns(y.matrix(), &idx));
    let hadamard: f64 = idx.iter().map(|&j| x.matrix().column(j).norm()).product();
    if det_x.abs() <= cfg.eq_tol * hadamard.max(1.0) {
        return Ok(true);
    }
    Ok((det_x > 0.0) == (det_y > 0.0))
}

fn sl_orbit_equal(x: &PointCloud, y: &PointCloud, cfg: &ToleranceConfig) -> Result<bool> {
    require_full_rank(x, y, cfg, "special-linear")?;
    let d = x.d();
    let idx = greedy_independent_columns(x.matrix(), d);
    let xi = select_columns(x.matrix(), &idx);
    let yi = select_columns(y.matrix(), &idx);
    let Some(xi_inv) = xi.try_inverse() else {
        return Err(Error::RankDeficient(
            "selected columns are numerically singular".into(),
        ));
    };
    let a = yi * xi_inv;
    let residual = (&a * x.matrix() - y.matrix()).norm();
    if residual > cfg.eq_tol * cloud_scale(x, y) {
        return Ok(false);
    }
    Ok((det(&a) - 1.0).abs() <= cfg.eq_tol)
}

fn gl_orbit_equal(x: &PointCloud, y: &PointCloud, cfg: &ToleranceConfig) -> Result<bool> {
    require_full_rank(x, y, cfg, "general-linear")?;
    let px = row_space_projector(x)?;
    let py = row_space_projector(y)?;
    Ok((&px - &py).norm() <= cfg.eq_tol * px.norm().max(1.0))
}

/// Orthogonal projector onto the row space: `X^T (X X^T)^{-1} X`.
fn row_space_projector(x: &PointCloud) -> Result<DMatrix<f64>> {
    let g = x.matrix() * x.matrix().transpose();
    let Some(g_inv) = g.try_inverse() else {
        return Err(Error::RankDeficient("X X^T is numerically singular".into()));
    };
    Ok(x.matrix().transpose() * g_inv * x.matrix())
}

fn translation_orbit_equal(x: &PointCloud, y: &PointCloud, cfg: &ToleranceConfig) -> Result<bool> {
    let n = x.n() as f64;
    let diff = y.matrix() - x.matrix();
    let mut dev = 0.0_f64;
    for i in 0..x.d() {
        let mean: f64 = diff.row(i).iter().sum::<f64>() / n;
        for j in 0..x.n() {
            dev += (diff[(i, j)] - mean).powi(2);
        }
    }
    Ok(dev.sqrt() <= cfg.eq_tol * cloud_scale(x, y))
}

fn scaling_orbit_equal(x: &PointCloud, y: &PointCloud, cfg: &ToleranceConfig) -> Result<bool> {
    let nx = x.frobenius_norm();
    let ny = y.frobenius_norm();
    let scale = nx.max(ny).max(1.0);
    let x_zero = nx <= cfg.eq_tol * scale;
    let y_zero = ny <= cfg.eq_tol * scale;
    if x_zero || y_zero {
        return Ok(x_zero && y_zero);
    }
    let c = ny / nx;
    Ok((x.matrix() * c - y.matrix()).norm() <= cfg.eq_tol * ny)
}

// ---- permutation oracle ----------------------------------------------------

/// Exact lexicographic column canonicalization.
fn canon_columns(x: &PointCloud) -> DMatrix<f64> {
    let mut order: Vec<usize> = (0..x.n()).collect();
    order.sort_unstable_by(|&a, &b| {
        for k in 0..x.d() {
            let cmp = x.matrix()[(k, a)].total_cmp(&x.matrix()[(k, b)]);
            if cmp != std::cmp::Ordering::Equal {
                return cmp;
            }
        }
        std::cmp::Ordering::Equal
    });
    DMatrix::from_fn(x.d(), x.n(), |i, j| x.matrix()[(i, order[j])])
}

/// A cloud has fragile ties when the lexicographic order of some column pair
/// is decided by a gap at most `tol` — small perturbations could flip it.
fn has_fragile_ties(x: &PointCloud, tol: f64) -> bool {
    for a in 0..x.n() {
        for b in (a + 1)..x.n() {
            for k in 0..x.d() {
                let gap = x.matrix()[(k, a)] - x.matrix()[(k, b)];
                if gap != 0.0 {
                    if gap.abs() <= tol {
                        return true;
                    }
                    break;
                }
            }
        }
    }
    false
}

fn perm_orbit_equal(x: &PointCloud, y: &PointCloud, cfg: &ToleranceConfig) -> Result<bool> {
    let tol = cfg.eq_tol * cloud_scale(x, y);
    let cx = canon_columns(x);
    let cy = canon_columns(y);
    if (&cx - &cy).amax() <= tol {
        return Ok(true);
    }
    // Canonical forms disagree. That is conclusive unless a tolerance-scale
    // tie could have flipped the sort order.
    if !has_fragile_ties(x, 2.0 * tol) && !has_fragile_ties(y, 2.0 * tol) {
        return Ok(false);
    }
    if x.n() <= PERM_BRUTE_FORCE_LIMIT {
        perm_orbit_equal_exhaustive(x, y, cfg)
    } else {
        Err(Error::Indeterminate(format!(
            "tolerance-scale column ties at n = {} > {}",
            x.n(),
            PERM_BRUTE_FORCE_LIMIT
        )))
    }
}

/// Full n! enumeration; the reference oracle for the permutation action.
pub fn perm_orbit_equal_exhaustive(
    x: &PointCloud,
    y: &PointCloud,
    cfg: &ToleranceConfig,
) -> Result<bool> {
    let n = x.n();
    if n > PERM_BRUTE_FORCE_LIMIT {
        return Err(Error::SizeLimit(format!(
            "exhaustive permutation check capped at n = {PERM_BRUTE_FORCE_LIMIT}, got {n}"
        )));
    }
    if x.d() != y.d() || x.n() != y.n() {
        return Err(Error::ShapeMismatch("clouds differ in shape".into()));
    }
    let tol2 = (cfg.eq_tol * cloud_scale(x, y)).powi(2);
    let matches = |idx: &[usize]| -> bool {
        let mut acc = 0.0;
        for (j, &src) in idx.iter().enumerate() {
            for k in 0..x.d() {
                let delta = x.matrix()[(k, src)] - y.matrix()[(k, j)];
                acc += delta * delta;
                if acc > tol2 {
                    return false;
                }
            }
        }
        true
    };

    let mut idx: Vec<usize> = (0..n).collect();
    if matches(&idx) {
        return Ok(true);
    }
    // Heap's algorithm
    let mut c = vec![0usize; n];
    let mut i = 0;
    while i < n {
        if c[i] < i {
            if i % 2 == 0 {
                idx.swap(0, i);
            } else {
                idx.swap(c[i], i);
            }
            if matches(&idx) {
                return Ok(true);
            }
            c[i] += 1;
            i = 0;
        } else {
            c[i] = 0;
            i += 1;
        }
    }
    Ok(false)
}

// ---- shared column-selection helpers ---------------------------------------

/// Indices of `k` columns chosen by greedy residual-norm pivoting.
pub(crate) fn greedy_independent_columns(m: &DMatrix<f64>, k: usize) -> Vec<usize> {
    let mut residual = m.clone();
    let mut available: Vec<usize> = (0..m.ncols()).collect();
    let mut chosen = Vec::with_capacity(k);
    for _ in 0..k.min(m.ncols()) {
        let (pos, _) = available
            .iter()
            .enumerate()
            .map(|(pos, &j)| (pos, residual.column(j).norm()))
            .max_by(|a, b| a.1.total_cmp(&b.1))
            .expect("at least one column available");
        let j = available.remove(pos);
        chosen.push(j);
        let nrm = residual.column(j).norm();
        if nrm == 0.0 {
            break;
        }
        let u = residual.column(j).clone_owned() / nrm;
        for &kk in &available {
            let proj = u.dot(&residual.column(kk).clone_owned());
            let updated = residual.column(kk).clone_owned() - &u * proj;
            residual.set_column(kk, &updated);
        }
    }
    chosen
}

pub(crate) fn select_columns(m: &DMatrix<f64>, idx: &[usize]) -> DMatrix<f64> {
    DMatrix::from_fn(m.nrows(), idx.len(), |i, j| m[(i, idx[j])])
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    fn cfg() -> ToleranceConfig {
        ToleranceConfig::default()
    }

    #[test]
    fn apply_identity_permutation() {
        let mut rng = SeededRng::new(1, 0);
        let x = PointCloud::random_gaussian(3, 5, &mut rng);
        let id = GroupElement::Permutation((0..5).collect());
        assert_eq!(apply(&id, &x).unwrap(), x);
    }

    #[test]
    fn apply_translation_on_zero_cloud() {
        let x = PointCloud::new(DMatrix::zeros(2, 3)).unwrap();
        let g = GroupElement::Translation(vec![1.0, 1.0]);
        let y = apply(&g, &x).unwrap();
        assert!(y.matrix().iter().all(|&v| v == 1.0));
    }

    #[test]
    fn rotation_composition_matches_matrix_product() {
        let rot = |theta: f64| {
            DMatrix::from_row_slice(2, 2, &[theta.cos(), -theta.sin(), theta.sin(), theta.cos()])
        };
        let quarter = GroupElement::SpecialOrthogonal(rot(std::f64::consts::FRAC_PI_2));
        let half = GroupElement::SpecialOrthogonal(rot(std::f64::consts::PI));
        let mut rng = SeededRng::new(2, 0);
        let x = PointCloud::random_gaussian(2, 4, &mut rng);
        let twice = apply(&quarter, &apply(&quarter, &x).unwrap()).unwrap();
        let once = apply(&half, &x).unwrap();
        assert!((twice.matrix() - once.matrix()).amax() <= 1e-12);
    }

    #[test]
    fn perm_sampler_covers_s4() {
        let mut rng = SeededRng::new(3, 0);
        let mut seen = HashSet::new();
        for _ in 0..10_000 {
            if let GroupElement::Permutation(p) = sample_element(GroupTag::Perm, 2, 4, &mut rng) {
                seen.insert(p);
            }
        }
        assert_eq!(seen.len(), 24);
    }

    #[test]
    fn orth_sampler_is_orthogonal() {
        let mut rng = SeededRng::new(4, 0);
        for _ in 0..50 {
            let g = haar_orthogonal(3, &mut rng);
            let dev = (g.transpose() * &g - DMatrix::identity(3, 3)).norm();
            assert!(dev < 1e-12, "deviation {dev}");
        }
    }

    #[test]
    fn sl_sampler_has_unit_det() {
        let mut rng = SeededRng::new(5, 0);
        for _ in 0..50 {
            let GroupElement::SpecialLinear(m) =
                sample_element(GroupTag::SpecialLinear, 2, 2, &mut rng)
            else {
                panic!()
            };
            assert!((det(&m) - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn samplers_validate_for_all_tags() {
        let mut rng = SeededRng::new(6, 0);
        let tags = [
            GroupTag::Perm,
            GroupTag::Orth,
            GroupTag::SpecialOrth,
            GroupTag::IndefOrth { p: 1, q: 1 },
            GroupTag::IndefOrth { p: 2, q: 1 },
            GroupTag::SpecialLinear,
            GroupTag::GeneralLinear,
            GroupTag::Translation,
            GroupTag::Scaling,
        ];
        for tag in tags {
            let d = match tag {
                GroupTag::IndefOrth { p, q } => p + q,
                _ => 2,
            };
            for _ in 0..20 {
                let g = sample_element(tag, d, 4, &mut rng);
                g.validate(&cfg()).unwrap();
                assert_eq!(g.tag(), tag);
            }
        }
    }

    #[test]
    fn orbit_equal_accepts_true_witnesses_for_all_tags() {
        let tags = [
            GroupTag::Perm,
            GroupTag::Orth,
            GroupTag::SpecialOrth,
            GroupTag::IndefOrth { p: 1, q: 1 },
            GroupTag::SpecialLinear,
            GroupTag::GeneralLinear,
            GroupTag::Translation,
            GroupTag::Scaling,
        ];
        for (t, tag) in tags.into_iter().enumerate() {
            let mut rng = SeededRng::new(7, t as u64);
            for _ in 0..100 {
                let x = PointCloud::random_full_rank(2, 4, &cfg(), &mut rng);
                let g = sample_element(tag, 2, 4, &mut rng);
                let y = apply(&g, &x).unwrap();
                assert!(
                    orbit_equal(tag, &x, &y, &cfg()).unwrap(),
                    "tag {tag:?} rejected a true witness"
                );
                // reflexive and symmetric
                assert!(orbit_equal(tag, &x, &x, &cfg()).unwrap());
                assert!(orbit_equal(tag, &y, &x, &cfg()).unwrap());
            }
        }
    }

    #[test]
    fn orth_oracle_rejects_perturbed_cloud() {
        let mut rng = SeededRng::new(8, 0);
        for _ in 0..50 {
            let x = PointCloud::random_gaussian(2, 4, &mut rng);
            let noise = PointCloud::random_gaussian(2, 4, &mut rng);
            let y = PointCloud::new(x.matrix() + noise.matrix() * 1e-2).unwrap();
            assert!(!orbit_equal(GroupTag::Orth, &x, &y, &cfg()).unwrap());
        }
    }

    #[test]
    fn perm_oracle_on_reversed_columns() {
        let mut rng = SeededRng::new(9, 0);
        let x = PointCloud::random_gaussian(3, 5, &mut rng);
        let rev = GroupElement::Permutation((0..5).rev().collect());
        let y = apply(&rev, &x).unwrap();
        assert!(orbit_equal(GroupTag::Perm, &x, &y, &cfg()).unwrap());
    }

    #[test]
    fn perm_canonical_agrees_with_exhaustive() {
        let mut rng = SeededRng::new(10, 0);
        for trial in 0..200 {
            let n = 2 + trial % 5; // up to 6
            let x = PointCloud::random_gaussian(2, n, &mut rng);
            let y = if trial % 2 == 0 {
                let g = sample_element(GroupTag::Perm, 2, n, &mut rng);
                apply(&g, &x).unwrap()
            } else {
                PointCloud::random_gaussian(2, n, &mut rng)
            };
            let fast = orbit_equal(GroupTag::Perm, &x, &y, &cfg()).unwrap();
            let brute = perm_orbit_equal_exhaustive(&x, &y, &cfg()).unwrap();
            assert_eq!(fast, brute, "disagreement at trial {trial}");
        }
    }

    #[test]
    fn so_oracle_rejects_reflections_orth_accepts() {
        let mut rng = SeededRng::new(11, 0);
        for d in [2usize, 3] {
            let reflection = {
                let mut m = DMatrix::identity(d, d);
                m[(d - 1, d - 1)] = -1.0;
                GroupElement::Orthogonal(m)
            };
            for _ in 0..25 {
                let x = PointCloud::random_full_rank(d, d + 2, &cfg(), &mut rng);
                let y = apply(&reflection, &x).unwrap();
                assert!(orbit_equal(GroupTag::Orth, &x, &y, &cfg()).unwrap());
                assert!(!orbit_equal(GroupTag::SpecialOrth, &x, &y, &cfg()).unwrap());
            }
        }
    }

    #[test]
    fn gl_oracle_accepts_invertible_multiples() {
        let mut rng = SeededRng::new(12, 0);
        for _ in 0..100 {
            let x = PointCloud::random_full_rank(2, 5, &cfg(), &mut rng);
            let g = sample_element(GroupTag::GeneralLinear, 2, 5, &mut rng);
            let y = apply(&g, &x).unwrap();
            assert!(orbit_equal(GroupTag::GeneralLinear, &x, &y, &cfg()).unwrap());
        }
    }

    #[test]
    fn indef_counterexample_is_rank_deficient() {
        // both Q-Gram matrices vanish here, so the Gram test alone would
        // wrongly identify these clouds; the oracle refuses instead
        let x = PointCloud::new(DMatrix::zeros(2, 2)).unwrap();
        let y = PointCloud::from_rows(2, 2, &[1.0, 1.0, 1.0, 1.0]).unwrap();
        let form = QForm::from_signature(1, 1);
        let gx = gram(&x, Some(form.matrix())).unwrap();
        let gy = gram(&y, Some(form.matrix())).unwrap();
        assert_eq!(gx.amax(), 0.0);
        assert_eq!(gy.amax(), 0.0);
        let got = orbit_equal(GroupTag::IndefOrth { p: 1, q: 1 }, &x, &y, &cfg());
        assert!(matches!(got, Err(Error::RankDeficient(_))));
    }

    #[test]
    fn scaling_oracle_rejects_negative_multiple() {
        let mut rng = SeededRng::new(13, 0);
        let x = PointCloud::random_gaussian(2, 3, &mut rng);
        let y = PointCloud::new(x.matrix() * -1.0).unwrap();
        assert!(!orbit_equal(GroupTag::Scaling, &x, &y, &cfg()).unwrap());
        let z = PointCloud::new(x.matrix() * 2.5).unwrap();
        assert!(orbit_equal(GroupTag::Scaling, &x, &z, &cfg()).unwrap());
    }
}
