//! Dense small-matrix numerics shared by every other module: point clouds,
//! tolerance configuration, determinants, Gram matrices, sorting and power
//! sums, and a singular-value based numeric rank.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::SeededRng;

/// A point cloud: a `d x n` real matrix whose columns are the points.
#[derive(Debug, Clone, PartialEq)]
pub struct PointCloud {
    mat: DMatrix<f64>,
}

impl PointCloud {
    /// Wraps a matrix, validating `d >= 1`, `n >= 1` and entry finiteness.
    pub fn new(mat: DMatrix<f64>) -> Result<Self> {
        if mat.nrows() == 0 || mat.ncols() == 0 {
            return Err(Error::ShapeMismatch(format!(
                "point cloud must be at least 1x1, got {}x{}",
                mat.nrows(),
                mat.ncols()
            )));
        }
        if mat.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("point cloud entries must be finite".into()));
        }
        Ok(Self { mat })
    }

    /// Builds a cloud from row-major entries.
    pub fn from_rows(d: usize, n: usize, entries: &[f64]) -> Result<Self> {
        if entries.len() != d * n {
            return Err(Error::ShapeMismatch(format!(
                "expected {} entries for a {}x{} cloud, got {}",
                d * n,
                d,
                n,
                entries.len()
            )));
        }
        Self::new(DMatrix::from_row_slice(d, n, entries))
    }

    /// Standard-normal cloud, deterministic in the generator state.
    pub fn random_gaussian(d: usize, n: usize, rng: &mut SeededRng) -> Self {
        Self {
            mat: DMatrix::from_fn(d, n, |_, _| rng.normal()),
        }
    }

    /// Gaussian cloud resampled until its numeric rank is `min(d, n)`.
    pub fn random_full_rank(d: usize, n: usize, cfg: &ToleranceConfig, rng: &mut SeededRng) -> Self {
        loop {
            let x = Self::random_gaussian(d, n, rng);
            if numeric_rank(&x, cfg) == d.min(n) {
                return x;
            }
        }
    }

    pub fn d(&self) -> usize {
        self.mat.nrows()
    }

    pub fn n(&self) -> usize {
        self.mat.ncols()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.mat
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.mat
    }

    /// The `j`-th point as a vector copy.
    pub fn point(&self, j: usize) -> Vec<f64> {
        self.mat.column(j).iter().copied().collect()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.mat.norm()
    }
}

/// Tolerances for rank decisions, equality checks and separation margins.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ToleranceConfig {
    /// Relative singular-value cutoff for rank decisions.
    pub rank_tol: f64,
    /// Relative tolerance for equality of values, matrices and embeddings.
    pub eq_tol: f64,
    /// Relative margin below which two embeddings count as unseparated.
    pub sep_margin: f64,
}

impl ToleranceConfig {
    pub fn new(rank_tol: f64, eq_tol: f64, sep_margin: f64) -> Result<Self> {
        let cfg = Self {
            rank_tol,
            eq_tol,
            sep_margin,
        };
        if !(rank_tol > 0.0 && eq_tol > 0.0 && sep_margin > 0.0) {
            return Err(Error::InvalidArgument(
                "tolerances must be strictly positive".into(),
            ));
        }
        if rank_tol >= 1.0 {
            return Err(Error::InvalidArgument("rank_tol must be < 1".into()));
        }
        Ok(cfg)
    }
}

impl Default for ToleranceConfig {
    fn default() -> Self {
        Self {
            rank_tol: 1e-10,
            eq_tol: 1e-8,
            sep_margin: 1e-6,
        }
    }
}

/// Determinant of a square matrix (partial-pivot LU under the hood).
///
/// Exactly singular input yields 0.0; there is no error path.
pub fn det(m: &DMatrix<f64>) -> f64 {
    assert_eq!(m.nrows(), m.ncols(), "det requires a square matrix");
    m.determinant()
}

/// The (Q-)Gram matrix `X^T Q X`; `Q = I` when omitted.
pub fn gram(x: &PointCloud, q: Option<&DMatrix<f64>>) -> Result<DMatrix<f64>> {
    match q {
        None => Ok(x.matrix().transpose() * x.matrix()),
        Some(q) => {
            let d = x.d();
            if q.nrows() != d || q.ncols() != d {
                return Err(Error::ShapeMismatch(format!(
                    "Q must be {}x{}, got {}x{}",
                    d,
                    d,
                    q.nrows(),
                    q.ncols()
                )));
            }
            if (q - q.transpose()).amax() > 1e-12 * q.amax().max(1.0) {
                return Err(Error::InvalidArgument("Q must be symmetric".into()));
            }
            Ok(x.matrix().transpose() * q * x.matrix())
        }
    }
}

/// Ascending sort. The output depends only on the input multiset.
pub fn sort_vector(v: &[f64]) -> Vec<f64> {
    let mut out = v.to_vec();
    out.sort_unstable_by(f64::total_cmp);
    out
}

/// Power sums `(sum_j v_j^k)` for `k = 1..=len(v)`.
///
/// Addends are accumulated in ascending input order after sorting, so the
/// result is a function of the input multiset alone (bit-for-bit).
pub fn power_sums(v: &[f64]) -> Result<Vec<f64>> {
    let sorted = sort_vector(v);
    let n = sorted.len();
    let mut powers = sorted.clone();
    let mut out = Vec::with_capacity(n);
    for k in 0..n {
        if k > 0 {
            for (p, base) in powers.iter_mut().zip(&sorted) {
                *p *= base;
            }
        }
        let s: f64 = powers.iter().sum();
        if !s.is_finite() {
            return Err(Error::NonFinite(format!(
                "power sum of order {} overflowed",
                k + 1
            )));
        }
        out.push(s);
    }
    Ok(out)
}

/// Count of singular values above `rank_tol * sigma_max`; 0 for the zero matrix.
pub fn numeric_rank(x: &PointCloud, cfg: &ToleranceConfig) -> usize {
    numeric_rank_mat(x.matrix(), cfg.rank_tol)
}

pub(crate) fn numeric_rank_mat(m: &DMatrix<f64>, rank_tol: f64) -> usize {
    let sv = m.clone().singular_values();
    let smax = sv.iter().cloned().fold(0.0_f64, f64::max);
    if smax == 0.0 {
        return 0;
    }
    sv.iter().filter(|&&s| s > rank_tol * smax).count()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// Cofactor-expansion determinant, the independent oracle for `det`.
    fn det_cofactor(m: &DMatrix<f64>) -> f64 {
        let k = m.nrows();
        if k == 1 {
            return m[(0, 0)];
        }
        let mut acc = 0.0;
        for j in 0..k {
            let minor = m.clone().remove_row(0).remove_column(j);
            let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
            acc += sign * m[(0, j)] * det_cofactor(&minor);
        }
        acc
    }

    #[test]
    fn det_identity_and_diagonal() {
        assert_eq!(det(&DMatrix::identity(3, 3)), 1.0);
        let diag = DMatrix::from_row_slice(2, 2, &[2.0, 0.0, 0.0, 3.0]);
        assert_eq!(det(&diag), 6.0);
    }

    #[test]
    fn det_matches_cofactor_oracle() {
        let mut rng = SeededRng::new(11, 0);
        for _ in 0..20 {
            let m = DMatrix::from_fn(5, 5, |_, _| rng.normal());
            let got = det(&m);
            let want = det_cofactor(&m);
            assert!(
                (got - want).abs() <= 1e-10 * want.abs().max(1.0),
                "det {got} vs cofactor {want}"
            );
        }
    }

    #[test]
    fn det_multiplicative() {
        let mut rng = SeededRng::new(12, 0);
        for _ in 0..50 {
            let a = DMatrix::from_fn(4, 4, |_, _| rng.normal());
            let b = DMatrix::from_fn(4, 4, |_, _| rng.normal());
            let lhs = det(&(&a * &b));
            let rhs = det(&a) * det(&b);
            assert!((lhs - rhs).abs() <= 1e-8 * rhs.abs().max(1.0));
        }
    }

    #[test]
    fn gram_identity_cases() {
        let x = PointCloud::new(DMatrix::identity(2, 2)).unwrap();
        let g = gram(&x, None).unwrap();
        assert_eq!(g, DMatrix::identity(2, 2));

        let q = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, -1.0]);
        let gq = gram(&x, Some(&q)).unwrap();
        assert_eq!(gq, q);
    }

    #[test]
    fn gram_matches_dot_products() {
        let mut rng = SeededRng::new(13, 0);
        let x = PointCloud::random_gaussian(3, 5, &mut rng);
        let g = gram(&x, None).unwrap();
        for i in 0..5 {
            for j in 0..5 {
                let dot: f64 = (0..3)
                    .map(|k| x.matrix()[(k, i)] * x.matrix()[(k, j)])
                    .sum();
                assert!((g[(i, j)] - dot).abs() <= 1e-12 * dot.abs().max(1.0));
            }
        }
    }

    #[test]
    fn gram_symmetric_and_orthogonally_invariant() {
        let mut rng = SeededRng::new(14, 0);
        for _ in 0..20 {
            let x = PointCloud::random_gaussian(3, 6, &mut rng);
            let g = gram(&x, None).unwrap();
            assert!((&g - g.transpose()).amax() <= 1e-13 * g.amax().max(1.0));

            let r = crate::groups::haar_orthogonal(3, &mut rng);
            let rx = PointCloud::new(&r * x.matrix()).unwrap();
            let grx = gram(&rx, None).unwrap();
            assert!((&g - &grx).amax() <= 1e-10 * g.amax().max(1.0));
        }
    }

    #[test]
    fn gram_shape_mismatch() {
        let x = PointCloud::from_rows(2, 3, &[1.0; 6]).unwrap();
        let q = DMatrix::identity(3, 3);
        assert!(matches!(
            gram(&x, Some(&q)),
            Err(Error::ShapeMismatch(_))
        ));
    }

    #[test]
    fn sort_vector_basics() {
        assert_eq!(sort_vector(&[3.0, 1.0, 2.0]), vec![1.0, 2.0, 3.0]);
        assert_eq!(sort_vector(&[5.0]), vec![5.0]);
    }

    #[test]
    fn power_sums_basics() {
        assert_eq!(power_sums(&[1.0, 2.0]).unwrap(), vec![3.0, 5.0]);
        assert_eq!(power_sums(&[0.0, 0.0, 0.0]).unwrap(), vec![0.0, 0.0, 0.0]);
    }

    #[test]
    fn power_sums_overflow_reported() {
        let v = vec![1e300, 1e300];
        assert!(matches!(power_sums(&v), Err(Error::NonFinite(_))));
    }

    #[test]
    fn numeric_rank_cases() {
        let cfg = ToleranceConfig::default();
        let id = PointCloud::new(DMatrix::identity(3, 3)).unwrap();
        assert_eq!(numeric_rank(&id, &cfg), 3);

        let zero = PointCloud::new(DMatrix::zeros(2, 4)).unwrap();
        assert_eq!(numeric_rank(&zero, &cfg), 0);

        let prop = PointCloud::from_rows(2, 2, &[1.0, 2.0, 2.0, 4.0]).unwrap();
        assert_eq!(numeric_rank(&prop, &cfg), 1);
    }

    #[test]
    fn numeric_rank_transpose_agrees() {
        let cfg = ToleranceConfig::default();
        let mut rng = SeededRng::new(15, 0);
        for i in 0..100 {
            let d = 1 + (i % 4);
            let n = 1 + (i % 6);
            let x = PointCloud::random_gaussian(d, n, &mut rng);
            let xt = PointCloud::new(x.matrix().transpose()).unwrap();
            assert_eq!(numeric_rank(&x, &cfg), numeric_rank(&xt, &cfg));
        }
    }

    #[test]
    fn tolerance_config_validation() {
        assert!(ToleranceConfig::new(1e-10, 1e-8, 1e-6).is_ok());
        assert!(ToleranceConfig::new(0.0, 1e-8, 1e-6).is_err());
        assert!(ToleranceConfig::new(2.0, 1e-8, 1e-6).is_err());
    }

    #[test]
    fn point_cloud_validation() {
        assert!(PointCloud::from_rows(2, 2, &[1.0, 2.0, 3.0, f64::NAN]).is_err());
        assert!(PointCloud::new(DMatrix::zeros(0, 3)).is_err());
    }

    proptest! {
        #[test]
        fn sort_is_idempotent_and_permutation_stable(v in proptest::collection::vec(-1e6f64..1e6, 1..40)) {
            let s = sort_vector(&v);
            prop_assert_eq!(sort_vector(&s), s.clone());
            // output multiset equals input multiset exactly
            let mut a = v.clone();
            a.sort_unstable_by(f64::total_cmp);
            prop_assert_eq!(a, s.clone());
            // stability under an input permutation
            let mut p = v.clone();
            p.reverse();
            prop_assert_eq!(sort_vector(&p), s);
        }

        #[test]
        fn power_sums_permutation_invariant(v in proptest::collection::vec(-30.0f64..30.0, 1..12)) {
            let base = power_sums(&v).unwrap();
            let mut p = v.clone();
            p.reverse();
            let mid = p.len() / 2;
            p.rotate_left(mid);
            prop_assert_eq!(power_sums(&p).unwrap(), base);
        }
    }

    #[test]
    fn sort_under_random_permutations() {
        let mut rng = SeededRng::new(16, 0);
        let v: Vec<f64> = (0..9).map(|_| rng.normal()).collect();
        let want = sort_vector(&v);
        for _ in 0..50 {
            let perm = rng.permutation(v.len());
            let pv: Vec<f64> = perm.iter().map(|&i| v[i]).collect();
            assert_eq!(sort_vector(&pv), want);
        }
    }
}
