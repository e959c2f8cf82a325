//! Parametric invariant families, one per group action, evaluated at a
//! single weight. An embedding stacks `m` of these evaluations at random
//! weights; see the `embedding` module.
//!
//! | group            | family                          | weight            |
//! |------------------|---------------------------------|-------------------|
//! | permutation      | `<w2, psi(X^T w1)>`             | `w1 in R^d, w2 in R^n` |
//! | orthogonal       | `|X w|^2`                       | `w in R^n`        |
//! | rotation         | `|X w|^2 + det(X W)`            | `w in R^n, W in R^{n x d}` |
//! | Q-isometry       | `<X w, Q X w>`                  | `w in R^n`        |
//! | special linear   | `det(X W)`                      | `W in R^{n x d}`  |
//! | general linear   | `det^2(X W) / det(X X^T)`       | `W in R^{n x d}`  |
//!
//! Translation and scaling are handled by the weight-free wrappers
//! [`center`] and [`scale_normalize`], composed (center first) before any of
//! the families above.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::groups::QForm;
use crate::numerics::{det, numeric_rank, power_sums, sort_vector, PointCloud, ToleranceConfig};

/// The permutation-invariant inner map: ascending sort or power sums.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Psi {
    /// Continuous piece-wise linear, numerically robust. The default.
    Sort,
    /// Polynomial alternative; ill-conditioned for n of a few dozen
    /// because the entries grow like the n-th power of the input scale.
    PowerSums,
}

fn check_len(name: &str, got: usize, want: usize) -> Result<()> {
    if got != want {
        return Err(Error::ShapeMismatch(format!(
            "{name} has length {got}, expected {want}"
        )));
    }
    Ok(())
}

fn check_mat(name: &str, m: &DMatrix<f64>, rows: usize, cols: usize) -> Result<()> {
    if m.nrows() != rows || m.ncols() != cols {
        return Err(Error::ShapeMismatch(format!(
            "{name} is {}x{}, expected {rows}x{cols}",
            m.nrows(),
            m.ncols()
        )));
    }
    Ok(())
}

/// `<w2, psi(X^T w1)>` — invariant to column permutations of `X`.
pub fn perm_invariant(x: &PointCloud, w1: &[f64], w2: &[f64], psi: Psi) -> Result<f64> {
    check_len("w1", w1.len(), x.d())?;
    check_len("w2", w2.len(), x.n())?;
    let proj: Vec<f64> = (0..x.n())
        .map(|j| (0..x.d()).map(|k| x.matrix()[(k, j)] * w1[k]).sum())
        .collect();
    let mapped = match psi {
        Psi::Sort => sort_vector(&proj),
        Psi::PowerSums => power_sums(&proj)?,
    };
    Ok(mapped.iter().zip(w2).map(|(a, b)| a * b).sum())
}

/// `|X w|^2` — invariant under any orthogonal matrix from the left.
pub fn orth_invariant(x: &PointCloud, w: &[f64]) -> Result<f64> {
    check_len("w", w.len(), x.n())?;
    let mut acc = 0.0;
    for k in 0..x.d() {
        let mut row = 0.0;
        for j in 0..x.n() {
            row += x.matrix()[(k, j)] * w[j];
        }
        acc += row * row;
    }
    Ok(acc)
}

/// `|X w|^2 + det(X W)` — invariant under rotations; the determinant term
/// flips sign under reflections, which is what tells the two apart.
pub fn so_invariant(x: &PointCloud, w: &[f64], big_w: &DMatrix<f64>) -> Result<f64> {
    check_mat("W", big_w, x.n(), x.d())?;
    if x.n() < x.d() {
        return Err(Error::ShapeMismatch("so family requires n >= d".into()));
    }
    let norm_part = orth_invariant(x, w)?;
    Ok(norm_part + det(&(x.matrix() * big_w)))
}

/// `<X w, Q X w>` — invariant under Q-isometries.
pub fn indef_invariant(x: &PointCloud, w: &[f64], q: &QForm) -> Result<f64> {
    check_len("w", w.len(), x.n())?;
    if q.dim() != x.d() {
        return Err(Error::ShapeMismatch(format!(
            "Q has dimension {}, cloud has d = {}",
            q.dim(),
            x.d()
        )));
    }
    let v = x.matrix() * DVector::from_column_slice(w);
    Ok((q.matrix() * &v).dot(&v))
}

/// `det(X W)` — invariant under det-1 matrices from the left.
pub fn sl_invariant(x: &PointCloud, big_w: &DMatrix<f64>) -> Result<f64> {
    check_mat("W", big_w, x.n(), x.d())?;
    if x.n() < x.d() {
        return Err(Error::ShapeMismatch("sl family requires n >= d".into()));
    }
    Ok(det(&(x.matrix() * big_w)))
}

/// `det^2(X W) / det(X X^T)` — invariant under any invertible matrix from
/// the left; well defined only on full-rank clouds.
pub fn gl_invariant(x: &PointCloud, big_w: &DMatrix<f64>, cfg: &ToleranceConfig) -> Result<f64> {
    check_mat("W", big_w, x.n(), x.d())?;
    if numeric_rank(x, cfg) < x.d() {
        return Err(Error::RankDeficient(
            "gl family requires a full-rank cloud".into(),
        ));
    }
    let num = det(&(x.matrix() * big_w));
    // d x d Gram of the rows, never an n x n intermediate
    let den = det(&(x.matrix() * x.matrix().transpose()));
    Ok(num * num / den)
}

/// Subtracts the column mean: `X - (1/n) X 1 1^T`. Kills translations and
/// commutes with left multiplication and column permutation.
pub fn center(x: &PointCloud) -> PointCloud {
    let n = x.n() as f64;
    let mut mat = x.matrix().clone();
    for i in 0..x.d() {
        let mean: f64 = mat.row(i).iter().sum::<f64>() / n;
        for j in 0..x.n() {
            mat[(i, j)] -= mean;
        }
    }
    PointCloud::new(mat).expect("centering preserves validity")
}

/// Divides by the Frobenius norm. Kills positive scaling; equivariant under
/// orthogonal-left and permutation-right actions only.
pub fn scale_normalize(x: &PointCloud, cfg: &ToleranceConfig) -> Result<PointCloud> {
    let nrm = x.frobenius_norm();
    if nrm <= cfg.rank_tol {
        return Err(Error::ZeroInput(
            "cannot scale-normalize a (numerically) zero cloud".into(),
        ));
    }
    PointCloud::new(x.matrix() / nrm)
}
