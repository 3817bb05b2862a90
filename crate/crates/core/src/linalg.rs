//! Dense real matrix kernels: symmetric eigendecomposition, PSD square roots,
//! isometry completion and Gram-matched unitaries.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type Matrix = DMatrix<f64>;
pub type CMatrix = DMatrix<Complex64>;

/// Tolerance used when checking that an asserted-symmetric matrix is symmetric.
pub const SYMMETRY_TOL: f64 = 1e-12;

pub fn max_abs(m: &Matrix) -> f64 {
    m.iter().fold(0.0f64, |acc, v| acc.max(v.abs()))
}

pub fn symmetrize(m: &Matrix) -> Matrix {
    (m + m.transpose()) * 0.5
}

/// `‖M − Mᵀ‖_max ≤ tol`, scaled by the magnitude of `M`.
pub fn is_symmetric(m: &Matrix, tol: f64) -> bool {
    m.is_square() && max_abs(&(m - m.transpose())) <= tol * max_abs(m).max(1.0)
}

fn to_faer(m: &Matrix) -> faer::Mat<f64> {
    faer::Mat::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)])
}

fn from_faer(m: faer::MatRef<'_, f64>) -> Matrix {
    Matrix::from_fn(m.nrows(), m.ncols(), |i, j| m.read(i, j))
}

/// Eigendecomposition of a symmetric matrix with eigenvalues in ascending order.
pub fn symmetric_eigen(m: &Matrix) -> (DVector<f64>, Matrix) {
    let n = m.nrows();
    if n == 0 {
        return (DVector::zeros(0), Matrix::zeros(0, 0));
    }
    let evd = to_faer(&symmetrize(m)).selfadjoint_eigendecomposition(faer::Side::Lower);
    let s = evd.s().column_vector();
    let u = evd.u();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| s.read(a).total_cmp(&s.read(b)));
    let values = DVector::from_iterator(n, order.iter().map(|&k| s.read(k)));
    let vectors = Matrix::from_fn(n, n, |i, j| u.read(i, order[j]));
    (values, vectors)
}

fn eigenvalues(m: &Matrix) -> Vec<f64> {
    to_faer(&symmetrize(m)).selfadjoint_eigenvalues(faer::Side::Lower)
}

pub fn min_eigenvalue(m: &Matrix) -> f64 {
    eigenvalues(m).into_iter().fold(f64::INFINITY, f64::min)
}

/// Number of eigenvalues above `tol`.
pub fn rank(m: &Matrix, tol: f64) -> usize {
    eigenvalues(m).into_iter().filter(|&l| l > tol).count()
}

/// Positive semidefinite square root. Eigenvalues in `[-tol, 0)` are clamped
/// to zero; anything more negative is rejected.
pub fn psd_sqrt(m: &Matrix, tol: f64) -> Result<Matrix> {
    let (values, vectors) = symmetric_eigen(m);
    if let Some(&lowest) = values.iter().next() {
        if lowest < -tol {
            return Err(Error::NotPsd { eigenvalue: lowest });
        }
    }
    let roots = values.map(|l| l.max(0.0).sqrt());
    let scaled = &vectors * Matrix::from_diagonal(&roots);
    Ok(symmetrize(&(&scaled * vectors.transpose())))
}

/// A factor `B` (rank × n) with `Bᵀ B ≈ M`, keeping eigenvalues above `rank_tol`.
pub fn gram_factor(m: &Matrix, rank_tol: f64) -> Matrix {
    let (values, vectors) = symmetric_eigen(m);
    let kept: Vec<usize> = (0..values.len()).filter(|&k| values[k] > rank_tol).collect();
    let mut b = Matrix::zeros(kept.len(), m.ncols());
    for (row, &k) in kept.iter().enumerate() {
        let scale = values[k].sqrt();
        for c in 0..m.ncols() {
            b[(row, c)] = scale * vectors[(c, k)];
        }
    }
    b
}

/// Extends an isometry `V` (m × k, orthonormal columns) to an m × m orthogonal
/// matrix whose first k columns are exactly `V`.
pub fn complete_isometry(v: &Matrix) -> Result<Matrix> {
    let (m, k) = v.shape();
    if k > m {
        return Err(Error::Precondition(format!(
            "{k} columns cannot be orthonormal in dimension {m}"
        )));
    }
    let deviation = max_abs(&(v.transpose() * v - Matrix::identity(k, k)));
    if deviation > 1e-9 {
        return Err(Error::Precondition(format!(
            "columns are not orthonormal (deviation {deviation:e})"
        )));
    }
    if k == m {
        return Ok(v.clone());
    }
    // Householder QR of [V | I]: the trailing m - k columns of Q span the complement
    let mut stacked = Matrix::zeros(m, k + m);
    stacked.view_mut((0, 0), (m, k)).copy_from(v);
    stacked
        .view_mut((0, k), (m, m))
        .copy_from(&Matrix::identity(m, m));
    let q = stacked.qr().q();
    let mut out = Matrix::zeros(m, m);
    out.view_mut((0, 0), (m, k)).copy_from(v);
    out.view_mut((0, k), (m, m - k))
        .copy_from(&q.view((0, k), (m, m - k)));
    Ok(out)
}

/// Orthonormalises nearly-orthonormal columns by their polar factor `U Vᵀ`.
fn nearest_isometry(a: &Matrix) -> Result<Matrix> {
    let svd = to_faer(a).thin_svd();
    let s = svd.s_diagonal();
    if (0..s.nrows()).any(|k| s.read(k) <= 0.0) {
        return Err(Error::Precondition("columns are linearly dependent".into()));
    }
    let polar = svd.u() * svd.v().transpose();
    Ok(from_faer(polar.as_ref()))
}

/// Constant `c` in the guarantee `‖U Φ − Ψ‖_max ≤ c √tol` of
/// [`transition_unitary`] for inputs whose Gram matrices agree to `tol`.
pub const TRANSITION_ERROR_CONSTANT: f64 = 4.0;

/// Directions whose Gram eigenvalue is within this factor of the Gram
/// mismatch are treated as noise.
const SPAN_MARGIN: f64 = 10.0;

/// Orthogonal `U` with `U Φ ≈ Ψ`, built as `V′ W′ᵀ` from polar isometries of
/// `Ψ` and `Φ` completed to square matrices.
///
/// The isometries are taken on the eigenbasis of the averaged Gram matrix,
/// restricted to eigenvalues above `tol` and clear of the Gram mismatch.
pub fn transition_unitary(psi: &Matrix, phi: &Matrix, tol: f64) -> Result<Matrix> {
    transition_unitary_with_cutoff(psi, phi, tol, tol)
}

/// As [`transition_unitary`], with the Gram tolerance `tol` and the
/// eigenvalue cutoff for the shared column space chosen separately.
pub fn transition_unitary_with_cutoff(psi: &Matrix, phi: &Matrix, tol: f64, cutoff: f64) -> Result<Matrix> {
    if psi.shape() != phi.shape() {
        return Err(Error::Shape(format!(
            "Ψ is {:?} but Φ is {:?}",
            psi.shape(),
            phi.shape()
        )));
    }
    let gram_psi = psi.transpose() * psi;
    let gram_phi = phi.transpose() * phi;
    let residual = max_abs(&(&gram_psi - &gram_phi));
    if residual > tol {
        return Err(Error::GramMismatch { residual });
    }
    let gram = (gram_psi + gram_phi) * 0.5;
    let (values, vectors) = symmetric_eigen(&gram);
    let cutoff = cutoff.max(SPAN_MARGIN * residual);
    let kept: Vec<usize> = (0..values.len()).filter(|&k| values[k] > cutoff).collect();
    let dim = psi.nrows();
    if kept.is_empty() {
        return Ok(Matrix::identity(dim, dim));
    }
    let mut basis = Matrix::zeros(vectors.nrows(), kept.len());
    for (col, &k) in kept.iter().enumerate() {
        basis.set_column(col, &(vectors.column(k) / values[k].sqrt()));
    }
    let v = nearest_isometry(&(psi * &basis))?;
    let w = nearest_isometry(&(phi * &basis))?;
    let v_full = complete_isometry(&v)?;
    let w_full = complete_isometry(&w)?;
    Ok(v_full * w_full.transpose())
}
