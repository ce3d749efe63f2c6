//! Dense reference eigensolver and explicit-Hessian tools.
//!
//! Everything here exists to verify the sparse solvers: a cyclic Jacobi
//! eigendecomposition for small dense symmetric matrices, the explicit
//! `np × np` Hessian matrix assembled column by column, and the
//! max-absolute eigenvalue error metric used by the benchmark harness.
//! Jacobi is slower than tridiagonalization but simple enough to behave
//! identically across platforms at the sizes we verify.

use crate::dense::DenseMatrix;
use crate::error::{Error, Result};
use crate::model::{Spectrum, WeightedPenaltyProblem};
use crate::sparse::SymmetricOperator;

/// Default dimension cap for dense reference work.
pub const DENSE_DIMENSION_CAP: usize = 4000;

/// Dense symmetric matrix, validated on construction.
#[derive(Debug, Clone)]
pub struct DenseSymmetric {
    n: usize,
    values: DenseMatrix,
}

impl DenseSymmetric {
    /// Wraps a square matrix after checking symmetry to 1e-14 relative
    /// and the dimension cap.
    pub fn new(values: DenseMatrix) -> Result<Self> {
        Self::with_cap(values, DENSE_DIMENSION_CAP)
    }

    pub fn with_cap(values: DenseMatrix, cap: usize) -> Result<Self> {
        if values.rows() != values.cols() {
            return Err(Error::Dimension(format!(
                "matrix is {}x{}, must be square",
                values.rows(),
                values.cols()
            )));
        }
        let n = values.rows();
        if n > cap {
            return Err(Error::Capacity(format!(
                "dense dimension {n} exceeds cap {cap}"
            )));
        }
        let scale = values.frobenius_norm().max(1.0);
        for i in 0..n {
            for j in 0..i {
                if (values.get(i, j) - values.get(j, i)).abs() > 1e-14 * scale {
                    return Err(Error::Data(format!(
                        "matrix is not symmetric at ({i}, {j})"
                    )));
                }
            }
        }
        Ok(Self { n, values })
    }

    /// Materializes a matrix-free operator.
    pub fn from_operator(op: &dyn SymmetricOperator) -> Result<Self> {
        Self::from_operator_with_cap(op, DENSE_DIMENSION_CAP)
    }

    pub fn from_operator_with_cap(op: &dyn SymmetricOperator, cap: usize) -> Result<Self> {
        let n = op.dim();
        if n > cap {
            return Err(Error::Capacity(format!(
                "operator dimension {n} exceeds cap {cap}"
            )));
        }
        let mut values = DenseMatrix::zeros(n, n);
        let mut buf = crate::sparse::ColumnBuf::new();
        for k in 0..n {
            op.column_into(k, &mut buf);
            for (i, v) in buf.iter() {
                values.set(i, k, v);
            }
        }
        Self::with_cap(values, cap)
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values.get(i, j)
    }

    pub fn as_matrix(&self) -> &DenseMatrix {
        &self.values
    }
}

/// Full spectrum of a dense symmetric matrix by cyclic Jacobi rotations.
///
/// Eigenvalues come back ascending; eigenvectors are orthonormal columns
/// with the sign fixed so each column's largest-magnitude entry is
/// positive, which makes comparisons against analytically constructed
/// eigenvectors deterministic despite the inherent sign freedom.
pub fn dense_eig(m: &DenseSymmetric) -> Result<Spectrum> {
    let n = m.dim();
    if n == 0 {
        return Spectrum::new(Vec::new(), None);
    }
    let mut a = m.values.clone();
    let mut v = DenseMatrix::identity(n);

    let off = |a: &DenseMatrix| -> f64 {
        let mut s = 0.0;
        for j in 0..n {
            for i in 0..j {
                s += a.get(i, j).abs();
            }
        }
        s
    };
    let scale = m.values.frobenius_norm().max(f64::MIN_POSITIVE);
    let tol = 1e-15 * scale;

    const MAX_SWEEPS: usize = 100;
    let mut converged = false;
    for _ in 0..MAX_SWEEPS {
        if off(&a) <= tol {
            converged = true;
            break;
        }
        for p in 0..n.saturating_sub(1) {
            for q in p + 1..n {
                let apq = a.get(p, q);
                if apq == 0.0 {
                    continue;
                }
                // rotation annihilating a[p][q]
                let theta = 0.5 * (a.get(q, q) - a.get(p, p)) / apq;
                let t = if theta.abs() > 1e150 {
                    0.5 / theta
                } else {
                    let s = 1.0 / (theta.abs() + (1.0 + theta * theta).sqrt());
                    if theta < 0.0 {
                        -s
                    } else {
                        s
                    }
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                let tau = s / (1.0 + c);

                let app = a.get(p, p);
                let aqq = a.get(q, q);
                a.set(p, p, app - t * apq);
                a.set(q, q, aqq + t * apq);
                a.set(p, q, 0.0);
                a.set(q, p, 0.0);
                for i in 0..n {
                    if i != p && i != q {
                        let aip = a.get(i, p);
                        let aiq = a.get(i, q);
                        let new_p = aip - s * (aiq + tau * aip);
                        let new_q = aiq + s * (aip - tau * aiq);
                        a.set(i, p, new_p);
                        a.set(p, i, new_p);
                        a.set(i, q, new_q);
                        a.set(q, i, new_q);
                    }
                    let vip = v.get(i, p);
                    let viq = v.get(i, q);
                    v.set(i, p, vip - s * (viq + tau * vip));
                    v.set(i, q, viq + s * (vip - tau * viq));
                }
            }
        }
    }
    if !converged && off(&a) > tol {
        return Err(Error::Internal(
            "Jacobi sweep limit reached before convergence".into(),
        ));
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a.get(i, i).partial_cmp(&a.get(j, j)).unwrap());
    let eigenvalues: Vec<f64> = order.iter().map(|&i| a.get(i, i)).collect();
    let mut vectors = DenseMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        let mut best = 0usize;
        let mut best_mag = 0.0;
        for i in 0..n {
            let mag = v.get(i, src).abs();
            if mag > best_mag {
                best_mag = mag;
                best = i;
            }
        }
        let flip = if v.get(best, src) < 0.0 { -1.0 } else { 1.0 };
        for i in 0..n {
            vectors.set(i, dst, flip * v.get(i, src));
        }
    }
    Spectrum::new(eigenvalues, Some(vectors))
}

/// Convenience: materialize an operator and decompose it.
pub fn operator_spectrum(op: &dyn SymmetricOperator) -> Result<Spectrum> {
    dense_eig(&DenseSymmetric::from_operator(op)?)
}

/// Explicit Hessian at `x` as a symmetric `np × np` matrix, built by
/// applying the Hessian operator to every coordinate direction and
/// flattening column-major.
pub fn hessian_matrix(prob: &WeightedPenaltyProblem, x: &DenseMatrix) -> Result<DenseSymmetric> {
    let (n, p) = (x.rows(), x.cols());
    let size = n * p;
    if size > DENSE_DIMENSION_CAP {
        return Err(Error::Capacity(format!(
            "explicit Hessian of size {size} exceeds cap {DENSE_DIMENSION_CAP}"
        )));
    }
    let mut h = DenseMatrix::zeros(size, size);
    let mut e = DenseMatrix::zeros(n, p);
    for l in 0..p {
        for i in 0..n {
            e.set(i, l, 1.0);
            let he = prob.hessian_apply(x, &e)?;
            e.set(i, l, 0.0);
            let col = l * n + i;
            for ll in 0..p {
                let src = he.col(ll);
                let dst = h.col_mut(col);
                dst[ll * n..(ll + 1) * n].copy_from_slice(src);
            }
        }
    }
    // the Hessian operator is self-adjoint; symmetrize away round-off
    let scale = h.frobenius_norm().max(1.0);
    for j in 0..size {
        for i in 0..j {
            let d = (h.get(i, j) - h.get(j, i)).abs();
            if d > 1e-10 * scale {
                return Err(Error::Internal(format!(
                    "Hessian matrix asymmetric at ({i}, {j}): defect {d}"
                )));
            }
            let avg = 0.5 * (h.get(i, j) + h.get(j, i));
            h.set(i, j, avg);
            h.set(j, i, avg);
        }
    }
    DenseSymmetric::new(h)
}

/// `max_ℓ |λ_ℓ - d_ℓ|` between reference eigenvalues and Ritz values.
pub fn eigen_error(ritz: &[f64], reference: &[f64]) -> Result<f64> {
    if ritz.len() != reference.len() {
        return Err(Error::Dimension(format!(
            "{} Ritz values against {} references",
            ritz.len(),
            reference.len()
        )));
    }
    Ok(ritz
        .iter()
        .zip(reference)
        .map(|(r, l)| (r - l).abs())
        .fold(0.0, f64::max))
}
