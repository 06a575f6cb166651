//! Dense vector helpers, symmetric-matrix packing and a cyclic Jacobi
//! eigensolver.
//!
//! Matrix-valued variables are stored as flat vectors. A symmetric `n x n`
//! matrix is packed row by row over its upper triangle, diagonal entries
//! stored as-is and off-diagonal entries scaled by `sqrt(2)`, so that the
//! Euclidean inner product of two packed vectors equals the Frobenius inner
//! product of the matrices.

use crate::error::LinalgError;

pub fn dot(x: &[f64], y: &[f64]) -> f64 {
    debug_assert_eq!(x.len(), y.len());
    x.iter().zip(y).map(|(a, b)| a * b).sum()
}

pub fn norm(x: &[f64]) -> f64 {
    dot(x, x).sqrt()
}

pub fn dist(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt()
}

/// `y += alpha * x`
pub fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

pub fn scale(alpha: f64, x: &mut [f64]) {
    x.iter_mut().for_each(|v| *v *= alpha);
}

pub fn sub(x: &[f64], y: &[f64]) -> Vec<f64> {
    x.iter().zip(y).map(|(a, b)| a - b).collect()
}

pub fn all_finite(x: &[f64]) -> bool {
    x.iter().all(|v| v.is_finite())
}

/// Length of the packed representation of an `n x n` symmetric matrix.
pub const fn packed_len(n: usize) -> usize {
    n * (n + 1) / 2
}

/// Recovers `n` from a packed length, if it is a triangular number.
pub fn packed_order(len: usize) -> Option<usize> {
    let n = ((((8 * len + 1) as f64).sqrt() - 1.0) / 2.0).round() as usize;
    (packed_len(n) == len).then_some(n)
}

/// Position of entry `(i, j)` with `i <= j` in the packed vector.
#[inline]
pub fn packed_index(n: usize, i: usize, j: usize) -> usize {
    debug_assert!(i <= j && j < n);
    i * n - i * (i + 1) / 2 + j
}

/// Packs the symmetric part of a row-major `n x n` matrix.
pub fn pack_sym(n: usize, full: &[f64], packed: &mut [f64]) {
    debug_assert_eq!(full.len(), n * n);
    debug_assert_eq!(packed.len(), packed_len(n));
    let mut idx = 0;
    for i in 0..n {
        packed[idx] = full[i * n + i];
        idx += 1;
        for j in (i + 1)..n {
            packed[idx] = (full[i * n + j] + full[j * n + i]) * std::f64::consts::FRAC_1_SQRT_2;
            idx += 1;
        }
    }
}

/// Inverse of [`pack_sym`] for symmetric input.
pub fn unpack_sym(n: usize, packed: &[f64], full: &mut [f64]) {
    debug_assert_eq!(full.len(), n * n);
    debug_assert_eq!(packed.len(), packed_len(n));
    let mut idx = 0;
    for i in 0..n {
        full[i * n + i] = packed[idx];
        idx += 1;
        for j in (i + 1)..n {
            let v = packed[idx] * std::f64::consts::FRAC_1_SQRT_2;
            full[i * n + j] = v;
            full[j * n + i] = v;
            idx += 1;
        }
    }
}

/// Row-major dense matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<f64>,
}

impl DenseMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![0.0; rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = 1.0;
        }
        m
    }

    pub fn from_rows(rows: usize, cols: usize, data: Vec<f64>) -> Self {
        assert_eq!(data.len(), rows * cols, "dimension mismatch");
        Self { rows, cols, data }
    }

    pub fn diag(values: &[f64]) -> Self {
        let n = values.len();
        let mut m = Self::zeros(n, n);
        for (i, v) in values.iter().enumerate() {
            m.data[i * n + i] = *v;
        }
        m
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.cols + j] = v;
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    /// `out = self * x`
    pub fn matvec(&self, x: &[f64], out: &mut [f64]) {
        debug_assert_eq!(x.len(), self.cols);
        debug_assert_eq!(out.len(), self.rows);
        for (i, o) in out.iter_mut().enumerate() {
            *o = dot(self.row(i), x);
        }
    }

    /// `out = self^T * y`
    pub fn matvec_t(&self, y: &[f64], out: &mut [f64]) {
        debug_assert_eq!(y.len(), self.rows);
        debug_assert_eq!(out.len(), self.cols);
        out.iter_mut().for_each(|v| *v = 0.0);
        for (i, yi) in y.iter().enumerate() {
            axpy(*yi, self.row(i), out);
        }
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t.data[j * self.rows + i] = self.get(i, j);
            }
        }
        t
    }

    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.rows, "dimension mismatch");
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            let orow = &mut out.data[i * other.cols..(i + 1) * other.cols];
            for k in 0..self.cols {
                let a = self.data[i * self.cols + k];
                if a != 0.0 {
                    axpy(a, other.row(k), orow);
                }
            }
        }
        out
    }

    /// `self^T * self`
    pub fn gram(&self) -> Self {
        self.transpose().matmul(self)
    }

    pub fn frobenius(&self) -> f64 {
        norm(&self.data)
    }
}

/// Eigen-decomposition `A = V diag(values) V^T` of a symmetric matrix.
///
/// Eigenvalues are sorted in decreasing order. `vectors` holds the
/// eigenvectors as rows, i.e. `vectors.row(i)` pairs with `values[i]`.
#[derive(Debug, Clone)]
pub struct SymmetricEigen {
    pub values: Vec<f64>,
    pub vectors: DenseMatrix,
}

impl SymmetricEigen {
    /// Reassembles `sum_i w_i v_i v_i^T` into a row-major `n x n` buffer,
    /// skipping zero weights.
    pub fn reassemble(&self, weights: &[f64], out: &mut [f64]) {
        let n = self.values.len();
        out.iter_mut().for_each(|v| *v = 0.0);
        for (k, &w) in weights.iter().enumerate() {
            if w == 0.0 {
                continue;
            }
            let v = self.vectors.row(k);
            for i in 0..n {
                let wi = w * v[i];
                if wi == 0.0 {
                    continue;
                }
                axpy(wi, v, &mut out[i * n..(i + 1) * n]);
            }
        }
    }
}

pub const JACOBI_TOL: f64 = 1e-12;
const JACOBI_MAX_SWEEPS: usize = 100;

/// Cyclic Jacobi eigensolver for a symmetric row-major matrix.
///
/// Sweeps until the off-diagonal Frobenius mass drops below
/// `tol * ||A||_F`.
pub fn jacobi_eigen(a: &DenseMatrix, tol: f64) -> Result<SymmetricEigen, LinalgError> {
    assert_eq!(a.rows, a.cols, "jacobi_eigen needs a square matrix");
    let n = a.rows;
    if !all_finite(&a.data) {
        return Err(LinalgError::NonFinite);
    }
    // symmetrize defensively against round-off in the caller's assembly
    let mut m = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            m[i * n + j] = 0.5 * (a.data[i * n + j] + a.data[j * n + i]);
        }
    }
    let mut vt = DenseMatrix::identity(n);
    let total = norm(&m);
    let threshold = tol * total.max(f64::MIN_POSITIVE);

    let mut converged = n <= 1;
    for _ in 0..JACOBI_MAX_SWEEPS {
        let off: f64 = (0..n)
            .flat_map(|i| ((i + 1)..n).map(move |j| (i, j)))
            .map(|(i, j)| 2.0 * m[i * n + j] * m[i * n + j])
            .sum::<f64>()
            .sqrt();
        if off <= threshold {
            converged = true;
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = m[p * n + q];
                if apq == 0.0 {
                    continue;
                }
                let app = m[p * n + p];
                let aqq = m[q * n + q];
                if apq.abs() < 1e-300 + f64::EPSILON * 1e-3 * (app.abs() + aqq.abs()) {
                    m[p * n + q] = 0.0;
                    m[q * n + p] = 0.0;
                    continue;
                }
                let theta = (aqq - app) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                rotate(&mut m, n, p, q, c, s);
                m[p * n + p] = app - t * apq;
                m[q * n + q] = aqq + t * apq;
                m[p * n + q] = 0.0;
                m[q * n + p] = 0.0;
                let (rp, rq) = two_rows(&mut vt.data, n, p, q);
                for k in 0..n {
                    let vp = rp[k];
                    let vq = rq[k];
                    rp[k] = c * vp - s * vq;
                    rq[k] = s * vp + c * vq;
                }
            }
        }
    }
    if !converged {
        return Err(LinalgError::NoConvergence { sweeps: JACOBI_MAX_SWEEPS });
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| m[j * n + j].total_cmp(&m[i * n + i]));
    let values = order.iter().map(|&i| m[i * n + i]).collect();
    let mut vectors = DenseMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        vectors.data[dst * n..(dst + 1) * n].copy_from_slice(vt.row(src));
    }
    Ok(SymmetricEigen { values, vectors })
}

// Applies the rotation to rows and columns p, q of the symmetric matrix,
// leaving the (p,p), (q,q), (p,q) entries to the caller.
#[inline]
fn rotate(m: &mut [f64], n: usize, p: usize, q: usize, c: f64, s: f64) {
    for k in 0..n {
        if k == p || k == q {
            continue;
        }
        let akp = m[k * n + p];
        let akq = m[k * n + q];
        let np = c * akp - s * akq;
        let nq = s * akp + c * akq;
        m[k * n + p] = np;
        m[k * n + q] = nq;
        m[p * n + k] = np;
        m[q * n + k] = nq;
    }
}

fn two_rows(data: &mut [f64], n: usize, p: usize, q: usize) -> (&mut [f64], &mut [f64]) {
    debug_assert!(p < q);
    let (head, tail) = data.split_at_mut(q * n);
    (&mut head[p * n..(p + 1) * n], &mut tail[..n])
}

/// Singular values of a dense matrix via the eigenvalues of the smaller Gram
/// matrix, sorted decreasingly.
pub fn singular_values(a: &DenseMatrix) -> Result<Vec<f64>, LinalgError> {
    let gram = if a.rows <= a.cols { a.matmul(&a.transpose()) } else { a.gram() };
    let eig = jacobi_eigen(&gram, JACOBI_TOL)?;
    Ok(eig.values.iter().map(|v| v.max(0.0).sqrt()).collect())
}

/// Principal square root of a symmetric positive semidefinite matrix;
/// negative round-off eigenvalues are clamped to zero.
pub fn psd_sqrt(a: &DenseMatrix) -> Result<DenseMatrix, LinalgError> {
    let eig = jacobi_eigen(a, JACOBI_TOL)?;
    let w: Vec<f64> = eig.values.iter().map(|v| v.max(0.0).sqrt()).collect();
    let mut out = DenseMatrix::zeros(a.rows, a.cols);
    eig.reassemble(&w, &mut out.data);
    Ok(out)
}
