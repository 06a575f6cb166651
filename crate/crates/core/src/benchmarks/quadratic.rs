//! Difference-of-squares quadratics shared by the LCQP and LCQM families:
//! `f(z) = (alpha1/2)|Cz - d|^2 - (alpha2/2)|Gz|^2`, with `(alpha1, alpha2)`
//! calibrated so that the Hessian has prescribed extreme eigenvalues.

use std::sync::Arc;

use crate::error::{BenchmarkError, LinalgError};
use crate::linalg::{self, jacobi_eigen, psd_sqrt, DenseMatrix, JACOBI_TOL};
use crate::problem::{LinearMap, SmoothOracle};

/// Sparse matrix in compressed-row form.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseRows {
    cols: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<f64>,
}

impl SparseRows {
    /// Builds from per-row `(column, value)` lists; duplicate columns add up.
    pub fn from_rows(cols: usize, rows: Vec<Vec<(usize, f64)>>) -> Self {
        let mut row_ptr = Vec::with_capacity(rows.len() + 1);
        let mut col_idx = Vec::new();
        let mut values = Vec::new();
        row_ptr.push(0);
        for mut row in rows {
            row.sort_by_key(|(j, _)| *j);
            for (j, v) in row {
                assert!(j < cols, "column index out of range");
                if col_idx.len() > *row_ptr.last().unwrap() && *col_idx.last().unwrap() == j {
                    *values.last_mut().unwrap() += v;
                } else {
                    col_idx.push(j);
                    values.push(v);
                }
            }
            row_ptr.push(col_idx.len());
        }
        Self { cols, row_ptr, col_idx, values }
    }

    pub fn rows(&self) -> usize {
        self.row_ptr.len() - 1
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        self.col_idx[r.clone()].iter().copied().zip(self.values[r].iter().copied())
    }

    /// Multiplies row `i` by `s[i]`.
    pub fn scale_rows(&mut self, s: &[f64]) {
        for (i, si) in s.iter().enumerate() {
            for v in &mut self.values[self.row_ptr[i]..self.row_ptr[i + 1]] {
                *v *= si;
            }
        }
    }
}

impl LinearMap for SparseRows {
    fn domain_dim(&self) -> usize {
        self.cols
    }
    fn image_dim(&self) -> usize {
        self.rows()
    }
    fn apply(&self, z: &[f64], out: &mut [f64]) {
        for (i, o) in out.iter_mut().enumerate() {
            *o = self.row(i).map(|(j, v)| v * z[j]).sum();
        }
    }
    fn adjoint(&self, p: &[f64], out: &mut [f64]) {
        out.iter_mut().for_each(|v| *v = 0.0);
        for (i, pi) in p.iter().enumerate() {
            for (j, v) in self.row(i) {
                out[j] += v * pi;
            }
        }
    }
    fn to_dense(&self) -> DenseMatrix {
        let mut out = DenseMatrix::zeros(self.rows(), self.cols);
        for i in 0..self.rows() {
            for (j, v) in self.row(i) {
                out.set(i, j, out.get(i, j) + v);
            }
        }
        out
    }
}

/// `f(z) = (alpha1/2)|Cz - d|^2 - (alpha2/2)|Gz|^2`.
pub struct QuadraticDifference {
    c: Arc<dyn LinearMap>,
    g: Arc<dyn LinearMap>,
    d: Vec<f64>,
    alpha1: f64,
    alpha2: f64,
    m: f64,
    upper: f64,
}

impl QuadraticDifference {
    /// `(m, upper)` are the declared curvatures of the Hessian
    /// `alpha1 C^T C - alpha2 G^T G`.
    pub fn new(
        c: Arc<dyn LinearMap>,
        g: Arc<dyn LinearMap>,
        d: Vec<f64>,
        alpha1: f64,
        alpha2: f64,
        m: f64,
        upper: f64,
    ) -> Self {
        assert_eq!(c.domain_dim(), g.domain_dim());
        assert_eq!(c.image_dim(), d.len());
        Self { c, g, d, alpha1, alpha2, m, upper }
    }
}

impl SmoothOracle for QuadraticDifference {
    fn dim(&self) -> usize {
        self.c.domain_dim()
    }
    fn lower_curvature(&self) -> f64 {
        self.m
    }
    fn upper_curvature(&self) -> f64 {
        self.upper
    }
    fn value(&self, z: &[f64]) -> f64 {
        let mut r = vec![0.0; self.c.image_dim()];
        self.c.apply(z, &mut r);
        linalg::axpy(-1.0, &self.d, &mut r);
        let mut s = vec![0.0; self.g.image_dim()];
        self.g.apply(z, &mut s);
        0.5 * self.alpha1 * linalg::dot(&r, &r) - 0.5 * self.alpha2 * linalg::dot(&s, &s)
    }
    fn value_and_gradient(&self, z: &[f64], grad: &mut [f64]) -> f64 {
        let mut r = vec![0.0; self.c.image_dim()];
        self.c.apply(z, &mut r);
        linalg::axpy(-1.0, &self.d, &mut r);
        let mut s = vec![0.0; self.g.image_dim()];
        self.g.apply(z, &mut s);
        let value = 0.5 * self.alpha1 * linalg::dot(&r, &r) - 0.5 * self.alpha2 * linalg::dot(&s, &s);
        linalg::scale(self.alpha1, &mut r);
        linalg::scale(-self.alpha2, &mut s);
        self.c.adjoint(&r, grad);
        let mut tmp = vec![0.0; grad.len()];
        self.g.adjoint(&s, &mut tmp);
        linalg::axpy(1.0, &tmp, grad);
        value
    }
}

/// Result of [`calibrate`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Calibration {
    /// `alpha2 / alpha1`.
    pub ratio_weight: f64,
    pub alpha1: f64,
    pub alpha2: f64,
    /// Extreme eigenvalues of `C^T C - r G^T G`.
    pub lambda_max: f64,
    pub lambda_min: f64,
}

/// Extreme eigenvalues of `H_r = C^T C - r G^T G`, computed from the square
/// root of the stacked Gram matrix `K = [C; G][C; G]^T`.
///
/// The nonzero spectrum of `H_r` equals that of `K^{1/2} S K^{1/2}` with
/// `S = diag(I_l, -r I)`, which is small when `[C; G]` has few rows.
fn extremes(sqrt_k: &DenseMatrix, l: usize, r: f64) -> Result<(f64, f64), LinalgError> {
    let k = sqrt_k.rows;
    let mut scaled = sqrt_k.clone();
    for i in l..k {
        for j in 0..k {
            let v = scaled.get(i, j);
            scaled.set(i, j, -r * v);
        }
    }
    let m = sqrt_k.matmul(&scaled);
    let eig = jacobi_eigen(&m, JACOBI_TOL)?;
    Ok((eig.values[0], *eig.values.last().unwrap()))
}

const BRACKET_STEPS: usize = 80;
const BISECTION_STEPS: usize = 200;

/// Finds `(alpha1, alpha2)` such that `alpha1 C^T C - alpha2 G^T G` has
/// largest eigenvalue `upper` and smallest eigenvalue `-upper / target`.
///
/// `stacked` holds the rows of `C` followed by those of `G`; `l` is the
/// number of rows of `C`. The weight `r = alpha2 / alpha1` is found by
/// bisection on `log r`, using that `lambda_max / (-lambda_min)` of `H_r`
/// decreases in `r`.
pub fn calibrate(stacked: &DenseMatrix, l: usize, target: f64, upper: f64) -> Result<Calibration, BenchmarkError> {
    let gram = stacked.matmul(&stacked.transpose());
    let sqrt_k = psd_sqrt(&gram)?;
    let ratio = |r: f64| -> Result<(f64, f64, f64), LinalgError> {
        let (hi, lo) = extremes(&sqrt_k, l, r)?;
        let q = if lo < 0.0 { hi / -lo } else { f64::INFINITY };
        Ok((q, hi, lo))
    };
    let unreachable = BenchmarkError::Unreachable { target, attempts: 1 };

    let tr_c: f64 = (0..l).map(|i| gram.get(i, i)).sum();
    let tr_g: f64 = (l..gram.rows).map(|i| gram.get(i, i)).sum();
    if !(tr_c > 0.0 && tr_g > 0.0) {
        return Err(unreachable);
    }
    let r0 = tr_c / tr_g;
    let (mut lo, mut hi) = (r0, r0);
    let mut steps = 0;
    while ratio(lo)?.0 <= target {
        lo /= 4.0;
        steps += 1;
        if steps > BRACKET_STEPS {
            return Err(unreachable);
        }
    }
    steps = 0;
    while ratio(hi)?.0 >= target {
        hi *= 4.0;
        steps += 1;
        if steps > BRACKET_STEPS {
            return Err(unreachable);
        }
    }
    for _ in 0..BISECTION_STEPS {
        let mid = (lo * hi).sqrt();
        if mid <= lo || mid >= hi {
            break;
        }
        if ratio(mid)?.0 > target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let r = (lo * hi).sqrt();
    let (_, lambda_max, lambda_min) = ratio(r)?;
    if !(lambda_max > 0.0 && lambda_min < 0.0) {
        return Err(unreachable);
    }
    let alpha1 = upper / lambda_max;
    Ok(Calibration { ratio_weight: r, alpha1, alpha2: r * alpha1, lambda_max, lambda_min })
}
