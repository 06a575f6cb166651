//! Linearly constrained quadratic matrix problems over the spectraplex:
//!
//! ```text
//! min (alpha1/2)|C(Z) - d|^2 - (alpha2/2)|D B(Z)|^2   s.t.  A(Z) = b,  Z ∈ P_n
//! ```
//!
//! `Z` is stored packed; each of `A`, `B`, `C` is a family of sparse
//! symmetric coefficient matrices acting through the Frobenius product.

use std::collections::HashSet;
use std::sync::Arc;

use rand::Rng;

use super::prox::SpectraplexIndicator;
use super::quadratic::{calibrate, QuadraticDifference, SparseRows};
use super::rng::{self, DATA, INTERIOR, START};
use crate::error::BenchmarkError;
use crate::linalg::{self, packed_index, packed_len, singular_values, DenseMatrix};
use crate::problem::{ConstrainedProblem, LinearConstraint, LinearMap};

pub const LCQM_ROWS: usize = 20;
pub const LCQM_ORDER: usize = 100;
pub const LCQM_DENSITY: f64 = 0.01;
pub const LCQM_CURVATURE_RATIO: f64 = 4.0;
pub const MAX_ATTEMPTS: u64 = 10;

#[derive(Debug, Clone)]
pub struct LcqmInstance {
    pub seed: u64,
    pub attempt: u64,
    pub n: usize,
    /// Rows are `A_i` in packed coordinates.
    pub a_ops: SparseRows,
    pub b_ops: SparseRows,
    pub c_ops: SparseRows,
    pub d_diag: Vec<f64>,
    pub b: Vec<f64>,
    pub d: Vec<f64>,
    pub alpha1: f64,
    pub alpha2: f64,
    pub upper: f64,
    pub lower: f64,
    pub z0: Vec<f64>,
    /// Positive definite point of the spectraplex with `A(Z) = b`.
    pub slater_point: Vec<f64>,
}

impl LcqmInstance {
    pub fn scaled_b(&self) -> SparseRows {
        let mut g = self.b_ops.clone();
        g.scale_rows(&self.d_diag);
        g
    }
}

/// Sparse symmetric `n x n` matrix with about `density * n^2` nonzero
/// entries drawn from `U[0,1]`, as a row over packed coordinates.
///
/// In packed coordinates `<S, Z> = sum_i S_ii z_ii + sum_{i<j} sqrt(2) S_ij z_ij`.
pub fn sparse_symmetric_row(rng: &mut impl Rng, n: usize, density: f64) -> Vec<(usize, f64)> {
    let target = ((density * (n * n) as f64).round() as usize).max(1);
    let mut seen = HashSet::new();
    let mut row = Vec::new();
    let mut count = 0;
    while count < target {
        let i = rng.random_range(0..n);
        let j = rng.random_range(0..n);
        let (i, j) = (i.min(j), i.max(j));
        if !seen.insert((i, j)) {
            continue;
        }
        let v = rng::uniform(rng, 0.0, 1.0);
        if i == j {
            row.push((packed_index(n, i, i), v));
            count += 1;
        } else {
            row.push((packed_index(n, i, j), std::f64::consts::SQRT_2 * v));
            count += 2;
        }
    }
    row
}

fn sparse_family(rng: &mut impl Rng, count: usize, n: usize) -> SparseRows {
    let rows = (0..count).map(|_| sparse_symmetric_row(rng, n, LCQM_DENSITY)).collect();
    SparseRows::from_rows(packed_len(n), rows)
}

fn stack(top: &DenseMatrix, bottom: &DenseMatrix) -> DenseMatrix {
    let mut out = DenseMatrix::zeros(top.rows + bottom.rows, top.cols);
    out.data[..top.data.len()].copy_from_slice(&top.data);
    out.data[top.data.len()..].copy_from_slice(&bottom.data);
    out
}

/// Draws the instance for `seed` with `lambda_max = upper` and
/// `lambda_min = -upper/4` on the Hessian quadratic form.
pub fn gen_lcqm(seed: u64, upper: f64) -> Result<(ConstrainedProblem, LcqmInstance), BenchmarkError> {
    gen_lcqm_sized(seed, upper, LCQM_ROWS, LCQM_ORDER)
}

/// [`gen_lcqm`] with explicit `(l, n)`.
pub fn gen_lcqm_sized(
    seed: u64,
    upper: f64,
    l: usize,
    n: usize,
) -> Result<(ConstrainedProblem, LcqmInstance), BenchmarkError> {
    if !(upper > 0.0 && upper.is_finite()) {
        return Err(BenchmarkError::Parameter(format!("curvature target must be positive, got {upper}")));
    }
    if l == 0 || n < 2 {
        return Err(BenchmarkError::Parameter(format!("need l >= 1 and n >= 2, got l = {l}, n = {n}")));
    }
    let dim = packed_len(n);
    for attempt in 0..MAX_ATTEMPTS {
        let mut data = rng::stream(seed, attempt, DATA);
        let a_ops = sparse_family(&mut data, l, n);
        let b_ops = sparse_family(&mut data, n, n);
        let c_ops = sparse_family(&mut data, l, n);
        let d = rng::uniform_vec(&mut data, l, 0.0, 1.0);
        let d_diag = rng::uniform_vec(&mut data, n, 1.0, 1000.0);

        let mut interior = rng::stream(seed, attempt, INTERIOR);
        let w = rng::uniform_vec(&mut interior, n, 0.0, 1.0);
        let total: f64 = w.iter().sum();
        let mut slater_point = vec![0.0; dim];
        for (i, wi) in w.iter().enumerate() {
            slater_point[packed_index(n, i, i)] = wi / total;
        }
        let mut b = vec![0.0; l];
        a_ops.apply(&slater_point, &mut b);

        let mut start = rng::stream(seed, attempt, START);
        let vecs: Vec<Vec<f64>> = (0..3)
            .map(|_| {
                let mut v = rng::uniform_vec(&mut start, n, 0.0, 1.0);
                let nv = linalg::norm(&v);
                linalg::scale(1.0 / nv, &mut v);
                v
            })
            .collect();
        let e = rng::uniform_vec(&mut start, 3, 0.0, 1.0);
        let e_total: f64 = e.iter().sum();
        let mut full = vec![0.0; n * n];
        for (v, ei) in vecs.iter().zip(&e) {
            for i in 0..n {
                linalg::axpy(ei / e_total * v[i], v, &mut full[i * n..(i + 1) * n]);
            }
        }
        let mut z0 = vec![0.0; dim];
        linalg::pack_sym(n, &full, &mut z0);

        let mut inst = LcqmInstance {
            seed,
            attempt,
            n,
            a_ops,
            b_ops,
            c_ops,
            d_diag,
            b,
            d,
            alpha1: 0.0,
            alpha2: 0.0,
            upper,
            lower: upper / LCQM_CURVATURE_RATIO,
            z0,
            slater_point,
        };
        let g = inst.scaled_b();
        let stacked = stack(&inst.c_ops.to_dense(), &g.to_dense());
        let cal = match calibrate(&stacked, l, LCQM_CURVATURE_RATIO, upper) {
            Ok(cal) => cal,
            Err(BenchmarkError::Unreachable { .. }) => {
                log::warn!("LCQM seed {seed}: curvature ratio unreachable on attempt {attempt}, regenerating");
                continue;
            }
            Err(e) => return Err(e),
        };
        inst.alpha1 = cal.alpha1;
        inst.alpha2 = cal.alpha2;

        let opnorm = singular_values(&inst.a_ops.to_dense())?[0];
        let f = QuadraticDifference::new(
            Arc::new(inst.c_ops.clone()),
            Arc::new(g),
            inst.d.clone(),
            inst.alpha1,
            inst.alpha2,
            inst.lower,
            inst.upper,
        );
        let cons = LinearConstraint::with_opnorm(Arc::new(inst.a_ops.clone()), inst.b.clone(), opnorm)?;
        let prob = ConstrainedProblem::new(Arc::new(f), Arc::new(SpectraplexIndicator::new(n)), cons)?;
        return Ok((prob, inst));
    }
    Err(BenchmarkError::Unreachable { target: LCQM_CURVATURE_RATIO, attempts: MAX_ATTEMPTS as usize })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{jacobi_eigen, JACOBI_TOL};
    use crate::problem::feasibility_residual;

    #[test]
    fn sparse_row_density() {
        let mut rng = rng::stream(1, 0, DATA);
        let row = sparse_symmetric_row(&mut rng, 100, 0.01);
        let diag: HashSet<usize> = (0..100).map(|i| packed_index(100, i, i)).collect();
        let full_nnz: usize = row.iter().map(|(k, _)| if diag.contains(k) { 1 } else { 2 }).sum();
        assert!((100..=101).contains(&full_nnz));
    }

    #[test]
    fn small_instance_properties() {
        let (prob, inst) = gen_lcqm_sized(4, 50.0, 3, 8).unwrap();
        let (_, again) = gen_lcqm_sized(4, 50.0, 3, 8).unwrap();
        assert_eq!(inst.a_ops, again.a_ops);
        assert_eq!(inst.z0, again.z0);

        let n = inst.n;
        let mut full = vec![0.0; n * n];
        linalg::unpack_sym(n, &inst.z0, &mut full);
        let eig = jacobi_eigen(&DenseMatrix::from_rows(n, n, full), JACOBI_TOL).unwrap();
        let tr: f64 = eig.values.iter().sum();
        assert!((tr - 1.0).abs() < 1e-12);
        assert!(*eig.values.last().unwrap() > -1e-12);
        assert_eq!(prob.h.value(&inst.z0), 0.0);
        assert!(linalg::norm(&feasibility_residual(&prob, &inst.slater_point)) < 1e-12);

        // Hessian of the quadratic form in packed coordinates
        let c = inst.c_ops.to_dense();
        let g = inst.scaled_b().to_dense();
        let mut h = c.gram();
        for (hv, gv) in h.data.iter_mut().zip(&g.gram().data) {
            *hv = inst.alpha1 * *hv - inst.alpha2 * gv;
        }
        let eig = jacobi_eigen(&h, JACOBI_TOL).unwrap();
        let (hi, lo) = (eig.values[0], *eig.values.last().unwrap());
        assert!((hi - 50.0).abs() < 1e-6 * 50.0);
        assert!((hi / -lo - 4.0).abs() < 1e-5);
    }
}
