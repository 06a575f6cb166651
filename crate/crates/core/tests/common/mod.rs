//! Fixtures and independent oracles shared by the integration tests.
#![allow(dead_code)]

use std::sync::Arc;

use aidal_core::acg::CompositeSubproblem;
use aidal_core::benchmarks::prox::{project_simplex, prox_l1, SimplexIndicator};
use aidal_core::linalg::{self, jacobi_eigen, DenseMatrix};
use aidal_core::oracles::QuadraticFunction;
use aidal_core::{ConstrainedProblem, LinearConstraint, ProblemError};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// `min |z|^2/2` over the unit simplex in `R^2` subject to `z1 + z2 = 1`;
/// the solution is `(0.5, 0.5)`.
pub fn simplex_fixture() -> ConstrainedProblem {
    let f = Arc::new(QuadraticFunction::half_squared_norm(2));
    let h = Arc::new(SimplexIndicator::new(2));
    let a = DenseMatrix::from_rows(1, 2, vec![1.0, 1.0]);
    let cons = LinearConstraint::new(Arc::new(a), vec![1.0]).unwrap();
    ConstrainedProblem::new(f, h, cons).unwrap()
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random symmetric matrix with entries in `[-1, 1]`.
pub fn random_symmetric(rng: &mut impl Rng, n: usize) -> DenseMatrix {
    let mut m = DenseMatrix::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            let v = rng.random_range(-1.0..1.0);
            m.set(i, j, v);
            m.set(j, i, v);
        }
    }
    m
}

/// Random orthogonal matrix (rows) from the eigenvectors of a random
/// symmetric matrix.
pub fn random_orthogonal(rng: &mut impl Rng, n: usize) -> DenseMatrix {
    jacobi_eigen(&random_symmetric(rng, n), 1e-14).unwrap().vectors
}

/// `V^T diag(d) V`.
pub fn conjugate(v: &DenseMatrix, d: &[f64]) -> DenseMatrix {
    let n = d.len();
    let mut out = DenseMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            let s: f64 = (0..n).map(|k| v.get(k, i) * d[k] * v.get(k, j)).sum();
            out.set(i, j, s);
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Nonsmooth {
    Zero,
    L1(f64),
    Simplex,
}

/// `psi_s(x) = x^T Q x / 2 - g^T x` with `spec(Q) ⊂ [mu, L]` (both attained)
/// and a simple convex `psi_n`.
pub struct RandomComposite {
    pub q: DenseMatrix,
    pub g: Vec<f64>,
    pub mu: f64,
    pub upper: f64,
    pub nonsmooth: Nonsmooth,
}

impl RandomComposite {
    pub fn sample(rng: &mut impl Rng, n: usize, mu: f64, upper: f64, nonsmooth: Nonsmooth) -> Self {
        let v = random_orthogonal(rng, n);
        let mut d: Vec<f64> = (0..n).map(|_| rng.random_range(mu..=upper)).collect();
        d[0] = mu;
        d[n - 1] = upper;
        let g = (0..n).map(|_| rng.random_range(-10.0..10.0)).collect();
        Self { q: conjugate(&v, &d), g, mu, upper, nonsmooth }
    }

    pub fn objective(&self, x: &[f64]) -> f64 {
        self.smooth_value(x) + self.nonsmooth_value(x)
    }
}

impl CompositeSubproblem for RandomComposite {
    fn dim(&self) -> usize {
        self.g.len()
    }
    fn upper_curvature(&self) -> f64 {
        self.upper
    }
    fn strong_convexity(&self) -> f64 {
        self.mu
    }
    fn smooth_value_grad(&self, z: &[f64], grad: &mut [f64]) -> f64 {
        self.q.matvec(z, grad);
        let v = 0.5 * linalg::dot(z, grad) - linalg::dot(&self.g, z);
        linalg::axpy(-1.0, &self.g, grad);
        v
    }
    fn nonsmooth_value(&self, z: &[f64]) -> f64 {
        match self.nonsmooth {
            Nonsmooth::Zero => 0.0,
            Nonsmooth::L1(w) => w * z.iter().map(|v| v.abs()).sum::<f64>(),
            Nonsmooth::Simplex => {
                let s: f64 = z.iter().sum();
                if z.iter().all(|v| *v >= -1e-9) && (s - 1.0).abs() <= 1e-9 {
                    0.0
                } else {
                    f64::INFINITY
                }
            }
        }
    }
    fn nonsmooth_prox(&self, t: f64, x: &[f64], out: &mut [f64]) -> Result<(), ProblemError> {
        match self.nonsmooth {
            Nonsmooth::Zero => out.copy_from_slice(x),
            Nonsmooth::L1(w) => out.copy_from_slice(&prox_l1(x, t * w)),
            Nonsmooth::Simplex => out.copy_from_slice(&project_simplex(x)),
        }
        Ok(())
    }
}

/// Dykstra's alternating projections onto `C1 ∩ C2`, started at `x`. Stops
/// once an iterate of `C2` moves less than `tol` and lies within `tol` of
/// `C1`.
pub fn dykstra(
    x: &[f64],
    p1: impl Fn(&[f64]) -> Vec<f64>,
    p2: impl Fn(&[f64]) -> Vec<f64>,
    tol: f64,
    max_iter: usize,
) -> Vec<f64> {
    let n = x.len();
    let mut y = x.to_vec();
    let (mut a, mut b) = (vec![0.0; n], vec![0.0; n]);
    for _ in 0..max_iter {
        let ya: Vec<f64> = (0..n).map(|i| y[i] + a[i]).collect();
        let u = p1(&ya);
        for i in 0..n {
            a[i] = ya[i] - u[i];
        }
        let ub: Vec<f64> = (0..n).map(|i| u[i] + b[i]).collect();
        let next = p2(&ub);
        for i in 0..n {
            b[i] = ub[i] - next[i];
        }
        let change = linalg::dist(&next, &y);
        y = next;
        if change < tol && linalg::dist(&p1(&y), &y) < tol {
            break;
        }
    }
    y
}

/// Projection onto the hyperplane `{sum x = s}`.
pub fn project_sum(x: &[f64], s: f64) -> Vec<f64> {
    let shift = (x.iter().sum::<f64>() - s) / x.len() as f64;
    x.iter().map(|v| v - shift).collect()
}

/// Projection of a full symmetric matrix onto `{tr X = s}`.
pub fn project_trace(x: &[f64], n: usize, s: f64) -> Vec<f64> {
    let tr: f64 = (0..n).map(|i| x[i * n + i]).sum();
    let mut out = x.to_vec();
    for i in 0..n {
        out[i * n + i] -= (tr - s) / n as f64;
    }
    out
}

/// Clips the eigenvalues of a full symmetric matrix to `[lo, hi]`.
pub fn clip_eigenvalues(x: &[f64], n: usize, lo: f64, hi: f64) -> Vec<f64> {
    let m = DenseMatrix::from_rows(n, n, x.to_vec());
    let eig = jacobi_eigen(&m, 1e-15).unwrap();
    let d: Vec<f64> = eig.values.iter().map(|v| v.clamp(lo, hi)).collect();
    conjugate(&eig.vectors, &d).data
}
