//! Simple generic oracles: dense quadratics and the zero function.

use crate::error::{LinalgError, ProblemError};
use crate::linalg::{self, DenseMatrix, JACOBI_TOL};
use crate::problem::{ProxOracle, SmoothOracle};

/// `f(z) = z^T Q z / 2 + g^T z` with symmetric `Q`.
#[derive(Debug, Clone)]
pub struct QuadraticFunction {
    q: DenseMatrix,
    g: Vec<f64>,
    m: f64,
    upper: f64,
}

impl QuadraticFunction {
    /// Curvatures are read off the extreme eigenvalues of `Q`:
    /// `M = max(lambda_max, 0)`, `m = max(-lambda_min, 0)`.
    pub fn new(q: DenseMatrix, g: Vec<f64>) -> Result<Self, LinalgError> {
        assert_eq!(q.rows, q.cols);
        assert_eq!(g.len(), q.rows);
        let eig = linalg::jacobi_eigen(&q, JACOBI_TOL)?;
        let upper = eig.values.first().copied().unwrap_or(0.0).max(0.0);
        let m = (-eig.values.last().copied().unwrap_or(0.0)).max(0.0);
        Ok(Self { q, g, m, upper })
    }

    /// `|z|^2 / 2` declared with `m = M = 1`.
    pub fn half_squared_norm(n: usize) -> Self {
        Self { q: DenseMatrix::identity(n), g: vec![0.0; n], m: 1.0, upper: 1.0 }
    }

    /// Overrides the declared curvature pair.
    pub fn with_curvature(mut self, m: f64, upper: f64) -> Self {
        self.m = m;
        self.upper = upper;
        self
    }

    pub fn hessian(&self) -> &DenseMatrix {
        &self.q
    }
}

impl SmoothOracle for QuadraticFunction {
    fn dim(&self) -> usize {
        self.g.len()
    }
    fn lower_curvature(&self) -> f64 {
        self.m
    }
    fn upper_curvature(&self) -> f64 {
        self.upper
    }
    fn value(&self, z: &[f64]) -> f64 {
        let mut qz = vec![0.0; z.len()];
        self.q.matvec(z, &mut qz);
        0.5 * linalg::dot(z, &qz) + linalg::dot(&self.g, z)
    }
    fn value_and_gradient(&self, z: &[f64], grad: &mut [f64]) -> f64 {
        self.q.matvec(z, grad);
        let v = 0.5 * linalg::dot(z, grad) + linalg::dot(&self.g, z);
        linalg::axpy(1.0, &self.g, grad);
        v
    }
}

/// `h = 0`; its prox is the identity.
#[derive(Debug, Clone, Copy)]
pub struct ZeroFunction {
    n: usize,
}

impl ZeroFunction {
    pub fn new(n: usize) -> Self {
        Self { n }
    }
}

impl ProxOracle for ZeroFunction {
    fn dim(&self) -> usize {
        self.n
    }
    fn value(&self, _z: &[f64]) -> f64 {
        0.0
    }
    fn prox(&self, _t: f64, x: &[f64], out: &mut [f64]) -> Result<(), ProblemError> {
        out.copy_from_slice(x);
        Ok(())
    }
    fn lipschitz(&self) -> Option<f64> {
        Some(0.0)
    }
}
