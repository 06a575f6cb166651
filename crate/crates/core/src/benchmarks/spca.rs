//! Sparse PCA with the minimax concave penalty:
//!
//! ```text
//! min <Sigma, Pi> + sum_ij q(Phi_ij) + nu |Phi|_1   s.t.  Pi - Phi = 0,  Pi ∈ F^k
//! ```
//!
//! The variable is stored as `(pack(Pi), Phi)`: the packed symmetric `Pi`
//! followed by the row-major `n x n` block `Phi`.

use std::sync::Arc;

use super::prox::{mcp_value_grad, FantopeL1};
use super::rng::{self, DATA};
use crate::error::BenchmarkError;
use crate::linalg::{self, packed_index, packed_len, DenseMatrix};
use crate::problem::{ConstrainedProblem, LinearConstraint, LinearMap, SmoothOracle};

pub const SPCA_NU: f64 = 100.0;
pub const SPCA_B: f64 = 0.005;
pub const SPCA_K: usize = 1;
pub const SPCA_DEFAULT_N: usize = 100;
pub const SPCA_LEADING_EIGENVALUE: f64 = 100.0;

#[derive(Debug, Clone)]
pub struct SpcaInstance {
    pub seed: u64,
    pub n: usize,
    pub s: usize,
    pub k: usize,
    pub nu: f64,
    pub b_mcp: f64,
    pub sigma: DenseMatrix,
    pub z0: Vec<f64>,
}

/// `f(Pi, Phi) = <Sigma, Pi> + sum_ij q(Phi_ij)`.
pub struct SpcaSmooth {
    n: usize,
    sigma_packed: Vec<f64>,
    nu: f64,
    b: f64,
}

impl SpcaSmooth {
    pub fn new(sigma: &DenseMatrix, nu: f64, b: f64) -> Self {
        let n = sigma.rows;
        let mut sigma_packed = vec![0.0; packed_len(n)];
        linalg::pack_sym(n, &sigma.data, &mut sigma_packed);
        Self { n, sigma_packed, nu, b }
    }
}

impl SmoothOracle for SpcaSmooth {
    fn dim(&self) -> usize {
        self.sigma_packed.len() + self.n * self.n
    }
    fn lower_curvature(&self) -> f64 {
        1.0 / self.b
    }
    fn upper_curvature(&self) -> f64 {
        1.0 / self.b
    }
    fn value(&self, z: &[f64]) -> f64 {
        let (pi, phi) = z.split_at(self.sigma_packed.len());
        linalg::dot(&self.sigma_packed, pi) + phi.iter().map(|t| mcp_value_grad(*t, self.nu, self.b).0).sum::<f64>()
    }
    fn value_and_gradient(&self, z: &[f64], grad: &mut [f64]) -> f64 {
        let split = self.sigma_packed.len();
        let (pi, phi) = z.split_at(split);
        let (gpi, gphi) = grad.split_at_mut(split);
        gpi.copy_from_slice(&self.sigma_packed);
        let mut value = linalg::dot(&self.sigma_packed, pi);
        for (g, t) in gphi.iter_mut().zip(phi) {
            let (q, dq) = mcp_value_grad(*t, self.nu, self.b);
            value += q;
            *g = dq;
        }
        value
    }
}

/// `(Pi, Phi) -> Pi - Phi` from packed-plus-full coordinates into `R^{n x n}`.
#[derive(Debug, Clone, Copy)]
pub struct PiMinusPhi {
    n: usize,
}

impl PiMinusPhi {
    pub fn new(n: usize) -> Self {
        Self { n }
    }
}

impl LinearMap for PiMinusPhi {
    fn domain_dim(&self) -> usize {
        packed_len(self.n) + self.n * self.n
    }
    fn image_dim(&self) -> usize {
        self.n * self.n
    }
    fn apply(&self, z: &[f64], out: &mut [f64]) {
        let (pi, phi) = z.split_at(packed_len(self.n));
        linalg::unpack_sym(self.n, pi, out);
        linalg::axpy(-1.0, phi, out);
    }
    fn adjoint(&self, p: &[f64], out: &mut [f64]) {
        let (opi, ophi) = out.split_at_mut(packed_len(self.n));
        linalg::pack_sym(self.n, p, opi);
        for (o, v) in ophi.iter_mut().zip(p) {
            *o = -v;
        }
    }
    /// `A A^* = P_sym + I` has largest eigenvalue 2.
    fn exact_norm(&self) -> Option<f64> {
        Some(std::f64::consts::SQRT_2)
    }
}

/// Draws `Sigma = P diag(100, 1, ..., 1) P^T` where the first column of `P`
/// has its first `s` entries equal to `1/sqrt(s)` and the rest of `P` is
/// standard Gaussian. The start is `(D_k, 0)`.
pub fn gen_spca(seed: u64, s: usize, n: usize) -> Result<(ConstrainedProblem, SpcaInstance), BenchmarkError> {
    if n == 0 || s == 0 || s > n {
        return Err(BenchmarkError::Parameter(format!("need 1 <= s <= n, got s = {s}, n = {n}")));
    }
    let k = SPCA_K;
    let mut data = rng::stream(seed, 0, DATA);
    let mut p = DenseMatrix::zeros(n, n);
    for i in 0..s {
        p.set(i, 0, 1.0 / (s as f64).sqrt());
    }
    for j in 1..n {
        for i in 0..n {
            p.set(i, j, rng::gaussian(&mut data));
        }
    }
    let mut weights = vec![1.0; n];
    weights[0] = SPCA_LEADING_EIGENVALUE;
    let mut sigma = DenseMatrix::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            let v: f64 = (0..n).map(|t| p.get(i, t) * weights[t] * p.get(j, t)).sum();
            sigma.set(i, j, v);
            sigma.set(j, i, v);
        }
    }

    let split = packed_len(n);
    let mut z0 = vec![0.0; split + n * n];
    for i in 0..k {
        z0[packed_index(n, i, i)] = 1.0;
    }

    let inst = SpcaInstance { seed, n, s, k, nu: SPCA_NU, b_mcp: SPCA_B, sigma, z0 };
    let f = SpcaSmooth::new(&inst.sigma, inst.nu, inst.b_mcp);
    let h = FantopeL1::new(n, k, inst.nu);
    let cons = LinearConstraint::new(Arc::new(PiMinusPhi::new(n)), vec![0.0; n * n])?;
    let prob = ConstrainedProblem::new(Arc::new(f), Arc::new(h), cons)?;
    Ok((prob, inst))
}
