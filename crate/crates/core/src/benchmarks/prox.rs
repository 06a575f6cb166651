//! Projections and proximal maps used by the benchmark families, plus the
//! minimax concave penalty split into its smooth concave part.

use crate::error::{BenchmarkError, LinalgError, ProblemError};
use crate::linalg::{self, DenseMatrix, JACOBI_TOL};
use crate::problem::ProxOracle;

/// Membership slack for indicator functions.
pub const DOMAIN_TOL: f64 = 1e-8;

/// Euclidean projection onto `{z >= 0, sum z = 1}` by sort and threshold.
pub fn project_simplex(x: &[f64]) -> Vec<f64> {
    let n = x.len();
    assert!(n > 0, "cannot project onto an empty simplex");
    let mut sorted = x.to_vec();
    sorted.sort_by(|a, b| b.total_cmp(a));
    let mut cumsum = 0.0;
    let mut tau = 0.0;
    for (k, &v) in sorted.iter().enumerate() {
        cumsum += v;
        let candidate = (cumsum - 1.0) / (k as f64 + 1.0);
        if v - candidate > 0.0 {
            tau = candidate;
        } else {
            break;
        }
    }
    let mut out: Vec<f64> = x.iter().map(|v| (v - tau).max(0.0)).collect();
    // one correction pass so the sum is exact to round-off of n additions
    let s: f64 = out.iter().sum();
    let support = out.iter().filter(|v| **v > 0.0).count();
    if support > 0 && s != 1.0 {
        let shift = (s - 1.0) / support as f64;
        for v in out.iter_mut().filter(|v| **v > 0.0) {
            *v = (*v - shift).max(0.0);
        }
    }
    out
}

fn symmetric_eigen(x: &DenseMatrix) -> Result<linalg::SymmetricEigen, LinalgError> {
    linalg::jacobi_eigen(x, JACOBI_TOL)
}

/// Projection onto `{Z PSD, tr Z = 1}`.
pub fn project_spectraplex(x: &DenseMatrix) -> Result<DenseMatrix, LinalgError> {
    let eig = symmetric_eigen(x)?;
    let w = project_simplex(&eig.values);
    let mut out = DenseMatrix::zeros(x.rows, x.cols);
    eig.reassemble(&w, &mut out.data);
    Ok(out)
}

/// Capped water-filling: eigenvalues `clip(lambda_i - tau, 0, 1)` summing to `k`.
pub fn fantope_eigenvalues(values: &[f64], k: usize) -> Result<Vec<f64>, BenchmarkError> {
    let n = values.len();
    if k == 0 || k > n {
        return Err(BenchmarkError::FantopeBracket { k, n });
    }
    if k == n {
        return Ok(vec![1.0; n]);
    }
    let kf = k as f64;
    let mass = |tau: f64| values.iter().map(|v| (v - tau).clamp(0.0, 1.0)).sum::<f64>();
    let hi0 = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let lo0 = values.iter().copied().fold(f64::INFINITY, f64::min) - 2.0;
    // mass(lo0) = n >= k and mass(hi0) = 0 < k
    let (mut lo, mut hi) = (lo0, hi0);
    if !(mass(lo) >= kf && mass(hi) <= kf) {
        return Err(BenchmarkError::FantopeBracket { k, n });
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if mass(mid) >= kf {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    // exact solve on the linear piece containing the root
    let mut tau = 0.5 * (lo + hi);
    let (mut saturated, mut free_sum, mut free_count) = (0usize, 0.0, 0usize);
    for &v in values {
        let s = v - tau;
        if s >= 1.0 {
            saturated += 1;
        } else if s > 0.0 {
            free_sum += v;
            free_count += 1;
        }
    }
    if free_count > 0 {
        let exact = (free_sum + saturated as f64 - kf) / free_count as f64;
        if (mass(exact) - kf).abs() <= (mass(tau) - kf).abs() {
            tau = exact;
        }
    }
    Ok(values.iter().map(|v| (v - tau).clamp(0.0, 1.0)).collect())
}

/// Projection onto the k-Fantope `{0 <= Z <= I, tr Z = k}`.
pub fn project_fantope(x: &DenseMatrix, k: usize) -> Result<DenseMatrix, BenchmarkError> {
    let eig = symmetric_eigen(x)?;
    let w = fantope_eigenvalues(&eig.values, k)?;
    let mut out = DenseMatrix::zeros(x.rows, x.cols);
    eig.reassemble(&w, &mut out.data);
    Ok(out)
}

/// Componentwise soft-thresholding by `t`.
pub fn prox_l1(x: &[f64], t: f64) -> Vec<f64> {
    x.iter().map(|&v| soft_threshold(v, t)).collect()
}

#[inline]
pub fn soft_threshold(v: f64, t: f64) -> f64 {
    if v > t {
        v - t
    } else if v < -t {
        v + t
    } else {
        0.0
    }
}

/// Smooth concave part `q` of the minimax concave penalty and its derivative:
/// `q(t) = -t^2/(2b)` for `|t| <= b nu`, else `b nu^2/2 - nu |t|`.
#[inline]
pub fn mcp_value_grad(t: f64, nu: f64, b: f64) -> (f64, f64) {
    let knee = b * nu;
    if t.abs() <= knee {
        (-t * t / (2.0 * b), -t / b)
    } else {
        (0.5 * b * nu * nu - nu * t.abs(), -nu * t.signum())
    }
}

/// Indicator of the unit simplex in `R^n`.
#[derive(Debug, Clone, Copy)]
pub struct SimplexIndicator {
    n: usize,
}

impl SimplexIndicator {
    pub fn new(n: usize) -> Self {
        Self { n }
    }

    pub fn contains(&self, z: &[f64]) -> bool {
        let s: f64 = z.iter().sum();
        z.iter().all(|v| *v >= -DOMAIN_TOL) && (s - 1.0).abs() <= DOMAIN_TOL
    }
}

impl ProxOracle for SimplexIndicator {
    fn dim(&self) -> usize {
        self.n
    }
    fn value(&self, z: &[f64]) -> f64 {
        if self.contains(z) {
            0.0
        } else {
            f64::INFINITY
        }
    }
    fn prox(&self, _t: f64, x: &[f64], out: &mut [f64]) -> Result<(), ProblemError> {
        out.copy_from_slice(&project_simplex(x));
        Ok(())
    }
    fn lipschitz(&self) -> Option<f64> {
        Some(0.0)
    }
    fn diameter(&self) -> Option<f64> {
        Some(if self.n > 1 { std::f64::consts::SQRT_2 } else { 0.0 })
    }
    /// Distance to the relative boundary, measured inside the affine hull.
    fn boundary_distance(&self, z: &[f64]) -> Option<f64> {
        if self.n < 2 || !self.contains(z) {
            return None;
        }
        let zmin = z.iter().copied().fold(f64::INFINITY, f64::min).max(0.0);
        Some(zmin / (1.0 - 1.0 / self.n as f64).sqrt())
    }
}

fn decode(n: usize, packed: &[f64]) -> DenseMatrix {
    let mut full = DenseMatrix::zeros(n, n);
    linalg::unpack_sym(n, packed, &mut full.data);
    full
}

/// Indicator of the spectraplex over packed symmetric `n x n` matrices.
#[derive(Debug, Clone, Copy)]
pub struct SpectraplexIndicator {
    n: usize,
}

impl SpectraplexIndicator {
    pub fn new(n: usize) -> Self {
        Self { n }
    }

    pub fn order(&self) -> usize {
        self.n
    }

    fn eigenvalues(&self, z: &[f64]) -> Option<Vec<f64>> {
        linalg::jacobi_eigen(&decode(self.n, z), JACOBI_TOL).ok().map(|e| e.values)
    }

    pub fn contains(&self, z: &[f64]) -> bool {
        match self.eigenvalues(z) {
            Some(vals) => {
                let tr: f64 = vals.iter().sum();
                vals.iter().all(|v| *v >= -DOMAIN_TOL) && (tr - 1.0).abs() <= DOMAIN_TOL
            }
            None => false,
        }
    }
}

impl ProxOracle for SpectraplexIndicator {
    fn dim(&self) -> usize {
        linalg::packed_len(self.n)
    }
    fn value(&self, z: &[f64]) -> f64 {
        if self.contains(z) {
            0.0
        } else {
            f64::INFINITY
        }
    }
    fn prox(&self, _t: f64, x: &[f64], out: &mut [f64]) -> Result<(), ProblemError> {
        let proj = project_spectraplex(&decode(self.n, x))?;
        linalg::pack_sym(self.n, &proj.data, out);
        Ok(())
    }
    fn lipschitz(&self) -> Option<f64> {
        Some(0.0)
    }
    fn diameter(&self) -> Option<f64> {
        Some(if self.n > 1 { std::f64::consts::SQRT_2 } else { 0.0 })
    }
    fn boundary_distance(&self, z: &[f64]) -> Option<f64> {
        if self.n < 2 || !self.contains(z) {
            return None;
        }
        let vals = self.eigenvalues(z)?;
        let lmin = vals.last().copied()?.max(0.0);
        Some(lmin / (1.0 - 1.0 / self.n as f64).sqrt())
    }
}

/// Indicator of the k-Fantope over packed symmetric `n x n` matrices.
#[derive(Debug, Clone, Copy)]
pub struct FantopeIndicator {
    n: usize,
    k: usize,
}

impl FantopeIndicator {
    pub fn new(n: usize, k: usize) -> Self {
        assert!(k >= 1 && k <= n, "Fantope rank must satisfy 1 <= k <= n");
        Self { n, k }
    }

    pub fn contains(&self, z: &[f64]) -> bool {
        fantope_contains(self.n, self.k, z)
    }

    pub fn project_packed(&self, x: &[f64], out: &mut [f64]) -> Result<(), ProblemError> {
        let proj = project_fantope(&decode(self.n, x), self.k).map_err(|e| match e {
            BenchmarkError::Linalg(l) => ProblemError::Prox(l),
            _ => ProblemError::Prox(LinalgError::NonFinite),
        })?;
        linalg::pack_sym(self.n, &proj.data, out);
        Ok(())
    }
}

fn fantope_contains(n: usize, k: usize, z: &[f64]) -> bool {
    match linalg::jacobi_eigen(&decode(n, z), JACOBI_TOL) {
        Ok(eig) => {
            let tr: f64 = eig.values.iter().sum();
            eig.values.iter().all(|v| *v >= -DOMAIN_TOL && *v <= 1.0 + DOMAIN_TOL)
                && (tr - k as f64).abs() <= DOMAIN_TOL * k as f64
        }
        Err(_) => false,
    }
}

impl ProxOracle for FantopeIndicator {
    fn dim(&self) -> usize {
        linalg::packed_len(self.n)
    }
    fn value(&self, z: &[f64]) -> f64 {
        if self.contains(z) {
            0.0
        } else {
            f64::INFINITY
        }
    }
    fn prox(&self, _t: f64, x: &[f64], out: &mut [f64]) -> Result<(), ProblemError> {
        self.project_packed(x, out)
    }
    fn lipschitz(&self) -> Option<f64> {
        Some(0.0)
    }
}

/// `h(Pi, Phi) = indicator_{F^k}(Pi) + nu |Phi|_1` with `Pi` packed symmetric
/// and `Phi` a full row-major `n x n` block.
#[derive(Debug, Clone, Copy)]
pub struct FantopeL1 {
    fantope: FantopeIndicator,
    nu: f64,
}

impl FantopeL1 {
    pub fn new(n: usize, k: usize, nu: f64) -> Self {
        Self { fantope: FantopeIndicator::new(n, k), nu }
    }

    pub fn split_len(&self) -> usize {
        linalg::packed_len(self.fantope.n)
    }
}

impl ProxOracle for FantopeL1 {
    fn dim(&self) -> usize {
        self.split_len() + self.fantope.n * self.fantope.n
    }
    fn value(&self, z: &[f64]) -> f64 {
        let (pi, phi) = z.split_at(self.split_len());
        if !self.fantope.contains(pi) {
            return f64::INFINITY;
        }
        self.nu * phi.iter().map(|v| v.abs()).sum::<f64>()
    }
    fn prox(&self, t: f64, x: &[f64], out: &mut [f64]) -> Result<(), ProblemError> {
        let split = self.split_len();
        let (xpi, xphi) = x.split_at(split);
        let (opi, ophi) = out.split_at_mut(split);
        self.fantope.project_packed(xpi, opi)?;
        let thr = t * self.nu;
        for (o, v) in ophi.iter_mut().zip(xphi) {
            *o = soft_threshold(*v, thr);
        }
        Ok(())
    }
}
