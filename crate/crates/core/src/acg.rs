//! Accelerated composite gradient (ACG) method for strongly convex composite
//! problems `min psi_s + psi_n`.
//!
//! `psi_s` is smooth with `(mu/2)|z'-z|^2 <= psi_s(z') - l(z'; z) <= (L/2)|z'-z|^2`
//! and `psi_n` is convex with an available prox. The method stops with a
//! pair `(z, v)` such that `v ∈ grad psi_s(z) + ∂psi_n(z)` and
//! `|v| <= sigma |z - x0|`.

use crate::error::{AcgError, ProblemError};
use crate::linalg;
use crate::problem::prox_fixed_point_residual;

/// Oracle for a composite subproblem together with its curvature pair.
pub trait CompositeSubproblem {
    fn dim(&self) -> usize;
    /// Upper curvature `L` of the smooth part.
    fn upper_curvature(&self) -> f64;
    /// Strong-convexity modulus `mu` of the smooth part.
    fn strong_convexity(&self) -> f64;
    /// Writes `grad psi_s(z)` into `grad`, returns `psi_s(z)`.
    fn smooth_value_grad(&self, z: &[f64], grad: &mut [f64]) -> f64;
    fn nonsmooth_value(&self, z: &[f64]) -> f64;
    /// `out = argmin_u { t psi_n(u) + |u - x|^2/2 }`.
    fn nonsmooth_prox(&self, t: f64, x: &[f64], out: &mut [f64]) -> Result<(), ProblemError>;

    fn smooth_value(&self, z: &[f64]) -> f64 {
        let mut g = vec![0.0; self.dim()];
        self.smooth_value_grad(z, &mut g)
    }
}

#[derive(Debug, Clone)]
pub struct AcgResult {
    pub z: Vec<f64>,
    /// Residual `u_{j+1}`.
    pub v: Vec<f64>,
    pub inner_iters: usize,
    pub converged: bool,
}

/// Positive root of `L a^2 - (1 + mu A) a - (1 + mu A) A = 0`.
///
/// Both terms of the quadratic formula are nonnegative, so no cancellation
/// occurs.
pub fn acg_coefficient(a_acc: f64, upper: f64, mu: f64) -> f64 {
    let s = 1.0 + mu * a_acc;
    (s + (s * s + 4.0 * upper * s * a_acc).sqrt()) / (2.0 * upper)
}

/// `max(log t, 1)`
pub fn log1_plus(t: f64) -> f64 {
    t.ln().max(1.0)
}

/// Worst-case iteration count
/// `ceil(1 + 2 sqrt(2L/mu) log1+{ (4L^2/mu)(1/mu + 36L/sigma^2) })`.
pub fn acg_iteration_bound(upper: f64, mu: f64, sigma: f64) -> usize {
    let inner = 4.0 * upper * upper / mu * (1.0 / mu + 36.0 * upper / (sigma * sigma));
    (1.0 + 2.0 * (2.0 * upper / mu).sqrt() * log1_plus(inner)).ceil() as usize
}

/// Default iteration budget: ten times the worst-case bound.
pub fn default_max_iter(upper: f64, mu: f64, sigma: f64) -> usize {
    acg_iteration_bound(upper, mu, sigma).saturating_mul(10)
}

/// Runs ACG from `x0` until `|u| <= sigma |x - x0|` or `max_iter` iterations.
///
/// Hitting `max_iter` yields `converged = false` with the iterate whose
/// residual ratio `|u| / |x - x0|` was smallest. Non-finite iterates are a
/// hard error.
pub fn acg_solve<S: CompositeSubproblem + ?Sized>(
    sub: &S,
    sigma: f64,
    x0: &[f64],
    max_iter: usize,
) -> Result<AcgResult, AcgError> {
    let n = sub.dim();
    assert_eq!(x0.len(), n, "starting point has the wrong dimension");
    let upper = sub.upper_curvature();
    let mu = sub.strong_convexity();
    let lm = upper + mu;

    let mut acc = 0.0;
    let mut x = x0.to_vec();
    let mut y = x0.to_vec();
    let mut x_tilde = vec![0.0; n];
    let mut g_tilde = vec![0.0; n];
    let mut w = vec![0.0; n];
    let mut x_next = vec![0.0; n];
    let mut g_next = vec![0.0; n];
    let mut u = vec![0.0; n];
    let mut best: Option<(f64, Vec<f64>, Vec<f64>)> = None;

    for j in 0..max_iter {
        let a = acg_coefficient(acc, upper, mu);
        let acc_next = acc + a;
        let (wx, wy) = (acc / acc_next, a / acc_next);
        for i in 0..n {
            x_tilde[i] = wx * x[i] + wy * y[i];
        }
        sub.smooth_value_grad(&x_tilde, &mut g_tilde);
        for i in 0..n {
            w[i] = x_tilde[i] - g_tilde[i] / lm;
        }
        sub.nonsmooth_prox(1.0 / lm, &w, &mut x_next)?;
        let step = a / (1.0 + mu * acc_next);
        for i in 0..n {
            y[i] += step * (upper * (x_next[i] - x_tilde[i]) + mu * (x_next[i] - y[i]));
        }
        sub.smooth_value_grad(&x_next, &mut g_next);
        for i in 0..n {
            u[i] = g_next[i] - g_tilde[i] + lm * (x_tilde[i] - x_next[i]);
        }
        if !(acc_next.is_finite() && linalg::all_finite(&x_next) && linalg::all_finite(&u) && linalg::all_finite(&y)) {
            return Err(AcgError::NumericalBreakdown { iter: j });
        }
        let u_norm = linalg::norm(&u);
        let step_norm = linalg::dist(&x_next, x0);
        if u_norm <= sigma * step_norm {
            return Ok(AcgResult { z: x_next, v: u, inner_iters: j + 1, converged: true });
        }
        let ratio = u_norm / step_norm.max(f64::MIN_POSITIVE);
        if best.as_ref().is_none_or(|(r, _, _)| ratio < *r) {
            best = Some((ratio, x_next.clone(), u.clone()));
        }
        std::mem::swap(&mut x, &mut x_next);
        acc = acc_next;
    }
    let (z, v) = match best {
        Some((_, z, v)) => (z, v),
        None => (x0.to_vec(), vec![0.0; n]),
    };
    Ok(AcgResult { z, v, inner_iters: max_iter, converged: false })
}

/// Checks `v - grad psi_s(z) ∈ ∂psi_n(z)` through the prox fixed point.
pub fn acg_residual_inclusion_check<S: CompositeSubproblem + ?Sized>(
    sub: &S,
    z: &[f64],
    v: &[f64],
    tol: f64,
) -> Result<bool, ProblemError> {
    let mut grad = vec![0.0; sub.dim()];
    sub.smooth_value_grad(z, &mut grad);
    let xi: Vec<f64> = v.iter().zip(&grad).map(|(a, b)| a - b).collect();
    Ok(prox_fixed_point_residual(|t, x, out| sub.nonsmooth_prox(t, x, out), z, &xi)? <= tol)
}
