//! Smallest eigenvalue of `L_K` by Lanczos on the symmetrized operator
//! `M^{1/2} L_K M^{-1/2}`, with full reorthogonalization.

use serde::{Deserialize, Serialize};

use crate::exhaustion::RestrictedOperator;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectralEstimate {
    /// Smallest Ritz value.
    pub ritz: f64,
    /// `beta_k |s_k|`: some eigenvalue lies within this distance of `ritz`.
    pub residual: f64,
    pub steps: usize,
}

impl SpectralEstimate {
    /// `ritz - residual`, a lower bound for the eigenvalue the Ritz value
    /// approximates.
    pub fn lower_bound(&self) -> f64 {
        self.ritz - self.residual
    }
}

/// Number of eigenvalues of the tridiagonal `(alpha, beta)` below `x`.
fn sturm_count(alpha: &[f64], beta: &[f64], x: f64) -> usize {
    let mut count = 0;
    let mut d = 1.0;
    for i in 0..alpha.len() {
        let b2 = if i == 0 { 0.0 } else { beta[i - 1] * beta[i - 1] };
        d = alpha[i] - x - if i == 0 { 0.0 } else { b2 / d };
        if d == 0.0 {
            d = -f64::EPSILON * (alpha[i].abs() + x.abs() + 1.0);
        }
        if d < 0.0 {
            count += 1;
        }
    }
    count
}

fn smallest_tridiagonal_eigenvalue(alpha: &[f64], beta: &[f64]) -> f64 {
    let k = alpha.len();
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for i in 0..k {
        let r = if i > 0 { beta[i - 1].abs() } else { 0.0 } + if i + 1 < k { beta[i].abs() } else { 0.0 };
        lo = lo.min(alpha[i] - r);
        hi = hi.max(alpha[i] + r);
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if sturm_count(alpha, beta, mid) >= 1 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Solves `(T - sigma) z = r` for tridiagonal `T`, assuming `T - sigma` is
/// positive definite so no pivoting is needed.
fn thomas(alpha: &[f64], beta: &[f64], sigma: f64, r: &[f64]) -> Vec<f64> {
    let k = alpha.len();
    let mut c = vec![0.0; k];
    let mut d = vec![0.0; k];
    let mut denom = alpha[0] - sigma;
    c[0] = if k > 1 { beta[0] / denom } else { 0.0 };
    d[0] = r[0] / denom;
    for i in 1..k {
        denom = alpha[i] - sigma - beta[i - 1] * c[i - 1];
        if i + 1 < k {
            c[i] = beta[i] / denom;
        }
        d[i] = (r[i] - beta[i - 1] * d[i - 1]) / denom;
    }
    for i in (0..k - 1).rev() {
        d[i] -= c[i] * d[i + 1];
    }
    d
}

/// Last component of the normalized eigenvector of `theta`.
fn last_component(alpha: &[f64], beta: &[f64], theta: f64) -> f64 {
    let k = alpha.len();
    let scale = alpha.iter().map(|a| a.abs()).fold(1e-300, f64::max);
    let sigma = theta - 1e-10 * scale;
    let mut z = vec![1.0; k];
    for _ in 0..4 {
        z = thomas(alpha, beta, sigma, &z);
        let norm = z.iter().map(|v| v * v).sum::<f64>().sqrt();
        if !(norm > 0.0) || !norm.is_finite() {
            return 1.0;
        }
        z.iter_mut().for_each(|v| *v /= norm);
    }
    z[k - 1].abs()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Runs up to `max_steps` Lanczos steps (fewer if `n * steps` would exceed
/// `memory_cap` stored entries) from the start vector `sqrt(m)`, stopping
/// once the residual drops below `rel_target * ritz`.
pub fn smallest_eigenvalue<V: Clone + Eq + std::hash::Hash + Ord>(
    op: &RestrictedOperator<V>,
    max_steps: usize,
    memory_cap: usize,
    rel_target: f64,
) -> SpectralEstimate {
    let n = op.len();
    let steps_cap = max_steps.min(n).min((memory_cap / n.max(1)).max(2));
    let sqrt_m: Vec<f64> = op.measure().iter().map(|m| m.sqrt()).collect();
    let apply_b = |v: &[f64]| -> Vec<f64> {
        let u: Vec<f64> = v.iter().zip(&sqrt_m).map(|(a, s)| a / s).collect();
        op.apply(&u).iter().zip(&sqrt_m).map(|(a, s)| a * s).collect()
    };

    let norm0 = dot(&sqrt_m, &sqrt_m).sqrt();
    let mut basis: Vec<Vec<f64>> = vec![sqrt_m.iter().map(|v| v / norm0).collect()];
    let mut alpha = Vec::new();
    let mut beta: Vec<f64> = Vec::new();
    let mut estimate = SpectralEstimate { ritz: f64::NAN, residual: f64::INFINITY, steps: 0 };
    for k in 0..steps_cap {
        let q = &basis[k];
        let mut w = apply_b(q);
        let a = dot(&w, q);
        alpha.push(a);
        // two passes of classical Gram-Schmidt against the whole basis
        for _ in 0..2 {
            for b in &basis {
                let c = dot(&w, b);
                w.iter_mut().zip(b).for_each(|(x, y)| *x -= c * y);
            }
        }
        let bnorm = dot(&w, &w).sqrt();
        let scale = alpha.iter().map(|a| a.abs()).fold(0.0, f64::max).max(1e-300);
        let exhausted = bnorm <= 1e-12 * scale || k + 1 == steps_cap;
        if exhausted || (k + 1) % 5 == 0 {
            let theta = smallest_tridiagonal_eigenvalue(&alpha, &beta);
            let s = last_component(&alpha, &beta, theta);
            let residual = if bnorm <= 1e-12 * scale { 0.0 } else { bnorm * s };
            estimate = SpectralEstimate { ritz: theta, residual, steps: k + 1 };
            if exhausted || residual <= rel_target * theta.abs() {
                break;
            }
        }
        beta.push(bnorm);
        basis.push(w.iter().map(|v| v / bnorm).collect());
    }
    estimate
}
