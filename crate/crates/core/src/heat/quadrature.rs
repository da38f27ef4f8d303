use std::num::NonZeroUsize;

use gauss_quad::GaussLegendre;
use serde::{Deserialize, Serialize};

use super::lanczos::{smallest_eigenvalue, SpectralEstimate};
use super::uniformization::{apply_m, poisson_weights, uniformization_rate};
use crate::error::{Error, Result};
use crate::exhaustion::{Resolvent, RestrictedOperator, SolverConfig};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct QuadratureConfig {
    /// Target for the tail bound, relative to `1 + |value|`.
    pub tol: f64,
    /// Panel length in units of `1 / gamma`.
    pub panel_rate: f64,
    /// Gauss-Legendre nodes per panel.
    pub nodes: usize,
    /// Largest `gamma T` before giving up on time stepping.
    pub time_cap: f64,
    pub lanczos_steps: usize,
    /// Cap on `n * steps` stored Lanczos entries.
    pub lanczos_memory: usize,
    /// The gap estimate is trusted only when its residual is at most this
    /// fraction of the Ritz value.
    pub gap_quality: f64,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        QuadratureConfig {
            tol: 1e-9,
            panel_rate: 32.0,
            nodes: 40,
            time_cap: 1e6,
            lanczos_steps: 300,
            lanczos_memory: 1 << 25,
            gap_quality: 0.05,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QuadratureMethod {
    Quadrature,
    /// The gap estimate was unreliable or the horizon exceeded the time
    /// cap; the value is `(L_K)^{-1} delta_x (y)`.
    ResolventFallback,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuadratureResult {
    pub value: f64,
    pub method: QuadratureMethod,
    /// Integration horizon `T`.
    pub horizon: f64,
    pub gap: Option<SpectralEstimate>,
    /// Bound on the neglected `int_T^inf`.
    pub tail_bound: f64,
    pub panels: usize,
}

/// `int_0^inf exp(-t L_K) delta_x (y) dt` by Gauss-Legendre panels.
///
/// Each panel `[a, a + h]` with `gamma h = panel_rate` shares one Krylov
/// sequence `M^k v_a`: the integral is `sum_k c_k (M^k v_a)(y)` with
/// `c_k = sum_j w_j Poisson(gamma tau_j)_k`, and the next start vector is
/// `sum_k Poisson(gamma h)_k M^k v_a`. Integration stops once
/// `|v_T|_m / (lambda sqrt(m(y)))` is below the tolerance, where `lambda`
/// is a lower estimate of the bottom of the spectrum.
pub fn heat_green_quadrature<V: Clone + Eq + std::hash::Hash + Ord>(
    op: &RestrictedOperator<V>,
    x: usize,
    y: usize,
    qcfg: &QuadratureConfig,
    cfg: &SolverConfig,
) -> Result<QuadratureResult> {
    if x >= op.len() || y >= op.len() {
        return Err(Error::UnknownVertex(format!("window index {}", x.max(y))));
    }
    op.system(0.0, None).check_definite()?;
    let fallback = |gap: Option<SpectralEstimate>| -> Result<QuadratureResult> {
        let value = Resolvent::new(op, 0.0, None, *cfg)?.solve_delta(x)?[y];
        Ok(QuadratureResult {
            value,
            method: QuadratureMethod::ResolventFallback,
            horizon: f64::INFINITY,
            gap,
            tail_bound: 0.0,
            panels: 0,
        })
    };

    let est = smallest_eigenvalue(op, qcfg.lanczos_steps, qcfg.lanczos_memory, 1e-6);
    let lambda = est.lower_bound();
    if !(est.residual <= qcfg.gap_quality * est.ritz) || !(lambda > 0.0) {
        return fallback(Some(est));
    }

    let gamma = uniformization_rate(op);
    let h = qcfg.panel_rate / gamma;
    let nodes = NonZeroUsize::new(qcfg.nodes.max(1)).expect("nonzero");
    let rule = GaussLegendre::new(nodes);
    let step = poisson_weights(qcfg.panel_rate, 1e-17);
    let kmax = step.len();
    let mut coeff = vec![0.0; kmax];
    for &(node, weight) in rule.as_node_weight_pairs() {
        let tau = 0.5 * h * (node + 1.0);
        let p = poisson_weights(gamma * tau, 1e-17);
        for (k, c) in coeff.iter_mut().enumerate() {
            *c += 0.5 * h * weight * p.get(k).copied().unwrap_or(0.0);
        }
    }

    let n = op.len();
    let sqrt_my = op.measure()[y].sqrt();
    let mut v = op.delta(x);
    let mut power = vec![0.0; n];
    let mut next = vec![0.0; n];
    let mut scratch = vec![0.0; n];
    let mut value = 0.0_f64;
    let mut panels = 0;
    loop {
        let tail_bound = op.norm(&v) / (lambda * sqrt_my);
        if tail_bound <= qcfg.tol * (1.0 + value.abs()) {
            return Ok(QuadratureResult {
                value,
                method: QuadratureMethod::Quadrature,
                horizon: panels as f64 * h,
                gap: Some(est),
                tail_bound,
                panels,
            });
        }
        if gamma * h * (panels + 1) as f64 > qcfg.time_cap {
            return fallback(Some(est));
        }
        power.copy_from_slice(&v);
        next.iter_mut().for_each(|e| *e = 0.0);
        for k in 0..kmax {
            value += coeff[k] * power[y];
            let p = step[k];
            next.iter_mut().zip(&power).for_each(|(a, b)| *a += p * b);
            if k + 1 < kmax {
                apply_m(op, gamma, &power, &mut scratch);
                std::mem::swap(&mut power, &mut scratch);
            }
        }
        std::mem::swap(&mut v, &mut next);
        panels += 1;
    }
}
