use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};
use crate::exhaustion::RestrictedOperator;

/// Largest diagonal entry of `L_K`, the uniformization rate.
pub fn uniformization_rate<V: Clone + Eq + std::hash::Hash + Ord>(op: &RestrictedOperator<V>) -> f64 {
    (0..op.len()).map(|i| op.diagonal(i)).fold(0.0, f64::max)
}

/// `out = M v` with `M = I - L_K / gamma`, entrywise nonnegative.
pub(crate) fn apply_m<V: Clone + Eq + std::hash::Hash + Ord>(
    op: &RestrictedOperator<V>,
    gamma: f64,
    v: &[f64],
    out: &mut [f64],
) {
    for (i, o) in out.iter_mut().enumerate() {
        let off: f64 = op.neighbors(i).iter().map(|&(j, w)| w * v[j]).sum();
        *o = (1.0 - op.diagonal(i) / gamma) * v[i] + off / (op.measure()[i] * gamma);
    }
}

/// Poisson(`lambda`) probabilities `p_0 ..= p_K`, with `K` chosen so that the
/// neglected upper tail is at most `tol`.
pub fn poisson_weights(lambda: f64, tol: f64) -> Vec<f64> {
    if lambda == 0.0 {
        return vec![1.0];
    }
    let mode = lambda.floor() as usize;
    let p_mode = (-lambda + mode as f64 * lambda.ln() - ln_gamma(mode as f64 + 1.0)).exp();
    let mut weights = vec![0.0; mode + 1];
    weights[mode] = p_mode;
    for k in (1..=mode).rev() {
        weights[k - 1] = weights[k] * k as f64 / lambda;
    }
    let mut k = mode;
    loop {
        let r = lambda / (k + 1) as f64;
        // the ratios p_{j+1}/p_j only shrink beyond k, so the tail is geometric-bounded
        if r < 1.0 && weights[k] * r / (1.0 - r) <= tol {
            break;
        }
        weights.push(weights[k] * r);
        k += 1;
    }
    weights
}

/// `exp(-t L_K) f` by uniformization: `sum_k Poisson(gamma t)_k M^k f`.
///
/// The neglected Poisson tail is at most `tol`, and `M` is substochastic, so
/// the sup-norm error is at most `tol * |f|_inf`.
pub fn semigroup_apply<V: Clone + Eq + std::hash::Hash + Ord>(
    op: &RestrictedOperator<V>,
    t: f64,
    f: &[f64],
    tol: f64,
    time_cap: f64,
) -> Result<Vec<f64>> {
    if !(t > 0.0) || !t.is_finite() {
        return Err(Error::InvalidConfig(format!("time must be positive, got {t}")));
    }
    let gamma = uniformization_rate(op);
    if gamma == 0.0 {
        return Ok(f.to_vec());
    }
    let rate = gamma * t;
    if rate > time_cap {
        return Err(Error::TimeOverflow(rate));
    }
    let weights = poisson_weights(rate, tol);
    let mut out = vec![0.0; f.len()];
    let mut v = f.to_vec();
    let mut next = vec![0.0; f.len()];
    for (k, &p) in weights.iter().enumerate() {
        if p > 0.0 {
            out.iter_mut().zip(&v).for_each(|(o, x)| *o += p * x);
        }
        if k + 1 < weights.len() {
            apply_m(op, gamma, &v, &mut next);
            std::mem::swap(&mut v, &mut next);
        }
    }
    Ok(out)
}
