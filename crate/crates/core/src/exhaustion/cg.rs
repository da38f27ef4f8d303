use crate::error::{Error, Result};

use super::linear::SymmetricSystem;

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn weighted_norm(r: &[f64], weights: Option<&[f64]>) -> f64 {
    match weights {
        Some(w) => r.iter().zip(w).map(|(a, w)| a * a * w).sum::<f64>().sqrt(),
        None => dot(r, r).sqrt(),
    }
}

/// Jacobi-preconditioned conjugate gradients from a zero start.
///
/// Stops when `||r||_w <= tol ||b||_w`. Sums are sequential so results do
/// not depend on the thread pool.
pub(crate) fn conjugate_gradient(
    a: &SymmetricSystem,
    b: &[f64],
    weights: Option<&[f64]>,
    tol: f64,
    max_iter: usize,
) -> Result<Vec<f64>> {
    let n = a.len();
    let inv_diag: Vec<f64> = a.diag().iter().map(|d| 1.0 / d).collect();
    let target = tol * weighted_norm(b, weights);
    let mut x = vec![0.0; n];
    let mut r = b.to_vec();
    if target == 0.0 {
        return Ok(x);
    }
    let mut z: Vec<f64> = r.iter().zip(&inv_diag).map(|(r, d)| r * d).collect();
    let mut p = z.clone();
    let mut ap = vec![0.0; n];
    let mut rz = dot(&r, &z);
    let mut residual = f64::INFINITY;
    for it in 0..max_iter {
        a.apply_into(&p, &mut ap);
        let pap = dot(&p, &ap);
        if !(pap > 0.0) {
            return Err(Error::SingularSystem);
        }
        let step = rz / pap;
        for i in 0..n {
            x[i] += step * p[i];
            r[i] -= step * ap[i];
        }
        residual = weighted_norm(&r, weights);
        if residual <= target {
            return Ok(x);
        }
        // refresh the recursive residual now and then to limit drift
        if (it + 1) % 500 == 0 {
            a.apply_into(&x, &mut ap);
            for i in 0..n {
                r[i] = b[i] - ap[i];
            }
        }
        for i in 0..n {
            z[i] = r[i] * inv_diag[i];
        }
        let rz_next = dot(&r, &z);
        let beta = rz_next / rz;
        rz = rz_next;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }
    Err(Error::NonConvergence { iterations: max_iter, residual: residual / (target / tol) })
}
