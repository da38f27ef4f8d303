use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::cg::conjugate_gradient;
use super::ldl::Ldl;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Direct,
    ConjugateGradient,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverConfig {
    /// Windows up to this many vertices are factored directly.
    pub direct_threshold: usize,
    /// Relative residual target, measured in the weighted norm of the caller.
    pub tol: f64,
    /// CG iteration cap is `max_iter_factor * sqrt(n)`.
    pub max_iter_factor: f64,
    pub refine_steps: usize,
    /// Direct factorizations give up (and defer to CG) once the factor holds
    /// more than `fill_factor * n` entries.
    pub fill_factor: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig { direct_threshold: 20_000, tol: 1e-10, max_iter_factor: 50.0, refine_steps: 2, fill_factor: 40 }
    }
}

/// Symmetric, weakly diagonally dominant matrix `diag - B` with `B >= 0`.
///
/// `excess[i] = diag[i] - sum_j B[i][j]` is carried separately (not recomputed)
/// so definiteness can be decided without cancellation.
#[derive(Debug, Clone)]
pub struct SymmetricSystem {
    diag: Vec<f64>,
    off: Vec<Vec<(usize, f64)>>,
    excess: Vec<f64>,
}

impl SymmetricSystem {
    pub fn new(diag: Vec<f64>, off: Vec<Vec<(usize, f64)>>, excess: Vec<f64>) -> Self {
        SymmetricSystem { diag, off, excess }
    }

    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }

    pub fn diag(&self) -> &[f64] {
        &self.diag
    }

    pub fn off(&self) -> &[Vec<(usize, f64)>] {
        &self.off
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.len()];
        self.apply_into(x, &mut y);
        y
    }

    pub(crate) fn apply_into(&self, x: &[f64], y: &mut [f64]) {
        for (i, yi) in y.iter_mut().enumerate() {
            let off: f64 = self.off[i].iter().map(|&(j, w)| w * x[j]).sum();
            *yi = self.diag[i] * x[i] - off;
        }
    }

    /// Componentwise backward error `max_i |r_i| / (|A||x| + |b|)_i` of `x`
    /// as a solution of `A x = b`, given the residual `r = b - A x`.
    pub fn backward_error(&self, x: &[f64], rhs: &[f64], r: &[f64]) -> f64 {
        (0..self.len())
            .map(|i| {
                let scale = self.diag[i].abs() * x[i].abs()
                    + self.off[i].iter().map(|&(j, w)| w.abs() * x[j].abs()).sum::<f64>()
                    + rhs[i].abs();
                if scale > 0.0 {
                    r[i].abs() / scale
                } else {
                    0.0
                }
            })
            .fold(0.0, f64::max)
    }

    /// Connected components as a label per row, plus the count.
    pub fn components(&self) -> (Vec<usize>, usize) {
        let n = self.len();
        let mut label = vec![usize::MAX; n];
        let mut count = 0;
        let mut stack = Vec::new();
        for s in 0..n {
            if label[s] != usize::MAX {
                continue;
            }
            label[s] = count;
            stack.push(s);
            while let Some(i) = stack.pop() {
                for &(j, _) in &self.off[i] {
                    if label[j] == usize::MAX {
                        label[j] = count;
                        stack.push(j);
                    }
                }
            }
            count += 1;
        }
        (label, count)
    }

    /// `edges - vertices + components`; zero for forests.
    pub fn cycle_rank(&self) -> usize {
        let edges = self.off.iter().map(Vec::len).sum::<usize>() / 2;
        let (_, c) = self.components();
        edges + c - self.len()
    }

    /// Every connected component must carry some absorption, otherwise the
    /// matrix annihilates the component's indicator.
    pub fn check_definite(&self) -> Result<()> {
        let (label, count) = self.components();
        let mut absorbing = vec![false; count];
        for (i, &e) in self.excess.iter().enumerate() {
            if e > 0.0 {
                absorbing[label[i]] = true;
            }
        }
        if absorbing.iter().all(|&a| a) {
            Ok(())
        } else {
            Err(Error::SingularSystem)
        }
    }

    pub fn choose_method(&self, cfg: &SolverConfig) -> Method {
        if self.len() <= cfg.direct_threshold || self.cycle_rank() == 0 {
            Method::Direct
        } else {
            Method::ConjugateGradient
        }
    }
}

/// A definite system prepared for repeated solves.
#[derive(Debug)]
pub struct PreparedSystem {
    system: SymmetricSystem,
    method: Method,
    factor: Option<Ldl>,
    cfg: SolverConfig,
}

/// About `1e4` unit roundoffs.
const BACKWARD_ERROR_LIMIT: f64 = 1e-12;

fn weighted_norm(r: &[f64], weights: Option<&[f64]>) -> f64 {
    match weights {
        Some(w) => r.iter().zip(w).map(|(a, w)| a * a * w).sum::<f64>().sqrt(),
        None => r.iter().map(|a| a * a).sum::<f64>().sqrt(),
    }
}

impl PreparedSystem {
    pub fn new(system: SymmetricSystem, cfg: SolverConfig) -> Result<Self> {
        system.check_definite()?;
        let factor = match system.choose_method(&cfg) {
            Method::Direct => {
                let budget = cfg.fill_factor.saturating_mul(system.len()).max(1000);
                let forest = system.cycle_rank() == 0;
                Ldl::factor(&system.diag, &system.off, if forest { usize::MAX } else { budget })?
            }
            Method::ConjugateGradient => None,
        };
        let method = if factor.is_some() { Method::Direct } else { Method::ConjugateGradient };
        Ok(PreparedSystem { system, method, factor, cfg })
    }

    pub fn method(&self) -> Method {
        self.method
    }

    /// Solves `A x = rhs` to relative residual `cfg.tol`, with the residual
    /// measured as `sqrt(sum r_i^2 w_i)` (Euclidean when `weights` is `None`).
    pub fn solve(&self, rhs: &[f64], weights: Option<&[f64]>) -> Result<Vec<f64>> {
        let scale = weighted_norm(rhs, weights);
        if scale == 0.0 {
            return Ok(vec![0.0; rhs.len()]);
        }
        match &self.factor {
            Some(ldl) => {
                let mut x = ldl.solve(rhs);
                let mut r = vec![0.0; rhs.len()];
                let mut residual = f64::INFINITY;
                for step in 0..=self.cfg.refine_steps {
                    self.system.apply_into(&x, &mut r);
                    r.iter_mut().zip(rhs).for_each(|(ri, bi)| *ri = bi - *ri);
                    residual = weighted_norm(&r, weights) / scale;
                    if residual <= self.cfg.tol || step == self.cfg.refine_steps {
                        break;
                    }
                    let dx = ldl.solve(&r);
                    x.iter_mut().zip(&dx).for_each(|(a, d)| *a += d);
                }
                // badly scaled rows keep the residual above the target even
                // for a backward-stable solve; only a large backward error
                // indicates breakdown
                if residual > self.cfg.tol.max(1e-6) && self.system.backward_error(&x, rhs, &r) > BACKWARD_ERROR_LIMIT {
                    return Err(Error::NonConvergence { iterations: self.cfg.refine_steps, residual });
                }
                Ok(x)
            }
            None => {
                let n = self.system.len();
                let cap = (self.cfg.max_iter_factor * (n as f64).sqrt()).ceil() as usize;
                conjugate_gradient(&self.system, rhs, weights, self.cfg.tol, cap.max(10))
            }
        }
    }
}
