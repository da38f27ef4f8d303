use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exhaustion::{
    monotone_limit_with_slack, restrict, Direction, Exhaustion, LimitReport, Resolvent, SolverConfig,
};
use crate::forms::laplacian_at;
use crate::graph::{Field, Graph, Window};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CompletenessConfig {
    /// `1 - w` below this (with saturating increments) means complete.
    pub ceiling: f64,
    /// A converged `w` at most `1 - floor` means incomplete.
    pub floor: f64,
    /// Cauchy tolerance over the trailing three windows.
    pub cauchy_tol: f64,
    pub solver: SolverConfig,
}

impl Default for CompletenessConfig {
    fn default() -> Self {
        CompletenessConfig { ceiling: 1e-4, floor: 1e-2, cauchy_tol: 1e-5, solver: SolverConfig::default() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CompletenessVerdict {
    Complete,
    Incomplete,
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbeMass {
    pub vertex: String,
    /// `w_n(x) = ((L_{K_n} + 1)^{-1} 1)(x)` per window.
    pub mass: LimitReport,
    pub verdict: CompletenessVerdict,
    /// `1 - w` at the last window.
    pub defect: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HeatMassReport {
    pub probes: Vec<ProbeMass>,
    pub verdict: CompletenessVerdict,
    /// Largest `w_n(x)` over all windows and window vertices.
    pub max_mass: f64,
    /// Smallest `w_n(x)`.
    pub min_mass: f64,
    pub config: CompletenessConfig,
}

fn probe_verdict(mass: &LimitReport, cfg: &CompletenessConfig) -> CompletenessVerdict {
    let v = &mass.values;
    let last = mass.last();
    let n = v.len();
    let saturating = n < 3 || {
        let d2 = v[n - 1] - v[n - 2];
        let d1 = v[n - 2] - v[n - 3];
        d2 <= d1 || d2 <= cfg.ceiling
    };
    if 1.0 - last < cfg.ceiling && saturating {
        CompletenessVerdict::Complete
    } else if mass.converged().is_some() && last <= 1.0 - cfg.floor {
        CompletenessVerdict::Incomplete
    } else {
        CompletenessVerdict::Inconclusive
    }
}

/// Heat mass `w_n = (L_{K_n} + 1)^{-1} 1_{K_n}` at the probe vertices.
pub fn completeness_probe<G: Graph>(
    g: &G,
    exhaustion: &Exhaustion<G::Vertex>,
    probes: &[G::Vertex],
    cfg: &CompletenessConfig,
) -> Result<HeatMassReport> {
    if probes.is_empty() {
        return Err(Error::InvalidConfig("at least one probe vertex is required".into()));
    }
    let first = exhaustion.window(0);
    for p in probes {
        g.check(p)?;
        if !first.contains(p) {
            return Err(Error::UnknownVertex(format!("probe {} is outside the first window", g.encode(p))));
        }
    }
    let per_window: Vec<(Vec<f64>, f64, f64)> = (0..exhaustion.len())
        .into_par_iter()
        .map(|n| {
            let op = restrict(g, &exhaustion.window(n))?;
            let w = Resolvent::new(&op, 1.0, None, cfg.solver)?.solve(&vec![1.0; op.len()])?;
            let at = probes
                .iter()
                .map(|p| w[op.window().index_of(p).expect("windows are nested")])
                .collect::<Vec<f64>>();
            let hi = w.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let lo = w.iter().copied().fold(f64::INFINITY, f64::min);
            Ok((at, hi, lo))
        })
        .collect::<Result<_>>()?;

    let max_mass = per_window.iter().map(|w| w.1).fold(f64::NEG_INFINITY, f64::max);
    let min_mass = per_window.iter().map(|w| w.2).fold(f64::INFINITY, f64::min);
    let mut reports = Vec::with_capacity(probes.len());
    for (k, p) in probes.iter().enumerate() {
        let seq: Vec<f64> = per_window.iter().map(|w| w.0[k]).collect();
        let mass = monotone_limit_with_slack(&seq, Direction::Increasing, cfg.cauchy_tol, f64::INFINITY, 1e-10)?
            .with_windows(exhaustion.radii());
        let verdict = probe_verdict(&mass, cfg);
        let defect = 1.0 - mass.last();
        reports.push(ProbeMass { vertex: g.encode(p), mass, verdict, defect });
    }
    let verdict = if reports.iter().any(|r| r.verdict == CompletenessVerdict::Incomplete) {
        CompletenessVerdict::Incomplete
    } else if reports.iter().all(|r| r.verdict == CompletenessVerdict::Complete) {
        CompletenessVerdict::Complete
    } else {
        CompletenessVerdict::Inconclusive
    };
    Ok(HeatMassReport { probes: reports, verdict, max_mass, min_mass, config: *cfg })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntegralDefect {
    /// `sum_{x in int K} (L u)(x) m(x)`.
    pub interior_sum: f64,
    /// `sum_{x in bd K} (d_K u)(x)`.
    pub boundary_flux: f64,
    /// `sum_{x in int K} c(x) u(x)`.
    pub killing: f64,
    /// `interior_sum - killing + boundary_flux`; zero up to rounding.
    pub telescoping_residual: f64,
}

/// Discrete divergence theorem on a window: edge terms inside the interior
/// cancel, and what is left is the flux through the boundary.
pub fn integral_defect<G: Graph, U: Field<G::Vertex>>(g: &G, u: &U, window: &Window<G::Vertex>) -> IntegralDefect {
    let mut interior_sum = 0.0;
    let mut boundary_flux = 0.0;
    let mut killing = 0.0;
    for x in window.iter() {
        let nb = g.neighbors(x);
        if nb.iter().all(|(y, _)| window.contains(y)) {
            interior_sum += laplacian_at(g, u, x) * g.measure(x);
            killing += g.potential(x) * u.at(x);
        } else {
            let ux = u.at(x);
            boundary_flux += nb.iter().filter(|(y, _)| window.contains(y)).map(|(y, w)| w * (ux - u.at(y))).sum::<f64>();
        }
    }
    IntegralDefect { interior_sum, boundary_flux, killing, telescoping_residual: interior_sum - killing + boundary_flux }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exhaustion::exhaust;
    use crate::graph::{build_finite, BirthDeath, GraphFunction, Lattice, LatticePoint};
    use crate::potential::monopole_solve;
    use approx::assert_abs_diff_eq;

    #[test]
    fn finite_graph_mass_is_one() {
        let g = build_finite(&[(0, 1, 1.0), (1, 2, 2.0), (2, 0, 1.0), (2, 3, 0.5)], &[], &[(1, 3.0)]).unwrap();
        let ex = exhaust(&g, 0, &[2, 3]).unwrap();
        let r = completeness_probe(&g, &ex, &[0, 3], &CompletenessConfig::default()).unwrap();
        assert_abs_diff_eq!(r.min_mass, 1.0, epsilon = 1e-13);
        assert_abs_diff_eq!(r.max_mass, 1.0, epsilon = 1e-13);
        assert_eq!(r.verdict, CompletenessVerdict::Complete);

        let early = exhaust(&g, 0, &[1, 2]).unwrap();
        let err = completeness_probe(&g, &early, &[3], &CompletenessConfig::default());
        assert!(matches!(err, Err(Error::UnknownVertex(_))));
    }

    #[test]
    fn half_line_is_complete() {
        let g = BirthDeath::new(0.0).unwrap();
        let ex = exhaust(&g, 0, &[10, 20, 40, 80]).unwrap();
        let r = completeness_probe(&g, &ex, &[0], &CompletenessConfig::default()).unwrap();
        assert_eq!(r.verdict, CompletenessVerdict::Complete);
    }

    #[test]
    fn telescoping() {
        let z2 = Lattice::new(2).unwrap();
        let o = LatticePoint::origin(2);
        let ex = exhaust(&z2, o.clone(), &[5]).unwrap();
        let w = ex.window(0);
        let m = monopole_solve(&z2, &o, &ex, 1e-6, 1e6, &SolverConfig::default()).unwrap();
        let d = integral_defect(&z2, &m.solutions[0], &w);
        assert_abs_diff_eq!(d.interior_sum, 1.0, epsilon = 1e-9);
        assert_abs_diff_eq!(d.telescoping_residual, 0.0, epsilon = 1e-12);

        let ones = |_: &LatticePoint| 1.0;
        let d = integral_defect(&z2, &ones, &w);
        assert_eq!((d.interior_sum, d.boundary_flux), (0.0, 0.0));
        let _ = GraphFunction::<LatticePoint>::zero();
    }
}
