//! Capacity of a point, Green function, monopoles and the
//! recurrence/transience classifier.
//!
//! Capacities are computed from `b` and `c` alone: the equilibrium potential
//! solves a symmetric system that never sees the measure, which is what makes
//! them bitwise invariant under a change of `m`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exhaustion::{
    monotone_limit_with_slack, restrict, Direction, Exhaustion, LimitReport, PreparedSystem, Resolvent,
    SolverConfig,
};
use crate::forms::laplacian_at;
use crate::graph::{key_unit_hash, Graph, GraphFunction, Remeasured, Window};

/// Relative slack when checking the monotonicity of computed sequences.
const MONOTONE_SLACK: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EquilibriumPotential<V: Ord> {
    pub potential: GraphFunction<V>,
    /// `Q(v)` evaluated directly.
    pub capacity: f64,
    /// `m(o) (L v)(o)`, the flux form of the same number.
    pub flux_capacity: f64,
    /// `max(0, -min v, max v - 1)`.
    pub max_principle_violation: f64,
}

/// Minimiser of `Q(v)` over `v` supported in `window` with `v(o) = 1`.
pub fn equilibrium_potential<G: Graph>(
    g: &G,
    window: &Window<G::Vertex>,
    o: &G::Vertex,
    cfg: &SolverConfig,
) -> Result<EquilibriumPotential<G::Vertex>> {
    g.check(o)?;
    if !window.contains(o) {
        return Err(Error::UnknownVertex(format!("{o:?} is not in the window")));
    }
    let rest = window.without(o);
    let values = if rest.is_empty() {
        Vec::new()
    } else {
        let op = restrict(g, &rest)?;
        let mut rhs = vec![0.0; op.len()];
        for (y, w) in g.neighbors(o) {
            if let Some(j) = rest.index_of(&y) {
                rhs[j] += w;
            }
        }
        // alpha = 0 contributes an exact +0.0, so no m enters the system
        let system = PreparedSystem::new(op.system(0.0, None), *cfg)?;
        system.solve(&rhs, None)?
    };

    let value = |x: &G::Vertex| -> f64 {
        if x == o {
            1.0
        } else {
            rest.index_of(x).map_or(0.0, |j| values[j])
        }
    };
    let mut capacity = 0.0;
    for x in window.iter() {
        let vx = value(x);
        for (y, w) in g.neighbors(x) {
            if window.contains(&y) {
                if x < &y {
                    let d = vx - value(&y);
                    capacity += w * d * d;
                }
            } else {
                capacity += w * vx * vx;
            }
        }
        capacity += g.potential(x) * vx * vx;
    }
    let flux_capacity = laplacian_at(g, &value, o) * g.measure(o);
    let mut violation: f64 = 0.0;
    for &v in &values {
        violation = violation.max(-v).max(v - 1.0);
    }
    let mut potential: GraphFunction<G::Vertex> = rest.iter().cloned().zip(values.iter().copied()).collect();
    potential.set(o.clone(), 1.0);
    Ok(EquilibriumPotential { potential, capacity, flux_capacity, max_principle_violation: violation })
}

fn capacities<G: Graph>(
    g: &G,
    o: &G::Vertex,
    exhaustion: &Exhaustion<G::Vertex>,
    cfg: &SolverConfig,
) -> Result<Vec<(f64, f64)>> {
    (0..exhaustion.len())
        .into_par_iter()
        .map(|n| {
            let e = equilibrium_potential(g, &exhaustion.window(n), o, cfg)?;
            Ok((e.capacity, e.flux_capacity))
        })
        .collect()
}

/// `cap_{K_n}(o)` along the exhaustion; nonincreasing. `threshold` is the
/// level below which a sustained decrease counts as collapse to zero.
pub fn capacity_sequence<G: Graph>(
    g: &G,
    o: &G::Vertex,
    exhaustion: &Exhaustion<G::Vertex>,
    tol: f64,
    threshold: f64,
    cfg: &SolverConfig,
) -> Result<LimitReport> {
    let caps: Vec<f64> = capacities(g, o, exhaustion, cfg)?.into_iter().map(|c| c.0).collect();
    Ok(monotone_limit_with_slack(&caps, Direction::Decreasing, tol, threshold, MONOTONE_SLACK)?
        .with_windows(exhaustion.radii()))
}

fn green_values<G: Graph>(
    g: &G,
    x: &G::Vertex,
    y: &G::Vertex,
    exhaustion: &Exhaustion<G::Vertex>,
    cfg: &SolverConfig,
) -> Result<Vec<f64>> {
    (0..exhaustion.len())
        .into_par_iter()
        .map(|n| {
            let op = restrict(g, &exhaustion.window(n))?;
            let (Some(i), Some(j)) = (op.window().index_of(x), op.window().index_of(y)) else {
                return Err(Error::UnknownVertex(format!("{x:?} / {y:?} outside window {n}")));
            };
            Ok(Resolvent::new(&op, 0.0, None, *cfg)?.solve_delta(i)?[j])
        })
        .collect()
}

/// `G_n(x, y) = (L_{K_n})^{-1} delta_x (y)` along the exhaustion;
/// nondecreasing.
pub fn green_estimate<G: Graph>(
    g: &G,
    x: &G::Vertex,
    y: &G::Vertex,
    exhaustion: &Exhaustion<G::Vertex>,
    tol: f64,
    threshold: f64,
    cfg: &SolverConfig,
) -> Result<LimitReport> {
    g.check(x)?;
    g.check(y)?;
    let values = green_values(g, x, y, exhaustion, cfg)?;
    Ok(monotone_limit_with_slack(&values, Direction::Increasing, tol, threshold, MONOTONE_SLACK)?
        .with_windows(exhaustion.radii()))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonopoleReport<V: Ord> {
    /// `u_n = (L_{K_n})^{-1} delta_w`.
    pub solutions: Vec<GraphFunction<V>>,
    /// `Q(u_n)` of the zero extension.
    pub energy: LimitReport,
    /// `G_n(w, w) m(w)`.
    pub green_times_measure: Vec<f64>,
    /// `max_{x in int K_n} |(L u_n)(x) - delta_w(x)|`.
    pub interior_residual: Vec<f64>,
}

pub fn monopole_solve<G: Graph>(
    g: &G,
    w: &G::Vertex,
    exhaustion: &Exhaustion<G::Vertex>,
    tol: f64,
    threshold: f64,
    cfg: &SolverConfig,
) -> Result<MonopoleReport<G::Vertex>> {
    g.check(w)?;
    let per_window: Vec<(GraphFunction<G::Vertex>, f64, f64, f64)> = (0..exhaustion.len())
        .into_par_iter()
        .map(|n| {
            let op = restrict(g, &exhaustion.window(n))?;
            let i = op
                .window()
                .index_of(w)
                .ok_or_else(|| Error::UnknownVertex(format!("{w:?} outside window {n}")))?;
            let u = Resolvent::new(&op, 0.0, None, *cfg)?.solve_delta(i)?;
            let energy = op.extension_energy(&u);
            let lu = op.apply(&u);
            let residual = op
                .interior()
                .into_iter()
                .map(|k| (lu[k] - if k == i { 1.0 } else { 0.0 }).abs())
                .fold(0.0, f64::max);
            Ok((op.function(&u), energy, u[i] * op.measure()[i], residual))
        })
        .collect::<Result<_>>()?;
    let mut solutions = Vec::with_capacity(per_window.len());
    let mut energies = Vec::with_capacity(per_window.len());
    let mut green_times_measure = Vec::with_capacity(per_window.len());
    let mut interior_residual = Vec::with_capacity(per_window.len());
    for (u, e, gm, r) in per_window {
        solutions.push(u);
        energies.push(e);
        green_times_measure.push(gm);
        interior_residual.push(r);
    }
    let energy = monotone_limit_with_slack(&energies, Direction::Increasing, tol, threshold, MONOTONE_SLACK)?
        .with_windows(exhaustion.radii());
    Ok(MonopoleReport { solutions, energy, green_times_measure, interior_residual })
}

/// Interior vertices of `window` where `(L u)(x) < -1e-12`, with the value.
pub fn superharmonic_residuals<G: Graph>(
    g: &G,
    u: &GraphFunction<G::Vertex>,
    window: &Window<G::Vertex>,
) -> Vec<(G::Vertex, f64)> {
    window
        .iter()
        .filter(|x| g.neighbors(x).iter().all(|(y, _)| window.contains(y)))
        .filter_map(|x| {
            let r = laplacian_at(g, u, x);
            (r < -1e-12).then(|| (x.clone(), r))
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ClassifierConfig {
    /// Capacity below this, with a sustained decrease, means recurrent.
    pub recurrence_ceiling: f64,
    /// A converged capacity must exceed this for a transient verdict.
    pub transience_floor: f64,
    /// Cauchy tolerance over the trailing three windows.
    pub cauchy_tol: f64,
    /// Salt of the deterministic measure perturbation.
    pub perturbation_salt: u64,
    pub solver: SolverConfig,
}

impl Default for ClassifierConfig {
    fn default() -> Self {
        ClassifierConfig {
            recurrence_ceiling: 1e-3,
            transience_floor: 1e-2,
            cauchy_tol: 1e-4,
            perturbation_salt: 0x5eed,
            solver: SolverConfig::default(),
        }
    }
}

impl ClassifierConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.recurrence_ceiling > 0.0) || !(self.transience_floor > self.recurrence_ceiling) {
            return Err(Error::InvalidConfig(format!(
                "need 0 < recurrence ceiling ({}) < transience floor ({})",
                self.recurrence_ceiling, self.transience_floor
            )));
        }
        if !(self.cauchy_tol > 0.0) {
            return Err(Error::InvalidConfig("Cauchy tolerance must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TypeVerdict {
    Recurrent,
    Transient,
    Inconclusive,
}

/// Least-squares fits of `1/cap` against the radius.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GrowthFit {
    /// `1/cap = a + b ln r`.
    pub log_intercept: f64,
    pub log_slope: f64,
    pub log_residual: f64,
    /// `1/cap = a + b / r`; `a` estimates `1/cap_infinity`.
    pub inverse_intercept: f64,
    pub inverse_slope: f64,
    pub inverse_residual: f64,
    /// `1 / inverse_intercept` when that model is admissible.
    pub extrapolated_capacity: Option<f64>,
    pub preferred: TypeVerdict,
}

fn linear_fit(xs: &[f64], ys: &[f64]) -> (f64, f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    let intercept = my - slope * mx;
    let rss: f64 = xs.iter().zip(ys).map(|(x, y)| (y - intercept - slope * x).powi(2)).sum();
    (intercept, slope, (rss / n).sqrt())
}

/// Compares logarithmic growth of `1/cap` (recurrent shape) with saturation
/// like `a + b/r` (transient shape). The saturating model is only admissible
/// when it extrapolates above the last observed value. Needs 3 windows.
pub fn growth_fit(radii: &[usize], caps: &[f64], floor: f64) -> Option<GrowthFit> {
    if radii.len() < 3 || caps.iter().any(|c| !(*c > 0.0)) {
        return None;
    }
    let ys: Vec<f64> = caps.iter().map(|c| 1.0 / c).collect();
    let logs: Vec<f64> = radii.iter().map(|&r| (r as f64).ln()).collect();
    let invs: Vec<f64> = radii.iter().map(|&r| 1.0 / r as f64).collect();
    let (la, lb, lres) = linear_fit(&logs, &ys);
    let (ia, ib, ires) = linear_fit(&invs, &ys);
    let last = *ys.last().unwrap();
    let admissible = ib < 0.0 && ia >= last;
    let extrapolated_capacity = admissible.then(|| 1.0 / ia);
    let preferred = if admissible && ires <= lres {
        if extrapolated_capacity.unwrap() > floor {
            TypeVerdict::Transient
        } else {
            TypeVerdict::Inconclusive
        }
    } else if lb > 0.0 {
        TypeVerdict::Recurrent
    } else {
        TypeVerdict::Inconclusive
    };
    Some(GrowthFit {
        log_intercept: la,
        log_slope: lb,
        log_residual: lres,
        inverse_intercept: ia,
        inverse_slope: ib,
        inverse_residual: ires,
        extrapolated_capacity,
        preferred,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeasureCheck {
    /// Description of the perturbed measure.
    pub perturbation: String,
    pub bitwise_equal: bool,
    pub max_abs_difference: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassificationReport {
    pub verdict: TypeVerdict,
    /// Which rule produced the verdict.
    pub rule: String,
    pub capacity: LimitReport,
    pub green_diagonal: LimitReport,
    pub monopole_energy: LimitReport,
    pub fit: Option<GrowthFit>,
    /// Largest `|Q(v) - m(o)(Lv)(o)|` over the windows.
    pub flux_discrepancy: f64,
    pub measure_independence: MeasureCheck,
    pub config: ClassifierConfig,
}

pub fn classify<G: Graph>(
    g: &G,
    o: &G::Vertex,
    exhaustion: &Exhaustion<G::Vertex>,
    config: &ClassifierConfig,
) -> Result<ClassificationReport> {
    config.validate()?;
    g.check(o)?;
    let cfg = &config.solver;
    let largest = restrict(g, &exhaustion.largest())?.system(0.0, None);
    let (_, components) = largest.components();
    if components > 1 {
        return Err(Error::DisconnectedWindow { components });
    }

    let caps = capacities(g, o, exhaustion, cfg)?;
    let cap_values: Vec<f64> = caps.iter().map(|c| c.0).collect();
    let flux_discrepancy = caps.iter().map(|(q, f)| (q - f).abs()).fold(0.0, f64::max);
    let capacity = monotone_limit_with_slack(
        &cap_values,
        Direction::Decreasing,
        config.cauchy_tol,
        config.recurrence_ceiling,
        MONOTONE_SLACK,
    )?
    .with_windows(exhaustion.radii());

    let m_o = g.measure(o);
    let green_threshold = m_o / config.recurrence_ceiling;
    let monopoles = monopole_solve(g, o, exhaustion, config.cauchy_tol * m_o, green_threshold * m_o, cfg)?;
    let greens: Vec<f64> = monopoles.solutions.iter().map(|u| u.get(o)).collect();
    let green_diagonal = monotone_limit_with_slack(
        &greens,
        Direction::Increasing,
        config.cauchy_tol * greens.last().unwrap().max(1.0),
        green_threshold,
        MONOTONE_SLACK,
    )?
    .with_windows(exhaustion.radii());

    let perturbation = format!("m'(x) = m(x) (1 + 0.5 h(x)), h = unit hash of the vertex key, salt {}", config.perturbation_salt);
    let salt = config.perturbation_salt;
    let perturbed = Remeasured::new(g, move |x: &G::Vertex| 1.0 + 0.5 * key_unit_hash(&g.encode(x), salt));
    let perturbed_caps = capacities(&perturbed, o, exhaustion, cfg)?;
    let bitwise_equal = caps.iter().zip(&perturbed_caps).all(|(a, b)| a.0.to_bits() == b.0.to_bits());
    let max_abs_difference = caps.iter().zip(&perturbed_caps).map(|(a, b)| (a.0 - b.0).abs()).fold(0.0, f64::max);

    let fit = growth_fit(exhaustion.radii(), &cap_values, config.transience_floor);
    let (verdict, rule) = if capacity.converged().is_some_and(|c| c > config.transience_floor)
        && green_diagonal.converged().is_some()
    {
        (TypeVerdict::Transient, "capacity and Green diagonal converged")
    } else if (capacity.is_diverging() && capacity.last() < config.recurrence_ceiling)
        || green_diagonal.is_diverging()
    {
        (TypeVerdict::Recurrent, "capacity collapsed or Green diagonal diverged")
    } else {
        match fit {
            Some(f) if f.preferred == TypeVerdict::Recurrent => (TypeVerdict::Recurrent, "growth fit: logarithmic"),
            Some(f) if f.preferred == TypeVerdict::Transient => (TypeVerdict::Transient, "growth fit: saturating"),
            Some(_) => (TypeVerdict::Inconclusive, "growth fit undecided"),
            None => (TypeVerdict::Inconclusive, "too few windows for a growth fit"),
        }
    };

    Ok(ClassificationReport {
        verdict,
        rule: rule.to_string(),
        capacity,
        green_diagonal,
        monopole_energy: monopoles.energy,
        fit,
        flux_discrepancy,
        measure_independence: MeasureCheck { perturbation, bitwise_equal, max_abs_difference },
        config: *config,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exhaustion::{exhaust, Verdict};
    use crate::forms::apply_laplacian;
    use crate::graph::{build_finite, Lattice, LatticePoint, RegularTree};
    use approx::assert_abs_diff_eq;

    fn cfg() -> SolverConfig {
        SolverConfig::default()
    }

    #[test]
    fn z1_tent() {
        let z1 = Lattice::new(1).unwrap();
        let n = 7i64;
        let w = Window::new((-n..=n).map(|k| LatticePoint::new(&[k])));
        let e = equilibrium_potential(&z1, &w, &LatticePoint::origin(1), &cfg()).unwrap();
        assert_abs_diff_eq!(e.capacity, 2.0 / (n as f64 + 1.0), epsilon = 1e-13);
        assert_abs_diff_eq!(e.flux_capacity, e.capacity, epsilon = 1e-13);
        for k in -n..=n {
            let tent = 1.0 - k.abs() as f64 / (n as f64 + 1.0);
            assert_abs_diff_eq!(e.potential.get(&LatticePoint::new(&[k])), tent, epsilon = 1e-13);
        }
        assert_eq!(e.max_principle_violation, 0.0);
    }

    #[test]
    fn singleton_capacity_is_degree() {
        let z1 = Lattice::new(1).unwrap();
        let o = LatticePoint::origin(1);
        let e = equilibrium_potential(&z1, &Window::new([o.clone()]), &o, &cfg()).unwrap();
        assert_eq!(e.capacity, 2.0);
        assert_eq!(e.potential, GraphFunction::delta(o));
    }

    #[test]
    fn tree_capacities() {
        let t = RegularTree::new(2).unwrap();
        let radii: Vec<usize> = (1..=10).collect();
        let ex = exhaust(&t, 0, &radii).unwrap();
        let r = capacity_sequence(&t, &0, &ex, 1e-3, 1e-3, &cfg()).unwrap();
        for (k, c) in r.values.iter().enumerate() {
            let p = 2f64.powi(radii[k] as i32 + 1);
            assert_abs_diff_eq!(*c, p / (p - 1.0), epsilon = 1e-12);
        }
        assert!(r.converged().is_some());
    }

    #[test]
    fn potential_at_root_forces_transience() {
        let g = build_finite(&[(0, 1, 1.0), (1, 2, 1.0)], &[(0, 5.0)], &[]).unwrap();
        let ex = exhaust(&g, 0, &[2, 3, 4]).unwrap();
        let r = capacity_sequence(&g, &0, &ex, 1e-9, 1e-3, &cfg()).unwrap();
        assert!(r.values.iter().all(|&c| c == r.values[0]));
        assert!(r.converged().unwrap() > 0.0);
    }

    #[test]
    fn green_on_z1_and_tree() {
        let z1 = Lattice::new(1).unwrap();
        let o = LatticePoint::origin(1);
        let ex = exhaust(&z1, o.clone(), &[4, 8, 16, 32, 64]).unwrap();
        let r = green_estimate(&z1, &o, &o, &ex, 1e-6, 20.0, &cfg()).unwrap();
        for (k, v) in r.values.iter().enumerate() {
            assert_abs_diff_eq!(*v, (ex.radii()[k] as f64 + 1.0) / 2.0, epsilon = 1e-10);
        }
        assert_eq!(r.verdict, Verdict::Diverging);

        let t = RegularTree::new(2).unwrap();
        let ex = exhaust(&t, 0, &[2, 4, 8, 12]).unwrap();
        let r = green_estimate(&t, &0, &0, &ex, 1e-3, 1e3, &cfg()).unwrap();
        assert_abs_diff_eq!(r.last(), 1.0, epsilon = 1e-3);
    }

    #[test]
    fn green_symmetry_with_measure() {
        let g = build_finite(
            &[(0, 1, 1.0), (1, 2, 2.0), (2, 3, 1.0), (3, 0, 0.5)],
            &[(2, 0.3)],
            &[(0, 2.0), (1, 0.5), (3, 4.0)],
        )
        .unwrap();
        let ex = exhaust(&g, 0, &[2]).unwrap();
        let g01 = green_estimate(&g, &0, &1, &ex, 1e-9, 1e9, &cfg()).unwrap().last();
        let g10 = green_estimate(&g, &1, &0, &ex, 1e-9, 1e9, &cfg()).unwrap().last();
        assert_abs_diff_eq!(g01 * g.measure(&1), g10 * g.measure(&0), epsilon = 1e-12);
    }

    #[test]
    fn monopole_energy_identity() {
        let z2 = Lattice::new(2).unwrap();
        let o = LatticePoint::origin(2);
        let ex = exhaust(&z2, o.clone(), &[2, 4, 8]).unwrap();
        let m = monopole_solve(&z2, &o, &ex, 1e-6, 1e6, &cfg()).unwrap();
        for (e, gm) in m.energy.values.iter().zip(&m.green_times_measure) {
            assert_abs_diff_eq!(e, gm, epsilon = 1e-9);
        }
        assert!(m.interior_residual.iter().all(|r| *r < 1e-9));
        let w = ex.window(2);
        let u = &m.solutions[2];
        let viol = superharmonic_residuals(&z2, u, &w);
        assert!(viol.is_empty());
        assert!(apply_laplacian(&z2, u, &o).unwrap() > 0.0);
    }

    #[test]
    fn superharmonic_examples() {
        let z1 = Lattice::new(1).unwrap();
        let w = Window::new((-3..=3).map(|k| LatticePoint::new(&[k])));
        let ones: GraphFunction<LatticePoint> = w.iter().map(|x| (x.clone(), 1.0)).collect();
        assert!(superharmonic_residuals(&z1, &ones, &w).is_empty());
        let neg = GraphFunction::delta(LatticePoint::origin(1)).scaled(-1.0);
        assert_eq!(superharmonic_residuals(&z1, &neg, &w), vec![(LatticePoint::origin(1), -2.0)]);
    }

    #[test]
    fn classify_z1_and_tree() {
        let z1 = Lattice::new(1).unwrap();
        let o = LatticePoint::origin(1);
        let ex = exhaust(&z1, o.clone(), &[10, 20, 40, 80]).unwrap();
        let r = classify(&z1, &o, &ex, &ClassifierConfig::default()).unwrap();
        assert_eq!(r.verdict, TypeVerdict::Recurrent);
        assert!(r.measure_independence.bitwise_equal);

        let t = RegularTree::new(2).unwrap();
        let ex = exhaust(&t, 0, &[4, 8, 12, 14]).unwrap();
        let r = classify(&t, &0, &ex, &ClassifierConfig::default()).unwrap();
        assert_eq!(r.verdict, TypeVerdict::Transient);
        assert!(r.flux_discrepancy < 1e-8);
    }

    #[test]
    fn config_validation() {
        let bad = ClassifierConfig { recurrence_ceiling: 0.1, transience_floor: 0.01, ..Default::default() };
        assert!(bad.validate().is_err());
    }
}
