use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::Graph;

use super::limit::{monotone_limit_with_slack, Direction, LimitReport};
use super::linear::{Method, PreparedSystem, SolverConfig};
use super::operator::{restrict, RestrictedOperator};
use super::Exhaustion;

/// `(L_K + alpha + g)^{-1}` on a window, prepared for repeated solves.
///
/// Internally the symmetric matrix `M (L_K + alpha + g)` is solved with the
/// right-hand side `M f`; the residual is measured in the `M^{-1}` norm,
/// which is the `m`-weighted norm of `(L_K + alpha + g) u - f`.
#[derive(Debug)]
pub struct Resolvent<'a, V> {
    op: &'a RestrictedOperator<V>,
    prepared: PreparedSystem,
    inv_measure: Vec<f64>,
}

impl<'a, V: Clone + Eq + std::hash::Hash + Ord> Resolvent<'a, V> {
    pub fn new(
        op: &'a RestrictedOperator<V>,
        alpha: f64,
        shift: Option<&[f64]>,
        cfg: SolverConfig,
    ) -> Result<Self> {
        if !(alpha >= 0.0) || !alpha.is_finite() {
            return Err(Error::InvalidConfig(format!("alpha must be finite and >= 0, got {alpha}")));
        }
        if let Some(s) = shift {
            if s.len() != op.len() || s.iter().any(|v| !(*v >= 0.0)) {
                return Err(Error::InvalidConfig("shift must be a nonnegative window function".into()));
            }
        }
        let prepared = PreparedSystem::new(op.system(alpha, shift), cfg)?;
        let inv_measure = op.measure().iter().map(|m| 1.0 / m).collect();
        Ok(Resolvent { op, prepared, inv_measure })
    }

    pub fn method(&self) -> Method {
        self.prepared.method()
    }

    pub fn solve(&self, f: &[f64]) -> Result<Vec<f64>> {
        let rhs: Vec<f64> = f.iter().zip(self.op.measure()).map(|(f, m)| f * m).collect();
        self.prepared.solve(&rhs, Some(&self.inv_measure))
    }

    pub fn solve_delta(&self, i: usize) -> Result<Vec<f64>> {
        self.solve(&self.op.delta(i))
    }
}

/// `(L_K + alpha)^{-1} f`.
pub fn solve_resolvent<V: Clone + Eq + std::hash::Hash + Ord>(
    op: &RestrictedOperator<V>,
    alpha: f64,
    f: &[f64],
    cfg: &SolverConfig,
) -> Result<Vec<f64>> {
    Resolvent::new(op, alpha, None, *cfg)?.solve(f)
}

/// `((L_K + g) + alpha)^{-1} f` for a strictly positive multiplication
/// operator `g`.
pub fn perturbed_resolvent<V: Clone + Eq + std::hash::Hash + Ord>(
    op: &RestrictedOperator<V>,
    g_fn: &[f64],
    alpha: f64,
    f: &[f64],
    cfg: &SolverConfig,
) -> Result<Vec<f64>> {
    if g_fn.iter().any(|v| !(*v > 0.0)) {
        return Err(Error::InvalidConfig("perturbation must be strictly positive".into()));
    }
    Resolvent::new(op, alpha, Some(g_fn), *cfg)?.solve(f)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NeumannSeries {
    pub values: Vec<f64>,
    pub terms: usize,
    /// `max_x deg(x) / (deg(x) + alpha m(x))`, a bound for the sup-norm of
    /// the iteration matrix.
    pub rho_hat: f64,
}

/// `(L_K + alpha)^{-1} delta_x` by the Neumann series of
/// `(D + alpha M)^{-1} A`, where `D` is the full degree and `A` the
/// in-window adjacency:
///
/// `u = sum_n [(D + alpha M)^{-1} A]^n (D + alpha M)^{-1} M delta_x`.
///
/// Summation stops once the sup-norm increment is below
/// `tol (1 - rho) / rho`, so the neglected tail is below `tol`.
pub fn neumann_series_resolvent<V: Clone + Eq + std::hash::Hash + Ord>(
    op: &RestrictedOperator<V>,
    alpha: f64,
    x: usize,
    tol: f64,
) -> Result<NeumannSeries> {
    if !(alpha > 0.0) {
        return Err(Error::InvalidConfig(format!("Neumann series needs alpha > 0, got {alpha}")));
    }
    if x >= op.len() {
        return Err(Error::UnknownVertex(format!("window index {x}")));
    }
    let n = op.len();
    let scale: Vec<f64> = (0..n).map(|i| 1.0 / (op.degree(i) + alpha * op.measure()[i])).collect();
    let rho_hat = (0..n).map(|i| op.degree(i) * scale[i]).fold(0.0, f64::max);
    let stop = if rho_hat > 0.0 { tol * (1.0 - rho_hat) / rho_hat } else { f64::INFINITY };

    let mut term = vec![0.0; n];
    term[x] = op.measure()[x] * scale[x];
    let mut values = term.clone();
    let mut next = vec![0.0; n];
    let mut terms = 1;
    loop {
        let mut sup: f64 = 0.0;
        for i in 0..n {
            let s: f64 = op.neighbors(i).iter().map(|&(j, w)| w * term[j]).sum();
            next[i] = s * scale[i];
            sup = sup.max(next[i].abs());
        }
        std::mem::swap(&mut term, &mut next);
        if sup == 0.0 {
            break;
        }
        values.iter_mut().zip(&term).for_each(|(v, t)| *v += t);
        terms += 1;
        if sup < stop {
            break;
        }
    }
    Ok(NeumannSeries { values, terms, rho_hat })
}

/// The two iterated limits of `(L_{K_n} + alpha)^{-1} delta_x (y)`: windows
/// first then `alpha -> 0`, and `alpha -> 0` first then windows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LimitOrders {
    pub alphas: Vec<f64>,
    pub radii: Vec<usize>,
    /// `table[n][k]` for window `n` and `alphas[k]`.
    pub table: Vec<Vec<f64>>,
    /// `alpha = 0` solve on each window.
    pub at_zero: Vec<f64>,
    /// Largest-window value for each `alpha`, in decreasing `alpha`.
    pub window_then_alpha: LimitReport,
    /// `alpha = 0` value per window.
    pub alpha_then_window: LimitReport,
}

pub fn limit_orders<G: Graph>(
    g: &G,
    x: &G::Vertex,
    y: &G::Vertex,
    exhaustion: &Exhaustion<G::Vertex>,
    alphas: &[f64],
    tol: f64,
    threshold: f64,
    cfg: &SolverConfig,
) -> Result<LimitOrders> {
    let mut alphas = alphas.to_vec();
    if alphas.is_empty() || alphas.iter().any(|a| !(*a > 0.0)) {
        return Err(Error::InvalidConfig("alpha list must be nonempty and positive".into()));
    }
    alphas.sort_by(|a, b| b.total_cmp(a));
    let mut table = Vec::with_capacity(exhaustion.len());
    let mut at_zero = Vec::with_capacity(exhaustion.len());
    for n in 0..exhaustion.len() {
        let op = restrict(g, &exhaustion.window(n))?;
        let (Some(i), Some(j)) = (op.window().index_of(x), op.window().index_of(y)) else {
            return Err(Error::UnknownVertex(format!("{x:?} / {y:?} outside window {n}")));
        };
        let mut row = Vec::with_capacity(alphas.len());
        for &a in &alphas {
            row.push(Resolvent::new(&op, a, None, *cfg)?.solve_delta(i)?[j]);
        }
        table.push(row);
        at_zero.push(Resolvent::new(&op, 0.0, None, *cfg)?.solve_delta(i)?[j]);
    }
    let slack = cfg.tol.max(1e-12);
    let last = table.last().unwrap().clone();
    let window_then_alpha =
        monotone_limit_with_slack(&last, Direction::Increasing, tol, threshold, slack)?;
    let alpha_then_window = monotone_limit_with_slack(&at_zero, Direction::Increasing, tol, threshold, slack)?
        .with_windows(exhaustion.radii());
    Ok(LimitOrders { alphas, radii: exhaustion.radii().to_vec(), table, at_zero, window_then_alpha, alpha_then_window })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{build_finite, Lattice, LatticePoint, RegularTree, Window};
    use approx::assert_abs_diff_eq;

    #[test]
    fn singleton_closed_form() {
        let z1 = Lattice::new(1).unwrap();
        let op = restrict(&z1, &Window::new([LatticePoint::origin(1)])).unwrap();
        for alpha in [0.0, 0.5, 3.0] {
            let u = solve_resolvent(&op, alpha, &[1.0], &SolverConfig::default()).unwrap();
            assert_abs_diff_eq!(u[0], 1.0 / (2.0 + alpha), epsilon = 1e-15);
            if alpha > 0.0 {
                let s = neumann_series_resolvent(&op, alpha, 0, 1e-14).unwrap();
                assert_eq!(s.values, vec![1.0 / (2.0 + alpha)]);
            }
        }
    }

    #[test]
    fn constants_are_fixed_on_finite_graph() {
        let g = build_finite(&[(0, 1, 1.0), (1, 2, 2.0), (2, 0, 0.5), (2, 3, 1.0)], &[], &[(3, 2.0)]).unwrap();
        let op = restrict(&g, &Window::new(g.vertices())).unwrap();
        let u = solve_resolvent(&op, 1.0, &[1.0; 4], &SolverConfig::default()).unwrap();
        for v in u {
            assert_abs_diff_eq!(v, 1.0, epsilon = 1e-14);
        }
    }

    #[test]
    fn isolated_finite_graph_is_singular_at_zero() {
        let g = build_finite(&[(0, 1, 1.0), (1, 2, 1.0)], &[], &[]).unwrap();
        let op = restrict(&g, &Window::new(g.vertices())).unwrap();
        assert_eq!(
            solve_resolvent(&op, 0.0, &[1.0, 0.0, 0.0], &SolverConfig::default()).unwrap_err(),
            Error::SingularSystem
        );
    }

    #[test]
    fn neumann_matches_direct_on_tree() {
        let t = RegularTree::new(2).unwrap();
        let ex = super::super::exhaust(&t, 0, &[3]).unwrap();
        let op = restrict(&t, &ex.window(0)).unwrap();
        let alpha = 0.7;
        let s = neumann_series_resolvent(&op, alpha, 0, 1e-13).unwrap();
        let direct = solve_resolvent(&op, alpha, &op.delta(0), &SolverConfig::default()).unwrap();
        for (a, b) in s.values.iter().zip(&direct) {
            assert_abs_diff_eq!(a, b, epsilon = 1e-12);
        }
        assert_abs_diff_eq!(s.rho_hat, 3.0 / 3.7, epsilon = 1e-15);
    }

    #[test]
    fn constant_perturbation_is_a_shift() {
        let z2 = Lattice::new(2).unwrap();
        let ex = super::super::exhaust(&z2, LatticePoint::origin(2), &[4]).unwrap();
        let op = restrict(&z2, &ex.window(0)).unwrap();
        let f: Vec<f64> = (0..op.len()).map(|i| (i % 3) as f64).collect();
        let cfg = SolverConfig::default();
        let a = perturbed_resolvent(&op, &vec![0.25; op.len()], 0.5, &f, &cfg).unwrap();
        let b = solve_resolvent(&op, 0.75, &f, &cfg).unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert_abs_diff_eq!(x, y, epsilon = 1e-12);
        }
    }

    #[test]
    fn both_limit_orders_on_tree() {
        let t = RegularTree::new(2).unwrap();
        let ex = super::super::exhaust(&t, 0, &[2, 4, 6, 8]).unwrap();
        let lo = limit_orders(&t, &0, &0, &ex, &[1.0, 0.1, 0.01], 1e-3, 1e6, &SolverConfig::default()).unwrap();
        assert_eq!(lo.alphas, vec![1.0, 0.1, 0.01]);
        // 1 / cap on the ball of radius r, whose exterior edges sit at depth r + 1
        for (n, r) in [2, 4, 6, 8].into_iter().enumerate() {
            let p = (1u64 << (r + 1)) as f64;
            assert_abs_diff_eq!(lo.at_zero[n], (p - 1.0) / p, epsilon = 1e-12);
        }
        assert!(lo.window_then_alpha.values.windows(2).all(|w| w[0] <= w[1]));
    }
}
