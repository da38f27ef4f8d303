//! Energy form, formal Laplacian, normal derivatives and boundary terms.
//!
//! All sums here are finite: functions are finitely supported (or only read
//! on a finite window) and the graph is locally finite.

use std::collections::{BTreeSet, HashSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exhaustion::Exhaustion;
use crate::graph::{connected_in_window, Field, Graph, GraphFunction, Window};

/// `Q(u)` split into its edge and potential parts.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergyValue {
    pub value: f64,
    pub edge_part: f64,
    pub potential_part: f64,
}

/// `(L u)(x) = 1/m(x) sum_y b(x,y)(u(x) - u(y)) + c(x)/m(x) u(x)`.
pub fn apply_laplacian<G: Graph, U: Field<G::Vertex>>(g: &G, u: &U, x: &G::Vertex) -> Result<f64> {
    g.check(x)?;
    Ok(laplacian_at(g, u, x))
}

pub(crate) fn laplacian_at<G: Graph, U: Field<G::Vertex>>(g: &G, u: &U, x: &G::Vertex) -> f64 {
    let ux = u.at(x);
    let flux: f64 = g.neighbors(x).iter().map(|(y, w)| w * (ux - u.at(y))).sum();
    (flux + g.potential(x) * ux) / g.measure(x)
}

fn joint_support<V: Ord + Clone>(u: &GraphFunction<V>, v: &GraphFunction<V>) -> BTreeSet<V> {
    u.support().chain(v.support()).cloned().collect()
}

/// Bilinear form `Q(u, v)` for finitely supported `u`, `v`.
pub fn energy_pair<G: Graph>(g: &G, u: &GraphFunction<G::Vertex>, v: &GraphFunction<G::Vertex>) -> f64 {
    let (edge, pot) = energy_parts(g, u, v);
    edge + pot
}

fn energy_parts<G: Graph>(
    g: &G,
    u: &GraphFunction<G::Vertex>,
    v: &GraphFunction<G::Vertex>,
) -> (f64, f64) {
    let support = joint_support(u, v);
    let mut edge = 0.0;
    let mut pot = 0.0;
    for x in &support {
        let (ux, vx) = (u.get(x), v.get(x));
        for (y, w) in g.neighbors(x) {
            if support.contains(&y) {
                // each unordered pair once
                if *x < y {
                    edge += w * (ux - u.get(&y)) * (vx - v.get(&y));
                }
            } else {
                // the two ordered pairs (x,y), (y,x) each carry 1/2
                edge += w * ux * vx;
            }
        }
        pot += g.potential(x) * ux * vx;
    }
    (edge, pot)
}

pub fn energy<G: Graph>(g: &G, u: &GraphFunction<G::Vertex>) -> EnergyValue {
    let (edge_part, potential_part) = energy_parts(g, u, u);
    EnergyValue { value: edge_part + potential_part, edge_part, potential_part }
}

/// Normal contractions that are checked by the test suites.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Contraction {
    Abs,
    Clamp { lo: f64, hi: f64 },
}

pub fn contract<V: Ord + Clone>(u: &GraphFunction<V>, kind: Contraction) -> Result<GraphFunction<V>> {
    match kind {
        Contraction::Abs => Ok(u.map(f64::abs)),
        Contraction::Clamp { lo, hi } => {
            if !(lo <= 0.0 && 0.0 <= hi) {
                return Err(Error::InvalidClampRange { lo, hi });
            }
            Ok(u.map(|x| x.clamp(lo, hi)))
        }
    }
}

/// `Q(u, v) - sum_x (L u)(x) v(x) m(x)`; zero up to rounding.
pub fn greens_formula_residual<G: Graph>(
    g: &G,
    u: &GraphFunction<G::Vertex>,
    v: &GraphFunction<G::Vertex>,
) -> f64 {
    let q = energy_pair(g, u, v);
    let pairing: f64 = v.iter().map(|(x, vx)| laplacian_at(g, u, x) * vx * g.measure(x)).sum();
    q - pairing
}

/// `<u, v>_o = Q(u, v) + u(o) v(o)`.
pub fn yamasaki_inner<G: Graph>(
    g: &G,
    u: &GraphFunction<G::Vertex>,
    v: &GraphFunction<G::Vertex>,
    o: &G::Vertex,
) -> f64 {
    energy_pair(g, u, v) + u.get(o) * v.get(o)
}

/// Constant `K` with `|u(x) - u(y)| <= K Q(u)^{1/2}`, from the resistance of
/// a shortest path inside `window`.
pub fn path_constant<G: Graph>(g: &G, x: &G::Vertex, y: &G::Vertex, window: &Window<G::Vertex>) -> Result<f64> {
    if x == y {
        g.check(x)?;
        return Ok(0.0);
    }
    let path = connected_in_window(g, window, x, y)?
        .ok_or_else(|| Error::Disconnected { x: g.encode(x), y: g.encode(y) })?;
    let mut resistance = 0.0;
    for pair in path.windows(2) {
        let w = g
            .neighbors(&pair[0])
            .into_iter()
            .find(|(z, _)| *z == pair[1])
            .map(|(_, w)| w)
            .expect("path steps follow edges");
        resistance += 1.0 / w;
    }
    Ok(resistance.sqrt())
}

/// Split of a finite window into boundary (vertices with a neighbour outside)
/// and interior.
#[derive(Debug, Clone)]
pub struct WindowBoundary<V> {
    pub boundary: Vec<V>,
    pub interior: Vec<V>,
}

impl<V: Clone + Eq + std::hash::Hash> WindowBoundary<V> {
    pub fn new<G: Graph<Vertex = V>>(g: &G, window: &Window<V>) -> Self {
        let mut boundary = Vec::new();
        let mut interior = Vec::new();
        for x in window.iter() {
            if g.neighbors(x).iter().any(|(y, _)| !window.contains(y)) {
                boundary.push(x.clone());
            } else {
                interior.push(x.clone());
            }
        }
        WindowBoundary { boundary, interior }
    }

    pub fn is_boundary(&self, x: &V) -> bool {
        self.boundary.contains(x)
    }
}

/// Outward normal derivative `(d_W u)(x) = sum_{y in W} b(x,y)(u(x) - u(y))`
/// at a boundary vertex.
pub fn normal_derivative<G: Graph, U: Field<G::Vertex>>(
    g: &G,
    u: &U,
    window: &Window<G::Vertex>,
    x: &G::Vertex,
) -> Result<f64> {
    g.check(x)?;
    let nb = g.neighbors(x);
    if !window.contains(x) || nb.iter().all(|(y, _)| window.contains(y)) {
        return Err(Error::NotBoundaryVertex(g.encode(x)));
    }
    Ok(normal_derivative_unchecked(u, window, x, &nb))
}

fn normal_derivative_unchecked<V: Clone + Eq + std::hash::Hash, U: Field<V>>(
    u: &U,
    window: &Window<V>,
    x: &V,
    nb: &[(V, f64)],
) -> f64 {
    let ux = u.at(x);
    nb.iter().filter(|(y, _)| window.contains(y)).map(|(y, w)| w * (ux - u.at(y))).sum()
}

/// Window-restricted form `1/2 sum_{x,y in W} b (u(x)-u(y))(v(x)-v(y)) + sum_W c u v`.
pub fn window_energy_pair<G: Graph, U: Field<G::Vertex>, W: Field<G::Vertex>>(
    g: &G,
    u: &U,
    v: &W,
    window: &Window<G::Vertex>,
) -> f64 {
    let mut total = 0.0;
    for (i, x) in window.iter().enumerate() {
        let (ux, vx) = (u.at(x), v.at(x));
        for (y, w) in g.neighbors(x) {
            if let Some(j) = window.index_of(&y) {
                if i < j {
                    total += w * (ux - u.at(&y)) * (vx - v.at(&y));
                }
            }
        }
        total += g.potential(x) * ux * vx;
    }
    total
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundaryTermEntry {
    pub radius: usize,
    pub window_size: usize,
    /// `sum_{x in bd W} u(x) (d_W v)(x)`.
    pub boundary_term: f64,
    /// `Q_W(u, v)`, the window-restricted form.
    pub window_energy: f64,
    /// `sum_{x in int W} u(x) (L v)(x) m(x)`.
    pub interior_pairing: f64,
    /// `Q_W(u,v) - sum_{x in W} u(x) (L v)(x) m(x)`; a diagnostic only.
    pub l2_residual: f64,
}

/// Boundary terms of `R(u, v)` along an exhaustion.
pub fn boundary_term_sequence<G: Graph, U: Field<G::Vertex>>(
    g: &G,
    u: &U,
    v: &GraphFunction<G::Vertex>,
    exhaustion: &Exhaustion<G::Vertex>,
) -> Result<Vec<BoundaryTermEntry>> {
    let mut out = Vec::with_capacity(exhaustion.len());
    for n in 0..exhaustion.len() {
        let window = exhaustion.window(n);
        let parts = WindowBoundary::new(g, &window);
        if n == 0 && !v.is_empty() {
            let interior: HashSet<&G::Vertex> = parts.interior.iter().collect();
            if !v.support().any(|x| interior.contains(x)) {
                return Err(Error::WindowTooSmall);
            }
        }
        let mut boundary_term = 0.0;
        let mut boundary_pairing = 0.0;
        for x in &parts.boundary {
            let nb = g.neighbors(x);
            let ux = u.at(x);
            boundary_term += ux * normal_derivative_unchecked(v, &window, x, &nb);
            boundary_pairing += ux * laplacian_at(g, v, x) * g.measure(x);
        }
        let interior_pairing: f64 =
            parts.interior.iter().map(|x| u.at(x) * laplacian_at(g, v, x) * g.measure(x)).sum();
        let window_energy = window_energy_pair(g, u, v, &window);
        out.push(BoundaryTermEntry {
            radius: exhaustion.radii()[n],
            window_size: window.len(),
            boundary_term,
            window_energy,
            interior_pairing,
            l2_residual: window_energy - interior_pairing - boundary_pairing,
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{build_finite, FiniteGraph, Lattice, LatticePoint};
    use approx::assert_abs_diff_eq;

    fn p3() -> FiniteGraph {
        build_finite(&[(0, 1, 1.0), (1, 2, 1.0)], &[], &[]).unwrap()
    }

    fn f(vals: &[(usize, f64)]) -> GraphFunction<usize> {
        vals.iter().copied().collect()
    }

    #[test]
    fn laplacian_of_delta_on_path() {
        let g = p3();
        let u = GraphFunction::delta(1);
        assert_eq!(apply_laplacian(&g, &u, &0).unwrap(), -1.0);
        assert_eq!(apply_laplacian(&g, &u, &1).unwrap(), 2.0);
        assert_eq!(apply_laplacian(&g, &u, &2).unwrap(), -1.0);

        let heavy = build_finite(&[(0, 1, 1.0), (1, 2, 1.0)], &[], &[(1, 2.0)]).unwrap();
        assert_eq!(apply_laplacian(&heavy, &u, &1).unwrap(), 1.0);
    }

    #[test]
    fn laplacian_of_constant_vanishes() {
        let z2 = Lattice::new(2).unwrap();
        let one = |_: &LatticePoint| 3.5;
        assert_eq!(apply_laplacian(&z2, &one, &LatticePoint::new(&[4, -1])).unwrap(), 0.0);
    }

    #[test]
    fn energy_examples() {
        let g = p3();
        for x in 0..3 {
            assert_eq!(energy(&g, &GraphFunction::delta(x)).value, g.weight_sum(&x));
        }
        assert_eq!(energy(&g, &GraphFunction::zero()).value, 0.0);
        assert_eq!(energy(&g, &f(&[(0, 1.0), (1, 1.0)])).value, 1.0);

        let with_c = build_finite(&[(0, 1, 1.0), (1, 2, 1.0)], &[(0, 0.5)], &[]).unwrap();
        let e = energy(&with_c, &GraphFunction::delta(0));
        assert_eq!(e.value, 1.5);
        assert_eq!(e.potential_part, 0.5);
    }

    #[test]
    fn contractions() {
        let u = f(&[(0, -1.0), (1, 2.0)]);
        assert_eq!(contract(&u, Contraction::Clamp { lo: 0.0, hi: 1.0 }).unwrap(), f(&[(1, 1.0)]));
        let neg = GraphFunction::delta(1).scaled(-1.0);
        let g = p3();
        let a = contract(&neg, Contraction::Abs).unwrap();
        assert_eq!(a, GraphFunction::delta(1));
        assert_eq!(energy(&g, &a).value, energy(&g, &neg).value);
        assert!(matches!(
            contract(&u, Contraction::Clamp { lo: 0.5, hi: 1.0 }),
            Err(Error::InvalidClampRange { .. })
        ));
    }

    #[test]
    fn greens_formula_on_path() {
        let g = p3();
        let u = GraphFunction::delta(0);
        let v = GraphFunction::delta(1);
        assert_eq!(energy_pair(&g, &u, &v), -1.0);
        assert_eq!(greens_formula_residual(&g, &u, &v), 0.0);
        assert_eq!(greens_formula_residual(&g, &u, &GraphFunction::zero()), 0.0);
    }

    #[test]
    fn path_constants() {
        let g = p3();
        let all = Window::new(0..3);
        assert_abs_diff_eq!(path_constant(&g, &0, &2, &all).unwrap(), 2f64.sqrt());
        assert_eq!(path_constant(&g, &1, &1, &all).unwrap(), 0.0);
        assert!(matches!(
            path_constant(&g, &0, &2, &Window::new([0, 2])),
            Err(Error::Disconnected { .. })
        ));
        let z1 = Lattice::new(1).unwrap();
        let w = Window::new((-2..=9).map(|k| LatticePoint::new(&[k])));
        let k = path_constant(&z1, &LatticePoint::new(&[0]), &LatticePoint::new(&[7]), &w).unwrap();
        assert_abs_diff_eq!(k, 7f64.sqrt(), epsilon = 1e-15);
    }

    #[test]
    fn normal_derivatives() {
        let g = p3();
        let w = Window::new([0, 1]);
        assert_eq!(normal_derivative(&g, &GraphFunction::delta(0), &w, &1).unwrap(), -1.0);
        assert_eq!(normal_derivative(&g, &|_: &usize| 2.0, &w, &1).unwrap(), 0.0);
        assert!(matches!(
            normal_derivative(&g, &GraphFunction::delta(0), &w, &0),
            Err(Error::NotBoundaryVertex(_))
        ));

        let z1 = Lattice::new(1).unwrap();
        let n = 5;
        let w = Window::new((-n..=n).map(|k| LatticePoint::new(&[k])));
        let ramp = |p: &LatticePoint| p.0[0] as f64;
        assert_eq!(normal_derivative(&z1, &ramp, &w, &LatticePoint::new(&[n])).unwrap(), 1.0);
    }

    #[test]
    fn yamasaki_examples() {
        let g = p3();
        let d = GraphFunction::delta(1);
        assert_eq!(yamasaki_inner(&g, &d, &d, &1), g.weight_sum(&1) + 1.0);
        assert_eq!(yamasaki_inner(&g, &GraphFunction::delta(0), &GraphFunction::delta(2), &1), 0.0);

        let clique = build_finite(
            &[(0, 1, 1.0), (0, 2, 1.0), (0, 3, 1.0), (1, 2, 1.0), (1, 3, 1.0), (2, 3, 1.0)],
            &[],
            &[],
        )
        .unwrap();
        let ones = f(&[(0, 1.0), (1, 1.0), (2, 1.0), (3, 1.0)]);
        assert_eq!(yamasaki_inner(&clique, &ones, &ones, &0), 1.0);
    }

    #[test]
    fn boundary_terms_on_z1() {
        let z1 = Lattice::new(1).unwrap();
        let o = LatticePoint::origin(1);
        let ex = Exhaustion::new(&z1, o.clone(), &[1, 2, 3, 4]).unwrap();
        let seq = boundary_term_sequence(&z1, &|_: &LatticePoint| 1.0, &GraphFunction::delta(o.clone()), &ex)
            .unwrap();
        assert_eq!(seq[0].boundary_term, -2.0);
        assert!(seq[1..].iter().all(|e| e.boundary_term == 0.0));
        for e in &seq {
            // Q_W(1, v) = 0 = interior pairing + boundary term
            assert_abs_diff_eq!(e.window_energy, e.interior_pairing + e.boundary_term, epsilon = 1e-14);
        }
        let zero = boundary_term_sequence(&z1, &|_: &LatticePoint| 1.0, &GraphFunction::zero(), &ex).unwrap();
        assert!(zero.iter().all(|e| e.boundary_term == 0.0));

        let far = GraphFunction::delta(LatticePoint::new(&[10]));
        assert!(matches!(
            boundary_term_sequence(&z1, &|_: &LatticePoint| 1.0, &far, &ex),
            Err(Error::WindowTooSmall)
        ));
    }
}
