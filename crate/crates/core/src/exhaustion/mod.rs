//! Exhaustions by BFS balls, the Dirichlet restriction of the Laplacian to a
//! window, and the resolvent solvers built on it.

mod cg;
mod ldl;
mod limit;
mod linear;
mod operator;
mod resolvent;

use std::collections::{HashSet, VecDeque};

use serde::{Deserialize, Serialize};

pub use limit::{monotone_limit, monotone_limit_with_slack, Direction, LimitReport, Verdict};
pub use linear::{Method, PreparedSystem, SolverConfig, SymmetricSystem};
pub use operator::{restrict, RestrictedOperator};
pub use resolvent::{
    limit_orders, neumann_series_resolvent, perturbed_resolvent, solve_resolvent, LimitOrders,
    NeumannSeries, Resolvent,
};

use crate::error::{Error, Result};
use crate::graph::{Graph, Window};

/// Nested BFS balls `K_1 ⊆ K_2 ⊆ ...` around a root.
///
/// The vertices of the largest ball are stored once in BFS order; window `n`
/// is a prefix of that order.
#[derive(Debug, Clone)]
pub struct Exhaustion<V> {
    root: V,
    radii: Vec<usize>,
    order: Vec<V>,
    sizes: Vec<usize>,
}

/// Vertex count cap and starting radius for [`Exhaustion::geometric`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeometricRadii {
    pub start: usize,
    pub max_vertices: usize,
}

impl Default for GeometricRadii {
    fn default() -> Self {
        GeometricRadii { start: 5, max_vertices: 200_000 }
    }
}

/// BFS from `root`, stopping after layer `max_radius` or once more than
/// `max_vertices` vertices have been reached. Returns the visit order and
/// the cumulative count after each completed layer.
fn bfs_layers<G: Graph>(
    g: &G,
    root: &G::Vertex,
    max_radius: usize,
    max_vertices: usize,
) -> (Vec<G::Vertex>, Vec<usize>) {
    let mut order = vec![root.clone()];
    let mut seen: HashSet<G::Vertex> = HashSet::from([root.clone()]);
    let mut cumulative = vec![1];
    let mut frontier = VecDeque::from([root.clone()]);
    for _ in 0..max_radius {
        if frontier.is_empty() || order.len() > max_vertices {
            break;
        }
        let mut next = VecDeque::new();
        for x in frontier {
            for (y, _) in g.neighbors(&x) {
                if seen.insert(y.clone()) {
                    order.push(y.clone());
                    next.push_back(y);
                }
            }
        }
        if next.is_empty() {
            break;
        }
        cumulative.push(order.len());
        frontier = next;
    }
    (order, cumulative)
}

impl<V: Clone + Eq + std::hash::Hash> Exhaustion<V> {
    pub fn new<G: Graph<Vertex = V>>(g: &G, root: V, radii: &[usize]) -> Result<Self> {
        g.check(&root)?;
        if radii.is_empty() {
            return Err(Error::InvalidConfig("at least one radius is required".into()));
        }
        if radii[0] == 0 || radii.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidConfig(format!(
                "radii must be strictly increasing and >= 1, got {radii:?}"
            )));
        }
        let max_r = *radii.last().unwrap();
        let (order, cumulative) = bfs_layers(g, &root, max_r, usize::MAX);
        let sizes = radii.iter().map(|&r| cumulative[r.min(cumulative.len() - 1)]).collect();
        Ok(Exhaustion { root, radii: radii.to_vec(), order, sizes })
    }

    /// Radii doubling from `start` while the ball stays within
    /// `max_vertices`, plus the largest radius that still fits as a last
    /// window. On a finite graph the sequence stops once the ball is the
    /// whole graph.
    pub fn geometric<G: Graph<Vertex = V>>(g: &G, root: V, spec: GeometricRadii) -> Result<Self> {
        g.check(&root)?;
        if spec.start == 0 {
            return Err(Error::InvalidConfig("starting radius must be >= 1".into()));
        }
        let (_, cumulative) = bfs_layers(g, &root, usize::MAX, spec.max_vertices);
        // largest radius whose ball fits under the cap
        let fit = cumulative.iter().rposition(|&c| c <= spec.max_vertices).unwrap_or(0).max(1);
        let mut radii = Vec::new();
        let mut r = spec.start;
        while r <= fit {
            radii.push(r);
            r *= 2;
        }
        if radii.last() != Some(&fit) {
            radii.push(fit);
        }
        Self::new(g, root, &radii)
    }

    pub fn root(&self) -> &V {
        &self.root
    }

    pub fn radii(&self) -> &[usize] {
        &self.radii
    }

    pub fn len(&self) -> usize {
        self.radii.len()
    }

    pub fn is_empty(&self) -> bool {
        self.radii.is_empty()
    }

    pub fn size(&self, n: usize) -> usize {
        self.sizes[n]
    }

    /// Vertices of window `n` in BFS order.
    pub fn vertices(&self, n: usize) -> &[V] {
        &self.order[..self.sizes[n]]
    }

    pub fn window(&self, n: usize) -> Window<V> {
        Window::new(self.vertices(n).iter().cloned())
    }

    pub fn largest(&self) -> Window<V> {
        self.window(self.len() - 1)
    }
}

/// `exhaust(g, root, radii)`: nested BFS balls of the given hop radii.
pub fn exhaust<G: Graph>(g: &G, root: G::Vertex, radii: &[usize]) -> Result<Exhaustion<G::Vertex>> {
    Exhaustion::new(g, root, radii)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{build_finite, Lattice, LatticePoint, RegularTree};

    #[test]
    fn z1_balls() {
        let z1 = Lattice::new(1).unwrap();
        let ex = exhaust(&z1, LatticePoint::origin(1), &[1, 2, 3]).unwrap();
        for (n, r) in [1i64, 2, 3].into_iter().enumerate() {
            let mut got: Vec<i64> = ex.vertices(n).iter().map(|p| p.0[0]).collect();
            got.sort();
            assert_eq!(got, (-r..=r).collect::<Vec<_>>());
        }
    }

    #[test]
    fn tree_ball_size() {
        let t = RegularTree::new(2).unwrap();
        let ex = exhaust(&t, 0, &[3]).unwrap();
        assert_eq!(ex.size(0), 15);
    }

    #[test]
    fn finite_graph_saturates() {
        let p3 = build_finite(&[(0, 1, 1.0), (1, 2, 1.0)], &[], &[]).unwrap();
        let ex = exhaust(&p3, 0, &[5]).unwrap();
        assert_eq!(ex.size(0), 3);
    }

    #[test]
    fn bad_radii() {
        let z1 = Lattice::new(1).unwrap();
        assert!(exhaust(&z1, LatticePoint::origin(1), &[2, 2]).is_err());
        assert!(exhaust(&z1, LatticePoint::origin(1), &[0, 2]).is_err());
        assert!(matches!(exhaust(&z1, LatticePoint::origin(2), &[1]), Err(Error::UnknownVertex(_))));
    }

    #[test]
    fn geometric_radii() {
        let z1 = Lattice::new(1).unwrap();
        let spec = GeometricRadii { start: 5, max_vertices: 101 };
        let ex = Exhaustion::geometric(&z1, LatticePoint::origin(1), spec).unwrap();
        assert_eq!(ex.radii(), &[5, 10, 20, 40, 50]);

        let p3 = build_finite(&[(0, 1, 1.0), (1, 2, 1.0)], &[], &[]).unwrap();
        let ex = Exhaustion::geometric(&p3, 0, GeometricRadii::default()).unwrap();
        assert_eq!(ex.size(ex.len() - 1), 3);
    }
}
