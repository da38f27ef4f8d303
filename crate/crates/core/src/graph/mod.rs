//! Weighted graphs `(b, c)` over a vertex set with a measure `m`.
//!
//! Infinite graphs are lazy: a [`Graph`] only answers local questions
//! (neighbours, potential, measure) and nothing is materialised until a
//! finite [`Window`] is cut out of it. Every graph is locally finite, so the
//! row sums of `b` are finite by construction.

mod birth_death;
mod finite;
mod function;
pub mod io;
mod lattice;
mod tree;

use std::collections::{HashMap, VecDeque};
use std::fmt;
use std::hash::Hash;

use serde::{Deserialize, Serialize};

pub use birth_death::BirthDeath;
pub use finite::{build_finite, FiniteGraph, FiniteGraphBuilder};
pub use function::{Field, GraphFunction};
pub use lattice::{Lattice, LatticePoint};
pub use tree::RegularTree;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum GraphKind {
    FiniteExplicit,
    Lattice { dimension: usize },
    RegularTree { branching: u64 },
    BirthDeath { beta: f64 },
    Custom,
}

/// Per-vertex weight used for the measure or potential of a built-in family.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "value", rename_all = "snake_case")]
pub enum VertexWeight {
    Constant(f64),
    /// `(n + 1)^gamma`; only meaningful on the birth-death chain.
    Power(f64),
}

impl VertexWeight {
    pub(crate) fn eval_index(&self, n: u64) -> f64 {
        match *self {
            VertexWeight::Constant(v) => v,
            VertexWeight::Power(gamma) => ((n + 1) as f64).powf(gamma),
        }
    }
}

/// A locally finite weighted graph.
///
/// Implementations must be pure: `neighbors(x)` returns the same list on every
/// call, never contains `x`, and is symmetric (`y` lists `x` with the
/// identical weight).
pub trait Graph: Send + Sync {
    type Vertex: Clone + Eq + Hash + Ord + fmt::Debug + Send + Sync;

    fn kind(&self) -> GraphKind;
    fn contains(&self, x: &Self::Vertex) -> bool;
    fn neighbors(&self, x: &Self::Vertex) -> Vec<(Self::Vertex, f64)>;
    fn potential(&self, x: &Self::Vertex) -> f64;
    fn measure(&self, x: &Self::Vertex) -> f64;
    /// Canonical printable key.
    fn encode(&self, x: &Self::Vertex) -> String;
    fn decode(&self, key: &str) -> Result<Self::Vertex>;

    /// `sum_y b(x, y)`, without the potential.
    fn weight_sum(&self, x: &Self::Vertex) -> f64 {
        self.neighbors(x).iter().map(|(_, w)| w).sum()
    }

    fn check(&self, x: &Self::Vertex) -> Result<()> {
        if self.contains(x) {
            Ok(())
        } else {
            Err(Error::UnknownVertex(format!("{x:?}")))
        }
    }
}

/// Generalised degree `deg(x) = sum_y b(x, y) + c(x)`.
pub fn degree<G: Graph>(g: &G, x: &G::Vertex) -> Result<f64> {
    g.check(x)?;
    Ok(g.weight_sum(x) + g.potential(x))
}

/// A finite vertex set with a dense index, in insertion order.
#[derive(Debug, Clone)]
pub struct Window<V> {
    vertices: Vec<V>,
    index: HashMap<V, usize>,
}

impl<V: Clone + Eq + Hash> Window<V> {
    pub fn new(vertices: impl IntoIterator<Item = V>) -> Self {
        let mut out = Window { vertices: Vec::new(), index: HashMap::new() };
        for v in vertices {
            if !out.index.contains_key(&v) {
                out.index.insert(v.clone(), out.vertices.len());
                out.vertices.push(v);
            }
        }
        out
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn contains(&self, v: &V) -> bool {
        self.index.contains_key(v)
    }

    pub fn index_of(&self, v: &V) -> Option<usize> {
        self.index.get(v).copied()
    }

    pub fn vertex(&self, i: usize) -> &V {
        &self.vertices[i]
    }

    pub fn vertices(&self) -> &[V] {
        &self.vertices
    }

    pub fn iter(&self) -> std::slice::Iter<'_, V> {
        self.vertices.iter()
    }

    /// Window with `v` removed; order of the remaining vertices is kept.
    pub fn without(&self, v: &V) -> Self {
        Window::new(self.vertices.iter().filter(|u| *u != v).cloned())
    }
}

/// Breadth-first search from `x` to `y` that never leaves `window`.
pub fn connected_in_window<G: Graph>(
    g: &G,
    window: &Window<G::Vertex>,
    x: &G::Vertex,
    y: &G::Vertex,
) -> Result<Option<Vec<G::Vertex>>> {
    g.check(x)?;
    g.check(y)?;
    let (Some(start), Some(goal)) = (window.index_of(x), window.index_of(y)) else {
        return Err(Error::UnknownVertex(format!("{:?}", if window.contains(x) { y } else { x })));
    };
    let mut parent = vec![usize::MAX; window.len()];
    parent[start] = start;
    let mut queue = VecDeque::from([start]);
    while let Some(i) = queue.pop_front() {
        if i == goal {
            break;
        }
        for (nb, w) in g.neighbors(window.vertex(i)) {
            if w <= 0.0 {
                continue;
            }
            if let Some(j) = window.index_of(&nb) {
                if parent[j] == usize::MAX {
                    parent[j] = i;
                    queue.push_back(j);
                }
            }
        }
    }
    if parent[goal] == usize::MAX {
        return Ok(None);
    }
    let mut path = vec![goal];
    let mut cur = goal;
    while cur != start {
        cur = parent[cur];
        path.push(cur);
    }
    path.reverse();
    Ok(Some(path.into_iter().map(|i| window.vertex(i).clone()).collect()))
}

/// Checks symmetry and the absence of self-loops at each listed vertex.
pub fn check_axioms<'a, G: Graph>(
    g: &G,
    vertices: impl IntoIterator<Item = &'a G::Vertex>,
) -> Result<()>
where
    G::Vertex: 'a,
{
    for x in vertices {
        let m = g.measure(x);
        if !(m > 0.0) {
            return Err(Error::NonPositiveMeasure { vertex: g.encode(x), value: m });
        }
        let c = g.potential(x);
        if !(c >= 0.0) {
            return Err(Error::NegativePotential { vertex: g.encode(x), value: c });
        }
        for (y, w) in g.neighbors(x) {
            if &y == x {
                return Err(Error::SelfLoop(g.encode(x)));
            }
            if !(w > 0.0) {
                return Err(Error::NonPositiveWeight { x: g.encode(x), y: g.encode(&y), weight: w });
            }
            let back = g.neighbors(&y).into_iter().find(|(z, _)| z == x).map(|(_, w)| w);
            match back {
                Some(b) if b.to_bits() == w.to_bits() => {}
                Some(b) => {
                    return Err(Error::AsymmetricInput {
                        x: g.encode(x),
                        y: g.encode(&y),
                        forward: w,
                        backward: b,
                    })
                }
                None => {
                    return Err(Error::AsymmetricInput {
                        x: g.encode(x),
                        y: g.encode(&y),
                        forward: w,
                        backward: 0.0,
                    })
                }
            }
        }
    }
    Ok(())
}

/// The same graph with its measure multiplied by a positive factor.
pub struct Remeasured<'a, G: Graph> {
    inner: &'a G,
    factor: Box<dyn Fn(&G::Vertex) -> f64 + Send + Sync + 'a>,
}

impl<'a, G: Graph> Remeasured<'a, G> {
    pub fn new(inner: &'a G, factor: impl Fn(&G::Vertex) -> f64 + Send + Sync + 'a) -> Self {
        Remeasured { inner, factor: Box::new(factor) }
    }
}

impl<G: Graph> Graph for Remeasured<'_, G> {
    type Vertex = G::Vertex;

    fn kind(&self) -> GraphKind {
        self.inner.kind()
    }
    fn contains(&self, x: &Self::Vertex) -> bool {
        self.inner.contains(x)
    }
    fn neighbors(&self, x: &Self::Vertex) -> Vec<(Self::Vertex, f64)> {
        self.inner.neighbors(x)
    }
    fn potential(&self, x: &Self::Vertex) -> f64 {
        self.inner.potential(x)
    }
    fn measure(&self, x: &Self::Vertex) -> f64 {
        self.inner.measure(x) * (self.factor)(x)
    }
    fn encode(&self, x: &Self::Vertex) -> String {
        self.inner.encode(x)
    }
    fn decode(&self, key: &str) -> Result<Self::Vertex> {
        self.inner.decode(key)
    }
    fn weight_sum(&self, x: &Self::Vertex) -> f64 {
        self.inner.weight_sum(x)
    }
}

/// Deterministic hash of a vertex key into `[0, 1)`, used for reproducible
/// measure perturbations.
pub fn key_unit_hash(key: &str, salt: u64) -> f64 {
    // FNV-1a followed by a splitmix finaliser.
    let mut h: u64 = 0xcbf2_9ce4_8422_2325 ^ salt;
    for b in key.bytes() {
        h ^= b as u64;
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h ^= h >> 30;
    h = h.wrapping_mul(0xbf58_476d_1ce4_e5b9);
    h ^= h >> 27;
    h = h.wrapping_mul(0x94d0_49bb_1331_11eb);
    h ^= h >> 31;
    (h >> 11) as f64 / (1u64 << 53) as f64
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p3() -> FiniteGraph {
        build_finite(&[(0, 1, 1.0), (1, 2, 1.0)], &[], &[]).unwrap()
    }

    #[test]
    fn degree_of_path_and_lattice() {
        let g = p3();
        assert_eq!(degree(&g, &1).unwrap(), 2.0);
        assert_eq!(degree(&g, &0).unwrap(), 1.0);
        let z2 = Lattice::new(2).unwrap();
        assert_eq!(degree(&z2, &LatticePoint::origin(2)).unwrap(), 4.0);
        let with_c = build_finite(&[(0, 1, 1.0), (1, 2, 1.0)], &[(0, 0.5)], &[]).unwrap();
        assert_eq!(degree(&with_c, &0).unwrap(), 1.5);
    }

    #[test]
    fn unknown_vertex_is_rejected() {
        let g = p3();
        assert!(matches!(degree(&g, &7), Err(Error::UnknownVertex(_))));
    }

    #[test]
    fn window_path_search() {
        let g = p3();
        let full = Window::new(0..3);
        assert_eq!(connected_in_window(&g, &full, &0, &2).unwrap(), Some(vec![0, 1, 2]));
        let holed = Window::new([0, 2]);
        assert_eq!(connected_in_window(&g, &holed, &0, &2).unwrap(), None);

        let z1 = Lattice::new(1).unwrap();
        let w = Window::new((-3..=3).map(|k| LatticePoint::new(&[k])));
        let path = connected_in_window(&z1, &w, &LatticePoint::new(&[-3]), &LatticePoint::new(&[3]))
            .unwrap()
            .unwrap();
        assert_eq!(path.len() - 1, 6);
    }

    #[test]
    fn remeasured_keeps_structure() {
        let g = p3();
        let r = Remeasured::new(&g, |x: &usize| 1.0 + *x as f64);
        assert_eq!(r.measure(&2), 3.0);
        assert_eq!(r.neighbors(&1), g.neighbors(&1));
    }

    #[test]
    fn unit_hash_in_range() {
        for k in 0..100 {
            let h = key_unit_hash(&k.to_string(), 7);
            assert!((0.0..1.0).contains(&h));
        }
    }
}
