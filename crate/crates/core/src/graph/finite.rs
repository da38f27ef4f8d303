use std::collections::HashMap;

use super::{Graph, GraphKind};
use crate::error::{Error, Result};

/// An explicit finite graph. Vertices are dense indices; the original keys
/// are kept for I/O.
#[derive(Debug, Clone)]
pub struct FiniteGraph {
    keys: Vec<String>,
    index: HashMap<String, usize>,
    adjacency: Vec<Vec<(usize, f64)>>,
    measure: Vec<f64>,
    potential: Vec<f64>,
}

impl FiniteGraph {
    pub fn len(&self) -> usize {
        self.keys.len()
    }

    pub fn is_empty(&self) -> bool {
        self.keys.is_empty()
    }

    pub fn key(&self, x: usize) -> &str {
        &self.keys[x]
    }

    pub fn vertex(&self, key: &str) -> Option<usize> {
        self.index.get(key).copied()
    }

    pub fn vertices(&self) -> std::ops::Range<usize> {
        0..self.keys.len()
    }

    /// Each undirected edge once, as `(x, y, w)` with `x < y`.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        self.adjacency
            .iter()
            .enumerate()
            .flat_map(|(x, nb)| nb.iter().filter(move |(y, _)| x < *y).map(move |&(y, w)| (x, y, w)))
    }

    pub fn edge_count(&self) -> usize {
        self.edges().count()
    }

    /// Equality up to relabelling of the dense indices (keys must match).
    pub fn same_as(&self, other: &FiniteGraph) -> bool {
        if self.len() != other.len() {
            return false;
        }
        for x in self.vertices() {
            let Some(ox) = other.vertex(self.key(x)) else { return false };
            if self.measure[x] != other.measure[ox] || self.potential[x] != other.potential[ox] {
                return false;
            }
            let mut mine: Vec<(&str, f64)> =
                self.adjacency[x].iter().map(|&(y, w)| (self.key(y), w)).collect();
            let mut theirs: Vec<(&str, f64)> =
                other.adjacency[ox].iter().map(|&(y, w)| (other.key(y), w)).collect();
            mine.sort_by(|a, b| a.0.cmp(b.0));
            theirs.sort_by(|a, b| a.0.cmp(b.0));
            if mine != theirs {
                return false;
            }
        }
        true
    }
}

impl Graph for FiniteGraph {
    type Vertex = usize;

    fn kind(&self) -> GraphKind {
        GraphKind::FiniteExplicit
    }
    fn contains(&self, x: &usize) -> bool {
        *x < self.keys.len()
    }
    fn neighbors(&self, x: &usize) -> Vec<(usize, f64)> {
        self.adjacency[*x].clone()
    }
    fn potential(&self, x: &usize) -> f64 {
        self.potential[*x]
    }
    fn measure(&self, x: &usize) -> f64 {
        self.measure[*x]
    }
    fn encode(&self, x: &usize) -> String {
        self.keys[*x].clone()
    }
    fn decode(&self, key: &str) -> Result<usize> {
        self.vertex(key).ok_or_else(|| Error::UnknownVertex(key.to_string()))
    }
    fn weight_sum(&self, x: &usize) -> f64 {
        self.adjacency[*x].iter().map(|(_, w)| w).sum()
    }
}

/// Incremental construction with validation of the graph axioms.
#[derive(Debug, Default)]
pub struct FiniteGraphBuilder {
    keys: Vec<String>,
    index: HashMap<String, usize>,
    // directed entries as given, keyed by (from, to)
    given: HashMap<(usize, usize), f64>,
    order: Vec<(usize, usize)>,
    measure: HashMap<usize, f64>,
    potential: HashMap<usize, f64>,
}

impl FiniteGraphBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    fn intern(&mut self, key: &str) -> usize {
        if let Some(&i) = self.index.get(key) {
            return i;
        }
        let i = self.keys.len();
        self.keys.push(key.to_string());
        self.index.insert(key.to_string(), i);
        i
    }

    pub fn vertex(&mut self, key: &str) -> &mut Self {
        self.intern(key);
        self
    }

    pub fn edge(&mut self, x: &str, y: &str, w: f64) -> Result<&mut Self> {
        if !(w > 0.0) || !w.is_finite() {
            return Err(Error::NonPositiveWeight { x: x.into(), y: y.into(), weight: w });
        }
        if x == y {
            return Err(Error::SelfLoop(x.into()));
        }
        let (a, b) = (self.intern(x), self.intern(y));
        if self.given.contains_key(&(a, b)) {
            return Err(Error::DuplicateEdge { x: x.into(), y: y.into() });
        }
        if let Some(&back) = self.given.get(&(b, a)) {
            if back != w {
                return Err(Error::AsymmetricInput { x: x.into(), y: y.into(), forward: w, backward: back });
            }
        }
        self.given.insert((a, b), w);
        self.order.push((a, b));
        Ok(self)
    }

    pub fn measure(&mut self, x: &str, value: f64) -> Result<&mut Self> {
        if !(value > 0.0) || !value.is_finite() {
            return Err(Error::NonPositiveMeasure { vertex: x.into(), value });
        }
        let i = self.intern(x);
        self.measure.insert(i, value);
        Ok(self)
    }

    pub fn potential(&mut self, x: &str, value: f64) -> Result<&mut Self> {
        if !(value >= 0.0) || !value.is_finite() {
            return Err(Error::NegativePotential { vertex: x.into(), value });
        }
        let i = self.intern(x);
        self.potential.insert(i, value);
        Ok(self)
    }

    pub fn build(&self) -> FiniteGraph {
        let n = self.keys.len();
        let mut adjacency = vec![Vec::new(); n];
        for &(a, b) in &self.order {
            // a reversed duplicate was already checked for equal weight
            if a > b && self.given.contains_key(&(b, a)) {
                continue;
            }
            let w = self.given[&(a, b)];
            adjacency[a].push((b, w));
            adjacency[b].push((a, w));
        }
        FiniteGraph {
            keys: self.keys.clone(),
            index: self.index.clone(),
            adjacency,
            measure: (0..n).map(|i| self.measure.get(&i).copied().unwrap_or(1.0)).collect(),
            potential: (0..n).map(|i| self.potential.get(&i).copied().unwrap_or(0.0)).collect(),
        }
    }
}

/// Builds a finite graph from an edge list and optional per-vertex overrides
/// (measure defaults to 1, potential to 0).
pub fn build_finite<K: ToString>(
    edges: &[(K, K, f64)],
    potential: &[(K, f64)],
    measure: &[(K, f64)],
) -> Result<FiniteGraph> {
    let mut b = FiniteGraphBuilder::new();
    for (x, y, w) in edges {
        b.edge(&x.to_string(), &y.to_string(), *w)?;
    }
    for (x, v) in measure {
        b.measure(&x.to_string(), *v)?;
    }
    for (x, v) in potential {
        b.potential(&x.to_string(), *v)?;
    }
    Ok(b.build())
}
