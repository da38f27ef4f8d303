use crate::error::Result;
use crate::graph::{Graph, GraphFunction, Window};

use super::linear::SymmetricSystem;

/// Dirichlet restriction `L_K` of the formal Laplacian to a finite window.
///
/// The degree is taken over the whole graph, so edges leaving `K` act as
/// absorption: `(L_K u)(x) = (sum_{y in V} b(x,y) + c(x)) u(x)/m(x)
/// - sum_{y in K} b(x,y) u(y)/m(x)`.
#[derive(Debug, Clone)]
pub struct RestrictedOperator<V> {
    window: Window<V>,
    measure: Vec<f64>,
    /// `sum_{y in V} b(x, y)`.
    weight_sum: Vec<f64>,
    potential: Vec<f64>,
    /// `sum_{y not in K} b(x, y)`.
    exterior: Vec<f64>,
    /// In-window edges, sorted by index.
    adjacency: Vec<Vec<(usize, f64)>>,
}

pub fn restrict<G: Graph>(g: &G, window: &Window<G::Vertex>) -> Result<RestrictedOperator<G::Vertex>> {
    let n = window.len();
    let mut op = RestrictedOperator {
        window: window.clone(),
        measure: Vec::with_capacity(n),
        weight_sum: Vec::with_capacity(n),
        potential: Vec::with_capacity(n),
        exterior: Vec::with_capacity(n),
        adjacency: Vec::with_capacity(n),
    };
    for x in window.iter() {
        g.check(x)?;
        let mut row = Vec::new();
        let mut total = 0.0;
        let mut outside = 0.0;
        for (y, w) in g.neighbors(x) {
            total += w;
            match window.index_of(&y) {
                Some(j) => row.push((j, w)),
                None => outside += w,
            }
        }
        row.sort_by_key(|&(j, _)| j);
        op.measure.push(g.measure(x));
        op.weight_sum.push(total);
        op.potential.push(g.potential(x));
        op.exterior.push(outside);
        op.adjacency.push(row);
    }
    Ok(op)
}

impl<V: Clone + Eq + std::hash::Hash + Ord> RestrictedOperator<V> {
    pub fn len(&self) -> usize {
        self.measure.len()
    }

    pub fn is_empty(&self) -> bool {
        self.measure.is_empty()
    }

    pub fn window(&self) -> &Window<V> {
        &self.window
    }

    pub fn measure(&self) -> &[f64] {
        &self.measure
    }

    pub fn potential(&self) -> &[f64] {
        &self.potential
    }

    /// `sum_{y in V} b(x, y) + c(x)`, the full generalised degree.
    pub fn degree(&self, i: usize) -> f64 {
        self.weight_sum[i] + self.potential[i]
    }

    pub fn exterior_weight(&self, i: usize) -> f64 {
        self.exterior[i]
    }

    pub fn neighbors(&self, i: usize) -> &[(usize, f64)] {
        &self.adjacency[i]
    }

    pub fn diagonal(&self, i: usize) -> f64 {
        self.degree(i) / self.measure[i]
    }

    pub fn entry(&self, i: usize, j: usize) -> f64 {
        if i == j {
            return self.diagonal(i);
        }
        match self.adjacency[i].binary_search_by_key(&j, |&(k, _)| k) {
            Ok(p) => -self.adjacency[i][p].1 / self.measure[i],
            Err(_) => 0.0,
        }
    }

    /// Indices of vertices with an edge leaving the window.
    pub fn boundary(&self) -> Vec<usize> {
        (0..self.len()).filter(|&i| self.exterior[i] > 0.0).collect()
    }

    pub fn interior(&self) -> Vec<usize> {
        (0..self.len()).filter(|&i| self.exterior[i] == 0.0).collect()
    }

    pub fn apply(&self, u: &[f64]) -> Vec<f64> {
        self.apply_shifted(u, 0.0)
    }

    /// `(L_K + alpha) u`.
    pub fn apply_shifted(&self, u: &[f64], alpha: f64) -> Vec<f64> {
        (0..self.len())
            .map(|i| {
                let off: f64 = self.adjacency[i].iter().map(|&(j, w)| w * u[j]).sum();
                (self.degree(i) * u[i] - off) / self.measure[i] + alpha * u[i]
            })
            .collect()
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let n = self.len();
        let mut a = vec![vec![0.0; n]; n];
        for i in 0..n {
            a[i][i] = self.diagonal(i);
            for &(j, w) in &self.adjacency[i] {
                a[i][j] = -w / self.measure[i];
            }
        }
        a
    }

    /// `M (L_K + alpha + shift)` as a symmetric matrix, where `shift` is an
    /// optional nonnegative multiplication operator.
    pub fn system(&self, alpha: f64, shift: Option<&[f64]>) -> SymmetricSystem {
        let n = self.len();
        let mut diag = Vec::with_capacity(n);
        let mut excess = Vec::with_capacity(n);
        for i in 0..n {
            let extra = alpha + shift.map_or(0.0, |s| s[i]);
            let mass = extra * self.measure[i];
            diag.push(self.degree(i) + mass);
            excess.push(self.exterior[i] + self.potential[i] + mass);
        }
        SymmetricSystem::new(diag, self.adjacency.clone(), excess)
    }

    pub fn vector(&self, f: &GraphFunction<V>) -> Vec<f64> {
        self.window.iter().map(|x| f.get(x)).collect()
    }

    pub fn function(&self, u: &[f64]) -> GraphFunction<V> {
        self.window.iter().cloned().zip(u.iter().copied()).collect()
    }

    pub fn delta(&self, i: usize) -> Vec<f64> {
        let mut e = vec![0.0; self.len()];
        e[i] = 1.0;
        e
    }

    /// `<u, v>_m` over the window.
    pub fn inner(&self, u: &[f64], v: &[f64]) -> f64 {
        u.iter().zip(v).zip(&self.measure).map(|((a, b), m)| a * b * m).sum()
    }

    pub fn norm(&self, u: &[f64]) -> f64 {
        self.inner(u, u).sqrt()
    }

    /// `Q(u)` of the zero extension of `u` outside the window. Involves only
    /// `b` and `c`, never `m`.
    pub fn extension_energy(&self, u: &[f64]) -> f64 {
        let mut total = 0.0;
        for i in 0..self.len() {
            for &(j, w) in &self.adjacency[i] {
                if i < j {
                    let d = u[i] - u[j];
                    total += w * d * d;
                }
            }
            total += (self.exterior[i] + self.potential[i]) * u[i] * u[i];
        }
        total
    }

    pub fn edge_count(&self) -> usize {
        self.adjacency.iter().map(Vec::len).sum::<usize>() / 2
    }
}
