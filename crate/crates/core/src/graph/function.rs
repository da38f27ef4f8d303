use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

/// Anything that can be evaluated at a vertex.
pub trait Field<V> {
    fn at(&self, x: &V) -> f64;
}

impl<V, F: Fn(&V) -> f64> Field<V> for F {
    fn at(&self, x: &V) -> f64 {
        self(x)
    }
}

/// A finitely supported real function on the vertices. Zero entries are never
/// stored.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphFunction<V: Ord> {
    entries: BTreeMap<V, f64>,
}

impl<V: Ord> Default for GraphFunction<V> {
    fn default() -> Self {
        GraphFunction { entries: BTreeMap::new() }
    }
}

impl<V: Ord + Clone> GraphFunction<V> {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn delta(x: V) -> Self {
        let mut f = Self::zero();
        f.set(x, 1.0);
        f
    }

    pub fn get(&self, x: &V) -> f64 {
        self.entries.get(x).copied().unwrap_or(0.0)
    }

    pub fn set(&mut self, x: V, value: f64) {
        if value == 0.0 {
            self.entries.remove(&x);
        } else {
            self.entries.insert(x, value);
        }
    }

    pub fn add(&mut self, x: V, value: f64) {
        let v = self.get(&x) + value;
        self.set(x, v);
    }

    pub fn support(&self) -> impl Iterator<Item = &V> {
        self.entries.keys()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&V, f64)> {
        self.entries.iter().map(|(k, v)| (k, *v))
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn contains(&self, x: &V) -> bool {
        self.entries.contains_key(x)
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        self.iter().map(|(k, v)| (k.clone(), f(v))).collect()
    }

    pub fn scaled(&self, s: f64) -> Self {
        self.map(|v| v * s)
    }

    pub fn sup_norm(&self) -> f64 {
        self.entries.values().fold(0.0, |a, v| a.max(v.abs()))
    }
}

impl<V: Ord + Clone> FromIterator<(V, f64)> for GraphFunction<V> {
    fn from_iter<I: IntoIterator<Item = (V, f64)>>(iter: I) -> Self {
        let mut f = Self::zero();
        for (k, v) in iter {
            f.add(k, v);
        }
        f
    }
}

impl<V: Ord + Clone> Field<V> for GraphFunction<V> {
    fn at(&self, x: &V) -> f64 {
        self.get(x)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zeros_are_not_stored() {
        let mut f = GraphFunction::delta(3u64);
        f.add(3, -1.0);
        assert!(f.is_empty());
        f.set(4, 0.0);
        assert_eq!(f.len(), 0);
        let g: GraphFunction<u64> = [(1, 2.0), (1, -2.0), (2, 1.0)].into_iter().collect();
        assert_eq!(g.support().copied().collect::<Vec<_>>(), vec![2]);
    }
}
