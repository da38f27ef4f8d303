use super::{Graph, GraphKind};
use crate::error::{Error, Result};

/// Rooted regular tree: the root and every other vertex have `k` children.
///
/// Vertices are heap indices (root 0, children of `v` are `k v + 1 ..= k v + k`),
/// which bounds the usable depth to what fits in a `u64`.
#[derive(Debug, Clone, PartialEq)]
pub struct RegularTree {
    branching: u64,
    measure: f64,
    potential: f64,
}

impl RegularTree {
    pub fn new(branching: u64) -> Result<Self> {
        if branching < 2 {
            return Err(Error::InvalidConfig("tree branching must be at least 2".into()));
        }
        Ok(RegularTree { branching, measure: 1.0, potential: 0.0 })
    }

    pub fn with_measure(mut self, m: f64) -> Result<Self> {
        if !(m > 0.0) {
            return Err(Error::NonPositiveMeasure { vertex: "*".into(), value: m });
        }
        self.measure = m;
        Ok(self)
    }

    pub fn with_potential(mut self, c: f64) -> Result<Self> {
        if !(c >= 0.0) {
            return Err(Error::NegativePotential { vertex: "*".into(), value: c });
        }
        self.potential = c;
        Ok(self)
    }

    pub fn branching(&self) -> u64 {
        self.branching
    }

    pub fn root(&self) -> u64 {
        0
    }

    pub fn parent(&self, v: u64) -> Option<u64> {
        (v > 0).then(|| (v - 1) / self.branching)
    }

    pub fn depth(&self, mut v: u64) -> u32 {
        let mut d = 0;
        while let Some(p) = self.parent(v) {
            v = p;
            d += 1;
        }
        d
    }

    fn child(&self, v: u64, i: u64) -> u64 {
        v.checked_mul(self.branching)
            .and_then(|x| x.checked_add(i + 1))
            .expect("tree vertex index overflow: window deeper than u64 heap indexing allows")
    }
}

impl Graph for RegularTree {
    type Vertex = u64;

    fn kind(&self) -> GraphKind {
        GraphKind::RegularTree { branching: self.branching }
    }

    fn contains(&self, _: &u64) -> bool {
        true
    }

    fn neighbors(&self, v: &u64) -> Vec<(u64, f64)> {
        let mut out = Vec::with_capacity(self.branching as usize + 1);
        if let Some(p) = self.parent(*v) {
            out.push((p, 1.0));
        }
        for i in 0..self.branching {
            out.push((self.child(*v, i), 1.0));
        }
        out
    }

    fn potential(&self, _: &u64) -> f64 {
        self.potential
    }

    fn measure(&self, _: &u64) -> f64 {
        self.measure
    }

    /// `root`, or the dotted sequence of child indices from the root.
    fn encode(&self, v: &u64) -> String {
        if *v == 0 {
            return "root".into();
        }
        let mut digits = Vec::new();
        let mut cur = *v;
        while let Some(p) = self.parent(cur) {
            digits.push((cur - 1 - p * self.branching).to_string());
            cur = p;
        }
        digits.reverse();
        digits.join(".")
    }

    fn decode(&self, key: &str) -> Result<u64> {
        if key == "root" {
            return Ok(0);
        }
        let mut v = 0u64;
        for part in key.split('.') {
            let i: u64 = part.parse().map_err(|_| Error::UnknownVertex(key.to_string()))?;
            if i >= self.branching {
                return Err(Error::UnknownVertex(key.to_string()));
            }
            v = v
                .checked_mul(self.branching)
                .and_then(|x| x.checked_add(i + 1))
                .ok_or_else(|| Error::UnknownVertex(key.to_string()))?;
        }
        Ok(v)
    }

    fn weight_sum(&self, v: &u64) -> f64 {
        (self.branching + u64::from(*v > 0)) as f64
    }
}
