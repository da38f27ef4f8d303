use serde::{Deserialize, Serialize};
use smallvec::SmallVec;

use super::{Graph, GraphKind};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct LatticePoint(pub SmallVec<[i64; 4]>);

impl LatticePoint {
    pub fn new(coords: &[i64]) -> Self {
        LatticePoint(SmallVec::from_slice(coords))
    }

    pub fn origin(dim: usize) -> Self {
        LatticePoint(SmallVec::from_elem(0, dim))
    }

    pub fn l1_norm(&self) -> i64 {
        self.0.iter().map(|c| c.abs()).sum()
    }
}

/// The integer lattice `Z^d` with nearest-neighbour edges.
#[derive(Debug, Clone, PartialEq)]
pub struct Lattice {
    dim: usize,
    weight: f64,
    measure: f64,
    potential: f64,
}

impl Lattice {
    pub fn new(dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidConfig("lattice dimension must be at least 1".into()));
        }
        Ok(Lattice { dim, weight: 1.0, measure: 1.0, potential: 0.0 })
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

    pub fn dim(&self) -> usize {
        self.dim
    }
}

impl Graph for Lattice {
    type Vertex = LatticePoint;

    fn kind(&self) -> GraphKind {
        GraphKind::Lattice { dimension: self.dim }
    }

    fn contains(&self, x: &LatticePoint) -> bool {
        x.0.len() == self.dim
    }

    fn neighbors(&self, x: &LatticePoint) -> Vec<(LatticePoint, f64)> {
        let mut out = Vec::with_capacity(2 * self.dim);
        for axis in 0..self.dim {
            for step in [-1, 1] {
                let mut y = x.clone();
                y.0[axis] += step;
                out.push((y, self.weight));
            }
        }
        out
    }

    fn potential(&self, _: &LatticePoint) -> f64 {
        self.potential
    }

    fn measure(&self, _: &LatticePoint) -> f64 {
        self.measure
    }

    fn encode(&self, x: &LatticePoint) -> String {
        x.0.iter().map(|c| c.to_string()).collect::<Vec<_>>().join(",")
    }

    fn decode(&self, key: &str) -> Result<LatticePoint> {
        let coords: Result<SmallVec<[i64; 4]>> = key
            .split(',')
            .map(|s| s.trim().parse::<i64>().map_err(|_| Error::UnknownVertex(key.to_string())))
            .collect();
        let p = LatticePoint(coords?);
        if p.0.len() != self.dim {
            return Err(Error::UnknownVertex(key.to_string()));
        }
        Ok(p)
    }

    fn weight_sum(&self, _: &LatticePoint) -> f64 {
        2.0 * self.dim as f64 * self.weight
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn codec_round_trip() {
        let g = Lattice::new(3).unwrap();
        let p = LatticePoint::new(&[1, -2, 0]);
        assert_eq!(g.encode(&p), "1,-2,0");
        assert_eq!(g.decode("1,-2,0").unwrap(), p);
        assert!(g.decode("1,2").is_err());
        assert!(g.decode("a,b,c").is_err());
    }

    #[test]
    fn neighbours_are_unit_steps() {
        let g = Lattice::new(2).unwrap();
        let nb = g.neighbors(&LatticePoint::origin(2));
        assert_eq!(nb.len(), 4);
        assert!(nb.iter().all(|(p, w)| p.l1_norm() == 1 && *w == 1.0));
    }
}
