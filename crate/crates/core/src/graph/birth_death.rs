use super::{Graph, GraphKind, VertexWeight};
use crate::error::{Error, Result};

/// Birth-death chain on `{0, 1, 2, ...}` with `b(n, n+1) = (n+1)^beta`.
#[derive(Debug, Clone, PartialEq)]
pub struct BirthDeath {
    beta: f64,
    measure: VertexWeight,
    potential: VertexWeight,
}

impl BirthDeath {
    pub fn new(beta: f64) -> Result<Self> {
        if !(beta >= 0.0) || !beta.is_finite() {
            return Err(Error::InvalidConfig(format!("birth-death exponent must be >= 0, got {beta}")));
        }
        Ok(BirthDeath {
            beta,
            measure: VertexWeight::Constant(1.0),
            potential: VertexWeight::Constant(0.0),
        })
    }

    pub fn with_measure(mut self, m: VertexWeight) -> Result<Self> {
        if let VertexWeight::Constant(v) = m {
            if !(v > 0.0) {
                return Err(Error::NonPositiveMeasure { vertex: "*".into(), value: v });
            }
        }
        self.measure = m;
        Ok(self)
    }

    pub fn with_potential(mut self, c: VertexWeight) -> Result<Self> {
        if let VertexWeight::Constant(v) = c {
            if !(v >= 0.0) {
                return Err(Error::NegativePotential { vertex: "*".into(), value: v });
            }
        }
        self.potential = c;
        Ok(self)
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    /// `b(n, n + 1)`.
    pub fn rate(&self, n: u64) -> f64 {
        ((n + 1) as f64).powf(self.beta)
    }
}

impl Graph for BirthDeath {
    type Vertex = u64;

    fn kind(&self) -> GraphKind {
        GraphKind::BirthDeath { beta: self.beta }
    }

    fn contains(&self, _: &u64) -> bool {
        true
    }

    fn neighbors(&self, n: &u64) -> Vec<(u64, f64)> {
        let mut out = Vec::with_capacity(2);
        if *n > 0 {
            out.push((n - 1, self.rate(n - 1)));
        }
        out.push((n + 1, self.rate(*n)));
        out
    }

    fn potential(&self, n: &u64) -> f64 {
        self.potential.eval_index(*n)
    }

    fn measure(&self, n: &u64) -> f64 {
        self.measure.eval_index(*n)
    }

    fn encode(&self, n: &u64) -> String {
        n.to_string()
    }

    fn decode(&self, key: &str) -> Result<u64> {
        key.trim().parse().map_err(|_| Error::UnknownVertex(key.to_string()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::degree;

    #[test]
    fn rates_and_degree() {
        let g = BirthDeath::new(3.0).unwrap();
        assert_eq!(degree(&g, &0).unwrap(), 1.0);
        assert_eq!(g.neighbors(&2), vec![(1, 8.0), (3, 27.0)]);
        let flat = BirthDeath::new(0.0).unwrap();
        assert_eq!(degree(&flat, &5).unwrap(), 2.0);
    }

    #[test]
    fn power_measure() {
        let g = BirthDeath::new(1.0).unwrap().with_measure(VertexWeight::Power(2.0)).unwrap();
        assert_eq!(g.measure(&2), 9.0);
    }
}
