//! The graph mini-language: `lattice:<d>`, `tree:<k>`, `bd:<beta>`,
//! `file:<path>`, plus measure and potential overrides.

use std::path::PathBuf;
use std::str::FromStr;

use graphpot::graph::{
    io, BirthDeath, FiniteGraph, FiniteGraphBuilder, Graph, Lattice, LatticePoint, RegularTree, VertexWeight,
};
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum GraphSpec {
    Lattice { dimension: usize },
    Tree { branching: u64 },
    BirthDeath { beta: f64 },
    File { path: PathBuf },
}

impl std::fmt::Display for GraphSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            GraphSpec::Lattice { dimension } => write!(f, "lattice:{dimension}"),
            GraphSpec::Tree { branching } => write!(f, "tree:{branching}"),
            GraphSpec::BirthDeath { beta } => write!(f, "bd:{beta}"),
            GraphSpec::File { path } => write!(f, "file:{}", path.display()),
        }
    }
}

impl FromStr for GraphSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let (family, arg) = s.split_once(':').ok_or_else(|| format!("expected <family>:<arg>, got {s:?}"))?;
        let bad = |what: &str| format!("{what} in graph spec {s:?}");
        match family {
            "lattice" => Ok(GraphSpec::Lattice { dimension: arg.parse().map_err(|_| bad("bad dimension"))? }),
            "tree" => Ok(GraphSpec::Tree { branching: arg.parse().map_err(|_| bad("bad branching"))? }),
            "bd" => Ok(GraphSpec::BirthDeath { beta: arg.parse().map_err(|_| bad("bad beta"))? }),
            "file" if !arg.is_empty() => Ok(GraphSpec::File { path: arg.into() }),
            _ => Err(bad("unknown family")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "value", rename_all = "snake_case")]
pub enum WeightSpec {
    Const(f64),
    Pow(f64),
}

impl FromStr for WeightSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let (kind, arg) = s.split_once(':').ok_or_else(|| format!("expected const:<v> or pow:<gamma>, got {s:?}"))?;
        let v: f64 = arg.parse().map_err(|_| format!("not a number in {s:?}"))?;
        match kind {
            "const" => Ok(WeightSpec::Const(v)),
            "pow" => Ok(WeightSpec::Pow(v)),
            _ => Err(format!("expected const:<v> or pow:<gamma>, got {s:?}")),
        }
    }
}

impl WeightSpec {
    fn vertex_weight(self) -> VertexWeight {
        match self {
            WeightSpec::Const(v) => VertexWeight::Constant(v),
            WeightSpec::Pow(g) => VertexWeight::Power(g),
        }
    }

    fn constant(self, what: &str) -> Result<f64, CliError> {
        match self {
            WeightSpec::Const(v) => Ok(v),
            WeightSpec::Pow(_) => Err(CliError::Usage(format!("{what} pow:<gamma> is only available for bd:<beta>"))),
        }
    }
}

pub enum AnyGraph {
    Lattice(Lattice),
    Tree(RegularTree),
    BirthDeath(BirthDeath),
    Finite(FiniteGraph),
}

/// Runs `$body` with `$g` bound to the concrete graph.
macro_rules! with_graph {
    ($any:expr, $g:ident => $body:expr) => {
        match $any {
            $crate::graphs::AnyGraph::Lattice($g) => $body,
            $crate::graphs::AnyGraph::Tree($g) => $body,
            $crate::graphs::AnyGraph::BirthDeath($g) => $body,
            $crate::graphs::AnyGraph::Finite($g) => $body,
        }
    };
}
pub(crate) use with_graph;

fn rebuild_finite(g: &FiniteGraph, measure: Option<f64>, potential: Option<f64>) -> Result<FiniteGraph, CliError> {
    let mut b = FiniteGraphBuilder::new();
    for x in g.vertices() {
        let key = g.encode(&x);
        b.vertex(&key);
        b.measure(&key, measure.unwrap_or_else(|| g.measure(&x)))?;
        let c = potential.unwrap_or_else(|| g.potential(&x));
        if c != 0.0 {
            b.potential(&key, c)?;
        }
    }
    for (x, y, w) in g.edges() {
        b.edge(&g.encode(&x), &g.encode(&y), w)?;
    }
    Ok(b.build())
}

pub fn build(spec: &GraphSpec, measure: Option<WeightSpec>, potential: Option<WeightSpec>) -> Result<AnyGraph, CliError> {
    Ok(match spec {
        GraphSpec::Lattice { dimension } => {
            let mut g = Lattice::new(*dimension)?;
            if let Some(m) = measure {
                g = g.with_measure(m.constant("--measure")?)?;
            }
            if let Some(c) = potential {
                g = g.with_potential(c.constant("--potential")?)?;
            }
            AnyGraph::Lattice(g)
        }
        GraphSpec::Tree { branching } => {
            let mut g = RegularTree::new(*branching)?;
            if let Some(m) = measure {
                g = g.with_measure(m.constant("--measure")?)?;
            }
            if let Some(c) = potential {
                g = g.with_potential(c.constant("--potential")?)?;
            }
            AnyGraph::Tree(g)
        }
        GraphSpec::BirthDeath { beta } => {
            let mut g = BirthDeath::new(*beta)?;
            if let Some(m) = measure {
                g = g.with_measure(m.vertex_weight())?;
            }
            if let Some(c) = potential {
                g = g.with_potential(c.vertex_weight())?;
            }
            AnyGraph::BirthDeath(g)
        }
        GraphSpec::File { path } => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))?;
            let g = io::parse_edge_list(&text)?;
            if g.is_empty() {
                return Err(CliError::Usage(format!("{} contains no vertices", path.display())));
            }
            let m = measure.map(|m| m.constant("--measure")).transpose()?;
            let c = potential.map(|c| c.constant("--potential")).transpose()?;
            AnyGraph::Finite(if m.is_some() || c.is_some() { rebuild_finite(&g, m, c)? } else { g })
        }
    })
}

/// Default root of each family: the origin, the tree root, state 0, or the
/// first vertex of a file.
pub trait DefaultRoot: Graph {
    fn default_root(&self) -> Self::Vertex;

    /// `root` and `origin` name the default root; anything else is decoded.
    fn vertex_arg(&self, key: &str) -> Result<Self::Vertex, CliError> {
        let v = if key == "root" || key == "origin" { self.default_root() } else { self.decode(key)? };
        self.check(&v)?;
        Ok(v)
    }
}

impl DefaultRoot for Lattice {
    fn default_root(&self) -> LatticePoint {
        LatticePoint::origin(self.dim())
    }
}

impl DefaultRoot for RegularTree {
    fn default_root(&self) -> u64 {
        self.root()
    }
}

impl DefaultRoot for BirthDeath {
    fn default_root(&self) -> u64 {
        0
    }
}

impl DefaultRoot for FiniteGraph {
    fn default_root(&self) -> usize {
        0
    }
}
