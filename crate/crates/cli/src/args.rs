use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::graphs::{GraphSpec, WeightSpec};
use crate::report::Format;

#[derive(Debug, Parser)]
#[command(name = "graphpot", version, about = "Potential theory on infinite weighted graphs via finite exhaustions")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct GlobalArgs {
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// TOML settings file; flags override it.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Leave wall-clock timings out of the report.
    #[arg(long, global = true)]
    pub no_timings: bool,
    /// Exit with code 1 when a verdict is inconclusive.
    #[arg(long, global = true)]
    pub strict: bool,
    #[arg(long, global = true, env = "GRAPHPOT_THREADS")]
    pub threads: Option<usize>,
}

#[derive(Debug, Args)]
pub struct GraphArgs {
    /// lattice:<d>, tree:<k>, bd:<beta> or file:<path>.
    #[arg(long)]
    pub graph: GraphSpec,
    /// const:<v>, or pow:<gamma> for bd:<beta>.
    #[arg(long)]
    pub measure: Option<WeightSpec>,
    /// const:<v>, or pow:<gamma> for bd:<beta>.
    #[arg(long)]
    pub potential: Option<WeightSpec>,
    /// Root vertex key; `root` or `origin` picks the family default.
    #[arg(long, default_value = "root")]
    pub root: String,
    /// Comma-separated exhaustion radii; default doubles from the start
    /// radius up to the vertex cap.
    #[arg(long, value_delimiter = ',')]
    pub radii: Option<Vec<usize>>,
    #[arg(long)]
    pub max_vertices: Option<usize>,
    #[arg(long)]
    pub direct_threshold: Option<usize>,
    /// Relative residual target of the iterative solver.
    #[arg(long)]
    pub solver_tol: Option<f64>,
}

#[derive(Debug, Args)]
pub struct LimitArgs {
    /// Cauchy tolerance over the trailing windows.
    #[arg(long)]
    pub tol: Option<f64>,
    /// Divergence threshold.
    #[arg(long)]
    pub threshold: Option<f64>,
}

#[derive(Debug, Args)]
pub struct ClassifierArgs {
    #[arg(long)]
    pub ceiling: Option<f64>,
    #[arg(long)]
    pub floor: Option<f64>,
    #[arg(long)]
    pub cauchy_tol: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum BoundaryFunction {
    /// The constant function 1.
    One,
    /// Monopole `(L_K)^{-1} delta_root` on the largest window.
    Monopole,
    /// Equilibrium potential of the root on the largest window.
    Equilibrium,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Recurrence/transience verdict from capacity and Green function.
    Classify {
        #[command(flatten)]
        graph: GraphArgs,
        #[command(flatten)]
        classifier: ClassifierArgs,
    },
    /// Capacity of the root along the exhaustion.
    Capacity {
        #[command(flatten)]
        graph: GraphArgs,
        #[command(flatten)]
        limits: LimitArgs,
    },
    /// Green function G(x, y) along the exhaustion.
    Green {
        #[command(flatten)]
        graph: GraphArgs,
        #[command(flatten)]
        limits: LimitArgs,
        #[arg(long, default_value = "root")]
        x: String,
        #[arg(long, default_value = "root")]
        y: String,
    },
    /// Monopole at the root: energies and the energy identity.
    Monopole {
        #[command(flatten)]
        graph: GraphArgs,
        #[command(flatten)]
        limits: LimitArgs,
    },
    /// Heat mass (L + 1)^{-1} 1 at probe vertices.
    Heatmass {
        #[command(flatten)]
        graph: GraphArgs,
        #[command(flatten)]
        classifier: ClassifierArgs,
        /// Probe vertices; the root by default.
        #[arg(long, value_delimiter = ';')]
        probe: Vec<String>,
    },
    /// Monte Carlo visit counts against the visit-count series.
    Walk {
        #[command(flatten)]
        graph: GraphArgs,
        #[arg(long, default_value = "root")]
        x: String,
        /// Target vertex; defaults to the start.
        #[arg(long)]
        y: Option<String>,
        /// Window radius around the root.
        #[arg(long)]
        radius: usize,
        #[arg(long)]
        steps: Option<usize>,
        #[arg(long)]
        trials: Option<u64>,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Heat-kernel time integral against the visit-count series.
    Bridge {
        #[command(flatten)]
        graph: GraphArgs,
        #[arg(long, default_value = "root")]
        x: String,
        #[arg(long, default_value = "root")]
        y: String,
        /// Window radius around the root.
        #[arg(long)]
        radius: usize,
        #[arg(long)]
        tol: Option<f64>,
    },
    /// Boundary terms of R(u, delta_v) along the exhaustion.
    Boundary {
        #[command(flatten)]
        graph: GraphArgs,
        #[arg(long, value_enum, default_value_t = BoundaryFunction::One)]
        u: BoundaryFunction,
        /// Vertex carrying v = delta; the root by default.
        #[arg(long, default_value = "root")]
        v: String,
    },
    /// Runs every randomized identity check.
    Verify {
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        form_instances: Option<usize>,
        #[arg(long)]
        solver_instances: Option<usize>,
        #[arg(long)]
        quadrature_instances: Option<usize>,
        #[arg(long)]
        max_window: Option<usize>,
    },
    /// Writes the edge list of a ball.
    Gen {
        #[command(flatten)]
        graph: GraphArgs,
        #[arg(long)]
        radius: usize,
        /// Output file; the edge list goes to standard output otherwise.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Classify { .. } => "classify",
            Command::Capacity { .. } => "capacity",
            Command::Green { .. } => "green",
            Command::Monopole { .. } => "monopole",
            Command::Heatmass { .. } => "heatmass",
            Command::Walk { .. } => "walk",
            Command::Bridge { .. } => "bridge",
            Command::Boundary { .. } => "boundary",
            Command::Verify { .. } => "verify",
            Command::Gen { .. } => "gen",
        }
    }
}
