use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("edge {x} -- {y} has non-positive weight {weight}")]
    NonPositiveWeight { x: String, y: String, weight: f64 },
    #[error("vertex {vertex} has non-positive measure {value}")]
    NonPositiveMeasure { vertex: String, value: f64 },
    #[error("vertex {vertex} has negative potential {value}")]
    NegativePotential { vertex: String, value: f64 },
    #[error("self-loop at vertex {0}")]
    SelfLoop(String),
    #[error("duplicate edge {x} -- {y}")]
    DuplicateEdge { x: String, y: String },
    #[error("edge {x} -- {y} given with conflicting weights {forward} and {backward}")]
    AsymmetricInput { x: String, y: String, forward: f64, backward: f64 },
    #[error("unknown vertex {0}")]
    UnknownVertex(String),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("vertices {x} and {y} are not connected inside the window")]
    Disconnected { x: String, y: String },
    #[error("window is not connected ({components} components)")]
    DisconnectedWindow { components: usize },
    #[error("vertex {0} is not on the window boundary")]
    NotBoundaryVertex(String),
    #[error("clamp range [{lo}, {hi}] must contain 0")]
    InvalidClampRange { lo: f64, hi: f64 },
    #[error("support of v does not reach the interior of the first window")]
    WindowTooSmall,
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("system is singular: no absorption in some window component")]
    SingularSystem,
    #[error("iterative solver did not converge after {iterations} iterations (relative residual {residual:e})")]
    NonConvergence { iterations: usize, residual: f64 },
    #[error("sequence violates declared monotonicity at index {index}")]
    NotMonotone { index: usize },
    #[error("random-walk operations need c = 0 on the window (vertex {0} has c > 0)")]
    PotentialPresent(String),
    #[error("operation needs unit measure (vertex {0} has m != 1)")]
    NonUnitMeasure(String),
    #[error("uniformization rate * time = {0:e} exceeds the configured cap; subdivide t")]
    TimeOverflow(f64),
}

impl Error {
    /// Solver-side failures, as opposed to bad input.
    pub fn is_solver_failure(&self) -> bool {
        matches!(
            self,
            Error::SingularSystem
                | Error::NonConvergence { .. }
                | Error::NotMonotone { .. }
                | Error::TimeOverflow(_)
        )
    }

    pub fn code(&self) -> &'static str {
        match self {
            Error::NonPositiveWeight { .. } => "non_positive_weight",
            Error::NonPositiveMeasure { .. } => "non_positive_measure",
            Error::NegativePotential { .. } => "negative_potential",
            Error::SelfLoop(_) => "self_loop",
            Error::DuplicateEdge { .. } => "duplicate_edge",
            Error::AsymmetricInput { .. } => "asymmetric_input",
            Error::UnknownVertex(_) => "unknown_vertex",
            Error::Parse { .. } => "parse_error",
            Error::Disconnected { .. } => "disconnected",
            Error::DisconnectedWindow { .. } => "disconnected_window",
            Error::NotBoundaryVertex(_) => "not_boundary_vertex",
            Error::InvalidClampRange { .. } => "invalid_clamp_range",
            Error::WindowTooSmall => "window_too_small",
            Error::InvalidConfig(_) => "invalid_config",
            Error::SingularSystem => "singular_system",
            Error::NonConvergence { .. } => "non_convergence",
            Error::NotMonotone { .. } => "not_monotone",
            Error::PotentialPresent(_) => "potential_present",
            Error::NonUnitMeasure(_) => "non_unit_measure",
            Error::TimeOverflow(_) => "time_overflow",
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
