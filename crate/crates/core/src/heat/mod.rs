//! Heat semigroup on windows, the time-integrated Green function, and the
//! heat-mass probe for stochastic completeness.

mod completeness;
mod lanczos;
mod quadrature;
mod uniformization;

pub use completeness::{
    completeness_probe, integral_defect, CompletenessConfig, CompletenessVerdict, HeatMassReport, IntegralDefect,
    ProbeMass,
};
pub use lanczos::{smallest_eigenvalue, SpectralEstimate};
pub use quadrature::{heat_green_quadrature, QuadratureConfig, QuadratureMethod, QuadratureResult};
pub use uniformization::{poisson_weights, semigroup_apply, uniformization_rate};
