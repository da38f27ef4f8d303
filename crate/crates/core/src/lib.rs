//! Potential theory on infinite weighted graphs, computed through finite
//! exhaustions.
//!
//! Every quantity on an infinite graph (capacity, Green function, heat mass,
//! visit counts) is obtained as a monotone limit of the same quantity on
//! nested finite windows with an absorbing (Dirichlet) exterior. The modules
//! follow that structure:
//!
//! * [`graph`]: lazy graph families, explicit finite graphs, windows;
//! * [`forms`]: energy, formal Laplacian, Green's formula, boundary terms;
//! * [`exhaustion`]: windows, the restricted operator and its solvers;
//! * [`potential`]: capacity, Green function, monopoles, classification;
//! * [`heat`]: heat semigroup, time-integrated Green function, heat mass;
//! * [`random_walk`]: transition powers and Monte Carlo visit counts;
//! * [`verification`]: randomized identity checks over all of the above.

// `!(x > 0.0)` is used on purpose: it also rejects NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod exhaustion;
pub mod forms;
pub mod graph;
pub mod heat;
pub mod potential;
pub mod random_walk;
pub mod verification;

pub use error::{Error, Result};
