//! Delta-GLMB multi-target tracking.
//!
//! The filter maintains a mixture of hypotheses, each pairing a set of track
//! labels with an association history, a weight, and per-track Gaussian
//! densities. Each scan is processed by a single joint prediction-update step
//! that scores every surviving/birth track against every measurement and
//! truncates the exploding hypothesis set with one of two backends:
//!
//! - [`assignment`]: Murty's ranked-assignment enumeration over the cost
//!   matrix (deterministic, lowest-cost-first),
//! - [`gibbs`]: a Gibbs sampler over extended association vectors whose
//!   stationary law is the normalized hypothesis-weight distribution.
//!
//! [`scenario`] and [`ospa`] provide the simulation and evaluation harness
//! used by the CLI crate.

pub mod assignment;
pub mod assoc;
pub mod density;
pub mod error;
pub mod filter;
pub mod gaussian;
pub mod gibbs;
pub mod label;
pub mod model;
pub mod ospa;
pub mod scenario;

pub use density::{GlmbComponent, GlmbDensity};
pub use error::GlmbError;
pub use gaussian::GaussianDensity;
pub use label::Label;
pub use model::{BirthModel, LinearGaussianModel};
