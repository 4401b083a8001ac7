//! Numerical laboratory for Loewner growth driven by boundary Gaussian
//! multiplicative chaos on the unit disk.
//!
//! The crate is organised bottom-up:
//!
//! - [`spectral`]: trigonometric polynomials on the circle, harmonic
//!   extension, conjugation, Dirichlet-to-Neumann, disk test functions.
//! - [`fields`]: boundary trace sampling, Green's functions, bulk
//!   covariances, Gaussian identities and zero-mode integration.
//! - [`gmc`]: chaos measures on the circle and the inverse map.
//! - [`loewner`]: Loewner-Kufarev flows and a nearly-circular mapper.
//! - [`kernels`]: the Loewner vector field, the transport operator `D_mu`,
//!   the boundary kernel `V_p` and the localization identities.
//! - [`generator`]: drift, diffusion, invariance and Dirichlet-form checks.
//! - [`dynamics`]: square-root diffusion of the chaos measure and the
//!   Ornstein-Uhlenbeck baseline.
//! - [`cli`]: suites, configuration and report writing.

pub mod bump;
pub mod cli;
pub mod dynamics;
pub mod error;
pub mod fields;
pub mod generator;
pub mod gmc;
pub mod kernels;
pub mod loewner;
pub mod mc;
pub mod quad;
pub mod spectral;
pub mod tolerances;

pub use error::{Error, Result};
pub use spectral::{BoundaryField, Circle, DiskTestFunction, PolarGrid};
