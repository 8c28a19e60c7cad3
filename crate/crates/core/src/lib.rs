//! Exact computation of the basis `{g, h}` of weight-3/2 cusp forms of
//! level `4N` attached to a rational weight-2 newform of odd square-free
//! level `N`, through Brandt modules of definite quaternion algebras.

pub mod brandt;
pub mod config;
pub mod error;
pub mod lattice;
pub mod lift;
pub mod linalg;
pub mod numth;
pub mod pipeline;
pub mod quat;
pub mod theta;

pub use brandt::{BrandtMatrix, BrandtModule, EigenformData, IdealClassSet};
pub use config::{JobConfig, OutputFormat, Selector};
pub use error::{Error, Result, EXIT_COMPUTATION, EXIT_CONFIG, EXIT_OK, EXIT_ZERO_FORM};
pub use lattice::{Ideal, Lattice4, Order};
pub use lift::LiftProfile;
pub use pipeline::{cmd_basis, cmd_brandt, cmd_localfactors, cmd_theta, compute_basis, Basis};
pub use quat::{Quaternion, QuaternionAlgebra};
pub use theta::QExpansion;
