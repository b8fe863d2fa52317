//! Quasi-local cutoff regularization for scalar fields on discrete manifolds
//! with boundary.
//!
//! The crate assembles Dirichlet operators on weighted graphs, derives their
//! Green's functions, Poisson kernels and Dirichlet-to-Neumann operators,
//! regularizes propagators with averaging kernels, expands the effective
//! action perturbatively, and checks that the regularized theory glues along
//! an interface.

pub mod averaging;
pub mod error;
pub mod gluing;
pub mod green;
pub mod mesh;
pub mod operator;
pub mod perturbation;
pub mod presets;
pub mod quadrature;
pub mod report;

pub use error::{Error, Result};
pub use mesh::{Cut, Edge, Mesh, NodeRole, ProfileSpec, Side};
pub use operator::{OperatorMatrix, OperatorSpec};
pub use report::{Report, VerificationRecord};
