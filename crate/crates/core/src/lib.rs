//! Generalized manifold–metric pairs: (U,L)-rank functional metric tensors
//! over real, complex and quaternion codomains, their induced distance
//! functionals, and property checks.

pub mod catalog;
pub mod chart;
pub mod checker;
pub mod cli;
pub mod entropy;
pub mod error;
pub mod expr;
pub mod geodesic;
pub mod hessian;
pub mod maps;
pub mod sampling;
pub mod scalar;
pub mod tensor;

pub use chart::{Axis, Chart, Role};
pub use error::{Error, Result};
pub use expr::{Expr, Params, Scope};
pub use scalar::{Quaternion, Scalar, Tag};
pub use tensor::{ComponentTable, MetricSpec, Symmetry, TensorField, TensorSpec};
