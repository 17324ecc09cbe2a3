//! Quasistatic finite-element solver for cyclic-hardening plasticity with
//! Cosserat microrotations, in the viscous (Yosida/Perzyna) regularization,
//! together with a laboratory of local-energy regularity diagnostics:
//! ball/annulus Dirichlet energies, hole-filling ratios, dyadic decay
//! iterations, and Hölder exponent estimators in space and time.
//!
//! The core is generic over the floating-point scalar through [`scalar::Real`];
//! the aliases at the crate root fix `f64`, which is what the CLI binary uses.

pub mod constitutive;
pub mod error;
pub mod grid_fem;
pub mod scalar;
pub mod tensor3;

pub use error::{Error, Result};

/// f64 tensor.
pub type Mat3 = tensor3::Mat3<f64>;
/// f64 vector.
pub type Vec3 = tensor3::Vec3<f64>;
/// f64 material constants.
pub type MaterialParams = constitutive::MaterialParams<f64>;
/// f64 internal-variable pair.
pub type LocalState = constitutive::LocalState<f64>;
/// f64 mesh.
pub type Mesh = grid_fem::Mesh<f64>;
/// f64 nodal field.
pub type FieldVec = grid_fem::FieldVec<f64>;
/// f64 assembled system.
pub type SparseSystem = grid_fem::SparseSystem<f64>;
