//! Eulerian Galerkin simulator for swelling poro-viscoelastic solids.
//!
//! Everything numerical is generic over [`scalar::Real`]; the aliases at the
//! bottom of this file fix the scalar to `f64` for the common case.

pub mod audit;
pub mod error;
pub mod grid;
pub mod linalg;
pub mod material;
pub mod sampling;
pub mod scalar;
pub mod solver;
pub mod tensor;
pub mod transport;

pub use error::{Error, Result};
pub use scalar::Real;

pub type Tensor2F = tensor::Tensor2<f64>;
pub type Tensor3F = tensor::Tensor3<f64>;
pub type Model = material::MaterialModel<f64>;
pub type Domain = grid::BoxDomain<f64>;
pub type ScenarioF = solver::Scenario<f64>;
pub type SimulatorF = solver::Simulator<f64>;
pub type FieldStateF = solver::FieldState<f64>;
pub type LedgerRow = audit::EnergyLedger<f64>;
pub type Ledger = audit::LedgerHistory<f64>;
