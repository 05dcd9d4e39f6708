//! Simulation core for a periodically driven, dissipative two-site boson
//! model: quantum-jump trajectory unraveling, trajectory-pair Lyapunov
//! exponent estimation, classical mean-field reference dynamics, and a
//! deterministic parameter-sweep harness.

pub mod error;
pub mod fock;
pub mod linalg;
pub mod lyapunov;
pub mod meanfield;
pub mod model;
pub mod rng;
pub mod sweep;
pub mod trajectory;

pub use error::{CoreError, Result};
pub use fock::{OperatorSet, StateVector};
pub use model::ModelParams;
