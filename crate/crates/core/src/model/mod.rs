//! Shared vocabulary: forcing terms, initial profiles, jets and function handles.

mod function;
mod jet;
pub mod poly;
mod pressure;
mod profile;

use thiserror::Error;

pub use function::FunctionHandle;
pub use jet::Jet;
pub use pressure::{pressure_at, Forcing, PressureSpec};
pub use profile::{profile_jet, ExpSegment, Profile};

/// Default Taylor order for jets.
pub const DEFAULT_JET_ORDER: usize = 32;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("unsupported variant: {0}")]
    UnsupportedVariant(&'static str),
    #[error("profile is not smooth at x = {x}")]
    Kink { x: f64 },
    #[error("invalid profile: {0}")]
    InvalidProfile(String),
    #[error("invalid pressure: {0}")]
    InvalidPressure(String),
    #[error("invalid function: {0}")]
    InvalidFunction(String),
    #[error("u = {u} is outside the function's domain")]
    OutOfDomain { u: f64 },
}
