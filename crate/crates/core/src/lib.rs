//! Solvers and checks for the driven Euler–Monge equation `u_t = u·u_x + g`.

pub mod lambertw;
pub mod model;
pub mod numeric;
pub mod series_engine;
pub mod implicit_engine;
pub mod characteristics;
pub mod extradim;
pub mod bateman;
pub mod quantum;

pub use bateman::BatemanError;
pub use characteristics::{CharError, FrontCurve, FrontSample, ShockFit};
pub use extradim::{BiJet, DoubledField, ExtraError, Generator, SolutionHandle};
pub use implicit_engine::{BranchRoot, ImplicitError, ImplicitRelation};
pub use lambertw::{lambert_w, Branch, LambertError};
pub use model::{Forcing, FunctionHandle, Jet, ModelError, PressureSpec, Profile};
pub use quantum::{QuantumError, WaveSpec};
pub use series_engine::{SeriesError, TimeSeries};

/// Any error raised by the solvers.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("lambertw: {0}")]
    Lambert(#[from] LambertError),
    #[error("model: {0}")]
    Model(#[from] ModelError),
    #[error("series_engine: {0}")]
    Series(#[from] SeriesError),
    #[error("implicit_engine: {0}")]
    Implicit(#[from] ImplicitError),
    #[error("characteristics: {0}")]
    Characteristics(#[from] CharError),
    #[error("extradim: {0}")]
    Extradim(#[from] ExtraError),
    #[error("bateman: {0}")]
    Bateman(#[from] BatemanError),
    #[error("quantum: {0}")]
    Quantum(#[from] QuantumError),
}
