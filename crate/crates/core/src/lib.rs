//! Dephasing of spatial-qubit matter-wave interferometers caused by the
//! electromagnetic field of passing environmental particles.
//!
//! A free-flying charge or dipole with impact parameter `b` and speed `v`
//! exerts a fluctuating acceleration on the two arms of an interferometer.
//! The run-to-run variance of the accumulated relative phase is
//!
//! ```text
//! Γₙ = (1/2π) (m/ħ)² ∫ S_aa(ω) F(ω) dω     over ω ∈ [ω_min, ∞)
//! ```
//!
//! where `S_aa` is the acceleration-noise power spectral density of the
//! chosen interaction channel ([`channels`]), `F` is the transfer function of
//! the interferometer trajectory ([`trajectory`]) and `ω_min = 2π/τ` is the
//! frequency resolution of a single run.  [`dephasing`] evaluates the
//! integral, [`ensemble`] averages the PSD over a dilute-gas environment and
//! [`witness`] propagates the result into two-qubit entanglement-witness
//! expectations.  [`oracle`] provides a slow, independent time-domain Monte
//! Carlo estimate of the same variance used for cross-validation.

pub mod channels;
pub mod config;
pub mod constants;
pub mod dephasing;
pub mod ensemble;
pub mod error;
pub mod oracle;
pub mod quad;
pub mod specfun;
pub mod trajectory;
pub mod witness;

pub use channels::{ChannelParams, SpectrumValue};
pub use config::{Encounter, EnvironmentParticle, InteractionChannel, InterferometerConfig};
pub use dephasing::{DephasingResult, QuadratureSettings};
pub use ensemble::{GasEnsemble, VelocityModel};
pub use error::Error;

/// Crate result alias.
pub type Result<T> = std::result::Result<T, Error>;
