//! Simulation of photon generation and entanglement in optical resonators
//! with a periodically modulated refractive index, including coupling to a
//! Markovian thermal bath.
//!
//! The library covers:
//! - periodic index modulations and the coefficient functions they induce
//!   ([`modulation`]),
//! - Floquet analysis of the associated Hill equation ([`floquet`]),
//! - Gaussian states, symplectic spectra and logarithmic negativity
//!   ([`gaussian`]),
//! - open-system evolution of linear (one-mode) and ring (two-mode)
//!   cavities, plus closed-form propagators ([`dynamics`]),
//! - long-time closed-form observables ([`asymptotics`]).
//!
//! All quantities are expressed in natural units of the unmodulated vacuum
//! mode frequency, with vacuum quadrature variance 1/4.

pub mod asymptotics;
pub mod dynamics;
pub mod floquet;
pub mod gaussian;
pub mod modulation;
pub mod ode;
pub mod quad;
mod scalar;

pub use scalar::Scalar;

/// Default scalar type for concrete use.
pub type Real = f64;

pub type ModulationProfile64 = modulation::ModulationProfile<Real>;
pub type MonodromyResult64 = floquet::MonodromyResult<Real>;
pub type GaussianState64 = gaussian::GaussianState<Real>;
pub type BathSpec64 = dynamics::BathSpec<Real>;
pub type EvolutionTrace64 = dynamics::EvolutionTrace<Real>;
pub type AsymptoticParams64 = asymptotics::AsymptoticParams<Real>;

/// Library-wide error type.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid profile: {0}")]
    InvalidProfile(String),
    #[error("invalid input: {0}")]
    Domain(String),
    #[error("integration failed: {0}")]
    Integration(String),
    #[error("quadrature failed: {0}")]
    Quadrature(String),
    #[error("invalid covariance: {0}")]
    InvalidCovariance(String),
    #[error("uncertainty principle violated at t = {t}: nu_min = {nu_min}")]
    UncertaintyViolation { t: f64, nu_min: f64 },
    #[error("no parametric resonance (mu = 0): occurrence time is unbounded")]
    NoResonance,
}

pub type Result<T> = std::result::Result<T, Error>;
