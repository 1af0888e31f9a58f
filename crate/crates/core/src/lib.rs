//! Simulation and optimization of a two-mode optical interferometer with
//! photon loss in each arm.
//!
//! The forward model takes an `N`-photon input `Σ c_k |N-k, k⟩`, applies the
//! unknown phase to arm A, scatters photons out of both arms, mixes the modes
//! on a final 50-50 beam splitter and counts photons at both outputs. The
//! classical Fisher information of that count distribution bounds the phase
//! uncertainty, and [`optimize`] searches the input amplitudes for the state
//! that maximizes it at a given loss.

pub mod benchmarks;
pub mod channels;
pub mod error;
pub mod fock;
pub mod metrology;
pub mod optimize;
pub mod quasi_newton;
pub mod simplex;

pub use error::{Error, Result};
pub use fock::{LossSpec, PureState};
