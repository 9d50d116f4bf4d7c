//! Readout of a flux qubit by a driven quantum Duffing oscillator.
//!
//! The detector is a SQUID operated as a weakly nonlinear oscillator; in the
//! frame rotating with the drive it is described by an RWA Hamiltonian whose
//! quasienergy states carry a Floquet-Markov master equation. From its
//! stationary state and its spectral decomposition this crate computes the
//! response amplitude, the qubit population difference, the discrimination
//! power, the measurement-induced relaxation rate, the measurement time and
//! the measurement efficiency.
//!
//! Units: ħ = k_B = 1 and the detector frequency Ω = 1. Displacements are in
//! units of the zero-point amplitude χ0.

pub mod circuit;
pub mod config;
pub mod error;
pub mod hilbert;
pub mod linalg;
pub mod liouvillian;
pub mod metrics;
pub mod pipeline;
pub mod propagate;
pub mod rwa;
pub mod spectra;
pub mod steady;
pub mod sweep;

pub use circuit::{
    map_circuit_to_model, reference_parameter_sets, parameter_set, CircuitMapping, CircuitParams,
    ModelParams, QuarticConvention, QubitLevel,
};
pub use error::{Error, Result};
pub use hilbert::HilbertSpace;
pub use liouvillian::{
    build_rate_tensor, fourier_components, planck_weight, FourierComponents, Liouvillian,
    LiouvillianEigen, PlanckWeight, RateConvention, RateOptions,
};
pub use pipeline::{QubitMode, SolveOptions};
pub use rwa::{build_rwa_hamiltonian, quasienergy_spectrum, QuasiSpectrum, RwaHamiltonian};
pub use steady::{population_difference, response_amplitude, steady_state, SteadyState};
