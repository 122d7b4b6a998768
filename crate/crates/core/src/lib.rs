//! Two-qubit pure dephasing under a super-Ohmic acoustic-phonon bath.
//!
//! Models a pair of identical semiconductor quantum dots, stacked a distance
//! `d` apart along the growth axis, whose excitonic qubits couple to bulk LA
//! phonons through the deformation potential. The bath exchanges no energy
//! with the qubits; it only scrambles phases. Because the two dots see the
//! same phonon field up to `exp(+-i k_z d / 2)` factors, every bath sum
//! collapses onto two scalar spectral densities, and the exact reduced
//! dynamics is a five-operator Kraus channel plus a diagonal unitary.
//!
//! The crate builds those spectral densities for a given geometry
//! ([`spectral`]), evaluates the dephasing kernels ([`kernel`]), applies the
//! channel to arbitrary two-qubit states ([`channel`]), tracks Wootters
//! concurrence and entanglement of formation ([`entanglement`]), and wraps
//! the physics scenarios of interest: disentanglement times, critical
//! temperatures, temperature and distance sweeps ([`experiments`]). Two
//! independent cross-checks live in [`oracles`]: a Monte-Carlo evaluation of
//! the decoherence exponents straight from the 3D mode sum, and an exact
//! few-mode diagonalization with no dephasing ansatz.
//!
//! Units: lengths in nm, times in ps, energies in meV, temperatures in K.

pub mod channel;
pub mod entanglement;
pub mod error;
pub mod experiments;
pub mod kernel;
pub mod linalg;
pub mod oracles;
pub mod params;
pub mod quad;
pub mod spectral;

pub use channel::{ChannelOps, TwoQubitState};
pub use error::{Error, Result};
pub use experiments::{EvolutionRecord, InitialState, SweepAxis, SweepPoint, SweepRecord};
pub use kernel::KernelEval;
pub use params::{DotGeometry, MaterialParams, PhysicalConstants, RunConfig};
pub use spectral::SpectralTable;
