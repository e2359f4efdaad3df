//! Quantum simulator for a hybrid device made of a two-level emitter coupled
//! to two lossy bosonic nanoantenna modes.
//!
//! The crate covers the full chain from classical spectra to quantum
//! observables:
//!
//! * [`spectra`] — two-Lorentzian (driven damped oscillator) fits of
//!   scattering/absorption spectra and the derivation of mode rates,
//!   efficiencies and coupling constants from them,
//! * [`model`] — device parameterization (the six bundled antennas, emitter
//!   settings), dipole-orientation coupling projection, rotating-frame
//!   Hamiltonian and collapse channels,
//! * [`qspace`] — dense operator algebra on the truncated composite space
//!   mode1 ⊗ mode2 ⊗ emitter (embedding, partial trace/transpose, Hermitian
//!   eigenvalues, trace norm),
//! * [`steady`] — Liouvillian assembly, stationary solve, an RK4 time-domain
//!   oracle, emission rate and photon statistics,
//! * [`entangle`] — vacuum projection, far-field efficiency transform,
//!   logarithmic negativity and Bell-state overlap,
//! * [`observables`], [`sweep`], [`cli`] — the batch front end that turns
//!   JSON configurations into CSV observable tables.

pub mod cli;
pub mod constants;
pub mod entangle;
pub mod linalg;
pub mod model;
pub mod observables;
pub mod qspace;
pub mod spectra;
pub mod steady;
pub mod sweep;

pub use entangle::{
    bell_overlap, far_field_transform, log_negativity, project_out_vacuum, FarFieldState, LogBase,
};
pub use steady::{
    build_liouvillian, emission_rate, evolve_rk4, photon_statistics, solve_steady, Liouvillian,
    SteadyResult,
};
pub use model::{
    build_collapse_channels, build_hamiltonian, effective_couplings, gamma_fs, table1,
    AntennaModel, EmitterModel, ModeRecord,
};
pub use qspace::{
    annihilation, hermitian_eigenvalues, partial_trace_emitter, partial_transpose_mode2,
    sigma_minus, trace_norm, DensityMatrix, Operator, PhotonSpace, Space, SpaceDescriptor,
};
