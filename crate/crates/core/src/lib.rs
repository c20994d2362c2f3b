//! Collective-spin dynamics of N two-level atoms in the permutation-symmetric
//! (Dicke) subspace.
//!
//! The basis state |m⟩ has m atoms spin down, so J_z|m⟩ = ((N − 2m)/2)|m⟩.
//! Units have ħ = 1 and time is measured against the coupling Ω_R.

pub mod error;
pub mod experiment;
pub mod observables;
pub mod oracle;
pub mod propagator;
pub mod ramancalc;
pub mod spinops;
pub mod state;
mod tridiag;

pub use error::{Error, Result};
pub use experiment::{run, scaling_study, InitialSpec, Output, RunConfig, RunOutput, ScalingReport};
pub use observables::{ghz_fidelity, min_squeezing_scan, spin_moments, squeezing, SqueezingResult};
pub use propagator::{diagonalize, evolve, Evolver, Prepared, SpectralDecomposition};
pub use spinops::{hamiltonian, BandedHermitian, CouplingScheme, SchemeKind};
pub use state::DickeState;

pub use num_complex::Complex64;
