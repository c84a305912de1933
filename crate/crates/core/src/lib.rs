//! Effective Hamiltonians for a slow quantum system strongly coupled to a fast one.
//!
//! The crate builds the exact coupled Hamiltonian
//! `ω₁X₀ + ω₂Y₀ + g(X₊+X₋)(Y₊+Y₋)` for polynomially deformed ladder algebras,
//! the third-order effective Hamiltonian obtained after adiabatic elimination of
//! the fast subsystem, and the closed-form Dicke and spin-spin models derived
//! from it. On top of that it offers dense and banded eigensolvers, a classical
//! energy-surface analysis in the thermodynamic limit, and a cross-validation
//! harness comparing the effective description against exact diagonalization.
//!
//! Energies are in units of the fast frequency `ω₂` unless stated otherwise.

pub mod algebra;
pub mod band;
pub mod classical;
pub mod effective;
mod error;
pub mod models;
pub mod operator;
pub mod spectra;
pub mod verify;

pub use algebra::{HalfInt, LadderRep, Polynomial, RepKind};
pub use band::SymBand;
pub use classical::{ClassicalLandscape, StationaryKind, StationaryPoint};
pub use effective::{DisplacementConvention, ExpansionParameters, ModelSpec};
pub use error::{Error, Result};
pub use models::{ModelId, PotentialCoeffs};
pub use operator::{BandOperator, BasisLabel, Operator};
pub use spectra::{Histogram, SpectralResult};
pub use verify::ErrorTable;
