//! Random Hamiltonian ensembles, their Gibbs states, and how far those states
//! are from forming a state t-design.

pub mod analysis;
pub mod design;
pub mod ensembles;
pub mod error;
pub mod matrix;
pub mod spectral;

pub use design::{build_sym_projector, MomentAccumulator, SymBasis, SymProjector};
pub use ensembles::{
    sample_gue, sample_hamiltonian, EnsembleKind, EnsembleSpec, Graph, SeedPolicy,
};
pub use error::{Error, Provenance, Result};
pub use matrix::HermitianMatrix;
pub use spectral::{eig_hermitian, gibbs_weights, thermal_state, GibbsWeights, Spectrum};

pub use faer::c64;
