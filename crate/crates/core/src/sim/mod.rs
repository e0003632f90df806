//! Exact state-vector and density-matrix simulation.

pub mod amplitude;
pub mod density;
pub mod ops;
pub mod phase;
pub mod state;

pub use density::{partial_trace, DensityMatrix};
pub use ops::{
    evolve, hermitian_extension, qpca_step, swap_like_operator, unfolding_swap_unitary,
    ExtensionLayout, QpcaChannel, SparseHermitian,
};
pub use phase::{phase_estimation, PhaseEstimate};
pub use state::{QuantumState, Register};
