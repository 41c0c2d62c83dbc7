//! Kitaev toric code on an N x M torus: stabilizers and logical operators,
//! the codeword basis in syndrome sectors, bath-coupling matrix elements of
//! sum_r sigma_r^z, coherent-state transforms of those matrix elements,
//! single-error recovery by minimal-path pairing, and the Knill-Laflamme
//! correctability check.

pub mod code;
pub mod lattice;
pub mod pauli;
pub mod recovery;
pub mod state;

pub use code::{
    codeword_basis, fv_kitaev_estimate, fv_kitaev_estimate_promoted, q_coherent_transform,
    q_matrix, q_matrix_element, q_model_matrix_element, CodeBasis, SyndromeSector,
};
pub use lattice::{Logicals, TorusLattice};
pub use pauli::PauliString;
pub use recovery::{
    knill_laflamme_check, measure_syndrome, recovery_map, single_qubit_errors, KlReport,
    Recovery, RecoveryStatus, SyndromeRecord,
};
pub use state::SparseState;
