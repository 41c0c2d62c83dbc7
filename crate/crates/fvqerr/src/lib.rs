//! Open-quantum-system error estimation at desk scale: spin coherent states
//! and their path-integral actions, harmonic-bath influence kernels, an
//! exact-diagonalization oracle for qubits coupled to truncated oscillator
//! baths, a first-order perturbative error estimator, toric-code stabilizer
//! algebra with bath-coupling matrix elements, and quantum-channel error-rate
//! utilities.

pub mod bath;
pub mod channels;
pub mod coherent;
pub mod error;
pub mod exact;
pub mod fit;
pub mod linalg;
pub mod path;
pub mod quad;
pub mod sphere;
pub mod spinham;
pub mod toric;
pub mod weak;

pub use error::{FvError, Result};
