//! Separability of bipartite mixed states through Bloch-vector correlation
//! matrices and the multiplicative Horn inequalities.
//!
//! A state on `C^N (x) C^M` is written as local Bloch vectors `a`, `b` and a
//! correlation matrix `T`. The crate decides separability for the fragments
//! where that is possible (two qubits, the Ky Fan bounds, Werner and
//! isotropic families) and returns an explicit decomposition
//! `sum p_i rho_i (x) sigma_i` whenever it answers "separable".

pub mod basis;
pub mod bipartite;
pub mod bloch;
pub mod criteria;
pub mod decompose;
pub mod density;
pub mod error;
pub mod horn;
pub mod linalg;
pub mod states;

pub use bipartite::{compose_state, decompose_state, BipartiteDecomposed, NormalFormResult};
pub use bloch::{BlochRadii, BlochVector};
pub use criteria::{analyze, SeparableDecomposition, Status, Tolerances, Verdict};
pub use density::DensityMatrix;
pub use error::{Error, Result};
pub use linalg::{ComplexMatrix, RealMatrix};
