//! Sparse storage, envelope factorization and symmetric generalized eigensolvers.

pub mod eigen;
pub mod skyline;
pub mod sparse;

pub use eigen::{cluster_ranges, dense_pencil, low_pencil, residual, SolverOptions, SpectrumResult};
pub use skyline::{reverse_cuthill_mckee, EnvelopeCholesky};
pub use sparse::{CsrMatrix, SymmetricAssembler};
