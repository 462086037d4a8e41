pub mod cli_reports;
pub mod convergence_lab;
pub mod discrete_laplace;
pub mod error;
pub mod graph_manifold;
pub mod group_theory;
pub mod linalg;
pub mod metric_models;

pub use error::{Error, Result};
