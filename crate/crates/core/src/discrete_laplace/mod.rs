//! Divergence-form discretization of the Laplacian on warped products.
//!
//! For `du^2 + rho(u) h` with a circle fiber, node weights are `sqrt(rho)`,
//! edges use `sqrt(rho)` at the midpoint, and the mass is lumped. The angular
//! edges of the tensor grid carry `c Δ / (sqrt(rho) h_theta)`, so the tensor
//! spectrum is exactly the union of the radial spectra with potentials
//! `mu_j / rho` where `mu_j` are ring eigenvalues.

pub mod fiber;
pub mod functionals;
pub mod grid;
pub mod operator;
pub mod spectrum;

pub use fiber::{fiber_mode_eigenvalues, ring_eigenvalue};
pub use functionals::{
    cutoff_operator_l, fiber_mean_projection, full_spectrum, mu_k, mu_spectrum, rayleigh_quotient, shell_cutoff,
    spectral_band_masses, BandMasses, CutoffOperator, ShellCutoff,
};
pub use grid::Grid1D;
pub use operator::{assemble_mode_operator, assemble_tensor_operator, DiscreteOperator, Layout, Subdomain};
pub use spectrum::{distinct_modes, low_spectrum, mode_union_spectrum, values_below, window_spectrum};

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{dense_pencil, SolverOptions};
    use crate::metric_models::{EndCondition, FiberMetric, Segment, SurfaceModel, WarpProfile};

    pub(crate) fn separation_gap(model: &SurfaceModel, nodes: usize, k: usize) -> f64 {
        let grid = Grid1D::with_nodes(model, nodes).unwrap();
        let tensor = assemble_tensor_operator(&grid, k).unwrap();
        let (tv, _) = dense_pencil(&tensor.stiffness, &tensor.mass);
        let FiberMetric::Circle { length } = model.fiber else { unreachable!() };
        let mut union = Vec::new();
        for j in 0..k {
            let op = assemble_mode_operator(&grid, ring_eigenvalue(length, k, j)).unwrap();
            union.extend(dense_pencil(&op.stiffness, &op.mass).0);
        }
        union.sort_by(f64::total_cmp);
        assert_eq!(union.len(), tv.len());
        tv.iter().zip(&union).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
    }

    #[test]
    fn flat_tube_separates_exactly() {
        let m = SurfaceModel::new(
            FiberMetric::circle(1.0),
            vec![Segment::new(WarpProfile::FlatTube { rho: 1.0 }, 0.0, 1.0)],
            [EndCondition::Dirichlet; 2],
            vec![[0.0, 0.2]],
        )
        .unwrap();
        assert!(separation_gap(&m, 64, 4) <= 1e-9);
    }

    #[test]
    fn second_order_convergence_on_flat_tube() {
        let l = 2.0;
        let m = SurfaceModel::new(
            FiberMetric::circle(1.0),
            vec![Segment::new(WarpProfile::FlatTube { rho: 1.0 }, 0.0, l)],
            [EndCondition::Dirichlet; 2],
            vec![[0.0, 0.2]],
        )
        .unwrap();
        let opts = SolverOptions::default();
        let exact = |j: usize| (j as f64 * std::f64::consts::PI / l).powi(2);
        let mut errs = Vec::new();
        for nodes in [41, 81, 161] {
            let g = Grid1D::with_nodes(&m, nodes).unwrap();
            let r = low_spectrum(&assemble_mode_operator(&g, 0.0).unwrap(), 3, &opts).unwrap();
            errs.push((r.eigenvalues[2] - exact(3)).abs());
        }
        for w in errs.windows(2) {
            let ratio = w[0] / w[1];
            assert!((3.6..=4.4).contains(&ratio), "ratio {ratio}");
        }
    }
}
