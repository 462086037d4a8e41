use super::fiber::ring_eigenvalue;
use super::grid::Grid1D;
use super::operator::{assemble_mode_operator, DiscreteOperator};
use crate::error::{invalid, Result};
use crate::linalg::{low_pencil, SolverOptions, SpectrumResult};
use crate::metric_models::FiberMetric;
use rayon::prelude::*;

pub fn low_spectrum(op: &DiscreteOperator, count: usize, opts: &SolverOptions) -> Result<SpectrumResult> {
    low_pencil(&op.stiffness, &op.mass, count, opts)
}

/// Distinct ring eigenvalues `(value, multiplicity)` for a circle fiber.
pub fn distinct_modes(fiber: &FiberMetric, k: usize) -> Result<Vec<(f64, usize)>> {
    let FiberMetric::Circle { length } = fiber else {
        return invalid("mode grouping is implemented for circle fibers");
    };
    if k < 2 || k % 2 != 0 {
        return invalid(format!("fiber node count must be even and at least 2, got {k}"));
    }
    Ok((0..=k / 2)
        .map(|j| (ring_eigenvalue(*length, k, j), if j == 0 || 2 * j == k { 1 } else { 2 }))
        .collect())
}

/// Union of the `per_mode` lowest values of every mode operator, ascending.
pub fn mode_union_spectrum(grid: &Grid1D, k: usize, per_mode: usize, opts: &SolverOptions) -> Result<Vec<f64>> {
    let modes = distinct_modes(&grid.fiber, k)?;
    let parts: Vec<Vec<f64>> = modes
        .par_iter()
        .map(|&(mu, mult)| {
            let op = assemble_mode_operator(grid, mu)?;
            let r = low_spectrum(&op, per_mode.min(op.dim()), opts)?;
            Ok(r.eigenvalues.iter().flat_map(|&v| std::iter::repeat(v).take(mult)).collect())
        })
        .collect::<Result<_>>()?;
    let mut all: Vec<f64> = parts.into_iter().flatten().collect();
    all.sort_by(f64::total_cmp);
    Ok(all)
}

/// All eigenvalues below `c` of the circle-fiber model, with multiplicity,
/// assembled mode by mode.
pub fn window_spectrum(grid: &Grid1D, k: usize, c: f64, opts: &SolverOptions) -> Result<Vec<f64>> {
    let modes = distinct_modes(&grid.fiber, k)?;
    let rho_max = grid.rho.iter().cloned().fold(0.0, f64::max);
    let parts: Vec<Vec<f64>> = modes
        .par_iter()
        .filter(|&&(mu, _)| mu / rho_max < c)
        .map(|&(mu, mult)| {
            let op = assemble_mode_operator(grid, mu)?;
            let vals = values_below(&op, c, opts)?;
            Ok(vals.iter().flat_map(|&v| std::iter::repeat(v).take(mult)).collect())
        })
        .collect::<Result<_>>()?;
    let mut all: Vec<f64> = parts.into_iter().flatten().collect();
    all.sort_by(f64::total_cmp);
    Ok(all)
}

/// Eigenvalues of one operator below `c`, growing the request until the window is covered.
pub fn values_below(op: &DiscreteOperator, c: f64, opts: &SolverOptions) -> Result<Vec<f64>> {
    let mut count = 8.min(op.dim());
    loop {
        let r = low_spectrum(op, count, opts)?;
        let last = *r.eigenvalues.last().unwrap();
        if last >= c || count == op.dim() {
            return Ok(r.eigenvalues.into_iter().filter(|&v| v < c).collect());
        }
        count = (2 * count).min(op.dim());
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::discrete_laplace::operator::assemble_tensor_operator;
    use crate::linalg::dense_pencil;
    use crate::metric_models::{EndCondition, Segment, SurfaceModel, WarpProfile};
    use std::f64::consts::PI;

    fn tube(len: f64, ends: [EndCondition; 2]) -> SurfaceModel {
        SurfaceModel::new(
            FiberMetric::circle(1.0),
            vec![Segment::new(WarpProfile::FlatTube { rho: 1.0 }, 0.0, len)],
            ends,
            vec![[0.0, 0.1]],
        )
        .unwrap()
    }

    #[test]
    fn mode_shift_example() {
        // lowest value of mode 32 equals 32 + first Dirichlet value
        let g = Grid1D::with_nodes(&tube(1.0, [EndCondition::Dirichlet; 2]), 33).unwrap();
        let opts = SolverOptions::default();
        let base = low_spectrum(&assemble_mode_operator(&g, 0.0).unwrap(), 1, &opts).unwrap();
        let shifted = low_spectrum(&assemble_mode_operator(&g, 32.0).unwrap(), 1, &opts).unwrap();
        assert!((shifted.eigenvalues[0] - 32.0 - base.eigenvalues[0]).abs() < 1e-9);
        let tensor = assemble_tensor_operator(&g, 4).unwrap();
        let (tv, _) = dense_pencil(&tensor.stiffness, &tensor.mass);
        let closest = tv.iter().map(|v| (v - shifted.eigenvalues[0]).abs()).fold(f64::INFINITY, f64::min);
        assert!(closest < 1e-9);
    }

    #[test]
    fn neumann_bottom_is_zero() {
        let g = Grid1D::with_nodes(&tube(2.0, [EndCondition::Neumann; 2]), 41).unwrap();
        let r = low_spectrum(&assemble_mode_operator(&g, 0.0).unwrap(), 3, &SolverOptions::default()).unwrap();
        assert!(r.eigenvalues[0].abs() < 1e-10);
        assert!((r.eigenvalues[1] - (PI / 2.0).powi(2)).abs() < 1e-2);
    }

    #[test]
    fn window_matches_union() {
        let g = Grid1D::with_nodes(&tube(3.0, [EndCondition::Dirichlet; 2]), 61).unwrap();
        let opts = SolverOptions::default();
        let w = window_spectrum(&g, 8, 45.0, &opts).unwrap();
        let u = mode_union_spectrum(&g, 8, 59, &opts).unwrap();
        let u: Vec<f64> = u.into_iter().filter(|&v| v < 45.0).collect();
        assert_eq!(w.len(), u.len());
        assert!(w.iter().zip(&u).all(|(a, b)| (a - b).abs() < 1e-9));
    }
}
