use super::grid::Grid1D;
use crate::error::{invalid, Result};
use crate::linalg::{CsrMatrix, SymmetricAssembler};
use crate::metric_models::{EndCondition, FiberMetric};
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "layout", rename_all = "snake_case")]
pub enum Layout {
    /// Radial operator of one fiber mode.
    Mode { mode_ev: f64 },
    /// Product grid with `k` ring nodes per base node, fiber index fastest.
    Tensor { k: usize },
}

/// Named node sets on a discretized model.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Subdomain {
    All,
    /// `dist(., A) < radius`
    BallOfA { radius: f64 },
    /// `dist(., A)` in `[4m, 4m + 4)`
    Shell { m: usize },
    /// Complement of the ball of radius `radius - margin`.
    Escaping { radius: f64, margin: f64 },
    /// Nodes whose shared-chart coordinate has `|t| <= half_width`.
    ChartBand { half_width: f64 },
    /// Nodes whose shared-chart coordinate has `|t| >= half_width`.
    ChartOutside { half_width: f64 },
    /// Base-coordinate interval.
    BaseInterval { lo: f64, hi: f64 },
}

/// Stiffness/mass pair of a warped product after discretization.
#[derive(Clone, Debug)]
pub struct DiscreteOperator {
    pub stiffness: CsrMatrix,
    pub mass: Vec<f64>,
    pub bc: [EndCondition; 2],
    pub layout: Layout,
    /// Grid node of each kept base node.
    pub base_nodes: Vec<usize>,
    pub base_u: Vec<f64>,
    pub base_x: Vec<f64>,
    pub base_chart: Vec<f64>,
    pub base_dist: Vec<f64>,
    pub spacing: f64,
}

fn fiber_weight(fiber: &FiberMetric, rho: f64) -> (f64, f64) {
    // (volume density rho^{d/2}, fiber volume)
    match fiber {
        FiberMetric::Circle { length } => (rho.sqrt(), *length),
        FiberMetric::FlatTorus { gram } => (rho.powf(gram.len() as f64 / 2.0), fiber.volume()),
    }
}

fn base_data(grid: &Grid1D) -> (Vec<usize>, Vec<f64>, Vec<f64>, Vec<f64>, Vec<f64>) {
    let free = grid.free_nodes();
    let u = free.iter().map(|&i| grid.u[i]).collect();
    let x = free.iter().map(|&i| grid.x[i]).collect();
    let c = free.iter().map(|&i| grid.chart[i]).collect();
    let d = free.iter().map(|&i| grid.dist_to_marker(i)).collect();
    (free, u, x, c, d)
}

fn trapezoid(i: usize, n: usize) -> f64 {
    if i == 0 || i + 1 == n {
        0.5
    } else {
        1.0
    }
}

/// Radial operator of fiber mode `mode_ev`: edges carry the midpoint fiber
/// volume over `Δ`, nodes carry the lumped mass and the mode potential.
pub fn assemble_mode_operator(grid: &Grid1D, mode_ev: f64) -> Result<DiscreteOperator> {
    if !(mode_ev >= 0.0) {
        return invalid(format!("mode eigenvalue must be nonnegative, got {mode_ev}"));
    }
    let n = grid.len();
    let h = grid.spacing;
    let (free, u, x, c, d) = base_data(grid);
    let mut dof = vec![usize::MAX; n];
    for (k, &i) in free.iter().enumerate() {
        dof[i] = k;
    }
    let mut asm = SymmetricAssembler::new(free.len());
    for i in 0..n - 1 {
        let (w, vol) = fiber_weight(&grid.fiber, grid.rho_mid[i]);
        let we = w * vol / h;
        match (dof[i], dof[i + 1]) {
            (usize::MAX, usize::MAX) => {}
            (usize::MAX, b) => asm.add_diagonal(b, we),
            (a, usize::MAX) => asm.add_diagonal(a, we),
            (a, b) => asm.add_edge(a, b, we),
        }
    }
    let mut mass = Vec::with_capacity(free.len());
    for (k, &i) in free.iter().enumerate() {
        let (w, vol) = fiber_weight(&grid.fiber, grid.rho[i]);
        let m = trapezoid(i, n) * h * w * vol;
        mass.push(m);
        if mode_ev > 0.0 {
            asm.add_diagonal(k, mode_ev * m / grid.rho[i]);
        }
    }
    Ok(DiscreteOperator {
        stiffness: asm.finish(),
        mass,
        bc: grid.ends,
        layout: Layout::Mode { mode_ev },
        base_nodes: free,
        base_u: u,
        base_x: x,
        base_chart: c,
        base_dist: d,
        spacing: h,
    })
}

/// Five-point operator on the (arclength, angle) product grid, periodic in angle.
pub fn assemble_tensor_operator(grid: &Grid1D, k: usize) -> Result<DiscreteOperator> {
    let length = match grid.fiber {
        FiberMetric::Circle { length } => length,
        FiberMetric::FlatTorus { .. } => return invalid("tensor operator supports circle fibers only"),
    };
    if k < 2 || k % 2 != 0 {
        return invalid(format!("fiber node count must be even and at least 2, got {k}"));
    }
    let n = grid.len();
    let h = grid.spacing;
    let ht = length / k as f64;
    let (free, u, x, c, d) = base_data(grid);
    let mut base = vec![usize::MAX; n];
    for (b, &i) in free.iter().enumerate() {
        base[i] = b;
    }
    let nb = free.len();
    let mut asm = SymmetricAssembler::new(nb * k);
    for i in 0..n - 1 {
        let we = grid.rho_mid[i].sqrt() * ht / h;
        for j in 0..k {
            match (base[i], base[i + 1]) {
                (usize::MAX, usize::MAX) => {}
                (usize::MAX, b) => asm.add_diagonal(b * k + j, we),
                (a, usize::MAX) => asm.add_diagonal(a * k + j, we),
                (a, b) => asm.add_edge(a * k + j, b * k + j, we),
            }
        }
    }
    let mut mass = Vec::with_capacity(nb * k);
    for (b, &i) in free.iter().enumerate() {
        let w = grid.rho[i].sqrt();
        let cw = trapezoid(i, n) * h;
        let wt = cw / (w * ht);
        for j in 0..k {
            mass.push(cw * w * ht);
            asm.add_edge(b * k + j, b * k + (j + 1) % k, wt);
        }
    }
    Ok(DiscreteOperator {
        stiffness: asm.finish(),
        mass,
        bc: grid.ends,
        layout: Layout::Tensor { k },
        base_nodes: free,
        base_u: u,
        base_x: x,
        base_chart: c,
        base_dist: d,
        spacing: h,
    })
}

impl DiscreteOperator {
    pub fn dim(&self) -> usize {
        self.mass.len()
    }

    pub fn fiber_nodes(&self) -> usize {
        match self.layout {
            Layout::Mode { .. } => 1,
            Layout::Tensor { k } => k,
        }
    }

    pub fn base_of(&self, dof: usize) -> usize {
        dof / self.fiber_nodes()
    }

    pub fn max_dist(&self) -> f64 {
        self.base_dist.iter().cloned().fold(0.0, f64::max)
    }

    /// Membership of every unknown in a subdomain.
    pub fn mask(&self, sub: &Subdomain) -> Vec<bool> {
        let base: Vec<bool> = (0..self.base_nodes.len())
            .map(|b| {
                let d = self.base_dist[b];
                let t = self.base_chart[b];
                match *sub {
                    Subdomain::All => true,
                    Subdomain::BallOfA { radius } => d < radius,
                    Subdomain::Shell { m } => d >= 4.0 * m as f64 && d < 4.0 * m as f64 + 4.0,
                    Subdomain::Escaping { radius, margin } => d >= radius - margin,
                    Subdomain::ChartBand { half_width } => t.abs() <= half_width,
                    Subdomain::ChartOutside { half_width } => t.abs() >= half_width,
                    Subdomain::BaseInterval { lo, hi } => self.base_x[b] >= lo && self.base_x[b] <= hi,
                }
            })
            .collect();
        let k = self.fiber_nodes();
        (0..self.dim()).map(|i| base[i / k]).collect()
    }

    /// Principal sub-operator on the masked unknowns, with their indices.
    pub fn restrict(&self, mask: &[bool]) -> (CsrMatrix, Vec<f64>, Vec<usize>) {
        let keep: Vec<usize> = (0..self.dim()).filter(|&i| mask[i]).collect();
        let s = self.stiffness.principal(&keep);
        let m = keep.iter().map(|&i| self.mass[i]).collect();
        (s, m, keep)
    }

    pub fn mass_norm_sq(&self, f: &[f64]) -> f64 {
        f.iter().zip(&self.mass).map(|(v, m)| v * v * m).sum()
    }

    pub fn mass_inner(&self, f: &[f64], g: &[f64]) -> f64 {
        f.iter().zip(g).zip(&self.mass).map(|((a, b), m)| a * b * m).sum()
    }

    pub fn masked_mass(&self, f: &[f64], mask: &[bool]) -> f64 {
        (0..self.dim()).filter(|&i| mask[i]).map(|i| f[i] * f[i] * self.mass[i]).sum()
    }

    /// Quadratic form restricted to a node set: edges with both ends inside
    /// plus the diagonal potential of inside nodes.
    pub fn masked_energy(&self, f: &[f64], mask: &[bool]) -> f64 {
        let mut e = 0.0;
        for i in 0..self.dim() {
            if !mask[i] {
                continue;
            }
            let mut row_sum = 0.0;
            for (j, v) in self.stiffness.row(i) {
                row_sum += v;
                if j > i && mask[j] {
                    e += -v * (f[i] - f[j]).powi(2);
                }
            }
            e += row_sum * f[i] * f[i];
        }
        e
    }

    /// Writes the stiffness in "i j value" form.
    pub fn write_coo<W: std::io::Write>(&self, w: W) -> std::io::Result<()> {
        self.stiffness.write_coo(w)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::dense_pencil;
    use crate::metric_models::{Segment, SurfaceModel, WarpProfile};

    fn tube(ends: [EndCondition; 2]) -> Grid1D {
        let m = SurfaceModel::new(
            FiberMetric::circle(1.0),
            vec![Segment::new(WarpProfile::FlatTube { rho: 1.0 }, 0.0, 1.0)],
            ends,
            vec![[0.0, 0.25]],
        )
        .unwrap();
        Grid1D::with_nodes(&m, 17).unwrap()
    }

    #[test]
    fn assembled_forms_are_symmetric_and_nonnegative() {
        let g = tube([EndCondition::Neumann, EndCondition::Dirichlet]);
        for op in [assemble_mode_operator(&g, 0.0).unwrap(), assemble_mode_operator(&g, 3.0).unwrap(), assemble_tensor_operator(&g, 4).unwrap()] {
            assert!(op.stiffness.is_exactly_symmetric());
            assert!(op.mass.iter().all(|&m| m > 0.0));
            let (vals, _) = dense_pencil(&op.stiffness, &op.mass);
            assert!(vals[0] >= -1e-10);
        }
    }

    #[test]
    fn neumann_constant_is_null() {
        let g = tube([EndCondition::Neumann; 2]);
        let op = assemble_tensor_operator(&g, 4).unwrap();
        let one = vec![1.0; op.dim()];
        assert!(op.stiffness.mul_vec(&one).iter().all(|v| v.abs() < 1e-12));
        assert_eq!(op.masked_energy(&one, &vec![true; op.dim()]), op.stiffness.quad_form(&one));
    }

    #[test]
    fn masked_energy_splits_over_partition_plus_cut_edges() {
        let g = tube([EndCondition::Dirichlet; 2]);
        let op = assemble_mode_operator(&g, 2.0).unwrap();
        let f: Vec<f64> = (0..op.dim()).map(|i| (i as f64 * 0.7).sin()).collect();
        let all = vec![true; op.dim()];
        assert!((op.masked_energy(&f, &all) - op.stiffness.quad_form(&f)).abs() < 1e-10);
        let left = op.mask(&Subdomain::BaseInterval { lo: 0.0, hi: 0.5 });
        let right: Vec<bool> = left.iter().map(|b| !b).collect();
        let cut: f64 = (0..op.dim() - 1)
            .filter(|&i| left[i] != left[i + 1])
            .map(|i| -op.stiffness.get(i, i + 1) * (f[i] - f[i + 1]).powi(2))
            .sum();
        let total = op.masked_energy(&f, &left) + op.masked_energy(&f, &right) + cut;
        assert!((total - op.stiffness.quad_form(&f)).abs() < 1e-10);
    }

    #[test]
    fn torus_rejected_for_tensor() {
        let m = SurfaceModel::new(
            FiberMetric::FlatTorus { gram: vec![vec![1.0]] },
            vec![Segment::new(WarpProfile::FlatTube { rho: 1.0 }, 0.0, 1.0)],
            [EndCondition::Neumann; 2],
            vec![[0.0, 0.5]],
        )
        .unwrap();
        let g = Grid1D::with_nodes(&m, 20).unwrap();
        assert!(assemble_tensor_operator(&g, 4).is_err());
        assert!(assemble_mode_operator(&g, 1.0).is_ok());
        assert!(assemble_mode_operator(&g, -1.0).is_err());
    }
}
