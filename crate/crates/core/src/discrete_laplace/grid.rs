use crate::error::{invalid, Result};
use crate::metric_models::{EndCondition, FiberMetric, SurfaceModel};

/// Uniform arclength grid over a model's base interval.
#[derive(Clone, Debug)]
pub struct Grid1D {
    pub u: Vec<f64>,
    /// Base coordinate of each node.
    pub x: Vec<f64>,
    /// Shared-chart coordinate of each node.
    pub chart: Vec<f64>,
    pub rho: Vec<f64>,
    /// `rho` at edge midpoints.
    pub rho_mid: Vec<f64>,
    pub segment: Vec<usize>,
    pub spacing: f64,
    pub marker_u: Vec<[f64; 2]>,
    pub ends: [EndCondition; 2],
    pub fiber: FiberMetric,
}

impl Grid1D {
    /// Grid whose spacing is the closest to `target` that divides the length.
    pub fn new(model: &SurfaceModel, target: f64) -> Result<Self> {
        if !(target > 0.0) {
            return invalid("grid spacing must be positive");
        }
        let chart = model.chart()?;
        let n = ((chart.length() / target).round() as usize).max(1) + 1;
        Self::with_nodes(model, n)
    }

    pub fn with_nodes(model: &SurfaceModel, nodes: usize) -> Result<Self> {
        if nodes < 3 {
            return invalid("grid needs at least three nodes");
        }
        let chart = model.chart()?;
        let len = chart.length();
        let h = len / (nodes - 1) as f64;
        let u: Vec<f64> = (0..nodes).map(|i| if i + 1 == nodes { len } else { h * i as f64 }).collect();
        let x: Vec<f64> = u.iter().map(|&v| chart.x_of_u(v)).collect();
        let rho: Vec<f64> = u.iter().map(|&v| chart.rho_at_u(v)).collect();
        let rho_mid = (0..nodes - 1).map(|i| chart.rho_at_u(h * (i as f64 + 0.5))).collect();
        let segment: Vec<usize> = u.iter().map(|&v| chart.segment_at_u(v)).collect();
        for k in 0..chart.segment_count() {
            let (a, b) = chart.segment_u_range(k);
            let inside = u.iter().filter(|&&v| v >= a - 1e-12 && v <= b + 1e-12).count();
            if inside < 8 {
                return invalid(format!("segment {k} has only {inside} grid nodes; at least 8 are required"));
            }
        }
        Ok(Self {
            chart: x.iter().map(|&v| model.chart_coordinate(v)).collect(),
            u,
            x,
            rho,
            rho_mid,
            segment,
            spacing: h,
            marker_u: chart.marker_u(&model.marker),
            ends: model.ends,
            fiber: model.fiber.clone(),
        })
    }

    pub fn len(&self) -> usize {
        self.u.len()
    }

    pub fn is_empty(&self) -> bool {
        self.u.is_empty()
    }

    pub fn length(&self) -> f64 {
        *self.u.last().unwrap()
    }

    /// Arclength distance from node `i` to the marked set.
    pub fn dist_to_marker(&self, i: usize) -> f64 {
        let v = self.u[i];
        self.marker_u
            .iter()
            .map(|m| if v < m[0] { m[0] - v } else if v > m[1] { v - m[1] } else { 0.0 })
            .fold(f64::INFINITY, f64::min)
    }

    /// Node indices kept as unknowns after Dirichlet elimination.
    pub fn free_nodes(&self) -> Vec<usize> {
        let n = self.len();
        let lo = usize::from(self.ends[0] == EndCondition::Dirichlet);
        let hi = n - usize::from(self.ends[1] == EndCondition::Dirichlet);
        (lo..hi).collect()
    }
}
