use super::hausdorff::hausdorff_window;
use crate::discrete_laplace::{
    assemble_mode_operator, assemble_tensor_operator, low_spectrum, mode_union_spectrum, mu_k, window_spectrum, DiscreteOperator,
    Grid1D, Layout, Subdomain,
};
use crate::error::{invalid, Error, Result};
use crate::linalg::SolverOptions;
use crate::metric_models::{FiberMetric, ManifoldPairFamily, SurfaceModel};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Grid resolution shared by every model of an experiment.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Discretization {
    /// Target arclength spacing.
    pub spacing: f64,
    /// Ring nodes per fiber for two-dimensional operators.
    pub fiber_nodes: usize,
}

impl Default for Discretization {
    fn default() -> Self {
        Self { spacing: 0.02, fiber_nodes: 8 }
    }
}

impl Discretization {
    pub fn grid(&self, model: &SurfaceModel) -> Result<Grid1D> {
        Grid1D::new(model, self.spacing)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceRow {
    pub s: f64,
    pub radius: f64,
    pub margin: f64,
    pub spectrum_window: Vec<f64>,
    pub hausdorff_to_limit: f64,
    pub mu1_escaping: f64,
    pub mu_k: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReportMeta {
    pub c: f64,
    pub guard_margin: f64,
    pub spacing: f64,
    pub fiber_nodes: usize,
    pub tol: f64,
    pub seed: u64,
    pub count: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceReport {
    /// Rows in the family's order (decreasing parameter).
    pub rows: Vec<ConvergenceRow>,
    pub limit_window: Vec<f64>,
    pub limit_mu_k: Vec<f64>,
    pub meta: ReportMeta,
}

impl ConvergenceReport {
    pub fn hausdorff(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.hausdorff_to_limit).collect()
    }

    /// `max_k |mu_k(M_i) - mu_k(limit)|` per row.
    pub fn mu_k_defects(&self) -> Vec<f64> {
        self.rows
            .iter()
            .map(|r| r.mu_k.iter().zip(&self.limit_mu_k).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max))
            .collect()
    }

    pub fn write_csv<W: std::io::Write>(&self, w: W) -> Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        let mut head = vec!["s".to_string(), "radius".into(), "hausdorff".into(), "mu1_escaping".into(), "window_count".into()];
        head.extend((1..=self.meta.count).map(|k| format!("mu_{k}")));
        wr.write_record(&head)?;
        for r in &self.rows {
            let mut rec = vec![
                format!("{}", r.s),
                format!("{:.12e}", r.radius),
                format!("{:.12e}", r.hausdorff_to_limit),
                format!("{:.12e}", r.mu1_escaping),
                r.spectrum_window.len().to_string(),
            ];
            rec.extend(r.mu_k.iter().map(|v| format!("{v:.12e}")));
            wr.write_record(&rec)?;
        }
        let mut rec = vec!["0".to_string(), String::new(), String::new(), String::new(), self.limit_window.len().to_string()];
        rec.extend(self.limit_mu_k.iter().map(|v| format!("{v:.12e}")));
        wr.write_record(&rec)?;
        wr.flush()?;
        Ok(())
    }
}

fn full_operator(model: &SurfaceModel, disc: &Discretization) -> Result<DiscreteOperator> {
    let grid = disc.grid(model)?;
    match model.fiber {
        FiberMetric::Circle { .. } => assemble_tensor_operator(&grid, disc.fiber_nodes),
        // mode 0 carries the bottom of every Dirichlet problem
        FiberMetric::FlatTorus { .. } => assemble_mode_operator(&grid, 0.0),
    }
}

/// `mu_1` of the complement of `B(A_i, R_i - r_i)` in model `i`.
pub fn escaping_mu1(family: &ManifoldPairFamily, i: usize, disc: &Discretization, opts: &SolverOptions) -> Result<f64> {
    if i >= family.len() {
        return invalid(format!("family has {} members, index {i} requested", family.len()));
    }
    let op = full_operator(&family.models[i], disc)?;
    let mask = op.mask(&Subdomain::Escaping { radius: family.radii[i], margin: family.escaping_margins[i] });
    if !mask.iter().any(|&b| b) {
        return invalid(format!("escaping set of member {i} is empty"));
    }
    mu_k(&op, &mask, 1, opts)
}

fn window_of(model: &SurfaceModel, c: f64, disc: &Discretization, opts: &SolverOptions) -> Result<Vec<f64>> {
    let grid = disc.grid(model)?;
    window_spectrum(&grid, disc.fiber_nodes, c, opts)
}

fn lowest_of(model: &SurfaceModel, count: usize, disc: &Discretization, opts: &SolverOptions) -> Result<Vec<f64>> {
    let grid = disc.grid(model)?;
    let mut v = mode_union_spectrum(&grid, disc.fiber_nodes, count, opts)?;
    v.truncate(count);
    Ok(v)
}

/// Spectra of every member in `[0, c)` against the limit, with the guard
/// `c <= min_i mu_1(Omega_i) - guard_margin` enforced first.
pub fn theorem_a_experiment(
    family: &ManifoldPairFamily,
    c: f64,
    count: usize,
    guard_margin: f64,
    disc: &Discretization,
    opts: &SolverOptions,
) -> Result<ConvergenceReport> {
    if !(c > 0.0) || count == 0 {
        return invalid("window must be positive and count at least 1");
    }
    let mu1: Vec<f64> = (0..family.len()).into_par_iter().map(|i| escaping_mu1(family, i, disc, opts)).collect::<Result<_>>()?;
    let (worst, low) = mu1.iter().enumerate().fold((0, f64::INFINITY), |acc, (i, &v)| if v < acc.1 { (i, v) } else { acc });
    if c > low - guard_margin {
        return Err(Error::Precondition(format!(
            "window c = {c} violates the escaping guard nu <= lim inf mu1(Omega_i), checked as c <= min_i mu1(Omega_i) - {guard_margin}; member {worst} (s = {}) has mu1 = {low:.6}",
            family.parameters[worst]
        )));
    }
    let per_model: Vec<(Vec<f64>, Vec<f64>)> = family
        .models
        .par_iter()
        .map(|m| Ok((window_of(m, c, disc, opts)?, lowest_of(m, count, disc, opts)?)))
        .collect::<Result<_>>()?;
    let mut limit_window = Vec::new();
    let mut limit_low = Vec::new();
    for comp in &family.limit {
        limit_window.extend(window_of(comp, c, disc, opts)?);
        limit_low.extend(lowest_of(comp, count, disc, opts)?);
    }
    limit_window.sort_by(f64::total_cmp);
    limit_low.sort_by(f64::total_cmp);
    limit_low.truncate(count);
    let rows = per_model
        .into_iter()
        .enumerate()
        .map(|(i, (win, low))| ConvergenceRow {
            s: family.parameters[i],
            radius: family.radii[i],
            margin: family.escaping_margins[i],
            hausdorff_to_limit: hausdorff_window(&win, &limit_window, c),
            spectrum_window: win,
            mu1_escaping: mu1[i],
            mu_k: low,
        })
        .collect();
    Ok(ConvergenceReport {
        rows,
        limit_window,
        limit_mu_k: limit_low,
        meta: ReportMeta {
            c,
            guard_margin,
            spacing: disc.spacing,
            fiber_nodes: disc.fiber_nodes,
            tol: opts.tol,
            seed: opts.seed,
            count,
        },
    })
}

/// Fiber-constant function sampled on the shared chart, as one or more
/// pieces with nondecreasing chart coordinates. Outside its pieces it is 0.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampledFunction {
    pub chart: Vec<f64>,
    pub dist: Vec<f64>,
    pub weight: Vec<f64>,
    pub values: Vec<f64>,
    pub pieces: Vec<[usize; 2]>,
}

impl SampledFunction {
    pub fn from_operator(op: &DiscreteOperator, values: &[f64]) -> Result<Self> {
        if !matches!(op.layout, Layout::Mode { .. }) {
            return invalid("chart sampling needs a fiber-mode operator");
        }
        if values.len() != op.dim() {
            return invalid("grid mismatch between function and operator");
        }
        if op.base_chart.windows(2).any(|w| w[1] < w[0]) {
            return invalid("chart coordinate must be nondecreasing along the grid");
        }
        Ok(Self {
            chart: op.base_chart.clone(),
            dist: op.base_dist.clone(),
            weight: op.mass.clone(),
            values: values.to_vec(),
            pieces: vec![[0, op.dim()]],
        })
    }

    /// Disjoint union of several sampled functions.
    pub fn union(parts: &[SampledFunction]) -> Self {
        let mut out = Self { chart: vec![], dist: vec![], weight: vec![], values: vec![], pieces: vec![] };
        for p in parts {
            let off = out.values.len();
            out.chart.extend(&p.chart);
            out.dist.extend(&p.dist);
            out.weight.extend(&p.weight);
            out.values.extend(&p.values);
            out.pieces.extend(p.pieces.iter().map(|r| [r[0] + off, r[1] + off]));
        }
        out
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn scaled(&self, a: f64) -> Self {
        Self { values: self.values.iter().map(|v| a * v).collect(), ..self.clone() }
    }

    pub fn norm_sq(&self) -> f64 {
        self.values.iter().zip(&self.weight).map(|(v, w)| v * v * w).sum()
    }

    /// Piecewise-linear value at chart coordinate `t`.
    pub fn value_at(&self, t: f64) -> f64 {
        for &[a, b] in &self.pieces {
            let c = &self.chart[a..b];
            if c.is_empty() || t < c[0] || t > c[c.len() - 1] {
                continue;
            }
            let j = c.partition_point(|&x| x < t);
            if c[j] == t || j == 0 {
                return self.values[a + j];
            }
            let (x0, x1) = (c[j - 1], c[j]);
            let (v0, v1) = (self.values[a + j - 1], self.values[a + j]);
            return v0 + (v1 - v0) * (t - x0) / (x1 - x0);
        }
        0.0
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EffectiveRow {
    pub radius: f64,
    /// Mass of `f_i` outside `B(A_i, R_i)`.
    pub escaped_mass: f64,
    /// `|f_i - f|^2` over `B(A_i, R_i)`.
    pub defect: f64,
}

/// Both residuals of effective convergence of `f_list` to `f`; the
/// identification maps are the identity of the shared chart.
pub fn effective_convergence_check(f_list: &[SampledFunction], f: &SampledFunction, radii: &[f64]) -> Result<Vec<EffectiveRow>> {
    if f_list.len() != radii.len() {
        return invalid("one radius per function is required");
    }
    f_list
        .iter()
        .zip(radii)
        .map(|(fi, &r)| {
            let n = fi.len();
            if fi.chart.len() != n || fi.dist.len() != n || fi.weight.len() != n {
                return invalid("grid mismatch inside a sampled function");
            }
            let mut escaped = 0.0;
            let mut defect = 0.0;
            for k in 0..n {
                let w = fi.weight[k];
                if fi.dist[k] >= r {
                    escaped += w * fi.values[k].powi(2);
                } else {
                    defect += w * (fi.values[k] - f.value_at(fi.chart[k])).powi(2);
                }
            }
            Ok(EffectiveRow { radius: r, escaped_mass: escaped, defect })
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EigenfunctionLimitRow {
    pub s: f64,
    pub eigenvalue: f64,
    pub limit_eigenvalue: f64,
    /// Dimension of the limit eigenspace used as target.
    pub limit_multiplicity: usize,
    pub residual: EffectiveRow,
}

/// Distance of the `index`-th (1-based) fiber-constant eigenfunction of each
/// member to the limit eigenspace with the nearest eigenvalue.
pub fn eigenfunction_convergence(
    family: &ManifoldPairFamily,
    index: usize,
    disc: &Discretization,
    opts: &SolverOptions,
) -> Result<Vec<EigenfunctionLimitRow>> {
    if index == 0 {
        return invalid("eigenfunction index is 1-based");
    }
    let mut limit_pairs: Vec<(f64, SampledFunction)> = Vec::new();
    for comp in &family.limit {
        let op = assemble_mode_operator(&disc.grid(comp)?, 0.0)?;
        let r = low_spectrum(&op, (index + 4).min(op.dim()), opts)?;
        for (k, &l) in r.eigenvalues.iter().enumerate() {
            limit_pairs.push((l, SampledFunction::from_operator(&op, r.vector(k).unwrap())?));
        }
    }
    family
        .models
        .par_iter()
        .enumerate()
        .map(|(i, m)| {
            let op = assemble_mode_operator(&disc.grid(m)?, 0.0)?;
            let r = low_spectrum(&op, index, opts)?;
            let lambda = r.eigenvalues[index - 1];
            let fi = SampledFunction::from_operator(&op, r.vector(index - 1).unwrap())?;
            let nearest = limit_pairs.iter().map(|p| p.0).min_by(|a, b| (a - lambda).abs().total_cmp(&(b - lambda).abs())).unwrap();
            let band = 1e-6 * nearest.abs().max(1e-2);
            let targets: Vec<&SampledFunction> = limit_pairs.iter().filter(|p| (p.0 - nearest).abs() <= band).map(|p| &p.1).collect();
            let inside: Vec<usize> = (0..fi.len()).filter(|&k| fi.dist[k] < family.radii[i]).collect();
            let samples: Vec<Vec<f64>> = targets.iter().map(|t| fi.chart.iter().map(|&x| t.value_at(x)).collect()).collect();
            let mut proj = vec![0.0; fi.len()];
            for phi in &samples {
                let coef: f64 = inside.iter().map(|&k| fi.weight[k] * fi.values[k] * phi[k]).sum();
                proj.iter_mut().zip(phi).for_each(|(p, q)| *p += coef * q);
            }
            let target = SampledFunction { values: proj, pieces: vec![[0, fi.len()]], ..fi.clone() };
            let residual = effective_convergence_check(std::slice::from_ref(&fi), &target, &[family.radii[i]])?[0];
            Ok(EigenfunctionLimitRow {
                s: family.parameters[i],
                eigenvalue: lambda,
                limit_eigenvalue: nearest,
                limit_multiplicity: targets.len(),
                residual,
            })
        })
        .collect()
}
