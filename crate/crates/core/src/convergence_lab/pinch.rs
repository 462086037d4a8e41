use super::hausdorff::hausdorff_window;
use super::theorem_a::{Discretization, SampledFunction};
use crate::discrete_laplace::{
    assemble_mode_operator, low_spectrum, mode_union_spectrum, ring_eigenvalue, window_spectrum, DiscreteOperator, Subdomain,
};
use crate::error::{invalid, Error, Result};
use crate::linalg::SolverOptions;
use crate::metric_models::{make_insert_family, pinch_model, FiberMetric, ManifoldPairFamily, OuterSpec, PinchOptions};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PinchRow {
    pub s: f64,
    pub eigenvalue: f64,
    /// Eigenfunction on the common sample points, sup over `|t| >= delta` equal to 1.
    pub samples: Vec<f64>,
    /// Mass of the renormalized eigenfunction on `|t| <= delta`.
    pub neck_mass: f64,
    /// Fraction of the lowest fiber-mean-zero eigenfunction on `|t| <= delta`.
    pub mean_zero_neck_mass: f64,
    /// `mass(|t| <= 2 delta) / mass(|t| >= 2 delta)`.
    pub cusp_mass_ratio: f64,
    /// Sup-distance of the samples to the previous row.
    pub sup_diff: Option<f64>,
    /// Normalized overlap with the previous row's samples.
    pub overlap: Option<f64>,
    pub ambiguous: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PinchTrace {
    pub eigen_index: usize,
    pub delta: f64,
    pub sample_t: Vec<f64>,
    pub rows: Vec<PinchRow>,
}

impl PinchTrace {
    pub fn sup_diffs(&self) -> Vec<f64> {
        self.rows.iter().filter_map(|r| r.sup_diff).collect()
    }

    /// Long-format trace table: one row per `(s, t)`.
    pub fn write_csv<W: std::io::Write>(&self, w: W) -> Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        wr.write_record(["s", "t", "value"])?;
        for r in &self.rows {
            for (t, v) in self.sample_t.iter().zip(&r.samples) {
                wr.write_record([format!("{}", r.s), format!("{t:.9e}"), format!("{v:.12e}")])?;
            }
        }
        wr.flush()?;
        Ok(())
    }

    pub fn write_summary_csv<W: std::io::Write>(&self, w: W) -> Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        wr.write_record(["s", "eigenvalue", "neck_mass", "mean_zero_neck_mass", "cusp_mass_ratio", "sup_diff", "overlap", "ambiguous"])?;
        let opt = |x: Option<f64>| x.map(|v| format!("{v:.12e}")).unwrap_or_default();
        for r in &self.rows {
            wr.write_record([
                format!("{}", r.s),
                format!("{:.12e}", r.eigenvalue),
                format!("{:.12e}", r.neck_mass),
                format!("{:.12e}", r.mean_zero_neck_mass),
                format!("{:.12e}", r.cusp_mass_ratio),
                opt(r.sup_diff),
                opt(r.overlap),
                r.ambiguous.to_string(),
            ])?;
        }
        wr.flush()?;
        Ok(())
    }
}

struct RawRow {
    eigenvalue: f64,
    /// Samples of the candidates at positions `p - 1, p, p + 1` (where present).
    candidates: Vec<(usize, Vec<f64>)>,
    position: usize,
    neck_mass_fraction: f64,
    mean_zero_neck_mass: f64,
    cusp_mass_ratio: f64,
}

fn mass_on(op: &DiscreteOperator, v: &[f64], sub: Subdomain) -> f64 {
    op.masked_mass(v, &op.mask(&sub))
}

fn circle_length(fiber: &FiberMetric) -> Result<f64> {
    match fiber {
        FiberMetric::Circle { length } => Ok(*length),
        FiberMetric::FlatTorus { .. } => invalid("pinch traces need a circle fiber"),
    }
}

fn trace_one(
    family: &ManifoldPairFamily,
    i: usize,
    index: usize,
    delta: f64,
    sample_t: &[f64],
    disc: &Discretization,
    opts: &SolverOptions,
) -> Result<RawRow> {
    let model = &family.models[i];
    let grid = disc.grid(model)?;
    let union = mode_union_spectrum(&grid, disc.fiber_nodes, index, opts)?;
    let lambda = union[index - 1];
    let op = assemble_mode_operator(&grid, 0.0)?;
    let spec = low_spectrum(&op, (index + 1).min(op.dim()), opts)?;
    let tol = 1e-8 * lambda.abs().max(1e-2);
    let hits = union.iter().filter(|&&v| (v - lambda).abs() <= tol).count();
    let position = spec.eigenvalues.iter().position(|&v| (v - lambda).abs() <= tol);
    let Some(position) = position.filter(|_| hits == 1) else {
        return Err(Error::Inconclusive(format!(
            "eigenvalue {index} of member s = {} is not a simple fiber-constant eigenvalue",
            family.parameters[i]
        )));
    };
    let sample = |v: &[f64]| -> Result<Vec<f64>> {
        let f = SampledFunction::from_operator(&op, v)?;
        Ok(sample_t.iter().map(|&t| f.value_at(t)).collect())
    };
    let lo = position.saturating_sub(1);
    let hi = (position + 1).min(spec.len() - 1);
    let candidates = (lo..=hi).map(|p| Ok((p, sample(spec.vector(p).unwrap())?))).collect::<Result<Vec<_>>>()?;
    let v = spec.vector(position).unwrap();
    let norm = op.mass_norm_sq(v);
    let neck_mass_fraction = mass_on(&op, v, Subdomain::ChartBand { half_width: delta }) / norm;
    let cusp = mass_on(&op, v, Subdomain::ChartBand { half_width: 2.0 * delta });
    let far = mass_on(&op, v, Subdomain::ChartOutside { half_width: 2.0 * delta });
    let mode1 = assemble_mode_operator(&grid, ring_eigenvalue(circle_length(&model.fiber)?, disc.fiber_nodes, 1))?;
    let w = low_spectrum(&mode1, 1, opts)?;
    let wv = w.vector(0).unwrap();
    let mean_zero_neck_mass = mass_on(&mode1, wv, Subdomain::ChartBand { half_width: delta }) / mode1.mass_norm_sq(wv);
    Ok(RawRow { eigenvalue: spec.eigenvalues[position], candidates, position, neck_mass_fraction, mean_zero_neck_mass, cusp_mass_ratio: cusp / far })
}

fn cosine(a: &[f64], b: &[f64]) -> f64 {
    let ab: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let aa: f64 = a.iter().map(|x| x * x).sum();
    let bb: f64 = b.iter().map(|x| x * x).sum();
    ab / (aa * bb).sqrt()
}

/// Common sample points on `|t| >= delta` of the shared chart.
fn sample_points(family: &ManifoldPairFamily, delta: f64, per_side: usize) -> Result<Vec<f64>> {
    let (a, b) = family.models[0].base_interval();
    let chart_lo = family.models[0].chart_coordinate(a);
    let chart_hi = family.models[0].chart_coordinate(b);
    if !(chart_lo < -delta && chart_hi > delta) {
        return invalid("chart does not extend beyond the trace cut");
    }
    let left = (0..per_side).map(|j| chart_lo + (-delta - chart_lo) * j as f64 / (per_side - 1) as f64);
    let right = (0..per_side).map(|j| delta + (chart_hi - delta) * j as f64 / (per_side - 1) as f64);
    Ok(left.chain(right).collect())
}

/// Traces the `eigen_index`-th (1-based) eigenfunction across the family,
/// renormalized to sup 1 on `|t| >= delta`, with signs fixed by overlap.
pub fn pinch_eigenfunction_trace(
    family: &ManifoldPairFamily,
    eigen_index: usize,
    delta: f64,
    disc: &Discretization,
    opts: &SolverOptions,
) -> Result<PinchTrace> {
    if eigen_index == 0 {
        return invalid("eigenvalue index is 1-based");
    }
    if !(delta > 0.0 && delta < 1.0) {
        return invalid("delta must lie in (0, 1)");
    }
    let sample_t = sample_points(family, delta, 241)?;
    let raw: Vec<RawRow> = (0..family.len())
        .into_par_iter()
        .map(|i| trace_one(family, i, eigen_index, delta, &sample_t, disc, opts))
        .collect::<Result<_>>()?;
    let mut rows: Vec<PinchRow> = Vec::with_capacity(raw.len());
    for (i, r) in raw.into_iter().enumerate() {
        let own = &r.candidates.iter().find(|c| c.0 == r.position).unwrap().1;
        let sup = own.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let mut sign = if own[0] < 0.0 { -1.0 } else { 1.0 };
        let (mut overlap, mut ambiguous) = (None, false);
        if let Some(prev) = rows.last() {
            let scores: Vec<(usize, f64)> = r.candidates.iter().map(|(p, s)| (*p, cosine(s, &prev.samples))).collect();
            let mine = scores.iter().find(|c| c.0 == r.position).unwrap().1;
            let rival = scores.iter().filter(|c| c.0 != r.position).map(|c| c.1.abs()).fold(0.0, f64::max);
            ambiguous = rival >= mine.abs() || mine.abs() < 0.5;
            sign = if mine < 0.0 { -1.0 } else { 1.0 };
            overlap = Some(mine.abs());
        }
        let scale = sign / sup;
        let samples: Vec<f64> = own.iter().map(|v| v * scale).collect();
        let sup_diff = rows.last().map(|p| p.samples.iter().zip(&samples).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max));
        // neck mass of the renormalized function: fraction times squared norm scale
        let op_norm_scale = scale * scale;
        rows.push(PinchRow {
            s: family.parameters[i],
            eigenvalue: r.eigenvalue,
            samples,
            neck_mass: r.neck_mass_fraction * op_norm_scale,
            mean_zero_neck_mass: r.mean_zero_neck_mass,
            cusp_mass_ratio: r.cusp_mass_ratio,
            sup_diff,
            overlap,
            ambiguous,
        });
    }
    Ok(PinchTrace { eigen_index, delta, sample_t, rows })
}

fn insert_eigenvalue(s: f64, tau: f64, fiber: &FiberMetric, outer: &OuterSpec, index: usize, disc: &Discretization, opts: &SolverOptions) -> Result<f64> {
    let grid = disc.grid(&pinch_model(s, fiber, outer, tau)?)?;
    let op = assemble_mode_operator(&grid, 0.0)?;
    Ok(low_spectrum(&op, index, opts)?.eigenvalues[index - 1])
}

/// Insert length at which the `index`-th fiber-constant eigenvalue equals
/// `target`: first sign change on a scan of step 1/2, then bisection.
pub fn tune_insert(
    s: f64,
    fiber: &FiberMetric,
    outer: &OuterSpec,
    target: f64,
    index: usize,
    tau_max: f64,
    disc: &Discretization,
    opts: &SolverOptions,
) -> Result<f64> {
    if index == 0 {
        return invalid("eigenvalue index is 1-based");
    }
    let f = |tau: f64| insert_eigenvalue(s, tau, fiber, outer, index, disc, opts).map(|v| v - target);
    let mut a = 0.0;
    let mut fa = f(a)?;
    if fa <= 0.0 {
        return invalid(format!("eigenvalue {index} at s = {s} is already below {target} without an insert"));
    }
    let mut b = a;
    loop {
        b += 0.5;
        if b > tau_max {
            return invalid(format!("no insert length up to {tau_max} brings eigenvalue {index} down to {target}"));
        }
        let fb = f(b)?;
        if fb <= 0.0 {
            break;
        }
        a = b;
        fa = fb;
    }
    debug_assert!(fa > 0.0);
    for _ in 0..80 {
        if b - a < 1e-10 {
            break;
        }
        let m = 0.5 * (a + b);
        if f(m)? > 0.0 {
            a = m;
        } else {
            b = m;
        }
    }
    Ok(0.5 * (a + b))
}

/// Pinching family whose necks carry tuned inserts keeping eigenvalue
/// `index` at `target` for every parameter.
pub fn tuned_insert_family(
    s_list: &[f64],
    fiber: &FiberMetric,
    outer: &OuterSpec,
    target: f64,
    index: usize,
    pinch: &PinchOptions,
    disc: &Discretization,
    opts: &SolverOptions,
) -> Result<(ManifoldPairFamily, Vec<f64>)> {
    let taus: Vec<f64> = s_list
        .par_iter()
        .map(|&s| tune_insert(s, fiber, outer, target, index, 40.0, disc, opts))
        .collect::<Result<_>>()?;
    Ok((make_insert_family(s_list, &taus, fiber, outer, pinch)?, taus))
}

/// Largest Hausdorff window distance between consecutive pinch models along `s_path`.
pub fn window_continuity(
    s_path: &[f64],
    fiber: &FiberMetric,
    outer: &OuterSpec,
    c: f64,
    disc: &Discretization,
    opts: &SolverOptions,
) -> Result<f64> {
    if s_path.len() < 2 {
        return invalid("path needs at least two points");
    }
    let spectra: Vec<Vec<f64>> = s_path
        .par_iter()
        .map(|&s| window_spectrum(&disc.grid(&pinch_model(s, fiber, outer, 0.0)?)?, disc.fiber_nodes, c, opts))
        .collect::<Result<_>>()?;
    Ok(spectra.windows(2).map(|w| hausdorff_window(&w[0], &w[1], c)).fold(0.0, f64::max))
}
