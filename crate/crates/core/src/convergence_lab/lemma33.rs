use super::theorem_a::Discretization;
use crate::discrete_laplace::{
    assemble_mode_operator, assemble_tensor_operator, fiber_mean_projection, low_spectrum, ring_eigenvalue, Subdomain,
};
use crate::error::{invalid, Result};
use crate::linalg::SolverOptions;
use crate::metric_models::{FiberMetric, SurfaceModel};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Largest `delta` on a grid of `(0, 1/2]` with `c * max_{|t| <= delta} rho / mu_1 <= eps / 2`,
/// where `mu_1` is the first nonzero ring eigenvalue.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DeltaCalibration {
    pub c: f64,
    pub epsilon: f64,
    pub fiber_gap: f64,
    pub delta: f64,
    /// `(delta, bound)` for every candidate.
    pub table: Vec<[f64; 2]>,
}

fn circle_length(model: &SurfaceModel) -> Result<f64> {
    match model.fiber {
        FiberMetric::Circle { length } => Ok(length),
        FiberMetric::FlatTorus { .. } => invalid("neck trials need a circle fiber"),
    }
}

fn neck_check(model: &SurfaceModel) -> Result<()> {
    let ok = model.regions.iter().any(|r| r.name == "neck" && r.t_range[0] <= -1.0 + 1e-12 && r.t_range[1] >= 1.0 - 1e-12);
    if ok {
        Ok(())
    } else {
        invalid("model needs a neck region covering [-1, 1]")
    }
}

pub fn calibrate_delta(model: &SurfaceModel, disc: &Discretization, c: f64, eps: f64, s: f64) -> Result<DeltaCalibration> {
    neck_check(model)?;
    if !(c > 0.0) || !(eps > 0.0) {
        return invalid("c and eps must be positive");
    }
    let grid = disc.grid(model)?;
    let gap = ring_eigenvalue(circle_length(model)?, disc.fiber_nodes, 1);
    let table: Vec<[f64; 2]> = (1..=64)
        .map(|i| {
            let delta = 0.5 * i as f64 / 64.0;
            let rho = grid.chart.iter().zip(&grid.rho).filter(|(t, _)| t.abs() <= delta).map(|(_, r)| *r).fold(0.0, f64::max);
            [delta, c * rho / gap]
        })
        .collect();
    let delta = table
        .iter()
        .filter(|e| e[0] >= s && e[1] <= 0.5 * eps)
        .map(|e| e[0])
        .fold(f64::NAN, f64::max);
    if delta.is_nan() {
        return invalid(format!("no delta in [s, 1/2] meets c * max rho / mu_1 <= eps / 2 for c = {c}, eps = {eps}"));
    }
    Ok(DeltaCalibration { c, epsilon: eps, fiber_gap: gap, delta, table })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Lemma33Report {
    pub c: f64,
    pub epsilon: f64,
    pub delta: f64,
    pub trials: usize,
    pub satisfied: usize,
    pub violations: usize,
    pub inconclusive: bool,
    /// Largest `mass(|t| <= delta) / (eps |f|^2)` among satisfied trials.
    pub max_ratio: f64,
}

/// Trials on the tensor operator with functions whose fiber means vanish on
/// `|t| <= 1/2`: a random mix of low fiber-constant and first-mode
/// eigenfunctions, the fiber mean then removed on the band.
pub fn lemma33_property_trial(
    model: &SurfaceModel,
    disc: &Discretization,
    c: f64,
    eps: f64,
    delta: f64,
    trials: usize,
    seed: u64,
    opts: &SolverOptions,
) -> Result<Lemma33Report> {
    neck_check(model)?;
    let length = circle_length(model)?;
    if !(delta > 0.0 && delta <= 0.5) {
        return invalid("delta must lie in (0, 1/2]");
    }
    let k = disc.fiber_nodes;
    let grid = disc.grid(model)?;
    let op = assemble_tensor_operator(&grid, k)?;
    let mode0 = low_spectrum(&assemble_mode_operator(&grid, 0.0)?, 4, opts)?;
    let mode1 = low_spectrum(&assemble_mode_operator(&grid, ring_eigenvalue(length, k, 1))?, 3, opts)?;
    let nb = op.base_nodes.len();
    let lift = |radial: &[f64], angle: Option<f64>| -> Vec<f64> {
        (0..nb * k)
            .map(|i| {
                let r = radial[i / k];
                match angle {
                    None => r,
                    Some(phase) => r * (2.0 * PI * (i % k) as f64 / k as f64 + phase).cos(),
                }
            })
            .collect()
    };
    let half = op.mask(&Subdomain::ChartBand { half_width: 0.5 });
    let inner = op.mask(&Subdomain::ChartBand { half_width: delta });
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rep = Lemma33Report { c, epsilon: eps, delta, trials, satisfied: 0, violations: 0, inconclusive: false, max_ratio: 0.0 };
    for _ in 0..trials {
        let mut f = vec![0.0; op.dim()];
        if rng.gen_bool(0.75) {
            for v in mode0.eigenvectors.as_ref().unwrap() {
                let a = rng.gen_range(-1.0..1.0);
                f.iter_mut().zip(lift(v, None)).for_each(|(x, y)| *x += a * y);
            }
        }
        let beta = 10f64.powf(rng.gen_range(-3.0..1.0));
        let phase = rng.gen_range(0.0..2.0 * PI);
        for v in mode1.eigenvectors.as_ref().unwrap() {
            let a = beta * rng.gen_range(-1.0..1.0);
            f.iter_mut().zip(lift(v, Some(phase))).for_each(|(x, y)| *x += a * y);
        }
        let mean = fiber_mean_projection(&op, &f)?;
        for i in 0..f.len() {
            if half[i] {
                f[i] -= mean[i];
            }
        }
        let norm = op.mass_norm_sq(&f);
        if !(norm > 0.0) {
            continue;
        }
        if op.masked_energy(&f, &half) < c * norm {
            rep.satisfied += 1;
            let ratio = op.masked_mass(&f, &inner) / (eps * norm);
            rep.max_ratio = rep.max_ratio.max(ratio);
            rep.violations += usize::from(ratio >= 1.0);
        }
    }
    rep.inconclusive = rep.satisfied < 10;
    Ok(rep)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric_models::{pinch_model, OuterSpec};

    fn neck(s: f64) -> SurfaceModel {
        pinch_model(s, &FiberMetric::circle(2.0 * PI), &OuterSpec::flat(4.0), 0.0).unwrap()
    }

    #[test]
    fn calibration_is_monotone_and_respects_bound() {
        let disc = Discretization { spacing: 0.02, fiber_nodes: 8 };
        let cal = calibrate_delta(&neck(0.05), &disc, 0.4, 0.5, 0.05).unwrap();
        assert!(cal.table.windows(2).all(|w| w[1][1] >= w[0][1]));
        let chosen = cal.table.iter().find(|e| e[0] == cal.delta).unwrap();
        assert!(chosen[1] <= 0.25);
        // tighter eps gives a smaller delta
        let tight = calibrate_delta(&neck(0.05), &disc, 0.4, 0.1, 0.05).unwrap();
        assert!(tight.delta < cal.delta);
    }

    #[test]
    fn slowly_varying_first_mode_satisfies_both_sides() {
        let disc = Discretization { spacing: 0.02, fiber_nodes: 8 };
        let m = neck(0.05);
        let cal = calibrate_delta(&m, &disc, 0.8, 0.5, 0.05).unwrap();
        let rep = lemma33_property_trial(&m, &disc, 0.8, 0.5, cal.delta, 120, 5, &SolverOptions::default()).unwrap();
        assert_eq!(rep.violations, 0);
        assert!(!rep.inconclusive);
    }

    #[test]
    fn needs_a_neck() {
        use crate::metric_models::{EndCondition, Segment, WarpProfile};
        let m = SurfaceModel::new(
            FiberMetric::circle(1.0),
            vec![Segment::new(WarpProfile::FlatTube { rho: 1.0 }, -2.0, 2.0)],
            [EndCondition::Neumann; 2],
            vec![[-2.0, -1.5]],
        )
        .unwrap();
        assert!(calibrate_delta(&m, &Discretization::default(), 1.0, 0.5, 0.05).is_err());
    }
}
