use crate::discrete_laplace::{mu_k, DiscreteOperator, Subdomain};
use crate::error::{invalid, Error, Result};
use crate::linalg::{dense_pencil, SolverOptions};
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BandTransfer {
    pub eigenvalue: f64,
    /// Fraction of the norm carried by the other operator's eigenvectors
    /// with eigenvalues in `[eigenvalue - delta, eigenvalue + delta]`.
    pub band_mass: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Corollary23Report {
    pub radius: f64,
    pub band: [f64; 2],
    pub delta: f64,
    pub mu1_outside_a: f64,
    /// `min(mu_1(M - A), C) - eps`
    pub threshold: f64,
    /// Eigenvectors of the whole domain measured against the ball.
    pub forward: Vec<BandTransfer>,
    /// Eigenvectors of the ball measured against the whole domain.
    pub backward: Vec<BandTransfer>,
    pub passed: bool,
}

impl Corollary23Report {
    pub fn worst_mass(&self) -> f64 {
        self.forward.iter().chain(&self.backward).map(|t| t.band_mass).fold(1.0, f64::min)
    }
}

fn band_mass(vals: &[f64], vecs: &[Vec<f64>], mass: &[f64], f: &[f64], lo: f64, hi: f64) -> f64 {
    let norm: f64 = f.iter().zip(mass).map(|(a, m)| a * a * m).sum();
    let inside: f64 = vals
        .iter()
        .zip(vecs)
        .filter(|(l, _)| **l >= lo && **l <= hi)
        .map(|(_, v)| v.iter().zip(f).zip(mass).map(|((a, b), m)| a * b * m).sum::<f64>().powi(2))
        .sum();
    inside / norm
}

/// Round trip of spectral bands between the truncated domain and the ball
/// `B(A, radius)`, both solved densely.
pub fn corollary23_roundtrip(
    op: &DiscreteOperator,
    radius: f64,
    band: [f64; 2],
    delta: f64,
    eps: f64,
    cap: f64,
    opts: &SolverOptions,
) -> Result<Corollary23Report> {
    if !(band[0] >= 0.0 && band[0] <= band[1]) || !(delta > 0.0) || !(eps > 0.0) {
        return invalid("need 0 <= band[0] <= band[1], delta > 0 and eps > 0");
    }
    let k = op.fiber_nodes();
    let outside_a: Vec<bool> = (0..op.dim()).map(|i| op.base_dist[i / k] > 0.0).collect();
    if !outside_a.iter().any(|&b| b) {
        return invalid("the marked set covers the whole domain");
    }
    let mu1 = mu_k(op, &outside_a, 1, opts)?;
    let threshold = mu1.min(cap) - eps;
    if band[1] >= threshold {
        return Err(Error::Precondition(format!(
            "band {band:?} must lie below min(mu1(M - A), C) - eps = {threshold:.6} (mu1(M - A) = {mu1:.6})"
        )));
    }
    let ball = op.mask(&Subdomain::BallOfA { radius });
    let (bs, bm, keep) = op.restrict(&ball);
    if keep.is_empty() {
        return invalid("ball is empty");
    }
    let (vals, vecs) = dense_pencil(&op.stiffness, &op.mass);
    let (bvals, bvecs) = dense_pencil(&bs, &bm);
    let forward: Vec<BandTransfer> = vals
        .iter()
        .zip(&vecs)
        .filter(|(l, _)| **l >= band[0] && **l <= band[1])
        .map(|(&l, v)| {
            let restricted: Vec<f64> = keep.iter().map(|&i| v[i]).collect();
            let captured = band_mass(&bvals, &bvecs, &bm, &restricted, l - delta, l + delta);
            let kept: f64 = keep.iter().map(|&i| v[i] * v[i] * op.mass[i]).sum();
            BandTransfer { eigenvalue: l, band_mass: captured * kept / op.mass_norm_sq(v) }
        })
        .collect();
    if forward.is_empty() {
        return invalid(format!("band {band:?} contains no eigenvalue of the domain"));
    }
    let backward = bvals
        .iter()
        .zip(&bvecs)
        .filter(|(l, _)| **l >= band[0] && **l <= band[1])
        .map(|(&l, v)| {
            let mut ext = vec![0.0; op.dim()];
            for (&i, &x) in keep.iter().zip(v) {
                ext[i] = x;
            }
            BandTransfer { eigenvalue: l, band_mass: band_mass(&vals, &vecs, &op.mass, &ext, l - delta, l + delta) }
        })
        .collect::<Vec<_>>();
    let passed = forward.iter().chain(&backward).all(|t| t.band_mass >= 1.0 - delta);
    Ok(Corollary23Report { radius, band, delta, mu1_outside_a: mu1, threshold, forward, backward, passed })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::discrete_laplace::{assemble_mode_operator, Grid1D};
    use crate::metric_models::{pinch_limit, FiberMetric, OuterSpec};
    use std::f64::consts::PI;

    fn cusp_op() -> DiscreteOperator {
        let comps = pinch_limit(&FiberMetric::circle(2.0 * PI), &OuterSpec::flat(6.0), 9.0).unwrap();
        assemble_mode_operator(&Grid1D::new(&comps[1], 0.05).unwrap(), 0.0).unwrap()
    }

    #[test]
    fn interior_band_round_trips() {
        let op = cusp_op();
        let rep = corollary23_roundtrip(&op, 8.0, [0.1, 0.25], 0.05, 0.05, 10.0, &SolverOptions::default()).unwrap();
        assert!(rep.passed, "{rep:?}");
        assert!(rep.worst_mass() >= 0.99, "{rep:?}");
        assert!(!rep.backward.is_empty());
    }

    #[test]
    fn band_above_threshold_is_rejected() {
        let op = cusp_op();
        let err = corollary23_roundtrip(&op, 6.0, [0.3, 0.4], 0.05, 0.05, 10.0, &SolverOptions::default()).unwrap_err();
        assert!(matches!(err, Error::Precondition(_)));
    }

    #[test]
    fn deficit_shrinks_with_radius() {
        let op = cusp_op();
        let deficits: Vec<f64> = [2.0, 4.0, 6.0, 8.0]
            .iter()
            .map(|&r| 1.0 - corollary23_roundtrip(&op, r, [0.1, 0.25], 0.05, 0.05, 10.0, &SolverOptions::default()).unwrap().worst_mass())
            .collect();
        assert!(deficits.windows(2).all(|w| w[1] < w[0]), "{deficits:?}");
    }
}
