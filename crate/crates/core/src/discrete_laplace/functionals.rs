use super::operator::{DiscreteOperator, Layout, Subdomain};
use crate::error::{invalid, Error, Result};
use crate::linalg::{dense_pencil, low_pencil, residual, SolverOptions, SpectrumResult};
use serde::{Deserialize, Serialize};

/// `f^T S f / f^T M f`.
pub fn rayleigh_quotient(op: &DiscreteOperator, f: &[f64]) -> Result<f64> {
    if f.len() != op.dim() {
        return invalid(format!("function has {} values, operator has {} unknowns", f.len(), op.dim()));
    }
    let den = op.mass_norm_sq(f);
    if !(den > 0.0) {
        return invalid("Rayleigh quotient of the zero function");
    }
    Ok(op.stiffness.quad_form(f) / den)
}

/// Lowest `count` Dirichlet values of the principal sub-operator on `mask`.
pub fn mu_spectrum(op: &DiscreteOperator, mask: &[bool], count: usize, opts: &SolverOptions) -> Result<SpectrumResult> {
    let (s, m, keep) = op.restrict(mask);
    if keep.is_empty() {
        return invalid("subdomain is empty");
    }
    if count == 0 || count > keep.len() {
        return invalid(format!("k = {count} out of range for a subdomain of {} unknowns", keep.len()));
    }
    low_pencil(&s, &m, count, opts)
}

/// `k`-th (1-based) min-max value of the subdomain.
pub fn mu_k(op: &DiscreteOperator, mask: &[bool], k: usize, opts: &SolverOptions) -> Result<f64> {
    Ok(mu_spectrum(op, mask, k, opts)?.eigenvalues[k - 1])
}

/// Every eigenpair by dense decomposition.
pub fn full_spectrum(op: &DiscreteOperator, cluster_tol: f64) -> SpectrumResult {
    let (vals, vecs) = dense_pencil(&op.stiffness, &op.mass);
    let res = vals.iter().zip(&vecs).map(|(&l, v)| residual(&op.stiffness, &op.mass, l, v)).collect();
    SpectrumResult::new(vals, res, Some(vecs), cluster_tol)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BandMasses {
    /// Half-open bands `[lo, hi)`.
    pub bands: Vec<[f64; 2]>,
    pub masses: Vec<f64>,
    pub norm_sq: f64,
}

/// Squared norms of the projections of `f` onto the eigenvectors of each band.
pub fn spectral_band_masses(op: &DiscreteOperator, f: &[f64], bands: &[[f64; 2]], spectrum: &SpectrumResult) -> Result<BandMasses> {
    let Some(vecs) = spectrum.eigenvectors.as_ref() else {
        return invalid("band masses need eigenvectors");
    };
    let mut sorted: Vec<[f64; 2]> = bands.to_vec();
    sorted.sort_by(|a, b| a[0].total_cmp(&b[0]));
    for b in &sorted {
        if !(b[0] < b[1]) {
            return invalid(format!("band {b:?} is empty"));
        }
    }
    if sorted.windows(2).any(|w| w[1][0] < w[0][1]) {
        return invalid("bands overlap");
    }
    let coeffs: Vec<f64> = vecs.iter().map(|v| op.mass_inner(v, f)).collect();
    let masses = bands
        .iter()
        .map(|b| {
            spectrum
                .eigenvalues
                .iter()
                .zip(&coeffs)
                .filter(|(l, _)| **l >= b[0] && **l < b[1])
                .map(|(_, c)| c * c)
                .sum()
        })
        .collect();
    Ok(BandMasses { bands: bands.to_vec(), masses, norm_sq: op.mass_norm_sq(f) })
}

/// Multiplication by a radial cutoff `v(dist(., A))`.
#[derive(Clone, Debug)]
pub struct CutoffOperator {
    pub weights: Vec<f64>,
}

impl CutoffOperator {
    pub fn apply(&self, f: &[f64]) -> Vec<f64> {
        f.iter().zip(&self.weights).map(|(a, w)| a * w).collect()
    }
}

/// Cutoff equal to 1 on `B(A, r0)`, 0 outside `B(A, r0 + 2)`, linear in between.
pub fn cutoff_operator_l(op: &DiscreteOperator, r0: f64) -> Result<CutoffOperator> {
    if r0 + 2.0 > op.max_dist() {
        return invalid(format!("B(A, {}) is not contained in the truncated domain (max distance {})", r0 + 2.0, op.max_dist()));
    }
    let k = op.fiber_nodes();
    let weights = (0..op.dim()).map(|i| (1.0 - (op.base_dist[i / k] - r0) / 2.0).clamp(0.0, 1.0)).collect();
    Ok(CutoffOperator { weights })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ShellCutoff {
    pub u1f: Vec<f64>,
    pub u2f: Vec<f64>,
    pub m: usize,
    pub k: usize,
    /// Energy plus mass of `f - f u`.
    pub residual: f64,
    pub verified: bool,
}

/// Splits `f` across a low-energy shell `E_m`; both ramps sit inside the shell
/// so that `1 - u` is supported there.
pub fn shell_cutoff(op: &DiscreteOperator, f: &[f64], c: f64, rho: f64) -> Result<ShellCutoff> {
    if !(rho > 0.0) || !(c > 0.0) {
        return invalid("shell cutoff needs positive C and rho");
    }
    let nrm = op.mass_norm_sq(f);
    if (nrm - 1.0).abs() > 1e-8 {
        return Err(Error::Precondition(format!("function must have unit norm, got |f|^2 = {nrm}")));
    }
    let rq = rayleigh_quotient(op, f)?;
    if !(rq < c) {
        return Err(Error::Precondition(format!("Rayleigh quotient {rq} is not below C = {c}")));
    }
    let k = (4.0 * (1.0 + c) / rho).floor() as usize + 1;
    let reach = op.max_dist();
    let mut chosen = None;
    for m in 1..=k {
        if 4.0 * m as f64 + 4.0 > reach {
            break;
        }
        let mask = op.mask(&Subdomain::Shell { m });
        if op.masked_energy(f, &mask) + op.masked_mass(f, &mask) < rho / 4.0 {
            chosen = Some(m);
            break;
        }
    }
    let Some(m) = chosen else {
        return Err(Error::Precondition(format!(
            "no shell E_m with m <= {k} inside the truncated domain (max distance {reach}) carries energy below rho/4"
        )));
    };
    let fk = op.fiber_nodes();
    let lo = 4.0 * m as f64;
    let (mut u1f, mut u2f, mut rest) = (vec![0.0; f.len()], vec![0.0; f.len()], vec![0.0; f.len()]);
    for i in 0..f.len() {
        let d = op.base_dist[i / fk];
        let u1 = ((lo + 2.0 - d) / 2.0).clamp(0.0, 1.0);
        let u2 = ((d - lo - 2.0) / 2.0).clamp(0.0, 1.0);
        u1f[i] = u1 * f[i];
        u2f[i] = u2 * f[i];
        rest[i] = f[i] - u1f[i] - u2f[i];
    }
    let residual = op.stiffness.quad_form(&rest) + op.mass_norm_sq(&rest);
    Ok(ShellCutoff { u1f, u2f, m, k, residual, verified: residual < rho })
}

/// Fiber average per base node (zeroth fiber mode).
pub fn fiber_mean_projection(op: &DiscreteOperator, f: &[f64]) -> Result<Vec<f64>> {
    if f.len() != op.dim() {
        return invalid("shape mismatch between function and operator");
    }
    Ok(match op.layout {
        Layout::Mode { mode_ev } => {
            if mode_ev == 0.0 {
                f.to_vec()
            } else {
                vec![0.0; f.len()]
            }
        }
        Layout::Tensor { k } => f
            .chunks(k)
            .flat_map(|ring| {
                let mean = ring.iter().sum::<f64>() / k as f64;
                std::iter::repeat(mean).take(k)
            })
            .collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::discrete_laplace::grid::Grid1D;
    use crate::discrete_laplace::operator::{assemble_mode_operator, assemble_tensor_operator};
    use crate::metric_models::{EndCondition, FiberMetric, Segment, SurfaceModel, WarpProfile};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn tube(len: f64, ends: [EndCondition; 2], marker: [f64; 2]) -> SurfaceModel {
        SurfaceModel::new(
            FiberMetric::circle(1.0),
            vec![Segment::new(WarpProfile::FlatTube { rho: 1.0 }, 0.0, len)],
            ends,
            vec![marker],
        )
        .unwrap()
    }

    #[test]
    fn rayleigh_of_constant_and_hat() {
        let g = Grid1D::with_nodes(&tube(3.0, [EndCondition::Neumann; 2], [0.0, 1.0]), 31).unwrap();
        let op = assemble_mode_operator(&g, 0.0).unwrap();
        assert!(rayleigh_quotient(&op, &vec![1.0; op.dim()]).unwrap().abs() < 1e-14);
        // hat on [1, 2] peaking at 1.5: the gradient energy is 2 * (1/0.5)^2 * 0.5 = 4
        // per unit fiber length; the lumped mass is sum of h * hat^2
        let hat: Vec<f64> = g.u.iter().map(|&u| (1.0 - (u - 1.5).abs() / 0.5).max(0.0)).collect();
        let h = g.spacing;
        let mass_sum: f64 = hat.iter().map(|v| h * v * v).sum();
        let expect = 4.0 / mass_sum;
        let got = rayleigh_quotient(&op, &hat).unwrap();
        assert!((got - expect).abs() < 1e-10, "{got} vs {expect}");
        assert!(rayleigh_quotient(&op, &vec![0.0; op.dim()]).is_err());
    }

    #[test]
    fn mu_k_monotone_in_k_and_domain() {
        let g = Grid1D::with_nodes(&tube(4.0, [EndCondition::Dirichlet; 2], [0.0, 0.5]), 81).unwrap();
        let op = assemble_mode_operator(&g, 0.0).unwrap();
        let opts = SolverOptions::default();
        let all = op.mask(&Subdomain::All);
        let full = low_pencil(&op.stiffness, &op.mass, 4, &opts).unwrap();
        let m = mu_spectrum(&op, &all, 4, &opts).unwrap();
        assert!((m.eigenvalues[0] - full.eigenvalues[0]).abs() < 1e-12);
        assert!(m.eigenvalues.windows(2).all(|w| w[1] >= w[0]));
        let mut prev = vec![f64::INFINITY; 3];
        for r in [1.0, 2.0, 3.0, 4.0] {
            let mask = op.mask(&Subdomain::BallOfA { radius: r });
            let s = mu_spectrum(&op, &mask, 3, &opts).unwrap();
            for k in 0..3 {
                assert!(s.eigenvalues[k] <= prev[k] + 1e-12);
                prev[k] = s.eigenvalues[k];
            }
        }
        assert!(mu_k(&op, &all, 0, &opts).is_err());
        assert!(mu_k(&op, &vec![false; op.dim()], 1, &opts).is_err());
    }

    #[test]
    fn band_masses_partition_norm() {
        let g = Grid1D::with_nodes(&tube(2.0, [EndCondition::Dirichlet; 2], [0.0, 0.5]), 41).unwrap();
        let op = assemble_mode_operator(&g, 1.0).unwrap();
        let spec = full_spectrum(&op, 1e-8);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let f: Vec<f64> = (0..op.dim()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let bands = [[0.0, 10.0], [10.0, 100.0], [100.0, f64::INFINITY]];
        let bm = spectral_band_masses(&op, &f, &bands, &spec).unwrap();
        assert!((bm.masses.iter().sum::<f64>() - bm.norm_sq).abs() < 1e-10 * bm.norm_sq);
        let v = spec.vector(2).unwrap();
        let one = spectral_band_masses(&op, v, &[[spec.eigenvalues[2] - 0.01, spec.eigenvalues[2] + 0.01]], &spec).unwrap();
        assert!((one.masses[0] - 1.0).abs() < 1e-10);
        assert!(spectral_band_masses(&op, &f, &[[0.0, 2.0], [1.0, 3.0]], &spec).is_err());
    }

    #[test]
    fn cutoff_properties() {
        let g = Grid1D::with_nodes(&tube(10.0, [EndCondition::Neumann, EndCondition::Dirichlet], [0.0, 1.0]), 201).unwrap();
        let op = assemble_tensor_operator(&g, 4).unwrap();
        let l = cutoff_operator_l(&op, 3.0).unwrap();
        let inside = op.mask(&Subdomain::BallOfA { radius: 3.0 });
        let f: Vec<f64> = (0..op.dim()).map(|i| if inside[i] { (i as f64).cos() } else { 0.0 }).collect();
        assert_eq!(l.apply(&f), f);
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..20 {
            let a: Vec<f64> = (0..op.dim()).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let b: Vec<f64> = (0..op.dim()).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let lhs = op.mass_inner(&l.apply(&a), &b);
            let rhs = op.mass_inner(&a, &l.apply(&b));
            assert!((lhs - rhs).abs() <= 1e-12 * lhs.abs().max(1.0));
            let diff: Vec<f64> = l.apply(&a).iter().zip(&a).map(|(x, y)| x - y).collect();
            let outside: Vec<bool> = inside.iter().map(|b| !b).collect();
            assert!(op.mass_norm_sq(&diff) <= op.masked_mass(&a, &outside) + 1e-14);
        }
        assert!(cutoff_operator_l(&op, 8.5).is_err());
    }

    #[test]
    fn shell_cutoff_examples() {
        let g = Grid1D::with_nodes(&tube(60.0, [EndCondition::Neumann, EndCondition::Dirichlet], [0.0, 1.0]), 1201).unwrap();
        let op = assemble_mode_operator(&g, 0.0).unwrap();
        // supported near A: u1 f = f
        let near = op.mask(&Subdomain::BallOfA { radius: 4.0 });
        let mut f: Vec<f64> = (0..op.dim()).map(|i| if near[i] { (op.base_u[i] * 0.8).sin().powi(2) } else { 0.0 }).collect();
        let n = op.mass_norm_sq(&f).sqrt();
        f.iter_mut().for_each(|v| *v /= n);
        let r = rayleigh_quotient(&op, &f).unwrap();
        let out = shell_cutoff(&op, &f, r + 1.0, 0.5).unwrap();
        assert_eq!(out.u1f, f);
        assert!(out.u2f.iter().all(|&v| v == 0.0));
        // low-Rayleigh random combination spread along the tube
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut f: Vec<f64> = vec![0.0; op.dim()];
        for j in 1..6 {
            let c: f64 = rng.gen_range(-1.0..1.0);
            for (i, v) in f.iter_mut().enumerate() {
                *v += c * (j as f64 * std::f64::consts::PI * op.base_u[i] / 120.0).cos();
            }
        }
        let n = op.mass_norm_sq(&f).sqrt();
        f.iter_mut().for_each(|v| *v /= n);
        let c = rayleigh_quotient(&op, &f).unwrap() + 0.01;
        let out = shell_cutoff(&op, &f, c, 0.5).unwrap();
        assert!(out.verified, "{out:?}");
        assert!(out.m <= out.k);
        assert!(out.u1f.iter().zip(&out.u2f).all(|(a, b)| *a == 0.0 || *b == 0.0));
        // domain too short for any shell
        let short = Grid1D::with_nodes(&tube(6.0, [EndCondition::Neumann; 2], [0.0, 1.0]), 121).unwrap();
        let sop = assemble_mode_operator(&short, 0.0).unwrap();
        let one = vec![1.0 / sop.mass.iter().sum::<f64>().sqrt(); sop.dim()];
        assert!(shell_cutoff(&sop, &one, 1.0, 0.5).is_err());
    }

    #[test]
    fn fiber_projection() {
        let g = Grid1D::with_nodes(&tube(1.0, [EndCondition::Neumann; 2], [0.0, 0.5]), 17).unwrap();
        let op = assemble_tensor_operator(&g, 6).unwrap();
        let constant_on_fibers: Vec<f64> = (0..op.dim()).map(|i| op.base_u[i / 6].sin()).collect();
        let p = fiber_mean_projection(&op, &constant_on_fibers).unwrap();
        assert!(p.iter().zip(&constant_on_fibers).all(|(a, b)| (a - b).abs() < 1e-15));
        let pure: Vec<f64> = (0..op.dim()).map(|i| (2.0 * std::f64::consts::PI * (i % 6) as f64 / 6.0).cos()).collect();
        assert!(fiber_mean_projection(&op, &pure).unwrap().iter().all(|v| v.abs() < 1e-15));
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let f: Vec<f64> = (0..op.dim()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let p = fiber_mean_projection(&op, &f).unwrap();
        let pp = fiber_mean_projection(&op, &p).unwrap();
        assert!(p.iter().zip(&pp).all(|(a, b)| (a - b).abs() < 1e-12));
        let mode = assemble_mode_operator(&g, 4.0).unwrap();
        assert!(fiber_mean_projection(&mode, &vec![1.0; mode.dim()]).unwrap().iter().all(|&v| v == 0.0));
    }
}
