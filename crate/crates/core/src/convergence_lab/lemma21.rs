use crate::discrete_laplace::{mu_spectrum, rayleigh_quotient, DiscreteOperator};
use crate::error::{invalid, Result};
use crate::linalg::SolverOptions;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// One evaluated pair `(u, v)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Lemma21Trial {
    pub rq_sum: f64,
    pub rq_u: f64,
    pub hypothesis: bool,
    /// `|v|^2 / (eps |u|^2)`; below 1 when the first conclusion holds.
    pub mass_ratio: f64,
    /// `|grad v|^2 / (eps (|grad u|^2 + 2 eps |u|^2))`.
    pub energy_ratio: f64,
    pub violation: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Lemma21Report {
    pub epsilon: f64,
    pub mu1_v: f64,
    pub trials: usize,
    pub satisfied: usize,
    pub violations: usize,
    pub inconclusive: bool,
    pub max_mass_ratio: f64,
    pub max_energy_ratio: f64,
}

struct Split {
    u_basis: Vec<Vec<f64>>,
    v_basis: Vec<Vec<f64>>,
    mu1_v: f64,
}

fn lift(keep: &[usize], local: &[f64], n: usize) -> Vec<f64> {
    let mut out = vec![0.0; n];
    for (&i, &x) in keep.iter().zip(local) {
        out[i] = x;
    }
    out
}

fn prepare(op: &DiscreteOperator, mask_u: &[bool], mask_v: &[bool], eps: f64, opts: &SolverOptions) -> Result<Split> {
    let n = op.dim();
    if mask_u.len() != n || mask_v.len() != n {
        return invalid("mask length differs from the operator dimension");
    }
    if !(eps > 0.0 && eps < 1.0) {
        return invalid(format!("epsilon must lie in (0, 1), got {eps}"));
    }
    let k = op.fiber_nodes();
    let u_pos: Vec<f64> = (0..n).filter(|&i| mask_u[i]).map(|i| op.base_u[i / k]).collect();
    let v_pos: Vec<f64> = (0..n).filter(|&i| mask_v[i]).map(|i| op.base_u[i / k]).collect();
    if u_pos.is_empty() || v_pos.is_empty() {
        return invalid("both subsets must be nonempty");
    }
    let gap = u_pos.iter().flat_map(|a| v_pos.iter().map(move |b| (a - b).abs())).fold(f64::INFINITY, f64::min);
    if gap < 2.0 * op.spacing * (1.0 - 1e-9) {
        return invalid(format!("subsets must be separated by at least two grid cells, gap is {gap}"));
    }
    let su = mu_spectrum(op, mask_u, 2, opts)?;
    let sv = mu_spectrum(op, mask_v, 3.min(v_pos.len()), opts)?;
    let keep_u: Vec<usize> = (0..n).filter(|&i| mask_u[i]).collect();
    let keep_v: Vec<usize> = (0..n).filter(|&i| mask_v[i]).collect();
    let u_basis = su.eigenvectors.as_ref().unwrap().iter().map(|x| lift(&keep_u, x, n)).collect();
    let v_basis = sv.eigenvectors.as_ref().unwrap().iter().map(|x| lift(&keep_v, x, n)).collect();
    Ok(Split { u_basis, v_basis, mu1_v: sv.eigenvalues[0] })
}

fn evaluate(op: &DiscreteOperator, u: &[f64], v: &[f64], eps: f64, mu1_v: f64) -> Result<Lemma21Trial> {
    let sum: Vec<f64> = u.iter().zip(v).map(|(a, b)| a + b).collect();
    let rq_sum = rayleigh_quotient(op, &sum)?;
    let rq_u = rayleigh_quotient(op, u)?;
    let hypothesis = rq_sum < mu1_v - eps && (rq_sum - rq_u).abs() < eps * eps;
    let nu = op.mass_norm_sq(u);
    let nv = op.mass_norm_sq(v);
    let eu = op.stiffness.quad_form(u);
    let ev = op.stiffness.quad_form(v);
    let mass_ratio = nv / (eps * nu);
    let energy_ratio = ev / (eps * (eu + 2.0 * eps * nu));
    let violation = hypothesis && (mass_ratio >= 1.0 || energy_ratio >= 1.0);
    Ok(Lemma21Trial { rq_sum, rq_u, hypothesis, mass_ratio, energy_ratio, violation })
}

fn combine(basis: &[Vec<f64>], coef: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; basis[0].len()];
    for (b, c) in basis.iter().zip(coef) {
        out.iter_mut().zip(b).for_each(|(o, x)| *o += c * x);
    }
    out
}

/// Random trials with `u` in the span of the two lowest Dirichlet modes of
/// `U` and `v = t * w`, `w` a random mix of the three lowest modes of `V`
/// scaled to `|u|`, `t` log-uniform in `[1e-4, 1]`. The threshold is
/// `delta(eps) = eps^2`.
pub fn lemma21_property_trial(
    op: &DiscreteOperator,
    mask_u: &[bool],
    mask_v: &[bool],
    eps: f64,
    trials: usize,
    seed: u64,
    opts: &SolverOptions,
) -> Result<Lemma21Report> {
    let split = prepare(op, mask_u, mask_v, eps, opts)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rep = Lemma21Report {
        epsilon: eps,
        mu1_v: split.mu1_v,
        trials,
        satisfied: 0,
        violations: 0,
        inconclusive: false,
        max_mass_ratio: 0.0,
        max_energy_ratio: 0.0,
    };
    for _ in 0..trials {
        let a: Vec<f64> = (0..split.u_basis.len()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let b: Vec<f64> = (0..split.v_basis.len()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let t = 10f64.powf(rng.gen_range(-4.0..0.0));
        let u = combine(&split.u_basis, &a);
        let w = combine(&split.v_basis, &b);
        let nu = op.mass_norm_sq(&u);
        let nw = op.mass_norm_sq(&w);
        if !(nu > 0.0 && nw > 0.0) {
            continue;
        }
        let scale = t * (nu / nw).sqrt();
        let v: Vec<f64> = w.iter().map(|x| scale * x).collect();
        let r = evaluate(op, &u, &v, eps, split.mu1_v)?;
        if r.hypothesis {
            rep.satisfied += 1;
            rep.max_mass_ratio = rep.max_mass_ratio.max(r.mass_ratio);
            rep.max_energy_ratio = rep.max_energy_ratio.max(r.energy_ratio);
        }
        rep.violations += usize::from(r.violation);
    }
    rep.inconclusive = rep.satisfied < 10;
    Ok(rep)
}

/// `u` the ground state of `U`, `v` the ground state of `V` scaled so that
/// `R(u + v) - R(u)` sits just below `eps^2`.
pub fn lemma21_near_extremal(
    op: &DiscreteOperator,
    mask_u: &[bool],
    mask_v: &[bool],
    eps: f64,
    opts: &SolverOptions,
) -> Result<Lemma21Trial> {
    let split = prepare(op, mask_u, mask_v, eps, opts)?;
    let u = &split.u_basis[0];
    let psi = &split.v_basis[0];
    let r = rayleigh_quotient(op, u)?;
    let lp = rayleigh_quotient(op, psi)?;
    let d = eps * eps * (1.0 - 1e-6);
    if !(lp - r > d) {
        return invalid("ground state of V does not lie above that of U");
    }
    // R(u + v) - R(u) = x (lp - r) / (1 + x) with x = |v|^2 / |u|^2
    let x = d / (lp - r - d);
    let scale = (x * op.mass_norm_sq(u) / op.mass_norm_sq(psi)).sqrt();
    let v: Vec<f64> = psi.iter().map(|p| scale * p).collect();
    evaluate(op, u, &v, eps, split.mu1_v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::discrete_laplace::{assemble_mode_operator, Grid1D, Subdomain};
    use crate::metric_models::{EndCondition, FiberMetric, Segment, SurfaceModel, WarpProfile};

    fn split_tube() -> (DiscreteOperator, Vec<bool>, Vec<bool>) {
        let m = SurfaceModel::new(
            FiberMetric::circle(1.0),
            vec![Segment::new(WarpProfile::FlatTube { rho: 1.0 }, 0.0, 8.0)],
            [EndCondition::Neumann; 2],
            vec![[0.0, 1.0]],
        )
        .unwrap();
        let op = assemble_mode_operator(&Grid1D::new(&m, 0.02).unwrap(), 0.0).unwrap();
        let u = op.mask(&Subdomain::BaseInterval { lo: 0.0, hi: 6.0 });
        let v = op.mask(&Subdomain::BaseInterval { lo: 6.1, hi: 8.0 });
        (op, u, v)
    }

    #[test]
    fn zero_v_satisfies_conclusions() {
        let (op, mu, mv) = split_tube();
        let split = prepare(&op, &mu, &mv, 0.1, &SolverOptions::default()).unwrap();
        let r = evaluate(&op, &split.u_basis[0], &vec![0.0; op.dim()], 0.1, split.mu1_v).unwrap();
        assert!(r.hypothesis && !r.violation);
        assert_eq!(r.mass_ratio, 0.0);
    }

    #[test]
    fn seeded_trials_have_no_violation() {
        let (op, mu, mv) = split_tube();
        let rep = lemma21_property_trial(&op, &mu, &mv, 0.1, 300, 11, &SolverOptions::default()).unwrap();
        assert_eq!(rep.violations, 0);
        assert!(!rep.inconclusive);
        assert!(rep.max_mass_ratio < 1.0);
    }

    #[test]
    fn near_extremal_pair_holds() {
        let (op, mu, mv) = split_tube();
        let r = lemma21_near_extremal(&op, &mu, &mv, 0.1, &SolverOptions::default()).unwrap();
        assert!(r.hypothesis);
        assert!(!r.violation);
        assert!(((r.rq_sum - r.rq_u) / 0.01 - 1.0).abs() < 1e-4);
    }

    #[test]
    fn touching_subsets_are_rejected() {
        let (op, mu, _) = split_tube();
        let touching = op.mask(&Subdomain::BaseInterval { lo: 5.99, hi: 8.0 });
        assert!(lemma21_property_trial(&op, &mu, &touching, 0.1, 10, 1, &SolverOptions::default()).is_err());
    }
}
