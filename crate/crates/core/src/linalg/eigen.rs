use super::skyline::EnvelopeCholesky;
use super::sparse::CsrMatrix;
use crate::error::{Error, Result};
use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverOptions {
    /// Residual tolerance `|Sv - lMv| / |Mv|`.
    pub tol: f64,
    pub seed: u64,
    pub max_iter: usize,
    /// Problems up to this size go to the dense solver.
    pub dense_limit: usize,
    /// Shift for the inverse iteration; must be below the spectrum.
    pub shift: f64,
    /// Extra block vectors beyond `count`.
    pub block_extra: usize,
    pub cluster_tol: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            tol: 1e-9,
            seed: 7,
            max_iter: 3000,
            dense_limit: 500,
            shift: -1e-2,
            block_extra: 8,
            cluster_tol: 1e-8,
        }
    }
}

/// Low part of a generalized symmetric spectrum `S v = l M v`.
#[derive(Clone, Debug, Default, Serialize, Deserialize, PartialEq)]
pub struct SpectrumResult {
    pub eigenvalues: Vec<f64>,
    pub residuals: Vec<f64>,
    /// Inclusive index ranges `[first, last]` of eigenvalue clusters.
    pub clusters: Vec<[usize; 2]>,
    /// M-orthonormal eigenvectors, when requested.
    #[serde(skip)]
    pub eigenvectors: Option<Vec<Vec<f64>>>,
}

impl SpectrumResult {
    pub fn new(eigenvalues: Vec<f64>, residuals: Vec<f64>, vectors: Option<Vec<Vec<f64>>>, cluster_tol: f64) -> Self {
        let clusters = cluster_ranges(&eigenvalues, cluster_tol);
        Self { eigenvalues, residuals, clusters, eigenvectors: vectors }
    }

    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    /// Cluster sizes in ascending eigenvalue order.
    pub fn multiplicities(&self) -> Vec<usize> {
        self.clusters.iter().map(|c| c[1] - c[0] + 1).collect()
    }

    pub fn cluster_of(&self, index: usize) -> usize {
        self.clusters.iter().position(|c| c[0] <= index && index <= c[1]).expect("index in range")
    }

    pub fn vector(&self, i: usize) -> Option<&[f64]> {
        self.eigenvectors.as_ref().map(|v| v[i].as_slice())
    }

    pub fn write_csv<W: std::io::Write>(&self, w: W) -> Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        wr.write_record(["index", "value", "residual", "cluster"])?;
        for (i, (v, r)) in self.eigenvalues.iter().zip(&self.residuals).enumerate() {
            wr.write_record([i.to_string(), format!("{v:.15e}"), format!("{r:.3e}"), self.cluster_of(i).to_string()])?;
        }
        wr.flush()?;
        Ok(())
    }
}

/// Groups consecutive ascending eigenvalues whose gap is below
/// `tol * max(|a|, |b|, 1e-2)`.
pub fn cluster_ranges(vals: &[f64], tol: f64) -> Vec<[usize; 2]> {
    let mut out: Vec<[usize; 2]> = Vec::new();
    for (i, &v) in vals.iter().enumerate() {
        match out.last_mut() {
            Some(c) if {
                let prev = vals[i - 1];
                (v - prev).abs() <= tol * prev.abs().max(v.abs()).max(1e-2)
            } =>
            {
                c[1] = i
            }
            _ => out.push([i, i]),
        }
    }
    out
}

pub fn residual(s: &CsrMatrix, mass: &[f64], lambda: f64, v: &[f64]) -> f64 {
    let sv = s.mul_vec(v);
    let mut num = 0.0;
    let mut den = 0.0;
    for i in 0..v.len() {
        let mv = mass[i] * v[i];
        num += (sv[i] - lambda * mv).powi(2);
        den += mv * mv;
    }
    (num / den).sqrt()
}

/// All eigenpairs by dense decomposition of `M^{-1/2} S M^{-1/2}`.
pub fn dense_pencil(s: &CsrMatrix, mass: &[f64]) -> (Vec<f64>, Vec<Vec<f64>>) {
    let n = s.dim();
    let d: Vec<f64> = mass.iter().map(|m| 1.0 / m.sqrt()).collect();
    let mut c = DMatrix::<f64>::zeros(n, n);
    for (i, j, v) in s.entries() {
        c[(i, j)] += d[i] * v * d[j];
    }
    let eig = SymmetricEigen::new(c);
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let vals = idx.iter().map(|&k| eig.eigenvalues[k]).collect();
    let vecs = idx
        .iter()
        .map(|&k| {
            let mut v: Vec<f64> = (0..n).map(|i| eig.eigenvectors[(i, k)] * d[i]).collect();
            fix_sign(&mut v);
            v
        })
        .collect();
    (vals, vecs)
}

/// Deterministic sign: the largest-magnitude entry is positive.
pub fn fix_sign(v: &mut [f64]) {
    let mut best = 0.0f64;
    for &x in v.iter() {
        if x.abs() > best.abs() + 1e-12 * best.abs().max(1e-300) {
            best = x;
        }
    }
    if best < 0.0 {
        v.iter_mut().for_each(|x| *x = -*x);
    }
}

fn m_dot(m: &[f64], a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).zip(m).map(|((x, y), w)| x * y * w).sum()
}

/// M-orthonormalizes columns in place (classical Gram-Schmidt, twice).
fn m_orthonormalize(cols: &mut [Vec<f64>], m: &[f64], rng: &mut ChaCha8Rng) {
    for k in 0..cols.len() {
        for attempt in 0..3 {
            for _ in 0..2 {
                let (done, rest) = cols.split_at_mut(k);
                let c = &mut rest[0];
                for q in done.iter() {
                    let h = m_dot(m, q, c);
                    c.iter_mut().zip(q).for_each(|(x, y)| *x -= h * y);
                }
            }
            let nrm = m_dot(m, &cols[k], &cols[k]).sqrt();
            if nrm > 1e-10 || attempt == 2 {
                let inv = 1.0 / nrm.max(1e-300);
                cols[k].iter_mut().for_each(|x| *x *= inv);
                break;
            }
            for x in cols[k].iter_mut() {
                *x = rng.gen_range(-1.0..1.0);
            }
        }
    }
}

/// The `count` smallest eigenpairs of `S v = l M v`.
pub fn low_pencil(s: &CsrMatrix, mass: &[f64], count: usize, opts: &SolverOptions) -> Result<SpectrumResult> {
    let n = s.dim();
    if count == 0 || count > n {
        return Err(Error::InvalidInput(format!("requested {count} eigenpairs of a dimension-{n} operator")));
    }
    if !(opts.tol > 0.0) {
        return Err(Error::InvalidInput("solver tolerance must be positive".into()));
    }
    let block = (count + opts.block_extra).max(2 * count).min(n);
    if n <= opts.dense_limit || 2 * block >= n {
        let (vals, vecs) = dense_pencil(s, mass);
        let vals: Vec<f64> = vals[..count].to_vec();
        let vecs: Vec<Vec<f64>> = vecs.into_iter().take(count).collect();
        let res = vals.iter().zip(&vecs).map(|(&l, v)| residual(s, mass, l, v)).collect();
        return Ok(SpectrumResult::new(vals, res, Some(vecs), opts.cluster_tol));
    }
    subspace_iteration(s, mass, count, block, opts)
}

fn subspace_iteration(
    s: &CsrMatrix,
    mass: &[f64],
    count: usize,
    block: usize,
    opts: &SolverOptions,
) -> Result<SpectrumResult> {
    let n = s.dim();
    let extra: Vec<f64> = mass.iter().map(|m| -opts.shift * m).collect();
    let chol = EnvelopeCholesky::factor(s, &extra)?;
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut x: Vec<Vec<f64>> = (0..block).map(|_| (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect()).collect();
    m_orthonormalize(&mut x, mass, &mut rng);
    let mut best = vec![f64::INFINITY; count];
    for it in 1..=opts.max_iter {
        let mut y: Vec<Vec<f64>> = x
            .par_iter()
            .map(|c| {
                let mc: Vec<f64> = c.iter().zip(mass).map(|(a, b)| a * b).collect();
                chol.solve(&mc)
            })
            .collect();
        m_orthonormalize(&mut y, mass, &mut rng);
        let sy: Vec<Vec<f64>> = y.par_iter().map(|c| s.mul_vec(c)).collect();
        let a = DMatrix::from_fn(block, block, |i, j| {
            let v: f64 = y[i].iter().zip(&sy[j]).map(|(p, q)| p * q).sum();
            let w: f64 = y[j].iter().zip(&sy[i]).map(|(p, q)| p * q).sum();
            0.5 * (v + w)
        });
        let eig = SymmetricEigen::new(a);
        let mut idx: Vec<usize> = (0..block).collect();
        idx.sort_by(|&p, &q| eig.eigenvalues[p].total_cmp(&eig.eigenvalues[q]));
        x = idx
            .par_iter()
            .map(|&k| {
                let mut v = vec![0.0; n];
                for (j, yj) in y.iter().enumerate() {
                    let c = eig.eigenvectors[(j, k)];
                    v.iter_mut().zip(yj).for_each(|(a, b)| *a += c * b);
                }
                v
            })
            .collect();
        let theta: Vec<f64> = idx.iter().map(|&k| eig.eigenvalues[k]).collect();
        let res: Vec<f64> = (0..count).into_par_iter().map(|i| residual(s, mass, theta[i], &x[i])).collect();
        for (b, r) in best.iter_mut().zip(&res) {
            *b = b.min(*r);
        }
        if res.iter().all(|&r| r <= opts.tol) {
            let mut vecs: Vec<Vec<f64>> = x.into_iter().take(count).collect();
            vecs.iter_mut().for_each(|v| fix_sign(v));
            return Ok(SpectrumResult::new(theta[..count].to_vec(), res, Some(vecs), opts.cluster_tol));
        }
        if it == opts.max_iter {
            let worst = res.iter().cloned().fold(0.0, f64::max);
            return Err(Error::NoConvergence { iterations: it, worst, residuals: best });
        }
    }
    unreachable!()
}
