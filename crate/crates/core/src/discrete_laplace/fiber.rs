use crate::error::{invalid, Result};
use crate::metric_models::FiberMetric;
use nalgebra::DMatrix;
use std::f64::consts::PI;

/// Ring-graph eigenvalue of mode `j` on `k` nodes of a circle of length `length`.
pub fn ring_eigenvalue(length: f64, k: usize, j: usize) -> f64 {
    let h = length / k as f64;
    4.0 * (PI * j as f64 / k as f64).sin().powi(2) / (h * h)
}

/// Discrete fiber eigenvalues, ascending with multiplicity.
///
/// For a torus `R^d / Z^d` with Gram matrix `G` and `k` nodes per axis the
/// symbol is `sum_ab G^{ab} sigma_a sigma_b` with `sigma_a = 2k sin(pi k_a / k)`,
/// frequencies `k_a` taken in `(-k/2, k/2]`.
pub fn fiber_mode_eigenvalues(fiber: &FiberMetric, k: usize) -> Result<Vec<f64>> {
    if k < 2 {
        return invalid(format!("fiber node count must be at least 2, got {k}"));
    }
    fiber.validate()?;
    let mut out = match fiber {
        FiberMetric::Circle { length } => {
            if k % 2 != 0 {
                return invalid(format!("circle fiber node count must be even, got {k}"));
            }
            (0..k).map(|j| ring_eigenvalue(*length, k, j)).collect::<Vec<_>>()
        }
        FiberMetric::FlatTorus { gram } => {
            let d = gram.len();
            let g = DMatrix::from_fn(d, d, |i, j| gram[i][j]);
            let ginv = g.try_inverse().expect("validated gram matrix is invertible");
            let total = k.pow(d as u32);
            (0..total)
                .map(|mut idx| {
                    let sigma: Vec<f64> = (0..d)
                        .map(|_| {
                            let ka = (idx % k) as i64;
                            idx /= k;
                            let ka = if ka > (k / 2) as i64 { ka - k as i64 } else { ka };
                            2.0 * k as f64 * (PI * ka as f64 / k as f64).sin()
                        })
                        .collect();
                    let mut v = 0.0;
                    for a in 0..d {
                        for b in 0..d {
                            v += ginv[(a, b)] * sigma[a] * sigma[b];
                        }
                    }
                    v.max(0.0)
                })
                .collect()
        }
    };
    out.sort_by(f64::total_cmp);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn circle_examples() {
        let ev = fiber_mode_eigenvalues(&FiberMetric::circle(1.0), 4).unwrap();
        // 4 sin^2(pi j / 4) / (1/4)^2 for j = 0..3
        let expect = [0.0, 32.0, 32.0, 64.0];
        for (a, b) in ev.iter().zip(expect) {
            assert!((a - b).abs() < 1e-12);
        }
        let big = fiber_mode_eigenvalues(&FiberMetric::circle(2.0 * PI), 4096).unwrap();
        assert_eq!(big[0], 0.0);
        assert!((big[1] - 1.0).abs() < 1e-6);
    }

    #[test]
    fn torus_with_diagonal_gram_is_sum_of_circles() {
        let fib = FiberMetric::FlatTorus { gram: vec![vec![4.0, 0.0], vec![0.0, 9.0]] };
        let ev = fiber_mode_eigenvalues(&fib, 6).unwrap();
        let mut expect = Vec::new();
        for a in 0..6 {
            for b in 0..6 {
                expect.push(ring_eigenvalue(2.0, 6, a) + ring_eigenvalue(3.0, 6, b));
            }
        }
        expect.sort_by(f64::total_cmp);
        for (x, y) in ev.iter().zip(&expect) {
            assert!((x - y).abs() < 1e-10 * y.max(1.0));
        }
    }

    #[test]
    fn rejects_small_or_odd() {
        assert!(fiber_mode_eigenvalues(&FiberMetric::circle(1.0), 1).is_err());
        assert!(fiber_mode_eigenvalues(&FiberMetric::circle(1.0), 5).is_err());
    }
}
