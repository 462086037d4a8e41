use crate::error::{invalid, Result};

/// Gauss curvature `K = -(sqrt rho)'' / sqrt rho` of `du^2 + rho(u) dtheta^2`
/// from uniform samples; one-sided stencils at the ends.
pub fn gauss_curvature(rho: &[f64], du: f64) -> Result<Vec<f64>> {
    let n = rho.len();
    if n < 3 {
        return invalid("curvature needs at least three samples");
    }
    if !(du > 0.0) {
        return invalid("sample spacing must be positive");
    }
    if let Some(i) = rho.iter().position(|&r| !(r > 0.0)) {
        return invalid(format!("rho must be positive, got {} at sample {i}", rho[i]));
    }
    let w: Vec<f64> = rho.iter().map(|r| r.sqrt()).collect();
    let h2 = du * du;
    let mut k = vec![0.0; n];
    for i in 1..n - 1 {
        k[i] = -(w[i + 1] - 2.0 * w[i] + w[i - 1]) / (h2 * w[i]);
    }
    if n >= 4 {
        k[0] = -(2.0 * w[0] - 5.0 * w[1] + 4.0 * w[2] - w[3]) / (h2 * w[0]);
        k[n - 1] = -(2.0 * w[n - 1] - 5.0 * w[n - 2] + 4.0 * w[n - 3] - w[n - 4]) / (h2 * w[n - 1]);
    } else {
        k[0] = k[1] * w[1] / w[0];
        k[2] = k[1] * w[1] / w[2];
    }
    Ok(k)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric_models::alpha::alpha_profile;
    use crate::metric_models::model::arclength_reparam;
    use crate::metric_models::profile::{Segment, WarpProfile};

    fn samples(f: impl Fn(f64) -> f64, a: f64, b: f64, du: f64) -> Vec<f64> {
        let n = ((b - a) / du).round() as usize;
        (0..=n).map(|i| f(a + du * i as f64)).collect()
    }

    #[test]
    fn flat_tube_is_flat() {
        let k = gauss_curvature(&[3.0; 10], 0.1).unwrap();
        assert!(k.iter().all(|&x| x.abs() < 1e-12));
    }

    #[test]
    fn cusp_and_collar_are_hyperbolic() {
        let du = 1e-3;
        let k = gauss_curvature(&samples(|u| (-2.0 * u).exp(), 0.0, 3.0, du), du).unwrap();
        assert!(k.iter().all(|&x| (x + 1.0).abs() < 1e-6));
        let s = 0.1;
        let k = gauss_curvature(&samples(|u| (s * u.cosh()).powi(2), -2.0, 2.0, du), du).unwrap();
        assert!(k.iter().all(|&x| (x + 1.0).abs() < 1e-6));
    }

    #[test]
    fn neck_reparam_curvature_for_several_s() {
        for s in [0.05, 0.3, 1.0] {
            let seg = Segment::new(WarpProfile::paper_neck(s), -1.0, 1.0);
            let out = arclength_reparam(&seg, 4001).unwrap();
            let k = gauss_curvature(&out.rho, out.u[1] - out.u[0]).unwrap();
            let du = out.u[1] - out.u[0];
            let worst = k.iter().map(|x| (x + 1.0).abs()).fold(0.0, f64::max);
            assert!(worst < 10.0 * du * du, "s={s}: {worst}");
        }
    }

    #[test]
    fn cusp_flattening_curvature_range() {
        // Curvature is -alpha''/alpha: never positive, but it dips below -1
        // right after t = 0 because alpha'' <= alpha is unattainable.
        let alpha = alpha_profile(2.0, 4000).unwrap();
        let s: f64 = 0.3;
        let du = 1e-3;
        let rho = samples(|t| (-2.0 * s).exp() * alpha.eval(t - s).powi(2), -1.0, 6.0, du);
        let k = gauss_curvature(&rho, du).unwrap();
        let max = k.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let min = k.iter().cloned().fold(f64::INFINITY, f64::min);
        assert!(max <= 1e-6, "max curvature {max}");
        assert!(min < -1.0 - 1e-3 && min > -2.0, "min curvature {min}");
    }

    #[test]
    fn rejects_bad_input() {
        assert!(gauss_curvature(&[1.0, 1.0], 0.1).is_err());
        assert!(gauss_curvature(&[1.0, 0.0, 1.0], 0.1).is_err());
    }
}
