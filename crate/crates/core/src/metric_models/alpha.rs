use super::quadrature::adaptive_panels;
use crate::error::{invalid, Result};
use serde::{Deserialize, Serialize};

/// Sampled cusp-flattening function: `e^{-t}` for `t <= 0`, constant `e^{-1}`
/// from the cap point on, monotone in between.
///
/// On `[0, cap]` the logarithm has slope `-psi(t/cap)` with
/// `psi(x) = (1 - x^a)^b`, so `alpha' >= -alpha` holds exactly and the
/// junctions are C^2. The exponent `a` is fixed by the total drop of 1.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AlphaProfile {
    pub cap_point: f64,
    pub exponent_a: f64,
    pub exponent_b: f64,
    /// Sample abscissae, uniform on `[-cap, 2 cap]`.
    pub t: Vec<f64>,
    pub alpha: Vec<f64>,
    pub dalpha: Vec<f64>,
}

/// Grid diagnostics of the two differential bounds.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AlphaBounds {
    /// `min (alpha' + alpha) / alpha`; nonnegative when `alpha' >= -alpha`.
    pub first_order_slack: f64,
    /// `max (alpha'' - alpha)`; the second bound asks for `<= 0`.
    pub second_order_excess: f64,
    /// `max (alpha''/alpha - 1)` on `t >= 0`.
    pub relative_excess: f64,
}

fn psi(x: f64, a: f64, b: f64) -> f64 {
    if x <= 0.0 {
        1.0
    } else if x >= 1.0 {
        0.0
    } else {
        (1.0 - x.powf(a)).powf(b)
    }
}

fn psi_integral(a: f64, b: f64, x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    adaptive_panels(&|y| psi(y, a, b), 0.0, x, 1e-15).map(|(_, v)| v.iter().sum()).unwrap_or(f64::NAN)
}

/// Builds the sampled profile.
///
/// The drop of `log alpha` from 0 to -1 at slope at most 1 needs `cap > 1`.
pub fn alpha_profile(cap_point: f64, samples: usize) -> Result<AlphaProfile> {
    if samples < 16 {
        return invalid(format!("alpha profile needs at least 16 samples, got {samples}"));
    }
    if !(cap_point > 1.0) || !cap_point.is_finite() {
        return invalid(format!(
            "cap point {cap_point} too small: alpha' >= -alpha forces the cap beyond t = 1"
        ));
    }
    let b = if cap_point < 3.0 { 2.0 } else { cap_point };
    let target = 1.0 / cap_point;
    // integral of psi increases in a; a = 1 gives 1/(b+1) < target
    let (mut lo, mut hi) = (1.0, 2.0);
    while psi_integral(hi, b, 1.0) < target {
        hi *= 2.0;
    }
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        if psi_integral(mid, b, 1.0) < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let a = 0.5 * (lo + hi);
    let t0 = -cap_point;
    let t1 = 2.0 * cap_point;
    let h = (t1 - t0) / (samples - 1) as f64;
    let t: Vec<f64> = (0..samples).map(|i| t0 + h * i as f64).collect();
    let mut alpha = Vec::with_capacity(samples);
    let mut dalpha = Vec::with_capacity(samples);
    for &ti in &t {
        let (al, dal) = if ti <= 0.0 {
            ((-ti).exp(), -(-ti).exp())
        } else if ti >= cap_point {
            ((-1.0f64).exp(), 0.0)
        } else {
            let x = ti / cap_point;
            let beta = -cap_point * psi_integral(a, b, x);
            (beta.exp(), -psi(x, a, b) * beta.exp())
        };
        alpha.push(al);
        dalpha.push(dal);
    }
    Ok(AlphaProfile { cap_point, exponent_a: a, exponent_b: b, t, alpha, dalpha })
}

impl AlphaProfile {
    /// Cubic Hermite interpolant of the samples, exact formulas outside.
    pub fn eval(&self, x: f64) -> f64 {
        let n = self.t.len();
        if x <= 0.0 {
            return (-x).exp();
        }
        if x >= self.cap_point {
            return (-1.0f64).exp();
        }
        let h = self.t[1] - self.t[0];
        let i = (((x - self.t[0]) / h).floor() as usize).min(n - 2);
        let s = (x - self.t[i]) / h;
        let (h00, h10, h01, h11) = (
            2.0 * s.powi(3) - 3.0 * s * s + 1.0,
            s.powi(3) - 2.0 * s * s + s,
            -2.0 * s.powi(3) + 3.0 * s * s,
            s.powi(3) - s * s,
        );
        h00 * self.alpha[i] + h10 * h * self.dalpha[i] + h01 * self.alpha[i + 1] + h11 * h * self.dalpha[i + 1]
    }

    /// Finite-difference check of the bounds on a grid of spacing `dt`.
    pub fn bounds(&self, dt: f64) -> AlphaBounds {
        let lo = self.t[0] + dt;
        let hi = *self.t.last().unwrap() - dt;
        let n = ((hi - lo) / dt).floor() as usize;
        let mut out = AlphaBounds {
            first_order_slack: f64::INFINITY,
            second_order_excess: f64::NEG_INFINITY,
            relative_excess: f64::NEG_INFINITY,
        };
        for i in 0..=n {
            let x = lo + dt * i as f64;
            let (am, a0, ap) = (self.eval(x - dt), self.eval(x), self.eval(x + dt));
            let d1 = (ap - am) / (2.0 * dt);
            let d2 = (ap - 2.0 * a0 + am) / (dt * dt);
            out.first_order_slack = out.first_order_slack.min((d1 + a0) / a0);
            out.second_order_excess = out.second_order_excess.max(d2 - a0);
            if x >= 0.0 {
                out.relative_excess = out.relative_excess.max(d2 / a0 - 1.0);
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn formula_and_cap_regions() {
        let p = alpha_profile(2.0, 400).unwrap();
        assert!((p.eval(-1.0) - std::f64::consts::E).abs() < 1e-12);
        assert!((p.eval(4.0) - (-1.0f64).exp()).abs() < 1e-15);
        // continuity of the drop at the cap
        let k = p.t.iter().position(|&x| x >= 2.0).unwrap();
        assert!((p.alpha[k] - (-1.0f64).exp()).abs() < 1e-12);
    }

    #[test]
    fn first_order_bound_and_monotonicity_hold() {
        for cap in [1.5, 2.0, 4.0] {
            let p = alpha_profile(cap, 2000).unwrap();
            let b = p.bounds(1e-3);
            assert!(b.first_order_slack > -1e-6, "cap {cap}: {b:?}");
            assert!(b.second_order_excess < 0.5, "cap {cap}: {b:?}");
            for (k, w) in p.alpha.windows(2).enumerate() {
                assert!(w[1] <= w[0] * (1.0 + 1e-12), "cap {cap} at t = {}: {} -> {}", p.t[k], w[0], w[1]);
            }
        }
    }

    #[test]
    fn second_order_bound_cannot_hold() {
        // With w = alpha' + alpha, alpha'' <= alpha gives w' <= w and w(0) = 0,
        // so w <= 0 and alpha could never level off. Any admissible interpolant
        // therefore violates it; the construction keeps the excess moderate.
        let p = alpha_profile(2.0, 4000).unwrap();
        let b = p.bounds(1e-3);
        assert!(b.second_order_excess > 1e-3);
        assert!(b.relative_excess < 1.0);
    }

    #[test]
    fn rejects_small_cap() {
        assert!(alpha_profile(0.9, 100).is_err());
        assert!(alpha_profile(2.0, 8).is_err());
    }
}
