use super::alpha::AlphaProfile;
use super::quadrature::adaptive_panels;
use crate::error::{invalid, Error, Result};
use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum FiberMetric {
    Circle { length: f64 },
    /// Flat torus `R^d / Z^d` with metric Gram matrix on the lattice basis.
    FlatTorus { gram: Vec<Vec<f64>> },
}

impl FiberMetric {
    pub fn circle(length: f64) -> Self {
        FiberMetric::Circle { length }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            FiberMetric::Circle { length } => {
                if !(*length > 0.0) || !length.is_finite() {
                    return invalid(format!("circle fiber length must be positive, got {length}"));
                }
            }
            FiberMetric::FlatTorus { gram } => {
                let d = gram.len();
                if d == 0 || gram.iter().any(|r| r.len() != d) {
                    return invalid("torus gram matrix must be square and nonempty");
                }
                for i in 0..d {
                    for j in 0..d {
                        if gram[i][j] != gram[j][i] {
                            return invalid("torus gram matrix must be symmetric");
                        }
                    }
                }
                let m = DMatrix::from_fn(d, d, |i, j| gram[i][j]);
                if m.symmetric_eigenvalues().iter().any(|&l| !(l > 0.0)) {
                    return invalid("torus gram matrix must be positive definite");
                }
            }
        }
        Ok(())
    }

    /// Fiber volume for `rho = 1`.
    pub fn volume(&self) -> f64 {
        match self {
            FiberMetric::Circle { length } => *length,
            FiberMetric::FlatTorus { gram } => {
                let d = gram.len();
                DMatrix::from_fn(d, d, |i, j| gram[i][j]).determinant().sqrt()
            }
        }
    }
}

/// Form of the neck warping function `rho(s, t)`.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "form", rename_all = "snake_case", deny_unknown_fields)]
pub enum NeckRho {
    /// `s^2 + t^2`
    #[default]
    SumOfSquares,
    /// `factor * (s^2 + t^2)`
    Scaled { factor: f64 },
    /// `(s^2 + t^2)^exponent`
    Power { exponent: f64 },
}

impl NeckRho {
    pub fn eval(&self, s: f64, t: f64) -> f64 {
        let q = s * s + t * t;
        match self {
            NeckRho::SumOfSquares => q,
            NeckRho::Scaled { factor } => factor * q,
            NeckRho::Power { exponent } => q.powf(*exponent),
        }
    }

    fn is_default(&self) -> bool {
        *self == NeckRho::SumOfSquares
    }
}

/// Metric `E(t) dt^2 + rho(t) h` on one piece of the base.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum WarpProfile {
    PaperNeck {
        s: f64,
        #[serde(default, skip_serializing_if = "NeckRho::is_default")]
        rho: NeckRho,
    },
    HyperbolicCusp,
    Example32 {
        s: f64,
        alpha: AlphaProfile,
    },
    FlatTube {
        rho: f64,
    },
    /// Piecewise-linear samples of `E` and `rho` on ascending `t`.
    Custom {
        t: Vec<f64>,
        e: Vec<f64>,
        rho: Vec<f64>,
    },
}

fn interp(xs: &[f64], ys: &[f64], x: f64) -> f64 {
    let n = xs.len();
    if x <= xs[0] {
        return ys[0];
    }
    if x >= xs[n - 1] {
        return ys[n - 1];
    }
    let k = xs.partition_point(|&v| v <= x).min(n - 1);
    let (x0, x1) = (xs[k - 1], xs[k]);
    let w = (x - x0) / (x1 - x0);
    ys[k - 1] * (1.0 - w) + ys[k] * w
}

impl WarpProfile {
    pub fn paper_neck(s: f64) -> Self {
        WarpProfile::PaperNeck { s, rho: NeckRho::SumOfSquares }
    }

    pub fn e(&self, t: f64) -> f64 {
        match self {
            WarpProfile::PaperNeck { s, .. } => 1.0 / (s * s + t * t),
            WarpProfile::Custom { t: ts, e, .. } => interp(ts, e, t),
            _ => 1.0,
        }
    }

    pub fn rho(&self, t: f64) -> f64 {
        match self {
            WarpProfile::PaperNeck { s, rho } => rho.eval(*s, t),
            WarpProfile::HyperbolicCusp => (-2.0 * t).exp(),
            WarpProfile::Example32 { s, alpha } => (-2.0 * s).exp() * alpha.eval(t - s).powi(2),
            WarpProfile::FlatTube { rho } => *rho,
            WarpProfile::Custom { t: ts, rho, .. } => interp(ts, rho, t),
        }
    }

    /// Checks parameters and positivity on the open interval `(a, b)`.
    pub fn validate_on(&self, a: f64, b: f64) -> Result<()> {
        if !(a < b) || !a.is_finite() || !b.is_finite() {
            return invalid(format!("profile domain [{a}, {b}] must be a finite nonempty interval"));
        }
        match self {
            WarpProfile::PaperNeck { s, rho } => {
                if !(*s >= 0.0) {
                    return invalid(format!("neck parameter s must be nonnegative, got {s}"));
                }
                if let NeckRho::Scaled { factor } = rho {
                    if !(*factor > 0.0) {
                        return invalid("neck rho factor must be positive");
                    }
                }
                if *s == 0.0 && a <= 0.0 && b >= 0.0 {
                    return Err(Error::UnboundedDomain(format!(
                        "s = 0 neck on [{a}, {b}] contains t = 0 and has infinite length; truncate the domain"
                    )));
                }
            }
            WarpProfile::Example32 { s, .. } if !(*s > 0.0) => {
                return invalid(format!("cusp-flattening parameter s must be positive, got {s}"));
            }
            WarpProfile::FlatTube { rho } if !(*rho > 0.0) => {
                return invalid(format!("flat tube rho must be positive, got {rho}"));
            }
            WarpProfile::Custom { t, e, rho } => {
                if t.len() < 2 || e.len() != t.len() || rho.len() != t.len() {
                    return invalid("custom profile needs at least two samples of equal length");
                }
                if t.windows(2).any(|w| !(w[1] > w[0])) {
                    return invalid("custom profile abscissae must be strictly increasing");
                }
                if a < t[0] || b > t[t.len() - 1] {
                    return invalid("custom profile domain exceeds its samples");
                }
            }
            _ => {}
        }
        let n = 64;
        for i in 0..=n {
            let x = a + (b - a) * (i as f64) / n as f64;
            let x = x.clamp(a + 1e-12 * (b - a), b - 1e-12 * (b - a));
            let (e, r) = (self.e(x), self.rho(x));
            if !(e > 0.0 && r > 0.0) || !e.is_finite() || !r.is_finite() {
                return invalid(format!("profile not positive at t = {x}: E = {e}, rho = {r}"));
            }
        }
        Ok(())
    }
}

/// A profile placed on a base subinterval. The profile is evaluated at
/// `t - offset`, or `offset - t` when reflected, and `rho` is multiplied by `scale`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    #[serde(flatten)]
    pub profile: WarpProfile,
    pub t_range: [f64; 2],
    #[serde(default, skip_serializing_if = "is_zero")]
    pub offset: f64,
    #[serde(default, skip_serializing_if = "is_false")]
    pub reflect: bool,
    #[serde(default = "one", skip_serializing_if = "is_one")]
    pub scale: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
}

fn is_zero(x: &f64) -> bool {
    *x == 0.0
}
fn is_one(x: &f64) -> bool {
    *x == 1.0
}
fn one() -> f64 {
    1.0
}
fn is_false(b: &bool) -> bool {
    !*b
}

impl Segment {
    pub fn new(profile: WarpProfile, a: f64, b: f64) -> Self {
        Self { profile, t_range: [a, b], offset: 0.0, reflect: false, scale: 1.0, label: None }
    }

    pub fn with_offset(mut self, offset: f64) -> Self {
        self.offset = offset;
        self
    }

    pub fn reflected(mut self, offset: f64) -> Self {
        self.reflect = true;
        self.offset = offset;
        self
    }

    pub fn with_scale(mut self, scale: f64) -> Self {
        self.scale = scale;
        self
    }

    pub fn with_label(mut self, label: &str) -> Self {
        self.label = Some(label.to_string());
        self
    }

    fn local(&self, t: f64) -> f64 {
        if self.reflect {
            self.offset - t
        } else {
            t - self.offset
        }
    }

    fn local_range(&self) -> (f64, f64) {
        let (p, q) = (self.local(self.t_range[0]), self.local(self.t_range[1]));
        (p.min(q), p.max(q))
    }

    pub fn e(&self, t: f64) -> f64 {
        self.profile.e(self.local(t))
    }

    pub fn rho(&self, t: f64) -> f64 {
        self.scale * self.profile.rho(self.local(t))
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.scale > 0.0) {
            return invalid(format!("segment scale must be positive, got {}", self.scale));
        }
        let (a, b) = self.local_range();
        self.profile.validate_on(a, b)
    }

    /// Arclength map `u(t) = int sqrt(E)` over the segment.
    pub fn arclength_map(&self) -> Result<ArclengthMap> {
        self.validate()?;
        ArclengthMap::new(|t| self.e(t).sqrt(), self.t_range[0], self.t_range[1])
    }
}

/// Monotone map between a segment coordinate `t` and arclength `u`.
#[derive(Clone, Debug)]
pub struct ArclengthMap {
    breaks: Vec<f64>,
    ucum: Vec<f64>,
    speed: Vec<[f64; 2]>,
}

impl ArclengthMap {
    pub fn new<F: Fn(f64) -> f64>(speed: F, a: f64, b: f64) -> Result<Self> {
        let (breaks, vals) = adaptive_panels(&speed, a, b, 1e-14)?;
        let mut ucum = vec![0.0];
        for v in &vals {
            ucum.push(ucum.last().unwrap() + v);
        }
        let speed = breaks.windows(2).map(|w| [speed(w[0]), speed(w[1])]).collect();
        Ok(Self { breaks, ucum, speed })
    }

    pub fn length(&self) -> f64 {
        *self.ucum.last().unwrap()
    }

    pub fn t_range(&self) -> (f64, f64) {
        (self.breaks[0], *self.breaks.last().unwrap())
    }

    pub fn u_of_t<F: Fn(f64) -> f64>(&self, speed: &F, t: f64) -> f64 {
        let (a, b) = self.t_range();
        let t = t.clamp(a, b);
        let k = self.breaks.partition_point(|&x| x <= t).clamp(1, self.breaks.len() - 1) - 1;
        self.ucum[k] + super::quadrature::gauss_legendre(speed, self.breaks[k], t)
    }

    /// Inverse map by safeguarded Newton inside the containing panel.
    pub fn t_of_u<F: Fn(f64) -> f64>(&self, speed: &F, u: f64) -> f64 {
        let u = u.clamp(0.0, self.length());
        let k = self.ucum.partition_point(|&x| x <= u).clamp(1, self.ucum.len() - 1) - 1;
        let (mut lo, mut hi) = (self.breaks[k], self.breaks[k + 1]);
        let target = u - self.ucum[k];
        let [s0, s1] = self.speed[k];
        let mut t = lo + target / (0.5 * (s0 + s1)).max(1e-300);
        t = t.clamp(lo, hi);
        for _ in 0..100 {
            let g = super::quadrature::gauss_legendre(speed, self.breaks[k], t) - target;
            if g > 0.0 {
                hi = t;
            } else {
                lo = t;
            }
            let step = g / speed(t);
            let mut next = t - step;
            if !(next > lo && next < hi) {
                next = 0.5 * (lo + hi);
            }
            if (next - t).abs() <= 1e-15 * (1.0 + t.abs()) {
                return next;
            }
            t = next;
        }
        t
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn profile_json_shape() {
        let seg = Segment::new(WarpProfile::paper_neck(0.1), -1.0, 1.0);
        let js = serde_json::to_string(&seg).unwrap();
        assert_eq!(js, r#"{"kind":"paper_neck","s":0.1,"t_range":[-1.0,1.0]}"#);
        let back: Segment = serde_json::from_str(r#"{"kind":"hyperbolic_cusp","t_range":[0,12]}"#).unwrap();
        assert_eq!(back.profile, WarpProfile::HyperbolicCusp);
        assert_eq!(back.scale, 1.0);
    }

    #[test]
    fn neck_at_zero_is_unbounded() {
        let seg = Segment::new(WarpProfile::paper_neck(0.0), -1.0, 1.0);
        assert!(matches!(seg.arclength_map(), Err(Error::UnboundedDomain(_))));
        let seg = Segment::new(WarpProfile::paper_neck(0.0), 0.01, 1.0);
        let m = seg.arclength_map().unwrap();
        assert!((m.length() - 100f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn half_neck_length() {
        // int_0^1 dt / sqrt(t^2 + s^2), independent Simpson oracle
        let s = 0.1;
        let n = 200_000;
        let h = 1.0 / n as f64;
        let f = |t: f64| 1.0 / (t * t + s * s).sqrt();
        let mut simpson = f(0.0) + f(1.0);
        for i in 1..n {
            simpson += if i % 2 == 1 { 4.0 } else { 2.0 } * f(i as f64 * h);
        }
        simpson *= h / 3.0;
        let m = Segment::new(WarpProfile::paper_neck(s), 0.0, 1.0).arclength_map().unwrap();
        assert!((m.length() - simpson).abs() < 1e-10);
        assert!((m.length() - 2.998).abs() < 1e-3);
    }

    #[test]
    fn torus_validation() {
        assert!(FiberMetric::FlatTorus { gram: vec![vec![1.0, 0.2], vec![0.2, 1.0]] }.validate().is_ok());
        assert!(FiberMetric::FlatTorus { gram: vec![vec![1.0, 2.0], vec![2.0, 1.0]] }.validate().is_err());
        assert!(FiberMetric::circle(0.0).validate().is_err());
    }
}
