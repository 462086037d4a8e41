use super::model::{EndCondition, SurfaceModel, INSERT_LABEL};
use super::profile::{FiberMetric, Segment, WarpProfile};
use crate::error::{invalid, Result};
use serde::{Deserialize, Serialize};

/// Outer piece attached at each neck end, in its own coordinate `[0, length]`
/// starting at the neck. Its `rho` is rescaled to match the neck.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OuterSpec {
    pub profile: WarpProfile,
    pub length: f64,
}

impl OuterSpec {
    pub fn flat(length: f64) -> Self {
        Self { profile: WarpProfile::FlatTube { rho: 1.0 }, length }
    }

    fn check(&self) -> Result<()> {
        if matches!(self.profile, WarpProfile::PaperNeck { .. }) {
            return invalid("outer piece cannot be a neck profile");
        }
        if !(self.length > 0.0) {
            return invalid(format!("outer length must be positive, got {}", self.length));
        }
        self.profile.validate_on(0.0, self.length)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PinchOptions {
    /// Cusp depth added to the half-neck length when choosing the radius `R_i`.
    pub radius_pad: f64,
    /// `R_i - r_i`, the depth beyond which a point counts as escaping.
    pub escape_depth: f64,
}

impl Default for PinchOptions {
    fn default() -> Self {
        Self { radius_pad: 4.0, escape_depth: 1.0 }
    }
}

/// Sequence of pairs `(M_i, A_i)` with radii, margins and the limit model.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ManifoldPairFamily {
    pub parameters: Vec<f64>,
    pub models: Vec<SurfaceModel>,
    /// Components of the limit, truncated at the largest radius.
    pub limit: Vec<SurfaceModel>,
    pub radii: Vec<f64>,
    pub escaping_margins: Vec<f64>,
}

impl ManifoldPairFamily {
    pub fn from_parts(
        parameters: Vec<f64>,
        models: Vec<SurfaceModel>,
        limit: Vec<SurfaceModel>,
        radii: Vec<f64>,
        escaping_margins: Vec<f64>,
    ) -> Result<Self> {
        let n = parameters.len();
        if n == 0 || models.len() != n || radii.len() != n || escaping_margins.len() != n {
            return invalid("family parts must be nonempty and of equal length");
        }
        if parameters.windows(2).any(|w| w[1] > w[0]) || parameters.iter().any(|&s| !(s > 0.0)) {
            return invalid("family parameters must be positive and nonincreasing");
        }
        if radii.windows(2).any(|w| !(w[1] > w[0])) {
            return invalid("radii must be strictly increasing");
        }
        if radii.iter().zip(&escaping_margins).any(|(r, m)| !(*m > 0.0) || !(r - m > 0.0)) {
            return invalid("escaping margins must satisfy 0 < r_i < R_i");
        }
        if limit.is_empty() {
            return invalid("limit model needs at least one component");
        }
        Ok(Self { parameters, models, limit, radii, escaping_margins })
    }

    pub fn len(&self) -> usize {
        self.parameters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parameters.is_empty()
    }
}

fn outer_scale(outer: &OuterSpec, rho_end: f64) -> f64 {
    rho_end / outer.profile.rho(0.0)
}

fn check_s_list(s_list: &[f64]) -> Result<()> {
    if s_list.is_empty() {
        return invalid("parameter list is empty");
    }
    if s_list.iter().any(|&s| !(s > 0.0 && s <= 1.0)) {
        return invalid("parameters must lie in (0, 1]");
    }
    if s_list.windows(2).any(|w| !(w[1] < w[0])) {
        return invalid("parameters must be strictly decreasing");
    }
    Ok(())
}

/// Neck `[-1, 1]` with `rho = s^2 + t^2` between two outer pieces; `A` is the
/// union of the outer pieces. An `insert` of length `tau > 0` splits the neck
/// at `t = 0` with a flat cylinder of radius `s`.
pub fn pinch_model(s: f64, fiber: &FiberMetric, outer: &OuterSpec, insert: f64) -> Result<SurfaceModel> {
    outer.check()?;
    let neck = WarpProfile::paper_neck(s);
    let scale = outer_scale(outer, neck.rho(1.0));
    let l = outer.length;
    let tau = insert.max(0.0);
    let mut segs = vec![Segment::new(outer.profile.clone(), -1.0 - l, -1.0).reflected(-1.0).with_scale(scale)];
    if tau > 0.0 {
        segs.push(Segment::new(neck.clone(), -1.0, 0.0).with_label("neck"));
        segs.push(Segment::new(WarpProfile::FlatTube { rho: s * s }, 0.0, tau).with_label(INSERT_LABEL));
        segs.push(Segment::new(neck, tau, tau + 1.0).with_offset(tau).with_label("neck"));
    } else {
        segs.push(Segment::new(neck, -1.0, 1.0).with_label("neck"));
    }
    let right = 1.0 + tau;
    segs.push(Segment::new(outer.profile.clone(), right, right + l).with_offset(right).with_scale(scale));
    let m = SurfaceModel::new(fiber.clone(), segs, [EndCondition::Neumann; 2], vec![[-1.0 - l, -1.0], [right, right + l]])?;
    Ok(m.with_region("end", -1.0 - l, -1.0).with_region("neck", -1.0, right).with_region("end", right, right + l))
}

/// The two cusped components of the `s = 0` limit, truncated at cusp depth `depth`
/// with a Dirichlet end.
pub fn pinch_limit(fiber: &FiberMetric, outer: &OuterSpec, depth: f64) -> Result<Vec<SurfaceModel>> {
    outer.check()?;
    if !(depth > 0.0) {
        return invalid("truncation depth must be positive");
    }
    let scale = outer_scale(outer, 1.0);
    let l = outer.length;
    let tip = (-depth).exp();
    let cusp = WarpProfile::paper_neck(0.0);
    let left = SurfaceModel::new(
        fiber.clone(),
        vec![
            Segment::new(outer.profile.clone(), -1.0 - l, -1.0).reflected(-1.0).with_scale(scale),
            Segment::new(cusp.clone(), -1.0, -tip).with_label("cusp"),
        ],
        [EndCondition::Neumann, EndCondition::Dirichlet],
        vec![[-1.0 - l, -1.0]],
    )?;
    let right = SurfaceModel::new(
        fiber.clone(),
        vec![
            Segment::new(cusp, tip, 1.0).with_label("cusp"),
            Segment::new(outer.profile.clone(), 1.0, 1.0 + l).with_offset(1.0).with_scale(scale),
        ],
        [EndCondition::Dirichlet, EndCondition::Neumann],
        vec![[1.0, 1.0 + l]],
    )?;
    Ok(vec![left, right])
}

/// Pinching family: radii `R_i = asinh(1/s_i) + pad`, margins `r_i = R_i - escape_depth`,
/// limit truncated at the largest radius.
pub fn make_pinch_family(s_list: &[f64], fiber: &FiberMetric, outer: &OuterSpec, opts: &PinchOptions) -> Result<ManifoldPairFamily> {
    check_s_list(s_list)?;
    build_family(s_list, fiber, outer, opts, &vec![0.0; s_list.len()])
}

/// Pinching family with a flat cylinder of length `inserts[i]` at the neck center.
pub fn make_insert_family(
    s_list: &[f64],
    inserts: &[f64],
    fiber: &FiberMetric,
    outer: &OuterSpec,
    opts: &PinchOptions,
) -> Result<ManifoldPairFamily> {
    check_s_list(s_list)?;
    if inserts.len() != s_list.len() || inserts.iter().any(|&t| !(t >= 0.0)) {
        return invalid("one nonnegative insert length per parameter is required");
    }
    build_family(s_list, fiber, outer, opts, inserts)
}

fn build_family(s_list: &[f64], fiber: &FiberMetric, outer: &OuterSpec, opts: &PinchOptions, inserts: &[f64]) -> Result<ManifoldPairFamily> {
    if !(opts.escape_depth > 0.0) || !(opts.radius_pad > opts.escape_depth) {
        return invalid("need 0 < escape_depth < radius_pad");
    }
    let models = s_list
        .iter()
        .zip(inserts)
        .map(|(&s, &tau)| pinch_model(s, fiber, outer, tau))
        .collect::<Result<Vec<_>>>()?;
    let radii: Vec<f64> = s_list.iter().zip(inserts).map(|(&s, &tau)| (1.0 / s).asinh() + 0.5 * tau + opts.radius_pad).collect();
    if radii.windows(2).any(|w| !(w[1] > w[0])) {
        return invalid("insert lengths make the radii non-increasing");
    }
    let margins = radii.iter().map(|r| r - opts.escape_depth).collect();
    let limit = pinch_limit(fiber, outer, *radii.last().unwrap())?;
    ManifoldPairFamily::from_parts(s_list.to_vec(), models, limit, radii, margins)
}
