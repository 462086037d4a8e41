use super::profile::{ArclengthMap, FiberMetric, Segment};
use crate::error::{invalid, Result};
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EndCondition {
    Dirichlet,
    Neumann,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Region {
    pub name: String,
    pub t_range: [f64; 2],
}

/// Label of segments that are collapsed to a point in the shared chart.
pub const INSERT_LABEL: &str = "insert";

/// Warped surface (or torus bundle) over an interval with a marked set `A`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SurfaceModel {
    pub fiber: FiberMetric,
    pub segments: Vec<Segment>,
    pub ends: [EndCondition; 2],
    pub marker: Vec<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub regions: Vec<Region>,
}

fn close(a: f64, b: f64, rel: f64) -> bool {
    (a - b).abs() <= rel * a.abs().max(b.abs()).max(1e-300)
}

impl SurfaceModel {
    pub fn new(fiber: FiberMetric, segments: Vec<Segment>, ends: [EndCondition; 2], marker: Vec<[f64; 2]>) -> Result<Self> {
        let m = Self { fiber, segments, ends, marker, regions: Vec::new() };
        m.validate()?;
        Ok(m)
    }

    pub fn with_region(mut self, name: &str, a: f64, b: f64) -> Self {
        self.regions.push(Region { name: name.into(), t_range: [a, b] });
        self
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let m: Self = serde_json::from_str(text)?;
        m.validate()?;
        Ok(m)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn base_interval(&self) -> (f64, f64) {
        (self.segments[0].t_range[0], self.segments.last().unwrap().t_range[1])
    }

    pub fn validate(&self) -> Result<()> {
        self.fiber.validate()?;
        if self.segments.is_empty() {
            return invalid("model needs at least one segment");
        }
        for s in &self.segments {
            s.validate()?;
        }
        for w in self.segments.windows(2) {
            let (l, r) = (&w[0], &w[1]);
            let x = l.t_range[1];
            if (x - r.t_range[0]).abs() > 1e-12 * x.abs().max(1.0) {
                return invalid(format!("segments do not partition the base: gap between {} and {}", x, r.t_range[0]));
            }
            let (rl, rr) = (l.rho(x), r.rho(r.t_range[0]));
            if !close(rl, rr, 1e-12) {
                return invalid(format!("rho mismatch at interface t = {x}: {rl} vs {rr}"));
            }
        }
        if self.marker.is_empty() {
            return invalid("marker set A must be nonempty");
        }
        let (lo, hi) = self.base_interval();
        for m in &self.marker {
            if !(m[0] <= m[1]) || m[0] < lo - 1e-12 || m[1] > hi + 1e-12 {
                return invalid(format!("marker interval {m:?} outside the base [{lo}, {hi}]"));
            }
        }
        Ok(())
    }

    /// Shared-chart coordinate: the base coordinate with inserted pieces collapsed.
    pub fn chart_coordinate(&self, x: f64) -> f64 {
        let removed: f64 = self
            .segments
            .iter()
            .filter(|s| s.label.as_deref() == Some(INSERT_LABEL) && x > s.t_range[0])
            .map(|s| x.min(s.t_range[1]) - s.t_range[0])
            .sum();
        x - removed
    }

    pub fn chart(&self) -> Result<ModelChart> {
        ModelChart::new(self)
    }
}

/// Arclength parametrization of a whole model.
#[derive(Clone, Debug)]
pub struct ModelChart {
    segments: Vec<Segment>,
    maps: Vec<ArclengthMap>,
    u_start: Vec<f64>,
    total: f64,
}

impl ModelChart {
    pub fn new(model: &SurfaceModel) -> Result<Self> {
        let maps: Vec<ArclengthMap> = model.segments.iter().map(Segment::arclength_map).collect::<Result<_>>()?;
        let mut u_start = vec![0.0];
        for m in &maps {
            u_start.push(u_start.last().unwrap() + m.length());
        }
        let total = *u_start.last().unwrap();
        Ok(Self { segments: model.segments.clone(), maps, u_start, total })
    }

    pub fn length(&self) -> f64 {
        self.total
    }

    pub fn segment_count(&self) -> usize {
        self.segments.len()
    }

    pub fn segment_u_range(&self, i: usize) -> (f64, f64) {
        (self.u_start[i], self.u_start[i + 1])
    }

    pub fn segment_at_u(&self, u: f64) -> usize {
        let k = self.u_start.partition_point(|&x| x <= u);
        k.clamp(1, self.segments.len()) - 1
    }

    pub fn x_of_u(&self, u: f64) -> f64 {
        let k = self.segment_at_u(u);
        let seg = &self.segments[k];
        self.maps[k].t_of_u(&|t| seg.e(t).sqrt(), u - self.u_start[k])
    }

    pub fn u_of_x(&self, x: f64) -> f64 {
        let k = self.segments.iter().position(|s| x <= s.t_range[1]).unwrap_or(self.segments.len() - 1);
        let seg = &self.segments[k];
        self.u_start[k] + self.maps[k].u_of_t(&|t| seg.e(t).sqrt(), x)
    }

    pub fn rho_at_u(&self, u: f64) -> f64 {
        let k = self.segment_at_u(u);
        let seg = &self.segments[k];
        seg.rho(self.maps[k].t_of_u(&|t| seg.e(t).sqrt(), u - self.u_start[k]))
    }

    /// Marker intervals converted to arclength.
    pub fn marker_u(&self, marker: &[[f64; 2]]) -> Vec<[f64; 2]> {
        marker.iter().map(|m| [self.u_of_x(m[0]), self.u_of_x(m[1])]).collect()
    }
}

/// Profile resampled on a uniform arclength grid, so that `E = 1`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ArclengthSamples {
    pub u: Vec<f64>,
    pub rho: Vec<f64>,
    pub length: f64,
}

pub fn arclength_reparam(segment: &Segment, samples: usize) -> Result<ArclengthSamples> {
    if samples < 2 {
        return invalid("arclength resampling needs at least two samples");
    }
    let map = segment.arclength_map()?;
    let speed = |t: f64| segment.e(t).sqrt();
    let length = map.length();
    let u: Vec<f64> = (0..samples).map(|i| length * i as f64 / (samples - 1) as f64).collect();
    let rho = u.iter().map(|&x| segment.rho(map.t_of_u(&speed, x))).collect();
    Ok(ArclengthSamples { u, rho, length })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric_models::profile::WarpProfile;

    #[test]
    fn neck_reparam_is_collar() {
        for s in [0.05, 0.1, 0.5] {
            let seg = Segment::new(WarpProfile::paper_neck(s), -1.0, 1.0);
            let out = arclength_reparam(&seg, 801).unwrap();
            let half = out.length / 2.0;
            for (u, r) in out.u.iter().zip(&out.rho) {
                let v = u - half;
                let expect = s * s * v.cosh().powi(2);
                assert!((r - expect).abs() <= 1e-10 * expect.max(1.0), "s={s} u={u}: {r} vs {expect}");
            }
        }
    }

    #[test]
    fn flat_and_cusp_are_already_arclength() {
        let seg = Segment::new(WarpProfile::FlatTube { rho: 2.0 }, 0.0, 3.0);
        let out = arclength_reparam(&seg, 7).unwrap();
        assert!((out.length - 3.0).abs() < 1e-14);
        assert!(out.rho.iter().all(|&r| r == 2.0));
        let seg = Segment::new(WarpProfile::HyperbolicCusp, 0.0, 5.0);
        let out = arclength_reparam(&seg, 11).unwrap();
        for (u, r) in out.u.iter().zip(&out.rho) {
            assert!((r - (-2.0 * u).exp()).abs() < 1e-13);
        }
    }

    #[test]
    fn measure_is_preserved() {
        // int sqrt(E rho) dt against int sqrt(rho) du
        let seg = Segment::new(WarpProfile::PaperNeck { s: 0.2, rho: super::super::profile::NeckRho::Power { exponent: 0.7 } }, -1.0, 1.0);
        let direct = {
            let (_, v) = super::super::quadrature::adaptive_panels(&|t| (seg.e(t) * seg.rho(t)).sqrt(), -1.0, 1.0, 1e-14).unwrap();
            v.iter().sum::<f64>()
        };
        let out = arclength_reparam(&seg, 20001).unwrap();
        let h = out.u[1] - out.u[0];
        let mut simpson = out.rho[0].sqrt() + out.rho.last().unwrap().sqrt();
        for i in 1..out.u.len() - 1 {
            simpson += if i % 2 == 1 { 4.0 } else { 2.0 } * out.rho[i].sqrt();
        }
        simpson *= h / 3.0;
        assert!(((simpson - direct) / direct).abs() < 1e-8);
    }

    #[test]
    fn model_validation_catches_mismatch() {
        let fiber = FiberMetric::circle(1.0);
        let ok = SurfaceModel::new(
            fiber.clone(),
            vec![
                Segment::new(WarpProfile::paper_neck(0.2), -1.0, 1.0),
                Segment::new(WarpProfile::FlatTube { rho: 1.04 }, 1.0, 2.0),
            ],
            [EndCondition::Neumann; 2],
            vec![[1.5, 2.0]],
        );
        assert!(ok.is_ok());
        let bad = SurfaceModel::new(
            fiber.clone(),
            vec![
                Segment::new(WarpProfile::paper_neck(0.2), -1.0, 1.0),
                Segment::new(WarpProfile::FlatTube { rho: 1.0 }, 1.0, 2.0),
            ],
            [EndCondition::Neumann; 2],
            vec![[1.5, 2.0]],
        );
        assert!(bad.is_err());
        let gap = SurfaceModel::new(
            fiber.clone(),
            vec![Segment::new(WarpProfile::FlatTube { rho: 1.0 }, 0.0, 1.0), Segment::new(WarpProfile::FlatTube { rho: 1.0 }, 1.1, 2.0)],
            [EndCondition::Neumann; 2],
            vec![[0.0, 1.0]],
        );
        assert!(gap.is_err());
        let no_marker = SurfaceModel::new(fiber, vec![Segment::new(WarpProfile::FlatTube { rho: 1.0 }, 0.0, 1.0)], [EndCondition::Neumann; 2], vec![]);
        assert!(no_marker.is_err());
    }

    #[test]
    fn json_roundtrip() {
        let text = r#"{"fiber":{"kind":"circle","length":6.283185307179586},
            "segments":[{"kind":"paper_neck","s":0.1,"t_range":[-1,1]}],
            "ends":["neumann","neumann"],"marker":[[-0.5,0.5]]}"#;
        let m = SurfaceModel::from_json(text).unwrap();
        let back = SurfaceModel::from_json(&m.to_json().unwrap()).unwrap();
        assert_eq!(m, back);
        assert!(SurfaceModel::from_json(r#"{"fiber":{"kind":"circle","length":1},"segments":[],"ends":["neumann","neumann"],"marker":[[0,1]],"extra":1}"#).is_err());
    }
}
