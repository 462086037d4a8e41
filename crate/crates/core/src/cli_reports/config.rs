use crate::convergence_lab::Discretization;
use crate::error::{invalid, Error, Result};
use crate::graph_manifold::NeckTemplate;
use crate::group_theory::GqmSpec;
use crate::linalg::SolverOptions;
use crate::metric_models::{FiberMetric, OuterSpec, PinchOptions, SurfaceModel};
use serde::{Deserialize, Serialize};
use std::path::PathBuf;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridConfig {
    /// Target arclength spacing.
    pub spacing: f64,
    /// Fixed node count; overrides `spacing` where a single model is discretized.
    pub nodes: Option<usize>,
    /// Ring nodes per fiber (`K`).
    pub fiber_nodes: usize,
}

impl Default for GridConfig {
    fn default() -> Self {
        let d = Discretization::default();
        Self { spacing: d.spacing, nodes: None, fiber_nodes: d.fiber_nodes }
    }
}

impl GridConfig {
    pub fn discretization(&self) -> Discretization {
        Discretization { spacing: self.spacing, fiber_nodes: self.fiber_nodes }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverConfig {
    /// Number of low eigenvalues to report.
    pub count: usize,
    pub tol: f64,
    pub seed: u64,
    pub max_iter: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        let o = SolverOptions::default();
        Self { count: 5, tol: o.tol, seed: o.seed, max_iter: o.max_iter }
    }
}

impl SolverConfig {
    pub fn options(&self) -> SolverOptions {
        SolverOptions { tol: self.tol, seed: self.seed, max_iter: self.max_iter, ..SolverOptions::default() }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    pub dir: PathBuf,
    pub formats: Vec<Format>,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self { dir: PathBuf::from("out"), formats: vec![Format::Csv, Format::Json] }
    }
}

/// Shared geometry of pinching families: circle fiber and outer pieces.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PinchGeometry {
    pub fiber_length: f64,
    pub outer: OuterSpec,
    pub pinch: PinchOptions,
}

impl Default for PinchGeometry {
    fn default() -> Self {
        Self { fiber_length: 2.0 * std::f64::consts::PI, outer: OuterSpec::flat(18.0), pinch: PinchOptions::default() }
    }
}

impl PinchGeometry {
    pub fn fiber(&self) -> FiberMetric {
        FiberMetric::circle(self.fiber_length)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InsertTuning {
    /// Eigenvalue the tuned family holds fixed.
    pub target: f64,
    /// 1-based index of the tuned fiber-constant eigenvalue.
    pub index: usize,
    #[serde(default = "default_tau_max")]
    pub tau_max: f64,
}

fn default_tau_max() -> f64 {
    40.0
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "lemma", rename_all = "kebab-case", deny_unknown_fields)]
pub enum TrialSpec {
    /// Random pairs on a flat tube split into `u` and `v` base intervals.
    TwoPiece { tube_length: f64, u: [f64; 2], v: [f64; 2], epsilon: f64, trials: usize },
    /// Fiber-mean-zero functions on the pinch model at `s`.
    Neck { s: f64, c: f64, epsilon: f64, trials: usize, delta: Option<f64> },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpectrumParams {
    pub model: SurfaceModel,
    #[serde(default)]
    pub grid: GridConfig,
    #[serde(default)]
    pub solver: SolverConfig,
    #[serde(default)]
    pub output: OutputConfig,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TheoremAParams {
    pub s: Vec<f64>,
    pub c: f64,
    #[serde(default = "default_guard")]
    pub guard_margin: f64,
    #[serde(default)]
    pub geometry: PinchGeometry,
    #[serde(default)]
    pub grid: GridConfig,
    #[serde(default)]
    pub solver: SolverConfig,
    #[serde(default)]
    pub output: OutputConfig,
}

fn default_guard() -> f64 {
    0.02
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PinchParams {
    pub s: Vec<f64>,
    pub eigen_index: usize,
    pub delta: f64,
    #[serde(default)]
    pub insert: Option<InsertTuning>,
    #[serde(default)]
    pub geometry: PinchGeometry,
    #[serde(default)]
    pub grid: GridConfig,
    #[serde(default)]
    pub solver: SolverConfig,
    #[serde(default)]
    pub output: OutputConfig,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LemmaTrialParams {
    pub trial: TrialSpec,
    #[serde(default)]
    pub geometry: PinchGeometry,
    #[serde(default)]
    pub grid: GridConfig,
    #[serde(default)]
    pub solver: SolverConfig,
    #[serde(default)]
    pub output: OutputConfig,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GroupParams {
    pub group: GqmSpec,
    #[serde(default)]
    pub solver: SolverConfig,
    #[serde(default)]
    pub output: OutputConfig,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GraphManifoldParams {
    pub group: GqmSpec,
    pub s: Vec<f64>,
    #[serde(default = "default_ratio")]
    pub ratio: f64,
    #[serde(default)]
    pub neck: NeckTemplate,
    /// Arm length of the star block.
    #[serde(default = "default_arm")]
    pub arm: usize,
    /// Also write the operator at the smallest `s` as coordinate lists.
    #[serde(default)]
    pub export_operator: bool,
    #[serde(default)]
    pub solver: SolverConfig,
    #[serde(default)]
    pub output: OutputConfig,
}

fn default_ratio() -> f64 {
    0.5
}

fn default_arm() -> usize {
    2
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CalibrateDeltaParams {
    pub s: f64,
    pub c: f64,
    pub epsilon: f64,
    #[serde(default)]
    pub geometry: PinchGeometry,
    #[serde(default)]
    pub grid: GridConfig,
    #[serde(default)]
    pub output: OutputConfig,
}

/// One experiment run, selected by `kind`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ExperimentConfig {
    Spectrum(SpectrumParams),
    TheoremA(TheoremAParams),
    Pinch(PinchParams),
    LemmaTrials(LemmaTrialParams),
    Group(GroupParams),
    GraphManifold(GraphManifoldParams),
    CalibrateDelta(CalibrateDeltaParams),
}

fn check_s_sweep(s: &[f64]) -> Result<()> {
    if s.is_empty() || s.iter().any(|&x| !(x > 0.0 && x <= 1.0)) {
        return invalid("every s must lie in (0, 1]");
    }
    if s.windows(2).any(|w| w[1] >= w[0]) {
        return invalid("s values must be strictly decreasing");
    }
    Ok(())
}

fn check_grid(g: &GridConfig) -> Result<()> {
    if !(g.spacing > 0.0) {
        return invalid("grid spacing must be positive");
    }
    if g.fiber_nodes < 2 || g.fiber_nodes % 2 != 0 {
        return invalid("fiber_nodes must be even and at least 2");
    }
    Ok(())
}

fn check_solver(s: &SolverConfig) -> Result<()> {
    if s.count == 0 || !(s.tol > 0.0) || s.max_iter == 0 {
        return invalid("solver needs count >= 1, tol > 0 and max_iter >= 1");
    }
    Ok(())
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Self::Spectrum(_) => "spectrum",
            Self::TheoremA(_) => "theorem-a",
            Self::Pinch(_) => "pinch",
            Self::LemmaTrials(_) => "lemma-trials",
            Self::Group(_) => "group",
            Self::GraphManifold(_) => "graph-manifold",
            Self::CalibrateDelta(_) => "calibrate-delta",
        }
    }

    pub fn output(&self) -> &OutputConfig {
        match self {
            Self::Spectrum(p) => &p.output,
            Self::TheoremA(p) => &p.output,
            Self::Pinch(p) => &p.output,
            Self::LemmaTrials(p) => &p.output,
            Self::Group(p) => &p.output,
            Self::GraphManifold(p) => &p.output,
            Self::CalibrateDelta(p) => &p.output,
        }
    }

    pub fn output_mut(&mut self) -> &mut OutputConfig {
        match self {
            Self::Spectrum(p) => &mut p.output,
            Self::TheoremA(p) => &mut p.output,
            Self::Pinch(p) => &mut p.output,
            Self::LemmaTrials(p) => &mut p.output,
            Self::Group(p) => &mut p.output,
            Self::GraphManifold(p) => &mut p.output,
            Self::CalibrateDelta(p) => &mut p.output,
        }
    }

    pub fn solver_mut(&mut self) -> Option<&mut SolverConfig> {
        match self {
            Self::Spectrum(p) => Some(&mut p.solver),
            Self::TheoremA(p) => Some(&mut p.solver),
            Self::Pinch(p) => Some(&mut p.solver),
            Self::LemmaTrials(p) => Some(&mut p.solver),
            Self::Group(p) => Some(&mut p.solver),
            Self::GraphManifold(p) => Some(&mut p.solver),
            Self::CalibrateDelta(_) => None,
        }
    }

    /// Seed used by the run (0 for kinds without randomness).
    pub fn seed(&self) -> u64 {
        match self {
            Self::Spectrum(p) => p.solver.seed,
            Self::TheoremA(p) => p.solver.seed,
            Self::Pinch(p) => p.solver.seed,
            Self::LemmaTrials(p) => p.solver.seed,
            Self::Group(p) => p.solver.seed,
            Self::GraphManifold(p) => p.solver.seed,
            Self::CalibrateDelta(_) => 0,
        }
    }

    pub fn set_seed(&mut self, seed: u64) {
        if let Some(s) = self.solver_mut() {
            s.seed = seed;
        }
    }

    /// Range and consistency checks beyond the schema.
    pub fn validate(&self) -> Result<()> {
        if self.output().formats.is_empty() {
            return invalid("output.formats must name at least one format");
        }
        match self {
            Self::Spectrum(p) => {
                p.model.validate()?;
                check_grid(&p.grid)?;
                check_solver(&p.solver)
            }
            Self::TheoremA(p) => {
                check_s_sweep(&p.s)?;
                if !(p.c > 0.0) || !(p.guard_margin >= 0.0) {
                    return invalid("window c must be positive and guard_margin nonnegative");
                }
                check_grid(&p.grid)?;
                check_solver(&p.solver)
            }
            Self::Pinch(p) => {
                check_s_sweep(&p.s)?;
                if p.eigen_index == 0 || !(p.delta > 0.0 && p.delta < 1.0) {
                    return invalid("eigen_index is 1-based and delta must lie in (0, 1)");
                }
                if let Some(t) = &p.insert {
                    if !(t.target > 0.0) || t.index == 0 || !(t.tau_max > 0.0) {
                        return invalid("insert tuning needs target > 0, index >= 1 and tau_max > 0");
                    }
                }
                check_grid(&p.grid)?;
                check_solver(&p.solver)
            }
            Self::LemmaTrials(p) => {
                match &p.trial {
                    TrialSpec::TwoPiece { tube_length, u, v, epsilon, trials } => {
                        let inside = |r: &[f64; 2]| r[0] < r[1] && r[0] >= 0.0 && r[1] <= *tube_length;
                        if !inside(u) || !inside(v) || !(*epsilon > 0.0) || *trials == 0 {
                            return invalid("two-piece trials need ordered intervals inside the tube, epsilon > 0 and trials >= 1");
                        }
                    }
                    TrialSpec::Neck { s, c, epsilon, trials, delta } => {
                        if !(*s > 0.0 && *s <= 1.0) || !(*c > 0.0) || !(*epsilon > 0.0) || *trials == 0 {
                            return invalid("neck trials need s in (0, 1], c > 0, epsilon > 0 and trials >= 1");
                        }
                        if delta.is_some_and(|d| !(d >= *s && d < 1.0)) {
                            return invalid("delta must satisfy s <= delta < 1");
                        }
                    }
                }
                check_grid(&p.grid)?;
                check_solver(&p.solver)
            }
            Self::Group(p) => p.group.validate(),
            Self::GraphManifold(p) => {
                p.group.validate()?;
                check_s_sweep(&p.s)?;
                if !(p.ratio > 0.0 && p.ratio <= 1.0) || p.arm == 0 {
                    return invalid("ratio must lie in (0, 1] and arm must be positive");
                }
                check_solver(&p.solver)
            }
            Self::CalibrateDelta(p) => {
                if !(p.s > 0.0 && p.s <= 1.0) || !(p.c > 0.0) || !(p.epsilon > 0.0) {
                    return invalid("calibration needs s in (0, 1], c > 0 and epsilon > 0");
                }
                check_grid(&p.grid)
            }
        }
        .map_err(|e| match e {
            Error::InvalidInput(m) => Error::InvalidInput(format!("{} config: {m}", self.kind())),
            other => other,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_with_defaults() {
        let cfg = ExperimentConfig::from_json(r#"{"kind": "theorem-a", "s": [0.5, 0.2], "c": 0.2}"#).unwrap();
        let ExperimentConfig::TheoremA(p) = &cfg else { panic!() };
        assert_eq!(p.guard_margin, 0.02);
        assert_eq!(p.grid.fiber_nodes, 8);
        assert_eq!(cfg.kind(), "theorem-a");
    }

    #[test]
    fn unknown_fields_are_rejected() {
        assert!(ExperimentConfig::from_json(r#"{"kind": "theorem-a", "s": [0.5], "c": 0.2, "color": 1}"#).is_err());
        assert!(ExperimentConfig::from_json(r#"{"kind": "theorem-a", "s": [0.5], "c": 0.2, "grid": {"step": 1}}"#).is_err());
        assert!(ExperimentConfig::from_json(r#"{"kind": "fourier", "s": [0.5]}"#).is_err());
    }

    #[test]
    fn range_checks() {
        assert!(ExperimentConfig::from_json(r#"{"kind": "theorem-a", "s": [0.2, 0.5], "c": 0.2}"#).is_err());
        assert!(ExperimentConfig::from_json(r#"{"kind": "group", "group": {"p": 4, "n": 1, "r": 1}}"#).is_err());
        let ok = ExperimentConfig::from_json(r#"{"kind": "group", "group": {"p": 7, "n": 1, "r": 1}}"#).unwrap();
        assert_eq!(ok.output().formats, vec![Format::Csv, Format::Json]);
        let trial = r#"{"kind": "lemma-trials", "trial": {"lemma": "neck", "s": 0.05, "c": 0.2, "epsilon": 0.5, "trials": 10, "delta": 0.01}}"#;
        assert!(ExperimentConfig::from_json(trial).is_err());
    }

    #[test]
    fn round_trips_through_json() {
        let cfg = ExperimentConfig::from_json(r#"{"kind": "graph-manifold", "group": {"p": 7, "n": 1, "r": 1}, "s": [0.2]}"#).unwrap();
        let text = serde_json::to_string(&cfg).unwrap();
        assert_eq!(ExperimentConfig::from_json(&text).unwrap(), cfg);
    }
}
