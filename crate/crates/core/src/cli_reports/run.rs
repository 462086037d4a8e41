use super::config::*;
use crate::convergence_lab::{
    calibrate_delta, lemma21_near_extremal, lemma21_property_trial, lemma33_property_trial, pinch_eigenfunction_trace,
    theorem_a_experiment, tuned_insert_family,
};
use crate::discrete_laplace::{assemble_mode_operator, assemble_tensor_operator, low_spectrum, mode_union_spectrum, Grid1D, Subdomain};
use crate::error::{Error, Result};
use crate::graph_manifold::{assemble, disconnection_census, multiplicity_experiment, BlockTemplate, GqmSetup, MultiplicitySweep};
use crate::group_theory::{
    build_gqm, cayley_graph, character_table, check_sequence_admissible, min_nontrivial_dim, nested_flag,
    standard_generators,
};
use crate::metric_models::{make_pinch_family, pinch_model, EndCondition, FiberMetric, Segment, SurfaceModel, WarpProfile};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

pub const EXIT_OK: i32 = 0;
pub const EXIT_INVALID: i32 = 2;
pub const EXIT_REFUTED: i32 = 3;
pub const EXIT_SOLVER: i32 = 4;

/// Exit code for an error raised by an experiment.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::InvalidInput(_) | Error::Precondition(_) | Error::UnboundedDomain(_) | Error::Json(_) => EXIT_INVALID,
        Error::Refuted(_) | Error::Inconclusive(_) => EXIT_REFUTED,
        Error::NoConvergence { .. } | Error::Io(_) | Error::Csv(_) => EXIT_SOLVER,
    }
}

/// One expectation evaluated by a run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

fn check(name: &str, passed: bool, detail: String) -> Check {
    Check { name: name.into(), passed, detail }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub kind: String,
    /// SHA-256 of the effective configuration with `output.dir` cleared.
    pub config_hash: String,
    pub tool_version: String,
    pub seed: u64,
    pub threads: usize,
    pub wall_time_seconds: f64,
    pub outputs: Vec<String>,
    pub checks: Vec<Check>,
    pub exit_code: i32,
    pub message: Option<String>,
}

#[derive(Clone, Debug, Default)]
pub struct RunOverrides {
    pub out: Option<PathBuf>,
    pub seed: Option<u64>,
    pub threads: Option<usize>,
}

#[derive(Clone, Debug)]
pub struct RunOutcome {
    pub exit_code: i32,
    pub message: Option<String>,
    pub manifest: Option<RunManifest>,
    pub out_dir: Option<PathBuf>,
}

pub fn config_hash(cfg: &ExperimentConfig) -> String {
    let mut c = cfg.clone();
    c.output_mut().dir = PathBuf::new();
    let bytes = serde_json::to_vec(&c).expect("configuration serializes");
    Sha256::digest(&bytes).iter().map(|b| format!("{b:02x}")).collect()
}

/// Writes `bytes` to `path` through a temporary sibling and a rename.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let tmp = path.with_extension("tmp");
    {
        let mut f = File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
    }
    std::fs::rename(&tmp, path)?;
    Ok(())
}

/// Output directory with the set of files written so far.
struct Sink {
    dir: PathBuf,
    formats: Vec<Format>,
    files: Vec<String>,
}

impl Sink {
    fn file(&mut self, name: &str, f: impl FnOnce(&mut BufWriter<File>) -> Result<()>) -> Result<()> {
        let mut w = BufWriter::new(File::create(self.dir.join(name))?);
        f(&mut w)?;
        w.flush()?;
        self.files.push(name.to_string());
        Ok(())
    }

    fn csv(&mut self, name: &str, f: impl FnOnce(&mut BufWriter<File>) -> Result<()>) -> Result<()> {
        if self.formats.contains(&Format::Csv) {
            self.file(name, f)?;
        }
        Ok(())
    }

    fn json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<()> {
        if self.formats.contains(&Format::Json) {
            self.file(name, |w| {
                serde_json::to_writer_pretty(&mut *w, value)?;
                writeln!(w)?;
                Ok(())
            })?;
        }
        Ok(())
    }
}

/// Parses, applies overrides, validates and executes a configuration file.
pub fn run(config_path: &Path, overrides: &RunOverrides) -> RunOutcome {
    let fail = |code: i32, msg: String| RunOutcome { exit_code: code, message: Some(msg), manifest: None, out_dir: None };
    let text = match std::fs::read_to_string(config_path) {
        Ok(t) => t,
        Err(e) => return fail(EXIT_INVALID, format!("cannot read {}: {e}", config_path.display())),
    };
    let mut cfg: ExperimentConfig = match serde_json::from_str(&text) {
        Ok(c) => c,
        Err(e) => return fail(EXIT_INVALID, format!("invalid configuration: {e}")),
    };
    if let Some(dir) = &overrides.out {
        cfg.output_mut().dir = dir.clone();
    }
    if let Some(seed) = overrides.seed {
        cfg.set_seed(seed);
    }
    if let Err(e) = cfg.validate() {
        return fail(EXIT_INVALID, e.to_string());
    }
    run_config(&cfg, overrides.threads.unwrap_or_else(rayon::current_num_threads))
}

/// Executes a validated configuration and writes its manifest.
pub fn run_config(cfg: &ExperimentConfig, threads: usize) -> RunOutcome {
    let dir = cfg.output().dir.clone();
    if let Err(e) = std::fs::create_dir_all(&dir) {
        return RunOutcome {
            exit_code: EXIT_SOLVER,
            message: Some(format!("cannot create {}: {e}", dir.display())),
            manifest: None,
            out_dir: None,
        };
    }
    let start = Instant::now();
    let mut sink = Sink { dir: dir.clone(), formats: cfg.output().formats.clone(), files: Vec::new() };
    let (exit_code, message, checks) = match execute(cfg, &mut sink) {
        Ok(checks) => {
            let failed: Vec<&str> = checks.iter().filter(|c| !c.passed).map(|c| c.name.as_str()).collect();
            if failed.is_empty() {
                (EXIT_OK, None, checks)
            } else {
                let msg = format!("expectation not met: {}", failed.join(", "));
                (EXIT_REFUTED, Some(msg), checks)
            }
        }
        Err(e) => (exit_code(&e), Some(e.to_string()), Vec::new()),
    };
    let manifest = RunManifest {
        kind: cfg.kind().into(),
        config_hash: config_hash(cfg),
        tool_version: env!("CARGO_PKG_VERSION").into(),
        seed: cfg.seed(),
        threads,
        wall_time_seconds: start.elapsed().as_secs_f64(),
        outputs: sink.files.clone(),
        checks,
        exit_code,
        message: message.clone(),
    };
    let written = serde_json::to_vec_pretty(&manifest)
        .map_err(Error::from)
        .and_then(|bytes| write_atomic(&dir.join("manifest.json"), &bytes));
    match written {
        Ok(()) => RunOutcome { exit_code, message, manifest: Some(manifest), out_dir: Some(dir) },
        Err(e) => RunOutcome {
            exit_code: EXIT_SOLVER,
            message: Some(format!("cannot write manifest: {e}")),
            manifest: Some(manifest),
            out_dir: Some(dir),
        },
    }
}

fn strictly_decreasing(v: &[f64]) -> bool {
    v.windows(2).all(|w| w[1] < w[0])
}

fn strictly_increasing(v: &[f64]) -> bool {
    v.windows(2).all(|w| w[1] > w[0])
}

fn fmt_list(v: &[f64]) -> String {
    v.iter().map(|x| format!("{x:.4e}")).collect::<Vec<_>>().join(", ")
}

#[derive(Serialize)]
struct SpectrumReport {
    eigenvalues: Vec<f64>,
    residuals: Vec<f64>,
    clusters: Vec<[usize; 2]>,
    mode_union: Option<Vec<f64>>,
    separation_defect: Option<f64>,
}

fn execute(cfg: &ExperimentConfig, sink: &mut Sink) -> Result<Vec<Check>> {
    match cfg {
        ExperimentConfig::Spectrum(p) => run_spectrum(p, sink),
        ExperimentConfig::TheoremA(p) => run_theorem_a(p, sink),
        ExperimentConfig::Pinch(p) => run_pinch(p, sink),
        ExperimentConfig::LemmaTrials(p) => run_trials(p, sink),
        ExperimentConfig::Group(p) => run_group(p, sink),
        ExperimentConfig::GraphManifold(p) => run_graph_manifold(p, sink),
        ExperimentConfig::CalibrateDelta(p) => run_calibration(p, sink),
    }
}

fn run_spectrum(p: &SpectrumParams, sink: &mut Sink) -> Result<Vec<Check>> {
    let opts = p.solver.options();
    let grid = match p.grid.nodes {
        Some(n) => Grid1D::with_nodes(&p.model, n)?,
        None => Grid1D::new(&p.model, p.grid.spacing)?,
    };
    let (op, circle) = match p.model.fiber {
        FiberMetric::Circle { .. } => (assemble_tensor_operator(&grid, p.grid.fiber_nodes)?, true),
        FiberMetric::FlatTorus { .. } => (assemble_mode_operator(&grid, 0.0)?, false),
    };
    let count = p.solver.count.min(op.dim());
    let low = low_spectrum(&op, count, &opts)?;
    let mut checks = Vec::new();
    let (mode_union, separation_defect) = if circle {
        let mut union = mode_union_spectrum(&grid, p.grid.fiber_nodes, count, &opts)?;
        union.truncate(count);
        let defect = low.eigenvalues.iter().zip(&union).map(|(a, b)| (a - b).abs() / b.abs().max(1.0)).fold(0.0, f64::max);
        checks.push(check("separation", defect <= 1e-8, format!("max scaled difference {defect:.3e}")));
        (Some(union), Some(defect))
    } else {
        (None, None)
    };
    sink.csv("spectrum.csv", |w| {
        let mut wr = csv::Writer::from_writer(w);
        wr.write_record(["index", "eigenvalue", "residual", "mode_union"])?;
        for (i, (l, r)) in low.eigenvalues.iter().zip(&low.residuals).enumerate() {
            let u = mode_union.as_ref().map(|u| format!("{:.12e}", u[i])).unwrap_or_default();
            wr.write_record([(i + 1).to_string(), format!("{l:.12e}"), format!("{r:.3e}"), u])?;
        }
        wr.flush()?;
        Ok(())
    })?;
    let report = SpectrumReport {
        eigenvalues: low.eigenvalues.clone(),
        residuals: low.residuals.clone(),
        clusters: low.clusters.clone(),
        mode_union,
        separation_defect,
    };
    sink.json("spectrum.json", &report)?;
    Ok(checks)
}

fn run_theorem_a(p: &TheoremAParams, sink: &mut Sink) -> Result<Vec<Check>> {
    let family = make_pinch_family(&p.s, &p.geometry.fiber(), &p.geometry.outer, &p.geometry.pinch)?;
    let report = theorem_a_experiment(&family, p.c, p.solver.count, p.guard_margin, &p.grid.discretization(), &p.solver.options())?;
    sink.csv("theorem_a.csv", |w| report.write_csv(w))?;
    sink.json("theorem_a.json", &report)?;
    let h = report.hausdorff();
    Ok(vec![check("hausdorff_decreasing", strictly_decreasing(&h), fmt_list(&h))])
}

#[derive(Serialize)]
struct PinchOutput<'a> {
    inserts: Option<&'a [f64]>,
    trace: &'a crate::convergence_lab::PinchTrace,
}

fn run_pinch(p: &PinchParams, sink: &mut Sink) -> Result<Vec<Check>> {
    let (fiber, disc, opts) = (p.geometry.fiber(), p.grid.discretization(), p.solver.options());
    let (family, inserts) = match &p.insert {
        Some(t) => {
            let (fam, taus) = tuned_insert_family(&p.s, &fiber, &p.geometry.outer, t.target, t.index, &p.geometry.pinch, &disc, &opts)?;
            (fam, Some(taus))
        }
        None => (make_pinch_family(&p.s, &fiber, &p.geometry.outer, &p.geometry.pinch)?, None),
    };
    let trace = pinch_eigenfunction_trace(&family, p.eigen_index, p.delta, &disc, &opts)?;
    sink.csv("trace.csv", |w| trace.write_csv(w))?;
    sink.csv("trace_summary.csv", |w| trace.write_summary_csv(w))?;
    sink.json("trace.json", &PinchOutput { inserts: inserts.as_deref(), trace: &trace })?;
    let sup = trace.sup_diffs();
    let mut checks = vec![check("sup_diff_decreasing", strictly_decreasing(&sup), fmt_list(&sup))];
    let mz: Vec<f64> = trace.rows.iter().map(|r| r.mean_zero_neck_mass).collect();
    checks.push(check("mean_zero_neck_mass_decreasing", strictly_decreasing(&mz), fmt_list(&mz)));
    if inserts.is_some() {
        let ratio: Vec<f64> = trace.rows.iter().map(|r| r.cusp_mass_ratio).collect();
        checks.push(check("cusp_mass_ratio_increasing", strictly_increasing(&ratio), fmt_list(&ratio)));
    }
    Ok(checks)
}

fn trial_summary_csv<W: Write>(w: W, header: &[&str], row: &[String]) -> Result<()> {
    let mut wr = csv::Writer::from_writer(w);
    wr.write_record(header)?;
    wr.write_record(row)?;
    wr.flush()?;
    Ok(())
}

fn run_trials(p: &LemmaTrialParams, sink: &mut Sink) -> Result<Vec<Check>> {
    let opts = p.solver.options();
    let seed = p.solver.seed;
    let (violations, inconclusive, satisfied) = match &p.trial {
        TrialSpec::TwoPiece { tube_length, u, v, epsilon, trials } => {
            let model = SurfaceModel::new(
                FiberMetric::circle(1.0),
                vec![Segment::new(WarpProfile::FlatTube { rho: 1.0 }, 0.0, *tube_length)],
                [EndCondition::Neumann; 2],
                vec![[0.0, 0.0]],
            )?;
            let op = assemble_mode_operator(&Grid1D::new(&model, p.grid.spacing)?, 0.0)?;
            let mu = op.mask(&Subdomain::BaseInterval { lo: u[0], hi: u[1] });
            let mv = op.mask(&Subdomain::BaseInterval { lo: v[0], hi: v[1] });
            let report = lemma21_property_trial(&op, &mu, &mv, *epsilon, *trials, seed, &opts)?;
            let extremal = lemma21_near_extremal(&op, &mu, &mv, *epsilon, &opts)?;
            #[derive(Serialize)]
            struct Out<'a> {
                report: &'a crate::convergence_lab::Lemma21Report,
                near_extremal: &'a crate::convergence_lab::Lemma21Trial,
            }
            sink.json("trials.json", &Out { report: &report, near_extremal: &extremal })?;
            sink.csv("trials.csv", |w| {
                trial_summary_csv(
                    w,
                    &["epsilon", "trials", "satisfied", "violations", "max_mass_ratio", "max_energy_ratio"],
                    &[
                        format!("{}", report.epsilon),
                        report.trials.to_string(),
                        report.satisfied.to_string(),
                        report.violations.to_string(),
                        format!("{:.6e}", report.max_mass_ratio),
                        format!("{:.6e}", report.max_energy_ratio),
                    ],
                )
            })?;
            (report.violations + usize::from(extremal.violation), report.inconclusive, report.satisfied)
        }
        TrialSpec::Neck { s, c, epsilon, trials, delta } => {
            let disc = p.grid.discretization();
            let model = pinch_model(*s, &p.geometry.fiber(), &p.geometry.outer, 0.0)?;
            let delta = match delta {
                Some(d) => *d,
                None => calibrate_delta(&model, &disc, *c, *epsilon, *s)?.delta,
            };
            let report = lemma33_property_trial(&model, &disc, *c, *epsilon, delta, *trials, seed, &opts)?;
            sink.json("trials.json", &report)?;
            sink.csv("trials.csv", |w| {
                trial_summary_csv(
                    w,
                    &["c", "epsilon", "delta", "trials", "satisfied", "violations", "max_ratio"],
                    &[
                        format!("{}", report.c),
                        format!("{}", report.epsilon),
                        format!("{}", report.delta),
                        report.trials.to_string(),
                        report.satisfied.to_string(),
                        report.violations.to_string(),
                        format!("{:.6e}", report.max_ratio),
                    ],
                )
            })?;
            (report.violations, report.inconclusive, report.satisfied)
        }
    };
    Ok(vec![
        check("no_violations", violations == 0, format!("{violations} violations")),
        check("conclusive", !inconclusive, format!("{satisfied} trials met the hypotheses")),
    ])
}

#[derive(Serialize)]
struct GroupSummary {
    spec: crate::group_theory::GqmSpec,
    order: usize,
    q: usize,
    m: usize,
    chain_length: usize,
    generators: crate::group_theory::GeneratorSet,
    sequence: crate::group_theory::SequenceCertificate,
    graph_degree: usize,
    graph_connected: bool,
    graph_right_action_automorphic: bool,
    sum_of_squares: usize,
    orthogonality_defect: f64,
    column_defect: f64,
    min_nontrivial_dim: usize,
    degree_bound: usize,
}

fn run_group(p: &GroupParams, sink: &mut Sink) -> Result<Vec<Check>> {
    let g = build_gqm(p.group)?;
    let gens = standard_generators(&g)?;
    let graph = cayley_graph(&g.group, &gens)?;
    let flag = nested_flag(&g);
    let sequence = check_sequence_admissible(&g.group, &flag, &gens);
    let table = character_table(&g.group, p.solver.seed)?;
    let tc = table.check();
    let min_dim = min_nontrivial_dim(&table, &flag.levels[0])?;
    let spec = p.group;
    let degree_bound = (spec.q() - 1) / spec.m_param();
    let summary = GroupSummary {
        spec,
        order: g.group.order,
        q: spec.q(),
        m: spec.m_param(),
        chain_length: spec.chain_length(),
        generators: gens.clone(),
        sequence,
        graph_degree: graph.degree,
        graph_connected: graph.connected,
        graph_right_action_automorphic: graph.right_action_automorphic,
        sum_of_squares: tc.sum_of_squares,
        orthogonality_defect: tc.orthogonality_defect,
        column_defect: tc.column_defect,
        min_nontrivial_dim: min_dim,
        degree_bound,
    };
    sink.json("group.json", &summary)?;
    sink.json("character_table.json", &table)?;
    sink.file("cayley_edges.txt", |w| graph.write_edge_list(w))?;
    sink.csv("characters.csv", |w| {
        let mut wr = csv::Writer::from_writer(w);
        let mut head = vec!["character".to_string(), "dimension".into()];
        head.extend(table.classes.iter().map(|c| format!("class_{}", c.representative)));
        wr.write_record(&head)?;
        for (i, row) in table.values.iter().enumerate() {
            let mut rec = vec![i.to_string(), table.dimensions[i].to_string()];
            rec.extend(row.iter().map(|z| format!("{:.9}{:+.9}i", z.re, z.im)));
            wr.write_record(&rec)?;
        }
        wr.flush()?;
        Ok(())
    })?;
    Ok(vec![
        check("generators_admissible", gens.is_admissible(), format!("{:?}", gens.pairs)),
        check("cayley_graph", graph.connected && graph.right_action_automorphic, format!("degree {}", graph.degree)),
        check("sum_of_squares", tc.sum_of_squares == g.group.order, format!("{} vs {}", tc.sum_of_squares, g.group.order)),
        check("orthogonality", tc.orthogonality_defect <= 1e-8 && tc.column_defect <= 1e-8, format!("{:.3e}", tc.orthogonality_defect)),
        check("degree_bound", min_dim >= degree_bound, format!("{min_dim} >= {degree_bound}")),
    ])
}

fn run_graph_manifold(p: &GraphManifoldParams, sink: &mut Sink) -> Result<Vec<Check>> {
    let opts = p.solver.options();
    let gens = standard_generators(&build_gqm(p.group)?)?;
    let block = BlockTemplate::star(2 * gens.pair_count(), p.arm)?;
    let setup = GqmSetup::new(p.group, Some(block), p.neck, p.solver.seed)?;
    let report = multiplicity_experiment(&setup, &MultiplicitySweep { s: p.s.clone(), ratio: p.ratio }, &opts)?;
    let k = setup.generators.pair_count();
    let mut census = (0..k).map(|i| disconnection_census(&setup.data(), &[i], 1.0, &opts)).collect::<Result<Vec<_>>>()?;
    census.push(disconnection_census(&setup.data(), &(0..k).collect::<Vec<_>>(), 1.0, &opts)?);
    sink.csv("multiplicity.csv", |w| report.write_csv(w))?;
    sink.json("multiplicity.json", &report)?;
    sink.json("census.json", &census)?;
    sink.csv("census.csv", |w| {
        let mut wr = csv::Writer::from_writer(w);
        wr.write_record(["zeroed", "graph_components", "operator_components", "zero_eigenvalues", "agrees"])?;
        for c in &census {
            let z: Vec<String> = c.zeroed.iter().map(|x| x.to_string()).collect();
            wr.write_record([
                z.join(" "),
                c.graph_components.to_string(),
                c.operator_components.to_string(),
                c.zero_eigenvalues.to_string(),
                c.agrees.to_string(),
            ])?;
        }
        wr.flush()?;
        Ok(())
    })?;
    if p.export_operator {
        let s = p.s.iter().copied().fold(f64::INFINITY, f64::min);
        let op = assemble(&setup.data(), &setup.nested_parameters(s, p.ratio))?;
        let mut mass = Vec::new();
        sink.file("stiffness.coo", |w| op.write_coo(w, &mut mass))?;
        sink.file("mass.coo", |w| Ok(w.write_all(&mass)?))?;
    }
    let defect = report.rows.iter().map(|r| r.equivariance_defect).fold(0.0, f64::max);
    Ok(vec![
        check(
            "multiplicity_bound",
            report.passed,
            match report.smallest_passing_s {
                Some(s) => format!("bound {} met at s = {s}", report.bound),
                None => format!("no s in the sweep gives every level multiplicity >= {} with nontrivial isotypes", report.bound),
            },
        ),
        check("equivariance", defect == 0.0, format!("max defect {defect:e}")),
        check("census", census.iter().all(|c| c.agrees), format!("{} deletions", census.len())),
    ])
}

fn run_calibration(p: &CalibrateDeltaParams, sink: &mut Sink) -> Result<Vec<Check>> {
    let model = pinch_model(p.s, &p.geometry.fiber(), &p.geometry.outer, 0.0)?;
    let cal = calibrate_delta(&model, &p.grid.discretization(), p.c, p.epsilon, p.s)?;
    sink.json("calibration.json", &cal)?;
    sink.csv("calibration.csv", |w| {
        let mut wr = csv::Writer::from_writer(w);
        wr.write_record(["delta", "bound"])?;
        for e in &cal.table {
            wr.write_record([format!("{}", e[0]), format!("{:.12e}", e[1])])?;
        }
        wr.flush()?;
        Ok(())
    })?;
    Ok(Vec::new())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn write_config(dir: &Path, text: &str) -> PathBuf {
        let path = dir.join("config.json");
        std::fs::write(&path, text).unwrap();
        path
    }

    #[test]
    fn malformed_json_exits_two() {
        let dir = tempfile::tempdir().unwrap();
        let path = write_config(dir.path(), "{\"kind\": ");
        assert_eq!(run(&path, &RunOverrides::default()).exit_code, EXIT_INVALID);
        assert_eq!(run(&dir.path().join("missing.json"), &RunOverrides::default()).exit_code, EXIT_INVALID);
    }

    #[test]
    fn group_run_writes_manifest_and_is_reproducible() {
        let dir = tempfile::tempdir().unwrap();
        let path = write_config(dir.path(), r#"{"kind": "group", "group": {"p": 7, "n": 1, "r": 1}}"#);
        let mut hashes = Vec::new();
        let mut tables = Vec::new();
        for sub in ["a", "b"] {
            let out = dir.path().join(sub);
            let o = run(&path, &RunOverrides { out: Some(out.clone()), seed: Some(3), threads: None });
            assert_eq!(o.exit_code, EXIT_OK, "{:?}", o.message);
            let m = o.manifest.unwrap();
            assert!(m.outputs.contains(&"character_table.json".to_string()));
            hashes.push(m.config_hash);
            tables.push(std::fs::read(out.join("characters.csv")).unwrap());
            assert!(out.join("manifest.json").exists());
        }
        assert_eq!(hashes[0], hashes[1]);
        assert_eq!(tables[0], tables[1]);
    }

    #[test]
    fn escaping_guard_exits_two() {
        let dir = tempfile::tempdir().unwrap();
        let path = write_config(
            dir.path(),
            r#"{"kind": "theorem-a", "s": [0.5, 0.2], "c": 5.0,
                "geometry": {"outer": {"profile": {"kind": "flat_tube", "rho": 1.0}, "length": 4.0}},
                "grid": {"spacing": 0.05, "fiber_nodes": 4}}"#,
        );
        let o = run(&path, &RunOverrides { out: Some(dir.path().join("out")), ..Default::default() });
        assert_eq!(o.exit_code, EXIT_INVALID);
        assert!(o.message.unwrap().contains("lim inf mu1(Omega_i)"));
    }
}
