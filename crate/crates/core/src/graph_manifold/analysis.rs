use super::assemble::{assemble, equivariance_check, AssembledOperator, GluingData};
use super::template::{BlockTemplate, NeckTemplate};
use crate::convergence_lab::hausdorff_window;
use crate::error::{invalid, Error, Result};
use crate::group_theory::{
    build_gqm, cayley_graph, character_table, check_sequence_admissible, min_nontrivial_dim, nested_flag,
    standard_generators, CayleyGraph, CharacterTable, GeneratorSet, GqmGroup, GqmSpec, SequenceCertificate,
    SubgroupFlag,
};
use crate::linalg::{low_pencil, SolverOptions, SpectrumResult};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Eigenvalues below this count as zero in component censuses.
pub const ZERO_EIGENVALUE: f64 = 1e-8;

/// Low spectrum with eigenvectors and clusters.
pub fn spectrum_multiplicities(op: &AssembledOperator, count: usize, opts: &SolverOptions) -> Result<SpectrumResult> {
    if count > op.dim() {
        return invalid(format!("requested {count} eigenpairs of a {}-dimensional operator", op.dim()));
    }
    low_pencil(&op.stiffness, &op.mass, count, opts)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IsotypeShare {
    /// Row of the character table.
    pub character: usize,
    pub dimension: usize,
    /// Number of copies of the irreducible in the band.
    pub copies: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IsotypicDecomposition {
    /// Inclusive eigenvalue index range of the band.
    pub band: [usize; 2],
    pub band_dimension: usize,
    /// Unrounded copy counts, one per character.
    pub raw_copies: Vec<f64>,
    pub shares: Vec<IsotypeShare>,
    /// `sum copies * dimension`.
    pub isotypic_dimension: usize,
    /// Copy counts within 1e-6 of integers and dimensions summing to the band dimension.
    pub consistent: bool,
}

impl IsotypicDecomposition {
    pub fn contains(&self, character: usize) -> bool {
        self.shares.iter().any(|s| s.character == character)
    }
}

fn class_index(table: &CharacterTable) -> Vec<usize> {
    let mut of = vec![0; table.group_order];
    for (k, c) in table.classes.iter().enumerate() {
        for &x in &c.elements {
            of[x] = k;
        }
    }
    of
}

/// Trivial character row.
pub fn trivial_character(table: &CharacterTable) -> usize {
    (0..table.values.len())
        .find(|&i| table.values[i].iter().all(|v| (v - Complex64::from(1.0)).norm() < 1e-9))
        .unwrap_or(0)
}

/// Copies of each irreducible in the span of eigenvectors `band[0]..=band[1]`,
/// from the trace of the group action restricted to the band.
pub fn isotypic_multiplicities(
    op: &AssembledOperator,
    spectrum: &SpectrumResult,
    band: [usize; 2],
    table: &CharacterTable,
) -> Result<IsotypicDecomposition> {
    let vecs = spectrum.eigenvectors.as_ref().ok_or_else(|| Error::InvalidInput("spectrum carries no eigenvectors".into()))?;
    if band[0] > band[1] || band[1] >= vecs.len() {
        return invalid(format!("band {band:?} outside the {} computed eigenpairs", vecs.len()));
    }
    if table.group_order != op.group.order {
        return invalid("character table belongs to a different group");
    }
    let band_vecs = &vecs[band[0]..=band[1]];
    let trace: Vec<f64> = (0..op.group.order)
        .into_par_iter()
        .map(|x| {
            let perm = op.permutation(x);
            band_vecs
                .iter()
                .map(|v| (0..v.len()).map(|i| op.mass[i] * v[i] * v[perm[i]]).sum::<f64>())
                .sum()
        })
        .collect();
    let of = class_index(table);
    let order = table.group_order as f64;
    let raw_copies: Vec<f64> = (0..table.values.len())
        .map(|c| (0..table.group_order).map(|x| trace[x] * table.values[c][of[x]].conj()).sum::<Complex64>().re / order)
        .collect();
    let shares: Vec<IsotypeShare> = raw_copies
        .iter()
        .enumerate()
        .filter(|(_, m)| m.round() >= 1.0)
        .map(|(c, m)| IsotypeShare { character: c, dimension: table.dimensions[c], copies: m.round() as usize })
        .collect();
    let isotypic_dimension = shares.iter().map(|s| s.copies * s.dimension).sum();
    let band_dimension = band[1] - band[0] + 1;
    let consistent = raw_copies.iter().all(|m| (m - m.round()).abs() < 1e-6) && isotypic_dimension == band_dimension;
    Ok(IsotypicDecomposition { band, band_dimension, raw_copies, shares, isotypic_dimension, consistent })
}

/// Group, standard generators, Cayley graph, character table and flag for one `G_{q,m}`.
#[derive(Clone, Debug)]
pub struct GqmSetup {
    pub gqm: GqmGroup,
    pub generators: GeneratorSet,
    pub graph: CayleyGraph,
    pub flag: SubgroupFlag,
    pub sequence: SequenceCertificate,
    pub table: CharacterTable,
    pub block: BlockTemplate,
    pub neck: NeckTemplate,
}

impl GqmSetup {
    /// Uses a star block with arms of length 2 unless `block` is given.
    pub fn new(spec: GqmSpec, block: Option<BlockTemplate>, neck: NeckTemplate, seed: u64) -> Result<Self> {
        let gqm = build_gqm(spec)?;
        let generators = standard_generators(&gqm)?;
        let graph = cayley_graph(&gqm.group, &generators)?;
        let flag = nested_flag(&gqm);
        let sequence = check_sequence_admissible(&gqm.group, &flag, &generators);
        let table = character_table(&gqm.group, seed)?;
        let block = match block {
            Some(b) => b,
            None => BlockTemplate::star(2 * generators.pair_count(), 2)?,
        };
        Ok(Self { gqm, generators, graph, flag, sequence, table, block, neck })
    }

    pub fn data(&self) -> GluingData<'_> {
        GluingData {
            group: &self.gqm.group,
            generators: &self.generators,
            graph: &self.graph,
            block: &self.block,
            neck: &self.neck,
        }
    }

    /// Deepest flag level containing each pair's generator, 0 outside `H_1`.
    pub fn pair_levels(&self) -> Vec<usize> {
        self.generators
            .pairs
            .iter()
            .map(|p| self.flag.levels.iter().rposition(|h| h.binary_search(&p[0]).is_ok()).map_or(0, |j| j + 1))
            .collect()
    }

    /// Nested schedule: `s * ratio^(j - 1)` on pairs of level `j >= 1`, 1 outside `H_1`.
    pub fn nested_parameters(&self, s: f64, ratio: f64) -> Vec<f64> {
        self.pair_levels().iter().map(|&j| if j == 0 { 1.0 } else { s * ratio.powi(j as i32 - 1) }).collect()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LevelRow {
    /// Eigenvalue level, 2 for the second distinct eigenvalue.
    pub level: usize,
    pub eigenvalue: f64,
    /// Size of the eigenvalue cluster.
    pub cluster_size: usize,
    pub isotypes: IsotypicDecomposition,
    /// No isotype in the band is trivial on `H_1`.
    pub nontrivial_on_h1: bool,
    pub passes: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MultiplicityRow {
    pub s: f64,
    pub a: Vec<f64>,
    pub dofs: usize,
    pub eigenpairs: usize,
    pub equivariance_defect: f64,
    pub lambda1: f64,
    pub lambda1_simple: bool,
    pub lambda1_trivial: bool,
    pub lambda1_constant_sign: bool,
    pub levels: Vec<LevelRow>,
    pub passes: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MultiplicityReport {
    pub spec: GqmSpec,
    pub group_order: usize,
    pub chain_length: usize,
    pub pair_levels: Vec<usize>,
    pub ratio: f64,
    /// Smallest degree of an irreducible nontrivial on `H_1`.
    pub bound: usize,
    pub sequence_admissible: bool,
    pub rows: Vec<MultiplicityRow>,
    pub smallest_passing_s: Option<f64>,
    pub lambda1_simple_trivial_throughout: bool,
    pub passed: bool,
}

impl MultiplicityReport {
    pub fn write_csv<W: std::io::Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["s", "level", "eigenvalue", "cluster_size", "isotypic_dimension", "consistent", "nontrivial_on_h1", "passes"])?;
        for r in &self.rows {
            out.write_record([
                format!("{}", r.s),
                "1".into(),
                format!("{:e}", r.lambda1),
                if r.lambda1_simple { "1" } else { "0" }.into(),
                "1".into(),
                r.lambda1_trivial.to_string(),
                "false".into(),
                (r.lambda1_simple && r.lambda1_trivial).to_string(),
            ])?;
            for l in &r.levels {
                out.write_record([
                    format!("{}", r.s),
                    l.level.to_string(),
                    format!("{:e}", l.eigenvalue),
                    l.cluster_size.to_string(),
                    l.isotypes.isotypic_dimension.to_string(),
                    l.isotypes.consistent.to_string(),
                    l.nontrivial_on_h1.to_string(),
                    l.passes.to_string(),
                ])?;
            }
        }
        out.flush()?;
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MultiplicitySweep {
    /// Values of the schedule parameter, in sweep order.
    pub s: Vec<f64>,
    /// Factor between consecutive flag levels.
    pub ratio: f64,
}

impl Default for MultiplicitySweep {
    fn default() -> Self {
        Self { s: vec![0.8, 0.4, 0.2, 0.1, 0.05], ratio: 0.5 }
    }
}

fn row_for(setup: &GqmSetup, s: f64, ratio: f64, bound: usize, opts: &SolverOptions) -> Result<MultiplicityRow> {
    let levels = setup.flag.chain_length();
    let a = setup.nested_parameters(s, ratio);
    let op = assemble(&setup.data(), &a)?;
    let defect = equivariance_check(&op);
    let mut count = (2 + levels * bound * 2).min(op.dim());
    let spec = loop {
        let spec = spectrum_multiplicities(&op, count, opts)?;
        let complete = spec.clusters.len() > levels + 1 || count == op.dim();
        if complete {
            break spec;
        }
        count = (2 * count).min(op.dim());
    };
    let trivial = trivial_character(&setup.table);
    let h1 = &setup.flag.levels[0];
    let first = spec.clusters[0];
    let lambda1_simple = first[0] == first[1];
    let ground = isotypic_multiplicities(&op, &spec, first, &setup.table)?;
    let lambda1_trivial = ground.consistent && ground.shares.len() == 1 && ground.contains(trivial) && ground.isotypic_dimension == 1;
    let v = spec.vector(0).unwrap_or(&[]);
    let lambda1_constant_sign = v.iter().all(|&x| x > 0.0) || v.iter().all(|&x| x < 0.0);
    let mut rows = Vec::new();
    for j in 2..=levels + 1 {
        let Some(&band) = spec.clusters.get(j - 1) else { break };
        let iso = isotypic_multiplicities(&op, &spec, band, &setup.table)?;
        let nontrivial_on_h1 = iso.shares.iter().all(|sh| !setup.table.trivial_on(sh.character, h1));
        let passes = iso.consistent && nontrivial_on_h1 && iso.isotypic_dimension >= bound;
        rows.push(LevelRow {
            level: j,
            eigenvalue: spec.eigenvalues[band[0]],
            cluster_size: band[1] - band[0] + 1,
            isotypes: iso,
            nontrivial_on_h1,
            passes,
        });
    }
    let passes = rows.len() == levels && rows.iter().all(|r| r.passes) && lambda1_simple && lambda1_trivial && defect == 0.0;
    Ok(MultiplicityRow {
        s,
        a,
        dofs: op.dim(),
        eigenpairs: spec.len(),
        equivariance_defect: defect,
        lambda1: spec.eigenvalues[0],
        lambda1_simple,
        lambda1_trivial,
        lambda1_constant_sign,
        levels: rows,
        passes,
    })
}

/// Sweeps the nested schedule and reads multiplicities of eigenvalue levels
/// `2..=L + 1` from isotypic ranks.
pub fn multiplicity_experiment(setup: &GqmSetup, sweep: &MultiplicitySweep, opts: &SolverOptions) -> Result<MultiplicityReport> {
    if sweep.s.is_empty() || sweep.s.iter().any(|&s| !(s > 0.0 && s <= 1.0)) {
        return invalid("sweep values must lie in (0, 1]");
    }
    if !(sweep.ratio > 0.0 && sweep.ratio <= 1.0) {
        return invalid("level ratio must lie in (0, 1]");
    }
    let bound = min_nontrivial_dim(&setup.table, &setup.flag.levels[0])?;
    let rows: Vec<MultiplicityRow> =
        sweep.s.par_iter().map(|&s| row_for(setup, s, sweep.ratio, bound, opts)).collect::<Result<_>>()?;
    let smallest_passing_s = rows.iter().filter(|r| r.passes).map(|r| r.s).reduce(f64::min);
    let lambda1_simple_trivial_throughout = rows.iter().all(|r| r.lambda1_simple && r.lambda1_trivial);
    Ok(MultiplicityReport {
        spec: setup.gqm.spec,
        group_order: setup.gqm.group.order,
        chain_length: setup.flag.chain_length(),
        pair_levels: setup.pair_levels(),
        ratio: sweep.ratio,
        bound,
        sequence_admissible: setup.sequence.admissible,
        passed: smallest_passing_s.is_some() && lambda1_simple_trivial_throughout,
        smallest_passing_s,
        lambda1_simple_trivial_throughout,
        rows,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CensusRow {
    pub zeroed: Vec<usize>,
    pub graph_components: usize,
    pub operator_components: usize,
    pub zero_eigenvalues: usize,
    pub agrees: bool,
}

/// Zeroes the listed pairs (others at `a`) and compares graph components,
/// operator components and the number of zero eigenvalues.
pub fn disconnection_census(data: &GluingData, zeroed: &[usize], a: f64, opts: &SolverOptions) -> Result<CensusRow> {
    let k = data.graph.pair_count;
    if let Some(&bad) = zeroed.iter().find(|&&p| p >= k) {
        return invalid(format!("pair index {bad} out of range (graph has {k} pairs)"));
    }
    let params: Vec<f64> = (0..k).map(|p| if zeroed.contains(&p) { 0.0 } else { a }).collect();
    let op = assemble(data, &params)?;
    let graph_components = data.graph.components_without(zeroed);
    let operator_components = op.components();
    let count = (operator_components + 4).min(op.dim());
    let spec = low_pencil(&op.stiffness, &op.mass, count, opts)?;
    let zero_eigenvalues = spec.eigenvalues.iter().filter(|&&l| l.abs() < ZERO_EIGENVALUE).count();
    Ok(CensusRow {
        zeroed: zeroed.to_vec(),
        graph_components,
        operator_components,
        zero_eigenvalues,
        agrees: graph_components == operator_components && operator_components == zero_eigenvalues,
    })
}

/// Largest windowed Hausdorff distance between low spectra at consecutive path points.
pub fn eigenvalue_continuity_sweep(
    data: &GluingData,
    path: &[Vec<f64>],
    count: usize,
    c: f64,
    opts: &SolverOptions,
) -> Result<f64> {
    if path.len() < 2 {
        return invalid("continuity path needs at least two points");
    }
    let spectra: Vec<Vec<f64>> = path
        .par_iter()
        .map(|a| {
            let op = assemble(data, a)?;
            Ok(low_pencil(&op.stiffness, &op.mass, count.min(op.dim()), opts)?.eigenvalues)
        })
        .collect::<Result<_>>()?;
    Ok(spectra.windows(2).map(|w| hausdorff_window(&w[0], &w[1], c)).fold(0.0, f64::max))
}

/// `steps + 1` equally spaced points from `from` to `to`.
pub fn linear_path(from: &[f64], to: &[f64], steps: usize) -> Vec<Vec<f64>> {
    (0..=steps)
        .map(|i| {
            let t = i as f64 / steps as f64;
            from.iter().zip(to).map(|(x, y)| ((1.0 - t) * x + t * y).clamp(0.0, 1.0)).collect()
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group_theory::{check_admissible_set, FiniteGroup};

    fn g42() -> GqmSetup {
        GqmSetup::new(GqmSpec::new(7, 1, 1).unwrap(), None, NeckTemplate::default(), 1).unwrap()
    }

    #[test]
    fn g42_schedule_and_size() {
        let setup = g42();
        assert_eq!(setup.pair_levels(), vec![1, 0]);
        assert_eq!(setup.nested_parameters(0.2, 0.5), vec![0.2, 1.0]);
        let op = assemble(&setup.data(), &[0.2, 1.0]).unwrap();
        assert_eq!(op.dim(), 546);
    }

    #[test]
    fn g42_second_eigenvalue_is_sixfold() {
        let setup = g42();
        let sweep = MultiplicitySweep { s: vec![0.2, 0.1], ratio: 0.5 };
        let report = multiplicity_experiment(&setup, &sweep, &SolverOptions::default()).unwrap();
        assert_eq!(report.bound, 6);
        assert!(report.passed, "{report:?}");
        for r in &report.rows {
            assert_eq!(r.equivariance_defect, 0.0);
            assert!(r.lambda1_simple && r.lambda1_trivial && r.lambda1_constant_sign);
            assert_eq!(r.levels[0].isotypes.isotypic_dimension, 6);
            assert!(r.levels[0].isotypes.consistent);
        }
    }

    #[test]
    fn census_matches_graph() {
        let setup = g42();
        let opts = SolverOptions::default();
        let t = disconnection_census(&setup.data(), &[0], 0.5, &opts).unwrap();
        assert_eq!((t.graph_components, t.operator_components, t.zero_eigenvalues), (7, 7, 7));
        let x = disconnection_census(&setup.data(), &[1], 0.5, &opts).unwrap();
        assert_eq!((x.graph_components, x.operator_components, x.zero_eigenvalues), (6, 6, 6));
        let all = disconnection_census(&setup.data(), &[0, 1], 0.5, &opts).unwrap();
        assert!(all.agrees && all.operator_components == 42);
        assert!(disconnection_census(&setup.data(), &[2], 0.5, &opts).is_err());
    }

    #[test]
    fn disconnected_ground_band_is_the_permutation_module() {
        // zeroing the translation pair leaves 7 components permuted by H_1 = Z/7
        let setup = g42();
        let op = assemble(&setup.data(), &[0.0, 1.0]).unwrap();
        let spec = spectrum_multiplicities(&op, 10, &SolverOptions::default()).unwrap();
        assert_eq!(spec.clusters[0], [0, 6]);
        let iso = isotypic_multiplicities(&op, &spec, [0, 6], &setup.table).unwrap();
        assert!(iso.consistent);
        let trivial = trivial_character(&setup.table);
        assert!(iso.contains(trivial));
        // functions constant on cosets of <xi>: trivial plus the 6-dimensional irreducible
        let mut dims: Vec<usize> = iso.shares.iter().map(|s| s.dimension * s.copies).collect();
        dims.sort();
        assert_eq!(dims, vec![1, 6]);
    }

    #[test]
    fn continuity_in_one_coordinate() {
        let g = FiniteGroup::cyclic(5).unwrap();
        let s = check_admissible_set(&g, &[1, 4]);
        let graph = cayley_graph(&g, &s).unwrap();
        let block = BlockTemplate::star(2, 2).unwrap();
        let neck = NeckTemplate::default();
        let data = GluingData { group: &g, generators: &s, graph: &graph, block: &block, neck: &neck };
        let opts = SolverOptions::default();
        let constant = eigenvalue_continuity_sweep(&data, &linear_path(&[0.5], &[0.5], 4), 8, 0.5, &opts).unwrap();
        assert_eq!(constant, 0.0);
        let coarse = eigenvalue_continuity_sweep(&data, &linear_path(&[0.6], &[0.4], 10), 8, 0.3, &opts).unwrap();
        let fine = eigenvalue_continuity_sweep(&data, &linear_path(&[0.6], &[0.4], 20), 8, 0.3, &opts).unwrap();
        assert!(coarse > 0.0 && fine / coarse <= 0.6, "{coarse} {fine}");
        let through_zero = eigenvalue_continuity_sweep(&data, &linear_path(&[0.05], &[0.0], 10), 8, 0.3, &opts).unwrap();
        assert!(through_zero < 0.01, "{through_zero}");
    }
}
