use super::template::{BlockTemplate, NeckTemplate};
use crate::error::{invalid, Result};
use crate::group_theory::{CayleyGraph, FiniteGroup, GeneratorSet};
use crate::linalg::{CsrMatrix, SymmetricAssembler};
use serde::{Deserialize, Serialize};

/// What a degree of freedom belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Dof {
    Block { element: usize, node: usize },
    /// Interior node `index` of lane `lane` on the neck of pair `pair` leaving copy `element`.
    Neck { pair: usize, element: usize, lane: usize, index: usize },
}

/// Global pencil of the glued manifold with its group action on degrees of freedom.
#[derive(Clone, Debug)]
pub struct AssembledOperator {
    pub stiffness: CsrMatrix,
    pub mass: Vec<f64>,
    pub dofs: Vec<Dof>,
    pub a: Vec<f64>,
    pub group: FiniteGroup,
    pub block_nodes: usize,
    /// First degree of freedom and interior length of each pair's necks (`None` when omitted).
    neck_layout: Vec<Option<(usize, usize)>>,
    width: usize,
}

/// Inputs shared by every assembly of one experiment.
#[derive(Clone, Debug)]
pub struct GluingData<'a> {
    pub group: &'a FiniteGroup,
    pub generators: &'a GeneratorSet,
    pub graph: &'a CayleyGraph,
    pub block: &'a BlockTemplate,
    pub neck: &'a NeckTemplate,
}

/// One block copy per group element; interface `2i` of copy `psi` is joined to
/// interface `2i + 1` of copy `g_i psi` through a neck with parameter `a[i]`.
pub fn assemble(data: &GluingData, a: &[f64]) -> Result<AssembledOperator> {
    let (g, block) = (data.group, data.block);
    let k = data.graph.pair_count;
    if data.generators.pairs.len() != k {
        return invalid("generator set and graph disagree on the number of pairs");
    }
    if block.interfaces.len() != 2 * k {
        return invalid(format!("block has {} interfaces, the graph needs {}", block.interfaces.len(), 2 * k));
    }
    if a.len() != k {
        return invalid(format!("parameter vector has {} entries, the graph has {k} pairs", a.len()));
    }
    if data.graph.vertices != g.order {
        return invalid("graph and group orders differ");
    }
    block.validate()?;
    let nb = block.nodes;
    let w = block.width();
    let mut dofs: Vec<Dof> = (0..g.order).flat_map(|e| (0..nb).map(move |node| Dof::Block { element: e, node })).collect();
    let mut mass: Vec<f64> = (0..g.order).flat_map(|_| block.mass.iter().copied()).collect();
    let mut chains = Vec::with_capacity(k);
    let mut neck_layout = Vec::with_capacity(k);
    for (pair, &ai) in a.iter().enumerate() {
        let chain = data.neck.chain(ai)?;
        match &chain {
            Some(c) => {
                let len = c.masses.len();
                neck_layout.push(Some((dofs.len(), len)));
                for element in 0..g.order {
                    for lane in 0..w {
                        for (index, &m) in c.masses.iter().enumerate() {
                            dofs.push(Dof::Neck { pair, element, lane, index });
                            mass.push(m);
                        }
                    }
                }
            }
            None => neck_layout.push(None),
        }
        chains.push(chain);
    }
    let mut asm = SymmetricAssembler::new(dofs.len());
    for e in 0..g.order {
        for &(i, j, wt) in &block.edges {
            asm.add_edge(e * nb + i, e * nb + j, wt);
        }
    }
    for (pair, chain) in chains.iter().enumerate() {
        let (Some(c), Some((start, len))) = (chain, neck_layout[pair]) else { continue };
        let gamma = data.generators.pairs[pair][0];
        for psi in 0..g.order {
            let other = g.op(gamma, psi);
            for lane in 0..w {
                let from = psi * nb + block.interfaces[2 * pair][lane];
                let to = other * nb + block.interfaces[2 * pair + 1][lane];
                let base = start + (psi * w + lane) * len;
                let path: Vec<usize> = std::iter::once(from).chain(base..base + len).chain(std::iter::once(to)).collect();
                for (step, &wt) in c.weights.iter().enumerate() {
                    asm.add_edge(path[step], path[step + 1], wt);
                }
            }
        }
    }
    Ok(AssembledOperator {
        stiffness: asm.finish(),
        mass,
        dofs,
        a: a.to_vec(),
        group: g.clone(),
        block_nodes: nb,
        neck_layout,
        width: w,
    })
}

impl AssembledOperator {
    pub fn dim(&self) -> usize {
        self.mass.len()
    }

    /// Degree-of-freedom permutation induced by right multiplication with `x`.
    pub fn permutation(&self, x: usize) -> Vec<usize> {
        let nb = self.block_nodes;
        self.dofs
            .iter()
            .map(|d| match *d {
                Dof::Block { element, node } => self.group.op(element, x) * nb + node,
                Dof::Neck { pair, element, lane, index } => {
                    let (start, len) = self.neck_layout[pair].unwrap();
                    start + (self.group.op(element, x) * self.width + lane) * len + index
                }
            })
            .collect()
    }

    /// Adds `delta` to the mass of one node of one block copy.
    pub fn perturb_block_mass(&mut self, element: usize, node: usize, delta: f64) {
        self.mass[element * self.block_nodes + node] += delta;
    }

    pub fn components(&self) -> usize {
        self.stiffness.components().0
    }

    /// `i j value` lines for the stiffness, then the mass diagonal as `i i value`.
    pub fn write_coo<A: std::io::Write, B: std::io::Write>(&self, mut stiffness: A, mut mass: B) -> Result<()> {
        self.stiffness.write_coo(&mut stiffness)?;
        for (i, m) in self.mass.iter().enumerate() {
            writeln!(mass, "{i} {i} {m:e}")?;
        }
        Ok(())
    }
}

/// `max_x max(|P_x S - S P_x|, |P_x M - M P_x|)` over all group elements.
pub fn equivariance_check(op: &AssembledOperator) -> f64 {
    let mut defect = 0.0f64;
    for x in 0..op.group.order {
        let perm = op.permutation(x);
        for (i, j, v) in op.stiffness.entries() {
            defect = defect.max((op.stiffness.get(perm[i], perm[j]) - v).abs());
        }
        for (i, &m) in op.mass.iter().enumerate() {
            defect = defect.max((op.mass[perm[i]] - m).abs());
        }
    }
    defect
}
