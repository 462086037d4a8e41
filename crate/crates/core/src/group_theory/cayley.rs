use super::generators::GeneratorSet;
use super::group::FiniteGroup;
use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::collections::HashSet;

/// Undirected Cayley graph with one edge `{a, g a}` per element `a` and pair `[g, g^-1]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CayleyGraph {
    pub vertices: usize,
    pub pair_count: usize,
    /// `(a, g a, pair index)`.
    pub edges: Vec<(usize, usize, usize)>,
    pub degree: usize,
    pub connected: bool,
    /// Right multiplication by every group element maps labeled edges to labeled edges.
    pub right_action_automorphic: bool,
}

struct UnionFind(Vec<usize>);

impl UnionFind {
    pub fn new(n: usize) -> Self {
        Self((0..n).collect())
    }

    pub fn find(&mut self, a: usize) -> usize {
        let mut r = a;
        while self.0[r] != r {
            r = self.0[r];
        }
        let mut x = a;
        while self.0[x] != r {
            let next = self.0[x];
            self.0[x] = r;
            x = next;
        }
        r
    }

    pub fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.0[ra.max(rb)] = ra.min(rb);
        }
    }

    pub fn count(&mut self) -> usize {
        (0..self.0.len()).filter(|&a| self.find(a) == a).count()
    }
}

pub fn cayley_graph(g: &FiniteGroup, s: &GeneratorSet) -> Result<CayleyGraph> {
    if !s.inverse_closed {
        return Err(Error::Precondition("generator set must be inverse-closed (inverseClosed certificate is false)".into()));
    }
    for p in &s.pairs {
        if p[0] == g.identity || p[0] == p[1] {
            return Err(Error::Precondition(format!(
                "generator {} has order {}, so its edges are loops or doubled (allOrdersAtLeast3 certificate is false)",
                g.label(p[0]),
                g.element_order(p[0])
            )));
        }
    }
    let mut edges = Vec::with_capacity(g.order * s.pairs.len());
    let mut seen = HashSet::new();
    for (label, p) in s.pairs.iter().enumerate() {
        for a in 0..g.order {
            let b = g.op(p[0], a);
            if !seen.insert((a.min(b), a.max(b))) {
                return Err(Error::Precondition(format!(
                    "edge {{{a}, {b}}} appears twice; the generator set repeats an element"
                )));
            }
            edges.push((a, b, label));
        }
    }
    let mut deg = vec![0usize; g.order];
    let mut uf = UnionFind::new(g.order);
    for &(a, b, _) in &edges {
        deg[a] += 1;
        deg[b] += 1;
        uf.union(a, b);
    }
    let degree = deg[0];
    if deg.iter().any(|&d| d != degree) {
        return Err(Error::Precondition("graph is not regular".into()));
    }
    let labeled: HashSet<(usize, usize, usize)> = edges.iter().map(|&(a, b, l)| (a.min(b), a.max(b), l)).collect();
    let right_action_automorphic = (0..g.order).all(|x| {
        edges.iter().all(|&(a, b, l)| {
            let (u, v) = (g.op(a, x), g.op(b, x));
            labeled.contains(&(u.min(v), u.max(v), l))
        })
    });
    Ok(CayleyGraph {
        vertices: g.order,
        pair_count: s.pairs.len(),
        edges,
        degree,
        connected: uf.count() == 1,
        right_action_automorphic,
    })
}

impl CayleyGraph {
    /// Components after removing the edges whose labels are in `removed`.
    pub fn components_without(&self, removed: &[usize]) -> usize {
        let mut uf = UnionFind::new(self.vertices);
        for &(a, b, l) in &self.edges {
            if !removed.contains(&l) {
                uf.union(a, b);
            }
        }
        uf.count()
    }

    /// `u v label` per line.
    pub fn write_edge_list<W: std::io::Write>(&self, mut w: W) -> Result<()> {
        for &(a, b, l) in &self.edges {
            writeln!(w, "{a} {b} {l}")?;
        }
        Ok(())
    }
}

/// Number of connected components once pair `pair` is removed.
pub fn delete_generator_pair(graph: &CayleyGraph, pair: usize) -> Result<usize> {
    if pair >= graph.pair_count {
        return Err(Error::InvalidInput(format!("pair index {pair} out of range (graph has {} pairs)", graph.pair_count)));
    }
    Ok(graph.components_without(&[pair]))
}
