use crate::error::{invalid, Result};
use serde::{Deserialize, Serialize};
use std::collections::HashMap;

/// Building block: a weighted graph with `2k` exchangeable interfaces.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BlockTemplate {
    pub nodes: usize,
    /// `(i, j, w)`: adds `w (x_i - x_j)^2` to the energy.
    pub edges: Vec<(usize, usize, f64)>,
    pub mass: Vec<f64>,
    /// Interface node lists, all of width `w`.
    pub interfaces: Vec<Vec<usize>>,
    /// `equivalences[i]` maps interface 0 onto interface `i` lane by lane and preserves edges and masses.
    pub equivalences: Vec<Vec<usize>>,
}

fn edge_key(a: usize, b: usize, w: f64) -> (usize, usize, u64) {
    (a.min(b), a.max(b), w.to_bits())
}

impl BlockTemplate {
    /// Hub with `2k` arms of `arm` nodes; the arm tips are the interfaces.
    pub fn star(interfaces: usize, arm: usize) -> Result<Self> {
        if interfaces == 0 || arm == 0 {
            return invalid("star block needs at least one arm of positive length");
        }
        let nodes = 1 + interfaces * arm;
        let node = |i: usize, l: usize| 1 + i * arm + l;
        let mut edges = Vec::new();
        for i in 0..interfaces {
            edges.push((0, node(i, 0), 1.0));
            for l in 1..arm {
                edges.push((node(i, l - 1), node(i, l), 1.0));
            }
        }
        let equivalences = (0..interfaces)
            .map(|i| {
                let mut perm: Vec<usize> = (0..nodes).collect();
                for l in 0..arm {
                    perm.swap(node(0, l), node(i, l));
                }
                perm
            })
            .collect();
        let t = Self {
            nodes,
            edges,
            mass: vec![1.0; nodes],
            interfaces: (0..interfaces).map(|i| vec![node(i, arm - 1)]).collect(),
            equivalences,
        };
        t.validate()?;
        Ok(t)
    }

    pub fn width(&self) -> usize {
        self.interfaces.first().map_or(0, Vec::len)
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.nodes;
        if self.mass.len() != n || self.mass.iter().any(|&m| !(m > 0.0)) {
            return invalid("block mass must be positive with one entry per node");
        }
        if self.edges.iter().any(|&(a, b, w)| a >= n || b >= n || a == b || !w.is_finite()) {
            return invalid("block edges must join distinct nodes with finite weights");
        }
        let w = self.width();
        if (w == 0 && !self.interfaces.is_empty()) || self.interfaces.iter().any(|f| f.len() != w || f.iter().any(|&x| x >= n)) {
            return invalid("interfaces must be nonempty node lists of equal width");
        }
        let mut used = vec![false; n];
        for &x in self.interfaces.iter().flatten() {
            if used[x] {
                return invalid("interfaces must be disjoint");
            }
            used[x] = true;
        }
        if self.equivalences.len() != self.interfaces.len() {
            return invalid("one equivalence permutation per interface is required");
        }
        let mut count: HashMap<(usize, usize, u64), usize> = HashMap::new();
        for &(a, b, w) in &self.edges {
            *count.entry(edge_key(a, b, w)).or_default() += 1;
        }
        for (i, perm) in self.equivalences.iter().enumerate() {
            let mut seen = vec![false; n];
            if perm.len() != n || perm.iter().any(|&x| x >= n || std::mem::replace(&mut seen[x], true)) {
                return invalid(format!("equivalence {i} is not a permutation"));
            }
            if (0..w).any(|l| perm[self.interfaces[0][l]] != self.interfaces[i][l]) {
                return invalid(format!("equivalence {i} does not carry interface 0 onto interface {i}"));
            }
            if (0..n).any(|x| self.mass[perm[x]] != self.mass[x]) {
                return invalid(format!("equivalence {i} does not preserve the mass"));
            }
            let mut image: HashMap<(usize, usize, u64), usize> = HashMap::new();
            for &(a, b, w) in &self.edges {
                *image.entry(edge_key(perm[a], perm[b], w)).or_default() += 1;
            }
            if image != count {
                return invalid(format!("equivalence {i} does not preserve the stiffness"));
            }
        }
        Ok(())
    }
}

/// Chain joining two interfaces; parameter 0 removes the coupling.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", deny_unknown_fields)]
pub enum NeckTemplate {
    /// `nodes` interior nodes of mass `a^2` joined by edges of weight `a`.
    ThinTube { nodes: usize },
    /// `ceil(1 / a)` interior nodes of unit mass and unit weights, end edges of weight `a`.
    Path,
}

impl Default for NeckTemplate {
    fn default() -> Self {
        Self::ThinTube { nodes: 2 }
    }
}

/// Interior masses and the `len + 1` edge weights of one neck lane.
#[derive(Clone, Debug, PartialEq)]
pub struct NeckChain {
    pub masses: Vec<f64>,
    pub weights: Vec<f64>,
}

impl NeckTemplate {
    pub fn chain(&self, a: f64) -> Result<Option<NeckChain>> {
        if !(0.0..=1.0).contains(&a) {
            return invalid(format!("neck parameter must lie in [0, 1], got {a}"));
        }
        if a == 0.0 {
            return Ok(None);
        }
        Ok(Some(match *self {
            Self::ThinTube { nodes } => NeckChain { masses: vec![a * a; nodes], weights: vec![a; nodes + 1] },
            Self::Path => {
                let len = (1.0 / a).ceil() as usize;
                let mut weights = vec![1.0; len + 1];
                weights[0] = a;
                weights[len] = a;
                NeckChain { masses: vec![1.0; len], weights }
            }
        }))
    }

    /// Interior node count at parameter `a`.
    pub fn len(&self, a: f64) -> usize {
        self.chain(a).ok().flatten().map_or(0, |c| c.masses.len())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn star_is_valid() {
        let b = BlockTemplate::star(4, 2).unwrap();
        assert_eq!(b.nodes, 9);
        assert_eq!(b.width(), 1);
        assert_eq!(b.interfaces[3], vec![8]);
    }

    #[test]
    fn asymmetric_block_is_rejected() {
        let mut b = BlockTemplate::star(2, 2).unwrap();
        b.edges[0].2 = 2.0;
        assert!(b.validate().is_err());
        let mut b = BlockTemplate::star(2, 2).unwrap();
        b.mass[4] = 3.0;
        assert!(b.validate().is_err());
        let mut b = BlockTemplate::star(2, 2).unwrap();
        b.interfaces[1] = b.interfaces[0].clone();
        assert!(b.validate().is_err());
    }

    #[test]
    fn neck_chains() {
        let t = NeckTemplate::default();
        assert!(t.chain(0.0).unwrap().is_none());
        let c = t.chain(0.1).unwrap().unwrap();
        assert_eq!(c.weights, vec![0.1; 3]);
        assert!((c.masses[0] - 0.01).abs() < 1e-15);
        assert!(t.chain(1.5).is_err());
        assert_eq!(NeckTemplate::Path.len(0.3), 4);
        let p = NeckTemplate::Path.chain(0.25).unwrap().unwrap();
        assert_eq!(p.weights, vec![0.25, 1.0, 1.0, 1.0, 0.25]);
    }
}
