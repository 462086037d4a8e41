use super::gqm::SubgroupFlag;
use super::group::FiniteGroup;
use serde::{Deserialize, Serialize};

/// Generator list grouped into inverse pairs, with recomputable certificates.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GeneratorSet {
    pub elements: Vec<usize>,
    /// `[g, g^-1]` in order of first appearance; the inverse may be missing from `elements`.
    pub pairs: Vec<[usize; 2]>,
    pub inverse_closed: bool,
    pub all_orders_at_least3: bool,
    pub generates: bool,
    pub minimal: bool,
}

impl GeneratorSet {
    pub fn is_admissible(&self) -> bool {
        self.inverse_closed && self.all_orders_at_least3 && self.generates && self.minimal
    }

    pub fn pair_count(&self) -> usize {
        self.pairs.len()
    }
}

fn pairs_of(g: &FiniteGroup, s: &[usize]) -> Vec<[usize; 2]> {
    let mut pairs: Vec<[usize; 2]> = Vec::new();
    for &x in s {
        if !pairs.iter().any(|p| p.contains(&x)) {
            pairs.push([x, g.inv(x)]);
        }
    }
    pairs
}

fn same_set(a: &[usize], b: &[usize]) -> bool {
    a.len() == b.len() && a.iter().zip(b).all(|(x, y)| x == y)
}

/// Certificates of `s` as a generating set of the subgroup `target` (sorted).
fn certify(g: &FiniteGroup, s: &[usize], target: &[usize]) -> GeneratorSet {
    let pairs = pairs_of(g, s);
    let inverse_closed = s.iter().all(|&x| s.contains(&g.inv(x)));
    let all_orders_at_least3 = !s.is_empty() && s.iter().all(|&x| g.element_order(x) >= 3);
    let generates = s.iter().all(|x| target.binary_search(x).is_ok()) && same_set(&g.closure(s), target);
    let minimal = generates
        && (0..pairs.len()).all(|i| {
            let rest: Vec<usize> = s.iter().copied().filter(|x| !pairs[i].contains(x)).collect();
            !same_set(&g.closure(&rest), target)
        });
    GeneratorSet { elements: s.to_vec(), pairs, inverse_closed, all_orders_at_least3, generates, minimal }
}

/// Inverse closure, element orders, generation of `g` and minimality with
/// respect to removing one inverse pair.
pub fn check_admissible_set(g: &FiniteGroup, s: &[usize]) -> GeneratorSet {
    let all: Vec<usize> = (0..g.order).collect();
    certify(g, s, &all)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LevelCertificate {
    /// Number of leading pairs generating the level, if any prefix does.
    pub prefix_pairs: Option<usize>,
    pub prefix_admissible: bool,
    /// The subgroup generated by the generators outside the level meets it trivially.
    pub complement_trivial: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SequenceCertificate {
    pub levels: Vec<LevelCertificate>,
    pub admissible: bool,
}

/// Checks every flag level: a prefix of the pairs generates it admissibly,
/// and the generators outside it generate a subgroup meeting it only in the identity.
pub fn check_sequence_admissible(g: &FiniteGroup, flag: &SubgroupFlag, s: &GeneratorSet) -> SequenceCertificate {
    let levels: Vec<LevelCertificate> = flag
        .levels
        .iter()
        .map(|h| {
            let prefix_pairs = (1..=s.pairs.len()).find(|&len| {
                let prefix: Vec<usize> = s.pairs[..len].iter().flatten().copied().collect();
                same_set(&g.closure(&prefix), h)
            });
            let prefix_admissible = prefix_pairs.is_some_and(|len| {
                let mut prefix: Vec<usize> = s.pairs[..len].iter().flatten().copied().collect();
                prefix.dedup();
                let cert = certify(g, &prefix, h);
                cert.inverse_closed && cert.all_orders_at_least3 && cert.generates && cert.minimal
            });
            let outside: Vec<usize> = s.elements.iter().copied().filter(|x| h.binary_search(x).is_err()).collect();
            let generated = g.closure(&outside);
            let complement_trivial = generated.iter().all(|x| *x == g.identity || h.binary_search(x).is_err());
            LevelCertificate { prefix_pairs, prefix_admissible, complement_trivial }
        })
        .collect();
    let admissible = s.is_admissible() && levels.iter().all(|l| l.prefix_admissible && l.complement_trivial);
    SequenceCertificate { levels, admissible }
}
