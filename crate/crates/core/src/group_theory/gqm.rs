use super::field::{is_prime, FiniteField};
use super::generators::{check_admissible_set, GeneratorSet};
use super::group::FiniteGroup;
use crate::error::{invalid, Error, Result};
use serde::{Deserialize, Serialize};

/// Parameters of the affine group `<xi^m> x| F_q` with `q = p^n`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GqmSpec {
    pub p: u32,
    pub n: u32,
    pub r: u32,
}

impl GqmSpec {
    pub fn new(p: u32, n: u32, r: u32) -> Result<Self> {
        let s = Self { p, n, r };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.p >= 3 && is_prime(self.p as u64)) {
            return invalid(format!("p must be an odd prime, got {}", self.p));
        }
        if self.n == 0 || self.r == 0 || self.n % self.r != 0 {
            return invalid(format!("r must be a positive divisor of n, got n = {}, r = {}", self.n, self.r));
        }
        if self.order() > 2000 {
            return invalid(format!("group order {} exceeds the table limit 2000", self.order()));
        }
        Ok(())
    }

    pub fn q(&self) -> usize {
        (self.p as usize).pow(self.n)
    }

    /// Order of the cyclic part, `p^r - 1`.
    pub fn cyclic_order(&self) -> usize {
        (self.p as usize).pow(self.r) - 1
    }

    /// `(q - 1) / (p^r - 1)`.
    pub fn m_param(&self) -> usize {
        (self.q() - 1) / self.cyclic_order()
    }

    /// Length of the translation flag, `n / r`.
    pub fn chain_length(&self) -> usize {
        (self.n / self.r) as usize
    }

    pub fn order(&self) -> usize {
        self.q().saturating_mul(self.cyclic_order())
    }
}

/// The group together with the data the constructions need.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GqmGroup {
    pub spec: GqmSpec,
    pub field: FiniteField,
    pub group: FiniteGroup,
    /// Translations `(1, b)`, sorted.
    pub h1: Vec<usize>,
    /// Field index of the multiplicative generator `xi`.
    pub xi: usize,
    /// Group element `(xi^m, 0)`.
    pub xi_m: usize,
    /// Field indices of a basis of `F_q` over the subfield generated by `xi^m`.
    pub basis: Vec<usize>,
    /// Translations `(1, g_i)` by the basis elements.
    pub basis_gens: Vec<usize>,
}

impl GqmGroup {
    /// Group index of `(xi^(m i), b)`.
    pub fn element(&self, i: usize, b: usize) -> usize {
        (i % self.spec.cyclic_order()) * self.spec.q() + b
    }

    pub fn translation(&self, b: usize) -> usize {
        self.element(0, b)
    }

    /// Translations by the span of `vectors` over the subfield.
    pub fn translation_span(&self, vectors: &[usize]) -> Vec<usize> {
        let sub = subfield(&self.field, self.xi, self.spec.m_param(), self.spec.cyclic_order());
        let mut span = vec![0usize];
        for &v in vectors {
            let mut next = Vec::with_capacity(span.len() * sub.len());
            for &s in &span {
                for &c in &sub {
                    next.push(self.field.add(s, self.field.mul(c, v)));
                }
            }
            next.sort_unstable();
            next.dedup();
            span = next;
        }
        let mut out: Vec<usize> = span.into_iter().map(|b| self.translation(b)).collect();
        out.sort_unstable();
        out
    }
}

fn subfield(field: &FiniteField, xi: usize, m: usize, c: usize) -> Vec<usize> {
    let mut s: Vec<usize> = std::iter::once(0).chain((0..c).map(|i| field.pow(xi, (m * i) as u64))).collect();
    s.sort_unstable();
    s
}

pub fn build_gqm(spec: GqmSpec) -> Result<GqmGroup> {
    spec.validate()?;
    let field = FiniteField::new(spec.p, spec.n)?;
    let (q, c, m) = (spec.q(), spec.cyclic_order(), spec.m_param());
    let xi = field.find_generator();
    let a_of: Vec<usize> = (0..c).map(|i| field.pow(xi, (m * i) as u64)).collect();
    let order = q * c;
    let mul: Vec<Vec<u32>> = (0..order)
        .map(|x| {
            let (i, b) = (x / q, x % q);
            (0..order)
                .map(|y| {
                    let (j, d) = (y / q, y % q);
                    // (a, b)(c, d) = (ac, ad + b)
                    (((i + j) % c) * q + field.add(field.mul(a_of[i], d), b)) as u32
                })
                .collect()
        })
        .collect();
    let labels = (0..order).map(|x| format!("({},{})", field.label(a_of[x / q]), field.label(x % q))).collect();
    let group = FiniteGroup::from_table(mul, Some(labels))?;
    let sub = subfield(&field, xi, m, c);
    let mut basis: Vec<usize> = Vec::new();
    let mut span: Vec<bool> = vec![false; q];
    span[0] = true;
    for v in 1..q {
        if span[v] {
            continue;
        }
        basis.push(v);
        let cur: Vec<usize> = (0..q).filter(|&x| span[x]).collect();
        for x in cur {
            for &s in &sub {
                span[field.add(x, field.mul(s, v))] = true;
            }
        }
    }
    debug_assert_eq!(basis.len(), spec.chain_length());
    let mut out = GqmGroup {
        spec,
        field,
        group,
        h1: (0..q).collect(),
        xi,
        xi_m: 0,
        basis: basis.clone(),
        basis_gens: Vec::new(),
    };
    out.xi_m = out.element(1, 0);
    out.basis_gens = basis.iter().map(|&b| out.translation(b)).collect();
    Ok(out)
}

/// `{g_i^(+-1)} u {xi^(+-m)}`. Pairs run from the last basis element to the
/// first, then `xi^m`, so leading pairs generate the deeper flag levels.
pub fn standard_generators(g: &GqmGroup) -> Result<GeneratorSet> {
    if g.spec.cyclic_order() < 3 {
        return Err(Error::Precondition(format!(
            "xi^m has order p^r - 1 = {} < 3, so no generator set with all orders at least 3 contains it",
            g.spec.cyclic_order()
        )));
    }
    let mut elems = Vec::new();
    for &t in g.basis_gens.iter().rev() {
        elems.push(t);
        elems.push(g.group.inv(t));
    }
    elems.push(g.xi_m);
    elems.push(g.group.inv(g.xi_m));
    Ok(check_admissible_set(&g.group, &elems))
}

/// `H_1 > H_2 > ... > H_L` inside the translations.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SubgroupFlag {
    pub levels: Vec<Vec<usize>>,
    /// `normal[i]`: `levels[i + 1]` is a proper normal subgroup of `levels[i]`.
    pub normal: Vec<bool>,
}

impl SubgroupFlag {
    pub fn chain_length(&self) -> usize {
        self.levels.len()
    }
}

/// `H_j` are the translations by the span of the last `L - j + 1` basis elements.
pub fn nested_flag(g: &GqmGroup) -> SubgroupFlag {
    let l = g.basis.len();
    let levels: Vec<Vec<usize>> = (1..=l).map(|j| g.translation_span(&g.basis[j - 1..])).collect();
    let normal = levels
        .windows(2)
        .map(|w| {
            let (big, small) = (&w[0], &w[1]);
            let mut member = vec![false; g.group.order];
            small.iter().for_each(|&a| member[a] = true);
            small.len() < big.len()
                && small.iter().all(|h| big.binary_search(h).is_ok())
                && big.iter().all(|&x| small.iter().all(|&h| member[g.group.op(g.group.op(x, h), g.group.inv(x))]))
        })
        .collect();
    SubgroupFlag { levels, normal }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn g42_shape() {
        let g = build_gqm(GqmSpec::new(7, 1, 1).unwrap()).unwrap();
        assert_eq!(g.group.order, 42);
        assert_eq!(g.spec.m_param(), 1);
        assert_eq!(g.spec.cyclic_order(), 6);
        assert_eq!(g.group.element_order(g.xi_m), 6);
        assert_eq!(g.group.identity, g.element(0, 0));
        assert_eq!(g.group.commutator_subgroup(), g.h1);
        let s = standard_generators(&g).unwrap();
        assert_eq!(s.elements.len(), 4);
        assert!(s.is_admissible());
    }

    #[test]
    fn g100_shape() {
        let g = build_gqm(GqmSpec::new(5, 2, 1).unwrap()).unwrap();
        assert_eq!(g.group.order, 100);
        assert_eq!(g.spec.m_param(), 6);
        assert_eq!(g.h1.len(), 25);
        assert_eq!(g.group.commutator_subgroup().len(), 25);
        assert!(g.group.is_normal(&g.h1));
        let s = standard_generators(&g).unwrap();
        assert_eq!(s.elements.len(), 6);
        assert!(s.is_admissible());
        let flag = nested_flag(&g);
        assert_eq!(flag.levels.iter().map(Vec::len).collect::<Vec<_>>(), vec![25, 5]);
        assert_eq!(flag.normal, vec![true]);
        // every level is stable under conjugation by xi^m
        for h in &flag.levels {
            assert!(h.iter().all(|&x| h.contains(&g.group.op(g.group.op(g.xi_m, x), g.group.inv(g.xi_m)))));
        }
    }

    #[test]
    fn translations_add() {
        let g = build_gqm(GqmSpec::new(5, 2, 1).unwrap()).unwrap();
        for b in [1, 7, 13] {
            for d in [2, 5, 24] {
                assert_eq!(g.group.op(g.translation(b), g.translation(d)), g.translation(g.field.add(b, d)));
            }
        }
    }

    #[test]
    fn order_two_cyclic_part_is_rejected() {
        let g = build_gqm(GqmSpec::new(3, 2, 1).unwrap()).unwrap();
        let err = standard_generators(&g).unwrap_err();
        assert!(err.to_string().contains("order p^r - 1 = 2 < 3"));
    }

    #[test]
    fn invalid_specs() {
        assert!(GqmSpec::new(2, 1, 1).is_err());
        assert!(GqmSpec::new(9, 1, 1).is_err());
        assert!(GqmSpec::new(5, 3, 2).is_err());
        assert!(GqmSpec::new(13, 3, 1).is_err());
    }

    #[test]
    fn larger_subfield_shrinks_the_flag() {
        let g = build_gqm(GqmSpec::new(3, 4, 2).unwrap()).unwrap();
        assert_eq!(g.spec.cyclic_order(), 8);
        assert_eq!(g.spec.m_param(), 10);
        assert_eq!(g.basis.len(), 2);
        assert_eq!(nested_flag(&g).levels[1].len(), 9);
    }
}
