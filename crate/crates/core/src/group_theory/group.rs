use crate::error::{invalid, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::collections::VecDeque;

/// Finite group given by its multiplication table.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FiniteGroup {
    pub order: usize,
    /// `mul[a][b]` is the index of `a * b`.
    pub mul: Vec<Vec<u32>>,
    pub identity: usize,
    pub inverse: Vec<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub labels: Option<Vec<String>>,
}

/// Full associativity check up to this order, sampled above.
const FULL_CHECK: usize = 512;

impl FiniteGroup {
    pub fn from_table(mul: Vec<Vec<u32>>, labels: Option<Vec<String>>) -> Result<Self> {
        let n = mul.len();
        if n == 0 || mul.iter().any(|r| r.len() != n || r.iter().any(|&x| x as usize >= n)) {
            return invalid("multiplication table must be square with entries below the order");
        }
        if labels.as_ref().is_some_and(|l| l.len() != n) {
            return invalid("label count differs from the order");
        }
        let Some(identity) = (0..n).find(|&e| (0..n).all(|a| mul[e][a] as usize == a && mul[a][e] as usize == a)) else {
            return invalid("table has no two-sided identity");
        };
        let mut inverse = vec![0u32; n];
        for a in 0..n {
            match (0..n).find(|&b| mul[a][b] as usize == identity && mul[b][a] as usize == identity) {
                Some(b) => inverse[a] = b as u32,
                None => return invalid(format!("element {a} has no inverse")),
            }
        }
        let g = Self { order: n, mul, identity, inverse, labels };
        g.check_associative()?;
        Ok(g)
    }

    fn check_associative(&self) -> Result<()> {
        let n = self.order;
        let bad = |a: usize, b: usize, c: usize| self.op(self.op(a, b), c) != self.op(a, self.op(b, c));
        if n <= FULL_CHECK {
            for a in 0..n {
                for b in 0..n {
                    for c in 0..n {
                        if bad(a, b, c) {
                            return invalid(format!("table is not associative at ({a}, {b}, {c})"));
                        }
                    }
                }
            }
        } else {
            let mut rng = ChaCha8Rng::seed_from_u64(0);
            for _ in 0..200_000 {
                let (a, b, c) = (rng.gen_range(0..n), rng.gen_range(0..n), rng.gen_range(0..n));
                if bad(a, b, c) {
                    return invalid(format!("table is not associative at ({a}, {b}, {c})"));
                }
            }
        }
        Ok(())
    }

    pub fn cyclic(n: usize) -> Result<Self> {
        if n == 0 {
            return invalid("cyclic group order must be positive");
        }
        let mul = (0..n).map(|a| (0..n).map(|b| ((a + b) % n) as u32).collect()).collect();
        Self::from_table(mul, Some((0..n).map(|a| a.to_string()).collect()))
    }

    /// Dihedral group of order `2n`: `r^i` is `i`, `s r^i` is `n + i`.
    pub fn dihedral(n: usize) -> Result<Self> {
        if n < 2 {
            return invalid("dihedral group needs n >= 2");
        }
        let elem = |a: usize| (a / n, a % n);
        let mul = (0..2 * n)
            .map(|a| {
                (0..2 * n)
                    .map(|b| {
                        let ((fa, ra), (fb, rb)) = (elem(a), elem(b));
                        // s^fa r^ra s^fb r^rb = s^(fa+fb) r^(+-ra + rb)
                        let r = if fb == 0 { (ra + rb) % n } else { (n - ra + rb) % n };
                        (((fa + fb) % 2) * n + r) as u32
                    })
                    .collect()
            })
            .collect();
        Self::from_table(mul, None)
    }

    pub fn op(&self, a: usize, b: usize) -> usize {
        self.mul[a][b] as usize
    }

    pub fn inv(&self, a: usize) -> usize {
        self.inverse[a] as usize
    }

    pub fn pow(&self, a: usize, k: usize) -> usize {
        (0..k).fold(self.identity, |acc, _| self.op(acc, a))
    }

    pub fn element_order(&self, a: usize) -> usize {
        let mut x = a;
        let mut k = 1;
        while x != self.identity {
            x = self.op(x, a);
            k += 1;
        }
        k
    }

    /// Least common multiple of the element orders.
    pub fn exponent(&self) -> usize {
        (0..self.order).map(|a| self.element_order(a)).fold(1, |l, o| l / super::field::gcd(l, o) * o)
    }

    pub fn is_abelian(&self) -> bool {
        (0..self.order).all(|a| (0..a).all(|b| self.op(a, b) == self.op(b, a)))
    }

    pub fn label(&self, a: usize) -> String {
        self.labels.as_ref().map(|l| l[a].clone()).unwrap_or_else(|| a.to_string())
    }

    /// Subgroup generated by `gens`, sorted.
    pub fn closure(&self, gens: &[usize]) -> Vec<usize> {
        let mut seen = vec![false; self.order];
        seen[self.identity] = true;
        let mut queue = VecDeque::from([self.identity]);
        while let Some(x) = queue.pop_front() {
            for &g in gens {
                let y = self.op(x, g);
                if !seen[y] {
                    seen[y] = true;
                    queue.push_back(y);
                }
            }
        }
        (0..self.order).filter(|&a| seen[a]).collect()
    }

    pub fn is_subgroup(&self, set: &[usize]) -> bool {
        let mut member = vec![false; self.order];
        set.iter().for_each(|&a| member[a] = true);
        member[self.identity] && set.iter().all(|&a| member[self.inv(a)] && set.iter().all(|&b| member[self.op(a, b)]))
    }

    pub fn is_normal(&self, set: &[usize]) -> bool {
        let mut member = vec![false; self.order];
        set.iter().for_each(|&a| member[a] = true);
        self.is_subgroup(set) && (0..self.order).all(|g| set.iter().all(|&h| member[self.op(self.op(g, h), self.inv(g))]))
    }

    /// Subgroup generated by all commutators `a b a^-1 b^-1`.
    pub fn commutator_subgroup(&self) -> Vec<usize> {
        let mut comms = vec![false; self.order];
        for a in 0..self.order {
            for b in 0..self.order {
                comms[self.op(self.op(a, b), self.op(self.inv(a), self.inv(b)))] = true;
            }
        }
        let gens: Vec<usize> = (0..self.order).filter(|&c| comms[c]).collect();
        self.closure(&gens)
    }

    /// Conjugacy classes in order of their smallest element, each sorted.
    pub fn conjugacy_classes(&self) -> Vec<Vec<usize>> {
        let mut class_of = vec![usize::MAX; self.order];
        let mut classes = Vec::new();
        for a in 0..self.order {
            if class_of[a] != usize::MAX {
                continue;
            }
            let mut cls: Vec<usize> = (0..self.order).map(|g| self.op(self.op(g, a), self.inv(g))).collect();
            cls.sort_unstable();
            cls.dedup();
            cls.iter().for_each(|&c| class_of[c] = classes.len());
            classes.push(cls);
        }
        classes
    }
}
