use crate::error::{invalid, Result};
use serde::{Deserialize, Serialize};

/// Conway polynomials, coefficients from `x^0` up to the leading 1.
const CONWAY: &[(u32, u32, &[u32])] = &[
    (3, 2, &[2, 2, 1]),
    (3, 3, &[1, 2, 0, 1]),
    (3, 4, &[2, 0, 0, 2, 1]),
    (5, 2, &[2, 4, 1]),
    (5, 3, &[3, 3, 0, 1]),
    (5, 4, &[2, 4, 4, 0, 1]),
    (7, 2, &[3, 6, 1]),
    (7, 3, &[4, 0, 6, 1]),
    (7, 4, &[3, 4, 5, 0, 1]),
    (11, 2, &[2, 7, 1]),
    (11, 3, &[9, 2, 0, 1]),
    (13, 2, &[2, 12, 1]),
    (13, 3, &[11, 2, 0, 1]),
];

pub fn is_prime(p: u64) -> bool {
    if p < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= p {
        if p % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

/// Remainder of `a` modulo the monic `f`, coefficients mod `p`.
fn poly_rem(a: &[u32], f: &[u32], p: u32) -> Vec<u32> {
    let mut r: Vec<u32> = a.to_vec();
    let df = f.len() - 1;
    while r.len() > df {
        let lead = *r.last().unwrap();
        let shift = r.len() - 1 - df;
        if lead != 0 {
            for (i, &c) in f.iter().enumerate() {
                r[shift + i] = (r[shift + i] + p - (lead * c) % p) % p;
            }
        }
        r.pop();
    }
    r
}

/// Brute-force irreducibility: no monic factor of degree at most `deg / 2`.
pub fn is_irreducible(p: u32, coeffs: &[u32]) -> bool {
    let n = coeffs.len() - 1;
    if n == 0 || coeffs[n] != 1 {
        return false;
    }
    for d in 1..=n / 2 {
        let count = (p as usize).pow(d as u32);
        for idx in 0..count {
            let mut g: Vec<u32> = (0..d).map(|i| ((idx / (p as usize).pow(i as u32)) % p as usize) as u32).collect();
            g.push(1);
            if poly_rem(coeffs, &g, p).iter().all(|&c| c == 0) {
                return false;
            }
        }
    }
    true
}

/// `x` generates the multiplicative group of `F_p[x] / f`.
pub fn is_primitive(p: u32, coeffs: &[u32]) -> bool {
    let n = coeffs.len() - 1;
    if !is_irreducible(p, coeffs) {
        return false;
    }
    let q = (p as u64).pow(n as u32);
    let mut cur = vec![1u32];
    for i in 1..q {
        let mut next = vec![0u32];
        next.extend(&cur);
        cur = poly_rem(&next, coeffs, p);
        while cur.len() > 1 && *cur.last().unwrap() == 0 {
            cur.pop();
        }
        if cur == [1] {
            return i == q - 1;
        }
    }
    false
}

/// Tabulated Conway polynomial if it verifies, else the first primitive
/// polynomial in lexicographic order of its lower coefficients.
pub fn field_polynomial(p: u32, n: u32) -> Result<Vec<u32>> {
    if !is_prime(p as u64) || n == 0 {
        return invalid(format!("need a prime p and n >= 1, got p = {p}, n = {n}"));
    }
    if n == 1 {
        let g = (1..p).find(|&g| is_primitive(p, &[(p - g) % p, 1])).unwrap();
        return Ok(vec![(p - g) % p, 1]);
    }
    if let Some(&(_, _, c)) = CONWAY.iter().find(|e| e.0 == p && e.1 == n) {
        if is_primitive(p, c) {
            return Ok(c.to_vec());
        }
    }
    let count = (p as u64).pow(n);
    for idx in 0..count {
        let mut c: Vec<u32> = (0..n).map(|i| ((idx / (p as u64).pow(i)) % p as u64) as u32).collect();
        c.push(1);
        if is_primitive(p, &c) {
            return Ok(c);
        }
    }
    invalid(format!("no primitive polynomial of degree {n} over F_{p}"))
}

/// `F_{p^n}` with elements indexed by their coefficient vectors in base `p`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FiniteField {
    pub p: u32,
    pub n: u32,
    pub q: usize,
    pub modulus: Vec<u32>,
    exp: Vec<u32>,
    log: Vec<u32>,
}

impl FiniteField {
    pub fn new(p: u32, n: u32) -> Result<Self> {
        let modulus = field_polynomial(p, n)?;
        let q = (p as usize).pow(n);
        if q > 1 << 20 {
            return invalid(format!("field of order {q} is too large"));
        }
        let mut exp = Vec::with_capacity(q - 1);
        let mut log = vec![u32::MAX; q];
        let mut cur = vec![1u32];
        for i in 0..q - 1 {
            let idx = Self::pack(p, &cur);
            exp.push(idx as u32);
            log[idx] = i as u32;
            let mut next = vec![0u32];
            next.extend(&cur);
            cur = poly_rem(&next, &modulus, p);
        }
        Ok(Self { p, n, q, modulus, exp, log })
    }

    fn pack(p: u32, c: &[u32]) -> usize {
        c.iter().rev().fold(0, |acc, &d| acc * p as usize + d as usize)
    }

    fn digits(&self, a: usize) -> Vec<u32> {
        let p = self.p as usize;
        (0..self.n).map(|i| ((a / p.pow(i)) % p) as u32).collect()
    }

    pub fn add(&self, a: usize, b: usize) -> usize {
        let p = self.p as usize;
        let (mut x, mut y, mut out, mut scale) = (a, b, 0, 1);
        for _ in 0..self.n {
            out += ((x % p + y % p) % p) * scale;
            x /= p;
            y /= p;
            scale *= p;
        }
        out
    }

    pub fn neg(&self, a: usize) -> usize {
        let p = self.p as usize;
        let (mut x, mut out, mut scale) = (a, 0, 1);
        for _ in 0..self.n {
            out += ((p - x % p) % p) * scale;
            x /= p;
            scale *= p;
        }
        out
    }

    pub fn mul(&self, a: usize, b: usize) -> usize {
        if a == 0 || b == 0 {
            return 0;
        }
        let e = (self.log[a] as usize + self.log[b] as usize) % (self.q - 1);
        self.exp[e] as usize
    }

    pub fn inv(&self, a: usize) -> Option<usize> {
        (a != 0).then(|| self.exp[(self.q - 1 - self.log[a] as usize) % (self.q - 1)] as usize)
    }

    pub fn pow(&self, a: usize, k: u64) -> usize {
        if a == 0 {
            return usize::from(k == 0);
        }
        self.exp[((self.log[a] as u64 * k) % (self.q as u64 - 1)) as usize] as usize
    }

    pub fn one(&self) -> usize {
        1
    }

    /// Multiplicative order of a nonzero element.
    pub fn order(&self, a: usize) -> usize {
        let m = self.q - 1;
        m / gcd(self.log[a] as usize, m)
    }

    /// Smallest-index generator of the multiplicative group.
    pub fn find_generator(&self) -> usize {
        (1..self.q).find(|&a| self.order(a) == self.q - 1).unwrap()
    }

    pub fn label(&self, a: usize) -> String {
        let d = self.digits(a);
        let terms: Vec<String> = d
            .iter()
            .enumerate()
            .filter(|(_, &c)| c != 0)
            .map(|(i, &c)| match (i, c) {
                (0, _) => c.to_string(),
                (1, 1) => "x".into(),
                (1, _) => format!("{c}x"),
                (_, 1) => format!("x^{i}"),
                _ => format!("{c}x^{i}"),
            })
            .collect();
        if terms.is_empty() {
            "0".into()
        } else {
            terms.join("+")
        }
    }
}

pub(crate) fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn table_entries_are_primitive() {
        for &(p, _, c) in CONWAY {
            assert!(is_irreducible(p, c), "{p} {c:?}");
            assert!(is_primitive(p, c), "{p} {c:?}");
        }
    }

    #[test]
    fn reducible_polynomial_is_detected() {
        // x^2 + 1 = (x + 2)(x + 3) over F_5
        assert!(!is_irreducible(5, &[1, 0, 1]));
        // x^2 + 1 is irreducible over F_3 but x has order 4, not 8
        assert!(is_irreducible(3, &[1, 0, 1]));
        assert!(!is_primitive(3, &[1, 0, 1]));
    }

    #[test]
    fn fallback_search_finds_primitive() {
        let c = field_polynomial(3, 5).unwrap();
        assert_eq!(c.len(), 6);
        assert!(is_primitive(3, &c));
    }

    #[test]
    fn prime_field_uses_least_primitive_root() {
        let f = FiniteField::new(7, 1).unwrap();
        assert_eq!(f.find_generator(), 3);
        assert_eq!(f.mul(3, 5), 1);
        assert_eq!(f.add(4, 5), 2);
    }

    #[test]
    fn field_axioms_on_f25() {
        let f = FiniteField::new(5, 2).unwrap();
        for a in 0..25 {
            assert_eq!(f.add(a, f.neg(a)), 0);
            if a != 0 {
                assert_eq!(f.mul(a, f.inv(a).unwrap()), 1);
            }
            for b in 0..25 {
                assert_eq!(f.mul(a, b), f.mul(b, a));
                for c in [0, 1, 7, 24] {
                    assert_eq!(f.mul(a, f.add(b, c)), f.add(f.mul(a, b), f.mul(a, c)));
                }
            }
        }
        assert_eq!(f.order(f.find_generator()), 24);
        assert_eq!(f.label(5), "x");
        assert_eq!(f.label(7), "2+x");
    }
}
