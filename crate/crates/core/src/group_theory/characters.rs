use super::field::is_prime;
use super::group::FiniteGroup;
use crate::error::{invalid, Error, Result};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConjugacyClass {
    pub representative: usize,
    pub size: usize,
    pub element_order: usize,
    pub elements: Vec<usize>,
}

/// Irreducible characters as rows over the conjugacy classes.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CharacterTable {
    pub group_order: usize,
    pub classes: Vec<ConjugacyClass>,
    /// `values[i][k]` is character `i` on class `k`.
    pub values: Vec<Vec<Complex64>>,
    pub dimensions: Vec<usize>,
    /// `multiplicities[i][k][l]`: eigenvalue `exp(2 pi i l / e)` multiplicity of a representative of class `k`.
    pub multiplicities: Vec<Vec<Vec<usize>>>,
    pub exponent: usize,
    pub prime: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TableCheck {
    pub sum_of_squares: usize,
    pub orthogonality_defect: f64,
    pub column_defect: f64,
}

fn pow_mod(mut b: u64, mut e: u64, p: u64) -> u64 {
    let mut r = 1;
    b %= p;
    while e > 0 {
        if e & 1 == 1 {
            r = r * b % p;
        }
        b = b * b % p;
        e >>= 1;
    }
    r
}

fn inv_mod(a: u64, p: u64) -> u64 {
    pow_mod(a, p - 2, p)
}

/// Row-reduces `m` in place; returns pivot columns.
fn rref(m: &mut [Vec<u64>], p: u64) -> Vec<usize> {
    let rows = m.len();
    let cols = if rows == 0 { 0 } else { m[0].len() };
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        let Some(piv) = (r..rows).find(|&i| m[i][c] != 0) else { continue };
        m.swap(r, piv);
        let inv = inv_mod(m[r][c], p);
        m[r].iter_mut().for_each(|x| *x = *x * inv % p);
        for i in 0..rows {
            if i != r && m[i][c] != 0 {
                let f = m[i][c];
                for j in 0..cols {
                    m[i][j] = (m[i][j] + p - f * m[r][j] % p) % p;
                }
            }
        }
        pivots.push(c);
        r += 1;
        if r == rows {
            break;
        }
    }
    pivots
}

/// Basis of the null space of `m` (rows x cols).
fn null_space(m: &[Vec<u64>], p: u64) -> Vec<Vec<u64>> {
    let mut a = m.to_vec();
    let cols = m[0].len();
    let pivots = rref(&mut a, p);
    (0..cols)
        .filter(|c| !pivots.contains(c))
        .map(|free| {
            let mut v = vec![0u64; cols];
            v[free] = 1;
            for (r, &pc) in pivots.iter().enumerate() {
                v[pc] = (p - a[r][free]) % p;
            }
            v
        })
        .collect()
}

/// Characteristic polynomial coefficients (low to high) by Faddeev-LeVerrier.
fn char_poly(b: &[Vec<u64>], p: u64) -> Vec<u64> {
    let n = b.len();
    let mut c = vec![0u64; n + 1];
    c[n] = 1;
    let mut m = vec![vec![0u64; n]; n];
    for k in 1..=n {
        // M_k = B M_{k-1} + c_{n-k+1} I
        let mut next = vec![vec![0u64; n]; n];
        for i in 0..n {
            for l in 0..n {
                if b[i][l] == 0 {
                    continue;
                }
                for j in 0..n {
                    next[i][j] = (next[i][j] + b[i][l] * m[l][j]) % p;
                }
            }
            next[i][i] = (next[i][i] + c[n - k + 1]) % p;
        }
        m = next;
        let mut tr = 0;
        for i in 0..n {
            for l in 0..n {
                tr = (tr + b[i][l] * m[l][i]) % p;
            }
        }
        c[n - k] = (p - tr * inv_mod(k as u64, p) % p) % p;
    }
    c
}

/// Matrix `A_coef = sum_j coef_j A_j` of the class algebra, where
/// `(A_j)_{k,l}` counts `x` in class `j` with `x^-1 z_l` in class `k`.
fn class_matrix(g: &FiniteGroup, class_of: &[usize], reps: &[usize], coef: &[u64], p: u64) -> Vec<Vec<u64>> {
    let r = reps.len();
    let mut a = vec![vec![0u64; r]; r];
    for (l, &z) in reps.iter().enumerate() {
        for x in 0..g.order {
            let k = class_of[g.op(g.inv(x), z)];
            a[k][l] = (a[k][l] + coef[class_of[x]]) % p;
        }
    }
    a
}

fn mat_vec(a: &[Vec<u64>], v: &[u64], p: u64) -> Vec<u64> {
    a.iter().map(|row| row.iter().zip(v).fold(0, |s, (x, y)| (s + x * y) % p)).collect()
}

/// Splits `space` (column basis) into eigenspaces of `a` restricted to it.
fn split(a: &[Vec<u64>], space: &[Vec<u64>], p: u64) -> Option<Vec<Vec<Vec<u64>>>> {
    let d = space.len();
    let r = space[0].len();
    // left inverse through pivot rows of the basis
    let rows = rref(&mut space.to_vec(), p);
    let t: Vec<Vec<u64>> = rows.iter().map(|&i| space.iter().map(|v| v[i]).collect()).collect();
    // solve W_R B = (A W)_R
    let aw: Vec<Vec<u64>> = space.iter().map(|v| mat_vec(a, v, p)).collect();
    let mut sys: Vec<Vec<u64>> = (0..d)
        .map(|i| {
            let mut row = t[i].clone();
            row.extend(aw.iter().map(|w| w[rows[i]]));
            row
        })
        .collect();
    rref(&mut sys, p);
    let b: Vec<Vec<u64>> = (0..d).map(|i| sys[i][d..].to_vec()).collect();
    let poly = char_poly(&b, p);
    let mut parts = Vec::new();
    let mut total = 0;
    for lambda in 0..p {
        let val = poly.iter().rev().fold(0, |s, &c| (s * lambda + c) % p);
        if val != 0 {
            continue;
        }
        let shifted: Vec<Vec<u64>> =
            (0..d).map(|i| (0..d).map(|j| (b[i][j] + if i == j { p - lambda } else { 0 }) % p).collect()).collect();
        let ns = null_space(&shifted, p);
        total += ns.len();
        let vecs: Vec<Vec<u64>> = ns
            .iter()
            .map(|c| (0..r).map(|i| space.iter().zip(c).fold(0, |s, (v, &x)| (s + v[i] * x) % p)).collect())
            .collect();
        parts.push(vecs);
    }
    (total == d).then_some(parts)
}

fn choose_prime(exponent: usize, order: usize) -> u64 {
    let bound = 2.0 * (order as f64).sqrt();
    let e = exponent as u64;
    (1..).map(|k| k * e + 1).find(|&p| p as f64 > bound && is_prime(p)).unwrap()
}

/// Character table by Dixon's method: common eigenvectors of the class
/// algebra over `F_p`, lifted to complex values through eigenvalue multiplicities.
pub fn character_table(g: &FiniteGroup, seed: u64) -> Result<CharacterTable> {
    if g.order > 2000 {
        return invalid(format!("group order {} exceeds 2000", g.order));
    }
    let class_sets = g.conjugacy_classes();
    let r = class_sets.len();
    let mut class_of = vec![0usize; g.order];
    for (k, c) in class_sets.iter().enumerate() {
        c.iter().for_each(|&x| class_of[x] = k);
    }
    let reps: Vec<usize> = class_sets.iter().map(|c| c[0]).collect();
    let sizes: Vec<u64> = class_sets.iter().map(|c| c.len() as u64).collect();
    let e = g.exponent();
    let p = choose_prime(e, g.order);
    let id_class = class_of[g.identity];

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pending: Vec<Vec<Vec<u64>>> = vec![(0..r).map(|i| (0..r).map(|j| u64::from(i == j)).collect()).collect()];
    let mut done: Vec<Vec<u64>> = Vec::new();
    let mut sweep = 0usize;
    while let Some(space) = pending.pop() {
        if space.len() == 1 {
            done.push(space[0].clone());
            continue;
        }
        // a random combination first, then single class matrices in turn
        let coef: Vec<u64> = if sweep < 4 {
            (0..r).map(|_| rng.gen_range(0..p)).collect()
        } else {
            (0..r).map(|j| u64::from(j == (sweep - 4) % r)).collect()
        };
        sweep += 1;
        if sweep > 4 + 2 * r + 8 {
            return Err(Error::Inconclusive("class algebra did not split into one-dimensional eigenspaces".into()));
        }
        let a = class_matrix(g, &class_of, &reps, &coef, p);
        match split(&a, &space, p) {
            Some(parts) if parts.len() > 1 => pending.extend(parts),
            _ => pending.push(space),
        }
    }
    if done.len() != r {
        return Err(Error::Inconclusive(format!("found {} characters for {r} classes", done.len())));
    }

    let class_inv: Vec<usize> = reps.iter().map(|&x| class_of[g.inv(x)]).collect();
    let power: Vec<Vec<usize>> = reps.iter().map(|&x| (0..e).map(|j| class_of[g.pow(x, j)]).collect()).collect();
    let gen = (2..p).find(|&c| (1..p - 1).filter(|d| (p - 1) % d == 0).all(|d| pow_mod(c, d, p) != 1)).unwrap();
    let z = pow_mod(gen, (p - 1) / e as u64, p);
    let zeta: Vec<Complex64> = (0..e).map(|l| Complex64::from_polar(1.0, 2.0 * PI * l as f64 / e as f64)).collect();
    let order_mod = g.order as u64 % p;
    let inv_e = inv_mod(e as u64 % p, p);

    let mut chars: Vec<(usize, Vec<Vec<usize>>, Vec<Complex64>)> = Vec::with_capacity(r);
    for v in done {
        let scale = inv_mod(v[id_class], p);
        let w: Vec<u64> = v.iter().map(|x| x * scale % p).collect();
        let s = (0..r).fold(0, |acc, k| (acc + w[k] * w[class_inv[k]] % p * inv_mod(sizes[k] % p, p)) % p);
        if s == 0 {
            return Err(Error::Inconclusive("degenerate central character".into()));
        }
        let d2 = order_mod * inv_mod(s, p) % p;
        let bound = (g.order as f64).sqrt() as u64;
        let Some(d) = (1..=bound).find(|&d| d * d % p == d2) else {
            return Err(Error::Inconclusive("no integer degree matches the central character".into()));
        };
        let theta: Vec<u64> = (0..r).map(|k| d % p * w[k] % p * inv_mod(sizes[k] % p, p) % p).collect();
        let mut mult = Vec::with_capacity(r);
        let mut vals = Vec::with_capacity(r);
        for k in 0..r {
            let mu: Vec<usize> = (0..e)
                .map(|l| {
                    let sum = (0..e).fold(0, |acc, j| {
                        let zj = pow_mod(z, ((e - (j * l) % e) % e) as u64, p);
                        (acc + theta[power[k][j]] * zj) % p
                    });
                    (sum * inv_e % p) as usize
                })
                .collect();
            if mu.iter().sum::<usize>() != d as usize {
                return Err(Error::Inconclusive(format!("eigenvalue multiplicities on class {k} do not sum to the degree")));
            }
            vals.push(mu.iter().zip(&zeta).map(|(&m, z)| z * m as f64).sum());
            mult.push(mu);
        }
        chars.push((d as usize, mult, vals));
    }
    // trivial character first, then by degree and values
    chars.sort_by(|a, b| {
        a.0.cmp(&b.0).then_with(|| {
            let key = |c: &Vec<Complex64>| c.iter().flat_map(|z| [-z.re, z.im]).collect::<Vec<_>>();
            key(&a.2).partial_cmp(&key(&b.2)).unwrap_or(std::cmp::Ordering::Equal)
        })
    });
    let classes = class_sets
        .into_iter()
        .map(|els| ConjugacyClass { representative: els[0], size: els.len(), element_order: g.element_order(els[0]), elements: els })
        .collect();
    Ok(CharacterTable {
        group_order: g.order,
        classes,
        dimensions: chars.iter().map(|c| c.0).collect(),
        multiplicities: chars.iter().map(|c| c.1.clone()).collect(),
        values: chars.into_iter().map(|c| c.2).collect(),
        exponent: e,
        prime: p,
    })
}

impl CharacterTable {
    /// Degree identity and both orthogonality relations.
    pub fn check(&self) -> TableCheck {
        let n = self.group_order as f64;
        let r = self.classes.len();
        let mut row = 0.0f64;
        for i in 0..self.values.len() {
            for j in 0..self.values.len() {
                let ip: Complex64 =
                    (0..r).map(|k| self.values[i][k] * self.values[j][k].conj() * self.classes[k].size as f64).sum::<Complex64>() / n;
                row = row.max((ip - Complex64::from(f64::from(u8::from(i == j)))).norm());
            }
        }
        let mut col = 0.0f64;
        for k in 0..r {
            for l in 0..r {
                let ip: Complex64 = self.values.iter().map(|chi| chi[k] * chi[l].conj()).sum();
                let want = if k == l { n / self.classes[k].size as f64 } else { 0.0 };
                col = col.max((ip - want).norm() / n);
            }
        }
        TableCheck { sum_of_squares: self.dimensions.iter().map(|d| d * d).sum(), orthogonality_defect: row, column_defect: col }
    }

    /// Sum of character `i` over the elements of `subset`.
    pub fn sum_over(&self, i: usize, subset: &[usize]) -> Complex64 {
        let mut count = vec![0usize; self.classes.len()];
        for &x in subset {
            if let Some(k) = self.classes.iter().position(|c| c.elements.binary_search(&x).is_ok()) {
                count[k] += 1;
            }
        }
        count.iter().zip(&self.values[i]).map(|(&c, v)| v * c as f64).sum()
    }

    /// Restriction of character `i` to `subset` is a multiple of the trivial character.
    pub fn trivial_on(&self, i: usize, subset: &[usize]) -> bool {
        (self.sum_over(i, subset) - Complex64::from((subset.len() * self.dimensions[i]) as f64)).norm() < 1e-6
    }

    pub fn write_json<W: std::io::Write>(&self, w: W) -> Result<()> {
        serde_json::to_writer_pretty(w, self)?;
        Ok(())
    }
}

/// Smallest degree of an irreducible that is nontrivial on `h1`.
pub fn min_nontrivial_dim(table: &CharacterTable, h1: &[usize]) -> Result<usize> {
    (0..table.values.len())
        .filter(|&i| !table.trivial_on(i, h1))
        .map(|i| table.dimensions[i])
        .min()
        .ok_or_else(|| Error::Precondition("every irreducible is trivial on the subgroup (it is the identity subgroup)".into()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group_theory::gqm::{build_gqm, GqmSpec};

    fn assert_valid(t: &CharacterTable) {
        let c = t.check();
        assert_eq!(c.sum_of_squares, t.group_order);
        assert!(c.orthogonality_defect < 1e-8, "{c:?}");
        assert!(c.column_defect < 1e-8, "{c:?}");
        assert_eq!(t.values.len(), t.classes.len());
        assert!(t.values[0].iter().all(|v| (v - Complex64::from(1.0)).norm() < 1e-12));
    }

    #[test]
    fn cyclic_groups_have_linear_characters() {
        for n in [1, 5, 12] {
            let g = FiniteGroup::cyclic(n).unwrap();
            let t = character_table(&g, 1).unwrap();
            assert_valid(&t);
            assert!(t.dimensions.iter().all(|&d| d == 1));
            assert_eq!(t.values.len(), n);
        }
    }

    #[test]
    fn dihedral_degrees() {
        let t = character_table(&FiniteGroup::dihedral(5).unwrap(), 3).unwrap();
        assert_valid(&t);
        assert_eq!(t.dimensions, vec![1, 1, 2, 2]);
        // values are 2 cos(2 pi k / 5) on rotations
        let golden = (5f64.sqrt() - 1.0) / 2.0;
        assert!(t.values[2].iter().chain(&t.values[3]).any(|v| (v.re - golden).abs() < 1e-12));
    }

    #[test]
    fn g42_has_one_six_dimensional_irrep() {
        let g = build_gqm(GqmSpec::new(7, 1, 1).unwrap()).unwrap();
        let t = character_table(&g.group, 0).unwrap();
        assert_valid(&t);
        assert_eq!(t.dimensions, vec![1, 1, 1, 1, 1, 1, 6]);
        assert_eq!(min_nontrivial_dim(&t, &g.h1).unwrap(), 6);
        for i in 0..6 {
            assert!(t.trivial_on(i, &g.h1));
        }
    }

    #[test]
    fn g100_bound_is_four() {
        let g = build_gqm(GqmSpec::new(5, 2, 1).unwrap()).unwrap();
        let t = character_table(&g.group, 0).unwrap();
        assert_valid(&t);
        assert_eq!(t.dimensions.iter().filter(|&&d| d == 1).count(), 4);
        assert_eq!(t.dimensions.iter().filter(|&&d| d == 4).count(), 6);
        assert_eq!(min_nontrivial_dim(&t, &g.h1).unwrap(), 4);
    }

    #[test]
    fn seeds_give_the_same_table() {
        let g = build_gqm(GqmSpec::new(5, 2, 1).unwrap()).unwrap();
        let a = character_table(&g.group, 0).unwrap();
        let b = character_table(&g.group, 99).unwrap();
        assert_eq!(a.dimensions, b.dimensions);
        assert_eq!(a.multiplicities, b.multiplicities);
    }

    #[test]
    fn abelian_groups_have_unit_bound_and_trivial_subgroup_errors() {
        let g = FiniteGroup::cyclic(9).unwrap();
        let t = character_table(&g, 0).unwrap();
        assert_eq!(min_nontrivial_dim(&t, &g.closure(&[3])).unwrap(), 1);
        assert!(min_nontrivial_dim(&t, &[0]).is_err());
    }
}
