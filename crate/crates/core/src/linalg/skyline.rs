use super::sparse::CsrMatrix;
use crate::error::{Error, Result};
use std::collections::VecDeque;

/// Reverse Cuthill-McKee ordering. Returns `perm` with `perm[new] = old`.
pub fn reverse_cuthill_mckee(a: &CsrMatrix) -> Vec<usize> {
    let n = a.dim();
    let adj = a.adjacency();
    let deg: Vec<usize> = adj.iter().map(Vec::len).collect();
    let mut visited = vec![false; n];
    let mut order = Vec::with_capacity(n);

    let bfs_levels = |start: usize, adj: &[Vec<usize>]| -> (usize, usize) {
        // returns (last node of deepest level with min degree, depth)
        let mut dist = vec![usize::MAX; n];
        dist[start] = 0;
        let mut q = VecDeque::from([start]);
        let mut far = start;
        while let Some(v) = q.pop_front() {
            if dist[v] > dist[far] || (dist[v] == dist[far] && deg[v] < deg[far]) {
                far = v;
            }
            for &w in &adj[v] {
                if dist[w] == usize::MAX {
                    dist[w] = dist[v] + 1;
                    q.push_back(w);
                }
            }
        }
        (far, dist[far])
    };

    let mut by_degree: Vec<usize> = (0..n).collect();
    by_degree.sort_by_key(|&v| (deg[v], v));
    for &seed in &by_degree {
        if visited[seed] {
            continue;
        }
        let mut start = seed;
        let mut depth = 0;
        for _ in 0..4 {
            let (far, d) = bfs_levels(start, &adj);
            if d <= depth {
                break;
            }
            start = far;
            depth = d;
        }
        visited[start] = true;
        let mut q = VecDeque::from([start]);
        while let Some(v) = q.pop_front() {
            order.push(v);
            let mut nb: Vec<usize> = adj[v].iter().copied().filter(|&w| !visited[w]).collect();
            nb.sort_by_key(|&w| (deg[w], w));
            for w in nb {
                visited[w] = true;
                q.push_back(w);
            }
        }
    }
    order.reverse();
    order
}

/// Envelope Cholesky factor `L L^T = P (A + diag(shift)) P^T`.
#[derive(Clone, Debug)]
pub struct EnvelopeCholesky {
    perm: Vec<usize>,
    first: Vec<usize>,
    start: Vec<usize>,
    data: Vec<f64>,
}

impl EnvelopeCholesky {
    /// Factors `a + diag(extra)` under an RCM ordering.
    pub fn factor(a: &CsrMatrix, extra: &[f64]) -> Result<Self> {
        let n = a.dim();
        let perm = reverse_cuthill_mckee(a);
        let mut iperm = vec![0; n];
        for (new, &old) in perm.iter().enumerate() {
            iperm[old] = new;
        }
        let mut first = vec![0; n];
        for (i, fi) in first.iter_mut().enumerate() {
            *fi = a.row(perm[i]).map(|(j, _)| iperm[j]).filter(|&j| j <= i).min().unwrap_or(i).min(i);
        }
        let mut start = vec![0; n + 1];
        for i in 0..n {
            start[i + 1] = start[i] + (i - first[i] + 1);
        }
        let mut data = vec![0.0; start[n]];
        for i in 0..n {
            for (j, v) in a.row(perm[i]) {
                let jn = iperm[j];
                if jn <= i {
                    data[start[i] + jn - first[i]] += v;
                }
            }
            data[start[i] + i - first[i]] += extra[perm[i]];
        }
        for i in 0..n {
            let fi = first[i];
            for j in fi..i {
                let fj = first[j];
                let k0 = fi.max(fj);
                let mut s = data[start[i] + j - fi];
                let ri = &data[start[i] + k0 - fi..start[i] + j - fi];
                let rj = &data[start[j] + k0 - fj..start[j] + j - fj];
                s -= ri.iter().zip(rj).map(|(x, y)| x * y).sum::<f64>();
                let djj = data[start[j] + j - fj];
                data[start[i] + j - fi] = s / djj;
            }
            let row = &data[start[i]..start[i] + i - fi];
            let d = data[start[i] + i - fi] - row.iter().map(|x| x * x).sum::<f64>();
            if !(d > 0.0) {
                return Err(Error::Precondition(format!(
                    "shifted operator is not positive definite (pivot {d:e} at row {i})"
                )));
            }
            data[start[i] + i - fi] = d.sqrt();
        }
        Ok(Self { perm, first, start, data })
    }

    pub fn envelope_size(&self) -> usize {
        self.data.len()
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.perm.len();
        let mut y: Vec<f64> = self.perm.iter().map(|&o| b[o]).collect();
        for i in 0..n {
            let fi = self.first[i];
            let row = &self.data[self.start[i]..self.start[i] + i - fi];
            let s: f64 = row.iter().zip(&y[fi..i]).map(|(l, v)| l * v).sum();
            y[i] = (y[i] - s) / self.data[self.start[i] + i - fi];
        }
        for i in (0..n).rev() {
            let fi = self.first[i];
            let xi = y[i] / self.data[self.start[i] + i - fi];
            y[i] = xi;
            let row = &self.data[self.start[i]..self.start[i] + i - fi];
            for (k, l) in row.iter().enumerate() {
                y[fi + k] -= l * xi;
            }
        }
        let mut x = vec![0.0; n];
        for (new, &old) in self.perm.iter().enumerate() {
            x[old] = y[new];
        }
        x
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::sparse::SymmetricAssembler;

    #[test]
    fn solves_shifted_path_laplacian() {
        let n = 30;
        let mut a = SymmetricAssembler::new(n);
        for i in 0..n - 1 {
            a.add_edge(i, (i * 7 + 3) % n, 1.0 + i as f64 * 0.01);
            a.add_edge(i, i + 1, 2.0);
        }
        let m = a.finish();
        let extra = vec![0.3; n];
        let f = EnvelopeCholesky::factor(&m, &extra).unwrap();
        let b: Vec<f64> = (0..n).map(|i| (i as f64).sin()).collect();
        let x = f.solve(&b);
        let mut r = m.mul_vec(&x);
        for i in 0..n {
            r[i] += 0.3 * x[i] - b[i];
        }
        assert!(r.iter().all(|v| v.abs() < 1e-12));
    }

    #[test]
    fn rejects_indefinite() {
        let mut a = SymmetricAssembler::new(3);
        a.add_edge(0, 1, 1.0);
        a.add_edge(1, 2, 1.0);
        let m = a.finish();
        assert!(EnvelopeCholesky::factor(&m, &[-0.5; 3]).is_err());
    }
}
