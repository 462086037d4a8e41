use nalgebra::DMatrix;

/// Compressed sparse row matrix, square.
#[derive(Clone, Debug, PartialEq)]
pub struct CsrMatrix {
    n: usize,
    indptr: Vec<usize>,
    indices: Vec<usize>,
    data: Vec<f64>,
}

/// Accumulates symmetric contributions so that mirrored entries receive
/// identical summation sequences.
#[derive(Clone, Debug, Default)]
pub struct SymmetricAssembler {
    n: usize,
    triplets: Vec<(usize, usize, f64)>,
}

impl SymmetricAssembler {
    pub fn new(n: usize) -> Self {
        Self { n, triplets: Vec::new() }
    }

    /// Adds `w (x_i - x_j)^2` to the quadratic form.
    pub fn add_edge(&mut self, i: usize, j: usize, w: f64) {
        debug_assert!(i != j);
        self.triplets.push((i, i, w));
        self.triplets.push((j, j, w));
        self.triplets.push((i, j, -w));
        self.triplets.push((j, i, -w));
    }

    /// Adds `w x_i^2` to the quadratic form.
    pub fn add_diagonal(&mut self, i: usize, w: f64) {
        self.triplets.push((i, i, w));
    }

    pub fn finish(self) -> CsrMatrix {
        CsrMatrix::from_triplets(self.n, self.triplets)
    }
}

impl CsrMatrix {
    /// Builds from triplets; duplicates are summed in insertion order.
    pub fn from_triplets(n: usize, mut trips: Vec<(usize, usize, f64)>) -> Self {
        trips.sort_by_key(|&(i, j, _)| (i, j));
        let mut indptr = vec![0usize; n + 1];
        let mut indices = Vec::with_capacity(trips.len());
        let mut data: Vec<f64> = Vec::with_capacity(trips.len());
        let mut last: Option<(usize, usize)> = None;
        for (i, j, v) in trips {
            assert!(i < n && j < n, "triplet ({i},{j}) out of range {n}");
            if last == Some((i, j)) {
                *data.last_mut().unwrap() += v;
            } else {
                indices.push(j);
                data.push(v);
                indptr[i + 1] += 1;
                last = Some((i, j));
            }
        }
        for i in 0..n {
            indptr[i + 1] += indptr[i];
        }
        Self { n, indptr, indices, data }
    }

    pub fn zeros(n: usize) -> Self {
        Self { n, indptr: vec![0; n + 1], indices: Vec::new(), data: Vec::new() }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.data.len()
    }

    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let r = self.indptr[i]..self.indptr[i + 1];
        self.indices[r.clone()].iter().copied().zip(self.data[r].iter().copied())
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let r = self.indptr[i]..self.indptr[i + 1];
        match self.indices[r.clone()].binary_search(&j) {
            Ok(k) => self.data[r.start + k],
            Err(_) => 0.0,
        }
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.get(i, i)).collect()
    }

    /// Iterates over all stored entries as `(row, col, value)`.
    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.n).flat_map(move |i| self.row(i).map(move |(j, v)| (i, j, v)))
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.n];
        self.mul_vec_into(x, &mut y);
        y
    }

    pub fn mul_vec_into(&self, x: &[f64], y: &mut [f64]) {
        for (i, yi) in y.iter_mut().enumerate() {
            *yi = self.row(i).map(|(j, v)| v * x[j]).sum();
        }
    }

    pub fn quad_form(&self, x: &[f64]) -> f64 {
        (0..self.n).map(|i| x[i] * self.row(i).map(|(j, v)| v * x[j]).sum::<f64>()).sum()
    }

    /// Bitwise symmetry check.
    pub fn is_exactly_symmetric(&self) -> bool {
        self.entries().all(|(i, j, v)| self.get(j, i).to_bits() == v.to_bits())
    }

    /// Principal submatrix on the listed (ascending) indices.
    pub fn principal(&self, keep: &[usize]) -> CsrMatrix {
        let mut map = vec![usize::MAX; self.n];
        for (new, &old) in keep.iter().enumerate() {
            map[old] = new;
        }
        let mut indptr = Vec::with_capacity(keep.len() + 1);
        indptr.push(0);
        let mut indices = Vec::new();
        let mut data = Vec::new();
        for &old in keep {
            for (j, v) in self.row(old) {
                if map[j] != usize::MAX {
                    indices.push(map[j]);
                    data.push(v);
                }
            }
            indptr.push(indices.len());
        }
        // `keep` ascending keeps column order sorted
        Self { n: keep.len(), indptr, indices, data }
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.n, self.n);
        for (i, j, v) in self.entries() {
            m[(i, j)] += v;
        }
        m
    }

    /// Undirected adjacency (nonzero off-diagonal pattern).
    pub fn adjacency(&self) -> Vec<Vec<usize>> {
        (0..self.n)
            .map(|i| self.row(i).filter(|&(j, v)| j != i && v != 0.0).map(|(j, _)| j).collect())
            .collect()
    }

    /// Connected components of the off-diagonal pattern; returns a label per row.
    pub fn components(&self) -> (usize, Vec<usize>) {
        let adj = self.adjacency();
        let mut label = vec![usize::MAX; self.n];
        let mut count = 0;
        let mut stack = Vec::new();
        for s in 0..self.n {
            if label[s] != usize::MAX {
                continue;
            }
            label[s] = count;
            stack.push(s);
            while let Some(v) = stack.pop() {
                for &w in &adj[v] {
                    if label[w] == usize::MAX {
                        label[w] = count;
                        stack.push(w);
                    }
                }
            }
            count += 1;
        }
        (count, label)
    }

    /// Writes "i j value" lines, one stored entry per line.
    pub fn write_coo<W: std::io::Write>(&self, mut w: W) -> std::io::Result<()> {
        for (i, j, v) in self.entries() {
            writeln!(w, "{i} {j} {v:e}")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn duplicates_sum_and_symmetry_is_bitwise() {
        let mut a = SymmetricAssembler::new(3);
        a.add_edge(0, 1, 0.1);
        a.add_edge(1, 0, 0.2);
        a.add_edge(1, 2, 1.0 / 3.0);
        a.add_diagonal(2, 0.5);
        let m = a.finish();
        assert!(m.is_exactly_symmetric());
        assert_eq!(m.get(0, 1), -0.1 - 0.2);
        assert_eq!(m.get(0, 2), 0.0);
        let x = [1.0, 1.0, 1.0];
        assert!((m.quad_form(&x) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn principal_and_components() {
        let mut a = SymmetricAssembler::new(4);
        a.add_edge(0, 1, 1.0);
        a.add_edge(2, 3, 1.0);
        let m = a.finish();
        assert_eq!(m.components().0, 2);
        let p = m.principal(&[1, 2, 3]);
        assert_eq!(p.dim(), 3);
        assert_eq!(p.get(1, 2), -1.0);
        assert_eq!(p.get(0, 0), 1.0);
        assert_eq!(p.components().0, 2);
    }
}
