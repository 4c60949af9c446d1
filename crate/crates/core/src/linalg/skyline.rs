//! Envelope (skyline) LDLᴴ factorization of sparse Hermitian matrices after a
//! reverse Cuthill–McKee reordering.
//!
//! No pivoting is done. For positive definite matrices this is a stable
//! Cholesky variant; for shifted matrices `A − σI` the signs of `D` give the
//! inertia (Sylvester's law), which is how eigenvalues below `σ` are counted.

use std::collections::VecDeque;

use super::{CsrMatrix, Scalar};
use crate::error::{Error, Result};

/// Reverse Cuthill–McKee ordering; `order[new] = old`.
pub fn reverse_cuthill_mckee<T: Scalar>(a: &CsrMatrix<T>) -> Vec<usize> {
    let n = a.dim();
    let degree: Vec<usize> = (0..n).map(|i| a.row(i).filter(|&(j, _)| j != i).count()).collect();
    let mut visited = vec![false; n];
    let mut order = Vec::with_capacity(n);
    let mut by_degree: Vec<usize> = (0..n).collect();
    by_degree.sort_by_key(|&i| (degree[i], i));

    for &seed in &by_degree {
        if visited[seed] {
            continue;
        }
        let start = pseudo_peripheral(a, seed, &degree);
        visited[start] = true;
        let mut queue = VecDeque::from([start]);
        while let Some(v) = queue.pop_front() {
            order.push(v);
            let mut nbrs: Vec<usize> = a.row(v).map(|(j, _)| j).filter(|&j| !visited[j]).collect();
            nbrs.sort_by_key(|&j| (degree[j], j));
            for j in nbrs {
                visited[j] = true;
                queue.push_back(j);
            }
        }
    }
    order.reverse();
    order
}

/// BFS level structure from `root`: (eccentricity, last level).
fn levels<T: Scalar>(a: &CsrMatrix<T>, root: usize) -> (usize, Vec<usize>) {
    let mut depth = vec![usize::MAX; a.dim()];
    depth[root] = 0;
    let mut queue = VecDeque::from([root]);
    let mut last = vec![root];
    let mut ecc = 0;
    while let Some(v) = queue.pop_front() {
        for (j, _) in a.row(v) {
            if depth[j] == usize::MAX {
                depth[j] = depth[v] + 1;
                if depth[j] > ecc {
                    ecc = depth[j];
                    last.clear();
                }
                if depth[j] == ecc {
                    last.push(j);
                }
                queue.push_back(j);
            }
        }
    }
    (ecc, last)
}

fn pseudo_peripheral<T: Scalar>(a: &CsrMatrix<T>, seed: usize, degree: &[usize]) -> usize {
    let mut root = seed;
    let (mut ecc, mut last) = levels(a, root);
    for _ in 0..8 {
        let candidate = *last.iter().min_by_key(|&&j| (degree[j], j)).expect("nonempty level");
        let (e2, l2) = levels(a, candidate);
        if e2 <= ecc {
            break;
        }
        root = candidate;
        ecc = e2;
        last = l2;
    }
    root
}

/// `A = P L D Lᴴ Pᵀ` with unit lower-triangular `L` stored by rows over the envelope.
#[derive(Clone, Debug)]
pub struct SkylineLdl<T> {
    n: usize,
    /// `order[new] = old`
    order: Vec<usize>,
    /// first column of the envelope of row `i` (in the new numbering)
    first: Vec<usize>,
    /// start of row `i` inside `data`; row `i` holds columns `first[i]..i`
    start: Vec<usize>,
    data: Vec<T>,
    d: Vec<f64>,
}

impl<T: Scalar> SkylineLdl<T> {
    pub fn factor(a: &CsrMatrix<T>) -> Result<Self> {
        let n = a.dim();
        let order = reverse_cuthill_mckee(a);
        let mut inv = vec![0; n];
        for (new, &old) in order.iter().enumerate() {
            inv[old] = new;
        }

        let mut first = vec![0; n];
        for (i, &old) in order.iter().enumerate() {
            first[i] = a.row(old).map(|(j, _)| inv[j]).filter(|&j| j <= i).min().unwrap_or(i);
        }
        let mut start = Vec::with_capacity(n + 1);
        start.push(0);
        for i in 0..n {
            start.push(start[i] + (i - first[i]));
        }
        let mut data = vec![T::zero(); start[n]];
        let mut diag = vec![0.0; n];
        for (i, &old) in order.iter().enumerate() {
            for (j_old, v) in a.row(old) {
                let j = inv[j_old];
                if j < i {
                    data[start[i] + (j - first[i])] = v;
                } else if j == i {
                    diag[i] = v.re();
                }
            }
        }

        // Row-oriented LDLᴴ. After processing column j of row i, data holds
        // L_ij; `g` keeps L_ik·D_k for the current row.
        let mut d = vec![0.0; n];
        let mut g: Vec<T> = Vec::new();
        for i in 0..n {
            let fi = first[i];
            let row_len = i - fi;
            g.clear();
            g.resize(row_len, T::zero());
            for j in fi..i {
                let fj = first[j];
                let lo = fi.max(fj);
                // g_ij = A_ij − Σ_{k<j} g_ik conj(L_jk)
                let mut s = data[start[i] + (j - fi)];
                let gi = &g[(lo - fi)..(j - fi)];
                let lj = &data[start[j] + (lo - fj)..start[j] + (j - fj)];
                for (a, b) in gi.iter().zip(lj) {
                    s -= *a * b.conj();
                }
                g[j - fi] = s;
            }
            let mut di = diag[i];
            for j in fi..i {
                let gij = g[j - fi];
                let lij = gij.scale(1.0 / d[j]);
                data[start[i] + (j - fi)] = lij;
                di -= (gij * lij.conj()).re();
            }
            if di == 0.0 || !di.is_finite() {
                return Err(Error::SingularPivot(i));
            }
            d[i] = di;
        }
        Ok(Self { n, order, first, start, data, d })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// Number of stored off-diagonal entries (envelope size).
    pub fn envelope_size(&self) -> usize {
        self.data.len()
    }

    /// Number of negative pivots, which equals the number of negative eigenvalues.
    pub fn negative_pivots(&self) -> usize {
        self.d.iter().filter(|&&x| x < 0.0).count()
    }

    pub fn solve(&self, b: &[T]) -> Vec<T> {
        let n = self.n;
        let mut y: Vec<T> = self.order.iter().map(|&old| b[old]).collect();
        for i in 0..n {
            let fi = self.first[i];
            let row = &self.data[self.start[i]..self.start[i + 1]];
            let mut s = y[i];
            for (l, yk) in row.iter().zip(&y[fi..i]) {
                s -= *l * *yk;
            }
            y[i] = s;
        }
        for (yi, di) in y.iter_mut().zip(&self.d) {
            *yi = yi.scale(1.0 / di);
        }
        for i in (0..n).rev() {
            let fi = self.first[i];
            let yi = y[i];
            let row = &self.data[self.start[i]..self.start[i + 1]];
            for (k, l) in (fi..i).zip(row) {
                y[k] -= l.conj() * yi;
            }
        }
        let mut x = vec![T::zero(); n];
        for (new, &old) in self.order.iter().enumerate() {
            x[old] = y[new];
        }
        x
    }
}

/// Number of eigenvalues of Hermitian `a` strictly below `sigma`.
pub fn count_below<T: Scalar>(a: &CsrMatrix<T>, sigma: f64) -> Result<usize> {
    Ok(SkylineLdl::factor(&a.shifted(sigma))?.negative_pivots())
}
