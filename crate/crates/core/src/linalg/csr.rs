use std::io::Write;

use super::Scalar;

/// Compressed sparse rows. Column indices are sorted within each row; for the
/// Hermitian matrices used here both triangles are stored.
#[derive(Clone, Debug, PartialEq)]
pub struct CsrMatrix<T> {
    n: usize,
    row_offsets: Vec<usize>,
    col_indices: Vec<usize>,
    values: Vec<T>,
}

impl<T: Scalar> CsrMatrix<T> {
    /// Build from per-row `(column, value)` lists. Duplicate columns in a row
    /// are summed after sorting the contributions by column.
    pub fn from_rows(n: usize, rows: Vec<Vec<(usize, T)>>) -> Self {
        assert_eq!(rows.len(), n);
        let mut row_offsets = Vec::with_capacity(n + 1);
        let mut col_indices = Vec::new();
        let mut values = Vec::new();
        row_offsets.push(0);
        for mut row in rows {
            row.sort_by_key(|&(c, _)| c);
            let mut iter = row.into_iter().peekable();
            while let Some((c, mut v)) = iter.next() {
                while let Some(&(c2, v2)) = iter.peek() {
                    if c2 != c {
                        break;
                    }
                    v += v2;
                    iter.next();
                }
                assert!(c < n, "column {c} out of range");
                col_indices.push(c);
                values.push(v);
            }
            row_offsets.push(col_indices.len());
        }
        Self { n, row_offsets, col_indices, values }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_rows(n, (0..n).map(|i| vec![(i, T::from_re(1.0))]).collect())
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row_offsets(&self) -> &[usize] {
        &self.row_offsets
    }

    pub fn col_indices(&self) -> &[usize] {
        &self.col_indices
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, T)> + '_ {
        let r = self.row_offsets[i]..self.row_offsets[i + 1];
        self.col_indices[r.clone()].iter().copied().zip(self.values[r].iter().copied())
    }

    pub fn get(&self, i: usize, j: usize) -> T {
        let r = self.row_offsets[i]..self.row_offsets[i + 1];
        match self.col_indices[r.clone()].binary_search(&j) {
            Ok(k) => self.values[r.start + k],
            Err(_) => T::zero(),
        }
    }

    pub fn diagonal(&self) -> Vec<T> {
        (0..self.n).map(|i| self.get(i, i)).collect()
    }

    pub fn matvec(&self, x: &[T]) -> Vec<T> {
        let mut y = vec![T::zero(); self.n];
        self.matvec_into(x, &mut y);
        y
    }

    pub fn matvec_into(&self, x: &[T], y: &mut [T]) {
        for (i, yi) in y.iter_mut().enumerate() {
            let mut s = T::zero();
            for k in self.row_offsets[i]..self.row_offsets[i + 1] {
                s += self.values[k] * x[self.col_indices[k]];
            }
            *yi = s;
        }
    }

    /// `max |A_ij − conj(A_ji)|` over stored entries.
    pub fn hermitian_defect(&self) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..self.n {
            for (j, v) in self.row(i) {
                worst = worst.max((v - self.get(j, i).conj()).abs_sqr().sqrt());
            }
        }
        worst
    }

    /// `(A + Aᴴ)/2`, assuming the sparsity pattern is symmetric.
    pub fn hermitian_part(&self) -> Self {
        let rows = (0..self.n)
            .map(|i| self.row(i).map(|(j, v)| (j, (v + self.get(j, i).conj()).scale(0.5))).collect())
            .collect();
        Self::from_rows(self.n, rows)
    }

    /// Largest absolute row sum, an upper bound on the spectral norm.
    pub fn inf_norm(&self) -> f64 {
        (0..self.n).map(|i| self.row(i).map(|(_, v)| v.abs_sqr().sqrt()).sum::<f64>()).fold(0.0, f64::max)
    }

    /// Gershgorin interval containing every eigenvalue of a Hermitian matrix.
    pub fn gershgorin_bounds(&self) -> (f64, f64) {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for i in 0..self.n {
            let mut radius = 0.0;
            let mut center = 0.0;
            for (j, v) in self.row(i) {
                if j == i {
                    center = v.re();
                } else {
                    radius += v.abs_sqr().sqrt();
                }
            }
            lo = lo.min(center - radius);
            hi = hi.max(center + radius);
        }
        (lo, hi)
    }

    /// `A − σI`
    pub fn shifted(&self, sigma: f64) -> Self {
        let rows = (0..self.n)
            .map(|i| {
                let mut r: Vec<(usize, T)> = self.row(i).collect();
                r.push((i, T::from_re(-sigma)));
                r
            })
            .collect();
        Self::from_rows(self.n, rows)
    }

    /// Sparse product `A·B`. Each output entry sums its contributions in sorted
    /// order of value, so the result does not depend on how rows are numbered.
    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.n, other.n);
        let mut rows = Vec::with_capacity(self.n);
        for i in 0..self.n {
            let mut terms: Vec<(usize, T)> = Vec::new();
            for (k, a) in self.row(i) {
                for (j, b) in other.row(k) {
                    terms.push((j, a * b));
                }
            }
            terms.sort_by(|x, y| {
                let (a, b) = (x.1.to_complex(), y.1.to_complex());
                x.0.cmp(&y.0).then(a.re.total_cmp(&b.re)).then(a.im.total_cmp(&b.im))
            });
            rows.push(terms);
        }
        Self::from_rows(self.n, rows)
    }

    /// Dense column-major copy.
    pub fn to_dense(&self) -> Vec<T> {
        let mut d = vec![T::zero(); self.n * self.n];
        for i in 0..self.n {
            for (j, v) in self.row(i) {
                d[i + j * self.n] = v;
            }
        }
        d
    }
}

impl CsrMatrix<f64> {
    /// Matrix Market coordinate output (`real symmetric`, lower triangle, 1-based).
    pub fn write_matrix_market<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "%%MatrixMarket matrix coordinate real symmetric")?;
        let lower: Vec<(usize, usize, f64)> =
            (0..self.n).flat_map(|i| self.row(i).filter(move |&(j, _)| j <= i).map(move |(j, v)| (i, j, v))).collect();
        writeln!(w, "{} {} {}", self.n, self.n, lower.len())?;
        for (i, j, v) in lower {
            writeln!(w, "{} {} {:e}", i + 1, j + 1, v)?;
        }
        Ok(())
    }

    /// `max |(PᵀAP)_ij − A_ij|` for the permutation `x ↦ x[perm]`, i.e. the
    /// defect of `A_{perm[i], perm[j]} = A_ij`.
    pub fn permutation_defect(&self, perm: &[usize]) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..self.n {
            let pi = perm[i];
            let mut mine: Vec<(usize, f64)> = self.row(i).map(|(j, v)| (perm[j], v)).collect();
            mine.sort_by_key(|e| e.0);
            let theirs: Vec<(usize, f64)> = self.row(pi).collect();
            let mut a = mine.iter().peekable();
            let mut b = theirs.iter().peekable();
            loop {
                match (a.peek(), b.peek()) {
                    (None, None) => break,
                    (Some(&&(ca, va)), Some(&&(cb, vb))) if ca == cb => {
                        worst = worst.max((va - vb).abs());
                        a.next();
                        b.next();
                    }
                    (Some(&&(ca, va)), Some(&&(cb, _))) if ca < cb => {
                        worst = worst.max(va.abs());
                        a.next();
                    }
                    (Some(_), Some(&&(_, vb))) => {
                        worst = worst.max(vb.abs());
                        b.next();
                    }
                    (Some(&&(_, va)), None) => {
                        worst = worst.max(va.abs());
                        a.next();
                    }
                    (None, Some(&&(_, vb))) => {
                        worst = worst.max(vb.abs());
                        b.next();
                    }
                }
            }
        }
        worst
    }
}
