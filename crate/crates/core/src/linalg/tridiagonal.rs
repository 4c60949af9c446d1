//! Implicit QL iteration for symmetric tridiagonal matrices (the classic
//! `tql2` scheme), accumulating the rotations into a chosen set of rows of
//! the eigenvector matrix.

use crate::error::{Error, Result};

/// Which rows of the eigenvector matrix to accumulate.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Rows {
    /// Only the last row: enough for Lanczos residual estimates.
    Last,
    All,
}

/// Eigenvalues (ascending) and the requested rows of the orthogonal
/// eigenvector matrix: `rows[r][i]` is component `r` of eigenvector `i`.
#[derive(Clone, Debug)]
pub struct TridiagonalEigen {
    pub values: Vec<f64>,
    pub rows: Vec<Vec<f64>>,
}

/// `diag` has length n, `off` length n − 1 (`off[i]` couples i and i + 1).
pub fn tridiagonal_eigen(diag: &[f64], off: &[f64], rows: Rows) -> Result<TridiagonalEigen> {
    let n = diag.len();
    assert!(n == 0 || off.len() + 1 == n);
    if n == 0 {
        return Ok(TridiagonalEigen { values: Vec::new(), rows: Vec::new() });
    }
    let mut d = diag.to_vec();
    let mut e = off.to_vec();
    e.push(0.0);
    let tracked: Vec<usize> = match rows {
        Rows::Last => vec![n - 1],
        Rows::All => (0..n).collect(),
    };
    let mut z: Vec<Vec<f64>> = tracked
        .iter()
        .map(|&r| {
            let mut row = vec![0.0; n];
            row[r] = 1.0;
            row
        })
        .collect();

    let eps = f64::EPSILON;
    let mut f = 0.0;
    let mut tst1 = 0.0f64;
    for l in 0..n {
        tst1 = tst1.max(d[l].abs() + e[l].abs());
        let mut m = l;
        while m < n {
            if e[m].abs() <= eps * tst1 {
                break;
            }
            m += 1;
        }
        if m > l {
            let mut iter = 0;
            loop {
                iter += 1;
                if iter > 100 {
                    return Err(Error::ConvergenceFailure("tridiagonal QL did not converge".into()));
                }
                let mut g = d[l];
                let mut p = (d[l + 1] - g) / (2.0 * e[l]);
                let mut r = p.hypot(1.0);
                if p < 0.0 {
                    r = -r;
                }
                d[l] = e[l] / (p + r);
                d[l + 1] = e[l] * (p + r);
                let dl1 = d[l + 1];
                let mut h = g - d[l];
                for di in d.iter_mut().skip(l + 2) {
                    *di -= h;
                }
                f += h;

                p = d[m];
                let mut c = 1.0;
                let mut c2 = c;
                let mut c3 = c;
                let el1 = e[l + 1];
                let mut s = 0.0;
                let mut s2 = 0.0;
                for i in (l..m).rev() {
                    c3 = c2;
                    c2 = c;
                    s2 = s;
                    g = c * e[i];
                    h = c * p;
                    r = p.hypot(e[i]);
                    e[i + 1] = s * r;
                    s = e[i] / r;
                    c = p / r;
                    p = c * d[i] - s * g;
                    d[i + 1] = h + s * (c * g + s * d[i]);
                    for row in z.iter_mut() {
                        let hk = row[i + 1];
                        row[i + 1] = s * row[i] + c * hk;
                        row[i] = c * row[i] - s * hk;
                    }
                }
                p = -s * s2 * c3 * el1 * e[l] / dl1;
                e[l] = s * p;
                d[l] = c * p;
                if e[l].abs() <= eps * tst1 {
                    break;
                }
            }
        }
        d[l] += f;
        e[l] = 0.0;
    }

    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&a, &b| d[a].total_cmp(&d[b]));
    let values = idx.iter().map(|&i| d[i]).collect();
    let rows = z.into_iter().map(|row| idx.iter().map(|&i| row[i]).collect()).collect();
    Ok(TridiagonalEigen { values, rows })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn path_graph_spectrum() {
        let n = 40;
        let diag = vec![2.0; n];
        let off = vec![-1.0; n - 1];
        let eig = tridiagonal_eigen(&diag, &off, Rows::All).unwrap();
        for (k, v) in eig.values.iter().enumerate() {
            let exact = 2.0 - 2.0 * ((k + 1) as f64 * std::f64::consts::PI / (n as f64 + 1.0)).cos();
            assert!((v - exact).abs() < 1e-12);
        }
        // T z = λ z for every column
        for i in 0..n {
            for r in 0..n {
                let mut tz = diag[r] * eig.rows[r][i];
                if r > 0 {
                    tz += off[r - 1] * eig.rows[r - 1][i];
                }
                if r + 1 < n {
                    tz += off[r] * eig.rows[r + 1][i];
                }
                assert!((tz - eig.values[i] * eig.rows[r][i]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn last_row_matches_full() {
        let diag = [1.0, 5.0, -2.0, 3.5, 0.25];
        let off = [0.3, -1.2, 2.0, 0.7];
        let full = tridiagonal_eigen(&diag, &off, Rows::All).unwrap();
        let last = tridiagonal_eigen(&diag, &off, Rows::Last).unwrap();
        assert_eq!(full.values, last.values);
        for (a, b) in full.rows[4].iter().zip(&last.rows[0]) {
            assert!((a - b).abs() < 1e-14);
        }
    }
}
