//! Dense Hermitian eigensolvers, delegated to `faer`.

use faer::{c64, Mat, Side};
use num_complex::Complex64;

use super::Scalar;
use crate::error::{Error, Result};

fn evd_failure(e: impl std::fmt::Debug) -> Error {
    Error::ConvergenceFailure(format!("dense eigensolver: {e:?}"))
}

fn check_len<T>(n: usize, a: &[T]) {
    assert_eq!(a.len(), n * n, "expected a column-major {n}x{n} matrix");
}

/// Ascending eigenvalues of the column-major Hermitian matrix `a`
/// (only the lower triangle is read).
pub fn hermitian_eigenvalues<T: Scalar>(n: usize, a: &[T]) -> Result<Vec<f64>> {
    check_len(n, a);
    if n == 0 {
        return Ok(Vec::new());
    }
    let mut values = if T::IS_COMPLEX {
        let m = Mat::<c64>::from_fn(n, n, |i, j| {
            let z = a[i + j * n].to_complex();
            c64::new(z.re, z.im)
        });
        m.self_adjoint_eigenvalues(Side::Lower).map_err(evd_failure)?
    } else {
        let m = Mat::<f64>::from_fn(n, n, |i, j| a[i + j * n].re());
        m.self_adjoint_eigenvalues(Side::Lower).map_err(evd_failure)?
    };
    values.sort_by(f64::total_cmp);
    Ok(values)
}

/// Ascending eigenvalues and orthonormal eigenvectors (`vectors[i]` belongs to `values[i]`).
pub fn hermitian_eigen<T: Scalar>(n: usize, a: &[T]) -> Result<(Vec<f64>, Vec<Vec<T>>)> {
    check_len(n, a);
    if n == 0 {
        return Ok((Vec::new(), Vec::new()));
    }
    let (values, vectors): (Vec<f64>, Vec<Vec<T>>) = if T::IS_COMPLEX {
        let m = Mat::<c64>::from_fn(n, n, |i, j| {
            let z = a[i + j * n].to_complex();
            c64::new(z.re, z.im)
        });
        let evd = m.self_adjoint_eigen(Side::Lower).map_err(evd_failure)?;
        let s = evd.S().column_vector();
        let u = evd.U();
        let values = (0..n).map(|i| s[i].re).collect();
        let vectors = (0..n)
            .map(|c| {
                (0..n)
                    .map(|r| {
                        let z = u[(r, c)];
                        T::from_complex(Complex64::new(z.re, z.im)).expect("complex scalar")
                    })
                    .collect()
            })
            .collect();
        (values, vectors)
    } else {
        let m = Mat::<f64>::from_fn(n, n, |i, j| a[i + j * n].re());
        let evd = m.self_adjoint_eigen(Side::Lower).map_err(evd_failure)?;
        let s = evd.S().column_vector();
        let u = evd.U();
        let values = (0..n).map(|i| s[i]).collect();
        let vectors = (0..n).map(|c| (0..n).map(|r| T::from_re(u[(r, c)])).collect()).collect();
        (values, vectors)
    };
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&i, &j| values[i].total_cmp(&values[j]));
    Ok((idx.iter().map(|&i| values[i]).collect(), idx.iter().map(|&i| vectors[i].clone()).collect()))
}
