//! Eigenvalues of a sparse positive definite Hermitian matrix below a cutoff.
//!
//! Lanczos with full reorthogonalization runs on `A⁻¹` (applied through the
//! skyline factorization), so the wanted eigenvalues are the largest and best
//! separated ones of the iteration operator. The number of eigenvalues below
//! the cutoff is known in advance from the inertia of `A − cutoff·I`; rounds
//! are restarted, deflating the converged vectors, until that many have been
//! locked. Repeated eigenvalues (common in symmetric problems) are found one
//! copy per round.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::skyline::{count_below, SkylineLdl};
use super::tridiagonal::{tridiagonal_eigen, Rows};
use super::{axpy, dot, norm, orthogonalize, scale_in_place, CsrMatrix, Scalar};
use crate::error::{Error, Result};

#[derive(Clone, Debug)]
pub struct LanczosOptions {
    /// Relative residual tolerance on the Ritz values of `A⁻¹`.
    pub tol: f64,
    /// Largest Krylov basis per round; 0 picks a size from the target count.
    pub max_basis: usize,
    pub max_rounds: usize,
    pub seed: u64,
}

impl Default for LanczosOptions {
    fn default() -> Self {
        Self { tol: 1e-11, max_basis: 0, max_rounds: 40, seed: 0x5eed }
    }
}

#[derive(Clone, Debug)]
pub struct PartialSpectrum {
    /// Ascending eigenvalues below the cutoff.
    pub values: Vec<f64>,
    /// Largest relative residual `‖Ax − λx‖ / λ` over the returned pairs.
    pub max_residual: f64,
    pub rounds: usize,
}

pub fn eigenvalues_below<T: Scalar>(a: &CsrMatrix<T>, cutoff: f64, opts: &LanczosOptions) -> Result<PartialSpectrum> {
    let n = a.dim();
    let target = count_below(a, cutoff)?;
    if target == 0 {
        return Ok(PartialSpectrum { values: Vec::new(), max_residual: 0.0, rounds: 0 });
    }
    let chol = SkylineLdl::factor(a)?;
    if chol.negative_pivots() > 0 {
        return Err(Error::ConvergenceFailure("matrix is not positive definite".into()));
    }
    let max_basis = if opts.max_basis > 0 { opts.max_basis } else { (2 * target + 60).max(120) }.min(n);
    let theta_cut = 1.0 / cutoff;
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);

    let mut locked: Vec<Vec<T>> = Vec::new();
    let mut values: Vec<f64> = Vec::new();
    let mut max_residual = 0.0f64;
    let mut rounds = 0;
    let mut idle_rounds = 0;

    while locked.len() < target {
        if rounds >= opts.max_rounds || idle_rounds >= 3 {
            return Err(Error::ConvergenceFailure(format!(
                "found {} of {} eigenvalues below {cutoff} after {rounds} rounds",
                locked.len(),
                target
            )));
        }
        rounds += 1;
        let mut q: Vec<T> = (0..n).map(|_| T::random(&mut rng)).collect();
        orthogonalize(&mut q, &locked);
        let qn = norm(&q);
        if qn == 0.0 {
            break;
        }
        scale_in_place(1.0 / qn, &mut q);

        let mut basis: Vec<Vec<T>> = vec![q];
        let mut alphas: Vec<f64> = Vec::new();
        let mut betas: Vec<f64> = Vec::new();
        let mut next_check = 10;
        let mut last_converged = usize::MAX;
        let mut last_converged_at = 0;
        let mut newly = 0;

        loop {
            let k = basis.len();
            let qk = &basis[k - 1];
            let mut w = chol.solve(qk);
            orthogonalize(&mut w, &locked);
            let alpha = dot(qk, &w).re();
            axpy(T::from_re(-alpha), qk, &mut w);
            if k > 1 {
                axpy(T::from_re(-betas[k - 2]), &basis[k - 2], &mut w);
            }
            orthogonalize(&mut w, &basis);
            orthogonalize(&mut w, &locked);
            let beta = norm(&w);
            alphas.push(alpha);

            let exhausted = k >= max_basis || k + locked.len() >= n || beta <= 1e-14 * alpha.abs().max(theta_cut);
            if k >= next_check || exhausted {
                let eig = tridiagonal_eigen(&alphas, &betas, Rows::Last)?;
                let mut converged = Vec::new();
                let mut pending = 0;
                for (i, &theta) in eig.values.iter().enumerate() {
                    if theta <= theta_cut {
                        continue;
                    }
                    if beta * eig.rows[0][i].abs() <= opts.tol * theta {
                        converged.push(i);
                    } else {
                        pending += 1;
                    }
                }
                if converged.len() != last_converged {
                    last_converged = converged.len();
                    last_converged_at = k;
                }
                let enough = converged.len() + locked.len() >= target;
                // Every visible wanted value has converged and nothing new has
                // appeared for a while: remaining copies need a fresh start.
                let stalled = pending == 0 && k - last_converged_at >= 20.max(k / 4);
                if enough || exhausted || stalled {
                    let full = tridiagonal_eigen(&alphas, &betas, Rows::All)?;
                    for &i in converged.iter().rev() {
                        let mut y = vec![T::zero(); n];
                        for (j, b) in basis.iter().enumerate() {
                            axpy(T::from_re(full.rows[j][i]), b, &mut y);
                        }
                        orthogonalize(&mut y, &locked);
                        let yn = norm(&y);
                        if yn < 0.5 {
                            continue;
                        }
                        scale_in_place(1.0 / yn, &mut y);
                        let ay = a.matvec(&y);
                        let lambda = dot(&y, &ay).re();
                        let mut r = ay;
                        axpy(T::from_re(-lambda), &y, &mut r);
                        if lambda >= cutoff {
                            continue;
                        }
                        max_residual = max_residual.max(norm(&r) / lambda.abs().max(f64::MIN_POSITIVE));
                        values.push(lambda);
                        locked.push(y);
                        newly += 1;
                        if locked.len() >= target {
                            break;
                        }
                    }
                    break;
                }
                next_check = k + 5.max(k / 8);
            }
            let mut next = w;
            scale_in_place(1.0 / beta, &mut next);
            betas.push(beta);
            basis.push(next);
        }
        if newly == 0 {
            idle_rounds += 1;
        } else {
            idle_rounds = 0;
        }
    }
    values.sort_by(f64::total_cmp);
    Ok(PartialSpectrum { values, max_residual, rounds })
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Dirichlet Laplacian on an m×m grid, scaled to unit spacing: eigenvalues
    /// `4 − 2cos(jπ/(m+1)) − 2cos(kπ/(m+1))`, many of them double.
    fn grid_laplacian(m: usize) -> CsrMatrix<f64> {
        let n = m * m;
        let rows = (0..n)
            .map(|p| {
                let (x, y) = (p % m, p / m);
                let mut r = vec![(p, 4.0)];
                if x > 0 {
                    r.push((p - 1, -1.0));
                }
                if x + 1 < m {
                    r.push((p + 1, -1.0));
                }
                if y > 0 {
                    r.push((p - m, -1.0));
                }
                if y + 1 < m {
                    r.push((p + m, -1.0));
                }
                r
            })
            .collect();
        CsrMatrix::from_rows(n, rows)
    }

    #[test]
    fn finds_every_copy_of_repeated_eigenvalues() {
        let m = 30;
        let a = grid_laplacian(m);
        let cutoff = 0.4;
        let s = |j: usize| 2.0 - 2.0 * (j as f64 * std::f64::consts::PI / (m as f64 + 1.0)).cos();
        let mut exact: Vec<f64> =
            (1..=m).flat_map(|j| (1..=m).map(move |k| s(j) + s(k))).filter(|&e| e < cutoff).collect();
        exact.sort_by(f64::total_cmp);
        let got = eigenvalues_below(&a, cutoff, &LanczosOptions::default()).unwrap();
        assert_eq!(got.values.len(), exact.len());
        for (g, e) in got.values.iter().zip(&exact) {
            assert!((g - e).abs() < 1e-9 * e, "{g} vs {e}");
        }
        assert!(got.max_residual < 1e-6);
    }

    #[test]
    fn nothing_below_the_bottom() {
        let a = grid_laplacian(10);
        let got = eigenvalues_below(&a, 0.01, &LanczosOptions::default()).unwrap();
        assert!(got.values.is_empty());
    }
}
