//! Numerical kernels shared by the operator and solver modules: a scalar
//! abstraction over `f64`/`Complex64`, CSR storage, an envelope LDLᴴ
//! factorization, and the eigensolvers built on them.

pub mod csr;
pub mod dense;
pub mod lanczos;
pub mod skyline;
pub mod tridiagonal;

use std::fmt::Debug;
use std::iter::Sum;
use std::ops::{Add, AddAssign, Mul, MulAssign, Neg, Sub, SubAssign};

use num_complex::Complex64;
use rand::Rng;

pub use csr::CsrMatrix;

/// Field of matrix entries: real for groups with real characters, complex otherwise.
pub trait Scalar:
    Copy
    + Send
    + Sync
    + Debug
    + PartialEq
    + Default
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Neg<Output = Self>
    + AddAssign
    + SubAssign
    + MulAssign
    + Sum
    + 'static
{
    const IS_COMPLEX: bool;

    fn zero() -> Self {
        Self::default()
    }
    fn from_re(x: f64) -> Self;
    /// `None` when the value has a nonzero imaginary part and `Self` is real.
    fn from_complex(z: Complex64) -> Option<Self>;
    fn to_complex(self) -> Complex64;
    fn conj(self) -> Self;
    fn re(self) -> f64;
    fn abs_sqr(self) -> f64;
    fn scale(self, s: f64) -> Self;
    fn random<R: Rng>(rng: &mut R) -> Self;
}

impl Scalar for f64 {
    const IS_COMPLEX: bool = false;

    fn from_re(x: f64) -> Self {
        x
    }
    fn from_complex(z: Complex64) -> Option<Self> {
        (z.im == 0.0).then_some(z.re)
    }
    fn to_complex(self) -> Complex64 {
        Complex64::new(self, 0.0)
    }
    fn conj(self) -> Self {
        self
    }
    fn re(self) -> f64 {
        self
    }
    fn abs_sqr(self) -> f64 {
        self * self
    }
    fn scale(self, s: f64) -> Self {
        self * s
    }
    fn random<R: Rng>(rng: &mut R) -> Self {
        rng.random::<f64>() - 0.5
    }
}

impl Scalar for Complex64 {
    const IS_COMPLEX: bool = true;

    fn from_re(x: f64) -> Self {
        Complex64::new(x, 0.0)
    }
    fn from_complex(z: Complex64) -> Option<Self> {
        Some(z)
    }
    fn to_complex(self) -> Complex64 {
        self
    }
    fn conj(self) -> Self {
        Complex64::conj(&self)
    }
    fn re(self) -> f64 {
        self.re
    }
    fn abs_sqr(self) -> f64 {
        self.norm_sqr()
    }
    fn scale(self, s: f64) -> Self {
        self * s
    }
    fn random<R: Rng>(rng: &mut R) -> Self {
        Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)
    }
}

/// `Σ conj(a_i) b_i`
pub fn dot<T: Scalar>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).map(|(x, y)| x.conj() * *y).sum()
}

pub fn norm<T: Scalar>(a: &[T]) -> f64 {
    a.iter().map(|x| x.abs_sqr()).sum::<f64>().sqrt()
}

/// `y += alpha * x`
pub fn axpy<T: Scalar>(alpha: T, x: &[T], y: &mut [T]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * *xi;
    }
}

pub fn scale_in_place<T: Scalar>(s: f64, x: &mut [T]) {
    for xi in x.iter_mut() {
        *xi = xi.scale(s);
    }
}

/// Orthogonalize `v` against an orthonormal set, twice (classical Gram–Schmidt
/// with reorthogonalization).
pub fn orthogonalize<T: Scalar>(v: &mut [T], basis: &[Vec<T>]) {
    for _ in 0..2 {
        for b in basis {
            let c = dot(b, v);
            axpy(-c, b, v);
        }
    }
}
