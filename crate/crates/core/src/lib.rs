//! Symmetry-reduced eigenvalue counting for elliptic operators on domains
//! with a finite group of lattice symmetries.

// `!(x > 0.0)` is used on purpose so that NaN is rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod error;
pub mod experiment;
pub mod group_rep;
pub mod isotypic_solver;
pub mod lattice_domain;
pub mod linalg;
pub mod mc;
pub mod operator_disc;
pub mod oracle;
pub mod weyl_volume;

pub use error::{Error, Result};
