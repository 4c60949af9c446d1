//! Finite-difference Dirichlet operators on an [`InteriorIndex`] and their
//! principal symbols.

use std::fs::File;
use std::io::BufWriter;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::group_rep::FiniteGroup;
use crate::lattice_domain::{norm_sq_sorted, Centering, DomainSpec, InteriorIndex};
use crate::linalg::CsrMatrix;

/// Real symmetric sparse matrix with both triangles stored.
pub type SparseSymmetric = CsrMatrix<f64>;

/// Radial coefficient fields `a(x)`; all are invariant under every orthogonal map.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "coefficient", rename_all = "snake_case")]
pub enum Coefficient {
    Constant {
        value: f64,
    },
    /// `1 + β|x|²`
    Quadratic {
        beta: f64,
    },
    /// `1 + β·exp(−|x|²/w²)`
    Bump {
        beta: f64,
        width: f64,
    },
}

impl Default for Coefficient {
    fn default() -> Self {
        Self::Constant { value: 1.0 }
    }
}

impl Coefficient {
    pub fn evaluate(&self, x: &[f64]) -> f64 {
        self.radial(norm_sq_sorted(x))
    }

    /// Value at `|x|² = r2`.
    pub fn radial(&self, r2: f64) -> f64 {
        match *self {
            Self::Constant { value } => value,
            Self::Quadratic { beta } => 1.0 + beta * r2,
            Self::Bump { beta, width } => 1.0 + beta * (-r2 / (width * width)).exp(),
        }
    }

    /// Minimum over `r_min ≤ |x| ≤ r_max`. Every catalog field is monotone in
    /// `|x|`, so the minimum sits at one of the two ends.
    pub fn min_on_shell(&self, r_min: f64, r_max: f64) -> f64 {
        self.radial(r_min * r_min).min(self.radial(r_max * r_max))
    }

    pub fn max_on_shell(&self, r_min: f64, r_max: f64) -> f64 {
        self.radial(r_min * r_min).max(self.radial(r_max * r_max))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OperatorKind {
    Laplacian,
    Bilaplacian,
    DivAGrad,
}

impl OperatorKind {
    /// Half the order: `m` in `2m`.
    pub fn m(self) -> u32 {
        match self {
            Self::Bilaplacian => 2,
            _ => 1,
        }
    }
}

impl std::str::FromStr for OperatorKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "laplacian" => Ok(Self::Laplacian),
            "bilaplacian" => Ok(Self::Bilaplacian),
            "div_a_grad" | "div-a-grad" => Ok(Self::DivAGrad),
            other => Err(Error::Config(format!("unknown operator kind {other:?}"))),
        }
    }
}

pub const DEFAULT_MAX_DIM: usize = 1 << 22;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct OperatorSpec {
    pub kind: OperatorKind,
    /// Used by `div_a_grad` only.
    #[serde(flatten)]
    pub coefficient: Coefficient,
    /// Largest grid size `assemble` accepts.
    pub max_dim: usize,
}

impl OperatorSpec {
    pub fn laplacian() -> Self {
        Self { kind: OperatorKind::Laplacian, coefficient: Coefficient::default(), max_dim: DEFAULT_MAX_DIM }
    }

    pub fn bilaplacian() -> Self {
        Self { kind: OperatorKind::Bilaplacian, ..Self::laplacian() }
    }

    pub fn div_a_grad(coefficient: Coefficient) -> Self {
        Self { kind: OperatorKind::DivAGrad, coefficient, max_dim: DEFAULT_MAX_DIM }
    }

    /// The field multiplying the gradient; 1 except for `div_a_grad`.
    pub fn effective_coefficient(&self) -> Coefficient {
        match self.kind {
            OperatorKind::DivAGrad => self.coefficient,
            _ => Coefficient::default(),
        }
    }

    pub fn principal_symbol(&self) -> PrincipalSymbol {
        PrincipalSymbol { kind: self.kind, coefficient: self.effective_coefficient() }
    }
}

/// 5-point (2D) / 7-point (3D) Laplacian, bilaplacian `L·L`, or the
/// edge-averaged `−div(a∇·)`, all with Dirichlet truncation.
pub fn assemble(spec: &OperatorSpec, interior: &InteriorIndex) -> Result<SparseSymmetric> {
    if interior.len() > spec.max_dim {
        return Err(Error::DimensionOverflow { dim: interior.len(), cap: spec.max_dim });
    }
    let coefficient = spec.effective_coefficient();
    let l = assemble_div_a_grad(interior, |x| coefficient.evaluate(x))?;
    Ok(match spec.kind {
        OperatorKind::Bilaplacian => l.matmul(&l),
        _ => l,
    })
}

/// `−div(a∇u)` with `a` averaged arithmetically at edge midpoints, for any
/// coefficient closure (including ones that break the symmetry).
///
/// Off-diagonal entries are `−(a(x_p) + a(x_q))/(2h²)`; the diagonal sums the
/// edge weights in increasing order so that it does not depend on the order in
/// which neighbours are visited.
pub fn assemble_div_a_grad<F>(interior: &InteriorIndex, a: F) -> Result<SparseSymmetric>
where
    F: Fn(&[f64]) -> f64,
{
    let n = interior.dim();
    let h = interior.h();
    let inv_h2 = 1.0 / (h * h);
    let coordinate = |p: i64| match interior.centering() {
        Centering::Cell => (2 * p + 1) as f64 * (0.5 * h),
        Centering::Vertex => p as f64 * h,
    };
    let at = |index: usize, x: &[f64]| {
        let v = a(x);
        if v > 0.0 && v.is_finite() {
            Ok(v)
        } else {
            Err(Error::NonPositiveCoefficient { index, value: v })
        }
    };
    let values: Vec<f64> = (0..interior.len()).map(|p| at(p, &interior.coords(p))).collect::<Result<_>>()?;

    let mut rows = Vec::with_capacity(interior.len());
    for p in 0..interior.len() {
        let mut row = Vec::with_capacity(2 * n + 1);
        let mut weights = Vec::with_capacity(2 * n);
        for axis in 0..n {
            for step in [-1i64, 1] {
                let mut q = interior.point(p).to_vec();
                q[axis] += step;
                let (a_q, neighbour) = match interior.index_of(&q) {
                    Some(j) => (values[j], Some(j)),
                    None => {
                        let x: Vec<f64> = q.iter().map(|&c| coordinate(c)).collect();
                        (at(p, &x)?, None)
                    }
                };
                let w = (values[p] + a_q) * 0.5 * inv_h2;
                weights.push(w);
                if let Some(j) = neighbour {
                    row.push((j, -w));
                }
            }
        }
        weights.sort_by(f64::total_cmp);
        row.push((p, weights.iter().sum()));
        rows.push(row);
    }
    Ok(CsrMatrix::from_rows(interior.len(), rows))
}

/// `max |a(gx) − a(x)|` over grid points and group elements.
pub fn coefficient_invariance_defect(coefficient: &Coefficient, interior: &InteriorIndex, group: &FiniteGroup) -> f64 {
    let mut worst = 0.0f64;
    for p in 0..interior.len() {
        let x = interior.coords(p);
        let ax = coefficient.evaluate(&x);
        for g in group.elements() {
            worst = worst.max((coefficient.evaluate(&g.apply(&x)) - ax).abs());
        }
    }
    worst
}

/// Principal symbol `a_{2m}(x, ξ)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PrincipalSymbol {
    kind: OperatorKind,
    coefficient: Coefficient,
}

impl PrincipalSymbol {
    pub fn evaluate(&self, x: &[f64], xi: &[f64]) -> f64 {
        let xi2 = norm_sq_sorted(xi);
        match self.kind {
            OperatorKind::Laplacian => xi2,
            OperatorKind::Bilaplacian => xi2 * xi2,
            OperatorKind::DivAGrad => self.coefficient.evaluate(x) * xi2,
        }
    }

    /// Value on the unit sphere; depends only on `x` for the catalog.
    pub fn on_sphere(&self, x: &[f64]) -> f64 {
        match self.kind {
            OperatorKind::DivAGrad => self.coefficient.evaluate(x),
            _ => 1.0,
        }
    }

    pub fn degree(&self) -> u32 {
        2 * self.kind.m()
    }

    pub fn m(&self) -> u32 {
        self.kind.m()
    }

    pub fn kind(&self) -> OperatorKind {
        self.kind
    }

    pub fn coefficient(&self) -> Coefficient {
        self.coefficient
    }

    /// `ι = inf a_{2m}` over `X × S^{n−1}`, exact for the radial catalog.
    pub fn lower_bound(&self, domain: &DomainSpec) -> f64 {
        let (r0, r1) = domain.radial_range();
        match self.kind {
            OperatorKind::DivAGrad => self.coefficient.min_on_shell(r0, r1),
            _ => 1.0,
        }
    }

    /// `sup a_{2m}` over `X × S^{n−1}`.
    pub fn upper_bound(&self, domain: &DomainSpec) -> f64 {
        let (r0, r1) = domain.radial_range();
        match self.kind {
            OperatorKind::DivAGrad => self.coefficient.max_on_shell(r0, r1),
            _ => 1.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EquivarianceReport {
    pub elements: usize,
    /// `max |PᵀLP − L|` over all elements.
    pub max_defect: f64,
}

impl EquivarianceReport {
    pub fn exact(&self) -> bool {
        self.max_defect == 0.0
    }
}

pub fn equivariance_check(l: &SparseSymmetric, perms: &[Vec<usize>]) -> EquivarianceReport {
    let max_defect = perms.iter().map(|p| l.permutation_defect(p)).fold(0.0, f64::max);
    EquivarianceReport { elements: perms.len(), max_defect }
}

pub fn write_matrix_market(l: &SparseSymmetric, path: &Path) -> Result<()> {
    l.write_matrix_market(BufWriter::new(File::create(path)?))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use std::f64::consts::PI;

    use super::*;
    use crate::group_rep::{build_group, GroupFamily};
    use crate::lattice_domain::{discretize, discretize_with, group_permutations, unit_square_grid};
    use crate::linalg::dense::hermitian_eigenvalues;

    fn unit_square(m: usize) -> InteriorIndex {
        unit_square_grid(m).unwrap()
    }

    fn sine_spectrum(m: usize) -> Vec<f64> {
        let h = 1.0 / (m as f64 + 1.0);
        let s = |j: usize| (4.0 / (h * h)) * (j as f64 * PI * h / 2.0).sin().powi(2);
        let mut ev: Vec<f64> = (1..=m).flat_map(|j| (1..=m).map(move |k| s(j) + s(k))).collect();
        ev.sort_by(f64::total_cmp);
        ev
    }

    #[test]
    fn single_point_stencil() {
        let grid = discretize_with(&DomainSpec::square(1.0).unwrap(), 1.0, Centering::Vertex).unwrap();
        assert_eq!(grid.len(), 1);
        let l = assemble(&OperatorSpec::laplacian(), &grid).unwrap();
        assert_eq!(l.to_dense(), vec![4.0]);
    }

    #[test]
    fn nine_point_square_matches_sine_modes() {
        let m = 3;
        let l = assemble(&OperatorSpec::laplacian(), &unit_square(m)).unwrap();
        let ev = hermitian_eigenvalues(l.dim(), &l.to_dense()).unwrap();
        for (a, b) in ev.iter().zip(sine_spectrum(m)) {
            assert!((a - b).abs() <= 1e-10 * b);
        }
    }

    #[test]
    fn cell_centred_grid_matches_the_same_oracle() {
        // side 1 at h = 1/17: 16 cells per side, boundary at the ghost nodes
        let grid = discretize(&DomainSpec::square(0.5).unwrap(), 1.0 / 17.0).unwrap();
        assert_eq!(grid.len(), 256);
        let l = assemble(&OperatorSpec::laplacian(), &grid).unwrap();
        let ev = hermitian_eigenvalues(l.dim(), &l.to_dense()).unwrap();
        for (a, b) in ev.iter().zip(sine_spectrum(16)) {
            assert!((a - b).abs() <= 1e-10 * b);
        }
    }

    #[test]
    fn bilaplacian_squares_the_spectrum() {
        let m = 6;
        let grid = unit_square(m);
        let l2 = assemble(&OperatorSpec::bilaplacian(), &grid).unwrap();
        let ev = hermitian_eigenvalues(l2.dim(), &l2.to_dense()).unwrap();
        for (a, b) in ev.iter().zip(sine_spectrum(m)) {
            assert!((a - b * b).abs() <= 1e-9 * b * b, "{a} vs {}", b * b);
        }
        assert_eq!(l2.hermitian_defect(), 0.0);
    }

    #[test]
    fn symbols() {
        let lap = OperatorSpec::laplacian().principal_symbol();
        assert_eq!(lap.evaluate(&[0.3, 0.1], &[0.0, 1.0]), 1.0);
        assert_eq!(OperatorSpec::bilaplacian().principal_symbol().evaluate(&[0.0, 0.0], &[1.0, 1.0]), 4.0);
        let a = OperatorSpec::div_a_grad(Coefficient::Quadratic { beta: 1.0 }).principal_symbol();
        assert_eq!(a.evaluate(&[1.0, 0.0], &[0.0, 2.0]), 8.0);
        assert_eq!(a.degree(), 2);
        let disk = DomainSpec::ball(2, 1.0).unwrap();
        let b = OperatorSpec::div_a_grad(Coefficient::Quadratic { beta: -0.5 }).principal_symbol();
        assert_eq!(b.lower_bound(&disk), 0.5);
    }

    #[test]
    fn catalog_operators_commute_exactly_with_d4() {
        let g = build_group(GroupFamily::Dihedral, 4, 2).unwrap();
        let specs = [
            OperatorSpec::laplacian(),
            OperatorSpec::bilaplacian(),
            OperatorSpec::div_a_grad(Coefficient::Quadratic { beta: 0.7 }),
            OperatorSpec::div_a_grad(Coefficient::Bump { beta: 2.0, width: 0.3 }),
        ];
        for domain in [DomainSpec::ball(2, 1.0).unwrap(), DomainSpec::square(0.5).unwrap()] {
            let grid = discretize(&domain, 0.07).unwrap();
            let perms = group_permutations(&grid, &g).unwrap();
            for spec in &specs {
                let l = assemble(spec, &grid).unwrap();
                let report = equivariance_check(&l, &perms);
                assert!(report.exact(), "{spec:?}: {}", report.max_defect);
                assert_eq!(l.hermitian_defect(), 0.0);
                assert_eq!(coefficient_invariance_defect(&spec.coefficient, &grid, &g), 0.0);
            }
        }
    }

    #[test]
    fn skewed_coefficient_is_flagged() {
        let g = build_group(GroupFamily::Dihedral, 4, 2).unwrap();
        let grid = discretize(&DomainSpec::square(0.5).unwrap(), 0.1).unwrap();
        let perms = group_permutations(&grid, &g).unwrap();
        let l = assemble_div_a_grad(&grid, |x| 1.0 + 0.5 * x[0]).unwrap();
        assert!(equivariance_check(&l, &perms).max_defect > 0.0);
    }

    #[test]
    fn assembled_operators_are_positive_definite() {
        use crate::linalg::skyline::count_below;
        let ring = DomainSpec::annulus(2, 0.1, 0.5).unwrap();
        let grid = discretize(&ring, 1.0 / 20.0).unwrap();
        for spec in [
            OperatorSpec::laplacian(),
            OperatorSpec::bilaplacian(),
            OperatorSpec::div_a_grad(Coefficient::Bump { beta: 2.0, width: 0.2 }),
        ] {
            let l = assemble(&spec, &grid).unwrap();
            assert_eq!(count_below(&l, 0.0).unwrap(), 0);
        }
    }

    #[test]
    fn negative_coefficient_and_cap() {
        let grid = discretize(&DomainSpec::square(0.5).unwrap(), 0.1).unwrap();
        let bad = OperatorSpec::div_a_grad(Coefficient::Quadratic { beta: -10.0 });
        assert!(matches!(assemble(&bad, &grid), Err(Error::NonPositiveCoefficient { .. })));
        let capped = OperatorSpec { max_dim: 10, ..OperatorSpec::laplacian() };
        assert!(matches!(assemble(&capped, &grid), Err(Error::DimensionOverflow { dim: 100, cap: 10 })));
    }
}
