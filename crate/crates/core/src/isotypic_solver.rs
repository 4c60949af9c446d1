//! Symmetry-adapted bases, per-character compression of a G-commuting
//! operator, and per-character eigenvalue counting.
//!
//! The compressed space for a character `χ` is the whole isotypic component
//! (dimension `d_χ·m_χ`), so the eigenvalue count of a block already carries
//! the `d_χ`-fold multiplicity.

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::group_rep::CharacterTable;
use crate::linalg::dense::{hermitian_eigen, hermitian_eigenvalues};
use crate::linalg::lanczos::{eigenvalues_below, LanczosOptions};
use crate::linalg::skyline::SkylineLdl;
use crate::linalg::{norm, scale_in_place, CsrMatrix, Scalar};
use crate::operator_disc::SparseSymmetric;

/// Vectors shorter than this after projection and orthogonalization are
/// treated as numerically null.
pub const NULL_THRESHOLD: f64 = 1e-8;

/// A group acting on grid functions by permutations, with its character table.
#[derive(Clone, Debug)]
pub struct SymmetryAction {
    table: CharacterTable,
    /// `(T(k)v)[p] = v[perms[k][p]]`
    perms: Vec<Vec<usize>>,
    inv_perms: Vec<Vec<usize>>,
    orbits: Vec<Vec<usize>>,
}

impl SymmetryAction {
    pub fn new(table: CharacterTable, perms: Vec<Vec<usize>>) -> Result<Self> {
        if perms.len() != table.group_order() || perms.is_empty() {
            return Err(Error::InvalidParameter(format!(
                "{} permutations for a group of order {}",
                perms.len(),
                table.group_order()
            )));
        }
        let n = perms[0].len();
        let mut inv_perms = Vec::with_capacity(perms.len());
        for p in &perms {
            if p.len() != n {
                return Err(Error::InvalidParameter("permutations of different lengths".into()));
            }
            let mut inv = vec![usize::MAX; n];
            for (i, &j) in p.iter().enumerate() {
                if j >= n || inv[j] != usize::MAX {
                    return Err(Error::InvalidParameter("not a permutation".into()));
                }
                inv[j] = i;
            }
            inv_perms.push(inv);
        }
        let mut seen = vec![false; n];
        let mut orbits = Vec::new();
        for p in 0..n {
            if seen[p] {
                continue;
            }
            let mut orbit: Vec<usize> = perms.iter().map(|perm| perm[p]).collect();
            orbit.sort_unstable();
            orbit.dedup();
            for &q in &orbit {
                seen[q] = true;
            }
            orbits.push(orbit);
        }
        Ok(Self { table, perms, inv_perms, orbits })
    }

    pub fn table(&self) -> &CharacterTable {
        &self.table
    }

    pub fn perms(&self) -> &[Vec<usize>] {
        &self.perms
    }

    pub fn len(&self) -> usize {
        self.perms[0].len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn orbits(&self) -> &[Vec<usize>] {
        &self.orbits
    }

    pub fn num_irreps(&self) -> usize {
        self.table.num_irreps()
    }

    /// `(d_χ/|G|)·conj χ(k)`, the weight of `T(k)` in `P_χ`.
    fn weight(&self, chi: usize, k: usize) -> Complex64 {
        self.table.value(chi, k).conj() * (self.table.dim(chi) as f64 / self.table.group_order() as f64)
    }

    /// `P_χ v = (d_χ/|G|) Σ_k conj χ(k) T(k) v`.
    pub fn projector_apply(&self, chi: usize, v: &[Complex64]) -> Vec<Complex64> {
        let mut out = vec![Complex64::new(0.0, 0.0); v.len()];
        for (k, perm) in self.perms.iter().enumerate() {
            let w = self.weight(chi, k);
            for (o, &src) in out.iter_mut().zip(perm) {
                *o += w * v[src];
            }
        }
        out
    }

    /// Number of grid points fixed by each element.
    pub fn fixed_counts(&self) -> Vec<usize> {
        self.perms.iter().map(|p| p.iter().enumerate().filter(|&(i, &j)| i == j).count()).collect()
    }

    /// `Σ_k (d_χ/|G|) conj χ(k) fix(k)`, the dimension of the isotypic component.
    pub fn trace_dimension(&self, chi: usize) -> Result<usize> {
        let fix = self.fixed_counts();
        let t: Complex64 = fix.iter().enumerate().map(|(k, &f)| self.weight(chi, k) * f as f64).sum();
        let rounded = t.re.round();
        if (t.re - rounded).abs() > 1e-6 || t.im.abs() > 1e-6 || rounded < 0.0 {
            return Err(Error::RankMismatch { chi, built: 0, expected: rounded.max(0.0) as usize });
        }
        Ok(rounded as usize)
    }

    /// Orthonormal basis of the image of `P_χ`, built orbit by orbit from the
    /// projections of point masses.
    pub fn isotypic_basis<T: Scalar>(&self, chi: usize) -> Result<IsotypicBasis<T>> {
        let expected = self.trace_dimension(chi)?;
        let order = self.perms.len();
        let weights: Vec<T> = (0..order)
            .map(|k| {
                T::from_complex(self.weight(chi, k))
                    .ok_or_else(|| Error::InvalidParameter(format!("character {chi} is complex; use complex scalars")))
            })
            .collect::<Result<_>>()?;
        let mut columns = Vec::with_capacity(expected);
        let mut local = vec![usize::MAX; self.len()];
        for orbit in &self.orbits {
            for (i, &q) in orbit.iter().enumerate() {
                local[q] = i;
            }
            let mut accepted: Vec<Vec<T>> = Vec::new();
            for &p in orbit {
                // (P_χ δ_p)[q] collects the weights of every k with perm_k[q] = p.
                let mut u = vec![T::zero(); orbit.len()];
                for (k, w) in weights.iter().enumerate() {
                    u[local[self.inv_perms[k][p]]] += *w;
                }
                for _ in 0..2 {
                    for a in &accepted {
                        let c = crate::linalg::dot(a, &u);
                        crate::linalg::axpy(-c, a, &mut u);
                    }
                }
                let un = norm(&u);
                if un >= NULL_THRESHOLD {
                    scale_in_place(1.0 / un, &mut u);
                    accepted.push(u);
                }
            }
            for a in accepted {
                let mut col: Vec<(usize, T)> =
                    orbit.iter().zip(a).filter(|(_, v)| *v != T::zero()).map(|(&q, v)| (q, v)).collect();
                col.sort_by_key(|e| e.0);
                columns.push(col);
            }
        }
        if columns.len() != expected {
            return Err(Error::RankMismatch { chi, built: columns.len(), expected });
        }
        Ok(IsotypicBasis { chi, n: self.len(), columns })
    }
}

/// Orthonormal columns spanning one isotypic component; each column is
/// supported on a single orbit and stored sparsely.
#[derive(Clone, Debug)]
pub struct IsotypicBasis<T> {
    pub chi: usize,
    n: usize,
    columns: Vec<Vec<(usize, T)>>,
}

impl<T: Scalar> IsotypicBasis<T> {
    pub fn dim(&self) -> usize {
        self.columns.len()
    }

    pub fn grid_len(&self) -> usize {
        self.n
    }

    pub fn column(&self, j: usize) -> &[(usize, T)] {
        &self.columns[j]
    }

    pub fn column_dense(&self, j: usize) -> Vec<T> {
        let mut v = vec![T::zero(); self.n];
        for &(q, x) in &self.columns[j] {
            v[q] = x;
        }
        v
    }

    /// `V c`
    pub fn expand(&self, c: &[T]) -> Vec<T> {
        let mut v = vec![T::zero(); self.n];
        for (col, &cj) in self.columns.iter().zip(c) {
            for &(q, x) in col {
                v[q] += x * cj;
            }
        }
        v
    }

    /// `Vᴴ v`
    pub fn restrict(&self, v: &[T]) -> Vec<T> {
        self.columns.iter().map(|col| col.iter().map(|&(q, x)| x.conj() * v[q]).sum()).collect()
    }

    /// `max |VᴴV − I|`, evaluated orbit-locally.
    pub fn orthonormality_defect(&self) -> f64 {
        let mut owner: Vec<Vec<usize>> = vec![Vec::new(); self.n];
        for (j, col) in self.columns.iter().enumerate() {
            for &(q, _) in col {
                owner[q].push(j);
            }
        }
        let mut worst = 0.0f64;
        for (j, col) in self.columns.iter().enumerate() {
            let mut partners: Vec<usize> = col.iter().flat_map(|&(q, _)| owner[q].iter().copied()).collect();
            partners.sort_unstable();
            partners.dedup();
            let dense = self.column_dense(j);
            for i in partners {
                let s: T = self.columns[i].iter().map(|&(q, x)| x.conj() * dense[q]).sum();
                let target = if i == j { T::from_re(1.0) } else { T::zero() };
                worst = worst.max((s - target).abs_sqr().sqrt());
            }
        }
        worst
    }
}

/// Rows of `Vᴴ L W` as `(column, value)` lists, exploiting the orbit-local columns.
fn compress<T: Scalar>(l: &SparseSymmetric, left: &IsotypicBasis<T>, right: &IsotypicBasis<T>) -> Vec<Vec<(usize, T)>> {
    let n = l.dim();
    let mut point_cols: Vec<Vec<(usize, T)>> = vec![Vec::new(); n];
    for (i, col) in left.columns.iter().enumerate() {
        for &(q, x) in col {
            point_cols[q].push((i, x.conj()));
        }
    }
    let mut w = vec![T::zero(); n];
    let mut in_w = vec![false; n];
    let mut touched_w: Vec<usize> = Vec::new();
    let mut acc = vec![T::zero(); left.dim()];
    let mut in_acc = vec![false; left.dim()];
    let mut touched_acc: Vec<usize> = Vec::new();
    let mut rows: Vec<Vec<(usize, T)>> = vec![Vec::new(); left.dim()];
    for (j, col) in right.columns.iter().enumerate() {
        for &(q, x) in col {
            for (r, lrq) in l.row(q) {
                if !in_w[r] {
                    in_w[r] = true;
                    touched_w.push(r);
                }
                w[r] += x.scale(lrq);
            }
        }
        for &r in &touched_w {
            for &(i, xc) in &point_cols[r] {
                if !in_acc[i] {
                    in_acc[i] = true;
                    touched_acc.push(i);
                }
                acc[i] += xc * w[r];
            }
            w[r] = T::zero();
            in_w[r] = false;
        }
        touched_w.clear();
        for &i in &touched_acc {
            rows[i].push((j, acc[i]));
            acc[i] = T::zero();
            in_acc[i] = false;
        }
        touched_acc.clear();
    }
    rows
}

/// `B = VᴴLV`, symmetrized.
pub fn project_operator<T: Scalar>(l: &SparseSymmetric, basis: &IsotypicBasis<T>) -> CsrMatrix<T> {
    CsrMatrix::from_rows(basis.dim(), compress(l, basis, basis)).hermitian_part()
}

/// Frobenius norm of `V_χᴴ L V_ψ`.
pub fn off_block_coupling<T: Scalar>(l: &SparseSymmetric, a: &IsotypicBasis<T>, b: &IsotypicBasis<T>) -> f64 {
    compress(l, a, b).iter().flatten().map(|(_, v)| v.abs_sqr()).sum::<f64>().sqrt()
}

/// A compressed block in whichever scalar field its character needs.
#[derive(Clone, Debug)]
pub enum IsotypicBlock {
    Real { chi: usize, matrix: CsrMatrix<f64> },
    Complex { chi: usize, matrix: CsrMatrix<Complex64> },
}

impl IsotypicBlock {
    pub fn chi(&self) -> usize {
        match self {
            Self::Real { chi, .. } | Self::Complex { chi, .. } => *chi,
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            Self::Real { matrix, .. } => matrix.dim(),
            Self::Complex { matrix, .. } => matrix.dim(),
        }
    }

    pub fn hermitian_defect(&self) -> f64 {
        match self {
            Self::Real { matrix, .. } => matrix.hermitian_defect(),
            Self::Complex { matrix, .. } => matrix.hermitian_defect(),
        }
    }
}

/// Basis and block for every character. Real arithmetic is used when the
/// whole character table is real.
pub fn isotypic_blocks(l: &SparseSymmetric, action: &SymmetryAction) -> Result<Vec<IsotypicBlock>> {
    if l.dim() != action.len() {
        return Err(Error::InvalidParameter(format!(
            "operator has dimension {} but the action permutes {} points",
            l.dim(),
            action.len()
        )));
    }
    let real = action.table().is_real();
    (0..action.num_irreps())
        .map(|chi| {
            Ok(if real {
                IsotypicBlock::Real { chi, matrix: project_operator(l, &action.isotypic_basis::<f64>(chi)?) }
            } else {
                IsotypicBlock::Complex { chi, matrix: project_operator(l, &action.isotypic_basis::<Complex64>(chi)?) }
            })
        })
        .collect()
}

#[derive(Clone, Debug)]
pub struct SolverOptions {
    /// Largest block handed to the dense solver.
    pub dense_max_dim: usize,
    /// With a cutoff, blocks above this size use Lanczos on the inverse.
    pub lanczos_min_dim: usize,
    /// Only eigenvalues below the cutoff are needed (enables the iterative path).
    pub cutoff: Option<f64>,
    pub lanczos: LanczosOptions,
    /// Number of eigenpairs whose residual is spot-checked per block.
    pub spot_checks: usize,
    pub seed: u64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            dense_max_dim: 10_000,
            lanczos_min_dim: 1_500,
            cutoff: None,
            lanczos: LanczosOptions::default(),
            spot_checks: 10,
            seed: 0x5eed,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BlockSpectrum {
    pub chi: usize,
    pub label: String,
    pub dim: usize,
    /// Ascending; every eigenvalue of the block below `complete_below`.
    pub values: Vec<f64>,
    pub complete_below: f64,
    /// Largest `‖Bv − λv‖/‖B‖_∞` over the spot-checked pairs.
    pub max_residual: f64,
}

impl BlockSpectrum {
    /// `N_χ(λ)`: eigenvalues `≤ λ`.
    pub fn count(&self, lambda: f64) -> Result<usize> {
        if lambda == f64::INFINITY && self.complete_below == f64::INFINITY {
            return Ok(self.dim);
        }
        if lambda >= self.complete_below {
            return Err(Error::IncompleteSpectrum { chi: self.chi, complete_below: self.complete_below, lambda });
        }
        Ok(self.values.partition_point(|&v| v <= lambda))
    }
}

/// Per-character spectra.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Spectrum {
    pub blocks: Vec<BlockSpectrum>,
}

impl Spectrum {
    pub fn total_count(&self, lambda: f64) -> Result<usize> {
        self.blocks.iter().map(|b| b.count(lambda)).sum()
    }

    /// Sorted union of the block spectra.
    pub fn union(&self) -> Vec<f64> {
        let mut all: Vec<f64> = self.blocks.iter().flat_map(|b| b.values.iter().copied()).collect();
        all.sort_by(f64::total_cmp);
        all
    }

    pub fn complete_below(&self) -> f64 {
        self.blocks.iter().map(|b| b.complete_below).fold(f64::INFINITY, f64::min)
    }
}

pub fn count(spectrum: &Spectrum, chi: usize, lambda: f64) -> Result<usize> {
    spectrum.blocks.get(chi).ok_or_else(|| Error::InvalidParameter(format!("no character {chi}")))?.count(lambda)
}

fn solve_generic<T: Scalar>(b: &CsrMatrix<T>, chi: usize, label: &str, opts: &SolverOptions) -> Result<BlockSpectrum> {
    let dim = b.dim();
    let (values, complete_below) = match opts.cutoff {
        Some(cutoff) if dim > opts.lanczos_min_dim => (eigenvalues_below(b, cutoff, &opts.lanczos)?.values, cutoff),
        _ if dim <= opts.dense_max_dim => (hermitian_eigenvalues(dim, &b.to_dense())?, f64::INFINITY),
        _ => return Err(Error::DimensionOverflow { dim, cap: opts.dense_max_dim }),
    };
    let max_residual = residual_spot_check(b, &values, opts.spot_checks, opts.seed ^ chi as u64)?;
    Ok(BlockSpectrum { chi, label: label.to_string(), dim, values, complete_below, max_residual })
}

pub fn eigen_block(block: &IsotypicBlock, label: &str, opts: &SolverOptions) -> Result<BlockSpectrum> {
    match block {
        IsotypicBlock::Real { chi, matrix } => solve_generic(matrix, *chi, label, opts),
        IsotypicBlock::Complex { chi, matrix } => solve_generic(matrix, *chi, label, opts),
    }
}

/// Full pipeline for one operator: bases, blocks, block spectra.
pub fn isotypic_spectrum(l: &SparseSymmetric, action: &SymmetryAction, opts: &SolverOptions) -> Result<Spectrum> {
    let blocks = isotypic_blocks(l, action)?;
    let blocks = blocks.iter().map(|b| eigen_block(b, action.table().label(b.chi()), opts)).collect::<Result<_>>()?;
    Ok(Spectrum { blocks })
}

/// Checks computed eigenvalues by inverse iteration: for a few of them, two
/// steps with a shift next to `λ` from a random start, then `‖Bv − λv‖/‖B‖_∞`.
pub fn residual_spot_check<T: Scalar>(b: &CsrMatrix<T>, values: &[f64], samples: usize, seed: u64) -> Result<f64> {
    if values.is_empty() || samples == 0 {
        return Ok(0.0);
    }
    let scale = b.inf_norm().max(f64::MIN_POSITIVE);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let picks: Vec<usize> = if values.len() <= samples {
        (0..values.len()).collect()
    } else {
        (0..samples).map(|i| i * (values.len() - 1) / (samples - 1).max(1)).collect()
    };
    let mut worst = 0.0f64;
    for i in picks {
        let lambda = values[i];
        // A shift exactly at λ can hit an exact zero pivot on symmetric
        // stencils (λ equal to a diagonal entry), so stay slightly off it.
        let mut offset = 0.754_877_666 * 1e-8 * scale;
        let mut factor = SkylineLdl::factor(&b.shifted(lambda + offset));
        for _ in 0..8 {
            if factor.is_ok() {
                break;
            }
            offset *= 2.0;
            factor = SkylineLdl::factor(&b.shifted(lambda + offset));
        }
        let factor = factor?;
        let mut v: Vec<T> = (0..b.dim()).map(|_| T::random(&mut rng)).collect();
        for _ in 0..2 {
            v = factor.solve(&v);
            let vn = norm(&v);
            if !vn.is_finite() || vn == 0.0 {
                return Err(Error::ConvergenceFailure(format!("inverse iteration broke down at λ = {lambda}")));
            }
            scale_in_place(1.0 / vn, &mut v);
        }
        let mut r = b.matvec(&v);
        crate::linalg::axpy(T::from_re(-lambda), &v, &mut r);
        worst = worst.max(norm(&r) / scale);
    }
    Ok(worst)
}

/// Eigenvalues of the whole operator by the dense solver (small grids only).
pub fn full_spectrum(l: &SparseSymmetric) -> Result<Vec<f64>> {
    hermitian_eigenvalues(l.dim(), &l.to_dense())
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ClassifiedEigenvalue {
    pub value: f64,
    /// `‖P_χ v‖²` per character.
    pub weights: Vec<f64>,
}

/// Solves the full operator densely and splits each of the lowest
/// `how_many` eigenvectors over the isotypic components.
pub fn classify_by_projection(
    l: &SparseSymmetric,
    action: &SymmetryAction,
    how_many: usize,
) -> Result<Vec<ClassifiedEigenvalue>> {
    let (values, vectors) = hermitian_eigen(l.dim(), &l.to_dense())?;
    Ok(values
        .into_iter()
        .zip(vectors)
        .take(how_many)
        .map(|(value, v)| {
            let vc: Vec<Complex64> = v.iter().map(|&x| Complex64::new(x, 0.0)).collect();
            let weights = (0..action.num_irreps()).map(|chi| norm(&action.projector_apply(chi, &vc)).powi(2)).collect();
            ClassifiedEigenvalue { value, weights }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group_rep::{build_group, character_table, FiniteGroup, GroupFamily};
    use crate::lattice_domain::{discretize, group_permutations, unit_square_grid, DomainSpec};
    use crate::operator_disc::{assemble, OperatorSpec};

    fn action_for(group: &FiniteGroup, grid: &crate::lattice_domain::InteriorIndex) -> SymmetryAction {
        SymmetryAction::new(character_table(group).unwrap(), group_permutations(grid, group).unwrap()).unwrap()
    }

    fn c(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    #[test]
    fn trivial_group_projector_is_identity() {
        let grid = unit_square_grid(4).unwrap();
        let a = action_for(&FiniteGroup::trivial(2), &grid);
        let v: Vec<Complex64> = (0..grid.len()).map(|i| c(i as f64)).collect();
        assert_eq!(a.projector_apply(0, &v), v);
        let basis = a.isotypic_basis::<f64>(0).unwrap();
        assert_eq!(basis.dim(), grid.len());
    }

    #[test]
    fn sign_character_antisymmetrizes_a_point_mass() {
        let grid = discretize(&DomainSpec::square(1.0).unwrap(), 1.0).unwrap();
        let c2 = build_group(GroupFamily::Cyclic, 2, 2).unwrap();
        let a = action_for(&c2, &grid);
        let sign = (0..2).find(|&chi| a.table().value(chi, 1).re < 0.0).unwrap();
        let mut v = vec![c(0.0); 4];
        v[0] = c(1.0);
        let out = a.projector_apply(sign, &v);
        let partner = a.perms()[1][0];
        for (i, z) in out.iter().enumerate() {
            let expected = if i == 0 {
                0.5
            } else if i == partner {
                -0.5
            } else {
                0.0
            };
            assert_eq!(*z, c(expected));
        }
    }

    #[test]
    fn c2_on_a_free_grid_splits_in_half() {
        let grid = unit_square_grid(6).unwrap();
        let c2 = build_group(GroupFamily::Cyclic, 2, 2).unwrap();
        let a = action_for(&c2, &grid);
        for chi in 0..2 {
            assert_eq!(a.trace_dimension(chi).unwrap(), 18);
            assert_eq!(a.isotypic_basis::<f64>(chi).unwrap().dim(), 18);
        }
    }

    #[test]
    fn d4_on_four_points_matches_enumeration() {
        // The four cells (±½, ±½) form one free orbit under C4; D4 adds the
        // diagonal mirrors, which fix two cells each. The permutation
        // representation is A1 + B2 + E (B2: +1 on the diagonal mirrors).
        let grid = discretize(&DomainSpec::square(1.0).unwrap(), 1.0).unwrap();
        let d4 = build_group(GroupFamily::Dihedral, 4, 2).unwrap();
        let a = action_for(&d4, &grid);
        let dims: Vec<usize> = (0..a.num_irreps()).map(|chi| a.trace_dimension(chi).unwrap()).collect();
        assert_eq!(dims.iter().sum::<usize>(), 4);
        // brute force: multiplicity of χ is (1/|G|) Σ conj χ(k) fix(k); dimension d_χ times that
        let fix = a.fixed_counts();
        for chi in 0..a.num_irreps() {
            let m: f64 = (0..8).map(|k| a.table().value(chi, k).re * fix[k] as f64).sum::<f64>() / 8.0;
            assert_eq!(dims[chi], (m.round() as usize) * a.table().dim(chi));
            assert_eq!(a.isotypic_basis::<f64>(chi).unwrap().dim(), dims[chi]);
        }
        assert_eq!(dims.iter().filter(|&&d| d > 0).count(), 3);
    }

    #[test]
    fn complex_characters_need_complex_scalars() {
        let grid = unit_square_grid(4).unwrap();
        let c4 = build_group(GroupFamily::Cyclic, 4, 2).unwrap();
        let a = action_for(&c4, &grid);
        let complex_chi = (0..4).find(|&chi| a.table().row(chi).iter().any(|z| z.im != 0.0)).unwrap();
        assert!(a.isotypic_basis::<f64>(complex_chi).is_err());
        let b = a.isotypic_basis::<Complex64>(complex_chi).unwrap();
        assert_eq!(b.dim(), 4);
        assert!(b.orthonormality_defect() < 1e-12);
    }

    #[test]
    fn blocks_reproduce_the_full_spectrum() {
        let grid = discretize(&DomainSpec::ball(2, 1.0).unwrap(), 0.15).unwrap();
        let l = assemble(&OperatorSpec::laplacian(), &grid).unwrap();
        let full = full_spectrum(&l).unwrap();
        for (fam, k) in [(GroupFamily::Cyclic, 4), (GroupFamily::Dihedral, 4)] {
            let g = build_group(fam, k, 2).unwrap();
            let a = action_for(&g, &grid);
            let s = isotypic_spectrum(&l, &a, &SolverOptions::default()).unwrap();
            let union = s.union();
            assert_eq!(union.len(), full.len());
            for (x, y) in union.iter().zip(&full) {
                assert!((x - y).abs() < 1e-8 * l.inf_norm());
            }
            for b in &s.blocks {
                assert!(b.max_residual < 1e-8, "{}", b.max_residual);
            }
        }
    }

    #[test]
    fn ground_state_is_invariant() {
        let grid = discretize(&DomainSpec::ball(2, 1.0).unwrap(), 0.2).unwrap();
        let l = assemble(&OperatorSpec::laplacian(), &grid).unwrap();
        let d4 = build_group(GroupFamily::Dihedral, 4, 2).unwrap();
        let a = action_for(&d4, &grid);
        let classified = classify_by_projection(&l, &a, 5).unwrap();
        let trivial = 0;
        assert!((classified[0].weights[trivial] - 1.0).abs() < 1e-10);
        for c in &classified {
            assert!((c.weights.iter().sum::<f64>() - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn counting() {
        let b = BlockSpectrum {
            chi: 0,
            label: "A".into(),
            dim: 3,
            values: vec![1.0, 2.0, 2.0],
            complete_below: f64::INFINITY,
            max_residual: 0.0,
        };
        assert_eq!(b.count(0.5).unwrap(), 0);
        assert_eq!(b.count(2.0).unwrap(), 3);
        assert_eq!(b.count(f64::INFINITY).unwrap(), 3);
        let partial = BlockSpectrum { complete_below: 1.5, ..b };
        assert!(matches!(partial.count(1.6), Err(Error::IncompleteSpectrum { .. })));
    }
}
