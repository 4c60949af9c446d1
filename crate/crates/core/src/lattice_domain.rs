//! Symmetric bounded domains, their lattice discretizations, and tube volumes
//! around the boundary and around the fixed-point set of a group.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::group_rep::{all_fixed_point_data, FiniteGroup, OrthogonalElement};
use crate::mc::{count_hits, uniform_in_box, HitEstimate};

/// `|x|²` summed in increasing order of the squares, so the value is the same
/// bit pattern for every signed permutation of `x`.
pub fn norm_sq_sorted(x: &[f64]) -> f64 {
    let mut sq: Vec<f64> = x.iter().map(|v| v * v).collect();
    sq.sort_by(f64::total_cmp);
    sq.iter().sum()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "snake_case")]
pub enum Shape {
    /// `max |x_i| < half_width` (square in 2D, cube in 3D).
    Cube { half_width: f64 },
    /// `|x| < radius`
    Ball { radius: f64 },
    /// `inner < |x| < outer`
    Annulus { inner: f64, outer: f64 },
    /// Union of the centred rectangles `|x| < a, |y| < b` (2D only).
    Rectangles { half_extents: Vec<[f64; 2]> },
}

/// A boundary edge of a rectangle union.
#[derive(Clone, Copy, Debug, PartialEq)]
struct Segment {
    a: [f64; 2],
    b: [f64; 2],
}

impl Segment {
    fn distance(&self, x: &[f64]) -> f64 {
        let d = [self.b[0] - self.a[0], self.b[1] - self.a[1]];
        let len2 = d[0] * d[0] + d[1] * d[1];
        let t = if len2 == 0.0 {
            0.0
        } else {
            (((x[0] - self.a[0]) * d[0] + (x[1] - self.a[1]) * d[1]) / len2).clamp(0.0, 1.0)
        };
        let px = self.a[0] + t * d[0] - x[0];
        let py = self.a[1] + t * d[1] - x[1];
        px.hypot(py)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "DomainRepr", into = "DomainRepr")]
pub struct DomainSpec {
    n: usize,
    shape: Shape,
    /// Boundary of a rectangle union; empty for the other shapes.
    segments: Vec<Segment>,
}

#[derive(Serialize, Deserialize)]
struct DomainRepr {
    n: usize,
    #[serde(flatten)]
    shape: Shape,
}

impl TryFrom<DomainRepr> for DomainSpec {
    type Error = Error;
    fn try_from(r: DomainRepr) -> Result<Self> {
        Self::new(r.n, r.shape)
    }
}

impl From<DomainSpec> for DomainRepr {
    fn from(d: DomainSpec) -> Self {
        Self { n: d.n, shape: d.shape }
    }
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidDomain(format!("{name} must be positive and finite, got {v}")))
    }
}

impl DomainSpec {
    pub fn new(n: usize, shape: Shape) -> Result<Self> {
        if !(2..=3).contains(&n) {
            return Err(Error::InvalidDomain(format!("dimension {n} (only 2 and 3)")));
        }
        let mut segments = Vec::new();
        match &shape {
            Shape::Cube { half_width } => positive("half_width", *half_width)?,
            Shape::Ball { radius } => positive("radius", *radius)?,
            Shape::Annulus { inner, outer } => {
                positive("inner", *inner)?;
                positive("outer", *outer)?;
                if inner >= outer {
                    return Err(Error::InvalidDomain(format!("annulus needs inner < outer, got {inner} >= {outer}")));
                }
            }
            Shape::Rectangles { half_extents } => {
                if n != 2 {
                    return Err(Error::InvalidDomain("rectangle unions are two-dimensional".into()));
                }
                if half_extents.is_empty() {
                    return Err(Error::InvalidDomain("empty rectangle list".into()));
                }
                for r in half_extents {
                    positive("rectangle half extent", r[0])?;
                    positive("rectangle half extent", r[1])?;
                }
                segments = union_boundary(half_extents);
            }
        }
        Ok(Self { n, shape, segments })
    }

    pub fn square(half_width: f64) -> Result<Self> {
        Self::new(2, Shape::Cube { half_width })
    }

    pub fn cube(n: usize, half_width: f64) -> Result<Self> {
        Self::new(n, Shape::Cube { half_width })
    }

    pub fn ball(n: usize, radius: f64) -> Result<Self> {
        Self::new(n, Shape::Ball { radius })
    }

    pub fn annulus(n: usize, inner: f64, outer: f64) -> Result<Self> {
        Self::new(n, Shape::Annulus { inner, outer })
    }

    pub fn rectangles(half_extents: Vec<[f64; 2]>) -> Result<Self> {
        Self::new(2, Shape::Rectangles { half_extents })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn shape(&self) -> &Shape {
        &self.shape
    }

    pub fn name(&self) -> String {
        match &self.shape {
            Shape::Cube { half_width } => format!("cube[n={},half_width={half_width}]", self.n),
            Shape::Ball { radius } => format!("ball[n={},radius={radius}]", self.n),
            Shape::Annulus { inner, outer } => format!("annulus[n={},inner={inner},outer={outer}]", self.n),
            Shape::Rectangles { half_extents } => format!("rectangles[{half_extents:?}]"),
        }
    }

    /// Membership in the open domain.
    pub fn indicator(&self, x: &[f64]) -> bool {
        match &self.shape {
            Shape::Cube { half_width } => x.iter().all(|v| v.abs() < *half_width),
            Shape::Ball { radius } => norm_sq_sorted(x) < radius * radius,
            Shape::Annulus { inner, outer } => {
                let r2 = norm_sq_sorted(x);
                inner * inner < r2 && r2 < outer * outer
            }
            Shape::Rectangles { half_extents } => half_extents.iter().any(|r| x[0].abs() < r[0] && x[1].abs() < r[1]),
        }
    }

    /// Euclidean distance from `x` (inside or outside) to the boundary.
    pub fn distance_to_boundary(&self, x: &[f64]) -> f64 {
        match &self.shape {
            Shape::Cube { half_width } => {
                let outside: Vec<f64> = x.iter().map(|v| (v.abs() - half_width).max(0.0)).collect();
                if outside.iter().any(|&o| o > 0.0) {
                    norm_sq_sorted(&outside).sqrt()
                } else {
                    x.iter().map(|v| half_width - v.abs()).fold(f64::INFINITY, f64::min)
                }
            }
            Shape::Ball { radius } => (radius - norm_sq_sorted(x).sqrt()).abs(),
            Shape::Annulus { inner, outer } => {
                let r = norm_sq_sorted(x).sqrt();
                (r - inner).abs().min((outer - r).abs())
            }
            Shape::Rectangles { .. } => self.segments.iter().map(|s| s.distance(x)).fold(f64::INFINITY, f64::min),
        }
    }

    /// Half-widths of the smallest origin-centred box containing the domain.
    pub fn bounding_half_widths(&self) -> Vec<f64> {
        match &self.shape {
            Shape::Cube { half_width } => vec![*half_width; self.n],
            Shape::Ball { radius } => vec![*radius; self.n],
            Shape::Annulus { outer, .. } => vec![*outer; self.n],
            Shape::Rectangles { half_extents } => vec![
                half_extents.iter().map(|r| r[0]).fold(0.0, f64::max),
                half_extents.iter().map(|r| r[1]).fold(0.0, f64::max),
            ],
        }
    }

    pub fn bounding_box_volume(&self) -> f64 {
        self.bounding_half_widths().iter().map(|w| 2.0 * w).product()
    }

    /// Exact volume.
    pub fn volume(&self) -> f64 {
        let unit_ball = if self.n == 2 { std::f64::consts::PI } else { 4.0 / 3.0 * std::f64::consts::PI };
        match &self.shape {
            Shape::Cube { half_width } => (2.0 * half_width).powi(self.n as i32),
            Shape::Ball { radius } => unit_ball * radius.powi(self.n as i32),
            Shape::Annulus { inner, outer } => unit_ball * (outer.powi(self.n as i32) - inner.powi(self.n as i32)),
            Shape::Rectangles { half_extents } => 4.0 * quadrant_staircase_area(half_extents),
        }
    }

    /// Smallest and largest `|x|` over the closed domain.
    pub fn radial_range(&self) -> (f64, f64) {
        match &self.shape {
            Shape::Cube { half_width } => (0.0, half_width * (self.n as f64).sqrt()),
            Shape::Ball { radius } => (0.0, *radius),
            Shape::Annulus { inner, outer } => (*inner, *outer),
            Shape::Rectangles { half_extents } => {
                (0.0, half_extents.iter().map(|r| r[0].hypot(r[1])).fold(0.0, f64::max))
            }
        }
    }
}

/// Area of `{x > 0, y > 0} ∩ ⋃ {x < a_i, y < b_i}`.
fn quadrant_staircase_area(rects: &[[f64; 2]]) -> f64 {
    let mut a: Vec<f64> = rects.iter().map(|r| r[0]).collect();
    a.sort_by(f64::total_cmp);
    a.dedup();
    let mut area = 0.0;
    let mut left = 0.0;
    for &right in &a {
        let height = rects.iter().filter(|r| r[0] >= right).map(|r| r[1]).fold(0.0, f64::max);
        area += (right - left) * height;
        left = right;
    }
    area
}

/// Rectangle edges with the parts inside other rectangles removed.
fn union_boundary(rects: &[[f64; 2]]) -> Vec<Segment> {
    let mut out = Vec::new();
    // axis 0: horizontal edges y = ±b spanning x ∈ [−a, a]; axis 1 mirrored.
    for axis in 0..2 {
        let (along, across) = (axis, 1 - axis);
        for r in rects {
            let half_len = r[along];
            let level = r[across];
            let covered = rects.iter().filter(|o| level < o[across]).map(|o| o[along]).fold(0.0, f64::max);
            if covered >= half_len {
                continue;
            }
            let pieces: Vec<(f64, f64)> = if covered > 0.0 {
                vec![(-half_len, -covered), (covered, half_len)]
            } else {
                vec![(-half_len, half_len)]
            };
            for side in [-1.0, 1.0] {
                for &(s, t) in &pieces {
                    let mut a = [0.0; 2];
                    let mut b = [0.0; 2];
                    a[along] = s;
                    b[along] = t;
                    a[across] = side * level;
                    b[across] = side * level;
                    out.push(Segment { a, b });
                }
            }
        }
    }
    out
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Centering {
    /// `x = (p + ½)h`: no point lies on a coordinate hyperplane.
    #[default]
    Cell,
    /// `x = p·h`: the usual finite-difference grid `h = side/(M+1)`.
    Vertex,
}

/// Grid points of a domain, indexed densely.
#[derive(Clone, Debug)]
pub struct InteriorIndex {
    n: usize,
    h: f64,
    centering: Centering,
    /// Integer multi-indices, `n` per point.
    points: Vec<i64>,
    lo: Vec<i64>,
    extent: Vec<usize>,
    lookup: Vec<u32>,
}

const ABSENT: u32 = u32::MAX;

pub fn discretize(domain: &DomainSpec, h: f64) -> Result<InteriorIndex> {
    discretize_with(domain, h, Centering::Cell)
}

/// Grid points strictly inside the domain. Points within `1e-9·h` of the
/// boundary count as boundary nodes and are dropped.
pub fn discretize_with(domain: &DomainSpec, h: f64, centering: Centering) -> Result<InteriorIndex> {
    if !(h.is_finite() && h > 0.0) {
        return Err(Error::InvalidDomain(format!("grid spacing must be positive, got {h}")));
    }
    let n = domain.dim();
    let half = domain.bounding_half_widths();
    let mut lo = Vec::with_capacity(n);
    let mut extent = Vec::with_capacity(n);
    for w in &half {
        let m = (w / h).ceil() as i64 + 1;
        lo.push(-m - 1);
        extent.push((2 * m + 3) as usize);
    }
    let total: usize = extent.iter().product();
    if total >= ABSENT as usize {
        return Err(Error::InvalidDomain(format!("grid with {total} candidate points is too large")));
    }
    let mut lookup = vec![ABSENT; total];
    let mut points = Vec::new();
    let margin = 1e-9 * h;
    let mut p = lo.clone();
    let mut x = vec![0.0; n];
    for flat in 0..total {
        let mut rem = flat;
        for i in 0..n {
            p[i] = lo[i] + (rem % extent[i]) as i64;
            rem /= extent[i];
            x[i] = coordinate(p[i], h, centering);
        }
        if domain.indicator(&x) && domain.distance_to_boundary(&x) > margin {
            lookup[flat] = (points.len() / n) as u32;
            points.extend_from_slice(&p);
        }
    }
    if points.is_empty() {
        return Err(Error::EmptyDiscretization(h));
    }
    Ok(InteriorIndex { n, h, centering, points, lo, extent, lookup })
}

/// The `M×M` finite-difference grid of the unit square `(−½, ½)²` at
/// `h = 1/(M+1)`: vertex-centred for odd `M`, cell-centred for even `M`.
pub fn unit_square_grid(m: usize) -> Result<InteriorIndex> {
    let centering = if m % 2 == 1 { Centering::Vertex } else { Centering::Cell };
    discretize_with(&DomainSpec::square(0.5)?, 1.0 / (m as f64 + 1.0), centering)
}

fn coordinate(p: i64, h: f64, centering: Centering) -> f64 {
    match centering {
        // (2p+1)·h/2 keeps x(−p−1) = −x(p) bit for bit.
        Centering::Cell => (2 * p + 1) as f64 * (0.5 * h),
        Centering::Vertex => p as f64 * h,
    }
}

impl InteriorIndex {
    pub fn len(&self) -> usize {
        self.points.len() / self.n
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn centering(&self) -> Centering {
        self.centering
    }

    pub fn point(&self, i: usize) -> &[i64] {
        &self.points[i * self.n..(i + 1) * self.n]
    }

    pub fn coords(&self, i: usize) -> Vec<f64> {
        self.point(i).iter().map(|&p| coordinate(p, self.h, self.centering)).collect()
    }

    pub fn index_of(&self, p: &[i64]) -> Option<usize> {
        let mut flat = 0usize;
        let mut stride = 1usize;
        for i in 0..self.n {
            let off = p[i] - self.lo[i];
            if off < 0 || off as usize >= self.extent[i] {
                return None;
            }
            flat += off as usize * stride;
            stride *= self.extent[i];
        }
        match self.lookup[flat] {
            ABSENT => None,
            v => Some(v as usize),
        }
    }

    /// Neighbour of point `i` one step along `axis` in direction `step` (±1).
    pub fn neighbor(&self, i: usize, axis: usize, step: i64) -> Option<usize> {
        let mut p = self.point(i).to_vec();
        p[axis] += step;
        self.index_of(&p)
    }

    /// Cell-counting volume estimate `N·hⁿ`.
    pub fn volume_estimate(&self) -> f64 {
        self.len() as f64 * self.h.powi(self.n as i32)
    }
}

/// `perm[p] = index_of(g⁻¹·x_p)`, so `(T(g)v)[p] = v[perm[p]]` realises
/// `T(g)φ(x) = φ(g⁻¹x)`. With this convention `T(g)T(k) = T(gk)`, i.e.
/// `perm_{gk}[p] = perm_k[perm_g[p]]`.
pub fn action_permutation(interior: &InteriorIndex, g: &OrthogonalElement) -> Result<Vec<usize>> {
    if g.dim() != interior.dim() {
        return Err(Error::InvalidElement(format!(
            "element acts on R^{} but the grid lives in R^{}",
            g.dim(),
            interior.dim()
        )));
    }
    let inv = g.inverse();
    let cell = interior.centering == Centering::Cell;
    (0..interior.len())
        .map(|p| {
            let q = inv.apply_index(interior.point(p), cell);
            interior.index_of(&q).ok_or_else(|| Error::GridNotClosed(format!("{:?}", g.matrix())))
        })
        .collect()
}

/// Permutations for every element of `group`, in element order.
pub fn group_permutations(interior: &InteriorIndex, group: &FiniteGroup) -> Result<Vec<Vec<usize>>> {
    group.elements().iter().map(|g| action_permutation(interior, g)).collect()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct InvarianceReport {
    pub grid_points: usize,
    pub random_samples: u64,
    pub violations: u64,
}

impl InvarianceReport {
    pub fn holds(&self) -> bool {
        self.violations == 0
    }
}

/// Checks `indicator(gx) = indicator(x)` on the grid points and on random
/// samples of a box slightly larger than the domain.
pub fn check_invariance(
    domain: &DomainSpec,
    group: &FiniteGroup,
    interior: Option<&InteriorIndex>,
    samples: u64,
    seed: u64,
) -> Result<InvarianceReport> {
    if group.dim() != domain.dim() {
        return Err(Error::InvalidDomain(format!(
            "group acts on R^{} but the domain lives in R^{}",
            group.dim(),
            domain.dim()
        )));
    }
    let broken = |x: &[f64]| {
        let inside = domain.indicator(x);
        group.elements().iter().any(|g| domain.indicator(&g.apply(x)) != inside)
    };
    let mut violations = 0;
    let mut grid_points = 0;
    if let Some(grid) = interior {
        grid_points = grid.len();
        violations += (0..grid.len()).filter(|&i| broken(&grid.coords(i))).count() as u64;
    }
    let hi: Vec<f64> = domain.bounding_half_widths().iter().map(|w| 1.1 * w).collect();
    let lo: Vec<f64> = hi.iter().map(|w| -w).collect();
    violations += count_hits(samples, seed, |rng| broken(&uniform_in_box(rng, &lo, &hi)));
    Ok(InvarianceReport { grid_points, random_samples: samples, violations })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum TubeMethod {
    FineGrid,
    MonteCarlo,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TubeEstimate {
    pub rho: f64,
    pub volume: f64,
    pub stderr: f64,
    pub samples: u64,
    pub method: TubeMethod,
}

fn check_radius(rho: f64) -> Result<()> {
    if rho.is_finite() && rho >= 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("tube radius must be finite and non-negative, got {rho}")))
    }
}

/// Monte Carlo estimate of `vol{x ∈ ℝⁿ : dist(x, ∂X) < ρ}` over the bounding
/// box grown by `ρ`.
pub fn boundary_tube_volume(domain: &DomainSpec, rho: f64, samples: u64, seed: u64) -> Result<TubeEstimate> {
    check_radius(rho)?;
    if rho == 0.0 {
        return Ok(TubeEstimate { rho, volume: 0.0, stderr: 0.0, samples, method: TubeMethod::MonteCarlo });
    }
    let hi: Vec<f64> = domain.bounding_half_widths().iter().map(|w| w + rho).collect();
    let lo: Vec<f64> = hi.iter().map(|w| -w).collect();
    let box_volume: f64 = hi.iter().map(|w| 2.0 * w).product();
    let hits = count_hits(samples, seed, |rng| domain.distance_to_boundary(&uniform_in_box(rng, &lo, &hi)) < rho);
    let est = HitEstimate::new(hits, samples, box_volume);
    Ok(TubeEstimate { rho, volume: est.value, stderr: est.stderr, samples, method: TubeMethod::MonteCarlo })
}

/// Midpoint-rule version of [`boundary_tube_volume`] on cells of side `spacing`.
pub fn boundary_tube_volume_grid(domain: &DomainSpec, rho: f64, spacing: f64) -> Result<TubeEstimate> {
    check_radius(rho)?;
    if !(spacing.is_finite() && spacing > 0.0) {
        return Err(Error::InvalidParameter(format!("spacing must be positive, got {spacing}")));
    }
    let n = domain.dim();
    let cells: Vec<usize> =
        domain.bounding_half_widths().iter().map(|w| (2.0 * (w + rho) / spacing).ceil() as usize).collect();
    let lo: Vec<f64> = cells.iter().map(|&c| -(c as f64) * spacing / 2.0).collect();
    let total: usize = cells.iter().product();
    let mut x = vec![0.0; n];
    let mut hits = 0u64;
    for flat in 0..total {
        let mut rem = flat;
        for i in 0..n {
            x[i] = lo[i] + ((rem % cells[i]) as f64 + 0.5) * spacing;
            rem /= cells[i];
        }
        if domain.distance_to_boundary(&x) < rho {
            hits += 1;
        }
    }
    Ok(TubeEstimate {
        rho,
        volume: hits as f64 * spacing.powi(n as i32),
        stderr: 0.0,
        samples: total as u64,
        method: TubeMethod::FineGrid,
    })
}

/// Monte Carlo estimate of `vol{x ∈ X : dist(x, Σ) < r}` where `Σ` is the
/// union of the fixed subspaces of the non-identity elements.
pub fn fixed_set_tube_volume(
    domain: &DomainSpec,
    group: &FiniteGroup,
    r: f64,
    samples: u64,
    seed: u64,
) -> Result<TubeEstimate> {
    if group.order() == 1 {
        return Err(Error::TrivialGroup);
    }
    if group.dim() != domain.dim() {
        return Err(Error::InvalidDomain(format!(
            "group acts on R^{} but the domain lives in R^{}",
            group.dim(),
            domain.dim()
        )));
    }
    check_radius(r)?;
    let fixed: Vec<Vec<Vec<f64>>> = all_fixed_point_data(group).into_iter().map(|f| f.fixed_subspace).collect();
    let dist_sq = |x: &[f64], basis: &[Vec<f64>]| {
        let mut res = x.to_vec();
        for b in basis {
            let c: f64 = b.iter().zip(x).map(|(u, v)| u * v).sum();
            for (ri, bi) in res.iter_mut().zip(b) {
                *ri -= c * bi;
            }
        }
        res.iter().map(|v| v * v).sum::<f64>()
    };
    let hi = domain.bounding_half_widths();
    let lo: Vec<f64> = hi.iter().map(|w| -w).collect();
    let box_volume = domain.bounding_box_volume();
    let hits = count_hits(samples, seed, |rng| {
        let x = uniform_in_box(rng, &lo, &hi);
        domain.indicator(&x) && fixed.iter().any(|basis| dist_sq(&x, basis) < r * r)
    });
    let est = HitEstimate::new(hits, samples, box_volume);
    Ok(TubeEstimate { rho: r, volume: est.value, stderr: est.stderr, samples, method: TubeMethod::MonteCarlo })
}

/// Tube volumes and `volume/ρ` over a schedule of radii.
pub fn tube_ratio_table(
    domain: &DomainSpec,
    rhos: &[f64],
    samples: u64,
    seed: u64,
) -> Result<Vec<(TubeEstimate, f64)>> {
    rhos.iter()
        .map(|&rho| {
            let t = boundary_tube_volume(domain, rho, samples, seed)?;
            Ok((t, if rho > 0.0 { t.volume / rho } else { 0.0 }))
        })
        .collect()
}

/// A random point of the bounding box; used by property tests and the CLI.
pub fn random_point<R: Rng>(domain: &DomainSpec, rng: &mut R) -> Vec<f64> {
    let hi = domain.bounding_half_widths();
    let lo: Vec<f64> = hi.iter().map(|w| -w).collect();
    uniform_in_box(rng, &lo, &hi)
}

#[cfg(test)]
mod tests {
    use std::f64::consts::PI;

    use super::*;
    use crate::group_rep::{build_group, GroupFamily};

    fn d4() -> FiniteGroup {
        build_group(GroupFamily::Dihedral, 4, 2).unwrap()
    }

    #[test]
    fn square_half_width_one_spacing_one() {
        let sq = DomainSpec::square(1.0).unwrap();
        let grid = discretize(&sq, 1.0).unwrap();
        assert_eq!(grid.len(), 4);
        let mut coords: Vec<Vec<f64>> = (0..4).map(|i| grid.coords(i)).collect();
        coords.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert_eq!(coords, vec![vec![-0.5, -0.5], vec![-0.5, 0.5], vec![0.5, -0.5], vec![0.5, 0.5]]);
    }

    #[test]
    fn disk_at_half_spacing_has_twelve_cells() {
        // cell centres (±¼ or ±¾) with |x| < 1: (¼,¼) types and (¾,¼) types
        let disk = DomainSpec::ball(2, 1.0).unwrap();
        let grid = discretize(&disk, 0.5).unwrap();
        assert_eq!(grid.len(), 12);
    }

    #[test]
    fn disk_cell_count_converges_to_area() {
        let disk = DomainSpec::ball(2, 1.0).unwrap();
        let grid = discretize(&disk, 0.01).unwrap();
        assert!((grid.volume_estimate() - PI).abs() < 0.05 * PI);
    }

    #[test]
    fn unit_square_grid_sizes() {
        let sq = DomainSpec::square(0.5).unwrap();
        assert_eq!(discretize(&sq, 1.0 / 129.0).unwrap().len(), 128 * 128);
        assert_eq!(discretize_with(&sq, 1.0 / 64.0, Centering::Vertex).unwrap().len(), 63 * 63);
        assert_eq!(discretize_with(&sq, 0.25, Centering::Vertex).unwrap().len(), 9);
        for m in [1, 2, 3, 6, 7, 20] {
            assert_eq!(unit_square_grid(m).unwrap().len(), m * m);
        }
    }

    #[test]
    fn too_coarse_is_empty() {
        let disk = DomainSpec::ball(2, 0.1).unwrap();
        assert!(matches!(discretize_with(&disk, 1.0, Centering::Cell), Err(Error::EmptyDiscretization(_))));
    }

    #[test]
    fn minus_identity_swaps_opposite_cells() {
        let sq = DomainSpec::square(1.0).unwrap();
        let grid = discretize(&sq, 1.0).unwrap();
        let c2 = build_group(GroupFamily::Cyclic, 2, 2).unwrap();
        let perm = action_permutation(&grid, c2.element(1)).unwrap();
        for p in 0..4 {
            let x = grid.coords(p);
            let y = grid.coords(perm[p]);
            assert_eq!(y, vec![-x[0], -x[1]]);
        }
        assert_eq!(action_permutation(&grid, c2.element(0)).unwrap(), vec![0, 1, 2, 3]);
    }

    #[test]
    fn permutations_compose_like_the_group() {
        let g = d4();
        for centering in [Centering::Cell, Centering::Vertex] {
            let grid = discretize_with(&DomainSpec::ball(2, 1.0).unwrap(), 0.13, centering).unwrap();
            let perms = group_permutations(&grid, &g).unwrap();
            for a in 0..g.order() {
                for b in 0..g.order() {
                    let ab = &perms[g.mul(a, b)];
                    for p in 0..grid.len() {
                        assert_eq!(ab[p], perms[b][perms[a][p]]);
                    }
                }
            }
        }
    }

    #[test]
    fn rectangle_union_geometry() {
        // a plus sign: D4-invariant
        let plus = DomainSpec::rectangles(vec![[1.0, 0.25], [0.25, 1.0]]).unwrap();
        assert!((plus.volume() - (2.0 * 0.5 * 2.0 - 0.25)).abs() < 1e-15);
        assert!(plus.indicator(&[0.9, 0.0]) && !plus.indicator(&[0.9, 0.9]));
        // outside, between the arms
        assert!((plus.distance_to_boundary(&[0.5, 0.5]) - 0.25).abs() < 1e-15);
        // from the centre the nearest boundary points are the inner corners
        assert!((plus.distance_to_boundary(&[0.0, 0.0]) - 0.25 * 2f64.sqrt()).abs() < 1e-15);
        // the internal overlap edge y = 0.25, |x| < 0.25 is not boundary
        assert!(plus.distance_to_boundary(&[0.0, 0.25]) > 0.2);
        let report = check_invariance(&plus, &d4(), None, 20_000, 1).unwrap();
        assert!(report.holds());
        let bar = DomainSpec::rectangles(vec![[1.0, 0.25]]).unwrap();
        assert!(!check_invariance(&bar, &d4(), None, 20_000, 1).unwrap().holds());
    }

    #[test]
    fn closure_fails_for_a_non_invariant_grid() {
        let bar = DomainSpec::rectangles(vec![[1.0, 0.25]]).unwrap();
        let grid = discretize(&bar, 0.1).unwrap();
        assert!(matches!(group_permutations(&grid, &d4()), Err(Error::GridNotClosed(_))));
    }

    #[test]
    fn boundary_tubes() {
        let sq = DomainSpec::square(0.5).unwrap();
        let t = boundary_tube_volume(&sq, 0.01, 400_000, 11).unwrap();
        // exact: (1.02)² − (0.98)² minus the rounded outer corners 4ρ² − πρ²
        let exact = 1.02f64.powi(2) - 0.98f64.powi(2) - (4.0 - PI) * 1e-4;
        assert!((t.volume - exact).abs() < 3.0 * t.stderr, "{} vs {exact}", t.volume);
        let disk = DomainSpec::ball(2, 1.0).unwrap();
        let t = boundary_tube_volume(&disk, 0.01, 400_000, 12).unwrap();
        let exact = PI * (1.01f64.powi(2) - 0.99f64.powi(2));
        assert!((t.volume - exact).abs() < 3.0 * t.stderr);
        assert_eq!(boundary_tube_volume(&disk, 0.0, 10, 1).unwrap().volume, 0.0);
        let g = boundary_tube_volume_grid(&sq, 0.01, 0.001).unwrap();
        assert!((g.volume - exact_square_tube(0.01)).abs() < 5e-4);
    }

    fn exact_square_tube(rho: f64) -> f64 {
        (1.0 + 2.0 * rho).powi(2) - (1.0 - 2.0 * rho).powi(2) - (4.0 - PI) * rho * rho
    }

    #[test]
    fn fixed_set_tubes() {
        let disk = DomainSpec::ball(2, 1.0).unwrap();
        let c2 = build_group(GroupFamily::Cyclic, 2, 2).unwrap();
        let t = fixed_set_tube_volume(&disk, &c2, 0.1, 400_000, 5).unwrap();
        assert!((t.volume - PI * 0.01).abs() < 3.0 * t.stderr);
        let d1 = build_group(GroupFamily::Dihedral, 1, 2).unwrap();
        let sq = DomainSpec::square(0.5).unwrap();
        let t = fixed_set_tube_volume(&sq, &d1, 0.05, 400_000, 6).unwrap();
        assert!((t.volume - 0.1).abs() < 3.0 * t.stderr);
        let t = fixed_set_tube_volume(&sq, &d1, 10.0, 10_000, 6).unwrap();
        assert!((t.volume - 1.0).abs() < 1e-12);
        assert!(matches!(fixed_set_tube_volume(&sq, &FiniteGroup::trivial(2), 0.1, 10, 1), Err(Error::TrivialGroup)));
    }

    #[test]
    fn domain_json_round_trip() {
        let d = DomainSpec::annulus(3, 0.25, 1.0).unwrap();
        let s = serde_json::to_string(&d).unwrap();
        assert_eq!(serde_json::from_str::<DomainSpec>(&s).unwrap(), d);
        assert!(serde_json::from_str::<DomainSpec>(r#"{"n":2,"shape":"ball","radius":-1}"#).is_err());
    }
}
