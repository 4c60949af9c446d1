//! Phase-space quantities of the Weyl law: the constant γ, the volume of
//! `W_λ = {a_λ < 0}`, the remainder set `RV_{c,λ}`, and power-law fits.
//!
//! Nothing here takes a group. The group enters only through the factors
//! `d_χ²/|G|` attached by [`WeylPrediction::reduced`].

use std::f64::consts::{PI, TAU};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::group_rep::CharacterTable;
use crate::lattice_domain::{norm_sq_sorted, DomainSpec};
use crate::mc::{count_hits, uniform_in_box, uniform_on_sphere, HitEstimate};
use crate::operator_disc::PrincipalSymbol;

/// Product quadrature on `X × S^{n−1}`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Quadrature {
    /// Largest allowed cell width of the spatial grid.
    pub spacing: f64,
    /// Angular nodes: trapezoid points on S¹, or random directions on S².
    pub angular_nodes: usize,
    /// Seed of the S² directions (unused in 2D).
    pub seed: u64,
}

impl Quadrature {
    pub fn new(spacing: f64, angular_nodes: usize, seed: u64) -> Result<Self> {
        if !(spacing > 0.0) || angular_nodes == 0 {
            return Err(Error::InvalidParameter(format!(
                "weyl_volume: quadrature needs spacing > 0 and at least one node (got {spacing}, {angular_nodes})"
            )));
        }
        Ok(Self { spacing, angular_nodes, seed })
    }

    fn doubled(&self) -> Self {
        Self { angular_nodes: 2 * self.angular_nodes, ..*self }
    }
}

fn sphere_area(n: usize) -> f64 {
    match n {
        2 => TAU,
        3 => 4.0 * PI,
        _ => unreachable!("domains are 2D or 3D"),
    }
}

fn directions(n: usize, k: usize, seed: u64) -> Vec<Vec<f64>> {
    if n == 2 {
        (0..k)
            .map(|j| {
                let t = TAU * j as f64 / k as f64;
                vec![t.cos(), t.sin()]
            })
            .collect()
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..k).map(|_| uniform_on_sphere(&mut rng, n)).collect()
    }
}

/// `∫_X ∫_{S^{n−1}} f(x, a_{2m}(x, η)) dη dx` by cell counting times the
/// angular rule. Returns the integral and the number of integrand calls.
fn phase_integral<F>(domain: &DomainSpec, symbol: &PrincipalSymbol, quad: &Quadrature, f: F) -> Result<(f64, u64)>
where
    F: Fn(f64) -> f64 + Sync,
{
    let n = domain.dim();
    let half = domain.bounding_half_widths();
    let cells: Vec<usize> = half.iter().map(|w| ((2.0 * w / quad.spacing).ceil() as usize).max(1)).collect();
    let widths: Vec<f64> = half.iter().zip(&cells).map(|(w, &c)| 2.0 * w / c as f64).collect();
    let cell_volume: f64 = widths.iter().product();
    let dirs = directions(n, quad.angular_nodes, quad.seed);
    let weight = sphere_area(n) / dirs.len() as f64;
    let total_cells: usize = cells.iter().product();
    let rows = cells[0];
    let per_row = total_cells / rows;

    let partial: Vec<Result<(f64, u64)>> = (0..rows)
        .into_par_iter()
        .map(|i0| {
            let mut x = vec![0.0; n];
            let mut sum = 0.0;
            let mut calls = 0u64;
            for rest in 0..per_row {
                x[0] = -half[0] + (i0 as f64 + 0.5) * widths[0];
                let mut r = rest;
                for d in 1..n {
                    x[d] = -half[d] + ((r % cells[d]) as f64 + 0.5) * widths[d];
                    r /= cells[d];
                }
                if !domain.indicator(&x) {
                    continue;
                }
                let mut inner = 0.0;
                for eta in &dirs {
                    let a = symbol.evaluate(&x, eta);
                    if !(a > 0.0) {
                        return Err(Error::SymbolNotElliptic(a));
                    }
                    inner += f(a);
                }
                calls += dirs.len() as u64;
                sum += inner;
            }
            Ok((sum, calls))
        })
        .collect();
    let mut total = 0.0;
    let mut calls = 0;
    for p in partial {
        let (s, c) = p?;
        total += s;
        calls += c;
    }
    Ok((total * weight * cell_volume, calls))
}

fn check_elliptic(domain: &DomainSpec, symbol: &PrincipalSymbol) -> Result<f64> {
    let iota = symbol.lower_bound(domain);
    if !(iota > 0.0) {
        return Err(Error::SymbolNotElliptic(iota));
    }
    Ok(iota)
}

/// Leading Weyl coefficient with per-character factors.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct WeylPrediction {
    pub gamma: f64,
    /// `n / 2m`
    pub exponent: f64,
    /// `d_χ² / |G|` per character; `[1]` before a table is attached.
    pub factors: Vec<f64>,
    pub labels: Vec<String>,
    pub angular_nodes: usize,
    /// Relative change of γ when the angular node count is doubled.
    pub doubling_change: f64,
}

impl WeylPrediction {
    /// Attach the factors `d_χ²/|G|` of a character table.
    pub fn reduced(&self, table: &CharacterTable) -> Self {
        let order = table.group_order() as f64;
        Self {
            factors: table.dims().iter().map(|&d| (d * d) as f64 / order).collect(),
            labels: table.labels().to_vec(),
            ..self.clone()
        }
    }

    pub fn total(&self, lambda: f64) -> f64 {
        self.gamma * lambda.powf(self.exponent)
    }
}

/// `γ = 1/(n(2π)ⁿ) ∫_X ∫_{S^{n−1}} a_{2m}(x, η)^{−n/2m} dη dx`.
pub fn gamma(domain: &DomainSpec, symbol: &PrincipalSymbol, quad: &Quadrature) -> Result<WeylPrediction> {
    check_elliptic(domain, symbol)?;
    let n = domain.dim();
    let p = -(n as f64) / symbol.degree() as f64;
    let norm = 1.0 / (n as f64 * TAU.powi(n as i32));
    let (coarse, _) = phase_integral(domain, symbol, quad, |a| a.powf(p))?;
    let (fine, _) = phase_integral(domain, symbol, &quad.doubled(), |a| a.powf(p))?;
    let gamma = norm * coarse;
    Ok(WeylPrediction {
        gamma,
        exponent: -p,
        factors: vec![1.0],
        labels: vec!["trivial".into()],
        angular_nodes: quad.angular_nodes,
        doubling_change: ((fine - coarse) / coarse).abs(),
    })
}

/// `(d_χ²/|G|) γ λ^{n/2m}`.
pub fn predicted_count(pred: &WeylPrediction, chi: usize, lambda: f64) -> f64 {
    if lambda <= 0.0 {
        return 0.0;
    }
    pred.factors[chi] * pred.total(lambda)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum VolumeMethod {
    ClosedRadial,
    MonteCarlo,
}

impl std::fmt::Display for VolumeMethod {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::ClosedRadial => "closed-radial",
            Self::MonteCarlo => "monte-carlo",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct VolumeEstimate {
    pub value: f64,
    pub stderr: f64,
    /// MC samples, or integrand evaluations for the quadrature.
    pub samples: u64,
    pub seed: u64,
    pub method: VolumeMethod,
}

impl VolumeEstimate {
    fn from_hits(est: HitEstimate, seed: u64) -> Self {
        Self { value: est.value, stderr: est.stderr, samples: est.samples, seed, method: VolumeMethod::MonteCarlo }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum VolumeMode {
    ClosedRadial(Quadrature),
    /// Hit-or-miss in `bbox(X) × [−R, R]ⁿ` with `R = c1·λ^{1/2m}`.
    MonteCarlo {
        samples: u64,
        seed: u64,
        c1: f64,
    },
}

fn check_lambda(lambda: f64) -> Result<()> {
    if !(lambda >= 1.0) || !lambda.is_finite() {
        return Err(Error::InvalidParameter(format!("weyl_volume: lambda must be ≥ 1, got {lambda}")));
    }
    Ok(())
}

/// Smallest ξ-radius containing `W_λ`: `(λ/ι)^{1/2m}`.
pub fn w_required_radius(domain: &DomainSpec, symbol: &PrincipalSymbol, lambda: f64) -> Result<f64> {
    let iota = check_elliptic(domain, symbol)?;
    Ok((lambda / iota).powf(1.0 / symbol.degree() as f64))
}

/// `vol W_λ` over `X × ℝⁿ`.
pub fn vol_w_lambda(
    domain: &DomainSpec,
    symbol: &PrincipalSymbol,
    lambda: f64,
    mode: &VolumeMode,
) -> Result<VolumeEstimate> {
    vol_w(domain, symbol, lambda, mode, false)
}

/// `vol (W_λ ∩ {|ξ| > 1})`.
pub fn vol_w_lambda_outer(
    domain: &DomainSpec,
    symbol: &PrincipalSymbol,
    lambda: f64,
    mode: &VolumeMode,
) -> Result<VolumeEstimate> {
    vol_w(domain, symbol, lambda, mode, true)
}

fn vol_w(
    domain: &DomainSpec,
    symbol: &PrincipalSymbol,
    lambda: f64,
    mode: &VolumeMode,
    outer_only: bool,
) -> Result<VolumeEstimate> {
    check_lambda(lambda)?;
    let n = domain.dim();
    let nf = n as f64;
    let two_m = symbol.degree() as f64;
    match *mode {
        VolumeMode::ClosedRadial(quad) => {
            check_elliptic(domain, symbol)?;
            // In the direction η the set is the segment |ξ| < (λ/a(x,η))^{1/2m}.
            let (value, calls) = phase_integral(domain, symbol, &quad, |a| {
                let r = (lambda / a).powf(1.0 / two_m);
                let inner = if outer_only { r.min(1.0) } else { 0.0 };
                (r.powi(n as i32) - inner.powi(n as i32)) / nf
            })?;
            Ok(VolumeEstimate {
                value,
                stderr: 0.0,
                samples: calls,
                seed: quad.seed,
                method: VolumeMethod::ClosedRadial,
            })
        }
        VolumeMode::MonteCarlo { samples, seed, c1 } => {
            let required = w_required_radius(domain, symbol, lambda)?;
            let radius = c1 * lambda.powf(1.0 / two_m);
            if !(radius >= required) {
                return Err(Error::BoundingRadiusTooSmall { given: radius, required });
            }
            let (lo, hi, region) = phase_box(domain, radius);
            let hits = count_hits(samples, seed, |rng| {
                let z = uniform_in_box(rng, &lo, &hi);
                let (x, xi) = z.split_at(n);
                if !domain.indicator(x) {
                    return false;
                }
                if outer_only && norm_sq_sorted(xi) <= 1.0 {
                    return false;
                }
                a_lambda(symbol, x, xi, lambda) < 0.0
            });
            Ok(VolumeEstimate::from_hits(HitEstimate::new(hits, samples, region), seed))
        }
    }
}

/// `bbox(X) × [−R, R]ⁿ` as corner vectors plus its volume.
fn phase_box(domain: &DomainSpec, radius: f64) -> (Vec<f64>, Vec<f64>, f64) {
    let half = domain.bounding_half_widths();
    let n = half.len();
    let mut lo: Vec<f64> = half.iter().map(|w| -w).collect();
    let mut hi = half.clone();
    lo.extend(std::iter::repeat_n(-radius, n));
    hi.extend(std::iter::repeat_n(radius, n));
    let region = domain.bounding_box_volume() * (2.0 * radius).powi(n as i32);
    (lo, hi, region)
}

/// `a_λ(x, ξ) = (1 + λ|ξ|^{−2m})^{−1} (1 − λ/a_{2m}(x, ξ))`, written as
/// `(|ξ|^{2m} − λ/s)/(|ξ|^{2m} + λ)` with `s = a_{2m}(x, ξ/|ξ|)`; the second
/// form extends continuously to ξ = 0.
pub fn a_lambda(symbol: &PrincipalSymbol, x: &[f64], xi: &[f64], lambda: f64) -> f64 {
    let r2 = norm_sq_sorted(xi);
    let r2m = r2.powi(symbol.m() as i32);
    let s = if r2 > 0.0 {
        let r = r2.sqrt();
        let eta: Vec<f64> = xi.iter().map(|v| v / r).collect();
        symbol.evaluate(x, &eta)
    } else {
        symbol.on_sphere(x)
    };
    (r2m - lambda / s) / (r2m + lambda)
}

/// Weights and parameters of the remainder set.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SymbolWeights {
    delta: f64,
    c: f64,
    c0: f64,
}

impl SymbolWeights {
    pub fn new(delta: f64, c: f64, c0: f64) -> Result<Self> {
        if !(delta > 0.25 && delta < 0.5) {
            return Err(Error::InvalidParameter(format!("weyl_volume: delta must lie in (1/4, 1/2), got {delta}")));
        }
        if !(c > 0.0) || !(c0 > 0.0) {
            return Err(Error::InvalidParameter(format!("weyl_volume: c and C0 must be positive, got {c}, {c0}")));
        }
        Ok(Self { delta, c, c0 })
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn omega(&self) -> f64 {
        0.5 - self.delta
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    pub fn c0(&self) -> f64 {
        self.c0
    }

    /// `(1 + |x|² + |ξ|²)^{−1/2}`
    pub fn h(&self, x: &[f64], xi: &[f64]) -> f64 {
        (1.0 + norm_sq_sorted(x) + norm_sq_sorted(xi)).sqrt().recip()
    }

    /// `|ξ|^{−1}`, infinite at ξ = 0.
    pub fn d(&self, xi: &[f64]) -> f64 {
        norm_sq_sorted(xi).sqrt().recip()
    }

    /// `c(h^{δ−ω} + d)`
    pub fn threshold(&self, x: &[f64], xi: &[f64]) -> f64 {
        self.c * (self.h(x, xi).powf(self.delta - self.omega()) + self.d(xi))
    }

    pub fn in_w(&self, symbol: &PrincipalSymbol, x: &[f64], xi: &[f64], lambda: f64) -> bool {
        a_lambda(symbol, x, xi, lambda) < 0.0
    }

    /// `A_{c,λ}`: `a_λ < c(h^{δ−ω} + d)`.
    pub fn in_a(&self, symbol: &PrincipalSymbol, x: &[f64], xi: &[f64], lambda: f64) -> bool {
        a_lambda(symbol, x, xi, lambda) < self.threshold(x, xi)
    }

    /// `B_{c,λ}`, the complement of `A_{c,λ}`.
    pub fn in_b(&self, symbol: &PrincipalSymbol, x: &[f64], xi: &[f64], lambda: f64) -> bool {
        !self.in_a(symbol, x, xi, lambda)
    }

    /// `|a_λ| < c(h^{δ−ω} + d)`
    pub fn in_shell(&self, symbol: &PrincipalSymbol, x: &[f64], xi: &[f64], lambda: f64) -> bool {
        a_lambda(symbol, x, xi, lambda).abs() < self.threshold(x, xi)
    }

    /// `dist(x, ∂X) < √c (1 + |x|² + |ξ|²)^{−δ/2}`
    pub fn near_boundary(&self, domain: &DomainSpec, x: &[f64], xi: &[f64]) -> bool {
        domain.distance_to_boundary(x) < self.c.sqrt() * self.h(x, xi).powf(self.delta)
    }

    /// Membership in `RV_{c,λ}` for `x ∈ X`.
    pub fn in_rv(&self, domain: &DomainSpec, symbol: &PrincipalSymbol, x: &[f64], xi: &[f64], lambda: f64) -> bool {
        if !domain.indicator(x) {
            return false;
        }
        let a = a_lambda(symbol, x, xi, lambda);
        let t = self.threshold(x, xi);
        a.abs() < t || (a < t && self.near_boundary(domain, x, xi))
    }

    /// Smallest ξ-radius outside of which `A_{c,λ}` (hence `RV_{c,λ}`) is
    /// empty, found by bisection between an increasing lower bound of `a_λ`
    /// and a decreasing upper bound of the threshold.
    pub fn rv_required_radius(&self, domain: &DomainSpec, symbol: &PrincipalSymbol, lambda: f64) -> Result<f64> {
        let iota = check_elliptic(domain, symbol)?;
        let m = symbol.m() as i32;
        let e = self.delta - self.omega();
        let gap = |r: f64| {
            let r2m = (r * r).powi(m);
            (r2m - lambda / iota) / (r2m + lambda) - self.c * (r.powf(-e) + 1.0 / r)
        };
        let mut lo = 1e-12;
        let mut hi = (lambda / iota).powf(0.5 / m as f64).max(1.0);
        while gap(hi) < 0.0 {
            lo = hi;
            hi *= 2.0;
            if !hi.is_finite() {
                return Err(Error::InvalidParameter("weyl_volume: remainder set is unbounded".into()));
            }
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if gap(mid) < 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi - lo <= 1e-12 * hi {
                break;
            }
        }
        Ok(hi)
    }
}

/// Monte Carlo `vol RV_{c,λ}` in `bbox(X) × [−R, R]ⁿ`, `R = c1·λ^{1/2m}`.
pub fn vol_rv(
    domain: &DomainSpec,
    symbol: &PrincipalSymbol,
    weights: &SymbolWeights,
    lambda: f64,
    samples: u64,
    seed: u64,
    c1: f64,
) -> Result<VolumeEstimate> {
    rv_hits(domain, symbol, weights, lambda, samples, seed, c1, false)
}

/// Monte Carlo volume of the shell `|a_λ| < c(h^{δ−ω} + d)` alone, on the
/// same samples as [`vol_rv`].
pub fn vol_rv_shell(
    domain: &DomainSpec,
    symbol: &PrincipalSymbol,
    weights: &SymbolWeights,
    lambda: f64,
    samples: u64,
    seed: u64,
    c1: f64,
) -> Result<VolumeEstimate> {
    rv_hits(domain, symbol, weights, lambda, samples, seed, c1, true)
}

#[allow(clippy::too_many_arguments)]
fn rv_hits(
    domain: &DomainSpec,
    symbol: &PrincipalSymbol,
    weights: &SymbolWeights,
    lambda: f64,
    samples: u64,
    seed: u64,
    c1: f64,
    shell_only: bool,
) -> Result<VolumeEstimate> {
    check_lambda(lambda)?;
    let n = domain.dim();
    let required = weights.rv_required_radius(domain, symbol, lambda)?;
    let radius = c1 * lambda.powf(1.0 / symbol.degree() as f64);
    if !(radius >= required) {
        return Err(Error::BoundingRadiusTooSmall { given: radius, required });
    }
    let (lo, hi, region) = phase_box(domain, radius);
    let hits = count_hits(samples, seed, |rng| {
        let z = uniform_in_box(rng, &lo, &hi);
        let (x, xi) = z.split_at(n);
        if shell_only {
            domain.indicator(x) && weights.in_shell(symbol, x, xi, lambda)
        } else {
            weights.in_rv(domain, symbol, x, xi, lambda)
        }
    });
    Ok(VolumeEstimate::from_hits(HitEstimate::new(hits, samples, region), seed))
}

/// Least-squares line through `(log x, log y)`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FitResult {
    pub slope: f64,
    pub intercept: f64,
    /// Root mean square of the log residuals.
    pub residual: f64,
    pub used: usize,
    /// Indices skipped because `y ≤ 0` or not finite.
    pub dropped: Vec<usize>,
}

pub fn log_log_fit(xs: &[f64], ys: &[f64]) -> Result<FitResult> {
    if xs.len() != ys.len() {
        return Err(Error::InvalidParameter(format!(
            "weyl_volume: fit needs equal lengths, got {} and {}",
            xs.len(),
            ys.len()
        )));
    }
    let mut pts = Vec::new();
    let mut dropped = Vec::new();
    for (i, (&x, &y)) in xs.iter().zip(ys).enumerate() {
        if x > 0.0 && y > 0.0 && x.is_finite() && y.is_finite() {
            pts.push((x.ln(), y.ln()));
        } else {
            dropped.push(i);
        }
    }
    let k = pts.len();
    if k < 3 {
        return Err(Error::DegenerateFit(k));
    }
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / k as f64;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / k as f64;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    if !(sxx > 0.0) {
        return Err(Error::DegenerateFit(k));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss: f64 = pts.iter().map(|p| (p.1 - intercept - slope * p.0).powi(2)).sum();
    Ok(FitResult { slope, intercept, residual: (ss / k as f64).sqrt(), used: k, dropped })
}

/// Empirical remainder exponent from `|N_χ(λ) − predicted|`.
pub fn remainder_fit(lambdas: &[f64], deviations: &[f64]) -> Result<FitResult> {
    log_log_fit(lambdas, deviations)
}
