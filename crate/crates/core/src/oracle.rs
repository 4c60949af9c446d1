//! Closed-form per-character eigenvalue counts for the Dirichlet Laplacian
//! on a cube `(−w, w)ⁿ`, continuum or five-point discretized.
//!
//! Eigenfunctions are products `Π f_{j_i}(x_i)` with `f_j(−t) = (−1)^{j+1} f_j(t)`.
//! A signed permutation maps such a product to ± another one, so the span of
//! all index permutations of `J` is invariant and its character is a sum of
//! signs over the fixed indices. Multiplicities then follow from character
//! inner products.

use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::group_rep::{CharacterTable, FiniteGroup};
use crate::lattice_domain::{DomainSpec, Shape};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case", tag = "spectrum")]
pub enum ModeSpectrum {
    /// `π²|J|²/(2w)²`
    Continuum,
    /// `(4/h²) Σ sin²(j_i π h/2)` with `h = 2w/(m+1)` and `1 ≤ j_i ≤ m`.
    Discrete { m: usize },
}

/// Sorted eigenvalues, each with the number of copies per character.
#[derive(Clone, Debug)]
pub struct ModeOracle {
    values: Vec<f64>,
    /// `cumulative[i][χ]`: copies of χ among `values[..=i]`.
    cumulative: Vec<Vec<usize>>,
    num_irreps: usize,
    lambda_max: f64,
}

fn half_width(domain: &DomainSpec) -> Result<f64> {
    match domain.shape() {
        Shape::Cube { half_width } => Ok(*half_width),
        _ => Err(Error::OracleUnavailable(format!("domain {}", domain.name()))),
    }
}

/// Distinct permutations of a sorted index tuple.
fn permutations(sorted: &[usize]) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = sorted.to_vec();
    loop {
        out.push(cur.clone());
        // next lexicographic permutation
        let Some(i) = (0..cur.len().saturating_sub(1)).rev().find(|&i| cur[i] < cur[i + 1]) else {
            break;
        };
        let j = (i + 1..cur.len()).rev().find(|&j| cur[j] > cur[i]).unwrap();
        cur.swap(i, j);
        cur[i + 1..].reverse();
    }
    out
}

/// Non-decreasing tuples in `[lo, hi]ⁿ` accepted by `keep`. The eigenvalue
/// grows in every index, so a rejected minimal completion ends the branch.
fn sorted_tuples<F: FnMut(&[usize]) -> bool>(
    prefix: &mut Vec<usize>,
    n: usize,
    lo: usize,
    hi: usize,
    keep: &mut F,
    out: &mut Vec<Vec<usize>>,
) {
    if prefix.len() == n {
        out.push(prefix.clone());
        return;
    }
    for j in lo..=hi {
        let mut probe = prefix.clone();
        probe.resize(n, j);
        if !keep(&probe) {
            break;
        }
        prefix.push(j);
        sorted_tuples(prefix, n, j, hi, keep, out);
        prefix.pop();
    }
}

fn eigenvalue(j: &[usize], spectrum: ModeSpectrum, w: f64) -> f64 {
    let l = 2.0 * w;
    match spectrum {
        ModeSpectrum::Continuum => j.iter().map(|&k| (k as f64 * PI / l).powi(2)).sum(),
        ModeSpectrum::Discrete { m } => {
            let h = l / (m as f64 + 1.0);
            j.iter().map(|&k| 4.0 / (h * h) * (k as f64 * PI * h / 2.0).sin().powi(2)).sum()
        }
    }
}

/// Oracle for the Laplacian on `domain` (a cube), all eigenvalues ≤ `lambda_max`.
pub fn cube_laplacian_oracle(
    domain: &DomainSpec,
    group: &FiniteGroup,
    table: &CharacterTable,
    spectrum: ModeSpectrum,
    lambda_max: f64,
) -> Result<ModeOracle> {
    let w = half_width(domain)?;
    let n = domain.dim();
    if group.dim() != n {
        return Err(Error::InvalidParameter(format!(
            "oracle: group acts in {} dimensions, domain has {n}",
            group.dim()
        )));
    }
    let j_max = match spectrum {
        ModeSpectrum::Continuum => ((lambda_max.max(0.0)).sqrt() * 2.0 * w / PI).floor() as usize,
        ModeSpectrum::Discrete { m } => m,
    };
    let order = group.order() as f64;
    let mut tuples = Vec::new();
    sorted_tuples(&mut vec![], n, 1, j_max, &mut |t| eigenvalue(t, spectrum, w) <= lambda_max, &mut tuples);
    let mut orbits: Vec<(f64, Vec<usize>)> = Vec::with_capacity(tuples.len());
    for tuple in tuples {
        let perms = permutations(&tuple);
        let mut copies = vec![0usize; table.num_irreps()];
        for (chi, c) in copies.iter_mut().enumerate() {
            let mut acc = 0.0;
            for (g, el) in group.elements().iter().enumerate() {
                let mut trace = 0i64;
                for jp in &perms {
                    if (0..n).all(|i| jp[el.perm()[i]] == jp[i]) {
                        let flips = (0..n).filter(|&i| el.signs()[i] < 0 && jp[i] % 2 == 0).count();
                        trace += if flips % 2 == 0 { 1 } else { -1 };
                    }
                }
                acc += (table.value(chi, g).conj() * trace as f64).re;
            }
            let mult = acc / order;
            let rounded = mult.round();
            if (mult - rounded).abs() > 1e-9 || rounded < 0.0 {
                return Err(Error::InvalidParameter(format!(
                    "oracle: non-integral multiplicity {mult} for character {chi}"
                )));
            }
            *c = rounded as usize * table.dim(chi);
        }
        orbits.push((eigenvalue(&tuple, spectrum, w), copies));
    }
    orbits.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut cumulative = Vec::with_capacity(orbits.len());
    let mut acc = vec![0usize; table.num_irreps()];
    for (_, c) in &orbits {
        for (a, v) in acc.iter_mut().zip(c) {
            *a += v;
        }
        cumulative.push(acc.clone());
    }
    Ok(ModeOracle {
        values: orbits.into_iter().map(|o| o.0).collect(),
        cumulative,
        num_irreps: table.num_irreps(),
        lambda_max,
    })
}

impl ModeOracle {
    pub fn num_irreps(&self) -> usize {
        self.num_irreps
    }

    pub fn lambda_max(&self) -> f64 {
        self.lambda_max
    }

    /// Distinct index orbits, ascending (equal eigenvalues may repeat).
    pub fn orbit_values(&self) -> &[f64] {
        &self.values
    }

    /// `N_χ(λ)`, eigenvalues `≤ λ` with multiplicity.
    pub fn count(&self, chi: usize, lambda: f64) -> Result<usize> {
        if lambda > self.lambda_max {
            return Err(Error::InvalidParameter(format!(
                "oracle: enumerated up to {}, asked for {lambda}",
                self.lambda_max
            )));
        }
        Ok(match self.values.partition_point(|&v| v <= lambda) {
            0 => 0,
            k => self.cumulative[k - 1][chi],
        })
    }

    /// Eigenvalues of character χ up to the enumeration limit, with
    /// multiplicity (each one repeated once per copy).
    pub fn values(&self, chi: usize) -> Vec<f64> {
        let mut out = Vec::new();
        let mut prev = 0;
        for (v, c) in self.values.iter().zip(&self.cumulative) {
            out.extend(std::iter::repeat_n(*v, c[chi] - prev));
            prev = c[chi];
        }
        out
    }

    pub fn total(&self, lambda: f64) -> Result<usize> {
        (0..self.num_irreps).map(|c| self.count(c, lambda)).sum()
    }
}
