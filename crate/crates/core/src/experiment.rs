//! Configuration-driven runs: build the whole pipeline from one flat JSON
//! document, count per character, compare with the Weyl prediction, and write
//! `counts.csv`, `fits.csv` and `report.json`.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::group_rep::{build_group, character_table, CharacterTable, FiniteGroup, GroupFamily};
use crate::isotypic_solver::{isotypic_spectrum, SolverOptions, Spectrum, SymmetryAction};
use crate::lattice_domain::{discretize_with, group_permutations, Centering, DomainSpec, InteriorIndex, Shape};
use crate::linalg::lanczos::LanczosOptions;
use crate::linalg::skyline::count_below;
use crate::operator_disc::{assemble, Coefficient, OperatorKind, OperatorSpec, SparseSymmetric, DEFAULT_MAX_DIM};
use crate::oracle::{cube_laplacian_oracle, ModeSpectrum};
use crate::weyl_volume::{
    gamma, log_log_fit, predicted_count, vol_w_lambda, w_required_radius, Quadrature, VolumeMode, WeylPrediction,
};

/// Flat run description. Keys carry their units; seeds and tolerances have
/// no defaults.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub group_family: GroupFamily,
    pub group_k: usize,
    pub space_dim: usize,

    /// `cube`, `ball`, `annulus` or `rectangles`.
    pub domain_shape: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub domain_half_width_length: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub domain_radius_length: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub domain_inner_radius_length: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub domain_outer_radius_length: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub domain_half_extents_length: Option<Vec<[f64; 2]>>,

    pub operator: OperatorKind,
    /// `constant`, `quadratic` or `bump`; only for `div_a_grad`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coefficient: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coefficient_value: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coefficient_beta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coefficient_width_length: Option<f64>,

    pub h_length: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid_centering: Option<Centering>,

    pub lambda_min: f64,
    pub lambda_max: f64,
    pub lambda_points: usize,

    pub quadrature_spacing_length: f64,
    pub angular_nodes: usize,
    pub mc_samples: u64,
    pub seed: u64,

    /// Allowed `|N_emp/N_pred − 1|`.
    pub ratio_tolerance: f64,
    /// Ratios are only judged where `N_pred` reaches this value.
    pub min_predicted_count: f64,
    /// Upper bound on every fitted remainder exponent.
    pub remainder_slope_max: f64,

    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
}

fn config_err(msg: impl Into<String>) -> Error {
    Error::Config(msg.into())
}

fn need(v: Option<f64>, key: &str, shape: &str) -> Result<f64> {
    v.ok_or_else(|| config_err(format!("domain_shape {shape:?} needs {key}")))
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| config_err(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| config_err(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.h_length > 0.0) {
            return Err(config_err("h_length must be positive"));
        }
        if !(self.lambda_min >= 1.0) || !(self.lambda_max >= self.lambda_min) || !self.lambda_max.is_finite() {
            return Err(config_err("need 1 ≤ lambda_min ≤ lambda_max < ∞"));
        }
        if self.lambda_points < 2 {
            return Err(config_err("lambda schedule needs at least 2 points"));
        }
        if !(self.quadrature_spacing_length > 0.0) || self.angular_nodes == 0 {
            return Err(config_err("quadrature needs a positive spacing and angular nodes"));
        }
        if !(self.ratio_tolerance > 0.0) || !(self.min_predicted_count >= 0.0) || !self.remainder_slope_max.is_finite()
        {
            return Err(config_err("tolerances must be finite and positive"));
        }
        self.domain()?;
        self.operator_spec()?;
        self.group()?;
        Ok(())
    }

    pub fn domain(&self) -> Result<DomainSpec> {
        let n = self.space_dim;
        let s = self.domain_shape.as_str();
        let used = [
            ("domain_half_width_length", self.domain_half_width_length.is_some(), s == "cube"),
            ("domain_radius_length", self.domain_radius_length.is_some(), s == "ball"),
            ("domain_inner_radius_length", self.domain_inner_radius_length.is_some(), s == "annulus"),
            ("domain_outer_radius_length", self.domain_outer_radius_length.is_some(), s == "annulus"),
            ("domain_half_extents_length", self.domain_half_extents_length.is_some(), s == "rectangles"),
        ];
        if let Some((key, _, _)) = used.iter().find(|(_, given, wanted)| *given && !*wanted) {
            return Err(config_err(format!("{key} does not apply to domain_shape {s:?}")));
        }
        let shape = match s {
            "cube" => Shape::Cube { half_width: need(self.domain_half_width_length, "domain_half_width_length", s)? },
            "ball" => Shape::Ball { radius: need(self.domain_radius_length, "domain_radius_length", s)? },
            "annulus" => Shape::Annulus {
                inner: need(self.domain_inner_radius_length, "domain_inner_radius_length", s)?,
                outer: need(self.domain_outer_radius_length, "domain_outer_radius_length", s)?,
            },
            "rectangles" => Shape::Rectangles {
                half_extents: self
                    .domain_half_extents_length
                    .clone()
                    .ok_or_else(|| config_err("domain_shape \"rectangles\" needs domain_half_extents_length"))?,
            },
            other => return Err(config_err(format!("unknown domain_shape {other:?}"))),
        };
        DomainSpec::new(n, shape).map_err(|e| config_err(e.to_string()))
    }

    pub fn operator_spec(&self) -> Result<OperatorSpec> {
        let coefficient_keys = self.coefficient_value.is_some()
            || self.coefficient_beta.is_some()
            || self.coefficient_width_length.is_some();
        match self.operator {
            OperatorKind::Laplacian | OperatorKind::Bilaplacian => {
                if self.coefficient.is_some() || coefficient_keys {
                    return Err(config_err("coefficient keys apply to div_a_grad only"));
                }
                Ok(if self.operator == OperatorKind::Laplacian {
                    OperatorSpec::laplacian()
                } else {
                    OperatorSpec::bilaplacian()
                })
            }
            OperatorKind::DivAGrad => {
                let kind = self.coefficient.as_deref().ok_or_else(|| config_err("div_a_grad needs coefficient"))?;
                let get = |v: Option<f64>, key: &str| {
                    v.ok_or_else(|| config_err(format!("coefficient {kind:?} needs {key}")))
                };
                let c = match kind {
                    "constant" => Coefficient::Constant { value: get(self.coefficient_value, "coefficient_value")? },
                    "quadratic" => Coefficient::Quadratic { beta: get(self.coefficient_beta, "coefficient_beta")? },
                    "bump" => Coefficient::Bump {
                        beta: get(self.coefficient_beta, "coefficient_beta")?,
                        width: get(self.coefficient_width_length, "coefficient_width_length")?,
                    },
                    other => return Err(config_err(format!("unknown coefficient {other:?}"))),
                };
                Ok(OperatorSpec::div_a_grad(c))
            }
        }
    }

    pub fn group(&self) -> Result<FiniteGroup> {
        build_group(self.group_family, self.group_k, self.space_dim).map_err(|e| config_err(e.to_string()))
    }

    /// Geometric λ schedule from `lambda_min` to `lambda_max`.
    pub fn schedule(&self) -> Vec<f64> {
        let k = self.lambda_points;
        let ratio = (self.lambda_max / self.lambda_min).ln();
        (0..k)
            .map(|i| match i {
                0 => self.lambda_min,
                _ if i + 1 == k => self.lambda_max,
                _ => self.lambda_min * (ratio * i as f64 / (k - 1) as f64).exp(),
            })
            .collect()
    }

    fn quadrature(&self) -> Result<Quadrature> {
        Quadrature::new(self.quadrature_spacing_length, self.angular_nodes, self.seed)
    }
}

/// Moves `lambda` off any eigenvalue it is within `1e−9` (relative) of, to
/// the midpoint with the neighbouring distinct eigenvalue.
pub fn avoid_ties(lambda: f64, sorted: &[f64]) -> f64 {
    let tol = 1e-9 * lambda.abs().max(1.0);
    let i = sorted.partition_point(|&v| v < lambda - tol);
    if i == sorted.len() || sorted[i] > lambda + tol {
        return lambda;
    }
    let hit = sorted[i];
    let above = sorted[i..].iter().find(|&&v| v > hit + tol);
    match above {
        Some(&next) => 0.5 * (hit + next),
        None => {
            let below = sorted[..i].iter().rev().find(|&&v| v < hit - tol).copied().unwrap_or(0.0);
            0.5 * (below + hit)
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CharacterSummary {
    pub chi: usize,
    pub label: String,
    pub dim: usize,
    pub factor: f64,
    pub block_dim: usize,
    pub max_residual: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CountRow {
    pub lambda_requested: f64,
    pub lambda: f64,
    pub chi: usize,
    pub label: String,
    pub n_emp: usize,
    pub n_pred: f64,
    pub deviation: f64,
    pub ratio: f64,
    /// Whether the ratio is judged (`N_pred ≥ min_predicted_count`).
    pub judged: bool,
    pub within_tolerance: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TotalRow {
    pub lambda: f64,
    pub sum_over_characters: usize,
    pub full_operator_count: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FitRow {
    pub chi: usize,
    pub label: String,
    pub slope: Option<f64>,
    pub intercept: Option<f64>,
    pub residual: Option<f64>,
    pub used: usize,
    pub dropped: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VolumeCheck {
    pub lambda: f64,
    pub closed_radial: f64,
    pub monte_carlo: f64,
    pub stderr: f64,
    pub agrees: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Flags {
    pub ratios_within_tolerance: bool,
    pub totals_consistent: bool,
    pub remainder_slopes_bounded: bool,
    pub volumes_agree: bool,
}

impl Flags {
    pub fn all(&self) -> bool {
        self.ratios_within_tolerance && self.totals_consistent && self.remainder_slopes_bounded && self.volumes_agree
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VerifyReport {
    pub config: ExperimentConfig,
    pub group: String,
    pub domain: String,
    pub grid_points: usize,
    pub gamma: f64,
    pub exponent: f64,
    pub gamma_doubling_change: f64,
    pub characters: Vec<CharacterSummary>,
    pub counts: Vec<CountRow>,
    pub totals: Vec<TotalRow>,
    pub fits: Vec<FitRow>,
    pub volume_check: VolumeCheck,
    pub flags: Flags,
    pub pass: bool,
}

impl VerifyReport {
    pub fn counts_csv(&self) -> String {
        let mut s =
            String::from("lambda_requested,lambda,chi,label,n_emp,n_pred,deviation,ratio,judged,within_tolerance\n");
        for r in &self.counts {
            let _ = writeln!(
                s,
                "{},{},{},{},{},{},{},{},{},{}",
                r.lambda_requested,
                r.lambda,
                r.chi,
                r.label,
                r.n_emp,
                r.n_pred,
                r.deviation,
                r.ratio,
                r.judged,
                r.within_tolerance
            );
        }
        s
    }

    pub fn fits_csv(&self) -> String {
        let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
        let mut s = String::from("chi,label,slope,intercept,residual,used,dropped\n");
        for f in &self.fits {
            let dropped: Vec<String> = f.dropped.iter().map(|d| d.to_string()).collect();
            let _ = writeln!(
                s,
                "{},{},{},{},{},{},{}",
                f.chi,
                f.label,
                opt(f.slope),
                opt(f.intercept),
                opt(f.residual),
                f.used,
                dropped.join(";")
            );
        }
        s
    }
}

/// Everything `verify` and `compare` build before counting.
pub struct Pipeline {
    pub domain: DomainSpec,
    pub group: FiniteGroup,
    pub table: CharacterTable,
    pub grid: InteriorIndex,
    pub operator: OperatorSpec,
    pub matrix: SparseSymmetric,
    pub spectrum: Spectrum,
}

pub fn build_pipeline(cfg: &ExperimentConfig) -> Result<Pipeline> {
    cfg.validate()?;
    let domain = cfg.domain()?;
    let group = cfg.group()?;
    let table = character_table(&group)?;
    let grid = discretize_with(&domain, cfg.h_length, cfg.grid_centering.unwrap_or_default())?;
    let operator = OperatorSpec { max_dim: DEFAULT_MAX_DIM, ..cfg.operator_spec()? };
    let matrix = assemble(&operator, &grid)?;
    let perms = group_permutations(&grid, &group)?;
    let action = SymmetryAction::new(table.clone(), perms)?;
    let opts = SolverOptions {
        cutoff: Some(cfg.lambda_max * 1.05 + 1.0),
        lanczos: LanczosOptions { seed: cfg.seed, ..Default::default() },
        seed: cfg.seed,
        ..Default::default()
    };
    let spectrum = isotypic_spectrum(&matrix, &action, &opts)?;
    Ok(Pipeline { domain, group, table, grid, operator, matrix, spectrum })
}

pub fn verify(cfg: &ExperimentConfig) -> Result<VerifyReport> {
    let p = build_pipeline(cfg)?;
    let symbol = p.operator.principal_symbol();
    let quad = cfg.quadrature()?;
    let base: WeylPrediction = gamma(&p.domain, &symbol, &quad)?;
    let pred = base.reduced(&p.table);
    let union = p.spectrum.union();

    let schedule: Vec<(f64, f64)> = cfg.schedule().into_iter().map(|l| (l, avoid_ties(l, &union))).collect();
    let mut counts = Vec::new();
    let mut totals = Vec::new();
    for &(requested, lambda) in &schedule {
        let mut sum = 0;
        for (chi, block) in p.spectrum.blocks.iter().enumerate() {
            let n_emp = block.count(lambda)?;
            sum += n_emp;
            let n_pred = predicted_count(&pred, chi, lambda);
            let ratio = n_emp as f64 / n_pred;
            let judged = n_pred >= cfg.min_predicted_count;
            counts.push(CountRow {
                lambda_requested: requested,
                lambda,
                chi,
                label: block.label.clone(),
                n_emp,
                n_pred,
                deviation: (n_emp as f64 - n_pred).abs(),
                ratio,
                judged,
                within_tolerance: (ratio - 1.0).abs() <= cfg.ratio_tolerance,
            });
        }
        totals.push(TotalRow {
            lambda,
            sum_over_characters: sum,
            full_operator_count: count_below(&p.matrix, lambda)?,
        });
    }

    let lambdas: Vec<f64> = schedule.iter().map(|s| s.1).collect();
    let fits: Vec<FitRow> = p
        .spectrum
        .blocks
        .iter()
        .enumerate()
        .map(|(chi, block)| {
            let dev: Vec<f64> = counts.iter().filter(|r| r.chi == chi).map(|r| r.deviation).collect();
            match log_log_fit(&lambdas, &dev) {
                Ok(f) => FitRow {
                    chi,
                    label: block.label.clone(),
                    slope: Some(f.slope),
                    intercept: Some(f.intercept),
                    residual: Some(f.residual),
                    used: f.used,
                    dropped: f.dropped,
                },
                Err(_) => FitRow {
                    chi,
                    label: block.label.clone(),
                    slope: None,
                    intercept: None,
                    residual: None,
                    used: 0,
                    dropped: (0..lambdas.len()).collect(),
                },
            }
        })
        .collect();

    let volume_check = volume_check(cfg, &p, &quad)?;
    let flags = Flags {
        ratios_within_tolerance: counts.iter().all(|r| !r.judged || r.within_tolerance),
        totals_consistent: totals.iter().all(|t| t.sum_over_characters == t.full_operator_count),
        remainder_slopes_bounded: fits.iter().all(|f| f.slope.is_some_and(|s| s <= cfg.remainder_slope_max)),
        volumes_agree: volume_check.agrees,
    };
    let characters = p
        .spectrum
        .blocks
        .iter()
        .enumerate()
        .map(|(chi, b)| CharacterSummary {
            chi,
            label: b.label.clone(),
            dim: p.table.dim(chi),
            factor: pred.factors[chi],
            block_dim: b.dim,
            max_residual: b.max_residual,
        })
        .collect();
    let pass = flags.all();
    Ok(VerifyReport {
        config: cfg.clone(),
        group: p.group.name(),
        domain: p.domain.name(),
        grid_points: p.grid.len(),
        gamma: pred.gamma,
        exponent: pred.exponent,
        gamma_doubling_change: pred.doubling_change,
        characters,
        counts,
        totals,
        fits,
        volume_check,
        flags,
        pass,
    })
}

/// `vol W_λ` at `lambda_max` by the radial formula and by Monte Carlo.
fn volume_check(cfg: &ExperimentConfig, p: &Pipeline, quad: &Quadrature) -> Result<VolumeCheck> {
    let symbol = p.operator.principal_symbol();
    let lambda = cfg.lambda_max;
    let cr = vol_w_lambda(&p.domain, &symbol, lambda, &VolumeMode::ClosedRadial(*quad))?;
    let c1 = 1.1 * w_required_radius(&p.domain, &symbol, lambda)? / lambda.powf(1.0 / symbol.degree() as f64);
    let mc = vol_w_lambda(
        &p.domain,
        &symbol,
        lambda,
        &VolumeMode::MonteCarlo { samples: cfg.mc_samples, seed: cfg.seed, c1 },
    )?;
    Ok(VolumeCheck {
        lambda,
        closed_radial: cr.value,
        monte_carlo: mc.value,
        stderr: mc.stderr,
        agrees: (cr.value - mc.value).abs() <= 3.0 * mc.stderr,
    })
}

fn output_dir(cfg: &ExperimentConfig, out: Option<&Path>) -> PathBuf {
    out.map(Path::to_path_buf).or_else(|| cfg.output_dir.clone()).unwrap_or_else(|| PathBuf::from("."))
}

#[derive(Serialize)]
struct FailedRun<'a> {
    config: &'a ExperimentConfig,
    error: String,
    pass: bool,
}

/// [`verify`] plus the output files. On a pipeline error `report.json`
/// records the failure before the error is returned.
pub fn run_verify(cfg: &ExperimentConfig, out: Option<&Path>) -> Result<VerifyReport> {
    let dir = output_dir(cfg, out);
    fs::create_dir_all(&dir)?;
    match verify(cfg) {
        Ok(report) => {
            fs::write(dir.join("counts.csv"), report.counts_csv())?;
            fs::write(dir.join("fits.csv"), report.fits_csv())?;
            fs::write(dir.join("report.json"), serde_json::to_string_pretty(&report)? + "\n")?;
            Ok(report)
        }
        Err(e) => {
            let failed = FailedRun { config: cfg, error: e.to_string(), pass: false };
            fs::write(dir.join("report.json"), serde_json::to_string_pretty(&failed)? + "\n")?;
            Err(e)
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OracleRow {
    pub lambda: f64,
    pub chi: usize,
    pub label: String,
    pub discrete: usize,
    pub discrete_closed_form: Option<usize>,
    pub continuum: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RefinementRow {
    pub h: f64,
    /// Largest relative gap between matched discrete and continuum
    /// eigenvalues below `lambda_max`, over all characters.
    pub drift: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OracleReport {
    pub group: String,
    pub grid_points: usize,
    pub rows: Vec<OracleRow>,
    /// Whether the solver agrees with the closed-form discrete counts, when
    /// the grid is the standard `h = side/(m+1)` grid.
    pub discrete_matches_closed_form: Option<bool>,
    pub refinement: Vec<RefinementRow>,
    /// First `h` of the refinement sequence with drift below 2%.
    pub h_for_two_percent: Option<f64>,
}

impl OracleReport {
    pub fn csv(&self) -> String {
        let mut s = String::from("lambda,chi,label,discrete,discrete_closed_form,continuum\n");
        for r in &self.rows {
            let cf = r.discrete_closed_form.map(|v| v.to_string()).unwrap_or_default();
            let _ = writeln!(s, "{},{},{},{},{},{}", r.lambda, r.chi, r.label, r.discrete, cf, r.continuum);
        }
        s
    }
}

fn drift(domain: &DomainSpec, group: &FiniteGroup, table: &CharacterTable, m: usize, lambda_max: f64) -> Result<f64> {
    let cont = cube_laplacian_oracle(domain, group, table, ModeSpectrum::Continuum, lambda_max)?;
    let disc = cube_laplacian_oracle(domain, group, table, ModeSpectrum::Discrete { m }, f64::INFINITY)?;
    let mut worst = 0.0f64;
    for chi in 0..table.num_irreps() {
        for (c, d) in cont.values(chi).iter().zip(disc.values(chi)) {
            worst = worst.max((d - c).abs() / c);
        }
    }
    Ok(worst)
}

/// Discrete per-character counts against the continuum oracle (cube domain,
/// Laplacian only).
pub fn compare_oracle(cfg: &ExperimentConfig) -> Result<OracleReport> {
    cfg.validate()?;
    let domain = cfg.domain()?;
    let Shape::Cube { half_width } = *domain.shape() else {
        return Err(Error::OracleUnavailable(format!("domain {}", domain.name())));
    };
    if cfg.operator != OperatorKind::Laplacian {
        return Err(Error::OracleUnavailable(format!("operator {:?}", cfg.operator)));
    }
    let p = build_pipeline(cfg)?;
    let side = 2.0 * half_width;
    let n = domain.dim();
    let m = (side / cfg.h_length).round() as usize - 1;
    let standard = ((side / cfg.h_length) - (m + 1) as f64).abs() < 1e-9 && p.grid.len() == m.pow(n as u32);
    let cont = cube_laplacian_oracle(&domain, &p.group, &p.table, ModeSpectrum::Continuum, cfg.lambda_max)?;
    let disc = if standard {
        Some(cube_laplacian_oracle(&domain, &p.group, &p.table, ModeSpectrum::Discrete { m }, f64::INFINITY)?)
    } else {
        None
    };
    let union = p.spectrum.union();
    let mut rows = Vec::new();
    let mut matches = true;
    for requested in cfg.schedule() {
        let lambda = avoid_ties(requested, &union);
        let lambda = if lambda > cfg.lambda_max { requested } else { lambda };
        for (chi, block) in p.spectrum.blocks.iter().enumerate() {
            let discrete = block.count(lambda)?;
            let closed = disc.as_ref().map(|o| o.count(chi, lambda)).transpose()?;
            matches &= closed.is_none_or(|c| c == discrete);
            rows.push(OracleRow {
                lambda,
                chi,
                label: block.label.clone(),
                discrete,
                discrete_closed_form: closed,
                continuum: cont.count(chi, lambda)?,
            });
        }
    }
    let mut refinement = Vec::new();
    let mut h = side / (m + 1) as f64;
    let mut mk = m;
    for _ in 0..6 {
        refinement.push(RefinementRow { h, drift: drift(&domain, &p.group, &p.table, mk, cfg.lambda_max)? });
        h /= 2.0;
        mk = 2 * mk + 1;
    }
    let h_for_two_percent = refinement.iter().find(|r| r.drift < 0.02).map(|r| r.h);
    Ok(OracleReport {
        group: p.group.name(),
        grid_points: p.grid.len(),
        rows,
        discrete_matches_closed_form: standard.then_some(matches),
        refinement,
        h_for_two_percent,
    })
}

/// [`compare_oracle`] plus `oracle.csv` and `oracle.json`.
pub fn run_compare_oracle(cfg: &ExperimentConfig, out: Option<&Path>) -> Result<OracleReport> {
    let report = compare_oracle(cfg)?;
    let dir = output_dir(cfg, out);
    fs::create_dir_all(&dir)?;
    fs::write(dir.join("oracle.csv"), report.csv())?;
    fs::write(dir.join("oracle.json"), serde_json::to_string_pretty(&report)? + "\n")?;
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_config() -> ExperimentConfig {
        serde_json::from_value(serde_json::json!({
            "group_family": "cyclic", "group_k": 2, "space_dim": 2,
            "domain_shape": "cube", "domain_half_width_length": 0.5,
            "operator": "laplacian",
            "h_length": 1.0 / 33.0,
            "lambda_min": 60.0, "lambda_max": 1500.0, "lambda_points": 8,
            "quadrature_spacing_length": 0.01, "angular_nodes": 32,
            "mc_samples": 100000, "seed": 7,
            "ratio_tolerance": 0.5, "min_predicted_count": 10.0, "remainder_slope_max": 1.0
        }))
        .unwrap()
    }

    #[test]
    fn schedule_is_geometric_with_exact_ends() {
        let cfg = small_config();
        let s = cfg.schedule();
        assert_eq!(s.len(), 8);
        assert_eq!(s[0], 60.0);
        assert_eq!(s[7], 1500.0);
        let q = s[1] / s[0];
        for w in s.windows(2) {
            assert!((w[1] / w[0] - q).abs() < 1e-12);
        }
    }

    #[test]
    fn ties_move_to_midpoints() {
        let ev = [1.0, 2.0, 2.0, 5.0];
        assert_eq!(avoid_ties(2.0, &ev), 3.5);
        assert_eq!(avoid_ties(2.0 + 1e-12, &ev), 3.5);
        assert_eq!(avoid_ties(3.0, &ev), 3.0);
        assert_eq!(avoid_ties(5.0, &ev), 3.5);
    }

    #[test]
    fn bad_configs_are_config_errors() {
        let mut cfg = small_config();
        cfg.lambda_points = 1;
        assert!(matches!(cfg.validate(), Err(Error::Config(_))));
        let mut cfg = small_config();
        cfg.domain_radius_length = Some(1.0);
        assert!(matches!(cfg.validate(), Err(Error::Config(_))));
        let mut cfg = small_config();
        cfg.coefficient_beta = Some(1.0);
        assert!(matches!(cfg.validate(), Err(Error::Config(_))));
        let text = serde_json::to_string(&small_config()).unwrap().replace("\"seed\":7,", "");
        assert!(matches!(ExperimentConfig::from_json(&text), Err(Error::Config(_))));
        let text = serde_json::to_string(&small_config()).unwrap().replace("{", "{\"extra\":1,");
        assert!(matches!(ExperimentConfig::from_json(&text), Err(Error::Config(_))));
    }

    #[test]
    fn verify_small_square() {
        let report = verify(&small_config()).unwrap();
        assert_eq!(report.grid_points, 32 * 32);
        assert!(report.flags.totals_consistent);
        assert!(report.flags.volumes_agree);
        assert_eq!(report.counts.len(), 16);
        assert!(report.pass, "{:?}", report.flags);
    }

    #[test]
    fn compare_small_square() {
        let mut cfg = small_config();
        cfg.lambda_min = 5.0;
        cfg.lambda_max = 400.0;
        let r = compare_oracle(&cfg).unwrap();
        assert_eq!(r.discrete_matches_closed_form, Some(true));
        let first = r.rows.iter().filter(|row| row.lambda < 19.0).count();
        assert!(r.rows.iter().filter(|row| row.lambda < 19.0).all(|row| row.discrete == 0 && row.continuum == 0));
        assert!(first > 0);
        for w in r.refinement.windows(2) {
            assert!(w[0].drift / w[1].drift >= 3.0);
        }
        let mut disk = small_config();
        disk.domain_shape = "ball".into();
        disk.domain_half_width_length = None;
        disk.domain_radius_length = Some(0.5);
        assert!(matches!(compare_oracle(&disk), Err(Error::OracleUnavailable(_))));
    }
}
