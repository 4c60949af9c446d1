use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};

use equiweyl::error::{Error, Result};
use equiweyl::experiment::{build_pipeline, run_compare_oracle, run_verify, ExperimentConfig};
use equiweyl::group_rep::{all_fixed_point_data, build_group, character_table, GroupFamily};
use equiweyl::lattice_domain::{check_invariance, tube_ratio_table};
use equiweyl::operator_disc::write_matrix_market;
use equiweyl::weyl_volume::{
    gamma, predicted_count, vol_rv, vol_w_lambda, w_required_radius, Quadrature, SymbolWeights, VolumeMode,
};

#[derive(Parser)]
#[command(name = "equiweyl", version, about = "Symmetry-reduced eigenvalue counting on symmetric domains")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct GroupArgs {
    /// cyclic, dihedral or product
    family: GroupFamily,
    k: usize,
    /// Spatial dimension
    #[arg(default_value_t = 2)]
    n: usize,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    ClosedRadial,
    MonteCarlo,
}

#[derive(Subcommand)]
enum Command {
    /// Character table as CSV
    Table(GroupArgs),
    /// Fixed subspaces and separation constants of every non-identity element
    Kappa(GroupArgs),
    /// Invariance of the configured domain and boundary tube ratios
    CheckDomain {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value_t = 200_000)]
        samples: u64,
        /// Tube radii
        #[arg(long, value_delimiter = ',', default_value = "0.2,0.1,0.05,0.025,0.0125")]
        rho: Vec<f64>,
    },
    /// Per-character eigenvalues up to lambda_max
    Spectrum {
        #[arg(long)]
        config: PathBuf,
        /// Also write the assembled operator in Matrix Market format
        #[arg(long)]
        matrix_market: Option<PathBuf>,
    },
    /// Per-character counts N(λ) at one λ
    Count {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        lambda: f64,
    },
    /// Predicted per-character counts over the λ schedule
    Predict {
        #[arg(long)]
        config: PathBuf,
    },
    /// Volume of {a_λ < 0} over the λ schedule
    WeylVolume {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, value_enum, default_value = "closed-radial")]
        mode: Mode,
    },
    /// Volume of the remainder set over the λ schedule
    RvVolume {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value_t = 0.4)]
        delta: f64,
        #[arg(long, default_value_t = 8.0)]
        c: f64,
        #[arg(long, default_value_t = 1.0)]
        c0: f64,
    },
    /// Full verification run: counts.csv, fits.csv, report.json
    Verify {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Discrete counts against the closed-form continuum counts (cube, Laplacian)
    Compare {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn load(path: &Path) -> Result<ExperimentConfig> {
    ExperimentConfig::from_file(path)
}

fn run(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::Table(g) => {
            let group = build_group(g.family, g.k, g.n)?;
            print!("{}", character_table(&group)?.to_csv());
        }
        Command::Kappa(g) => {
            let group = build_group(g.family, g.k, g.n)?;
            println!("element,matrix,fixed_dim,kappa");
            for f in all_fixed_point_data(&group) {
                let m: Vec<String> = group
                    .element(f.element)
                    .matrix()
                    .iter()
                    .map(|row| row.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(" "))
                    .collect();
                println!("{},{},{},{}", f.element, m.join(";"), f.fixed_subspace.len(), f.kappa);
            }
        }
        Command::CheckDomain { config, samples, rho } => {
            let cfg = load(&config)?;
            let domain = cfg.domain()?;
            let group = cfg.group()?;
            let grid = equiweyl::lattice_domain::discretize_with(
                &domain,
                cfg.h_length,
                cfg.grid_centering.unwrap_or_default(),
            )?;
            let inv = check_invariance(&domain, &group, Some(&grid), samples, cfg.seed)?;
            println!("domain,group,grid_points,random_samples,violations,invariant");
            println!(
                "{},{},{},{},{},{}",
                domain.name(),
                group.name(),
                inv.grid_points,
                inv.random_samples,
                inv.violations,
                inv.holds()
            );
            println!();
            println!("rho,tube_volume,stderr,ratio,method");
            for (t, ratio) in tube_ratio_table(&domain, &rho, samples, cfg.seed)? {
                println!(
                    "{},{},{},{},{}",
                    t.rho,
                    t.volume,
                    t.stderr,
                    ratio,
                    serde_json::to_value(t.method)?.as_str().unwrap_or("")
                );
            }
            return Ok(inv.holds());
        }
        Command::Spectrum { config, matrix_market } => {
            let cfg = load(&config)?;
            let p = build_pipeline(&cfg)?;
            if let Some(path) = matrix_market {
                write_matrix_market(&p.matrix, &path)?;
            }
            println!("chi,label,index,eigenvalue");
            for b in &p.spectrum.blocks {
                for (i, v) in b.values.iter().take_while(|&&v| v <= cfg.lambda_max).enumerate() {
                    println!("{},{},{},{}", b.chi, b.label, i, v);
                }
            }
        }
        Command::Count { config, lambda } => {
            let mut cfg = load(&config)?;
            cfg.lambda_max = cfg.lambda_max.max(lambda);
            let p = build_pipeline(&cfg)?;
            println!("lambda,chi,label,count");
            for b in &p.spectrum.blocks {
                println!("{},{},{},{}", lambda, b.chi, b.label, b.count(lambda)?);
            }
        }
        Command::Predict { config } => {
            let cfg = load(&config)?;
            let domain = cfg.domain()?;
            let table = character_table(&cfg.group()?)?;
            let quad = Quadrature::new(cfg.quadrature_spacing_length, cfg.angular_nodes, cfg.seed)?;
            let pred = gamma(&domain, &cfg.operator_spec()?.principal_symbol(), &quad)?.reduced(&table);
            eprintln!(
                "gamma = {}, exponent = {}, doubling change = {:e}",
                pred.gamma, pred.exponent, pred.doubling_change
            );
            println!("lambda,chi,label,value,stderr,method,seed");
            for lambda in cfg.schedule() {
                for chi in 0..table.num_irreps() {
                    let v = predicted_count(&pred, chi, lambda);
                    println!("{},{},{},{},0,quadrature,{}", lambda, chi, table.label(chi), v, cfg.seed);
                }
            }
        }
        Command::WeylVolume { config, mode } => {
            let cfg = load(&config)?;
            let domain = cfg.domain()?;
            let symbol = cfg.operator_spec()?.principal_symbol();
            let quad = Quadrature::new(cfg.quadrature_spacing_length, cfg.angular_nodes, cfg.seed)?;
            println!("lambda,value,stderr,method,seed");
            for lambda in cfg.schedule() {
                let m = match mode {
                    Mode::ClosedRadial => VolumeMode::ClosedRadial(quad),
                    Mode::MonteCarlo => {
                        let c1 = 1.1 * w_required_radius(&domain, &symbol, lambda)?
                            / lambda.powf(1.0 / symbol.degree() as f64);
                        VolumeMode::MonteCarlo { samples: cfg.mc_samples, seed: cfg.seed, c1 }
                    }
                };
                let v = vol_w_lambda(&domain, &symbol, lambda, &m)?;
                println!("{},{},{},{},{}", lambda, v.value, v.stderr, v.method, v.seed);
            }
        }
        Command::RvVolume { config, delta, c, c0 } => {
            let cfg = load(&config)?;
            let domain = cfg.domain()?;
            let symbol = cfg.operator_spec()?.principal_symbol();
            let w = SymbolWeights::new(delta, c, c0)?;
            println!("lambda,value,stderr,method,seed,delta,omega,c,c0,c1");
            for lambda in cfg.schedule() {
                let c1 =
                    1.05 * w.rv_required_radius(&domain, &symbol, lambda)? / lambda.powf(1.0 / symbol.degree() as f64);
                let v = vol_rv(&domain, &symbol, &w, lambda, cfg.mc_samples, cfg.seed, c1)?;
                println!(
                    "{},{},{},{},{},{},{},{},{},{}",
                    lambda,
                    v.value,
                    v.stderr,
                    v.method,
                    v.seed,
                    w.delta(),
                    w.omega(),
                    w.c(),
                    w.c0(),
                    c1
                );
            }
        }
        Command::Verify { config, out } => {
            let cfg = load(&config)?;
            let start = Instant::now();
            let report = run_verify(&cfg, out.as_deref())?;
            eprintln!("verify: {} grid points, {:.1} s", report.grid_points, start.elapsed().as_secs_f64());
            for (name, ok) in [
                ("ratios within tolerance", report.flags.ratios_within_tolerance),
                ("character totals match the full operator", report.flags.totals_consistent),
                ("remainder slopes bounded", report.flags.remainder_slopes_bounded),
                ("volume quadrature agrees with Monte Carlo", report.flags.volumes_agree),
            ] {
                eprintln!("[{}] {name}", if ok { "PASS" } else { "FAIL" });
            }
            return Ok(report.pass);
        }
        Command::Compare { config, out } => {
            let cfg = load(&config)?;
            let report = run_compare_oracle(&cfg, out.as_deref())?;
            print!("{}", report.csv());
            return Ok(report.discrete_matches_closed_form.unwrap_or(true));
        }
    }
    Ok(true)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(code(&e))
        }
    }
}

fn code(e: &Error) -> u8 {
    e.exit_code() as u8
}
