use std::path::PathBuf;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};

use qlevels::config::{BackendChoice, ExperimentConfig};
use qlevels::grid::{sample_potential, GridSpec};
use qlevels::hamiltonian::HamiltonianParts;
use qlevels::report;
use qlevels::spectrum::{analytic_laplacian_spectrum, dense_spectrum_capped, DENSE_CAP};
use qlevels::splitting::{error_budget, optimal_order, trotterized_power, OpTag, SUZUKI_C_HAT};
use qlevels::trial::{build_level_subsequence, enumerate_trial_indices_with_c};

#[derive(Parser)]
#[command(name = "qlevels", about = "Low-order eigenvalue estimation for grid Schrodinger operators via simulated phase estimation", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct ConfigArgs {
    /// Experiment configuration (JSON).
    #[arg(long)]
    config: PathBuf,
    /// Override the configured seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Override the configured backend.
    #[arg(long)]
    backend: Option<BackendChoice>,
    /// Output directory; overrides the configured one.
    #[arg(long)]
    out: Option<PathBuf>,
}

impl ConfigArgs {
    fn load(&self) -> anyhow::Result<(ExperimentConfig, Option<PathBuf>)> {
        let mut cfg = ExperimentConfig::load(&self.config)
            .with_context(|| format!("loading {}", self.config.display()))?;
        if let Some(seed) = self.seed {
            cfg.execution.seed = seed;
        }
        if let Some(backend) = self.backend {
            cfg.algorithm.backend = backend;
        }
        let out = self
            .out
            .clone()
            .or_else(|| cfg.resolve_out(Some(&self.config)));
        Ok((cfg, out))
    }
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate the asymptotic parameter-selection formulas.
    Params {
        #[arg(long)]
        d: usize,
        #[arg(long)]
        eps: f64,
        /// Potential bound M.
        #[arg(long, default_value_t = 0.0)]
        m: f64,
        #[arg(long, default_value_t = 1)]
        j: usize,
        /// Reduced-cost variant exponent in (0,1).
        #[arg(long)]
        gamma: Option<f64>,
    },
    /// Compute and emit the reference spectrum for a configured problem.
    Spectrum(ConfigArgs),
    /// Enumerate the trial eigenvector set for a configured problem.
    Trialset(ConfigArgs),
    /// Show the product-formula schedules and their count bounds.
    Schedule(ConfigArgs),
    /// Run the level-finding experiment and write all artifacts.
    Run(ConfigArgs),
    /// Run the experiment and exit nonzero unless all trials verify.
    Verify(ConfigArgs),
    /// Sweep the trial-set cardinality over dimension.
    Scan {
        #[arg(long, default_value_t = 2)]
        d_min: usize,
        #[arg(long, default_value_t = 10)]
        d_max: usize,
        /// Interior points per axis used for the per-dimension grids.
        #[arg(long, default_value_t = 4)]
        n: usize,
        #[arg(long, default_value_t = 1.0)]
        m: f64,
        #[arg(long, default_value_t = 1)]
        j: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn main() -> anyhow::Result<()> {
    match Cli::parse().command {
        Command::Params { d, eps, m, j, gamma } => {
            let p = report::suggested_parameters(d, eps, m, j, gamma)?;
            println!("{}", serde_json::to_string_pretty(&p)?);
        }
        Command::Spectrum(args) => {
            let (cfg, out) = args.load()?;
            let n = cfg.resolved_n()?;
            let grid = GridSpec::new(cfg.problem.d, n)?;
            let v = sample_potential(&cfg.problem.potential, &grid)?;
            let ham = HamiltonianParts::assemble(grid.clone(), v)?;
            let table = if grid.total_dim() <= DENSE_CAP {
                dense_spectrum_capped(&ham, DENSE_CAP)?
            } else if ham.h2_norm_bound() == 0.0 {
                analytic_laplacian_spectrum(&grid)
            } else {
                bail!("problem dimension {} too large for the dense solver", grid.total_dim());
            };
            let mut w = writer(out.as_deref(), "spectrum.csv")?;
            w.write_record(["index", "eigenvalue"])?;
            for (i, e) in table.eigenvalues.iter().enumerate() {
                w.write_record([i.to_string(), format!("{e:.12e}")])?;
            }
            w.flush()?;
        }
        Command::Trialset(args) => {
            let (cfg, out) = args.load()?;
            let n = cfg.resolved_n()?;
            let grid = GridSpec::new(cfg.problem.d, n)?;
            let sub = build_level_subsequence(
                cfg.problem.d,
                cfg.problem.potential.m_bound,
                cfg.algorithm.j,
            )?;
            let trial = enumerate_trial_indices_with_c(&grid, &sub, cfg.algorithm.c)?;
            eprintln!(
                "cutoff {:.6}, cardinality {}",
                trial.cutoff,
                trial.cardinality()
            );
            let mut w = writer(out.as_deref(), "trialset.csv")?;
            w.write_record(["components", "eigenvalue"])?;
            for k in &trial.indices {
                let e = qlevels::grid::laplacian_eigenvalue(&grid, k);
                let comps: Vec<String> = k.components().iter().map(|c| c.to_string()).collect();
                w.write_record([comps.join(" "), format!("{e:.12e}")])?;
            }
            w.flush()?;
        }
        Command::Schedule(args) => {
            let (cfg, _) = args.load()?;
            let n = cfg.resolved_n()?;
            let grid = GridSpec::new(cfg.problem.d, n)?;
            let v = sample_potential(&cfg.problem.potential, &grid)?;
            let ham = HamiltonianParts::assemble(grid, v)?;
            let (t0, g) = cfg.resolved_t0_g()?;
            let budget = error_budget(cfg.algorithm.b, t0, g)?;
            let k = if cfg.algorithm.k == 0 {
                optimal_order(g, budget.eps_tau[0], SUZUKI_C_HAT)
            } else {
                cfg.algorithm.k
            };
            println!("order 2k with k = {k}, t = {}", cfg.algorithm.b + t0);
            for (tau, &eps) in budget.eps_tau.iter().enumerate() {
                let s = trotterized_power(&ham, tau as u32, eps, k)?;
                println!(
                    "tau {tau:2}: eps {eps:.3e}, substeps {}, exponentials {} ({} kinetic / {} potential)",
                    s.substeps,
                    s.merged_count(),
                    s.count_by_tag(OpTag::H1),
                    s.count_by_tag(OpTag::H2),
                );
            }
        }
        Command::Run(args) => {
            let (cfg, out) = args.load()?;
            let arts = report::run_experiment(&cfg)?;
            if let Some(dir) = out {
                report::write_artifacts(&arts, &dir)?;
                eprintln!("artifacts written to {}", dir.display());
            }
            println!("{}", serde_json::to_string_pretty(&arts.report)?);
        }
        Command::Verify(args) => {
            let (cfg, out) = args.load()?;
            let arts = report::run_experiment(&cfg)?;
            if let Some(dir) = out {
                report::write_artifacts(&arts, &dir)?;
            }
            for (t, v) in arts.report.verification.iter().enumerate() {
                println!(
                    "trial {t}: proximity {} skips {}",
                    if v.proximity_ok { "ok" } else { "FAIL" },
                    if v.no_skips { "none" } else { "FAIL" },
                );
            }
            println!(
                "success rate {:.3} (bound {:.3})",
                arts.report.success_rate, arts.report.success_bound
            );
            if arts.report.verification.iter().any(|v| !v.all_ok()) {
                bail!("verification failed");
            }
        }
        Command::Scan { d_min, d_max, n, m, j, out } => {
            let scan = report::cardinality_scan(d_min..=d_max, n, m, j)?;
            let mut w = writer(out.as_deref(), "scan.csv")?;
            w.write_record(["d", "cardinality"])?;
            for (d, card) in &scan.rows {
                w.write_record([d.to_string(), card.to_string()])?;
            }
            w.flush()?;
            eprintln!(
                "fit exponent {:.3} (limit {:.1})",
                scan.fit_exponent, scan.exponent_limit
            );
        }
    }
    Ok(())
}

/// CSV writer to `<out>/<name>` when an output directory is given, else to
/// standard output.
fn writer(
    out: Option<&std::path::Path>,
    name: &str,
) -> anyhow::Result<csv::Writer<Box<dyn std::io::Write>>> {
    let sink: Box<dyn std::io::Write> = match out {
        Some(dir) => {
            std::fs::create_dir_all(dir)?;
            Box::new(std::fs::File::create(dir.join(name))?)
        }
        None => Box::new(std::io::stdout()),
    };
    Ok(csv::Writer::from_writer(sink))
}
