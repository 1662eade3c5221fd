//! Thin command-line front end: load a config, run the experiment, write
//! CSVs and a manifest, exit nonzero if any declared assertion fails.

use clap::Parser;
use dynaperc::experiments::{emit_plot_data, run, ExperimentConfig, ExperimentKind};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser, Debug)]
#[command(
    name = "dynaperc",
    version,
    about = "Monte Carlo simulator and analytic oracles for random walk on dynamical percolation"
)]
struct Cli {
    /// Experiment kind: speed-sweep | critical-exponent | reset-times |
    /// evolving-set-checks | one-arm | cluster-tails | trifurcation |
    /// analytic-table | acceptance
    kind: String,

    /// JSON config file (optional for `acceptance` and `analytic-table`).
    #[arg(long)]
    config: Option<PathBuf>,

    /// Override the config seed (DYNAPERC_SEED overrides both).
    #[arg(long)]
    seed: Option<u64>,

    /// Worker threads (0 = library default).
    #[arg(long)]
    workers: Option<usize>,

    /// Output directory for CSVs and the manifest.
    #[arg(long)]
    out: Option<PathBuf>,

    /// Also emit tidy plot data and a plotting stub into the output dir.
    #[arg(long)]
    plot_data: bool,
}

fn build_config(cli: &Cli) -> dynaperc::Result<ExperimentConfig> {
    let kind = ExperimentKind::parse(&cli.kind)?;
    let mut config = match &cli.config {
        Some(path) => {
            let cfg = ExperimentConfig::from_file(path)?;
            if cfg.kind != kind {
                return Err(dynaperc::Error::InvalidConfig(format!(
                    "config file is for {:?}, command line asked for {:?}",
                    cfg.kind, kind
                )));
            }
            cfg
        }
        None => {
            let mut cfg = ExperimentConfig::new(kind, 0);
            if kind == ExperimentKind::AnalyticTable {
                cfg.p_grid = vec![0.6, 0.75, 0.9];
                cfg.mu_grid = vec![0.01, 0.1, 1.0];
            }
            cfg
        }
    };
    if let Some(seed) = cli.seed {
        config.seed = seed;
    }
    if let Ok(env_seed) = std::env::var("DYNAPERC_SEED") {
        config.seed = env_seed.parse().map_err(|_| {
            dynaperc::Error::InvalidConfig(format!("DYNAPERC_SEED={env_seed:?} is not a u64"))
        })?;
    }
    if let Some(workers) = cli.workers {
        config.workers = workers;
    }
    if let Some(out) = &cli.out {
        config.out_dir = Some(out.clone());
    }
    Ok(config)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let config = match build_config(&cli) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("dynaperc: {e}");
            return ExitCode::from(2);
        }
    };
    match run(&config) {
        Ok(manifest) => {
            for check in &manifest.checks {
                if config.kind != ExperimentKind::Acceptance {
                    println!(
                        "[check] {:<44} {} ({})",
                        check.name,
                        if check.pass { "PASS" } else { "FAIL" },
                        check.detail
                    );
                }
            }
            for fit in &manifest.fits {
                println!(
                    "[fit]   {}: slope {:.4} +- {:.4}{}",
                    fit.name,
                    fit.slope,
                    fit.slope_stderr,
                    fit.r2.map(|r| format!(", R^2 {r:.5}")).unwrap_or_default()
                );
            }
            for (k, v) in &manifest.summary {
                println!("[value] {k} = {v}");
            }
            for path in &manifest.written {
                println!("[wrote] {}", path.display());
            }
            if cli.plot_data {
                if let Some(dir) = &config.out_dir {
                    match emit_plot_data(&manifest, dir) {
                        Ok(files) => {
                            for f in files {
                                println!("[wrote] {}", f.display());
                            }
                        }
                        Err(e) => {
                            eprintln!("dynaperc: plot data: {e}");
                            return ExitCode::FAILURE;
                        }
                    }
                }
            }
            println!(
                "[done]  {} in {:.2}s (seed {}, config {})",
                config.kind, manifest.wall_time_s, manifest.seed, manifest.config_hash
            );
            if manifest.all_checks_pass() {
                ExitCode::SUCCESS
            } else {
                ExitCode::FAILURE
            }
        }
        Err(e) => {
            eprintln!("dynaperc: {e}");
            ExitCode::from(2)
        }
    }
}
