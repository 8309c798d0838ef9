//! Command-line driver for the exclusion-process experiments.
//!
//! Exit codes: 0 success, 1 check failure, 2 usage/configuration error.

use clap::{Parser, Subcommand};
use fracsep::experiments::{
    run_fick_constant, run_fick_scaling, run_hydrostatics, run_operator_convergence,
    run_profile_table, run_validate, ExperimentConfig, ExperimentKind, FaultInjection,
    RunManifest,
};
use fracsep::jumplaw::JumpLaw;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

#[derive(Parser)]
#[command(name = "fracsep", version, about = "boundary-driven exclusion process with long jumps")]
struct Cli {
    /// TOML experiment configuration; omit to use built-in defaults.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Override the RNG seed (FRACSEP_SEED wins over this flag).
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Override the output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Override the replica count.
    #[arg(long, global = true)]
    replicas: Option<u64>,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run every module invariant suite at small scale.
    Validate {
        /// Deliberately corrupt the jump-law tail table first (testing).
        #[arg(long, hide = true)]
        inject_fault: Option<String>,
    },
    /// Stationary profiles vs the continuum prediction.
    Hydrostatics,
    /// Current scaling over a ladder of system sizes.
    FickScaling,
    /// Reservoir-rate and operator convergence diagnostics.
    OperatorConvergence,
    /// Tabulate the continuum profile rho_bar.
    ProfileTable,
    /// Both routes to the fractional Fick constant.
    FickConstant,
}

fn kind_of(cmd: &Command) -> ExperimentKind {
    match cmd {
        Command::Validate { .. } => ExperimentKind::Validate,
        Command::Hydrostatics => ExperimentKind::Hydrostatics,
        Command::FickScaling => ExperimentKind::FickScaling,
        Command::OperatorConvergence => ExperimentKind::OperatorConvergence,
        Command::ProfileTable => ExperimentKind::ProfileTable,
        Command::FickConstant => ExperimentKind::FickConstant,
    }
}

fn default_config(kind: ExperimentKind) -> ExperimentConfig {
    let n_list = match kind {
        ExperimentKind::Hydrostatics => vec![64, 128, 256],
        ExperimentKind::FickScaling => vec![8, 16, 32, 64, 128, 256, 512],
        ExperimentKind::OperatorConvergence => vec![64, 128, 256, 512, 1024, 2048, 4096],
        _ => vec![],
    };
    ExperimentConfig {
        kind,
        gamma: 1.5,
        alpha: 0.2,
        beta: 0.8,
        n_list,
        t_burn: 0.0,
        // currents and site densities at the largest default sizes are
        // O(10^-2) with unit-time variance O(10^-1); long windows are
        // needed to resolve them and the simulator is cheap per event
        t_measure: match kind {
            ExperimentKind::FickScaling => 200_000.0,
            ExperimentKind::Hydrostatics => 20_000.0,
            _ => 200.0,
        },
        replicas: 4,
        seed: 0,
        out_dir: PathBuf::from("out"),
        quad_tol: 1e-9,
        mc_walkers: 1_000_000,
    }
}

fn build_config(cli: &Cli) -> Result<ExperimentConfig, String> {
    let kind = kind_of(&cli.command);
    let mut cfg = match &cli.config {
        Some(path) => {
            let cfg = ExperimentConfig::from_toml_file(path).map_err(|e| e.to_string())?;
            if cfg.kind != kind {
                return Err(format!(
                    "config is for '{}' but the '{kind}' subcommand was invoked",
                    cfg.kind
                ));
            }
            cfg
        }
        None => default_config(kind),
    };
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    // the environment overrides the seed, and only the seed
    if let Ok(v) = std::env::var("FRACSEP_SEED") {
        cfg.seed = v
            .parse()
            .map_err(|_| format!("FRACSEP_SEED = {v:?} is not a u64"))?;
    }
    if let Some(out) = &cli.out {
        cfg.out_dir = out.clone();
    }
    if let Some(replicas) = cli.replicas {
        cfg.replicas = replicas;
    }
    cfg.validate().map_err(|e| e.to_string())?;
    Ok(cfg)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(threads) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
        {
            eprintln!("fracsep: thread pool: {e}");
            return ExitCode::from(2);
        }
    }
    let config = match build_config(&cli) {
        Ok(c) => c,
        Err(msg) => {
            eprintln!("fracsep: {msg}");
            return ExitCode::from(2);
        }
    };
    let started = Instant::now();
    let outcome: Result<bool, fracsep::error::Error> = match &cli.command {
        Command::Validate { inject_fault } => {
            let fault = match inject_fault.as_deref() {
                None => FaultInjection::None,
                Some("tail-table") => FaultInjection::TailTable,
                Some(other) => {
                    eprintln!("fracsep: unknown fault {other:?}");
                    return ExitCode::from(2);
                }
            };
            run_validate(&config, fault).map(|report| {
                for c in &report.checks {
                    println!(
                        "{} {} ({})",
                        if c.pass { "PASS" } else { "FAIL" },
                        c.name,
                        c.detail
                    );
                }
                report.all_pass
            })
        }
        Command::Hydrostatics => run_hydrostatics(&config).map(|report| {
            for per_n in &report.per_n {
                println!(
                    "N = {}: sup-distance {:.4} (site stderr up to {:.4}){}",
                    per_n.n,
                    per_n.sup_distance,
                    per_n.sup_site_stderr,
                    if per_n.under_resolved {
                        " [under-resolved CIs]"
                    } else {
                        ""
                    }
                );
            }
            true
        }),
        Command::FickScaling => run_fick_scaling(&config).map(|report| {
            for row in &report.rows {
                println!(
                    "N = {:>4}: W1 = {:+.6e} +- {:.2e}{}",
                    row.n,
                    row.w1_mean,
                    row.w1_stderr,
                    if row.exact { " (exact)" } else { "" }
                );
            }
            match report.delta_hat {
                Some(d) => println!("delta_hat = {d:.4}, fick_rhs = {:.6}", report.fick_rhs),
                None => println!("fit refused: a current CI spans zero"),
            }
            true
        }),
        Command::OperatorConvergence => run_operator_convergence(&config).map(|()| true),
        Command::ProfileTable => run_profile_table(&config).map(|()| true),
        Command::FickConstant => run_fick_constant(&config).map(|report| {
            println!(
                "fick_rhs = {:.8} (x-spread {:.2e}), fick_via_phi = {:.8}, gap = {:.2e}",
                report.fick_rhs_x50,
                report.x_spread,
                report.fick_via_phi,
                report.route_gap.abs()
            );
            true
        }),
    };
    match outcome {
        Ok(all_pass) => {
            let law = JumpLaw::new(config.gamma, 4).expect("validated gamma");
            let manifest =
                RunManifest::new(&config, law.c_gamma(), started.elapsed().as_secs_f64());
            if let Err(e) = manifest.write(&config.out_dir) {
                eprintln!("fracsep: manifest: {e}");
                return ExitCode::from(2);
            }
            if all_pass {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("fracsep: {e}");
            ExitCode::from(1)
        }
    }
}
