//! Command-line runner for the superradiant cavity Otto engine toolkit.
//!
//! Exit codes: 0 success, 2 configuration error, 3 numerical-integrity
//! error, 4 resource-limit error. Failures emit a machine-readable JSON
//! object on standard error.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use sr_otto::lindblad::HamiltonianKind;
use sr_otto::Error as CoreError;

use sr_otto_cli::commands;
use sr_otto_cli::config::{parse_atoms_flag, parse_grid_flag, RunConfig};

#[derive(Parser)]
#[command(
    name = "sr-otto",
    version,
    about = "Superradiant cavity quantum Otto engine: ignition dynamics, scaling fits, cycle thermodynamics"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    #[command(flatten)]
    overrides: Overrides,
}

#[derive(Args, Clone)]
struct Overrides {
    /// Declarative configuration file (TOML); flags override file values.
    #[arg(long, global = true, value_hint = clap::ValueHint::FilePath)]
    config: Option<PathBuf>,

    /// Directory for output files.
    #[arg(long, global = true)]
    output_dir: Option<PathBuf>,

    /// Worker threads for sweeps (0 = all cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,

    /// Print the fully resolved configuration and exit.
    #[arg(long, global = true)]
    print_config: bool,

    /// Atom-field coupling strength g.
    #[arg(long, global = true)]
    g: Option<f64>,

    /// Cavity decay rate kappa.
    #[arg(long, global = true)]
    kappa: Option<f64>,

    /// Cluster sizes, comma separated (e.g. `--N 2,3,4`).
    #[arg(long = "N", global = true)]
    atoms: Option<String>,

    /// omega_L grid: `start:stop:count` or a comma-separated list.
    #[arg(long = "omega-L-grid", global = true)]
    omega_l_grid: Option<String>,

    /// Decoherence-rate grid, same syntax as --omega-L-grid.
    #[arg(long, global = true)]
    gamma_grid: Option<String>,

    #[arg(long, global = true)]
    num_injections: Option<usize>,

    #[arg(long, global = true)]
    n_max: Option<usize>,

    #[arg(long, global = true)]
    t_int: Option<f64>,

    #[arg(long, global = true)]
    period: Option<f64>,

    /// Fraction of the run excluded from steady-state averaging.
    #[arg(long, global = true)]
    burn_in: Option<f64>,
}

#[derive(Subcommand, Clone)]
enum Command {
    /// Run the repeated-injection ignition stroke and write trajectories.
    Ignition,
    /// N-sweep with steady-state statistics and quadratic scaling fits.
    Scaling {
        /// Also run the (long) xi(g), xi(kappa) power-law study.
        #[arg(long)]
        xi_study: bool,
    },
    /// Work curves W(omega_L) and the W_max(N) fit.
    Otto,
    /// Steady-state statistics under atomic decoherence channels.
    Decoherence,
    /// Ignition with the counter-rotating Hamiltonian at g = 0.36.
    Dicke,
    /// Coherence-generation cost report.
    Cost,
}

fn apply_overrides(config: &mut RunConfig, ov: &Overrides) -> Result<(), CoreError> {
    if let Some(dir) = &ov.output_dir {
        config.output_dir = dir.clone();
    }
    if let Some(jobs) = ov.jobs {
        config.jobs = jobs;
    }
    if let Some(g) = ov.g {
        config.physics.g = g;
    }
    if let Some(kappa) = ov.kappa {
        config.physics.kappa = kappa;
    }
    if let Some(atoms) = &ov.atoms {
        let list = parse_atoms_flag(atoms)?;
        config.protocol.atoms = list.clone();
        config.sweep.atoms = list;
    }
    if let Some(grid) = &ov.omega_l_grid {
        config.otto.omega_l = parse_grid_flag(grid)?;
    }
    if let Some(grid) = &ov.gamma_grid {
        config.sweep.gamma = parse_grid_flag(grid)?.values()?;
    }
    if let Some(v) = ov.num_injections {
        config.protocol.num_injections = v;
    }
    if let Some(v) = ov.n_max {
        config.protocol.n_max = v;
    }
    if let Some(v) = ov.t_int {
        config.protocol.t_int = v;
    }
    if let Some(v) = ov.period {
        config.protocol.period = v;
    }
    if let Some(v) = ov.burn_in {
        config.protocol.burn_in = v;
    }
    Ok(())
}

fn resolve_config(cli: &Cli) -> Result<RunConfig, CoreError> {
    let mut config = match &cli.overrides.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| {
                CoreError::InvalidArgument(format!("cannot read {}: {e}", path.display()))
            })?;
            RunConfig::from_toml(&text)?
        }
        None => RunConfig::default(),
    };
    // the Dicke command re-defaults coupling and cluster sizes before flag
    // overrides are applied
    if matches!(cli.command, Command::Dicke) {
        config.physics.hamiltonian = HamiltonianKind::Dicke;
        config.physics.g = 0.36;
        config.protocol.atoms = vec![1, 2, 3];
    }
    apply_overrides(&mut config, &cli.overrides)?;
    config.validate()?;
    Ok(config)
}

fn exit_code_for(err: &CoreError) -> u8 {
    match err {
        CoreError::AtCycle { source, .. } | CoreError::InContext { source, .. } => {
            exit_code_for(source)
        }
        CoreError::InvalidArgument(_) | CoreError::InsufficientData(_) => 2,
        CoreError::ResourceLimit(_) => 4,
        CoreError::RepresentationMismatch { .. }
        | CoreError::InvalidState(_)
        | CoreError::Stiffness { .. }
        | CoreError::Integrity { .. }
        | CoreError::UndefinedTemperature(_)
        | CoreError::FitInfeasible(_) => 3,
    }
}

fn error_kind(code: u8) -> &'static str {
    match code {
        2 => "config",
        3 => "numerical-integrity",
        4 => "resource-limit",
        _ => "error",
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let config = match resolve_config(&cli) {
        Ok(c) => c,
        Err(e) => return fail(&e),
    };
    if cli.overrides.print_config {
        print!("{}", config.to_toml());
        return ExitCode::SUCCESS;
    }

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.jobs)
        .build()
        .expect("worker pool");

    let result = pool.install(|| match &cli.command {
        Command::Ignition => commands::cmd_ignition(&config),
        Command::Scaling { xi_study } => commands::cmd_scaling(&config, *xi_study),
        Command::Otto => commands::cmd_otto(&config),
        Command::Decoherence => commands::cmd_decoherence(&config),
        Command::Dicke => commands::cmd_dicke(&config),
        Command::Cost => commands::cmd_cost(&config),
    });

    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => fail(&e),
    }
}

fn fail(err: &CoreError) -> ExitCode {
    let code = exit_code_for(err);
    eprintln!(
        "{}",
        serde_json::json!({
            "error": error_kind(code),
            "message": err.to_string(),
        })
    );
    ExitCode::from(code)
}
