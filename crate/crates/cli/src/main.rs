use std::path::PathBuf;
use std::process::ExitCode;

use b3fem::{build_dofmap_for, Domain, Element};
use b3fem_cli::{presets, run, CliError, ExperimentConfig, Overrides};
use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(name = "b3fem", version, about = "B3 and Morley finite element experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment from a preset or a JSON configuration.
    Run(RunArgs),
    /// Print mesh counts as JSON.
    MeshInfo {
        #[arg(long)]
        domain: Domain,
        #[arg(long)]
        n: usize,
    },
    /// List the built-in experiments.
    ListPresets,
}

#[derive(Args)]
struct RunArgs {
    #[arg(long, conflicts_with = "preset", required_unless_present = "preset")]
    config: Option<PathBuf>,
    #[arg(long)]
    preset: Option<String>,
    /// Number of mesh levels.
    #[arg(long)]
    levels: Option<usize>,
    #[arg(long)]
    num_eigs: Option<usize>,
    #[arg(long, allow_negative_numbers = true)]
    shift: Option<f64>,
    /// Morley parameters, comma separated.
    #[arg(long, value_delimiter = ',')]
    alpha: Option<Vec<f64>>,
    #[arg(long)]
    tol: Option<f64>,
    /// Restart limit of the eigensolver.
    #[arg(long)]
    max_iter: Option<usize>,
    /// Write the assembled matrices of every level in Matrix Market format.
    #[arg(long, value_name = "DIR")]
    dump_matrices: Option<PathBuf>,
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
}

fn load_config(args: &RunArgs) -> Result<ExperimentConfig, CliError> {
    let mut config = match (&args.config, &args.preset) {
        (Some(path), _) => {
            let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
            ExperimentConfig::from_json(&text)?
        }
        (None, Some(name)) => presets::find(name)
            .ok_or_else(|| CliError::Validation(format!("unknown preset '{name}' (see list-presets)")))?
            .config(),
        (None, None) => return Err(CliError::Validation("either --config or --preset is required".into())),
    };
    config.apply(&Overrides {
        levels: args.levels,
        num_eigs: args.num_eigs,
        shift: args.shift,
        alphas: args.alpha.clone(),
        tol: args.tol,
        max_iter: args.max_iter,
        out: args.out.clone(),
    })?;
    Ok(config)
}

fn configure_threads() -> Result<(), CliError> {
    let Ok(value) = std::env::var("FEM_THREADS") else { return Ok(()) };
    let threads: usize = value
        .trim()
        .parse()
        .ok()
        .filter(|&t| t > 0)
        .ok_or_else(|| CliError::Validation(format!("FEM_THREADS must be a positive integer, got '{value}'")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| CliError::Validation(format!("thread pool: {e}")))
}

fn mesh_info(domain: Domain, n: usize) -> Result<(), CliError> {
    let mesh = domain.build(n)?;
    let info = serde_json::json!({
        "domain": domain.name(),
        "n": n,
        "h": mesh.h(),
        "stats": mesh.stats(),
        "b3_dofs": build_dofmap_for(&mesh, Element::B3).num_dofs(),
        "morley_dofs": build_dofmap_for(&mesh, Element::Morley).num_dofs(),
    });
    println!("{}", serde_json::to_string_pretty(&info).expect("json value serializes"));
    Ok(())
}

fn dispatch(cli: Cli) -> Result<(), CliError> {
    configure_threads()?;
    match cli.command {
        Command::ListPresets => {
            print!("{}", presets::listing());
            Ok(())
        }
        Command::MeshInfo { domain, n } => mesh_info(domain, n),
        Command::Run(args) => {
            let config = load_config(&args)?;
            let out = run(&config, args.dump_matrices.as_deref())?;
            println!("{}", out.table.display());
            println!("{}", out.report.display());
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    match dispatch(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
