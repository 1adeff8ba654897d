use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};
use cr_stokes::cases::oracle_check;
use cr_stokes::mesh::export_mesh;
use cr_stokes::study::{parse_entries, run_study, RunConfig, Stage, Study, ORACLE_POINTS};
use cr_stokes::Error;

const EXIT_CONFIG: u8 = 2;
const EXIT_NUMERICAL: u8 = 3;

#[derive(Parser)]
#[command(name = "cr-stokes", version, about = "Penalized Crouzeix-Raviart Stokes solver with slip boundary conditions")]
struct Cli {
    /// Log progress (repeat for more detail)
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    verbose: u8,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a convergence study on a refinement hierarchy
    Solve(SolveArgs),
    /// Check the manufactured data against finite differences
    Oracle(OracleArgs),
}

#[derive(Args)]
struct SolveArgs {
    /// key = value file; flags given here override it
    #[arg(long)]
    config: Option<PathBuf>,
    /// disk2d or ball3d
    #[arg(long)]
    case: Option<String>,
    #[arg(long)]
    levels: Option<String>,
    #[arg(long)]
    gamma: Option<String>,
    /// c in eps = c h^k
    #[arg(long)]
    eps_coef: Option<String>,
    /// k in eps = c h^k
    #[arg(long)]
    eps_exp: Option<String>,
    #[arg(long)]
    nu: Option<String>,
    /// Refinements of the coarse mesh before the first level
    #[arg(long)]
    base_refinements: Option<String>,
    /// Degree of the data quadrature
    #[arg(long)]
    quad_degree: Option<String>,
    /// printed or symmetric (ball3d only)
    #[arg(long)]
    pressure_variant: Option<String>,
    /// csv or markdown
    #[arg(long)]
    format: Option<String>,
    #[arg(long)]
    seed: Option<String>,
    /// Compute Korn, inf-sup, skin and lifting diagnostics per level
    #[arg(long)]
    diagnostics: bool,
    /// Output directory; the table goes to stdout when omitted
    #[arg(long)]
    out: Option<PathBuf>,
    /// Directory for the meshes of every level
    #[arg(long)]
    mesh_out: Option<PathBuf>,
}

#[derive(Args)]
struct OracleArgs {
    #[arg(long, default_value = "disk2d")]
    case: String,
    #[arg(long, default_value_t = ORACLE_POINTS)]
    points: usize,
    #[arg(long, default_value = "printed")]
    pressure_variant: String,
    #[arg(long, default_value_t = 1.0)]
    nu: f64,
    #[arg(long, default_value_t = 2024)]
    seed: u64,
}

/// Failure with the exit code it maps to.
struct Failure {
    code: u8,
    error: anyhow::Error,
}

impl Failure {
    fn config(error: impl Into<anyhow::Error>) -> Self {
        Self { code: EXIT_CONFIG, error: error.into() }
    }

    fn numerical(error: impl Into<anyhow::Error>) -> Self {
        Self { code: EXIT_NUMERICAL, error: error.into() }
    }

    fn io(error: anyhow::Error) -> Self {
        Self { code: 1, error }
    }
}

fn config_from(args: &SolveArgs) -> Result<RunConfig, Failure> {
    let mut entries = match &args.config {
        Some(path) => {
            let text = fs::read_to_string(path)
                .with_context(|| format!("reading config {}", path.display()))
                .map_err(Failure::config)?;
            parse_entries(&text).map_err(Failure::config)?
        }
        None => Vec::new(),
    };
    let flags = [
        ("case", &args.case),
        ("levels", &args.levels),
        ("gamma", &args.gamma),
        ("eps_coef", &args.eps_coef),
        ("eps_exp", &args.eps_exp),
        ("nu", &args.nu),
        ("base_refinements", &args.base_refinements),
        ("quad_degree", &args.quad_degree),
        ("pressure_variant", &args.pressure_variant),
        ("format", &args.format),
        ("seed", &args.seed),
    ];
    entries.extend(flags.iter().filter_map(|(k, v)| v.as_ref().map(|v| (k.to_string(), v.clone()))));
    if args.diagnostics {
        entries.push(("diagnostics".into(), "true".into()));
    }
    let pairs: Vec<(&str, &str)> = entries.iter().map(|(k, v)| (k.as_str(), v.as_str())).collect();
    RunConfig::from_entries(pairs).map_err(Failure::config)
}

fn write(path: &Path, text: &str) -> Result<(), Failure> {
    fs::write(path, text).with_context(|| format!("writing {}", path.display())).map_err(Failure::io)
}

fn emit(study: &Study, args: &SolveArgs) -> Result<(), Failure> {
    let case = study.config.case.name();
    match &args.out {
        Some(dir) => {
            fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display())).map_err(Failure::io)?;
            let table = dir.join(format!("{case}.{}", study.config.format.extension()));
            write(&table, &study.render())?;
            write(&dir.join(format!("{case}_levels.csv")), &study.diagnostics_csv())?;
            log::info!("wrote {}", table.display());
        }
        None => {
            print!("{}", study.render());
            if study.config.diagnostics {
                println!();
                print!("{}", study.diagnostics_csv());
            }
        }
    }
    if let Some(dir) = &args.mesh_out {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display())).map_err(Failure::io)?;
        for level in &study.levels {
            write(&dir.join(format!("{case}_level{}.mesh", level.level)), &export_mesh(&level.mesh))?;
        }
    }
    Ok(())
}

fn solve(args: &SolveArgs) -> Result<(), Failure> {
    let config = config_from(args)?;
    let study = run_study(&config).map_err(|e| {
        if e.stage == Stage::Config || matches!(e.source, Error::Config(_)) {
            Failure::config(e)
        } else {
            Failure::numerical(e)
        }
    })?;
    emit(&study, args)
}

fn oracle(args: &OracleArgs) -> Result<(), Failure> {
    let entries = [
        ("case", args.case.as_str()),
        ("pressure_variant", args.pressure_variant.as_str()),
        ("nu", &args.nu.to_string()),
    ]
    .map(|(k, v)| (k, v.to_string()));
    let pairs: Vec<(&str, &str)> = entries.iter().map(|(k, v)| (*k, v.as_str())).collect();
    let config = RunConfig::from_entries(pairs).map_err(Failure::config)?;
    let (sol, data) = config.manufactured();
    let report = oracle_check(&sol, &data, args.points, args.seed).map_err(Failure::numerical)?;
    println!("case                  {}", config.case.name());
    println!("points                {}", report.points);
    println!("max |div u|           {:.3e}", report.max_divergence);
    println!("max gradient error    {:.3e}", report.max_gradient_error);
    println!("max force error       {:.3e}", report.max_force_error);
    println!("max flux error        {:.3e}", report.max_flux_error);
    println!("max traction error    {:.3e}", report.max_traction_error);
    println!("max |tau . n|         {:.3e}", report.max_traction_normal);
    println!("boundary flux         {:.3e}", report.boundary_flux_integral);
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => log::LevelFilter::Warn,
        1 => log::LevelFilter::Info,
        _ => log::LevelFilter::Debug,
    };
    env_logger::Builder::new().filter_level(level).parse_default_env().init();
    let result = match &cli.command {
        Command::Solve(args) => solve(args),
        Command::Oracle(args) => oracle(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {:#}", f.error);
            ExitCode::from(f.code)
        }
    }
}
