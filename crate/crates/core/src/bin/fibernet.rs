use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use fibernet::io::{self, parse_eps_list, parse_grid, Csv, RunConfig, Tolerances};
use fibernet::Error;

#[derive(Parser)]
#[command(
    name = "fibernet",
    version,
    about = "Thin-waveguide networks: graph spectra, scattering and junction solves"
)]
struct Cli {
    /// Worker threads (default: $FIBERNET_THREADS, else all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Relative singularity tolerance for spectral points.
    #[arg(long, global = true, default_value_t = fibernet::assembly::SINGULARITY_TOLERANCE)]
    singularity_tol: f64,
    /// Unitarity/symmetry tolerance for `validate` (default depends on the data).
    #[arg(long, global = true)]
    validation_tol: Option<f64>,
    /// Snap tolerance for threshold eigenvalues.
    #[arg(long, global = true, default_value_t = fibernet::vertex::SNAP_TOLERANCE)]
    snap_tol: f64,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse a graph file and check its vertex data.
    Validate { graph: PathBuf },
    /// Eigenvalues of a bounded graph.
    Spectrum {
        graph: PathBuf,
        #[arg(long)]
        eps: f64,
        #[arg(long)]
        lmin: f64,
        #[arg(long)]
        lmax: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Network scattering matrix over a lambda grid (`a:b:n` or a comma list).
    Smatrix {
        graph: PathBuf,
        #[arg(long)]
        eps: f64,
        #[arg(long)]
        lambda_grid: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Green function from a source point `edge:t` to target points.
    Green {
        graph: PathBuf,
        #[arg(long)]
        eps: f64,
        #[arg(long)]
        lambda: f64,
        #[arg(long)]
        source: String,
        #[arg(long, value_delimiter = ',', required = true)]
        targets: Vec<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Limiting eigenvalues at the threshold and their epsilon family.
    Threshold {
        graph: PathBuf,
        #[arg(long, default_value_t = 3)]
        count: usize,
        #[arg(long)]
        eps_list: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Tabulate a junction scattering matrix from the 2D solver.
    Junction {
        geometry: PathBuf,
        #[arg(long)]
        lambda_grid: String,
        #[arg(long)]
        h: f64,
        #[arg(long, default_value_t = 8)]
        modes: usize,
        /// Table file to write.
        #[arg(long)]
        table: PathBuf,
        /// Diagnostics CSV (stdout if absent).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// 2D network eigenvalues against the graph model over an epsilon list.
    Converge {
        geometry: PathBuf,
        #[arg(long, default_value = "0.2,0.1,0.05")]
        eps_list: String,
        #[arg(long, default_value_t = 16)]
        points_per_width: usize,
        #[arg(long, default_value_t = 3)]
        count: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn emit(csv: Csv, out: Option<PathBuf>) -> Result<(), Error> {
    if let Some(text) = csv.emit(out.as_deref())? {
        print!("{text}");
    }
    Ok(())
}

fn run(cli: Cli, config: RunConfig) -> Result<ExitCode, Error> {
    config.validate()?;
    if let Some(n) = config.resolved_threads() {
        // fails only if a pool exists already, which is harmless
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global();
    }
    match cli.command {
        Command::Validate { graph } => {
            let outcome = io::cmd_validate(&graph, &config)?;
            for m in &outcome.messages {
                println!("{m}");
            }
            return Ok(if outcome.valid {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            });
        }
        Command::Spectrum {
            graph,
            eps,
            lmin,
            lmax,
            out,
        } => emit(io::cmd_spectrum(&graph, eps, lmin, lmax, &config)?, out)?,
        Command::Smatrix {
            graph,
            eps,
            lambda_grid,
            out,
        } => {
            let grid = parse_grid(&lambda_grid)?;
            emit(io::cmd_smatrix(&graph, eps, &grid, &config)?, out)?
        }
        Command::Green {
            graph,
            eps,
            lambda,
            source,
            targets,
            out,
        } => emit(
            io::cmd_green(&graph, eps, lambda, &source, &targets, &config)?,
            out,
        )?,
        Command::Threshold {
            graph,
            count,
            eps_list,
            out,
        } => {
            let eps = match eps_list {
                Some(s) => parse_eps_list(&s)?,
                None => Vec::new(),
            };
            emit(io::cmd_threshold(&graph, count, &eps, &config)?, out)?
        }
        Command::Junction {
            geometry,
            lambda_grid,
            h,
            modes,
            table,
            out,
        } => {
            let grid = parse_grid(&lambda_grid)?;
            emit(
                io::cmd_junction(&geometry, &grid, h, modes, &table, &config)?,
                out,
            )?
        }
        Command::Converge {
            geometry,
            eps_list,
            points_per_width,
            count,
            out,
        } => {
            let eps = parse_eps_list(&eps_list)?;
            emit(
                io::cmd_converge(&geometry, &eps, points_per_width, count, &config)?,
                out,
            )?
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let argv: Vec<String> = std::env::args().collect();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let mut config = RunConfig::new(argv);
    config.threads = cli.threads;
    config.tolerances = Tolerances {
        singularity: cli.singularity_tol,
        validation: cli.validation_tol,
        snap: cli.snap_tol,
    };
    match run(cli, config) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(io::exit_code(&e) as u8)
        }
    }
}
