use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use hill_spectral::potential::PeriodicPotential;
use hill_spectral_cli::format::Format;
use hill_spectral_cli::run::{
    self, grid, parse_angle, parse_lambdas, parse_pair, Failure, RunConfig, Shooting,
};

/// Spectral density, stability intervals and edge diagnostics for Hill's
/// equation -y'' + q(x) y = λ y on the half line.
#[derive(Parser)]
#[command(name = "hill-spectral", version)]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Builtin name (mathieu, ex2, ex3, ex4, ex5) or a JSON step-potential file.
    #[arg(long, global = true, default_value = "mathieu")]
    potential: String,
    /// Take the monodromy over this many periods.
    #[arg(long, global = true, default_value_t = 1)]
    periods: usize,
    /// Boundary angle: a number, `pi/k` or `m*pi/k`. Defaults to Dirichlet.
    #[arg(long, global = true, value_parser = parse_angle, allow_hyphen_values = true)]
    alpha: Option<f64>,
    /// Absolute tolerance of the mesh ladder, in [1e-12, 1e-2].
    #[arg(long, global = true)]
    tol: Option<f64>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    format: Format,
    /// Worker threads for grid evaluations (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Write here instead of standard output.
    #[arg(long, short, global = true)]
    output: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Stability intervals in a λ range, with edge tags.
    Bands {
        /// `lo:hi`.
        #[arg(long, value_parser = parse_pair, allow_hyphen_values = true)]
        range: (f64, f64),
        /// Scan points before edge bisection.
        #[arg(long, default_value_t = 2000)]
        grid: usize,
        /// Final bracket width of each edge.
        #[arg(long, default_value_t = 1e-9)]
        edge_tol: f64,
    },
    /// Density on a uniform grid or at listed points.
    Density {
        /// `lo:hi`, sampled at `grid` evenly spaced points.
        #[arg(long, value_parser = parse_pair, allow_hyphen_values = true, required_unless_present = "lambdas")]
        range: Option<(f64, f64)>,
        #[arg(long, default_value_t = 101)]
        grid: usize,
        /// Comma-separated values or a file of values.
        #[arg(long, allow_hyphen_values = true, conflicts_with = "range")]
        lambdas: Option<String>,
        /// Add the cumulative trapezoid integral of f over the grid.
        #[arg(long)]
        rho: bool,
    },
    /// Locate an edge and compare the density formulas approaching it.
    Edge {
        /// `lo:hi` around one edge. Without `--alpha`, the condition that
        /// makes the edge indeterminate is used.
        #[arg(long, value_parser = parse_pair, allow_hyphen_values = true)]
        bracket: (f64, f64),
        /// Approach sequence; by default `steps` points `spacing` apart.
        #[arg(long, allow_hyphen_values = true)]
        lambdas: Option<String>,
        #[arg(long, default_value_t = 6)]
        steps: usize,
        /// Distance between approach points, on the band side.
        #[arg(long, default_value_t = 4e-4)]
        spacing: f64,
    },
    /// Analytic λ-derivatives against central differences.
    Vcheck {
        /// Comma-separated values or a file of values.
        #[arg(long, allow_hyphen_values = true)]
        lambdas: String,
        /// Half-width of the central difference.
        #[arg(long, default_value_t = 1e-4)]
        step: f64,
    },
    /// Mean wall time of repeated density passes over a grid.
    Bench {
        /// `lo:hi`.
        #[arg(long, value_parser = parse_pair, allow_hyphen_values = true)]
        range: (f64, f64),
        #[arg(long, default_value_t = 101)]
        grid: usize,
        /// Repetitions of the whole grid.
        #[arg(long = "bench", visible_alias = "repeat", default_value_t = 100)]
        repetitions: usize,
        #[arg(
            long,
            value_enum,
            value_delimiter = ',',
            default_value = "simple,double"
        )]
        shooting: Vec<Shooting>,
    },
    /// Reference-integrator values of u, u', v, v' at the period.
    #[command(hide = true)]
    Oracle {
        #[arg(long, allow_hyphen_values = true)]
        lambdas: String,
        #[arg(long, default_value_t = 1e-12)]
        rel_tol: f64,
    },
}

fn lambdas_arg(spec: &str) -> Result<Vec<f64>, Failure> {
    parse_lambdas(spec).map_err(Failure::Usage)
}

fn grid_arg(range: (f64, f64), n: usize) -> Result<Vec<f64>, Failure> {
    if n == 0 {
        return Err(Failure::Usage("--grid must be at least 1".into()));
    }
    Ok(grid(range, n))
}

fn execute(cli: Cli) -> Result<(), Failure> {
    let c = cli.common;
    if let Some(n) = c.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Failure::Usage(format!("--threads: {e}")))?;
    }
    let potential = PeriodicPotential::resolve(&c.potential)
        .and_then(|p| p.repeated(c.periods))
        .map_err(|e| Failure::Usage(e.to_string()))?;
    let default_tol = match cli.command {
        Command::Bands { .. } => 1e-12,
        _ => 1e-8,
    };
    let cfg = RunConfig::new(potential, c.alpha, c.tol.unwrap_or(default_tol), c.format)?;
    let mut sink: Box<dyn Write> = match &c.output {
        Some(path) => {
            Box::new(BufWriter::new(File::create(path).map_err(|e| {
                Failure::Usage(format!("{}: {e}", path.display()))
            })?))
        }
        None => Box::new(BufWriter::new(io::stdout().lock())),
    };
    let out = sink.as_mut();
    let result = match cli.command {
        Command::Bands {
            range,
            grid,
            edge_tol,
        } => run::bands(&cfg, out, range, grid, edge_tol),
        Command::Density {
            range,
            grid,
            lambdas,
            rho,
        } => {
            let points = match (lambdas, range) {
                (Some(spec), _) => lambdas_arg(&spec)?,
                (None, Some(r)) => grid_arg(r, grid)?,
                (None, None) => return Err(Failure::Usage("need --range or --lambdas".into())),
            };
            run::density_grid(&cfg, out, &points, rho)
        }
        Command::Edge {
            bracket,
            lambdas,
            steps,
            spacing,
        } => {
            let approach = lambdas.as_deref().map(lambdas_arg).transpose()?;
            if steps == 0 || !(spacing > 0.0) {
                return Err(Failure::Usage(
                    "--steps and --spacing must be positive".into(),
                ));
            }
            run::edge(&cfg, out, bracket, approach, steps, spacing)
        }
        Command::Vcheck { lambdas, step } => run::vcheck(&cfg, out, &lambdas_arg(&lambdas)?, step),
        Command::Bench {
            range,
            grid,
            repetitions,
            shooting,
        } => run::bench(&cfg, out, &grid_arg(range, grid)?, repetitions, &shooting),
        Command::Oracle { lambdas, rel_tol } => {
            run::oracle(&cfg, out, &lambdas_arg(&lambdas)?, rel_tol)
        }
    };
    sink.flush()
        .map_err(|e| Failure::Numerical(format!("cannot write output: {e}")))?;
    result
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("hill-spectral: {f}");
            ExitCode::from(f.exit_code())
        }
    }
}
