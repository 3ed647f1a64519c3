mod commands;
mod error;
mod svg;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use apoint_equidist::apoint::write_atomic;
use apoint_equidist::families::FunctionFamily;
use apoint_equidist::target::parse_complex;
use apoint_equidist::TargetSpec;
use clap::{Args, Parser, Subcommand};

use commands::{parse_list, DecomposeRequest, EquidistRequest, Output};
use error::CliError;

/// a-points of zeta derivatives and equidistribution of {f(gamma)} modulo one.
#[derive(Parser)]
#[command(name = "apoint-equidist", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Locate the a-points of zeta^(k) up to --t-max and store them in the cache.
    Apoints {
        #[command(flatten)]
        target: TargetArgs,
        #[arg(long)]
        t_max: f64,
        #[command(flatten)]
        io: IoArgs,
    },
    /// Compare cached counts with the main term on a T grid.
    VerifyCounting {
        #[command(flatten)]
        target: TargetArgs,
        /// Comma-separated T values; defaults to 50, 100, 200, ... up to the cached range.
        #[arg(long, allow_hyphen_values = true)]
        t_grid: Option<String>,
        #[command(flatten)]
        io: IoArgs,
    },
    /// Weyl sums and star discrepancy of {f(gamma)} over cached ordinates.
    Equidist {
        #[command(flatten)]
        target: TargetArgs,
        #[command(flatten)]
        family: FamilyArgs,
        /// Upper end of the ordinates used; defaults to the cached range.
        #[arg(long)]
        t_max: Option<f64>,
        #[arg(long = "h", default_value = "1", allow_hyphen_values = true)]
        h: Vec<i64>,
        /// Comma-separated ascending prefix sizes.
        #[arg(long)]
        prefixes: Option<String>,
        #[command(flatten)]
        io: IoArgs,
    },
    /// Split the exponential sum over ordinates into its smooth part S1 and remainder S2.
    Decompose {
        #[command(flatten)]
        target: TargetArgs,
        #[command(flatten)]
        family: FamilyArgs,
        #[arg(long)]
        t_max: f64,
        /// Comma-separated T values; the output becomes a list of reports.
        #[arg(long)]
        t_grid: Option<String>,
        #[arg(long, default_value_t = 1e-8)]
        quad_tol: f64,
        #[command(flatten)]
        io: IoArgs,
    },
    /// Numeric verdicts on the admissibility conditions for a family.
    CheckConditions {
        #[command(flatten)]
        target: TargetArgs,
        #[command(flatten)]
        family: FamilyArgs,
        #[arg(long, default_value_t = 1e5)]
        t_max: f64,
        #[arg(long, default_value_t = 400)]
        grid: usize,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
    },
}

#[derive(Args)]
struct TargetArgs {
    /// Derivative order of zeta.
    #[arg(long, default_value_t = 0)]
    k: u32,
    /// Target value, "re" or "re+imi".
    #[arg(long, default_value = "0", allow_hyphen_values = true)]
    a: String,
}

impl TargetArgs {
    fn target(&self) -> Result<TargetSpec, CliError> {
        Ok(TargetSpec::new(parse_complex(&self.a)?, self.k)?)
    }
}

#[derive(Args)]
struct FamilyArgs {
    /// e.g. "powerlog:u=1,v=0.5,w=0", "loglog:u=1,v=2,w=0", "powzeta:u=1,v=0.5", "linear:alpha=1".
    #[arg(long)]
    family: String,
    #[arg(long, default_value_t = 100.0)]
    c: f64,
}

impl FamilyArgs {
    fn family(&self) -> Result<FunctionFamily, CliError> {
        Ok(self.family.parse()?)
    }
}

#[derive(Args)]
struct IoArgs {
    #[arg(long, default_value = "apoints.csv")]
    cache: PathBuf,
    /// JSON output file; standard output when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// SVG plot file.
    #[arg(long)]
    plot: Option<PathBuf>,
    /// Accepted for configuration files; every command is deterministic.
    #[arg(long)]
    seed: Option<u64>,
}

fn run(cli: Cli) -> Result<(Output, Option<PathBuf>, Option<PathBuf>), CliError> {
    Ok(match cli.command {
        Command::Apoints { target, t_max, io } => (commands::apoints(&target.target()?, t_max, &io.cache)?, io.out, io.plot),
        Command::VerifyCounting { target, t_grid, io } => {
            (commands::verify_counting(&target.target()?, &io.cache, t_grid.as_deref())?, io.out, io.plot)
        }
        Command::Equidist { target, family, t_max, h, prefixes, io } => {
            let req = EquidistRequest {
                target: target.target()?,
                family: family.family()?,
                cache_path: &io.cache,
                c: family.c,
                t_max,
                hs: h,
                prefixes: prefixes.as_deref().map(|p| parse_list(p, "--prefixes")).transpose()?,
            };
            (commands::equidist(&req)?, io.out, io.plot)
        }
        Command::Decompose { target, family, t_max, t_grid, quad_tol, io } => {
            let req = DecomposeRequest {
                target: target.target()?,
                family: family.family()?,
                cache_path: &io.cache,
                c: family.c,
                t_max,
                t_grid: t_grid.as_deref().map(|g| parse_list(g, "--t-grid")).transpose()?,
                quad_tol,
            };
            (commands::decompose_cmd(&req)?, io.out, io.plot)
        }
        Command::CheckConditions { target, family, t_max, grid, out, .. } => {
            (commands::check_conditions_cmd(&family.family()?, &target.target()?, family.c, t_max, grid)?, out, None)
        }
    })
}

fn emit(output: Output, out: Option<PathBuf>, plot: Option<PathBuf>) -> Result<(), CliError> {
    let io = |e: std::io::Error| CliError::Invalid(format!("cannot write output: {e}"));
    let mut stderr = std::io::stderr().lock();
    for note in &output.notes {
        writeln!(stderr, "{note}").map_err(io)?;
    }
    match out {
        Some(path) => write_atomic(&path, output.json.as_bytes())?,
        None => std::io::stdout().lock().write_all(output.json.as_bytes()).map_err(io)?,
    }
    if let Some(path) = plot {
        match output.plot {
            Some(svg) => write_atomic(&path, svg.as_bytes())?,
            None => writeln!(stderr, "this command has no plot; --plot ignored").map_err(io)?,
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli).and_then(|(output, out, plot)| emit(output, out, plot)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
