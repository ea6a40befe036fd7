mod commands;

use clap::{Args, Parser, Subcommand};
use std::path::PathBuf;
use std::process::ExitCode;

use lambda_torus::{Error, ModelParams, SolverConfig};

const EXIT_CODES: &str = "\
Exit codes:
  0  success
  1  property failure (bounds, joint or simplicity check, failed verify suite)
  2  usage error (bad flags, n < 2, delta <= 0, lambda <= 0 for solve, n != 2 for mesh)
  3  I/O failure
  4  no convergence (bracket, indeterminate shot, terminal tangent)";

#[derive(Debug, Parser)]
#[command(name = "lambda-torus", version, about = "Shooting solver for rotational lambda-tori", after_help = EXIT_CODES)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Integrate one profile from height --delta and write it as CSV.
    #[command(after_help = EXIT_CODES)]
    Shoot(ShootArgs),
    /// Find delta*, close the profile and write a JSON report.
    #[command(after_help = EXIT_CODES)]
    Solve(SolveArgs),
    /// Revolve a profile (n = 2) into an OBJ triangle mesh.
    #[command(after_help = EXIT_CODES)]
    Mesh(MeshArgs),
    /// Run the built-in property suites and print a pass/fail table.
    #[command(after_help = EXIT_CODES)]
    Verify(VerifyArgs),
}

#[derive(Debug, Clone, Args)]
struct ModelArgs {
    /// Dimension of the hypersurface (n >= 2).
    #[arg(long, allow_negative_numbers = true)]
    n: u32,
    /// The constant lambda.
    #[arg(long, allow_negative_numbers = true)]
    lambda: f64,
}

#[derive(Debug, Clone, Args)]
struct SolverArgs {
    /// RK4 step in arc length.
    #[arg(long, allow_negative_numbers = true)]
    step: Option<f64>,
    /// Tolerance for event localization.
    #[arg(long, allow_negative_numbers = true)]
    event_tol: Option<f64>,
    /// Stop bisection once the delta bracket is narrower than this.
    #[arg(long, allow_negative_numbers = true)]
    bisect_tol: Option<f64>,
    /// Allowed |x'(s1) + 1| at delta*.
    #[arg(long, allow_negative_numbers = true)]
    angle_tol: Option<f64>,
    /// Arc-length budget per shot.
    #[arg(long, allow_negative_numbers = true)]
    max_arclength: Option<f64>,
    /// Lower end of a user-supplied delta bracket (needs --delta-hi).
    #[arg(long, allow_negative_numbers = true, requires = "delta_hi")]
    delta_lo: Option<f64>,
    /// Upper end of a user-supplied delta bracket (needs --delta-lo).
    #[arg(long, allow_negative_numbers = true, requires = "delta_lo")]
    delta_hi: Option<f64>,
    /// Worker threads for the bracket scan.
    #[arg(long, default_value_t = 1)]
    jobs: usize,
    /// Reserved; the solver is deterministic.
    #[arg(long)]
    seed: Option<u64>,
}

impl SolverArgs {
    fn config(&self) -> Result<SolverConfig, Error> {
        let mut config = SolverConfig::default();
        if let Some(v) = self.step {
            config.step = v;
        }
        if let Some(v) = self.event_tol {
            config.event_tol = v;
        }
        if let Some(v) = self.bisect_tol {
            config.bisect_tol = v;
        }
        if let Some(v) = self.angle_tol {
            config.angle_tol = v;
        }
        config.max_arclength = self.max_arclength;
        if let (Some(lo), Some(hi)) = (self.delta_lo, self.delta_hi) {
            config.delta_bracket = Some((lo, hi));
        }
        if self.jobs == 0 {
            return Err(Error::InvalidConfig("--jobs must be at least 1".into()));
        }
        config.validate()?;
        Ok(config)
    }
}

#[derive(Debug, Args)]
struct ShootArgs {
    #[command(flatten)]
    model: ModelArgs,
    /// Initial height on the r-axis.
    #[arg(long, allow_negative_numbers = true)]
    delta: f64,
    #[command(flatten)]
    solver: SolverArgs,
    /// Where to write the sampled profile.
    #[arg(long, default_value = "shot.csv")]
    profile_out: PathBuf,
}

#[derive(Debug, Args)]
struct SolveArgs {
    #[command(flatten)]
    model: ModelArgs,
    #[command(flatten)]
    solver: SolverArgs,
    /// JSON report path; standard output when omitted.
    #[arg(long)]
    report_out: Option<PathBuf>,
    /// Closed profile CSV (`x,r`).
    #[arg(long)]
    profile_out: Option<PathBuf>,
    /// OBJ mesh of the torus (n = 2 only).
    #[arg(long)]
    mesh_out: Option<PathBuf>,
    /// Angular segments for --mesh-out.
    #[arg(long, default_value_t = 128)]
    segments: usize,
    /// Profile segments for --mesh-out.
    #[arg(long, default_value_t = 256)]
    profile_segments: usize,
    /// Add wall-clock duration to the report (makes it non-reproducible).
    #[arg(long)]
    record_timing: bool,
}

#[derive(Debug, Args)]
struct MeshArgs {
    #[command(flatten)]
    model: ModelArgs,
    #[command(flatten)]
    solver: SolverArgs,
    /// Angular segments.
    #[arg(long, default_value_t = 128)]
    segments: usize,
    /// Segments along the profile after arc-length resampling.
    #[arg(long, default_value_t = 256)]
    profile_segments: usize,
    /// Profile CSV (`x,r`) to revolve, `-` for standard input. Without it the
    /// torus is solved first.
    #[arg(long, conflicts_with = "sphere")]
    profile_in: Option<String>,
    /// Revolve the analytic round-sphere profile instead.
    #[arg(long)]
    sphere: bool,
    /// Output OBJ path.
    #[arg(long, default_value = "torus.obj")]
    mesh_out: PathBuf,
}

#[derive(Debug, Args)]
struct VerifyArgs {
    #[command(flatten)]
    model: ModelArgs,
    #[command(flatten)]
    solver: SolverArgs,
}

impl ModelArgs {
    fn params(&self) -> Result<ModelParams, Error> {
        ModelParams::new(self.n, self.lambda)
    }
}

fn exit_code(err: &Error) -> u8 {
    match err {
        Error::InvalidConfig(_) | Error::Domain(_) => 2,
        Error::Io(_) | Error::Csv(_) | Error::Json(_) => 3,
        Error::Bracket(_) | Error::Indeterminate { .. } | Error::NoConvergence { .. } => 4,
        Error::Joint(_) | Error::Simplicity { .. } => 1,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Shoot(args) => commands::shoot(args),
        Command::Solve(args) => commands::solve(args),
        Command::Mesh(args) => commands::mesh(args),
        Command::Verify(args) => commands::verify(args),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(exit_code(&err))
        }
    }
}
