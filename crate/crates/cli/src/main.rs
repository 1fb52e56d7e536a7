//! `crpc`: generate, certify and classify helical surfaces with a constant
//! ratio of principal curvatures.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{error::ErrorKind, Args, Parser, Subcommand};

mod commands;
mod config;
mod error;
mod output;
mod report;

use config::{Format, Overrides, ShapeArgs};
use error::CliError;

#[derive(Debug, Parser)]
#[command(
    name = "crpc",
    version,
    about = "Helical surfaces with a constant principal curvature ratio"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Write the surface mesh (obj), the profile (csv) or the singular curve (poly).
    Generate(GenerateArgs),
    /// Certify the curvature ratio on a parameter grid and write a JSON report.
    Verify(VerifyArgs),
    /// Implicit polynomial of the top view for rational k = n/m.
    Topview(TopviewArgs),
    /// Shape class relative to the critical constant C_k (k > 1).
    Classify(ClassifyArgs),
    /// Section by a plane through the axis, as SVG or CSV.
    Profile(ProfileArgs),
    /// Summary of domain, class, cusp and limit data without the grid certificate.
    Report(ReportArgs),
}

#[derive(Debug, Clone, Default, Args)]
struct GridArgs {
    /// Sample grid as NVxNT [default: 64x64].
    #[arg(long)]
    grid: Option<String>,
    /// Angle interval as a:b [default: 0:2pi].
    #[arg(long = "v-range", allow_hyphen_values = true)]
    v_range: Option<String>,
}

#[derive(Debug, Clone, Default, Args)]
struct OutArgs {
    /// Output file; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<Format>,
}

#[derive(Debug, Args)]
struct GenerateArgs {
    #[command(flatten)]
    shape: ShapeArgs,
    #[command(flatten)]
    grid: GridArgs,
    #[command(flatten)]
    out: OutArgs,
    /// Also write the profile CSV used for the mesh.
    #[arg(long = "profile-out")]
    profile_out: Option<PathBuf>,
    /// Sweep a previously written profile CSV instead of recomputing it.
    #[arg(long = "from-profile")]
    from_profile: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct VerifyArgs {
    #[command(flatten)]
    shape: ShapeArgs,
    #[command(flatten)]
    grid: GridArgs,
    #[command(flatten)]
    out: OutArgs,
    /// Use finite-difference partials (bound relaxed to 1e-4).
    #[arg(long = "fd-only")]
    fd_only: bool,
    /// Number of profile samples for the ODE and Steiner statistics [default: 1000].
    #[arg(long)]
    samples: Option<usize>,
    /// Scales g before certification; a negative control for tests.
    #[arg(long = "tamper-g", hide = true)]
    tamper_g: Option<f64>,
}

#[derive(Debug, Args)]
struct TopviewArgs {
    #[command(flatten)]
    shape: ShapeArgs,
    #[command(flatten)]
    out: OutArgs,
    /// Numerator of k = n/m.
    #[arg(long)]
    n: u64,
    /// Denominator of k = n/m.
    #[arg(long)]
    m: u64,
    /// Keep C as a variable of the polynomial.
    #[arg(long = "symbolic-C")]
    symbolic_c: bool,
    /// Number of top-view samples for the residual [default: 200].
    #[arg(long)]
    samples: Option<usize>,
}

#[derive(Debug, Args)]
struct ClassifyArgs {
    #[command(flatten)]
    shape: ShapeArgs,
    #[command(flatten)]
    out: OutArgs,
}

#[derive(Debug, Args)]
struct ProfileArgs {
    #[command(flatten)]
    shape: ShapeArgs,
    #[command(flatten)]
    out: OutArgs,
    /// Angle of the cutting plane through the axis, in radians [default: 0].
    #[arg(long = "plane-angle", allow_hyphen_values = true)]
    plane_angle: Option<String>,
    /// Points per half of the section [default: 1000].
    #[arg(long)]
    samples: Option<usize>,
    /// Largest |t| sampled [default: t_k, or 6 when unbounded].
    #[arg(long = "t-extent")]
    t_extent: Option<f64>,
    /// SVG user units per model unit.
    #[arg(long = "svg-scale", default_value_t = 100.0)]
    svg_scale: f64,
}

#[derive(Debug, Args)]
struct ReportArgs {
    #[command(flatten)]
    shape: ShapeArgs,
    #[command(flatten)]
    out: OutArgs,
}

fn overrides(grid: Option<&GridArgs>, out: &OutArgs) -> Overrides {
    Overrides {
        grid: grid.and_then(|g| g.grid.clone()),
        v_range: grid.and_then(|g| g.v_range.clone()),
        format: out.format,
        ..Overrides::default()
    }
}

fn run(cli: Cli) -> error::Result<()> {
    match cli.command {
        Command::Generate(a) => {
            let cfg = config::RunConfig::resolve(&a.shape, overrides(Some(&a.grid), &a.out))?;
            commands::generate(
                &cfg,
                a.out.out.as_deref(),
                a.profile_out.as_deref(),
                a.from_profile.as_deref(),
            )
        }
        Command::Verify(a) => {
            let mut over = overrides(Some(&a.grid), &a.out);
            over.samples = a.samples;
            let cfg = config::RunConfig::resolve(&a.shape, over)?;
            commands::verify(&cfg, a.out.out.as_deref(), a.fd_only, a.tamper_g)
        }
        Command::Topview(a) => {
            let mut over = overrides(None, &a.out);
            over.samples = a.samples;
            let cfg = config::RunConfig::resolve(&a.shape, over)?;
            commands::topview(&cfg, a.out.out.as_deref(), a.n, a.m, a.symbolic_c)
        }
        Command::Classify(a) => {
            let cfg = config::RunConfig::resolve(&a.shape, overrides(None, &a.out))?;
            commands::classify(&cfg, a.out.out.as_deref())
        }
        Command::Profile(a) => {
            let mut over = overrides(None, &a.out);
            over.samples = a.samples;
            over.plane_angle = a.plane_angle.clone();
            let cfg = config::RunConfig::resolve(&a.shape, over)?;
            commands::profile(&cfg, a.out.out.as_deref(), a.t_extent, a.svg_scale)
        }
        Command::Report(a) => {
            let cfg = config::RunConfig::resolve(&a.shape, overrides(None, &a.out))?;
            commands::report(&cfg, a.out.out.as_deref())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = e.print();
                return ExitCode::SUCCESS;
            }
            let rendered = e.to_string();
            let message = rendered
                .lines()
                .next()
                .unwrap_or("invalid arguments")
                .trim_start_matches("error: ")
                .to_string();
            let err = CliError::InvalidArgs(message);
            eprintln!("{}", err.to_json());
            return ExitCode::from(err.exit_code());
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", e.to_json());
            ExitCode::from(e.exit_code())
        }
    }
}
