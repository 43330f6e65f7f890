mod commands;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{ArgGroup, Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

/// Trapped-mode analysis for curved three-dimensional waveguides.
#[derive(Debug, Parser, Serialize)]
#[command(name = "waveguide", version)]
pub struct Cli {
    /// Worker threads (defaults to all cores).
    #[arg(long, global = true, env = "WAVEGUIDE_THREADS")]
    pub threads: Option<usize>,
    /// Seed for the eigensolver start block.
    #[arg(long, global = true, default_value_t = 0x5eed_0001)]
    pub seed: u64,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Command {
    /// Second Neumann eigenpair, X and b of a cross-section.
    Section(SectionArgs),
    /// Rotation-minimizing frame, curvature norms and Y of a base curve.
    Curve(CurveArgs),
    /// Trapped-mode conditions from a section report and a curve summary.
    Check(CheckArgs),
    /// Adjoint state and shape derivative of X on a rectangle.
    Shapederiv(ShapeDerivArgs),
    /// X on a rectangle with a growing half-disk bump.
    Sweep(SweepArgs),
}

#[derive(Debug, Args, Serialize)]
#[command(group(ArgGroup::new("source").required(true).args(["triangle", "rect", "polygon", "gmsh", "mesh", "dumbbell"])))]
pub struct SectionArgs {
    /// Right triangle with unit legs, N cells per leg.
    #[arg(long, value_name = "N")]
    pub triangle: Option<usize>,
    /// Rectangle (0, L) x (0, H).
    #[arg(long, num_args = 2, value_names = ["L", "H"])]
    pub rect: Option<Vec<f64>>,
    #[arg(long, default_value_t = 128)]
    pub nx: usize,
    /// Defaults to nx * H / L.
    #[arg(long)]
    pub ny: Option<usize>,
    /// Polygon vertices as `x,y` CSV rows.
    #[arg(long, value_name = "FILE")]
    pub polygon: Option<PathBuf>,
    /// Gmsh 2.2 ASCII mesh.
    #[arg(long, value_name = "FILE")]
    pub gmsh: Option<PathBuf>,
    /// Mesh JSON with `vertices` and `triangles`.
    #[arg(long, value_name = "FILE")]
    pub mesh: Option<PathBuf>,
    /// Uneven dumbbell: disks of radii 1 and 2 joined by a strip.
    #[arg(long)]
    pub dumbbell: bool,
    /// Target edge length for --polygon and --dumbbell.
    #[arg(long, default_value_t = 0.05)]
    pub h: f64,
    #[arg(long, num_args = 2, value_names = ["X", "Y"], default_values_t = [0.0, 0.0], allow_negative_numbers = true)]
    pub origin: Vec<f64>,
    /// Eigenpair residual tolerance.
    #[arg(long, default_value_t = 1e-8)]
    pub tol: f64,
    /// Skip the refined-mesh estimate of the discretization error.
    #[arg(long)]
    pub no_refine_check: bool,
    #[arg(long, short)]
    pub out: Option<PathBuf>,
    /// Also write the eigenvectors to this sidecar file.
    #[arg(long, value_name = "FILE")]
    pub eigvecs: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
#[command(group(ArgGroup::new("shape").required(true).args(["line", "parabola", "circle", "helix", "sbend", "samples"])))]
pub struct CurveArgs {
    #[arg(long)]
    pub line: bool,
    /// Parabola (t, a t^2, 0); a defaults to 1.
    #[arg(long, value_name = "A", num_args = 0..=1, default_missing_value = "1", allow_negative_numbers = true)]
    pub parabola: Option<f64>,
    /// Circular arc of radius R through ANGLE radians.
    #[arg(long, num_args = 2, value_names = ["R", "ANGLE"])]
    pub circle: Option<Vec<f64>>,
    /// Helix (R cos t, R sin t, C t).
    #[arg(long, num_args = 2, value_names = ["R", "C"], allow_negative_numbers = true)]
    pub helix: Option<Vec<f64>>,
    #[arg(long)]
    pub sbend: bool,
    /// Sampled points as `t,x,y[,z]` CSV rows.
    #[arg(long, value_name = "FILE")]
    pub samples: Option<PathBuf>,
    /// Scale the curve to t -> gamma(delta t) / delta.
    #[arg(long)]
    pub delta: Option<f64>,
    /// Arclength window [-W, W] measured from t = 0.
    #[arg(long, value_name = "W", conflicts_with = "param_window")]
    pub window: Option<f64>,
    /// Parameter window [T0, T1].
    #[arg(long, num_args = 2, value_names = ["T0", "T1"], allow_negative_numbers = true)]
    pub param_window: Option<Vec<f64>>,
    /// Arclength intervals.
    #[arg(long, default_value_t = 4000)]
    pub n: usize,
    /// Rotate the initial transverse frame by this angle.
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub frame_angle: f64,
    /// Summary JSON (stdout when absent).
    #[arg(long, short)]
    pub out: Option<PathBuf>,
    /// Frame CSV with columns s, k1, k2, kappa.
    #[arg(long, value_name = "FILE")]
    pub frames: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum FormArg {
    Theorem,
    Proposition,
}

#[derive(Debug, Args, Serialize)]
pub struct CheckArgs {
    /// Output of `waveguide section`.
    #[arg(long, value_name = "FILE")]
    pub section: PathBuf,
    /// Output of `waveguide curve`.
    #[arg(long, value_name = "FILE")]
    pub curve: PathBuf,
    /// Twist angle in radians, or `auto` for the optimal angle.
    #[arg(long, default_value = "auto", allow_negative_numbers = true)]
    pub theta: String,
    #[arg(long, default_value_t = 1.0)]
    pub eps0: f64,
    #[arg(long, default_value_t = 1.0)]
    pub mu0: f64,
    #[arg(long, value_enum, default_value_t = FormArg::Theorem)]
    pub form: FormArg,
    /// Supremum of |theta' - beta| along the curve.
    #[arg(long, default_value_t = 0.0)]
    pub twist_dev_sup: f64,
    /// Frame CSV from `waveguide curve --frames`; enables the trial-energy search.
    #[arg(long, value_name = "FILE")]
    pub frames: Option<PathBuf>,
    #[arg(long, default_value_t = 4097)]
    pub grid: usize,
    #[arg(long, short)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct ShapeDerivArgs {
    /// Rectangle (0, L) x (0, H).
    #[arg(long, num_args = 2, value_names = ["L", "H"], required = true)]
    pub rect: Vec<f64>,
    #[arg(long, default_value_t = 128)]
    pub nx: usize,
    #[arg(long)]
    pub ny: Option<usize>,
    /// Direction of X to differentiate.
    #[arg(long, num_args = 2, value_names = ["W1", "W2"], required = true, allow_negative_numbers = true)]
    pub w: Vec<f64>,
    /// Compare the adjoint state and the boundary integrand with the closed forms.
    #[arg(long)]
    pub analytic_compare: bool,
    /// Velocity growing a half-disk bump: SIDE CENTER RADIUS.
    #[arg(long, num_args = 3, value_names = ["SIDE", "CENTER", "RADIUS"], conflicts_with = "translate")]
    pub bump: Option<Vec<String>>,
    /// Rigid translation velocity.
    #[arg(long, num_args = 2, value_names = ["V1", "V2"], allow_negative_numbers = true)]
    pub translate: Option<Vec<f64>>,
    /// Finite-difference steps.
    #[arg(long, default_value = "1e-3,2e-3,4e-3")]
    pub ladder: String,
    #[arg(long, default_value_t = 1e-10)]
    pub tol: f64,
    #[arg(long, short)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct SweepArgs {
    /// Rectangle (0, L) x (0, H).
    #[arg(long, num_args = 2, value_names = ["L", "H"], required = true)]
    pub rect: Vec<f64>,
    /// SIDE CENTER RADII, radii as start:stop:step or a comma list.
    #[arg(long, num_args = 3, value_names = ["SIDE", "CENTER", "RADII"], required = true)]
    pub bump: Vec<String>,
    #[arg(long, default_value_t = 256)]
    pub nx: usize,
    #[arg(long)]
    pub ny: Option<usize>,
    #[arg(long, default_value_t = 1e-10)]
    pub tol: f64,
    /// CSV path (stdout when absent); a `.json` sidecar echoes the configuration.
    #[arg(long, short)]
    pub out: Option<PathBuf>,
}

/// Exit status of a successful run.
pub enum Outcome {
    Clean,
    Warnings,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: cannot size the thread pool: {e}");
            return ExitCode::from(1);
        }
    }
    match commands::run(&cli) {
        Ok(Outcome::Clean) => ExitCode::SUCCESS,
        Ok(Outcome::Warnings) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
