use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use filippov_core::Vec3;

#[derive(Debug, Parser)]
#[command(name = "filippov", version, about = "Inelastic Filippov systems on the sphere and the torus")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct SpecArg {
    /// System spec (JSON).
    #[arg(long)]
    pub spec: PathBuf,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Print the inelastic companion B and its residual.
    Build {
        #[command(flatten)]
        spec: SpecArg,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Tangency set and region labels.
    Classify {
        #[command(flatten)]
        spec: SpecArg,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, default_value_t = filippov_core::tangency::DEFAULT_TOL)]
        tol: f64,
    },
    /// Integrate a Filippov trajectory and write it as CSV.
    Simulate {
        #[command(flatten)]
        spec: SpecArg,
        #[arg(long, value_parser = parse_vec3, allow_hyphen_values = true)]
        x0: Vec3,
        #[arg(long)]
        tmax: f64,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Exit with code 4 if the integrator raised any advisory.
        #[arg(long)]
        strict: bool,
    },
    /// Randomized closure check of the sliding orbits.
    Verify {
        #[command(flatten)]
        spec: SpecArg,
        /// A (sphere) or B (torus); inferred from the spec when omitted.
        #[arg(long)]
        theorem: Option<String>,
        #[arg(long, default_value_t = 100)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Write mesh, tangency curves and sample trajectories for rendering.
    EmitFigure {
        #[command(flatten)]
        spec: SpecArg,
        /// 1 (sphere) or 2 (torus); inferred from the spec when omitted.
        #[arg(long)]
        figure: Option<u8>,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = filippov_core::tangency::DEFAULT_TOL)]
        tol: f64,
    },
}

pub fn parse_vec3(s: &str) -> Result<Vec3, String> {
    let parts: Vec<f64> = s
        .split(',')
        .map(|p| p.trim().parse::<f64>().map_err(|e| format!("{p:?}: {e}")))
        .collect::<Result<_, _>>()?;
    match parts.as_slice() {
        [a, b, c] if parts.iter().all(|v| v.is_finite()) => Ok(Vec3::new(*a, *b, *c)),
        _ => Err(format!("expected three finite numbers, got {s:?}")),
    }
}
