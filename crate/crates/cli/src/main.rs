mod commands;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use peakwave::WaveParams;

/// Dnoidal-peak standing waves of NLS with a periodic δ defect.
#[derive(Debug, Parser)]
#[command(name = "peakwave", version)]
pub struct Cli {
    /// Output directory.
    #[arg(long, global = true, env = "PEAKWAVE_OUT_DIR", default_value = ".")]
    pub out_dir: PathBuf,
    /// File name prefix (defaults to the command name).
    #[arg(long, global = true)]
    pub prefix: Option<String>,
    /// Exit with status 4 on an inconclusive verdict.
    #[arg(long, global = true)]
    pub strict: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, Args)]
pub struct WaveArgs {
    #[arg(long, allow_negative_numbers = true)]
    pub omega: f64,
    #[arg(long, allow_negative_numbers = true)]
    pub z: f64,
    #[arg(long, alias = "L", allow_negative_numbers = true)]
    pub half_period: f64,
}

impl WaveArgs {
    pub fn params(&self) -> WaveParams {
        WaveParams::new(self.omega, self.z, self.half_period)
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve for the profile and write samples plus residual diagnostics.
    BuildWave {
        #[command(flatten)]
        wave: WaveArgs,
        #[arg(long, default_value_t = 1024)]
        n: usize,
    },
    /// Low spectrum of L₁ and/or L₂ about the profile.
    Spectrum {
        #[command(flatten)]
        wave: WaveArgs,
        #[arg(long, default_value_t = 1024)]
        n: usize,
        /// l1, l2 or both.
        #[arg(long, default_value = "both")]
        op: String,
        #[arg(long, default_value_t = 8)]
        count: usize,
        /// Also write eigenvectors as a CSV matrix.
        #[arg(long)]
        vectors: bool,
    },
    /// Exact spectrum of −Δ_γ, optionally against the discretization.
    DeltaSpectrum {
        /// Strength γ; `inf` selects the Dirichlet condition.
        #[arg(long, allow_negative_numbers = true)]
        gamma: f64,
        #[arg(long, alias = "L")]
        half_period: f64,
        #[arg(long, default_value_t = 5)]
        count: usize,
        /// Grid size for the discrete comparison (0 skips it).
        #[arg(long, default_value_t = 0)]
        n: usize,
    },
    /// Index-criterion verdict with slope and eigenvalue counts.
    Classify {
        #[command(flatten)]
        wave: WaveArgs,
        #[arg(long, default_value_t = 1024)]
        n: usize,
        /// ω-step as a fraction of ω.
        #[arg(long, default_value_t = 1e-3)]
        h_omega_rel: f64,
    },
    /// Split-step integration from a perturbed profile.
    Evolve {
        #[command(flatten)]
        wave: WaveArgs,
        #[arg(long, default_value_t = 1024)]
        n: usize,
        #[arg(long, default_value_t = 1e-4)]
        dt: f64,
        #[arg(long = "T", alias = "t-final", default_value_t = 1.0)]
        t_final: f64,
        #[arg(long, default_value_t = 500)]
        records: usize,
        /// none, even:ε, odd:ε, random:ε or phase:ε.
        #[arg(long, default_value = "none")]
        perturb: String,
        /// eigen or cayley.
        #[arg(long, default_value = "eigen")]
        linear: String,
        #[arg(long, default_value_t = 0x5eed)]
        seed: u64,
        #[arg(long, default_value_t = 1e-2)]
        dt_ceiling: f64,
        #[arg(long, default_value_t = 1e3)]
        blowup_factor: f64,
        /// Write the final state as a complex grid.
        #[arg(long)]
        snapshot: bool,
    },
    /// Classify every point of an (ω, Z) lattice.
    Sweep {
        #[arg(long, allow_negative_numbers = true)]
        omega_min: f64,
        #[arg(long, allow_negative_numbers = true)]
        omega_max: f64,
        #[arg(long, default_value_t = 8)]
        omega_count: usize,
        #[arg(long, allow_negative_numbers = true)]
        z_min: f64,
        #[arg(long, allow_negative_numbers = true)]
        z_max: f64,
        #[arg(long, default_value_t = 5)]
        z_count: usize,
        #[arg(long, alias = "L")]
        half_period: f64,
        #[arg(long, default_value_t = 256)]
        n: usize,
        #[arg(long, default_value_t = 1e-3)]
        h_omega_rel: f64,
        /// Worker threads (0 uses all cores).
        #[arg(long, default_value_t = 0)]
        threads: usize,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let usage = e.use_stderr();
            let _ = e.print();
            return ExitCode::from(if usage { commands::EXIT_USAGE } else { 0 });
        }
    };
    match commands::run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("peakwave: {e:#}");
            ExitCode::from(commands::exit_code(&e))
        }
    }
}
