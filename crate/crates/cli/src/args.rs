use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use qebt::polytope::PolytopeKind;

#[derive(Debug, Parser)]
#[command(name = "qebt", version, about = "Classify and decompose trace-preserving qubit channels")]
pub struct Cli {
    /// Seed for every sampling step.
    #[arg(long, global = true, default_value_t = 42)]
    pub seed: u64,

    /// Worker threads for scans and fits (default: all cores).
    #[arg(long, global = true)]
    pub jobs: Option<usize>,

    /// Classification tolerance.
    #[arg(long, global = true, env = "QEBT_TOL", default_value_t = qebt::DEFAULT_TOL)]
    pub tol: f64,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Complete positivity, entanglement breaking and geometry of a channel.
    Classify { channel: PathBuf },
    /// Canonical translation, scaling and basis rotations.
    Canonical { channel: PathBuf },
    /// Choi matrix and its spectrum.
    Choi { channel: PathBuf },
    /// Build a measure-and-prepare ensemble.
    HolevoBuild(HolevoBuild),
    /// Check that an ensemble realizes a channel.
    HolevoVerify { ensemble: PathBuf, channel: PathBuf },
    /// Write an entanglement-breaking channel as a mixture of CQ channels.
    Decompose(Decompose),
    /// Parameter-plane datasets and unital polytopes.
    Region(Region),
    /// Agreement run of the independent criteria on random channels.
    Selftest {
        #[arg(long, default_value_t = 10_000)]
        samples: usize,
    },
}

#[derive(Debug, Args)]
#[group(required = true, multiple = false)]
pub struct HolevoBuild {
    /// Linear CQ channel from `t1 t2 t3 l3`.
    #[arg(long, num_args = 4, value_names = ["T1", "T2", "T3", "L3"], allow_negative_numbers = true)]
    pub cq: Option<Vec<f64>>,
    /// QC channel from the measurement `u0 u1 u2 u3`.
    #[arg(long, num_args = 4, value_names = ["U0", "U1", "U2", "U3"], allow_negative_numbers = true)]
    pub qc: Option<Vec<f64>>,
    /// Trine measurement with outputs along the three axes.
    #[arg(long)]
    pub trine: bool,
}

#[derive(Debug, Args)]
pub struct Decompose {
    pub channel: PathBuf,
    /// Fail instead of falling back to the numeric fit.
    #[arg(long)]
    pub constructive_only: bool,
    /// Candidate CQ channels for the numeric fit.
    #[arg(long, default_value_t = 500)]
    pub candidates: usize,
    /// Residual accepted from the numeric fit.
    #[arg(long, default_value_t = 1e-6)]
    pub fit_tol: f64,
}

#[derive(Debug, Args)]
pub struct Region {
    /// Translation `t1,t2,t3`.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true, required_unless_present = "polytope")]
    pub t: Option<Vec<f64>>,
    /// Fixed third scaling parameter.
    #[arg(long, allow_negative_numbers = true, required_unless_present = "polytope")]
    pub l3: Option<f64>,
    #[command(flatten)]
    pub mode: RegionMode,
    /// Grid nodes per axis for `--scan`.
    #[arg(long, default_value_t = 400)]
    pub resolution: usize,
    /// Rays for `--boundary` and `--lens`.
    #[arg(long, default_value_t = 720)]
    pub rays: usize,
    /// Output file (default: stdout).
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
#[group(required = true, multiple = false)]
pub struct RegionMode {
    #[arg(long)]
    pub scan: bool,
    #[arg(long)]
    pub boundary: bool,
    #[arg(long)]
    pub lens: bool,
    /// tetrahedron, inverted, octahedron or corner_tetrahedra.
    #[arg(long, value_name = "KIND")]
    pub polytope: Option<PolytopeKind>,
}
