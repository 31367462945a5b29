use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser, Debug)]
#[command(name = "gsis", version, about = "Shift-invariant spaces of graph signals")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Build a graph and its shifts, diagonalize them and report the joint spectrum.
    Graph {
        #[command(flatten)]
        graph: GraphArgs,
        /// Directory for U.csv and spectrum.json.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Bandlimited and shift-invariant spaces.
    #[command(subcommand)]
    Space(SpaceCommand),
    /// Shift-invariant kernels.
    #[command(subcommand)]
    Kernel(KernelCommand),
    /// Sample a signal.
    #[command(subcommand)]
    Sample(SampleCommand),
    /// Reconstruct a signal from samples.
    #[command(subcommand)]
    Reconstruct(ReconstructCommand),
    /// Run the damped-cosine study on a circulant graph.
    #[command(subcommand)]
    Experiment(ExperimentCommand),
    /// Compare GSIS models against bandlimited models on a signal dataset.
    ModelCompare(ModelCompareArgs),
}

#[derive(Args, Debug, Clone)]
pub struct GraphArgs {
    /// Edge-list file (`N <order>` header, then `i j [weight]` lines).
    #[arg(long, conflicts_with_all = ["circulant", "path"])]
    pub edges: Option<PathBuf>,
    /// Order of a circulant graph; its shifts are built from `--q`.
    #[arg(long)]
    pub circulant: Option<usize>,
    /// Circulant generators.
    #[arg(long, value_delimiter = ',', default_value = "1")]
    pub q: Vec<usize>,
    /// Order of a path graph.
    #[arg(long, conflicts_with = "circulant")]
    pub path: Option<usize>,
    /// Shift built from an edge list or path.
    #[arg(long, value_enum, default_value_t = ShiftChoice::Laplacian)]
    pub shift: ShiftChoice,
    /// Diagonalization residual tolerance.
    #[arg(long, default_value_t = 1e-9)]
    pub tol: f64,
    /// Seed for the random combination used in joint diagonalization.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(ValueEnum, Debug, Clone, Copy)]
pub enum ShiftChoice {
    Adjacency,
    Laplacian,
    NormalizedLaplacian,
}

#[derive(Args, Debug, Clone)]
pub struct GeneratorArgs {
    /// Generators as delta signals at these vertices.
    #[arg(long, value_delimiter = ',', conflicts_with = "generator")]
    pub deltas: Option<Vec<usize>>,
    /// Generator vector files (CSV, one value per line); repeatable.
    #[arg(long)]
    pub generator: Vec<PathBuf>,
}

#[derive(Subcommand, Debug)]
pub enum SpaceCommand {
    /// B_Ω for a frequency set.
    Bandlimited {
        #[command(flatten)]
        graph: GraphArgs,
        #[arg(long, value_delimiter = ',', required = true)]
        omega: Vec<usize>,
        /// Write the orthonormal basis as CSV.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// H(Φ) for a generator family.
    Gsis {
        #[command(flatten)]
        graph: GraphArgs,
        #[command(flatten)]
        generators: GeneratorArgs,
        /// Relative spectral support threshold.
        #[arg(long, default_value_t = 1e-10)]
        support_tol: f64,
        /// Also report Krylov dimensions up to this level.
        #[arg(long)]
        levels: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Canonical generator of B_Ω with its Riesz and frame bounds.
    Bounds {
        #[command(flatten)]
        graph: GraphArgs,
        #[arg(long, value_delimiter = ',', required = true)]
        omega: Vec<usize>,
        /// Number of monomial levels M for the frame bounds.
        #[arg(long, default_value_t = 2)]
        frame_level: usize,
    },
    /// Uncertainty-principle check for one generator.
    Uncertainty {
        #[command(flatten)]
        graph: GraphArgs,
        #[command(flatten)]
        generators: GeneratorArgs,
        #[arg(long, default_value_t = 1e-10)]
        support_tol: f64,
    },
}

#[derive(ValueEnum, Debug, Clone, Copy)]
pub enum FamilyChoice {
    Diffusion,
    RandomWalk,
    Regularization,
    Spline,
}

#[derive(Subcommand, Debug)]
pub enum KernelCommand {
    /// Build a kernel from the normalized Laplacian of the graph (the `--shift` choice is ignored).
    Make {
        #[command(flatten)]
        graph: GraphArgs,
        #[arg(long, value_enum)]
        family: FamilyChoice,
        /// Family parameters: σ (diffusion, regularization), a and p (random-walk), α (spline).
        #[arg(long, value_delimiter = ',', required = true)]
        param: Vec<f64>,
        /// Directory for K.csv and kernel.json.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args, Debug, Clone)]
pub struct NoiseArgs {
    /// Half-width of the uniform noise.
    #[arg(long, default_value_t = 0.0)]
    pub sigma: f64,
    #[arg(long, default_value_t = 0)]
    pub noise_seed: u64,
}

#[derive(Subcommand, Debug)]
pub enum SampleCommand {
    /// Observe a signal on a vertex subset.
    Subset {
        #[command(flatten)]
        graph: GraphArgs,
        #[arg(long, value_delimiter = ',', required = true)]
        vertices: Vec<usize>,
        #[arg(long)]
        signal: PathBuf,
        #[command(flatten)]
        noise: NoiseArgs,
        /// Write the observation vector as CSV.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Observe one vertex over successive applications of a state matrix.
    Dynamic {
        #[command(flatten)]
        graph: GraphArgs,
        /// State matrix D as CSV; the first shift when omitted.
        #[arg(long)]
        state: Option<PathBuf>,
        #[arg(long)]
        i0: usize,
        #[arg(long)]
        snapshots: usize,
        #[arg(long)]
        signal: PathBuf,
        #[command(flatten)]
        noise: NoiseArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Subcommand, Debug)]
pub enum ReconstructCommand {
    /// Least-squares fit on B_Ω from subset samples.
    Direct {
        #[command(flatten)]
        graph: GraphArgs,
        #[arg(long, value_delimiter = ',', required = true)]
        omega: Vec<usize>,
        #[arg(long, value_delimiter = ',', required = true)]
        vertices: Vec<usize>,
        /// Observation vector (CSV).
        #[arg(long)]
        observations: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Finite-step Krylov reconstruction on H(Φ) from subset samples.
    Krylov {
        #[command(flatten)]
        graph: GraphArgs,
        #[command(flatten)]
        generators: GeneratorArgs,
        #[arg(long, value_delimiter = ',', required = true)]
        vertices: Vec<usize>,
        #[arg(long)]
        observations: PathBuf,
        /// Stop once the residual norm is at most this value.
        #[arg(long, default_value_t = 0.0)]
        delta: f64,
        #[arg(long)]
        max_level: Option<usize>,
        /// Drop directions the sampling cannot see instead of failing.
        #[arg(long)]
        drop_degenerate: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Subcommand, Debug)]
pub enum ExperimentCommand {
    DampedCosine(DampedCosineArgs),
}

#[derive(Args, Debug)]
pub struct DampedCosineArgs {
    #[arg(long, default_value_t = 100)]
    pub n: usize,
    #[arg(long, value_delimiter = ',', default_value = "1,3")]
    pub q: Vec<usize>,
    #[arg(long, default_value_t = 1.0)]
    pub amp: f64,
    #[arg(long, default_value_t = 0.25)]
    pub decay: f64,
    #[arg(long, default_value_t = 2.0 * std::f64::consts::PI / 5.0)]
    pub freq: f64,
    #[arg(long, default_value_t = 0.1)]
    pub sigma: f64,
    #[arg(long, default_value_t = 100)]
    pub trials: usize,
    /// Inclusive range `a:b` of window half-widths P.
    #[arg(long, default_value = "1:45")]
    pub p_range: String,
    /// Inclusive range `a:b` of Krylov levels n.
    #[arg(long, default_value = "1:18")]
    pub level_range: String,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 0.0)]
    pub delta: f64,
    /// Directory for metrics.csv and summary.json.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct ModelCompareArgs {
    /// Edge-list file; the shift is its normalized Laplacian.
    #[arg(long)]
    pub graph: PathBuf,
    /// CSV with a header of vertex labels and one signal per row.
    #[arg(long)]
    pub signals: PathBuf,
    /// `adaptive:k`, `nonadaptive:k` or `fixed:i,j,…`.
    #[arg(long, default_value = "adaptive:3")]
    pub generators: String,
    /// Inclusive range `a:b` of Krylov levels.
    #[arg(long, default_value = "0:8")]
    pub levels: String,
    #[arg(long)]
    pub out: Option<PathBuf>,
}
