use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

pub const DEFAULT_SEED: u64 = zeroset::supnorm::DEFAULT_SEED;

#[derive(Parser, Debug, Clone)]
#[command(
    name = "zeroset",
    version,
    about = "Zero sets of harmonic polynomials: frequency, detection, strata, dimension and topology"
)]
pub struct Cli {
    #[command(flatten)]
    pub global: Global,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct Global {
    /// Seed for every random choice.
    #[arg(long, global = true, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Run without a calibration file, using fixed conservative thresholds.
    #[arg(long, global = true)]
    pub uncalibrated: bool,
    /// Calibration file (default: the one built into the binary).
    #[arg(long, global = true)]
    pub calibration: Option<PathBuf>,
    /// Directory for report.json, report.csv, plots and manifest.json.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Print the JSON report instead of the summary.
    #[arg(long, global = true)]
    pub json: bool,
    /// Also emit a plot in this format.
    #[arg(long, global = true, value_enum)]
    pub plot: Option<PlotFormat>,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum PlotFormat {
    Png,
    Svg,
}

#[derive(Args, Debug, Clone)]
pub struct PolyArg {
    /// Polynomial JSON file, or a built-in name (szulkin, lm, cross2, cross3, r4, rez<k>).
    #[arg(long)]
    pub poly: String,
}

#[derive(Args, Debug, Clone)]
pub struct SetArg {
    /// Polynomial JSON file or built-in name.
    #[arg(long, conflicts_with = "cloud")]
    pub poly: Option<String>,
    /// Point-cloud table file.
    #[arg(long)]
    pub cloud: Option<PathBuf>,
    /// Degree bound of the comparison class for cloud input.
    #[arg(long)]
    pub degree: Option<usize>,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum ThetaMethod {
    Taylor,
    Bilateral,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum TubeKind {
    ZeroSet,
    SingularSet,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum BatteryKind {
    Frequency,
    Doubling,
    Ratio,
    Detection,
    Separation,
    Tube,
}

#[derive(Subcommand, Debug, Clone)]
pub enum Command {
    /// Approximation numbers Θ^{(k)}(x, r).
    Theta {
        #[command(flatten)]
        set: SetArg,
        #[arg(long, allow_hyphen_values = true)]
        point: String,
        #[arg(long, default_value = "1")]
        radii: String,
        #[arg(long, default_value_t = 1)]
        k: usize,
        /// Default: taylor for polynomials, bilateral for clouds.
        #[arg(long, value_enum)]
        method: Option<ThetaMethod>,
        /// Relative sampling pitch (default depends on the dimension).
        #[arg(long)]
        h_rel: Option<f64>,
    },
    /// Relative size ζ̂_k of the high-order Taylor part.
    Zeta {
        #[command(flatten)]
        poly: PolyArg,
        #[arg(long, allow_hyphen_values = true)]
        point: String,
        #[arg(long, default_value = "1")]
        radii: String,
        #[arg(long, default_value_t = 1)]
        k: usize,
    },
    /// Almgren frequency N(r, x0, p).
    Frequency {
        #[command(flatten)]
        poly: PolyArg,
        /// Centre; a single value is repeated in every coordinate.
        #[arg(long, default_value = "0", allow_hyphen_values = true)]
        center: String,
        #[arg(long, default_value = "0.1,1")]
        radii: String,
    },
    /// Classify points by the smallest certifiable degree.
    Detect {
        #[command(flatten)]
        set: SetArg,
        /// Point to classify (repeatable).
        #[arg(long, required = true, allow_hyphen_values = true)]
        point: Vec<String>,
        /// Descending scales.
        #[arg(long, default_value = "1,0.1,0.01,0.001,0.0001,0.00001")]
        scales: String,
        #[arg(long)]
        k_max: Option<usize>,
        #[arg(long)]
        h_rel: Option<f64>,
    },
    /// Sample the zero set and label each point with its stratum.
    Stratify {
        #[command(flatten)]
        poly: PolyArg,
        #[arg(long, default_value = "0", allow_hyphen_values = true)]
        center: String,
        #[arg(long, default_value_t = 1.0)]
        radius: f64,
        #[arg(long, default_value_t = 0.01)]
        h: f64,
        /// Cross-check this many points with the detector.
        #[arg(long, default_value_t = 0)]
        cross_check: usize,
        /// Covering scales for per-stratum dimension fits.
        #[arg(long)]
        mdim_scales: Option<String>,
    },
    /// Minkowski-dimension estimate from covering numbers.
    Mdim {
        #[command(flatten)]
        set: SetArg,
        #[arg(long, default_value = "0", allow_hyphen_values = true)]
        center: String,
        #[arg(long, default_value_t = 1.0)]
        radius: f64,
        #[arg(long, default_value_t = 0.005)]
        h: f64,
        #[arg(long, default_value = "0.1,0.05,0.02,0.01")]
        scales: String,
    },
    /// Monte Carlo tube volumes and their log-log slope.
    Tube {
        #[command(flatten)]
        poly: PolyArg,
        #[arg(long, default_value = "0.01,0.02,0.04,0.08")]
        radii: String,
        #[arg(long, value_enum, default_value_t = TubeKind::ZeroSet)]
        mode: TubeKind,
        #[arg(long, default_value_t = 1_000_000)]
        samples: usize,
        /// Radius of the ball the volume is measured in.
        #[arg(long, default_value_t = 0.5)]
        region: f64,
    },
    /// Count the components of {p > 0} and {p < 0} in a box.
    Components {
        #[command(flatten)]
        poly: PolyArg,
        /// `lo,hi` for every axis, or `lo1,hi1,lo2,hi2,...`.
        #[arg(long = "box", default_value = "-1,1", allow_hyphen_values = true)]
        bx: String,
        #[arg(long, default_value_t = 0.01)]
        pitch: f64,
        #[arg(long, default_value_t = 1.0)]
        kappa: f64,
        #[arg(long, default_value_t = 8)]
        min_component: usize,
        #[arg(long)]
        max_vertices: Option<usize>,
        /// Also check that smooth crossings join components of opposite sign.
        #[arg(long)]
        bipartite: bool,
        /// Radii for the interior corkscrew table.
        #[arg(long)]
        corkscrew_radii: Option<String>,
    },
    /// Symmetry defect of the normalised blow-up, plus the invariant subspace.
    Symmetry {
        #[command(flatten)]
        poly: PolyArg,
        #[arg(long, default_value = "0", allow_hyphen_values = true)]
        point: String,
        #[arg(long, default_value_t = 1.0)]
        radius: f64,
        #[arg(long, default_value_t = 0)]
        k: usize,
        /// Hemisphere sweep step in degrees (n = 3, k = 1).
        #[arg(long)]
        sweep_deg: Option<f64>,
        #[arg(long, default_value_t = 24)]
        frames: usize,
    },
    /// Measure thresholds and constants and write a calibration file.
    Calibrate {
        /// Output file (default: calibration.json in --out, or the working directory).
        #[arg(long)]
        write: Option<PathBuf>,
        /// Smaller corpus for a fast run.
        #[arg(long)]
        quick: bool,
        #[arg(long, default_value_t = 5)]
        ratio_seeds: u64,
        #[arg(long, default_value_t = 200)]
        ratio_cases: usize,
    },
    /// Seeded batch experiments.
    Battery {
        #[arg(long, value_enum)]
        kind: BatteryKind,
        #[arg(long, default_value_t = 100)]
        count: usize,
        /// Largest degree drawn.
        #[arg(long)]
        degree: Option<u32>,
    },
    /// Re-run a manifest and compare output hashes.
    Replay {
        #[arg(long)]
        manifest: PathBuf,
    },
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Theta { .. } => "theta",
            Command::Zeta { .. } => "zeta",
            Command::Frequency { .. } => "frequency",
            Command::Detect { .. } => "detect",
            Command::Stratify { .. } => "stratify",
            Command::Mdim { .. } => "mdim",
            Command::Tube { .. } => "tube",
            Command::Components { .. } => "components",
            Command::Symmetry { .. } => "symmetry",
            Command::Calibrate { .. } => "calibrate",
            Command::Battery { .. } => "battery",
            Command::Replay { .. } => "replay",
        }
    }
}
