use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

mod commands;
mod output;

use output::Failure;

#[derive(Parser, Debug)]
#[command(name = "reeb-spectra", version, about = "Action spectra, indices and Besse/Zoll certificates for convex contact spheres")]
struct Cli {
    /// Output format.
    #[arg(long, value_enum, default_value_t = Format::Json, global = true)]
    out: Format,

    /// Directory for `--out plot` series files.
    #[arg(long, default_value = "plot", global = true)]
    plot_dir: PathBuf,

    #[command(subcommand)]
    command: Command,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Plot,
}

/// Where the hypersurface comes from.
#[derive(Args, Debug, Clone)]
pub struct BodyArgs {
    /// Ellipsoid parameters, e.g. `1,2` or `1/2,3/4`.
    #[arg(long, value_delimiter = ',', conflicts_with = "body")]
    ellipsoid: Option<Vec<String>>,

    /// Body JSON file (`-` for stdin).
    #[arg(long)]
    body: Option<PathBuf>,

    /// Homogenization degree in (1, 2).
    #[arg(long)]
    alpha: Option<f64>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Ellipsoid action spectrum up to a maximal action.
    Spectrum {
        #[arg(long, value_delimiter = ',', required = true)]
        ellipsoid: Vec<String>,
        /// Largest action (integer, `p/q` or decimal).
        #[arg(long)]
        max: String,
    },
    /// Spectral invariants c_0, …, c_{count−1} of an ellipsoid.
    Invariants {
        #[arg(long, value_delimiter = ',', required = true)]
        ellipsoid: Vec<String>,
        #[arg(long, default_value_t = 10)]
        count: usize,
    },
    /// Besse/Zoll verdicts from the invariant equality scan.
    Classify {
        #[arg(long, value_delimiter = ',', conflicts_with = "spectrum", required_unless_present = "spectrum")]
        ellipsoid: Option<Vec<String>>,
        /// JSON written by `spectrum --out json`.
        #[arg(long)]
        spectrum: Option<PathBuf>,
        #[arg(long, default_value_t = 20)]
        count: usize,
    },
    /// Zoll certificate for pinched bodies.
    Pinch {
        #[command(flatten)]
        body: BodyArgs,
        /// δ² in (1, 2].
        #[arg(long, default_value = "2")]
        delta_sq: String,
        /// Known periods of a general body.
        #[arg(long, value_delimiter = ',')]
        periods: Option<Vec<String>>,
        /// Attests that `--periods` lists every period up to this action.
        #[arg(long)]
        coverage: Option<f64>,
    },
    /// Systole by minimizing the dual action functional.
    Systole {
        #[command(flatten)]
        body: BodyArgs,
        #[arg(long, default_value_t = 64)]
        modes: usize,
        #[arg(long, default_value_t = 4)]
        oversample: usize,
        #[arg(long, default_value_t = 16)]
        starts: usize,
        #[arg(long, default_value_t = 3000)]
        max_iter: usize,
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
        #[arg(long, default_value_t = 2024)]
        seed: u64,
        /// Skip the rerun with twice as many modes.
        #[arg(long)]
        no_doubling: bool,
        /// Use only the random starts.
        #[arg(long)]
        no_plane_starts: bool,
    },
    /// Closed orbits by shooting, with indices.
    Orbits {
        #[command(flatten)]
        body: BodyArgs,
        #[arg(long, default_value_t = 3.0)]
        t_max: f64,
        #[arg(long, default_value_t = 8)]
        seeds: usize,
        #[arg(long, default_value_t = 400)]
        samples_per_unit: usize,
        /// Also run the sampling Besse test at this period.
        #[arg(long)]
        besse_tau: Option<f64>,
        #[arg(long, default_value_t = 10_000)]
        besse_samples: usize,
    },
    /// Conley–Zehnder index of a symplectic path.
    Cz {
        /// Rotation rates, one per 2-dimensional block.
        #[arg(long, value_delimiter = ',', conflicts_with = "samples", required_unless_present = "samples")]
        rotation: Option<Vec<String>>,
        #[arg(long, default_value_t = 1.0)]
        time: f64,
        /// JSON `{"times": [...], "matrices": [[[...]]]}`.
        #[arg(long)]
        samples: Option<PathBuf>,
    },
    /// Index tables for geodesic flows on compact rank-one symmetric spaces.
    Bott {
        /// s, rp, cp, hp or cap.
        #[arg(long)]
        model: String,
        /// Real dimension.
        #[arg(long)]
        dim: u32,
        #[arg(long, default_value_t = 10)]
        m_max: u32,
        /// Minimal geodesic length.
        #[arg(long, default_value_t = std::f64::consts::TAU)]
        ell: f64,
        /// Betti numbers of SM/S¹ (built in for spheres).
        #[arg(long, value_delimiter = ',')]
        betti: Option<Vec<u64>>,
    },
}

fn configure_threads() -> Result<(), Failure> {
    let Ok(v) = std::env::var("REEB_SPECTRA_THREADS") else {
        return Ok(());
    };
    let n: usize = v
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| Failure::Input(format!("REEB_SPECTRA_THREADS must be a positive integer, got {v:?}")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| Failure::Numeric(e.to_string()))
}

fn run(cli: Cli) -> Result<(), Failure> {
    configure_threads()?;
    let report = match cli.command {
        Command::Spectrum { ellipsoid, max } => commands::spectrum(&ellipsoid, &max)?,
        Command::Invariants { ellipsoid, count } => commands::invariants(&ellipsoid, count)?,
        Command::Classify {
            ellipsoid,
            spectrum,
            count,
        } => commands::classify(ellipsoid.as_deref(), spectrum.as_deref(), count)?,
        Command::Pinch {
            body,
            delta_sq,
            periods,
            coverage,
        } => commands::pinch(&body, &delta_sq, periods.as_deref(), coverage)?,
        Command::Systole {
            body,
            modes,
            oversample,
            starts,
            max_iter,
            tol,
            seed,
            no_doubling,
            no_plane_starts,
        } => {
            let cfg = reeb_spectra::clarke::ClarkeConfig {
                modes,
                oversample,
                random_starts: starts,
                plane_starts: !no_plane_starts,
                max_iter,
                tol_grad: tol,
                seed,
                doubling_check: !no_doubling,
            };
            commands::systole(&body, &cfg)?
        }
        Command::Orbits {
            body,
            t_max,
            seeds,
            samples_per_unit,
            besse_tau,
            besse_samples,
        } => {
            let cfg = reeb_spectra::reeb::OrbitSearchConfig {
                t_max,
                seeds,
                samples_per_unit,
                ..Default::default()
            };
            commands::orbits(&body, &cfg, besse_tau, besse_samples)?
        }
        Command::Cz {
            rotation,
            time,
            samples,
        } => commands::cz(rotation.as_deref(), time, samples.as_deref())?,
        Command::Bott {
            model,
            dim,
            m_max,
            ell,
            betti,
        } => commands::bott(&model, dim, m_max, ell, betti.as_deref())?,
    };
    report.emit(cli.out, &cli.plot_dir)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {f}");
            ExitCode::from(f.code())
        }
    }
}
