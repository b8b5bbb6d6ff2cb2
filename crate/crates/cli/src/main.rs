use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use topokernels::filtration::Metric;
use topokernels::kernels::SpectralMode;
use topokernels::metrics::{GroundMetric, Order};
use topokernels::synthetic::Generator;
use topokernels_cli::commands::{self, GenerateOptions};
use topokernels_cli::config::{EssentialMode, FiltrationSettings};
use topokernels_cli::{CliError, Context};

#[derive(Parser)]
#[command(name = "topokernels", version, about = "Persistence diagrams, diagram kernels and kernel learning")]
struct Cli {
    /// Seed for generators and fold shuffles (manifest values take precedence).
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads for parallel stages.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Directory for written artifacts.
    #[arg(long, global = true, default_value = ".")]
    output_dir: PathBuf,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct FiltrationArgs {
    #[arg(long, default_value = "euclidean")]
    metric: Metric,
    #[arg(long, default_value_t = 2)]
    max_dim: usize,
    #[arg(long)]
    max_scale: Option<f64>,
    #[arg(long, default_value_t = 1)]
    hom_dim: usize,
    /// auto (cap in H0, drop above), drop, cap (at the maximal scale) or keep
    #[arg(long, default_value = "auto")]
    essential: EssentialMode,
}

impl From<FiltrationArgs> for FiltrationSettings {
    fn from(a: FiltrationArgs) -> Self {
        Self { metric: a.metric, max_dim: a.max_dim, max_scale: a.max_scale, hom_dim: a.hom_dim, essential: a.essential }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Persistence diagram of a point cloud or precomputed distance file.
    Diagram {
        input: PathBuf,
        #[command(flatten)]
        filtration: FiltrationArgs,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Wasserstein or bottleneck distance between two diagram files.
    Distance {
        a: PathBuf,
        b: PathBuf,
        #[arg(long, default_value = "l2")]
        ground: GroundMetric,
        /// Order p >= 1, or `inf`.
        #[arg(long, default_value = "2")]
        p: Order<f64>,
        #[arg(long)]
        dim: Option<usize>,
        /// Write the optimal matching as CSV.
        #[arg(long)]
        matching: Option<PathBuf>,
    },
    /// Gram matrix of the diagrams listed in a manifest.
    KernelMatrix {
        manifest: PathBuf,
        #[arg(long)]
        transform: Option<SpectralMode>,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Nadaraya-Watson regression with leave-one-out bandwidth selection.
    FitNw { manifest: PathBuf },
    /// Train a Krein (or standard) SVM on all samples.
    TrainKsvm { manifest: PathBuf },
    /// k-fold cross-validation of the Krein SVM and transformed-kernel SVMs.
    Cv { manifest: PathBuf },
    /// Synthetic point clouds and a manifest; each generator is one class.
    Generate {
        #[arg(long = "generator", required = true)]
        generators: Vec<Generator>,
        #[arg(long, default_value_t = 25)]
        n_points: usize,
        #[arg(long, default_value_t = 0.05)]
        noise_sd: f64,
        #[arg(long, default_value_t = 20)]
        count: usize,
        #[arg(long, default_value_t = 1.0)]
        radius_min: f64,
        #[arg(long, default_value_t = 1.0)]
        radius_max: f64,
        #[arg(long, default_value_t = 2)]
        centers: usize,
        #[arg(long, default_value_t = 0.1)]
        outlier_fraction: f64,
    },
    /// Diagrams, kernel and learning task from one manifest.
    Experiment { manifest: PathBuf },
}

fn run(cli: Cli) -> Result<(), CliError> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::input(format!("cannot configure {n} threads: {e}")))?;
    }
    let ctx = Context::new(cli.output_dir, cli.seed);
    let written = match cli.command {
        Command::Diagram { input, filtration, output } => {
            vec![commands::cmd_diagram(&ctx, &input, &filtration.into(), output.as_deref())?]
        }
        Command::Distance { a, b, ground, p, dim, matching } => {
            let v = commands::cmd_distance(&a, &b, dim, ground, p, matching.as_deref())?;
            println!("{}", topokernels::io::format_float(v));
            matching.into_iter().collect()
        }
        Command::KernelMatrix { manifest, transform, output } => {
            vec![commands::cmd_kernel_matrix(&ctx, &manifest, transform, output.as_deref())?]
        }
        Command::FitNw { manifest } => commands::cmd_fit_nw(&ctx, &manifest)?,
        Command::TrainKsvm { manifest } => commands::cmd_train_ksvm(&ctx, &manifest)?,
        Command::Cv { manifest } => commands::cmd_cv(&ctx, &manifest)?,
        Command::Generate { generators, n_points, noise_sd, count, radius_min, radius_max, centers, outlier_fraction } => {
            let opts = GenerateOptions {
                generators,
                n_points,
                noise_sd,
                count,
                radius_min,
                radius_max,
                centers,
                outlier_fraction,
            };
            commands::cmd_generate(&ctx, &opts)?
        }
        Command::Experiment { manifest } => commands::cmd_experiment(&ctx, &manifest)?,
    };
    for p in written {
        eprintln!("wrote {}", p.display());
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
