//! Command-line front end: `map`, `eval` and `plot`.
//!
//! Exit codes: 0 success, 1 usage error, 2 data error, 3 numeric failure.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::num::NonZeroUsize;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::error::Error;
use crate::geometry::{LabelVector, Metric};
use crate::io::{self, DatasetSource, Normalize};
use crate::metrics;
use crate::optimizer::{self, Init, OptimizerConfig};
use crate::plot::{self, PlotSpec};
use crate::stress::StressMode;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_DATA: i32 = 2;
pub const EXIT_NUMERIC: i32 = 3;

#[derive(Debug, Parser)]
#[command(
    name = "classimap",
    version,
    about = "Supervised nonlinear mapping of labeled dissimilarity data"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Embed a dataset into 2-D.
    Map(MapArgs),
    /// Score an embedding against its input distances.
    Eval(EvalArgs),
    /// Draw an embedding as an SVG scatter plot.
    Plot(PlotArgs),
}

#[derive(Debug, Args)]
struct InputArgs {
    /// Feature CSV, or a distance matrix when --labels is given.
    #[arg(long)]
    input: PathBuf,
    /// Labels file (one per line); switches --input to distance-matrix mode.
    #[arg(long)]
    labels: Option<PathBuf>,
    /// Class column of a feature CSV.
    #[arg(long, default_value = "label")]
    label_col: String,
    #[arg(long, default_value = "euclidean")]
    metric: Metric,
    /// Divide input distances by their mean before use.
    #[arg(long, default_value = "none")]
    normalize: Normalize,
}

impl InputArgs {
    fn source(&self) -> DatasetSource {
        match &self.labels {
            Some(labels) => DatasetSource::DistanceMatrix {
                path: self.input.clone(),
                labels: labels.clone(),
            },
            None => DatasetSource::FeatureTable {
                path: self.input.clone(),
                label_column: self.label_col.clone(),
                metric: self.metric,
            },
        }
    }
}

#[derive(Debug, Args)]
struct MapArgs {
    #[command(flatten)]
    input: InputArgs,
    #[arg(long, default_value = "classimap")]
    method: StressMode,
    #[arg(long, default_value_t = 200)]
    epochs: usize,
    /// Anchor updates per epoch (default: number of points).
    #[arg(long)]
    steps_per_epoch: Option<usize>,
    #[arg(long, default_value_t = 0.9)]
    lambda_start: f64,
    #[arg(long, default_value_t = 0.1)]
    lambda_end: f64,
    /// Learning rate of the first epoch, relative to the mean input distance.
    #[arg(long, default_value_t = 0.5)]
    learning_rate_start: f64,
    /// Learning rate of the last epoch, relative to the mean input distance.
    #[arg(long, default_value_t = 0.001)]
    learning_rate_end: f64,
    #[arg(long, default_value_t = 1.0)]
    p: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value = "random")]
    init: Init,
    #[arg(long, default_value_t = 200)]
    refine_iterations: usize,
    /// Drop the weight-derivative term for map-distance-weighted pairs.
    #[arg(long)]
    cca_simplified_gradient: bool,
    #[arg(long, default_value_t = NonZeroUsize::MIN)]
    workers: NonZeroUsize,
    #[arg(long)]
    out_coords: PathBuf,
    #[arg(long)]
    out_trace: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct EvalArgs {
    #[command(flatten)]
    input: InputArgs,
    /// Coordinates CSV written by `map`.
    #[arg(long)]
    coords: PathBuf,
    /// Neighbourhood size (default: 10, capped below n/2).
    #[arg(long)]
    k: Option<usize>,
    /// Report path; printed to stdout when omitted.
    #[arg(long)]
    out_report: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct PlotArgs {
    #[arg(long)]
    coords: PathBuf,
    #[arg(long)]
    out_svg: PathBuf,
    #[arg(long, default_value_t = 640)]
    width: u32,
    #[arg(long, default_value_t = 480)]
    height: u32,
    #[arg(long, default_value_t = 3.0)]
    point_radius: f64,
}

#[derive(Debug)]
enum Failure {
    Usage(String),
    Data(Error),
    Numeric(Error),
}

impl From<Error> for Failure {
    fn from(err: Error) -> Self {
        match err {
            Error::NonFiniteUpdate { .. } => Failure::Numeric(err),
            Error::InvalidK { .. } | Error::InvalidLambda(_) | Error::InvalidSchedule(_) | Error::InvalidConfig(_) => {
                Failure::Usage(err.to_string())
            }
            other => Failure::Data(other),
        }
    }
}

/// Runs the CLI on `args` (including the program name) and returns the exit code.
pub fn cli_main<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(err) => {
            use clap::error::ErrorKind;
            if matches!(err.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{err}");
                return EXIT_OK;
            }
            let rendered = err.to_string();
            let line = rendered.lines().next().unwrap_or("usage error");
            eprintln!("{line}");
            return EXIT_USAGE;
        }
    };
    let outcome = match cli.command {
        Command::Map(args) => map(args),
        Command::Eval(args) => eval(args),
        Command::Plot(args) => plot_cmd(args),
    };
    match outcome {
        Ok(()) => EXIT_OK,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            EXIT_USAGE
        }
        Err(Failure::Data(err)) => {
            eprintln!("error: {err}");
            EXIT_DATA
        }
        Err(Failure::Numeric(err)) => {
            eprintln!("error: {err}");
            EXIT_NUMERIC
        }
    }
}

fn check_lambda(flag: &str, value: f64) -> Result<(), Failure> {
    if (0.0..=1.0).contains(&value) {
        Ok(())
    } else {
        Err(Failure::Usage(format!("{flag} must be in [0, 1], got {value}")))
    }
}

fn check_positive(flag: &str, value: f64) -> Result<(), Failure> {
    if value > 0.0 && value.is_finite() {
        Ok(())
    } else {
        Err(Failure::Usage(format!("{flag} must be positive, got {value}")))
    }
}

fn load(input: &InputArgs) -> Result<(crate::DissimilarityMatrix, LabelVector), Failure> {
    let (d, labels) = io::load_dataset(&input.source())?;
    Ok((io::normalize(d, input.normalize)?, labels))
}

fn map(args: MapArgs) -> Result<(), Failure> {
    check_lambda("--lambda-start", args.lambda_start)?;
    check_lambda("--lambda-end", args.lambda_end)?;
    check_positive("--p", args.p)?;
    check_positive("--learning-rate-start", args.learning_rate_start)?;
    check_positive("--learning-rate-end", args.learning_rate_end)?;
    if args.epochs == 0 {
        return Err(Failure::Usage("--epochs must be at least 1".into()));
    }
    if args.steps_per_epoch == Some(0) {
        return Err(Failure::Usage("--steps-per-epoch must be at least 1".into()));
    }

    let (d, labels) = load(&args.input)?;
    let config = OptimizerConfig {
        epochs: args.epochs,
        steps_per_epoch: args.steps_per_epoch,
        learning_rate_start: args.learning_rate_start,
        learning_rate_end: args.learning_rate_end,
        lambda_start: args.lambda_start,
        lambda_end: args.lambda_end,
        p: args.p,
        seed: args.seed,
        init: args.init,
        mode: args.method,
        simplified_gradient: args.cca_simplified_gradient,
        refine_iterations: args.refine_iterations,
        workers: args.workers,
    };
    let (embedding, trace) = optimizer::run(&d, &labels, &config)?;
    io::write_embedding(&embedding, &labels, &args.out_coords)?;

    if let Some(path) = &args.out_trace {
        let meta = [
            ("method", config.mode.to_string()),
            ("normalize", args.input.normalize.to_string()),
            ("init", config.init.to_string()),
            ("seed", config.seed.to_string()),
            ("workers", config.workers.to_string()),
            ("epochs", config.epochs.to_string()),
            ("p", config.p.to_string()),
            ("lambda_start", config.lambda_start.to_string()),
            ("lambda_end", config.lambda_end.to_string()),
            ("learning_rate_start", config.learning_rate_start.to_string()),
            ("learning_rate_end", config.learning_rate_end.to_string()),
            ("refine_iterations", config.refine_iterations.to_string()),
            ("simplified_gradient", config.simplified_gradient.to_string()),
        ];
        let file = File::create(path).map_err(|e| Error::io(path, e))?;
        let mut out = BufWriter::new(file);
        trace
            .write_tsv(&mut out, &meta)
            .and_then(|_| out.flush())
            .map_err(|e| Error::io(path, e))?;
    }
    Ok(())
}

fn eval(args: EvalArgs) -> Result<(), Failure> {
    let (d, labels) = load(&args.input)?;
    let (embedding, coord_labels) = io::read_embedding(&args.coords)?;
    if embedding.n() != d.n() {
        return Err(Failure::Data(Error::SizeMismatch(format!(
            "{} coordinates for {} input points",
            embedding.n(),
            d.n()
        ))));
    }
    if coord_labels != labels {
        log::warn!(
            "labels in {} differ from the input labels; using the input labels",
            args.coords.display()
        );
    }
    let k = args.k.unwrap_or_else(|| metrics::default_k(d.n()));
    let report = metrics::evaluate(&d, &embedding, &labels, k)?;
    match &args.out_report {
        Some(path) => io::write_report(&report, path)?,
        None => print!("{}", report.to_key_values()),
    }
    Ok(())
}

fn plot_cmd(args: PlotArgs) -> Result<(), Failure> {
    if args.width == 0 || args.height == 0 {
        return Err(Failure::Usage("--width and --height must be positive".into()));
    }
    check_positive("--point-radius", args.point_radius)?;
    let (embedding, labels) = io::read_embedding(&args.coords)?;
    let spec = PlotSpec {
        width: args.width,
        height: args.height,
        point_radius: args.point_radius,
        ..PlotSpec::default()
    };
    plot::render_svg(&embedding, &labels, &spec, Path::new(&args.out_svg))?;
    Ok(())
}
