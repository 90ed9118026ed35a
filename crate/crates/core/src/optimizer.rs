//! Annealed stochastic descent of the stress over 2-D embeddings.
//!
//! Each epoch fixes `lambda` from the linear schedule, rebuilds the weight
//! parameters from the input-distance statistics, then performs
//! `steps_per_epoch` anchor updates: a random anchor point is held fixed and
//! every other point moves along its pair gradient with the anchor.

use std::fmt;
use std::io::Write;
use std::num::NonZeroUsize;
use std::str::FromStr;
use std::time::{Duration, Instant};

use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};
use crate::geometry::{co_membership, pairwise_stats, DissimilarityMatrix, Embedding, LabelVector, PairStats};
use crate::stress::{Objective, StressMode};
use crate::weighting::{self, lambda_at, weight_params, WeightParams};

/// RNG stream used for the random initial layout.
const INIT_STREAM: u64 = 0;
/// RNG stream used for anchor selection.
const ANCHOR_STREAM: u64 = 1;

/// Relative tolerance under which a slightly negative second eigenvalue is
/// treated as zero (rank-1 input) rather than as a non-Euclidean signal.
const EIGEN_TOLERANCE: f64 = 1e-9;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Init {
    ClassicalMds,
    #[default]
    RandomGaussian,
}

impl fmt::Display for Init {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Init::ClassicalMds => "mds",
            Init::RandomGaussian => "random",
        })
    }
}

impl FromStr for Init {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "mds" => Ok(Init::ClassicalMds),
            "random" => Ok(Init::RandomGaussian),
            other => Err(format!("unknown init `{other}` (expected mds or random)")),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct OptimizerConfig {
    pub epochs: usize,
    /// Anchor updates per epoch; `None` means one per point.
    pub steps_per_epoch: Option<usize>,
    /// Learning rate at the first epoch, in units of the mean input distance.
    pub learning_rate_start: f64,
    /// Learning rate at the last epoch, in units of the mean input distance.
    pub learning_rate_end: f64,
    pub lambda_start: f64,
    pub lambda_end: f64,
    pub p: f64,
    pub seed: u64,
    pub init: Init,
    pub mode: StressMode,
    /// Drop the `F'(d*)` term for map-distance-weighted pairs.
    pub simplified_gradient: bool,
    /// Full-batch backtracking descent iterations on the end-of-schedule
    /// stress, run after the last epoch.
    pub refine_iterations: usize,
    pub workers: NonZeroUsize,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self {
            epochs: 200,
            steps_per_epoch: None,
            learning_rate_start: 0.5,
            learning_rate_end: 0.001,
            lambda_start: weighting::DEFAULT_LAMBDA_START,
            lambda_end: weighting::DEFAULT_LAMBDA_END,
            p: weighting::DEFAULT_P,
            seed: 0,
            init: Init::default(),
            mode: StressMode::default(),
            simplified_gradient: false,
            refine_iterations: 200,
            workers: NonZeroUsize::MIN,
        }
    }
}

impl OptimizerConfig {
    pub fn validate(&self) -> Result<()> {
        if self.epochs == 0 {
            return Err(Error::InvalidSchedule("epochs must be at least 1".into()));
        }
        if self.steps_per_epoch == Some(0) {
            return Err(Error::InvalidConfig("steps_per_epoch must be at least 1".into()));
        }
        for (name, lr) in [
            ("learning_rate_start", self.learning_rate_start),
            ("learning_rate_end", self.learning_rate_end),
        ] {
            if !(lr > 0.0 && lr.is_finite()) {
                return Err(Error::InvalidConfig(format!("{name} must be positive, got {lr}")));
            }
        }
        for lambda in [self.lambda_start, self.lambda_end] {
            if !(0.0..=1.0).contains(&lambda) {
                return Err(Error::InvalidLambda(lambda));
            }
        }
        if !(self.p > 0.0 && self.p.is_finite()) {
            return Err(Error::InvalidConfig(format!("p must be positive, got {}", self.p)));
        }
        Ok(())
    }

    /// `lambda` used during epoch `epoch` of a run: the first epoch sits at
    /// `lambda_start` and the last at `lambda_end`.
    pub fn epoch_lambda(&self, epoch: usize) -> Result<f64> {
        if self.epochs == 1 {
            return lambda_at(0, 1, self.lambda_start, self.lambda_end);
        }
        lambda_at(epoch, self.epochs - 1, self.lambda_start, self.lambda_end)
    }

    /// Geometric interpolation between the learning-rate endpoints, scaled
    /// by `mean_distance`.
    pub fn epoch_learning_rate(&self, epoch: usize, mean_distance: f64) -> f64 {
        let t = if self.epochs == 1 {
            0.0
        } else {
            epoch as f64 / (self.epochs - 1) as f64
        };
        let ratio = self.learning_rate_end / self.learning_rate_start;
        mean_distance * self.learning_rate_start * ratio.powf(t)
    }
}

/// Weight parameters at `epoch` of a schedule spanning `config.epochs` steps.
pub fn anneal_state(epoch: usize, config: &OptimizerConfig, stats: PairStats) -> Result<WeightParams> {
    let lambda = lambda_at(epoch, config.epochs, config.lambda_start, config.lambda_end)?;
    weight_params(stats, lambda, config.p)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EpochRecord {
    pub epoch: usize,
    pub lambda: f64,
    pub learning_rate: f64,
    /// Stress under this epoch's weight parameters.
    pub total_stress: f64,
    /// Stress under the end-of-schedule weight parameters, used to pick the
    /// returned embedding.
    pub reference_stress: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunTrace {
    pub records: Vec<EpochRecord>,
    /// Reference stress of the initial layout.
    pub initial_stress: f64,
    /// Epoch whose embedding seeded the refinement; `None` if no epoch
    /// improved on the initial layout.
    pub best_epoch: Option<usize>,
    /// Reference stress of the best epoch, before refinement.
    pub best_epoch_stress: f64,
    /// Accepted refinement steps.
    pub refine_steps: usize,
    /// Reference stress of the returned embedding.
    pub best_stress: f64,
    pub embedding: Embedding,
    pub duration: Duration,
}

impl RunTrace {
    /// One `epoch\tlambda\tlearning_rate\ttotal_stress` line per record,
    /// preceded by `#`-prefixed header lines carrying `meta`.
    pub fn write_tsv<W: Write>(&self, mut out: W, meta: &[(&str, String)]) -> std::io::Result<()> {
        for (key, value) in meta {
            writeln!(out, "# {key}={value}")?;
        }
        writeln!(out, "# initial_stress={:e}", self.initial_stress)?;
        match self.best_epoch {
            Some(e) => writeln!(out, "# best_epoch={e}")?,
            None => writeln!(out, "# best_epoch=initial")?,
        }
        writeln!(out, "# best_epoch_stress={:e}", self.best_epoch_stress)?;
        writeln!(out, "# refine_steps={}", self.refine_steps)?;
        writeln!(out, "# best_stress={:e}", self.best_stress)?;
        writeln!(out, "epoch\tlambda\tlearning_rate\ttotal_stress")?;
        for r in &self.records {
            writeln!(
                out,
                "{}\t{:e}\t{:e}\t{:e}",
                r.epoch, r.lambda, r.learning_rate, r.total_stress
            )?;
        }
        Ok(())
    }
}

pub fn initialize(d: &DissimilarityMatrix, config: &OptimizerConfig) -> Result<Embedding> {
    let n = d.n();
    if n < 2 {
        return Err(Error::DegenerateInput(format!("need at least 2 points, got {n}")));
    }
    match config.init {
        Init::RandomGaussian => random_layout(d, config.seed),
        Init::ClassicalMds => match classical_mds(d) {
            Some(e) => Ok(e),
            None => {
                log::warn!("classical MDS has a non-positive leading eigenvalue; using a random layout");
                random_layout(d, config.seed)
            }
        },
    }
}

fn random_layout(d: &DissimilarityMatrix, seed: u64) -> Result<Embedding> {
    let std = 0.1 * pairwise_stats(d).mean;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(INIT_STREAM);
    let points = if std > 0.0 {
        let normal = Normal::new(0.0, std).expect("positive finite std");
        (0..d.n())
            .map(|_| [normal.sample(&mut rng), normal.sample(&mut rng)])
            .collect()
    } else {
        vec![[0.0, 0.0]; d.n()]
    };
    Embedding::new(points)
}

/// Top-two principal coordinates of `-1/2 J D^2 J`, or `None` when the input
/// is too far from Euclidean to supply two nonnegative eigenvalues.
pub fn classical_mds(d: &DissimilarityMatrix) -> Option<Embedding> {
    let n = d.n();
    let sq = DMatrix::from_fn(n, n, |i, j| d.get(i, j) * d.get(i, j));
    let row_means: Vec<f64> = (0..n).map(|i| sq.row(i).sum() / n as f64).collect();
    let grand = row_means.iter().sum::<f64>() / n as f64;
    let b = DMatrix::from_fn(n, n, |i, j| -0.5 * (sq[(i, j)] - row_means[i] - row_means[j] + grand));

    let eig = SymmetricEigen::new(b);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let (s1, s2) = mds_scales(eig.eigenvalues[order[0]], eig.eigenvalues[order[1]])?;
    let v1 = eig.eigenvectors.column(order[0]);
    let v2 = eig.eigenvectors.column(order[1]);
    Embedding::new((0..n).map(|i| [v1[i] * s1, v2[i] * s2]).collect()).ok()
}

/// Square roots of the two leading eigenvalues. A second eigenvalue within
/// rounding of zero is snapped to zero so rank-1 inputs stay exactly collinear.
fn mds_scales(l1: f64, l2: f64) -> Option<(f64, f64)> {
    if l1.is_nan() || l1 <= 0.0 || l2 < -EIGEN_TOLERANCE * l1 {
        return None;
    }
    let s2 = if l2 <= EIGEN_TOLERANCE * l1 { 0.0 } else { l2.sqrt() };
    Some((l1.sqrt(), s2))
}

pub fn run(d: &DissimilarityMatrix, labels: &LabelVector, config: &OptimizerConfig) -> Result<(Embedding, RunTrace)> {
    let started = Instant::now();
    config.validate()?;
    let n = d.n();
    if labels.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: labels.len(),
        });
    }
    let a = co_membership(labels);
    let stats = pairwise_stats(d);
    let steps = config.steps_per_epoch.unwrap_or(n);

    let reference_params = weight_params(stats, config.lambda_end, config.p)?;
    let reference = Objective::new(d, &a, reference_params, config.mode)?;

    let mut embedding = initialize(d, config)?;
    let initial_stress = reference.total_with_workers(&embedding, config.workers)?;
    let mut best = (initial_stress, embedding.clone(), None);

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    rng.set_stream(ANCHOR_STREAM);
    let mut records = Vec::with_capacity(config.epochs);

    for epoch in 0..config.epochs {
        let lambda = config.epoch_lambda(epoch)?;
        let learning_rate = config.epoch_learning_rate(epoch, stats.mean);
        let params = weight_params(stats, lambda, config.p)?;
        let objective =
            Objective::new(d, &a, params, config.mode)?.with_simplified_gradient(config.simplified_gradient);

        for _ in 0..steps {
            let anchor = rng.random_range(0..n);
            let ya = embedding.point(anchor);
            for (j, yj) in embedding.points_mut().iter_mut().enumerate() {
                if j == anchor {
                    continue;
                }
                let g = objective.pair_gradient_on(anchor, j, ya, *yj);
                yj[0] -= learning_rate * g[0];
                yj[1] -= learning_rate * g[1];
            }
        }

        let total_stress = objective.total_with_workers(&embedding, config.workers)?;
        let reference_stress = reference.total_with_workers(&embedding, config.workers)?;
        records.push(EpochRecord {
            epoch,
            lambda,
            learning_rate,
            total_stress,
            reference_stress,
        });

        if !embedding.is_finite() || !reference_stress.is_finite() {
            let trace = RunTrace {
                records,
                initial_stress,
                best_epoch: best.2,
                best_epoch_stress: best.0,
                refine_steps: 0,
                best_stress: best.0,
                embedding: best.1,
                duration: started.elapsed(),
            };
            return Err(Error::NonFiniteUpdate {
                epoch,
                trace: Box::new(trace),
            });
        }
        if reference_stress < best.0 {
            best = (reference_stress, embedding.clone(), Some(epoch));
        }
    }

    let (best_epoch_stress, best_embedding, best_epoch) = best;
    let (embedding, best_stress, refine_steps) = refine(
        &reference,
        best_embedding,
        best_epoch_stress,
        config.refine_iterations,
        config.epoch_learning_rate(config.epochs - 1, stats.mean),
        stats.mean,
        config.workers,
    )?;
    if let Some(last) = records.last() {
        log::info!(
            "run finished: initial stress {:.6e}, last epoch {:.6e}, best epoch {:?} {:.6e}, refined {:.6e}",
            initial_stress,
            last.reference_stress,
            best_epoch,
            best_epoch_stress,
            best_stress
        );
    }
    let trace = RunTrace {
        records,
        initial_stress,
        best_epoch,
        best_epoch_stress,
        refine_steps,
        best_stress,
        embedding: embedding.clone(),
        duration: started.elapsed(),
    };
    Ok((embedding, trace))
}

/// Full-batch gradient descent with Armijo backtracking. Every accepted step
/// strictly lowers the stress; stops after `iterations` steps or once the
/// step length falls below rounding of `scale`.
fn refine(
    objective: &Objective<'_>,
    mut embedding: Embedding,
    mut stress: f64,
    iterations: usize,
    initial_step: f64,
    scale: f64,
    workers: NonZeroUsize,
) -> Result<(Embedding, f64, usize)> {
    let mut step = initial_step;
    let mut accepted = 0;
    'outer: for _ in 0..iterations {
        let grad = objective.gradient_with_workers(&embedding, workers)?;
        let norm_sq: f64 = grad.iter().map(|g| g[0] * g[0] + g[1] * g[1]).sum();
        if norm_sq.is_nan() || norm_sq <= 0.0 {
            break;
        }
        step *= 2.0;
        loop {
            if step * norm_sq.sqrt() <= f64::EPSILON * scale {
                break 'outer;
            }
            let mut trial = embedding.clone();
            for (p, g) in trial.points_mut().iter_mut().zip(&grad) {
                p[0] -= step * g[0];
                p[1] -= step * g[1];
            }
            if trial.is_finite() {
                let trial_stress = objective.total_with_workers(&trial, workers)?;
                if trial_stress <= stress - 1e-4 * step * norm_sq {
                    embedding = trial;
                    stress = trial_stress;
                    accepted += 1;
                    break;
                }
            }
            step *= 0.5;
        }
    }
    Ok((embedding, stress, accepted))
}
