//! Pairwise weighted stress and its gradient.
//!
//! Every pair contributes `|d - d*|^p * w`, where the weight `w` is
//! `F(d)` (input-distance weighting, Sammon-like) for same-class pairs and
//! `F(d*)` (map-distance weighting, CCA-like) for pairs from different
//! classes. The two baseline modes apply one weighting to every pair
//! regardless of labels.

use std::fmt;
use std::num::NonZeroUsize;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::geometry::{pairwise_stats, CoMembership, DissimilarityMatrix, Embedding};
use crate::parallel::ordered_map;
use crate::weighting::WeightParams;

/// Upper bound on `|d - d*|^(p-1)` when `p < 1`.
pub const RESIDUAL_POWER_CAP: f64 = 1e6;

/// Gradient magnitude of the repulsion applied to coincident map points,
/// relative to the mean input distance.
pub const COINCIDENT_JITTER: f64 = 1e-6;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub enum StressMode {
    /// Input-distance weighting within classes, map-distance weighting between.
    #[default]
    ClassiMap,
    /// Input-distance weighting for every pair.
    SammonWeighted,
    /// Map-distance weighting for every pair.
    CcaWeighted,
}

impl StressMode {
    /// Whether the pair is weighted by `F(d)` (true) or `F(d*)` (false).
    #[inline]
    fn weights_by_input(self, same_class: bool) -> bool {
        match self {
            StressMode::ClassiMap => same_class,
            StressMode::SammonWeighted => true,
            StressMode::CcaWeighted => false,
        }
    }
}

impl fmt::Display for StressMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            StressMode::ClassiMap => "classimap",
            StressMode::SammonWeighted => "sammon",
            StressMode::CcaWeighted => "cca",
        })
    }
}

impl FromStr for StressMode {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "classimap" => Ok(StressMode::ClassiMap),
            "sammon" => Ok(StressMode::SammonWeighted),
            "cca" => Ok(StressMode::CcaWeighted),
            other => Err(format!("unknown method `{other}` (expected classimap, sammon or cca)")),
        }
    }
}

/// One pair's stress value and its gradient with respect to both endpoints.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PairStressTerm {
    pub i: usize,
    pub j: usize,
    pub value: f64,
    pub grad_i: [f64; 2],
    pub grad_j: [f64; 2],
}

/// A fully specified stress objective over embeddings of `d`.
///
/// `F(d_ij)` is evaluated once per objective and cached, since the optimizer
/// builds a fresh objective whenever the weight parameters change.
#[derive(Clone, Debug)]
pub struct Objective<'a> {
    d: &'a DissimilarityMatrix,
    a: &'a CoMembership,
    params: WeightParams,
    mode: StressMode,
    simplified_gradient: bool,
    input_weights: Vec<f64>,
    jitter: f64,
}

impl<'a> Objective<'a> {
    pub fn new(
        d: &'a DissimilarityMatrix,
        a: &'a CoMembership,
        params: WeightParams,
        mode: StressMode,
    ) -> Result<Self> {
        if a.n() != d.n() {
            return Err(Error::DimensionMismatch {
                expected: d.n(),
                found: a.n(),
            });
        }
        let n = d.n();
        let mut input_weights = vec![0.0; n * n];
        for (i, j, dij) in d.upper_triangle() {
            let w = params.f(dij);
            input_weights[i * n + j] = w;
            input_weights[j * n + i] = w;
        }
        let jitter = COINCIDENT_JITTER * pairwise_stats(d).mean;
        Ok(Self {
            d,
            a,
            params,
            mode,
            simplified_gradient: false,
            input_weights,
            jitter,
        })
    }

    /// Drops the `F'(d*)` term from map-distance-weighted pairs, giving the
    /// classical CCA update instead of the exact gradient.
    pub fn with_simplified_gradient(mut self, simplified: bool) -> Self {
        self.simplified_gradient = simplified;
        self
    }

    pub fn params(&self) -> &WeightParams {
        &self.params
    }

    pub fn mode(&self) -> StressMode {
        self.mode
    }

    pub fn n(&self) -> usize {
        self.d.n()
    }

    fn check_embedding(&self, e: &Embedding) -> Result<()> {
        if e.n() != self.d.n() {
            return Err(Error::DimensionMismatch {
                expected: self.d.n(),
                found: e.n(),
            });
        }
        Ok(())
    }

    /// Pair weight at map distance `dstar`.
    #[inline]
    fn weight(&self, i: usize, j: usize, dstar: f64) -> f64 {
        if self.mode.weights_by_input(self.a.same_class(i, j)) {
            self.input_weights[i * self.d.n() + j]
        } else {
            self.params.f(dstar)
        }
    }

    /// Stress of pair `(i, j)` at map distance `dstar`.
    #[inline]
    pub fn local(&self, i: usize, j: usize, dstar: f64) -> f64 {
        let residual = (self.d.get(i, j) - dstar).abs();
        if residual == 0.0 {
            return 0.0;
        }
        residual_power(residual, self.params.p) * self.weight(i, j, dstar)
    }

    /// `dE_ij / dd*` at map distance `dstar`.
    #[inline]
    fn local_slope(&self, i: usize, j: usize, dstar: f64) -> f64 {
        let p = self.params.p;
        let diff = self.d.get(i, j) - dstar;
        let residual = diff.abs();
        let sign = if diff > 0.0 {
            1.0
        } else if diff < 0.0 {
            -1.0
        } else {
            0.0
        };
        let power_slope = if sign == 0.0 {
            0.0
        } else if p == 1.0 {
            -sign
        } else {
            -sign * p * residual.powf(p - 1.0).min(RESIDUAL_POWER_CAP)
        };
        if self.mode.weights_by_input(self.a.same_class(i, j)) {
            power_slope * self.input_weights[i * self.d.n() + j]
        } else {
            let mut slope = power_slope * self.params.f(dstar);
            if !self.simplified_gradient && residual > 0.0 {
                slope += residual_power(residual, p) * self.params.f_derivative(dstar);
            }
            slope
        }
    }

    /// Gradient of pair `(i, j)`'s stress with respect to `y_j`.
    ///
    /// Coincident map points with a nonzero input distance get a fixed
    /// pseudo-random repulsion seeded by the pair.
    #[inline]
    pub fn pair_gradient_on(&self, i: usize, j: usize, yi: [f64; 2], yj: [f64; 2]) -> [f64; 2] {
        let dx = yj[0] - yi[0];
        let dy = yj[1] - yi[1];
        let dstar = dx.hypot(dy);
        if dstar > 0.0 {
            let s = self.local_slope(i, j, dstar) / dstar;
            [s * dx, s * dy]
        } else if self.d.get(i, j) > 0.0 {
            let u = pair_direction(i.min(j), i.max(j));
            // The lower index is pushed along -u, the higher along +u.
            let m = if j > i { -self.jitter } else { self.jitter };
            [m * u[0], m * u[1]]
        } else {
            [0.0, 0.0]
        }
    }

    pub fn pair_term(&self, i: usize, j: usize, e: &Embedding) -> PairStressTerm {
        let (yi, yj) = (e.point(i), e.point(j));
        let grad_j = self.pair_gradient_on(i, j, yi, yj);
        PairStressTerm {
            i,
            j,
            value: self.local(i, j, e.distance(i, j)),
            grad_i: [-grad_j[0], -grad_j[1]],
            grad_j,
        }
    }

    /// Stress summed over unordered pairs `i < j`.
    pub fn total(&self, e: &Embedding) -> Result<f64> {
        self.total_with_workers(e, NonZeroUsize::MIN)
    }

    /// Same as [`Objective::total`]; rows are summed in index order, so the
    /// result is bitwise identical for every worker count.
    pub fn total_with_workers(&self, e: &Embedding, workers: NonZeroUsize) -> Result<f64> {
        self.check_embedding(e)?;
        let n = self.n();
        let rows = ordered_map(n, workers, |i| {
            ((i + 1)..n).map(|j| self.local(i, j, e.distance(i, j))).sum::<f64>()
        });
        Ok(rows.into_iter().sum())
    }

    /// Total stress divided by `sum_{i<j} w_ij d_ij^p`.
    pub fn normalized_total(&self, e: &Embedding) -> Result<f64> {
        self.check_embedding(e)?;
        let n = self.n();
        let mut num = 0.0;
        let mut den = 0.0;
        for i in 0..n {
            for j in (i + 1)..n {
                let dstar = e.distance(i, j);
                num += self.local(i, j, dstar);
                den += self.weight(i, j, dstar) * residual_power(self.d.get(i, j), self.params.p);
            }
        }
        Ok(if num == 0.0 { 0.0 } else { num / den })
    }

    pub fn gradient(&self, e: &Embedding) -> Result<Vec<[f64; 2]>> {
        self.gradient_with_workers(e, NonZeroUsize::MIN)
    }

    pub fn gradient_with_workers(&self, e: &Embedding, workers: NonZeroUsize) -> Result<Vec<[f64; 2]>> {
        self.check_embedding(e)?;
        let n = self.n();
        Ok(ordered_map(n, workers, |j| {
            let yj = e.point(j);
            let mut g = [0.0, 0.0];
            for i in (0..n).filter(|&i| i != j) {
                let gj = self.pair_gradient_on(i, j, e.point(i), yj);
                g[0] += gj[0];
                g[1] += gj[1];
            }
            g
        }))
    }
}

#[inline]
fn residual_power(residual: f64, p: f64) -> f64 {
    if p == 1.0 {
        residual
    } else {
        residual.powf(p)
    }
}

/// Deterministic unit vector derived from a pair of indices (SplitMix64).
fn pair_direction(lo: usize, hi: usize) -> [f64; 2] {
    let mut z = (lo as u64)
        .wrapping_mul(0x9E37_79B9_7F4A_7C15)
        .wrapping_add(hi as u64)
        .wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^= z >> 31;
    let angle = (z >> 11) as f64 / (1u64 << 53) as f64 * std::f64::consts::TAU;
    [angle.cos(), angle.sin()]
}

pub fn local_stress(
    i: usize,
    j: usize,
    d: &DissimilarityMatrix,
    dstar: f64,
    a: &CoMembership,
    params: &WeightParams,
    mode: StressMode,
) -> Result<f64> {
    let n = d.n();
    if a.n() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: a.n(),
        });
    }
    if i >= n || j >= n {
        return Err(Error::IndexOutOfRange { i, j, n });
    }
    let residual = (d.get(i, j) - dstar).abs();
    if residual == 0.0 {
        return Ok(0.0);
    }
    let w = if mode.weights_by_input(a.same_class(i, j)) {
        params.f(d.get(i, j))
    } else {
        params.f(dstar)
    };
    Ok(residual_power(residual, params.p) * w)
}

pub fn total_stress(
    e: &Embedding,
    d: &DissimilarityMatrix,
    a: &CoMembership,
    params: &WeightParams,
    mode: StressMode,
) -> Result<f64> {
    Objective::new(d, a, *params, mode)?.total(e)
}

pub fn stress_gradient(
    e: &Embedding,
    d: &DissimilarityMatrix,
    a: &CoMembership,
    params: &WeightParams,
    mode: StressMode,
) -> Result<Vec<[f64; 2]>> {
    Objective::new(d, a, *params, mode)?.gradient(e)
}
