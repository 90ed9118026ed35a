//! Rank-based map quality: trustworthiness, continuity, leave-one-out k-NN
//! label accuracy, and a census of tears and false neighbourhoods split by
//! whether the pair shares a class.
//!
//! Neighbour order is by distance with ties broken by lower index, so every
//! quantity here is a deterministic function of the two distance matrices.

use std::collections::HashMap;
use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::geometry::{co_membership, CoMembership, DissimilarityMatrix, Embedding, LabelVector};

pub const DEFAULT_K: usize = 10;

/// Column order of [`MapQualityReport::csv_row`].
pub const CSV_HEADER: &str = "k,trustworthiness,continuity,knn_accuracy,fn_within,fn_between,tear_within,tear_between";

/// Pair counts of tears (input neighbours that are not map neighbours) and
/// false neighbourhoods (map neighbours that are not input neighbours).
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct DistortionCensus {
    pub fn_within: usize,
    pub fn_between: usize,
    pub tear_within: usize,
    pub tear_between: usize,
}

impl DistortionCensus {
    pub fn tears(&self) -> usize {
        self.tear_within + self.tear_between
    }

    pub fn false_neighbours(&self) -> usize {
        self.fn_within + self.fn_between
    }

    /// Fraction of tears that separate points of different classes.
    pub fn between_tear_fraction(&self) -> Option<f64> {
        let total = self.tears();
        (total > 0).then(|| self.tear_between as f64 / total as f64)
    }

    /// Fraction of false neighbourhoods that join points of the same class.
    pub fn within_fn_fraction(&self) -> Option<f64> {
        let total = self.false_neighbours();
        (total > 0).then(|| self.fn_within as f64 / total as f64)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct MapQualityReport {
    pub k: usize,
    pub trustworthiness: f64,
    pub continuity: f64,
    pub knn_accuracy: f64,
    pub census: DistortionCensus,
}

impl MapQualityReport {
    /// `key=value` lines in fixed key order.
    pub fn to_key_values(&self) -> String {
        let mut out = String::new();
        for (key, value) in self.fields() {
            let _ = writeln!(out, "{key}={value}");
        }
        out
    }

    /// One CSV row in [`CSV_HEADER`] order, without a trailing newline.
    pub fn csv_row(&self) -> String {
        self.fields().into_iter().map(|(_, v)| v).collect::<Vec<_>>().join(",")
    }

    fn fields(&self) -> [(&'static str, String); 8] {
        [
            ("k", self.k.to_string()),
            ("trustworthiness", format!("{:.12}", self.trustworthiness)),
            ("continuity", format!("{:.12}", self.continuity)),
            ("knn_accuracy", format!("{:.12}", self.knn_accuracy)),
            ("fn_within", self.census.fn_within.to_string()),
            ("fn_between", self.census.fn_between.to_string()),
            ("tear_within", self.census.tear_within.to_string()),
            ("tear_between", self.census.tear_between.to_string()),
        ]
    }
}

/// Largest `k <= DEFAULT_K` that satisfies every metric's precondition.
pub fn default_k(n: usize) -> usize {
    DEFAULT_K.min(n.saturating_sub(1) / 2)
}

fn check_knn_k(k: usize, n: usize) -> Result<()> {
    if k == 0 || k >= n {
        return Err(Error::InvalidK {
            k,
            n,
            requirement: "1 <= k <= n - 1",
        });
    }
    Ok(())
}

fn check_rank_k(k: usize, n: usize) -> Result<()> {
    if k == 0 || 2 * k >= n {
        return Err(Error::InvalidK {
            k,
            n,
            requirement: "1 <= k < n / 2",
        });
    }
    Ok(())
}

fn check_sizes(d: &DissimilarityMatrix, e: &Embedding) -> Result<()> {
    if d.n() != e.n() {
        return Err(Error::DimensionMismatch {
            expected: d.n(),
            found: e.n(),
        });
    }
    Ok(())
}

/// For every point, all other indices ordered by `(distance, index)`.
fn neighbour_order(n: usize, dist: impl Fn(usize, usize) -> f64) -> Vec<Vec<usize>> {
    (0..n)
        .map(|i| {
            let mut others: Vec<usize> = (0..n).filter(|&j| j != i).collect();
            others.sort_by(|&a, &b| dist(i, a).total_cmp(&dist(i, b)).then(a.cmp(&b)));
            others
        })
        .collect()
}

fn input_order(d: &DissimilarityMatrix) -> Vec<Vec<usize>> {
    neighbour_order(d.n(), |i, j| d.get(i, j))
}

fn map_order(e: &Embedding) -> Vec<Vec<usize>> {
    neighbour_order(e.n(), |i, j| e.distance(i, j))
}

/// `rank[i][j]`: 1-based position of `j` in `i`'s neighbour order.
fn ranks(order: &[Vec<usize>]) -> Vec<Vec<usize>> {
    let n = order.len();
    order
        .iter()
        .map(|row| {
            let mut rank = vec![0; n];
            for (pos, &j) in row.iter().enumerate() {
                rank[j] = pos + 1;
            }
            rank
        })
        .collect()
}

fn membership(order: &[Vec<usize>], k: usize) -> Vec<Vec<bool>> {
    let n = order.len();
    order
        .iter()
        .map(|row| {
            let mut m = vec![false; n];
            for &j in &row[..k] {
                m[j] = true;
            }
            m
        })
        .collect()
}

/// The `k` nearest other points of each point under `d`.
pub fn knn_sets(d: &DissimilarityMatrix, k: usize) -> Result<Vec<Vec<usize>>> {
    check_knn_k(k, d.n())?;
    Ok(input_order(d)
        .into_iter()
        .map(|mut row| {
            row.truncate(k);
            row
        })
        .collect())
}

/// Same as [`knn_sets`] for map distances.
pub fn map_knn_sets(e: &Embedding, k: usize) -> Result<Vec<Vec<usize>>> {
    check_knn_k(k, e.n())?;
    Ok(map_order(e)
        .into_iter()
        .map(|mut row| {
            row.truncate(k);
            row
        })
        .collect())
}

/// Sum over points of the rank excess (under `rank_source`) of neighbours
/// that appear in `present` but not in `reference`.
fn rank_penalty(present: &[Vec<bool>], reference: &[Vec<bool>], rank_source: &[Vec<usize>], k: usize) -> f64 {
    let mut total = 0usize;
    for i in 0..present.len() {
        for j in 0..present.len() {
            if present[i][j] && !reference[i][j] {
                total += rank_source[i][j] - k;
            }
        }
    }
    total as f64
}

fn rank_score(n: usize, k: usize, penalty: f64) -> f64 {
    let (n, k) = (n as f64, k as f64);
    1.0 - 2.0 / (n * k * (2.0 * n - 3.0 * k - 1.0)) * penalty
}

/// Penalizes map neighbours by how far outside the input k-neighbourhood they rank.
pub fn trustworthiness(d_in: &DissimilarityMatrix, e: &Embedding, k: usize) -> Result<f64> {
    check_sizes(d_in, e)?;
    check_rank_k(k, d_in.n())?;
    let (input, map) = (input_order(d_in), map_order(e));
    let penalty = rank_penalty(&membership(&map, k), &membership(&input, k), &ranks(&input), k);
    Ok(rank_score(d_in.n(), k, penalty))
}

/// Penalizes input neighbours by how far outside the map k-neighbourhood they rank.
pub fn continuity(d_in: &DissimilarityMatrix, e: &Embedding, k: usize) -> Result<f64> {
    check_sizes(d_in, e)?;
    check_rank_k(k, d_in.n())?;
    let (input, map) = (input_order(d_in), map_order(e));
    let penalty = rank_penalty(&membership(&input, k), &membership(&map, k), &ranks(&map), k);
    Ok(rank_score(d_in.n(), k, penalty))
}

/// Counts, over unordered pairs, tears and false neighbourhoods under the
/// symmetric neighbour relation `j in kNN(i) or i in kNN(j)`.
pub fn distortion_census(
    d_in: &DissimilarityMatrix,
    e: &Embedding,
    a: &CoMembership,
    k: usize,
) -> Result<DistortionCensus> {
    check_sizes(d_in, e)?;
    if a.n() != d_in.n() {
        return Err(Error::DimensionMismatch {
            expected: d_in.n(),
            found: a.n(),
        });
    }
    let n = d_in.n();
    check_knn_k(k, n)?;
    let input = membership(&input_order(d_in), k);
    let map = membership(&map_order(e), k);
    let mut census = DistortionCensus::default();
    for i in 0..n {
        for j in (i + 1)..n {
            let near_in = input[i][j] || input[j][i];
            let near_map = map[i][j] || map[j][i];
            let same = a.same_class(i, j);
            match (near_in, near_map, same) {
                (false, true, true) => census.fn_within += 1,
                (false, true, false) => census.fn_between += 1,
                (true, false, true) => census.tear_within += 1,
                (true, false, false) => census.tear_between += 1,
                _ => {}
            }
        }
    }
    Ok(census)
}

/// Leave-one-out majority vote over each point's `k` map neighbours.
///
/// Among labels tied for the most votes, the one carried by the
/// lowest-index neighbour wins.
pub fn knn_label_accuracy(e: &Embedding, labels: &LabelVector, k: usize) -> Result<f64> {
    if labels.len() != e.n() {
        return Err(Error::DimensionMismatch {
            expected: e.n(),
            found: labels.len(),
        });
    }
    let sets = map_knn_sets(e, k)?;
    let mut correct = 0usize;
    for (i, neighbours) in sets.iter().enumerate() {
        let mut votes: HashMap<&str, usize> = HashMap::new();
        for &j in neighbours {
            *votes.entry(labels.get(j)).or_default() += 1;
        }
        let top = votes.values().copied().max().unwrap_or(0);
        let winner = neighbours
            .iter()
            .copied()
            .filter(|&j| votes[labels.get(j)] == top)
            .min()
            .map(|j| labels.get(j));
        if winner == Some(labels.get(i)) {
            correct += 1;
        }
    }
    Ok(correct as f64 / e.n() as f64)
}

pub fn evaluate(d_in: &DissimilarityMatrix, e: &Embedding, labels: &LabelVector, k: usize) -> Result<MapQualityReport> {
    check_sizes(d_in, e)?;
    let a = co_membership(labels);
    Ok(MapQualityReport {
        k,
        trustworthiness: trustworthiness(d_in, e, k)?,
        continuity: continuity(d_in, e, k)?,
        knn_accuracy: knn_label_accuracy(e, labels, k)?,
        census: distortion_census(d_in, e, &a, k)?,
    })
}
