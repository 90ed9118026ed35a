//! Core containers: input dissimilarities, class labels, the co-membership
//! matrix derived from them, and the 2-D embedding whose induced distances
//! the stress compares against the input.

use std::fmt;

use crate::error::{Error, Result};

/// Symmetric, nonnegative, zero-diagonal `n x n` matrix stored row-major.
///
/// No metric or Euclidean assumption is made: triangle-inequality
/// violations are accepted as-is.
#[derive(Clone, Debug, PartialEq)]
pub struct DissimilarityMatrix {
    n: usize,
    data: Vec<f64>,
}

impl DissimilarityMatrix {
    /// Builds a matrix from a row-major buffer, checking every invariant.
    pub fn from_vec(n: usize, data: Vec<f64>) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidMatrix(format!("need n >= 2, got {n}")));
        }
        if data.len() != n * n {
            return Err(Error::DimensionMismatch {
                expected: n * n,
                found: data.len(),
            });
        }
        for i in 0..n {
            if data[i * n + i] != 0.0 {
                return Err(Error::InvalidMatrix(format!(
                    "diagonal entry d[{i}][{i}] = {} is not zero",
                    data[i * n + i]
                )));
            }
            for j in 0..n {
                let v = data[i * n + j];
                if !v.is_finite() {
                    return Err(Error::InvalidMatrix(format!("d[{i}][{j}] = {v} is not finite")));
                }
                if v < 0.0 {
                    return Err(Error::NegativeDistance { i, j, value: v });
                }
                if j > i && v != data[j * n + i] {
                    return Err(Error::AsymmetricMatrix {
                        i,
                        j,
                        a: v,
                        b: data[j * n + i],
                    });
                }
            }
        }
        Ok(Self { n, data })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        let mut data = Vec::with_capacity(n * n);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(Error::SizeMismatch(format!(
                    "row {i} has {} entries, expected {n}",
                    row.len()
                )));
            }
            data.extend_from_slice(row);
        }
        Self::from_vec(n, data)
    }

    /// Pairwise distances between feature vectors under `metric`.
    pub fn from_points(points: &[Vec<f64>], metric: Metric) -> Result<Self> {
        let n = points.len();
        if n < 2 {
            return Err(Error::InvalidMatrix(format!("need n >= 2, got {n}")));
        }
        let dim = points[0].len();
        if let Some(bad) = points.iter().find(|p| p.len() != dim) {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: bad.len(),
            });
        }
        let mut data = vec![0.0; n * n];
        for i in 0..n {
            for j in (i + 1)..n {
                let v = metric.distance(&points[i], &points[j]);
                data[i * n + j] = v;
                data[j * n + i] = v;
            }
        }
        Self::from_vec(n, data)
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    /// Iterates `(i, j, d_ij)` over the strict upper triangle.
    pub fn upper_triangle(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.n).flat_map(move |i| ((i + 1)..self.n).map(move |j| (i, j, self.get(i, j))))
    }

    /// Returns a copy with every entry multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        Self::from_vec(self.n, self.data.iter().map(|v| v * factor).collect())
    }
}

/// Distance between feature rows.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Metric {
    #[default]
    Euclidean,
    Manhattan,
}

impl Metric {
    pub fn distance(self, a: &[f64], b: &[f64]) -> f64 {
        let diffs = a.iter().zip(b).map(|(x, y)| x - y);
        match self {
            Metric::Euclidean => diffs.map(|v| v * v).sum::<f64>().sqrt(),
            Metric::Manhattan => diffs.map(f64::abs).sum(),
        }
    }
}

/// Per-point class labels, compared by string equality only.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LabelVector(Vec<String>);

impl LabelVector {
    pub fn new<S: Into<String>>(labels: impl IntoIterator<Item = S>) -> Result<Self> {
        let labels: Vec<String> = labels.into_iter().map(Into::into).collect();
        if labels.is_empty() {
            return Err(Error::DegenerateInput("label vector is empty".into()));
        }
        Ok(Self(labels))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn get(&self, i: usize) -> &str {
        &self.0[i]
    }

    pub fn iter(&self) -> impl Iterator<Item = &str> {
        self.0.iter().map(String::as_str)
    }

    /// Distinct labels in lexicographic order.
    pub fn classes(&self) -> Vec<&str> {
        let mut classes: Vec<&str> = self.iter().collect();
        classes.sort_unstable();
        classes.dedup();
        classes
    }
}

/// Binary same-class matrix: `a[i][j] = 1` iff points i and j share a label.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CoMembership {
    n: usize,
    same: Vec<bool>,
}

impl CoMembership {
    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn same_class(&self, i: usize, j: usize) -> bool {
        self.same[i * self.n + j]
    }

    /// The 0/1 entry `A_ij`.
    #[inline]
    pub fn get(&self, i: usize, j: usize) -> u8 {
        u8::from(self.same_class(i, j))
    }

    /// Every pair in one class.
    pub fn all_same(n: usize) -> Self {
        Self {
            n,
            same: vec![true; n * n],
        }
    }

    /// Every point in its own class.
    pub fn all_distinct(n: usize) -> Self {
        let mut same = vec![false; n * n];
        for i in 0..n {
            same[i * n + i] = true;
        }
        Self { n, same }
    }
}

pub fn co_membership(labels: &LabelVector) -> CoMembership {
    let n = labels.len();
    let mut same = vec![false; n * n];
    for i in 0..n {
        for j in i..n {
            let s = labels.get(i) == labels.get(j);
            same[i * n + j] = s;
            same[j * n + i] = s;
        }
    }
    CoMembership { n, same }
}

/// `n x 2` map coordinates.
#[derive(Clone, Debug, PartialEq)]
pub struct Embedding {
    points: Vec<[f64; 2]>,
}

impl Embedding {
    pub fn new(points: Vec<[f64; 2]>) -> Result<Self> {
        if let Some(i) = points.iter().position(|p| !(p[0].is_finite() && p[1].is_finite())) {
            return Err(Error::InvalidMatrix(format!("embedding row {i} is not finite")));
        }
        Ok(Self { points })
    }

    pub fn n(&self) -> usize {
        self.points.len()
    }

    #[inline]
    pub fn point(&self, i: usize) -> [f64; 2] {
        self.points[i]
    }

    pub fn points(&self) -> &[[f64; 2]] {
        &self.points
    }

    pub(crate) fn points_mut(&mut self) -> &mut [[f64; 2]] {
        &mut self.points
    }

    pub fn is_finite(&self) -> bool {
        self.points.iter().all(|p| p[0].is_finite() && p[1].is_finite())
    }

    #[inline]
    pub fn distance(&self, i: usize, j: usize) -> f64 {
        let (a, b) = (self.points[i], self.points[j]);
        (a[0] - b[0]).hypot(a[1] - b[1])
    }
}

impl fmt::Display for Embedding {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, p) in self.points.iter().enumerate() {
            writeln!(f, "{i}: ({}, {})", p[0], p[1])?;
        }
        Ok(())
    }
}

/// Euclidean distances between embedding rows.
pub fn map_distances(e: &Embedding) -> Vec<f64> {
    let n = e.n();
    let mut out = vec![0.0; n * n];
    for i in 0..n {
        for j in (i + 1)..n {
            let v = e.distance(i, j);
            out[i * n + j] = v;
            out[j * n + i] = v;
        }
    }
    out
}

/// [`map_distances`] wrapped as a [`DissimilarityMatrix`]; needs `n >= 2`.
pub fn map_dissimilarities(e: &Embedding) -> Result<DissimilarityMatrix> {
    DissimilarityMatrix::from_vec(e.n(), map_distances(e))
}

/// Mean and population standard deviation over the strict upper triangle.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PairStats {
    pub mean: f64,
    pub std: f64,
}

pub fn pairwise_stats(d: &DissimilarityMatrix) -> PairStats {
    let count = (d.n() * (d.n() - 1) / 2) as f64;
    let mean = d.upper_triangle().map(|(_, _, v)| v).sum::<f64>() / count;
    let var = d.upper_triangle().map(|(_, _, v)| (v - mean) * (v - mean)).sum::<f64>() / count;
    PairStats { mean, std: var.sqrt() }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn upper(n: usize, values: &[f64]) -> DissimilarityMatrix {
        let mut data = vec![0.0; n * n];
        let mut it = values.iter();
        for i in 0..n {
            for j in (i + 1)..n {
                let v = *it.next().unwrap();
                data[i * n + j] = v;
                data[j * n + i] = v;
            }
        }
        DissimilarityMatrix::from_vec(n, data).unwrap()
    }

    #[test]
    #[allow(clippy::needless_range_loop)]
    fn co_membership_examples() {
        let a = co_membership(&LabelVector::new(["c", "c", "k"]).unwrap());
        let expect = [[1, 1, 0], [1, 1, 0], [0, 0, 1]];
        for i in 0..3 {
            for j in 0..3 {
                assert_eq!(a.get(i, j), expect[i][j]);
            }
        }

        let a = co_membership(&LabelVector::new(["c", "c", "c"]).unwrap());
        assert_eq!(a, CoMembership::all_same(3));

        let a = co_membership(&LabelVector::new(["a", "b", "c", "a"]).unwrap());
        assert_eq!(a.get(0, 3), 1);
        assert_eq!(a.get(0, 1), 0);
        assert_eq!(a.get(1, 2), 0);
        assert_eq!(a.get(2, 3), 0);
    }

    #[test]
    fn map_distance_examples() {
        let e = Embedding::new(vec![[0.0, 0.0], [3.0, 4.0]]).unwrap();
        assert_eq!(map_distances(&e)[1], 5.0);
        let e = Embedding::new(vec![[1.0, 1.0], [1.0, 1.0]]).unwrap();
        assert_eq!(map_distances(&e)[1], 0.0);
        let e = Embedding::new(vec![[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]]).unwrap();
        let d = map_dissimilarities(&e).unwrap();
        assert_eq!(d.get(1, 2), 2f64.sqrt());
        assert_eq!(d.get(2, 1), d.get(1, 2));
    }

    #[test]
    fn pairwise_stats_examples() {
        // n = 2 has a single pair; use n = 3 padded with the mean to get {1, 3}.
        let s = pairwise_stats(&upper(2, &[1.0]));
        assert_eq!((s.mean, s.std), (1.0, 0.0));

        let s = pairwise_stats(&upper(3, &[5.0, 5.0, 5.0]));
        assert_eq!((s.mean, s.std), (5.0, 0.0));

        // {1, 3, 2}: mean 2, variance 2/3.
        let s = pairwise_stats(&upper(3, &[1.0, 3.0, 2.0]));
        assert!((s.mean - 2.0).abs() < 1e-15);
        assert!((s.std - (2.0f64 / 3.0).sqrt()).abs() < 1e-15);

        // n = 8 has 28 pairs: {0, 2, 4, 6} repeated 7 times gives mean 3, variance 5.
        let values: Vec<f64> = (0..28).map(|k| 2.0 * (k % 4) as f64).collect();
        let s = pairwise_stats(&upper(8, &values));
        assert!((s.mean - 3.0).abs() < 1e-15);
        assert!((s.std - 5f64.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn two_value_population_stats() {
        // Four points whose upper triangle is {1, 3, 1, 3, 1, 3}: mean 2, std 1.
        let s = pairwise_stats(&upper(4, &[1.0, 3.0, 1.0, 3.0, 1.0, 3.0]));
        assert_eq!((s.mean, s.std), (2.0, 1.0));
    }

    #[test]
    fn rejects_invalid_matrices() {
        assert!(matches!(
            DissimilarityMatrix::from_vec(2, vec![0.0, 1.0, 2.0, 0.0]),
            Err(Error::AsymmetricMatrix { .. })
        ));
        assert!(matches!(
            DissimilarityMatrix::from_vec(2, vec![0.0, -1.0, -1.0, 0.0]),
            Err(Error::NegativeDistance { .. })
        ));
        assert!(DissimilarityMatrix::from_vec(2, vec![1.0, 1.0, 1.0, 0.0]).is_err());
        assert!(DissimilarityMatrix::from_vec(1, vec![0.0]).is_err());
    }

    #[test]
    fn non_metric_input_is_accepted() {
        let d = upper(3, &[1.0, 10.0, 1.0]);
        assert_eq!(d.get(0, 2), 10.0);
    }

    #[test]
    fn manhattan_points() {
        let d = DissimilarityMatrix::from_points(&[vec![0.0, 0.0], vec![3.0, -4.0]], Metric::Manhattan).unwrap();
        assert_eq!(d.get(0, 1), 7.0);
    }
}
