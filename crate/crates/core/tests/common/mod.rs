//! Fixtures and independent oracles shared by the integration tests.
#![allow(dead_code)]

use classimap::{DissimilarityMatrix, Embedding, LabelVector, Metric};
use nalgebra::{DMatrix, Matrix2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, StandardNormal};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn uniform_points(rng: &mut ChaCha8Rng, n: usize, dim: usize) -> Vec<Vec<f64>> {
    (0..n)
        .map(|_| (0..dim).map(|_| rng.random::<f64>()).collect())
        .collect()
}

pub fn to_embedding(points: &[Vec<f64>]) -> Embedding {
    Embedding::new(points.iter().map(|p| [p[0], p[1]]).collect()).unwrap()
}

pub fn euclidean(points: &[Vec<f64>]) -> DissimilarityMatrix {
    DissimilarityMatrix::from_points(points, Metric::Euclidean).unwrap()
}

pub fn random_labels(rng: &mut ChaCha8Rng, n: usize, classes: usize) -> LabelVector {
    LabelVector::new((0..n).map(|_| format!("c{}", rng.random_range(0..classes)))).unwrap()
}

/// 2-D points mapped isometrically into `dim` dimensions by a random
/// orthonormal pair of columns.
pub fn planted_plane(rng: &mut ChaCha8Rng, n: usize, dim: usize) -> (Vec<Vec<f64>>, Vec<Vec<f64>>) {
    let plane = uniform_points(rng, n, 2);
    let raw: DMatrix<f64> = DMatrix::from_fn(dim, 2, |_, _| StandardNormal.sample(rng));
    let q = raw.qr().q();
    let lifted = plane
        .iter()
        .map(|p| (0..dim).map(|r| q[(r, 0)] * p[0] + q[(r, 1)] * p[1]).collect())
        .collect();
    (plane, lifted)
}

/// Two Gaussian classes in `dim` dimensions whose means differ by `separation`
/// standard deviations along the first axis.
pub fn gaussian_classes(rng: &mut ChaCha8Rng, n: usize, dim: usize, separation: f64) -> (Vec<Vec<f64>>, LabelVector) {
    let normal = Normal::new(0.0, 1.0).unwrap();
    let mut points = Vec::with_capacity(n);
    let mut labels = Vec::with_capacity(n);
    for i in 0..n {
        let class = i % 2;
        let mut p: Vec<f64> = (0..dim).map(|_| normal.sample(rng)).collect();
        p[0] += separation * class as f64;
        points.push(p);
        labels.push(if class == 0 { "a" } else { "b" });
    }
    (points, LabelVector::new(labels).unwrap())
}

/// Root-mean-square residual after the best similarity transform (rotation,
/// reflection, translation, uniform scale) of `mapped` onto `target`.
pub fn procrustes_rms(mapped: &[[f64; 2]], target: &[[f64; 2]]) -> f64 {
    let n = mapped.len() as f64;
    let centroid = |pts: &[[f64; 2]]| {
        let s = pts.iter().fold([0.0, 0.0], |acc, p| [acc[0] + p[0], acc[1] + p[1]]);
        [s[0] / n, s[1] / n]
    };
    let (cm, ct) = (centroid(mapped), centroid(target));
    let x: Vec<[f64; 2]> = mapped.iter().map(|p| [p[0] - cm[0], p[1] - cm[1]]).collect();
    let y: Vec<[f64; 2]> = target.iter().map(|p| [p[0] - ct[0], p[1] - ct[1]]).collect();
    let mut cross: Matrix2<f64> = Matrix2::zeros();
    for (a, b) in x.iter().zip(&y) {
        for r in 0..2 {
            for c in 0..2 {
                cross[(r, c)] += a[r] * b[c];
            }
        }
    }
    let svd = cross.svd(true, true);
    let rotation = svd.u.unwrap() * svd.v_t.unwrap();
    let norm_x: f64 = x.iter().map(|p| p[0] * p[0] + p[1] * p[1]).sum();
    let scale = svd.singular_values.sum() / norm_x;
    let sse: f64 = x
        .iter()
        .zip(&y)
        .map(|(a, b)| {
            let rx = scale * (a[0] * rotation[(0, 0)] + a[1] * rotation[(1, 0)]);
            let ry = scale * (a[0] * rotation[(0, 1)] + a[1] * rotation[(1, 1)]);
            (rx - b[0]).powi(2) + (ry - b[1]).powi(2)
        })
        .sum();
    (sse / n).sqrt()
}

pub fn diameter(points: &[[f64; 2]]) -> f64 {
    let mut best = 0.0f64;
    for (i, a) in points.iter().enumerate() {
        for b in &points[i + 1..] {
            best = best.max((a[0] - b[0]).hypot(a[1] - b[1]));
        }
    }
    best
}

/// Best stress over `restarts` random starts of full-batch gradient descent
/// with Armijo backtracking, each run until the step collapses.
pub fn dense_descent_best(objective: &classimap::Objective<'_>, scale: f64, restarts: usize, seed: u64) -> f64 {
    let n = objective.n();
    let mut rng = rng(seed);
    let normal = Normal::new(0.0, scale).unwrap();
    let mut best = f64::INFINITY;
    for _ in 0..restarts {
        let mut x: Vec<[f64; 2]> = (0..n)
            .map(|_| [normal.sample(&mut rng), normal.sample(&mut rng)])
            .collect();
        let mut fx = objective.total(&Embedding::new(x.clone()).unwrap()).unwrap();
        let mut step = scale;
        for _ in 0..20_000 {
            let g = objective.gradient(&Embedding::new(x.clone()).unwrap()).unwrap();
            let g2: f64 = g.iter().map(|v| v[0] * v[0] + v[1] * v[1]).sum();
            if g2 == 0.0 {
                break;
            }
            step *= 2.0;
            let mut accepted = false;
            while step * g2.sqrt() > 1e-13 * scale {
                let trial: Vec<[f64; 2]> = x
                    .iter()
                    .zip(&g)
                    .map(|(p, d)| [p[0] - step * d[0], p[1] - step * d[1]])
                    .collect();
                let ft = objective.total(&Embedding::new(trial.clone()).unwrap()).unwrap();
                if ft <= fx - 1e-4 * step * g2 {
                    x = trial;
                    fx = ft;
                    accepted = true;
                    break;
                }
                step *= 0.5;
            }
            if !accepted {
                break;
            }
        }
        best = best.min(fx);
    }
    best
}
