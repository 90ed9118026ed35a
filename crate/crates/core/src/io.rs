//! Reading datasets and writing coordinates, reports and traces.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::geometry::{pairwise_stats, DissimilarityMatrix, Embedding, LabelVector, Metric};
use crate::metrics::MapQualityReport;

/// Relative asymmetry tolerated (and averaged away) in matrix files.
pub const SYMMETRY_TOLERANCE: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq)]
pub enum DatasetSource {
    /// CSV with a header; `label_column` names the class column and every
    /// other column must be numeric.
    FeatureTable {
        path: PathBuf,
        label_column: String,
        metric: Metric,
    },
    /// Square matrix (CSV or whitespace separated) plus a labels file with
    /// one label per line in row order.
    DistanceMatrix { path: PathBuf, labels: PathBuf },
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Normalize {
    #[default]
    None,
    /// Divide every distance by the mean pairwise distance.
    Mean,
}

impl FromStr for Normalize {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "none" => Ok(Normalize::None),
            "mean" => Ok(Normalize::Mean),
            other => Err(format!("unknown normalization `{other}` (expected none or mean)")),
        }
    }
}

impl std::fmt::Display for Normalize {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Normalize::None => "none",
            Normalize::Mean => "mean",
        })
    }
}

impl FromStr for Metric {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "euclidean" => Ok(Metric::Euclidean),
            "manhattan" => Ok(Metric::Manhattan),
            other => Err(format!("unknown metric `{other}` (expected euclidean or manhattan)")),
        }
    }
}

pub fn normalize(d: DissimilarityMatrix, how: Normalize) -> Result<DissimilarityMatrix> {
    match how {
        Normalize::None => Ok(d),
        Normalize::Mean => {
            let mean = pairwise_stats(&d).mean;
            if mean > 0.0 {
                d.scaled(1.0 / mean)
            } else {
                Ok(d)
            }
        }
    }
}

pub fn load_dataset(src: &DatasetSource) -> Result<(DissimilarityMatrix, LabelVector)> {
    match src {
        DatasetSource::FeatureTable {
            path,
            label_column,
            metric,
        } => {
            let (points, labels) = read_feature_table(path, label_column)?;
            if points.len() < 2 {
                return Err(Error::SizeMismatch(format!(
                    "{}: need at least 2 rows, found {}",
                    path.display(),
                    points.len()
                )));
            }
            Ok((DissimilarityMatrix::from_points(&points, *metric)?, labels))
        }
        DatasetSource::DistanceMatrix { path, labels } => {
            let d = read_distance_matrix(path)?;
            let labels = read_labels(labels)?;
            if labels.len() != d.n() {
                return Err(Error::SizeMismatch(format!(
                    "{} labels for a {}x{} matrix",
                    labels.len(),
                    d.n(),
                    d.n()
                )));
            }
            Ok((d, labels))
        }
    }
}

fn parse_error(path: &Path, line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        path: path.to_path_buf(),
        line,
        message: message.into(),
    }
}

fn csv_error(path: &Path, err: csv::Error) -> Error {
    let line = err.position().map_or(0, |p| p.line() as usize);
    match err.into_kind() {
        csv::ErrorKind::Io(source) => Error::io(path, source),
        kind => parse_error(path, line, format!("{kind:?}")),
    }
}

pub fn read_feature_table(path: &Path, label_column: &str) -> Result<(Vec<Vec<f64>>, LabelVector)> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| csv_error(path, e))?;
    let headers = reader.headers().map_err(|e| csv_error(path, e))?.clone();
    let label_idx = headers
        .iter()
        .position(|h| h == label_column)
        .ok_or_else(|| parse_error(path, 1, format!("label column `{label_column}` not found in header")))?;

    let mut points = Vec::new();
    let mut labels = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| csv_error(path, e))?;
        let line = record.position().map_or(0, |p| p.line() as usize);
        let mut row = Vec::with_capacity(record.len().saturating_sub(1));
        for (col, field) in record.iter().enumerate() {
            if col == label_idx {
                continue;
            }
            let value: f64 = field.parse().map_err(|_| {
                parse_error(
                    path,
                    line,
                    format!("column `{}`: `{field}` is not a number", &headers[col]),
                )
            })?;
            if !value.is_finite() {
                return Err(parse_error(
                    path,
                    line,
                    format!("column `{}`: `{field}` is not finite", &headers[col]),
                ));
            }
            row.push(value);
        }
        points.push(row);
        labels.push(record[label_idx].to_string());
    }
    if labels.is_empty() {
        return Err(parse_error(path, 2, "no data rows"));
    }
    Ok((points, LabelVector::new(labels)?))
}

/// Reads a square matrix, autodetecting comma or whitespace separation from
/// the first non-empty line. A first row that does not parse as numbers is
/// treated as a header.
#[allow(clippy::needless_range_loop)]
pub fn read_distance_matrix(path: &Path) -> Result<DissimilarityMatrix> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut lines = text
        .lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .peekable();
    let comma = lines.peek().is_some_and(|(_, l)| l.contains(','));
    let split = |line: &str| -> Vec<String> {
        if comma {
            line.split(',').map(|f| f.trim().to_string()).collect()
        } else {
            line.split_whitespace().map(str::to_string).collect()
        }
    };

    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut first = true;
    for (idx, line) in lines {
        let fields = split(line);
        let parsed: std::result::Result<Vec<f64>, _> = fields.iter().map(|f| f.parse::<f64>()).collect();
        match parsed {
            Ok(row) => rows.push(row),
            Err(_) if first => {}
            Err(_) => {
                let bad = fields
                    .iter()
                    .find(|f| f.parse::<f64>().is_err())
                    .cloned()
                    .unwrap_or_default();
                return Err(parse_error(path, idx + 1, format!("`{bad}` is not a number")));
            }
        }
        first = false;
    }

    let n = rows.len();
    if n < 2 {
        return Err(parse_error(
            path,
            1,
            format!("need at least a 2x2 matrix, found {n} rows"),
        ));
    }
    if let Some((i, row)) = rows.iter().enumerate().find(|(_, r)| r.len() != n) {
        return Err(Error::SizeMismatch(format!(
            "{}: row {i} has {} entries, expected {n}",
            path.display(),
            row.len()
        )));
    }
    for i in 0..n {
        for j in 0..n {
            let v = rows[i][j];
            if !v.is_finite() {
                return Err(parse_error(path, 0, format!("d[{i}][{j}] = {v} is not finite")));
            }
            if v < 0.0 {
                return Err(Error::NegativeDistance { i, j, value: v });
            }
        }
        for j in (i + 1)..n {
            let (a, b) = (rows[i][j], rows[j][i]);
            if (a - b).abs() > SYMMETRY_TOLERANCE * a.abs().max(b.abs()) {
                return Err(Error::AsymmetricMatrix { i, j, a, b });
            }
            let mid = 0.5 * (a + b);
            rows[i][j] = mid;
            rows[j][i] = mid;
        }
    }
    DissimilarityMatrix::from_rows(&rows)
}

/// One label per line; surrounding whitespace is trimmed and blank lines skipped.
pub fn read_labels(path: &Path) -> Result<LabelVector> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let labels: Vec<&str> = text.lines().map(str::trim).filter(|l| !l.is_empty()).collect();
    if labels.is_empty() {
        return Err(parse_error(path, 1, "no labels"));
    }
    LabelVector::new(labels)
}

/// Fixed-point rendering with at least 9 significant digits and at least 8
/// decimals; very small magnitudes switch to scientific notation.
pub fn format_coordinate(v: f64) -> String {
    if v == 0.0 {
        return "0.00000000".to_string();
    }
    let magnitude = v.abs().log10().floor();
    if magnitude < -4.0 {
        return format!("{v:.8e}");
    }
    let decimals = (8.0 - magnitude).max(8.0) as usize;
    format!("{v:.decimals$}")
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    File::create(path).map(BufWriter::new).map_err(|e| Error::io(path, e))
}

pub fn write_embedding(e: &Embedding, labels: &LabelVector, path: &Path) -> Result<()> {
    if labels.len() != e.n() {
        return Err(Error::SizeMismatch(format!(
            "{} labels for {} points",
            labels.len(),
            e.n()
        )));
    }
    let file = create(path)?;
    let mut writer = csv::Writer::from_writer(file);
    let wrap = |err: csv::Error| csv_error(path, err);
    writer.write_record(["index", "x", "y", "label"]).map_err(wrap)?;
    for (i, (p, label)) in e.points().iter().zip(labels.iter()).enumerate() {
        writer
            .write_record([
                i.to_string(),
                format_coordinate(p[0]),
                format_coordinate(p[1]),
                label.to_string(),
            ])
            .map_err(wrap)?;
    }
    writer.flush().map_err(|err| Error::io(path, err))
}

/// Reads a file written by [`write_embedding`]; rows must be in index order.
pub fn read_embedding(path: &Path) -> Result<(Embedding, LabelVector)> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_path(path)
        .map_err(|e| csv_error(path, e))?;
    let headers = reader.headers().map_err(|e| csv_error(path, e))?;
    if headers.iter().collect::<Vec<_>>() != ["index", "x", "y", "label"] {
        return Err(parse_error(path, 1, "expected header `index,x,y,label`"));
    }
    let mut points = Vec::new();
    let mut labels = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| csv_error(path, e))?;
        let line = record.position().map_or(0, |p| p.line() as usize);
        let index: usize = record[0]
            .parse()
            .map_err(|_| parse_error(path, line, format!("bad index `{}`", &record[0])))?;
        if index != points.len() {
            return Err(parse_error(
                path,
                line,
                format!("expected index {}, found {index}", points.len()),
            ));
        }
        let coord = |field: &str| {
            field
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| parse_error(path, line, format!("bad coordinate `{field}`")))
        };
        points.push([coord(&record[1])?, coord(&record[2])?]);
        labels.push(record[3].to_string());
    }
    if points.is_empty() {
        return Err(parse_error(path, 2, "no coordinate rows"));
    }
    Ok((Embedding::new(points)?, LabelVector::new(labels)?))
}

pub fn write_report(report: &MapQualityReport, path: &Path) -> Result<()> {
    let mut out = create(path)?;
    out.write_all(report.to_key_values().as_bytes())
        .and_then(|_| out.flush())
        .map_err(|e| Error::io(path, e))
}
