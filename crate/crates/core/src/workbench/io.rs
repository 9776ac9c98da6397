//! File formats: dense matrix CSV, point CSV, tree edge lists and JSON.
//!
//! Parse errors count rows and columns from 1, not counting header lines.

use std::io::Write;
use std::path::Path;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::matrix::{Matrix, PointConfiguration, SquaredDistanceMatrix};
use crate::tree::{Edge, SpanningTree};

/// First line of every matrix file; followed by `, n=<order>`.
pub const MATRIX_HEADER: &str = "# edmc-matrix v1";

/// 17 significant digits, enough to read back the identical `f64`.
pub fn format_value(x: f64) -> String {
    format!("{x:.16e}")
}

fn format_error(path: &Path, message: impl Into<String>) -> Error {
    Error::Format {
        path: path.to_path_buf(),
        message: message.into(),
    }
}

fn csv_error(path: &Path, e: csv::Error) -> Error {
    format_error(path, e.to_string())
}

fn parse_cell(path: &Path, row: usize, col: usize, cell: &str) -> Result<f64> {
    cell.trim().parse::<f64>().map_err(|_| Error::Parse {
        path: path.to_path_buf(),
        row,
        col,
        message: format!("not a number: {cell:?}"),
    })
}

/// Writes through a temporary file in the target directory, then renames,
/// so a failed write never leaves a partial file behind.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}

fn read_text(path: &Path) -> Result<String> {
    let text = std::fs::read_to_string(path)?;
    if text.trim().is_empty() {
        return Err(format_error(path, "file is empty"));
    }
    Ok(text)
}

/// Dense CSV with empty cells for missing entries.
pub fn matrix_to_string(d: &SquaredDistanceMatrix) -> String {
    let n = d.order();
    let mut out = format!("{MATRIX_HEADER}, n={n}\n");
    let mut w = csv::WriterBuilder::new().from_writer(Vec::new());
    for i in 0..n {
        let row: Vec<String> = (0..n)
            .map(|j| d.get(i, j).map(format_value).unwrap_or_default())
            .collect();
        w.write_record(&row).expect("writing to memory");
    }
    out.push_str(
        &String::from_utf8(w.into_inner().expect("writing to memory")).expect("ascii output"),
    );
    out
}

pub fn parse_matrix(text: &str, path: &Path) -> Result<SquaredDistanceMatrix> {
    let (first, body) = text.split_once('\n').unwrap_or((text, ""));
    let n = first
        .trim()
        .strip_prefix(MATRIX_HEADER)
        .and_then(|rest| rest.trim().strip_prefix(','))
        .and_then(|rest| rest.trim().strip_prefix("n="))
        .and_then(|n| n.trim().parse::<usize>().ok())
        .ok_or_else(|| {
            format_error(
                path,
                format!("expected a \"{MATRIX_HEADER}, n=<n>\" header line"),
            )
        })?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .from_reader(body.as_bytes());
    let mut values = Matrix::zeros(n, n);
    let mut known = vec![false; n * n];
    let mut rows = 0;
    for (i, record) in reader.records().enumerate() {
        let record = record.map_err(|e| csv_error(path, e))?;
        if i >= n {
            return Err(format_error(path, format!("more than {n} rows")));
        }
        if record.len() != n {
            return Err(Error::Parse {
                path: path.to_path_buf(),
                row: i + 1,
                col: record.len(),
                message: format!("expected {n} cells, found {}", record.len()),
            });
        }
        for (j, cell) in record.iter().enumerate() {
            if cell.trim().is_empty() {
                continue;
            }
            values[(i, j)] = parse_cell(path, i + 1, j + 1, cell)?;
            known[i * n + j] = true;
        }
        rows += 1;
    }
    if rows != n {
        return Err(format_error(
            path,
            format!("expected {n} rows, found {rows}"),
        ));
    }
    if known.iter().all(|&k| k) {
        SquaredDistanceMatrix::new(values)
    } else {
        SquaredDistanceMatrix::with_missing(values, known)
    }
}

pub fn load_matrix(path: &Path) -> Result<SquaredDistanceMatrix> {
    parse_matrix(&read_text(path)?, path)
}

pub fn save_matrix(path: &Path, d: &SquaredDistanceMatrix) -> Result<()> {
    write_atomic(path, matrix_to_string(d).as_bytes())
}

/// A configuration with its column names and optional class labels.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledPoints {
    pub points: PointConfiguration,
    pub names: Vec<String>,
    pub labels: Option<Vec<String>>,
}

impl LabeledPoints {
    pub fn unlabeled(points: PointConfiguration) -> Self {
        let names = (1..=points.dim()).map(|k| format!("x{k}")).collect();
        Self {
            points,
            names,
            labels: None,
        }
    }

    /// Distinct labels in order of first appearance.
    pub fn classes(&self) -> Vec<&str> {
        let mut seen: Vec<&str> = Vec::new();
        for l in self.labels.iter().flatten() {
            if !seen.contains(&l.as_str()) {
                seen.push(l);
            }
        }
        seen
    }
}

/// Header row required. The last column holds labels when its first data
/// cell is not a number; every other cell must be numeric.
pub fn parse_points(text: &str, path: &Path) -> Result<LabeledPoints> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let header: Vec<String> = reader
        .headers()
        .map_err(|e| csv_error(path, e))?
        .iter()
        .map(str::to_string)
        .collect();
    let width = header.len();
    let records: Vec<csv::StringRecord> = reader
        .records()
        .collect::<std::result::Result<_, _>>()
        .map_err(|e| csv_error(path, e))?;
    let Some(first) = records.first() else {
        return Err(format_error(path, "no data rows"));
    };
    let labeled = width > 1
        && first
            .get(width - 1)
            .is_some_and(|c| c.parse::<f64>().is_err());
    let features = if labeled { width - 1 } else { width };
    if features == 0 {
        return Err(format_error(path, "no feature columns"));
    }
    let mut coords = Vec::with_capacity(records.len() * features);
    let mut labels = Vec::new();
    for (i, record) in records.iter().enumerate() {
        if record.len() != width {
            return Err(Error::Parse {
                path: path.to_path_buf(),
                row: i + 1,
                col: record.len(),
                message: format!("expected {width} cells, found {}", record.len()),
            });
        }
        for (j, cell) in record.iter().take(features).enumerate() {
            coords.push(parse_cell(path, i + 1, j + 1, cell)?);
        }
        if labeled {
            labels.push(record[width - 1].to_string());
        }
    }
    let points = PointConfiguration::new(Matrix::from_vec(records.len(), features, coords)?)?;
    Ok(LabeledPoints {
        points,
        names: header[..features].to_vec(),
        labels: labeled.then_some(labels),
    })
}

pub fn load_points(path: &Path) -> Result<LabeledPoints> {
    parse_points(&read_text(path)?, path)
}

pub fn points_to_string(p: &LabeledPoints) -> String {
    let mut w = csv::WriterBuilder::new().from_writer(Vec::new());
    let mut header = p.names.clone();
    if p.labels.is_some() {
        header.push("label".to_string());
    }
    w.write_record(&header).expect("writing to memory");
    for i in 0..p.points.n() {
        let mut row: Vec<String> = p.points.point(i).iter().map(|&x| format_value(x)).collect();
        if let Some(labels) = &p.labels {
            row.push(labels[i].clone());
        }
        w.write_record(&row).expect("writing to memory");
    }
    String::from_utf8(w.into_inner().expect("writing to memory")).expect("utf-8 output")
}

pub fn save_points(path: &Path, p: &LabeledPoints) -> Result<()> {
    write_atomic(path, points_to_string(p).as_bytes())
}

/// `i,j,weight` edge list, vertices counted from 0.
pub fn tree_to_string(t: &SpanningTree) -> String {
    let mut w = csv::WriterBuilder::new().from_writer(Vec::new());
    w.write_record(["i", "j", "weight"])
        .expect("writing to memory");
    for e in t.edges() {
        w.write_record([e.u.to_string(), e.v.to_string(), format_value(e.weight)])
            .expect("writing to memory");
    }
    String::from_utf8(w.into_inner().expect("writing to memory")).expect("ascii output")
}

pub fn parse_tree(text: &str, path: &Path) -> Result<SpanningTree> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let mut edges = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let record = record.map_err(|e| csv_error(path, e))?;
        let index = |col: usize| -> Result<usize> {
            record[col].parse::<usize>().map_err(|_| Error::Parse {
                path: path.to_path_buf(),
                row: i + 1,
                col: col + 1,
                message: format!("not a vertex index: {:?}", &record[col]),
            })
        };
        if record.len() != 3 {
            return Err(Error::Parse {
                path: path.to_path_buf(),
                row: i + 1,
                col: record.len(),
                message: "expected i,j,weight".to_string(),
            });
        }
        edges.push(Edge::new(
            index(0)?,
            index(1)?,
            parse_cell(path, i + 1, 3, &record[2])?,
        ));
    }
    SpanningTree::new(edges.len() + 1, edges)
}

pub fn load_tree(path: &Path) -> Result<SpanningTree> {
    parse_tree(&std::fs::read_to_string(path)?, path)
}

pub fn save_tree(path: &Path, t: &SpanningTree) -> Result<()> {
    write_atomic(path, tree_to_string(t).as_bytes())
}

pub fn save_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    write_atomic(path, text.as_bytes())
}
