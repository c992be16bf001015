//! Tabular datasets: CSV ingestion, normalization, three-column distance
//! files and external accuracy against ground-truth labels.

use std::collections::{BTreeMap, HashMap};
use std::fs;
use std::hash::Hash;
use std::io::Read;
use std::path::Path;

use pathfinding::kuhn_munkres::kuhn_munkres;
use pathfinding::matrix::Matrix;
use serde::{Deserialize, Serialize};

use crate::distance::PairwiseDistances;
use crate::error::{Error, Result};

/// N points in D dimensions, stored row-major, with optional class labels.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    name: String,
    dim: usize,
    values: Vec<f64>,
    labels: Option<Vec<String>>,
    feature_names: Vec<String>,
}

impl Dataset {
    pub fn new(
        name: impl Into<String>,
        rows: Vec<Vec<f64>>,
        labels: Option<Vec<String>>,
        feature_names: Option<Vec<String>>,
    ) -> Result<Self> {
        let dim = rows.first().map(Vec::len).unwrap_or(0);
        let mut values = Vec::with_capacity(rows.len() * dim);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != dim {
                return Err(Error::Ragged {
                    row: i + 1,
                    found: row.len(),
                    expected: dim,
                });
            }
            values.extend_from_slice(row);
        }
        let feature_names = feature_names
            .unwrap_or_else(|| (0..dim).map(|j| format!("x{j}")).collect());
        Self::from_flat(name, dim, values, labels, feature_names)
    }

    pub fn from_flat(
        name: impl Into<String>,
        dim: usize,
        values: Vec<f64>,
        labels: Option<Vec<String>>,
        feature_names: Vec<String>,
    ) -> Result<Self> {
        if dim == 0 || values.is_empty() {
            return Err(Error::InvalidData("need at least one point and one feature".into()));
        }
        if !values.len().is_multiple_of(dim) {
            return Err(Error::InvalidData(format!(
                "{} values do not split into rows of {dim}",
                values.len()
            )));
        }
        if let Some(pos) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidData(format!(
                "non-finite value at row {}, column {}",
                pos / dim + 1,
                pos % dim + 1
            )));
        }
        let n = values.len() / dim;
        if let Some(labels) = &labels {
            if labels.len() != n {
                return Err(Error::LengthMismatch {
                    what: "labels",
                    found: labels.len(),
                    expected: n,
                });
            }
        }
        if feature_names.len() != dim {
            return Err(Error::LengthMismatch {
                what: "feature_names",
                found: feature_names.len(),
                expected: dim,
            });
        }
        Ok(Self {
            name: name.into(),
            dim,
            values,
            labels,
            feature_names,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn len(&self) -> usize {
        self.values.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.dim..(i + 1) * self.dim]
    }

    pub fn rows(&self) -> impl ExactSizeIterator<Item = &[f64]> + '_ {
        self.values.chunks_exact(self.dim)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn labels(&self) -> Option<&[String]> {
        self.labels.as_deref()
    }

    pub fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    /// Index of a feature given by name or by 0-based position.
    pub fn feature_index(&self, key: &str) -> Option<usize> {
        self.feature_names
            .iter()
            .position(|n| n == key)
            .or_else(|| key.parse::<usize>().ok().filter(|&j| j < self.dim))
    }
}

/// Which column of a CSV file holds the class label.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub enum LabelColumn {
    None,
    Index(usize),
    Name(String),
    /// A header column called `class`, `label` or `target`; otherwise the
    /// last column if any of its cells is non-numeric.
    #[default]
    Auto,
}

impl LabelColumn {
    /// Parses a CLI value: `none`, `auto`, a 0-based index or a column name.
    pub fn parse(s: &str) -> Self {
        match s {
            "none" => LabelColumn::None,
            "auto" => LabelColumn::Auto,
            _ => match s.parse::<usize>() {
                Ok(i) => LabelColumn::Index(i),
                Err(_) => LabelColumn::Name(s.to_string()),
            },
        }
    }
}

#[derive(Debug, Clone)]
pub struct LoadOptions {
    pub label: LabelColumn,
    pub delimiter: u8,
    /// `None` detects a header: the first row is one when no cell parses as a number.
    pub has_header: Option<bool>,
    /// Columns (names or 0-based file positions) dropped before parsing.
    pub exclude: Vec<String>,
}

impl Default for LoadOptions {
    fn default() -> Self {
        Self {
            label: LabelColumn::Auto,
            delimiter: b',',
            has_header: None,
            exclude: Vec::new(),
        }
    }
}

pub fn load_csv(path: impl AsRef<Path>, opts: &LoadOptions) -> Result<Dataset> {
    let path = path.as_ref();
    let file = fs::File::open(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let name = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "dataset".into());
    read_csv(file, &name, opts)
}

fn parse_number(cell: &str) -> Option<f64> {
    cell.trim().parse::<f64>().ok().filter(|v| v.is_finite())
}

pub fn read_csv<R: Read>(reader: R, name: &str, opts: &LoadOptions) -> Result<Dataset> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .delimiter(opts.delimiter)
        .from_reader(reader);

    let mut records: Vec<Vec<String>> = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        if rec.iter().all(|c| c.is_empty()) {
            continue;
        }
        records.push(rec.iter().map(str::to_string).collect());
    }
    if records.is_empty() {
        return Err(Error::InvalidData("file contains no rows".into()));
    }

    let width = records[0].len();
    let has_header = opts
        .has_header
        .unwrap_or_else(|| records[0].iter().all(|c| parse_number(c).is_none()));
    let (header, body_start) = if has_header {
        (Some(records[0].clone()), 1)
    } else {
        (None, 0)
    };
    let body = &records[body_start..];
    if body.is_empty() {
        return Err(Error::InvalidData("file has a header but no data rows".into()));
    }
    for (r, rec) in body.iter().enumerate() {
        if rec.len() != width {
            return Err(Error::Ragged {
                row: r + body_start + 1,
                found: rec.len(),
                expected: width,
            });
        }
    }

    let resolve = |key: &str| -> Option<usize> {
        header
            .as_ref()
            .and_then(|h| h.iter().position(|c| c == key))
            .or_else(|| key.parse::<usize>().ok().filter(|&j| j < width))
    };

    let label_idx = match &opts.label {
        LabelColumn::None => None,
        LabelColumn::Index(i) => {
            if *i >= width {
                return Err(Error::InvalidData(format!(
                    "label column {i} out of range for {width} columns"
                )));
            }
            Some(*i)
        }
        LabelColumn::Name(n) => Some(resolve(n).ok_or_else(|| {
            Error::InvalidData(format!("label column {n:?} not found"))
        })?),
        LabelColumn::Auto => header
            .as_ref()
            .and_then(|h| {
                h.iter().position(|c| {
                    matches!(c.to_ascii_lowercase().as_str(), "class" | "label" | "target")
                })
            })
            .or_else(|| {
                let last = width - 1;
                (width > 1 && body.iter().any(|r| parse_number(&r[last]).is_none()))
                    .then_some(last)
            }),
    };

    let mut excluded = Vec::with_capacity(opts.exclude.len());
    for key in &opts.exclude {
        excluded.push(
            resolve(key)
                .ok_or_else(|| Error::InvalidData(format!("excluded column {key:?} not found")))?,
        );
    }

    let feature_cols: Vec<usize> = (0..width)
        .filter(|j| Some(*j) != label_idx && !excluded.contains(j))
        .collect();
    if feature_cols.is_empty() {
        return Err(Error::InvalidData("no feature columns remain".into()));
    }

    let mut values = Vec::with_capacity(body.len() * feature_cols.len());
    for (r, rec) in body.iter().enumerate() {
        for &j in &feature_cols {
            let v = parse_number(&rec[j]).ok_or_else(|| Error::Parse {
                row: r + body_start + 1,
                column: j + 1,
                value: rec[j].clone(),
            })?;
            values.push(v);
        }
    }
    let labels = label_idx.map(|l| body.iter().map(|rec| rec[l].clone()).collect());
    let feature_names = feature_cols
        .iter()
        .map(|&j| match &header {
            Some(h) => h[j].clone(),
            None => format!("x{j}"),
        })
        .collect();

    Dataset::from_flat(name, feature_cols.len(), values, labels, feature_names)
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Normalization {
    #[default]
    None,
    #[serde(alias = "min_max")]
    MinMax,
    #[serde(alias = "z_score")]
    ZScore,
}

impl std::str::FromStr for Normalization {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "none" => Ok(Self::None),
            "minmax" | "min_max" | "min-max" => Ok(Self::MinMax),
            "zscore" | "z_score" | "z-score" => Ok(Self::ZScore),
            _ => Err(Error::InvalidParameter(format!("unknown normalization {s:?}"))),
        }
    }
}

/// Column-wise rescaling. `ZScore` uses the population standard deviation.
pub fn normalize(data: &Dataset, method: Normalization) -> Result<Dataset> {
    if method == Normalization::None {
        return Ok(data.clone());
    }
    let (n, dim) = (data.len(), data.dim());
    let mut out = data.values.clone();
    for j in 0..dim {
        let col = || data.rows().map(move |r| r[j]);
        let (shift, scale) = match method {
            Normalization::MinMax => {
                let lo = col().fold(f64::INFINITY, f64::min);
                let hi = col().fold(f64::NEG_INFINITY, f64::max);
                (lo, hi - lo)
            }
            Normalization::ZScore => {
                let mean = col().sum::<f64>() / n as f64;
                let var = col().map(|v| (v - mean).powi(2)).sum::<f64>() / n as f64;
                (mean, var.sqrt())
            }
            Normalization::None => unreachable!(),
        };
        if !(scale > 0.0) {
            return Err(Error::ConstantColumn {
                column: j + 1,
                name: data.feature_names[j].clone(),
            });
        }
        for i in 0..n {
            out[i * dim + j] = (data.values[i * dim + j] - shift) / scale;
        }
    }
    Ok(Dataset {
        values: out,
        ..data.clone()
    })
}

pub fn load_distance_file(path: impl AsRef<Path>) -> Result<PairwiseDistances> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_distance_triples(&text)
}

/// Parses `i j d` rows (1-based indices, whitespace or comma separated) into
/// a full symmetric matrix with zero diagonal.
pub fn parse_distance_triples(text: &str) -> Result<PairwiseDistances> {
    let mut pairs: HashMap<(usize, usize), f64> = HashMap::new();
    let mut n = 0usize;
    for (lineno, line) in text.lines().enumerate() {
        let line_no = lineno + 1;
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') || line.starts_with('%') {
            continue;
        }
        let err = |message: String| Error::DistanceFile { line: line_no, message };
        let fields: Vec<&str> = line
            .split(|c: char| c == ',' || c.is_whitespace())
            .filter(|s| !s.is_empty())
            .collect();
        if fields.len() != 3 {
            return Err(err(format!("expected 3 fields, found {}", fields.len())));
        }
        let index = |s: &str| -> Result<usize> {
            let v: f64 = s.parse().map_err(|_| err(format!("bad index {s:?}")))?;
            if v < 1.0 || v.fract() != 0.0 {
                return Err(err(format!("index {s:?} is not a positive integer")));
            }
            Ok(v as usize)
        };
        let (i, j) = (index(fields[0])?, index(fields[1])?);
        let d: f64 = fields[2]
            .parse()
            .ok()
            .filter(|v: &f64| v.is_finite())
            .ok_or_else(|| err(format!("bad distance {:?}", fields[2])))?;
        if d < 0.0 {
            return Err(err(format!("negative distance {d}")));
        }
        n = n.max(i).max(j);
        if i == j {
            continue;
        }
        let key = (i.min(j) - 1, i.max(j) - 1);
        if let Some(prev) = pairs.insert(key, d) {
            if prev != d {
                return Err(err(format!(
                    "pair ({}, {}) given twice with different distances {prev} and {d}",
                    key.0 + 1,
                    key.1 + 1
                )));
            }
        }
    }
    if n == 0 {
        return Err(Error::DistanceFile {
            line: 0,
            message: "no distance rows".into(),
        });
    }
    let mut matrix = vec![0.0; n * n];
    for i in 0..n {
        for j in i + 1..n {
            let d = *pairs.get(&(i, j)).ok_or_else(|| Error::DistanceFile {
                line: 0,
                message: format!("missing distance for pair ({}, {})", i + 1, j + 1),
            })?;
            matrix[i * n + j] = d;
            matrix[j * n + i] = d;
        }
    }
    PairwiseDistances::from_matrix(n, matrix)
}

/// Optimal one-to-one cluster → class mapping and the resulting accuracy.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LabelMatching<L: Ord> {
    pub cluster_to_label: BTreeMap<usize, L>,
    pub matched: usize,
    pub accuracy: f64,
}

/// Hungarian matching on the cluster × class contingency table. Points in
/// clusters left unmatched (when k exceeds the class count) are errors.
pub fn accuracy<L>(assignment: &[usize], labels: &[L]) -> Result<LabelMatching<L>>
where
    L: Eq + Hash + Ord + Clone,
{
    if assignment.len() != labels.len() {
        return Err(Error::LengthMismatch {
            what: "labels",
            found: labels.len(),
            expected: assignment.len(),
        });
    }
    if assignment.is_empty() {
        return Err(Error::InvalidData("accuracy needs at least one point".into()));
    }
    let mut clusters: Vec<usize> = assignment.to_vec();
    clusters.sort_unstable();
    clusters.dedup();
    let mut classes: Vec<L> = labels.to_vec();
    classes.sort();
    classes.dedup();
    let cluster_pos: HashMap<usize, usize> =
        clusters.iter().enumerate().map(|(p, &c)| (c, p)).collect();
    let class_pos: HashMap<&L, usize> = classes.iter().enumerate().map(|(p, c)| (c, p)).collect();

    let (k, c) = (clusters.len(), classes.len());
    let mut table = vec![vec![0i64; c]; k];
    for (a, l) in assignment.iter().zip(labels) {
        table[cluster_pos[a]][class_pos[l]] += 1;
    }

    let mut cluster_to_label = BTreeMap::new();
    let matched = if k <= c {
        let weights = Matrix::from_rows(table).expect("rectangular contingency table");
        let (total, cols) = kuhn_munkres(&weights);
        for (row, &col) in cols.iter().enumerate() {
            cluster_to_label.insert(clusters[row], classes[col].clone());
        }
        total
    } else {
        let transposed: Vec<Vec<i64>> =
            (0..c).map(|j| (0..k).map(|i| table[i][j]).collect()).collect();
        let weights = Matrix::from_rows(transposed).expect("rectangular contingency table");
        let (total, rows) = kuhn_munkres(&weights);
        for (class, &cluster) in rows.iter().enumerate() {
            cluster_to_label.insert(clusters[cluster], classes[class].clone());
        }
        total
    } as usize;

    Ok(LabelMatching {
        cluster_to_label,
        matched,
        accuracy: matched as f64 / assignment.len() as f64,
    })
}
