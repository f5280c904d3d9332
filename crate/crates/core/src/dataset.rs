//! Column-typed tables of mixed observations, CSV ingestion, equal-frequency
//! discretization and seeded train/test splitting.

use std::collections::HashMap;
use std::fmt;
use std::io::Read;
use std::path::Path;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum VariableKind {
    Discrete,
    Continuous,
}

impl fmt::Display for VariableKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            VariableKind::Discrete => f.write_str("discrete"),
            VariableKind::Continuous => f.write_str("continuous"),
        }
    }
}

impl FromStr for VariableKind {
    type Err = DataError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "discrete" | "d" | "categorical" => Ok(VariableKind::Discrete),
            "continuous" | "c" | "real" => Ok(VariableKind::Continuous),
            other => Err(DataError::UnknownKind(other.to_string())),
        }
    }
}

#[derive(Debug, Error)]
pub enum DataError {
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("dataset has no rows")]
    Empty,
    #[error("dataset has no columns")]
    NoColumns,
    #[error("unknown variable kind {0:?}")]
    UnknownKind(String),
    #[error("schema does not cover column {0:?}")]
    SchemaMissing(String),
    #[error("schema names column {0:?} which is not in the data")]
    SchemaExtra(String),
    #[error("duplicate column name {0:?}")]
    DuplicateColumn(String),
    #[error("rows with missing or unparseable cells (0-based data rows): {rows:?}")]
    BadRows { rows: Vec<usize> },
    #[error("column {column:?} has {got} entries, expected {expected}")]
    RaggedColumn { column: String, expected: usize, got: usize },
    #[error("column {column:?} contains a non-finite value")]
    NonFinite { column: String },
    #[error("code {code} out of range for column {column:?} with {labels} labels")]
    CodeOutOfRange { column: String, code: u32, labels: usize },
    #[error("bin count must be at least 2, got {0}")]
    TooFewBins(usize),
    #[error("test fraction must lie in (0, 1), got {0}")]
    BadFraction(f64),
    #[error("need at least 10 rows to split, got {0}")]
    TooFewRows(usize),
    #[error("unknown column {0:?}")]
    UnknownColumn(String),
}

/// One column of observations.
#[derive(Debug, Clone, PartialEq)]
pub enum Column {
    /// Dense codes `0..labels.len()` with the code→label map.
    Discrete { codes: Vec<u32>, labels: Vec<String> },
    Continuous(Vec<f64>),
}

impl Column {
    pub fn kind(&self) -> VariableKind {
        match self {
            Column::Discrete { .. } => VariableKind::Discrete,
            Column::Continuous(_) => VariableKind::Continuous,
        }
    }

    pub fn len(&self) -> usize {
        match self {
            Column::Discrete { codes, .. } => codes.len(),
            Column::Continuous(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Builds a discrete column from raw labels, assigning codes in sorted label
    /// order (numeric order when every label parses as a number).
    pub fn from_labels<S: AsRef<str>>(raw: &[S]) -> Self {
        let mut labels: Vec<String> = raw.iter().map(|s| s.as_ref().to_string()).collect();
        labels.sort();
        labels.dedup();
        sort_labels(&mut labels);
        let index: HashMap<&str, u32> = labels
            .iter()
            .enumerate()
            .map(|(i, l)| (l.as_str(), i as u32))
            .collect();
        let codes = raw.iter().map(|s| index[s.as_ref()]).collect();
        Column::Discrete { codes, labels }
    }

    fn select(&self, rows: &[usize]) -> Column {
        match self {
            Column::Discrete { codes, labels } => Column::Discrete {
                codes: rows.iter().map(|&r| codes[r]).collect(),
                labels: labels.clone(),
            },
            Column::Continuous(v) => Column::Continuous(rows.iter().map(|&r| v[r]).collect()),
        }
    }
}

pub(crate) fn sort_labels(labels: &mut [String]) {
    let numeric: Option<Vec<f64>> = labels.iter().map(|l| l.trim().parse::<f64>().ok()).collect();
    if numeric.is_some() {
        labels.sort_by(|a, b| {
            let (x, y) = (a.trim().parse::<f64>().unwrap(), b.trim().parse::<f64>().unwrap());
            x.total_cmp(&y).then_with(|| a.cmp(b))
        });
    } else {
        labels.sort();
    }
}

/// An immutable table of typed columns, all of the same length.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    names: Vec<String>,
    columns: Vec<Column>,
    n_rows: usize,
}

impl Dataset {
    pub fn new(names: Vec<String>, columns: Vec<Column>) -> Result<Self, DataError> {
        if columns.is_empty() {
            return Err(DataError::NoColumns);
        }
        assert_eq!(names.len(), columns.len(), "one name per column");
        let mut seen = std::collections::HashSet::new();
        for name in &names {
            if !seen.insert(name.as_str()) {
                return Err(DataError::DuplicateColumn(name.clone()));
            }
        }
        let n_rows = columns[0].len();
        for (name, col) in names.iter().zip(&columns) {
            if col.len() != n_rows {
                return Err(DataError::RaggedColumn {
                    column: name.clone(),
                    expected: n_rows,
                    got: col.len(),
                });
            }
            match col {
                Column::Continuous(v) => {
                    if v.iter().any(|x| !x.is_finite()) {
                        return Err(DataError::NonFinite { column: name.clone() });
                    }
                }
                Column::Discrete { codes, labels } => {
                    if let Some(&code) = codes.iter().find(|&&c| c as usize >= labels.len()) {
                        return Err(DataError::CodeOutOfRange {
                            column: name.clone(),
                            code,
                            labels: labels.len(),
                        });
                    }
                }
            }
        }
        Ok(Self { names, columns, n_rows })
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.columns.len()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn name(&self, var: usize) -> &str {
        &self.names[var]
    }

    pub fn kinds(&self) -> Vec<VariableKind> {
        self.columns.iter().map(Column::kind).collect()
    }

    pub fn kind(&self, var: usize) -> VariableKind {
        self.columns[var].kind()
    }

    pub fn column(&self, var: usize) -> &Column {
        &self.columns[var]
    }

    pub fn columns(&self) -> &[Column] {
        &self.columns
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    /// Codes of a discrete column. Panics on a continuous column.
    pub fn codes(&self, var: usize) -> &[u32] {
        match &self.columns[var] {
            Column::Discrete { codes, .. } => codes,
            Column::Continuous(_) => panic!("column {} is continuous", self.names[var]),
        }
    }

    /// Values of a continuous column. Panics on a discrete column.
    pub fn values(&self, var: usize) -> &[f64] {
        match &self.columns[var] {
            Column::Continuous(v) => v,
            Column::Discrete { .. } => panic!("column {} is discrete", self.names[var]),
        }
    }

    /// Label map of a discrete column; empty for continuous columns.
    pub fn labels(&self, var: usize) -> &[String] {
        match &self.columns[var] {
            Column::Discrete { labels, .. } => labels,
            Column::Continuous(_) => &[],
        }
    }

    /// Number of categories of a discrete column (0 for continuous).
    pub fn cardinality(&self, var: usize) -> usize {
        self.labels(var).len()
    }

    /// The cell rendered as text: label for discrete, shortest round-trip float otherwise.
    pub fn cell_string(&self, row: usize, var: usize) -> String {
        match &self.columns[var] {
            Column::Discrete { codes, labels } => labels[codes[row] as usize].clone(),
            Column::Continuous(v) => format!("{}", v[row]),
        }
    }

    /// New dataset with the given rows (in the given order). Label maps are kept.
    pub fn select_rows(&self, rows: &[usize]) -> Dataset {
        Dataset {
            names: self.names.clone(),
            columns: self.columns.iter().map(|c| c.select(rows)).collect(),
            n_rows: rows.len(),
        }
    }

    /// Writes the table as CSV with a header row.
    pub fn write_csv<W: std::io::Write>(&self, writer: W) -> Result<(), DataError> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(&self.names)?;
        for row in 0..self.n_rows {
            w.write_record((0..self.n_cols()).map(|v| self.cell_string(row, v)))?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Explicit kind per column, as read from a two-column `name,kind` CSV.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Schema {
    pub entries: Vec<(String, VariableKind)>,
}

impl Schema {
    pub fn kind_of(&self, name: &str) -> Option<VariableKind> {
        self.entries.iter().find(|(n, _)| n == name).map(|(_, k)| *k)
    }

    pub fn from_reader<R: Read>(reader: R) -> Result<Self, DataError> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(false)
            .trim(csv::Trim::All)
            .from_reader(reader);
        let mut entries = Vec::new();
        for (i, record) in rdr.records().enumerate() {
            let record = record?;
            if record.len() < 2 {
                return Err(DataError::BadRows { rows: vec![i] });
            }
            let kind = match record[1].parse::<VariableKind>() {
                Ok(k) => k,
                // a header line such as "name,kind"
                Err(_) if i == 0 => continue,
                Err(e) => return Err(e),
            };
            entries.push((record[0].to_string(), kind));
        }
        Ok(Self { entries })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, DataError> {
        Self::from_reader(std::fs::File::open(path)?)
    }
}

/// Loads a CSV file with a header row. See [`read_csv`].
pub fn load_csv(path: impl AsRef<Path>, schema: Option<&Schema>) -> Result<Dataset, DataError> {
    read_csv(std::fs::File::open(path)?, schema)
}

/// Reads a CSV table. Without a schema, a column whose every cell parses as a
/// number is continuous and any other column is discrete. Rows with empty or
/// (for continuous columns) unparseable cells are rejected, reporting every
/// offending row.
pub fn read_csv<R: Read>(reader: R, schema: Option<&Schema>) -> Result<Dataset, DataError> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
    let names: Vec<String> = rdr.headers()?.iter().map(|h| h.trim().to_string()).collect();
    if names.is_empty() {
        return Err(DataError::NoColumns);
    }
    let mut raw: Vec<Vec<String>> = vec![Vec::new(); names.len()];
    for record in rdr.records() {
        let record = record?;
        for (col, cell) in raw.iter_mut().zip(record.iter()) {
            col.push(cell.trim().to_string());
        }
    }
    let n_rows = raw[0].len();
    if n_rows == 0 {
        return Err(DataError::Empty);
    }

    let kinds: Vec<VariableKind> = match schema {
        Some(schema) => {
            for (name, _) in &schema.entries {
                if !names.contains(name) {
                    return Err(DataError::SchemaExtra(name.clone()));
                }
            }
            names
                .iter()
                .map(|n| schema.kind_of(n).ok_or_else(|| DataError::SchemaMissing(n.clone())))
                .collect::<Result<_, _>>()?
        }
        None => raw
            .iter()
            .map(|cells| {
                let numeric = cells
                    .iter()
                    .filter(|c| !c.is_empty())
                    .all(|c| c.parse::<f64>().map(f64::is_finite).unwrap_or(false));
                if numeric && cells.iter().any(|c| !c.is_empty()) {
                    VariableKind::Continuous
                } else {
                    VariableKind::Discrete
                }
            })
            .collect(),
    };

    let mut bad: Vec<usize> = (0..n_rows)
        .filter(|&r| {
            raw.iter().zip(&kinds).any(|(cells, kind)| {
                let cell = &cells[r];
                cell.is_empty()
                    || (*kind == VariableKind::Continuous
                        && !cell.parse::<f64>().map(f64::is_finite).unwrap_or(false))
            })
        })
        .collect();
    if !bad.is_empty() {
        bad.dedup();
        return Err(DataError::BadRows { rows: bad });
    }

    let columns = raw
        .iter()
        .zip(&kinds)
        .map(|(cells, kind)| match kind {
            VariableKind::Continuous => {
                Column::Continuous(cells.iter().map(|c| c.parse::<f64>().unwrap()).collect())
            }
            VariableKind::Discrete => Column::from_labels(cells),
        })
        .collect();
    Dataset::new(names, columns)
}

/// Cut points and bin summaries for one discretized column.
///
/// Bin `i` covers `(cut_points[i-1], cut_points[i]]`; the first bin is open
/// below and the last is open above.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiscretizationMap {
    pub column: String,
    pub cut_points: Vec<f64>,
    /// Mean of the training values that fell in each bin.
    pub bin_means: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub warning: Option<String>,
}

impl DiscretizationMap {
    pub fn n_bins(&self) -> usize {
        self.cut_points.len() + 1
    }

    pub fn bin_of(&self, x: f64) -> u32 {
        self.cut_points.partition_point(|&c| c < x) as u32
    }

    /// Continuous representative of a bin (its training mean).
    pub fn decode(&self, bin: u32) -> f64 {
        self.bin_means[bin as usize]
    }

    pub fn labels(&self) -> Vec<String> {
        (0..self.n_bins()).map(|b| b.to_string()).collect()
    }

    /// Fits a map with up to `k` bins on `values`.
    pub fn fit(column: &str, values: &[f64], k: usize) -> Result<Self, DataError> {
        if k < 2 {
            return Err(DataError::TooFewBins(k));
        }
        let mut sorted = values.to_vec();
        sorted.sort_by(f64::total_cmp);
        let n = sorted.len();
        let max = *sorted.last().ok_or(DataError::Empty)?;
        let mut cut_points: Vec<f64> = (1..k)
            .map(|i| {
                let idx = ((i as f64 / k as f64) * n as f64).ceil() as usize;
                sorted[idx.saturating_sub(1).min(n - 1)]
            })
            .collect();
        cut_points.dedup();
        // a cut at the maximum would leave the top bin empty
        cut_points.retain(|&c| c < max);

        let mut map = Self {
            column: column.to_string(),
            cut_points,
            bin_means: Vec::new(),
            warning: None,
        };
        let mut sums = vec![0.0; map.n_bins()];
        let mut counts = vec![0usize; map.n_bins()];
        for &x in values {
            let b = map.bin_of(x) as usize;
            sums[b] += x;
            counts[b] += 1;
        }
        map.bin_means = sums
            .iter()
            .zip(&counts)
            .map(|(s, &c)| s / c.max(1) as f64)
            .collect();
        if map.n_bins() < k {
            let msg = format!(
                "column {column:?}: only {} distinct bins could be formed (requested {k})",
                map.n_bins()
            );
            log::warn!("{msg}");
            map.warning = Some(msg);
        }
        Ok(map)
    }

    pub fn apply(&self, values: &[f64]) -> Column {
        Column::Discrete {
            codes: values.iter().map(|&x| self.bin_of(x)).collect(),
            labels: self.labels(),
        }
    }
}

/// Replaces every continuous column by its `k`-bin equal-frequency discretization.
///
/// Cut points are the order statistics at index `ceil(q*n) - 1` for
/// `q = 1/k, ..., (k-1)/k`; equal cut points collapse.
pub fn equal_frequency_discretize(
    data: &Dataset,
    k: usize,
) -> Result<(Dataset, Vec<DiscretizationMap>), DataError> {
    if k < 2 {
        return Err(DataError::TooFewBins(k));
    }
    let mut maps = Vec::new();
    let mut columns = Vec::with_capacity(data.n_cols());
    for (var, col) in data.columns().iter().enumerate() {
        match col {
            Column::Continuous(values) => {
                let map = DiscretizationMap::fit(data.name(var), values, k)?;
                columns.push(map.apply(values));
                maps.push(map);
            }
            other => columns.push(other.clone()),
        }
    }
    Ok((Dataset::new(data.names().to_vec(), columns)?, maps))
}

/// Applies previously fitted maps to the matching continuous columns of `data`.
pub fn apply_discretization(data: &Dataset, maps: &[DiscretizationMap]) -> Result<Dataset, DataError> {
    let mut columns = data.columns().to_vec();
    for map in maps {
        let var = data
            .index_of(&map.column)
            .ok_or_else(|| DataError::UnknownColumn(map.column.clone()))?;
        if let Column::Continuous(values) = &columns[var] {
            columns[var] = map.apply(values);
        }
    }
    Dataset::new(data.names().to_vec(), columns)
}

/// Seeded disjoint row partition into `(train, test)` with
/// `|test| = round(test_fraction * n_rows)`. Rows keep their original order.
pub fn train_test_split(
    data: &Dataset,
    test_fraction: f64,
    seed: u64,
) -> Result<(Dataset, Dataset), DataError> {
    let (train, test) = split_indices(data.n_rows(), test_fraction, seed)?;
    Ok((data.select_rows(&train), data.select_rows(&test)))
}

/// Row indices of a seeded split; see [`train_test_split`].
pub fn split_indices(
    n_rows: usize,
    test_fraction: f64,
    seed: u64,
) -> Result<(Vec<usize>, Vec<usize>), DataError> {
    if !(test_fraction > 0.0 && test_fraction < 1.0) {
        return Err(DataError::BadFraction(test_fraction));
    }
    if n_rows < 10 {
        return Err(DataError::TooFewRows(n_rows));
    }
    let mut order: Vec<usize> = (0..n_rows).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let n_test = (test_fraction * n_rows as f64).round() as usize;
    let mut test = order[..n_test].to_vec();
    let mut train = order[n_test..].to_vec();
    test.sort_unstable();
    train.sort_unstable();
    Ok((train, test))
}
