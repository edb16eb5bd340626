//! Categorical tabular data as integer-coded columns.
//!
//! Columns are encoded by first appearance: the first distinct raw string in
//! a column becomes code 0, the next new one code 1, and so on. This keeps
//! loading deterministic and order-stable. Missing values (the configured
//! missing token, empty string by default) become a category of their own
//! unless rows are dropped instead.

use std::collections::HashMap;
use std::fmt;
use std::path::Path;

use crate::error::{Error, Result};

/// One integer-coded column plus the mapping back to the source strings.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FeatureColumn {
    pub name: String,
    /// Category codes, dense in `[0, arity)`.
    pub codes: Vec<u32>,
    pub arity: usize,
    /// Source string for each code, indexed by code.
    pub labels: Vec<String>,
}

impl FeatureColumn {
    /// Encode raw strings by first appearance.
    pub fn from_raw<S: AsRef<str>>(name: impl Into<String>, raw: &[S]) -> Self {
        let mut seen: HashMap<&str, u32> = HashMap::new();
        let mut labels = Vec::new();
        let mut codes = Vec::with_capacity(raw.len());
        for value in raw {
            let value = value.as_ref();
            let code = *seen.entry(value).or_insert_with(|| {
                labels.push(value.to_string());
                (labels.len() - 1) as u32
            });
            codes.push(code);
        }
        FeatureColumn {
            name: name.into(),
            arity: labels.len(),
            codes,
            labels,
        }
    }

    /// Build a column directly from codes; labels default to the decimal code.
    pub fn from_codes(name: impl Into<String>, codes: Vec<u32>) -> Self {
        let arity = codes.iter().map(|&c| c as usize + 1).max().unwrap_or(0);
        let labels = (0..arity).map(|c| c.to_string()).collect();
        FeatureColumn {
            name: name.into(),
            codes,
            arity,
            labels,
        }
    }

    /// Source string for a code.
    pub fn label(&self, code: u32) -> &str {
        &self.labels[code as usize]
    }

    pub fn len(&self) -> usize {
        self.codes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.codes.is_empty()
    }

    pub fn is_constant(&self) -> bool {
        self.arity <= 1
    }

    fn validate(&self, n_rows: usize) -> Result<()> {
        if self.name.is_empty() {
            return Err(Error::EmptyColumnName(0));
        }
        if self.codes.len() != n_rows {
            return Err(Error::LengthMismatch(self.codes.len(), n_rows));
        }
        let mut present = vec![false; self.arity];
        for &c in &self.codes {
            if (c as usize) >= self.arity {
                return Err(Error::InvalidConfig(format!(
                    "code {} out of range for arity {} in column '{}'",
                    c, self.arity, self.name
                )));
            }
            present[c as usize] = true;
        }
        if !present.iter().all(|&p| p) {
            return Err(Error::InvalidConfig(format!(
                "codes of column '{}' are not dense in [0, {})",
                self.name, self.arity
            )));
        }
        Ok(())
    }
}

/// Column-major categorical dataset; the ground data of the scoring game.
///
/// Immutable after construction and safe to share across workers.
#[derive(Debug, Clone, PartialEq)]
pub struct CategoricalDataset {
    name: String,
    columns: Vec<FeatureColumn>,
    n_rows: usize,
}

impl CategoricalDataset {
    pub fn new(name: impl Into<String>, columns: Vec<FeatureColumn>) -> Result<Self> {
        if columns.is_empty() {
            return Err(Error::EmptyInput("dataset has no columns".into()));
        }
        let n_rows = columns[0].len();
        if n_rows == 0 {
            return Err(Error::EmptyInput("dataset has no rows".into()));
        }
        let mut names: HashMap<&str, usize> = HashMap::new();
        for col in &columns {
            col.validate(n_rows)?;
            if names.insert(&col.name, 1).is_some() {
                return Err(Error::DuplicateColumn(col.name.clone()));
            }
        }
        Ok(CategoricalDataset {
            name: name.into(),
            columns,
            n_rows,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_features(&self) -> usize {
        self.columns.len()
    }

    pub fn columns(&self) -> &[FeatureColumn] {
        &self.columns
    }

    pub fn column(&self, index: usize) -> &FeatureColumn {
        &self.columns[index]
    }

    pub fn feature_names(&self) -> impl Iterator<Item = &str> {
        self.columns.iter().map(|c| c.name.as_str())
    }

    pub fn feature_index(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c.name == name)
    }

    /// Restrict the dataset to the given features, preserving row order.
    pub fn project(&self, subset: &crate::entropy::FeatureSubset) -> Result<CategoricalDataset> {
        if subset.is_empty() {
            return Err(Error::EmptySubset);
        }
        let mut columns = Vec::with_capacity(subset.len());
        for index in subset.iter() {
            if index >= self.n_features() {
                return Err(Error::FeatureOutOfRange {
                    index,
                    n_features: self.n_features(),
                });
            }
            columns.push(self.columns[index].clone());
        }
        Ok(CategoricalDataset {
            name: self.name.clone(),
            columns,
            n_rows: self.n_rows,
        })
    }

    /// Reconstruct the raw row of source strings for `row`.
    pub fn decode_row(&self, row: usize) -> Vec<&str> {
        self.columns
            .iter()
            .map(|c| c.label(c.codes[row]))
            .collect()
    }

    /// 64-bit FNV-1a over shape, names, arities and codes.
    ///
    /// Stable across runs and platforms; reports embed it so downstream
    /// comparisons can refuse results computed on different inputs.
    pub fn fingerprint(&self) -> u64 {
        let mut h = Fnv1a::new();
        h.write_u64(self.n_rows as u64);
        h.write_u64(self.columns.len() as u64);
        for col in &self.columns {
            h.write_bytes(col.name.as_bytes());
            h.write_u64(col.arity as u64);
            for &c in &col.codes {
                h.write_u32(c);
            }
        }
        h.finish()
    }

    /// Write the dataset as CSV (header + decoded source strings).
    pub fn write_csv<W: std::io::Write>(&self, writer: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(writer);
        wtr.write_record(self.feature_names())
            .map_err(|e| Error::Csv(e.to_string()))?;
        for row in 0..self.n_rows {
            wtr.write_record(self.decode_row(row))
                .map_err(|e| Error::Csv(e.to_string()))?;
        }
        wtr.flush()?;
        Ok(())
    }
}

impl fmt::Display for CategoricalDataset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} ({} rows x {} features)",
            self.name,
            self.n_rows,
            self.n_features()
        )
    }
}

struct Fnv1a(u64);

impl Fnv1a {
    fn new() -> Self {
        Fnv1a(0xcbf2_9ce4_8422_2325)
    }
    fn write_bytes(&mut self, bytes: &[u8]) {
        for &b in bytes {
            self.0 ^= b as u64;
            self.0 = self.0.wrapping_mul(0x100_0000_01b3);
        }
    }
    fn write_u32(&mut self, v: u32) {
        self.write_bytes(&v.to_le_bytes());
    }
    fn write_u64(&mut self, v: u64) {
        self.write_bytes(&v.to_le_bytes());
    }
    fn finish(&self) -> u64 {
        self.0
    }
}

/// How rows containing the missing token are treated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum MissingPolicy {
    /// The missing token becomes a category of its own (default).
    #[default]
    OwnCategory,
    /// Rows with a missing value in any kept column are dropped.
    DropRows,
}

/// CSV ingestion options.
#[derive(Debug, Clone)]
pub struct IngestOptions {
    /// Columns to drop by name.
    pub drop_columns: Vec<String>,
    /// Raw string treated as missing; empty string by default.
    pub missing_token: String,
    pub missing_policy: MissingPolicy,
    /// Columns to parse as numbers and discretize into `k` equal-width bins.
    pub bins: Vec<(String, usize)>,
    /// Keep at most this many data rows.
    pub max_rows: Option<usize>,
}

impl Default for IngestOptions {
    fn default() -> Self {
        IngestOptions {
            drop_columns: Vec::new(),
            missing_token: String::new(),
            missing_policy: MissingPolicy::OwnCategory,
            bins: Vec::new(),
            max_rows: None,
        }
    }
}

/// Load a header-first RFC-4180-style CSV file into coded columns.
pub fn load_csv(path: impl AsRef<Path>, options: &IngestOptions) -> Result<CategoricalDataset> {
    let path = path.as_ref();
    let file = std::fs::File::open(path)?;
    let name = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "dataset".to_string());
    load_csv_reader(file, &name, options)
}

/// Same as [`load_csv`] for any reader; `name` labels the resulting dataset.
pub fn load_csv_reader<R: std::io::Read>(
    reader: R,
    name: &str,
    options: &IngestOptions,
) -> Result<CategoricalDataset> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .from_reader(reader);

    let headers: Vec<String> = {
        let record = rdr
            .headers()
            .map_err(|e| Error::Csv(e.to_string()))?
            .clone();
        record.iter().map(|s| s.to_string()).collect()
    };
    if headers.is_empty() || (headers.len() == 1 && headers[0].is_empty()) {
        return Err(Error::EmptyInput("no header row".into()));
    }
    for (i, h) in headers.iter().enumerate() {
        if h.is_empty() {
            return Err(Error::EmptyColumnName(i));
        }
        if headers[..i].iter().any(|other| other == h) {
            return Err(Error::DuplicateColumn(h.clone()));
        }
    }
    for dropped in &options.drop_columns {
        if !headers.iter().any(|h| h == dropped) {
            return Err(Error::UnknownColumn(dropped.clone()));
        }
    }
    for (binned, k) in &options.bins {
        if !headers.iter().any(|h| h == binned) {
            return Err(Error::UnknownColumn(binned.clone()));
        }
        if *k == 0 {
            return Err(Error::InvalidConfig(format!(
                "--bin {binned}:0 — bin count must be at least 1"
            )));
        }
    }

    let n_cols = headers.len();
    let mut raw_columns: Vec<Vec<String>> = vec![Vec::new(); n_cols];
    for (row_idx, record) in rdr.records().enumerate() {
        let record = record.map_err(|e| Error::Csv(e.to_string()))?;
        if record.len() != n_cols {
            return Err(Error::RaggedRow {
                // +2: one for the header line, one for 1-based numbering.
                row: row_idx + 2,
                expected: n_cols,
                found: record.len(),
            });
        }
        if let Some(max) = options.max_rows {
            if raw_columns[0].len() >= max {
                break;
            }
        }
        for (col, value) in record.iter().enumerate() {
            raw_columns[col].push(value.to_string());
        }
    }
    if raw_columns[0].is_empty() {
        return Err(Error::EmptyInput("no data rows".into()));
    }

    let keep: Vec<usize> = (0..n_cols)
        .filter(|i| !options.drop_columns.iter().any(|d| d == &headers[*i]))
        .collect();
    if keep.is_empty() {
        return Err(Error::EmptyInput("all columns dropped".into()));
    }

    // Drop rows with missing values before encoding, if requested.
    let row_kept: Vec<bool> = match options.missing_policy {
        MissingPolicy::OwnCategory => vec![true; raw_columns[0].len()],
        MissingPolicy::DropRows => (0..raw_columns[0].len())
            .map(|r| !keep.iter().any(|&c| raw_columns[c][r] == options.missing_token))
            .collect(),
    };

    let mut columns = Vec::with_capacity(keep.len());
    for &c in &keep {
        let raw: Vec<&str> = raw_columns[c]
            .iter()
            .zip(&row_kept)
            .filter(|(_, &kept)| kept)
            .map(|(v, _)| v.as_str())
            .collect();
        if raw.is_empty() {
            return Err(Error::EmptyInput(
                "no rows left after dropping missing values".into(),
            ));
        }
        let column = match options.bins.iter().find(|(b, _)| b == &headers[c]) {
            Some((_, k)) => {
                let mut values = Vec::with_capacity(raw.len());
                for (r, v) in raw.iter().enumerate() {
                    let parsed: f64 = v.parse().map_err(|_| Error::NotNumeric {
                        column: headers[c].clone(),
                        row: r + 2,
                        value: v.to_string(),
                    })?;
                    values.push(parsed);
                }
                bin_numeric(&headers[c], &values, *k)?
            }
            None => FeatureColumn::from_raw(&headers[c], &raw),
        };
        columns.push(column);
    }

    CategoricalDataset::new(name, columns)
}

/// Discretize a numeric column into `n_bins` equal-width bins over
/// `[min, max]`.
///
/// A value exactly on an interior bin edge goes to the lower bin; the
/// maximum goes to the last bin. Bins with no values are compacted away so
/// codes stay dense, in ascending bin order.
pub fn bin_numeric(name: &str, values: &[f64], n_bins: usize) -> Result<FeatureColumn> {
    if n_bins == 0 {
        return Err(Error::InvalidConfig("n_bins must be at least 1".into()));
    }
    if values.is_empty() {
        return Err(Error::EmptyInput("empty numeric column".into()));
    }
    if let Some(pos) = values.iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFiniteValue(pos));
    }

    let min = values.iter().cloned().fold(f64::INFINITY, f64::min);
    let max = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);

    if min == max {
        return Ok(FeatureColumn {
            name: name.to_string(),
            codes: vec![0; values.len()],
            arity: 1,
            labels: vec![format!("[{min}, {max}]")],
        });
    }

    let width = (max - min) / n_bins as f64;
    let bin_of = |x: f64| -> usize {
        // Right-closed intervals: (edge_i, edge_{i+1}] except the first,
        // which also includes min.
        let pos = (x - min) / width;
        let idx = (pos.ceil() - 1.0).max(0.0) as usize;
        idx.min(n_bins - 1)
    };

    let bins: Vec<usize> = values.iter().map(|&x| bin_of(x)).collect();
    let mut used = vec![false; n_bins];
    for &b in &bins {
        used[b] = true;
    }
    // Compact to dense codes keeping bin order, so codes stay ordinal.
    let mut remap = vec![u32::MAX; n_bins];
    let mut labels = Vec::new();
    let mut next = 0u32;
    for b in 0..n_bins {
        if used[b] {
            remap[b] = next;
            let lo = min + b as f64 * width;
            let hi = min + (b + 1) as f64 * width;
            labels.push(if b + 1 == n_bins {
                format!("[{lo}, {hi}]")
            } else {
                format!("[{lo}, {hi})")
            });
            next += 1;
        }
    }
    Ok(FeatureColumn {
        name: name.to_string(),
        codes: bins.iter().map(|&b| remap[b]).collect(),
        arity: next as usize,
        labels,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::entropy::FeatureSubset;
    use std::io::Write;

    fn load_str(csv: &str, options: &IngestOptions) -> Result<CategoricalDataset> {
        load_csv_reader(csv.as_bytes(), "test", options)
    }

    #[test]
    fn first_appearance_encoding() {
        let ds = load_str("a,b\nx,1\ny,1\nx,2\n", &IngestOptions::default()).unwrap();
        assert_eq!(ds.n_features(), 2);
        assert_eq!(ds.n_rows(), 3);
        assert_eq!(ds.column(0).codes, vec![0, 1, 0]);
        assert_eq!(ds.column(1).codes, vec![0, 0, 1]);
        assert_eq!(ds.column(0).arity, 2);
    }

    #[test]
    fn constant_column_has_arity_one() {
        let ds = load_str("a,b\nx,1\nx,2\n", &IngestOptions::default()).unwrap();
        assert_eq!(ds.column(0).arity, 1);
        assert_eq!(ds.column(0).codes, vec![0, 0]);
    }

    #[test]
    fn ragged_row_reports_row_number() {
        let err = load_str("a,b\nx,1\ny\n", &IngestOptions::default()).unwrap_err();
        match err {
            Error::RaggedRow { row, .. } => assert_eq!(row, 3),
            other => panic!("expected RaggedRow, got {other}"),
        }
    }

    #[test]
    fn empty_file_is_an_error() {
        assert!(load_str("", &IngestOptions::default()).is_err());
        assert!(load_str("a,b\n", &IngestOptions::default()).is_err());
    }

    #[test]
    fn duplicate_header_is_an_error() {
        let err = load_str("a,a\n1,2\n", &IngestOptions::default()).unwrap_err();
        assert!(matches!(err, Error::DuplicateColumn(_)));
    }

    #[test]
    fn missing_token_becomes_own_category() {
        let ds = load_str("a\nx\n\ny\n", &IngestOptions::default()).unwrap();
        assert_eq!(ds.column(0).arity, 3);
        assert_eq!(ds.column(0).codes, vec![0, 1, 2]);
        assert_eq!(ds.column(0).label(1), "");
    }

    #[test]
    fn missing_rows_can_be_dropped() {
        let options = IngestOptions {
            missing_token: "?".into(),
            missing_policy: MissingPolicy::DropRows,
            ..IngestOptions::default()
        };
        let ds = load_str("a,b\nx,1\n?,2\ny,3\n", &options).unwrap();
        assert_eq!(ds.n_rows(), 2);
        assert_eq!(ds.column(0).codes, vec![0, 1]);
    }

    #[test]
    fn drop_columns_and_max_rows() {
        let options = IngestOptions {
            drop_columns: vec!["b".into()],
            max_rows: Some(2),
            ..IngestOptions::default()
        };
        let ds = load_str("a,b\nx,1\ny,2\nz,3\n", &options).unwrap();
        assert_eq!(ds.n_features(), 1);
        assert_eq!(ds.n_rows(), 2);
        assert!(ds.feature_index("b").is_none());
    }

    #[test]
    fn unknown_drop_column_is_an_error() {
        let options = IngestOptions {
            drop_columns: vec!["nope".into()],
            ..IngestOptions::default()
        };
        assert!(matches!(
            load_str("a\nx\n", &options),
            Err(Error::UnknownColumn(_))
        ));
    }

    #[test]
    fn bin_option_discretizes_numeric_columns() {
        let options = IngestOptions {
            bins: vec![("b".into(), 2)],
            ..IngestOptions::default()
        };
        let ds = load_str("a,b\nx,0.0\ny,0.5\nz,1.0\n", &options).unwrap();
        assert_eq!(ds.column(1).codes, vec![0, 0, 1]);
    }

    #[test]
    fn bin_edges_go_to_lower_bin() {
        let col = bin_numeric("v", &[0.0, 0.5, 1.0], 2).unwrap();
        assert_eq!(col.codes, vec![0, 0, 1]);
        assert_eq!(col.arity, 2);
    }

    #[test]
    fn bin_constant_column_is_single_bin() {
        let col = bin_numeric("v", &[3.0, 3.0, 3.0], 4).unwrap();
        assert_eq!(col.codes, vec![0, 0, 0]);
        assert_eq!(col.arity, 1);
    }

    #[test]
    fn bin_equal_width_assignment() {
        let values: Vec<f64> = (0..10).map(|i| i as f64).collect();
        let col = bin_numeric("v", &values, 5).unwrap();
        assert_eq!(col.codes, vec![0, 0, 1, 1, 2, 2, 3, 3, 4, 4]);
    }

    #[test]
    fn bin_rejects_nan() {
        assert!(matches!(
            bin_numeric("v", &[0.0, f64::NAN], 2),
            Err(Error::NonFiniteValue(1))
        ));
    }

    #[test]
    fn project_preserves_rows_and_errors_on_empty() {
        let ds = load_str("a,b,c\nx,1,p\ny,2,q\n", &IngestOptions::default()).unwrap();
        let sub = ds
            .project(&FeatureSubset::from_indices([2usize, 0]).unwrap())
            .unwrap();
        assert_eq!(sub.n_features(), 2);
        assert_eq!(sub.column(0).name, "a");
        assert_eq!(sub.column(1).name, "c");

        let all = FeatureSubset::from_indices(0..3usize).unwrap();
        assert_eq!(ds.project(&all).unwrap(), ds);

        assert!(matches!(
            ds.project(&FeatureSubset::empty()),
            Err(Error::EmptySubset)
        ));
    }

    #[test]
    fn decode_round_trips_raw_strings() {
        let raw = "a,b\nx,1\ny,1\nx,2\n";
        let ds = load_str(raw, &IngestOptions::default()).unwrap();
        assert_eq!(ds.decode_row(0), vec!["x", "1"]);
        assert_eq!(ds.decode_row(1), vec!["y", "1"]);
        assert_eq!(ds.decode_row(2), vec!["x", "2"]);
    }

    #[test]
    fn load_is_deterministic() {
        let mut file = tempfile::NamedTempFile::new().unwrap();
        write!(file, "a,b\nx,1\ny,1\nx,2\n").unwrap();
        let a = load_csv(file.path(), &IngestOptions::default()).unwrap();
        let b = load_csv(file.path(), &IngestOptions::default()).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.fingerprint(), b.fingerprint());
    }

    #[test]
    fn csv_round_trip() {
        let ds = load_str("a,b\nx,1\ny,1\nx,2\n", &IngestOptions::default()).unwrap();
        let mut buf = Vec::new();
        ds.write_csv(&mut buf).unwrap();
        let back = load_csv_reader(buf.as_slice(), "test", &IngestOptions::default()).unwrap();
        assert_eq!(back, ds);
    }
}
