//! Balanced-panel data model, CSV ingestion, cleaning, and standardization.
//!
//! A [`PanelData`] is a T x N matrix of observations (rows = time periods,
//! columns = cross-sectional units) with time labels and unique series ids.
//! The loader understands FRED-MD-style files: a mandatory header row, an
//! optional leading date column, an optional transform-code row (skipped,
//! not applied), and NA tokens for missing cells. Cleaning drops any column
//! with at least one missing value; rows are never dropped.

use std::fmt::Write as _;
use std::path::Path;

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// How to treat the leading column of a CSV file.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TimeColumn {
    /// Treat the first column as time labels when its header looks like a
    /// date/time column or its cells do not parse as numbers.
    #[default]
    Auto,
    /// The first column always holds time labels.
    First,
    /// Every column is data; synthetic labels "1".."T" are generated.
    None,
}

/// CSV ingestion options.
#[derive(Debug, Clone)]
pub struct IngestOptions {
    pub time_column: TimeColumn,
    /// Drop columns containing at least one NA cell. When `false`, any NA
    /// cell is an error.
    pub drop_incomplete_columns: bool,
    /// Tokens recognized as missing values (case-insensitive; the empty
    /// string matches blank cells).
    pub na_tokens: Vec<String>,
}

impl Default for IngestOptions {
    fn default() -> Self {
        Self {
            time_column: TimeColumn::Auto,
            drop_incomplete_columns: true,
            na_tokens: vec![String::new(), "NA".into(), "NaN".into()],
        }
    }
}

/// Header names treated as a time column under [`TimeColumn::Auto`].
const TIME_HEADER_NAMES: &[&str] =
    &["", "date", "dates", "time", "sasdate", "period", "month", "quarter", "year", "observation_date"];

/// A balanced panel of `T >= 2` periods over `N >= 1` series, all entries
/// finite. Immutable after construction and safe to share across threads.
#[derive(Debug, Clone, PartialEq)]
pub struct PanelData {
    values: DMatrix<f64>,
    time_labels: Vec<String>,
    series_ids: Vec<String>,
}

impl PanelData {
    /// Validating constructor. `time_labels` defaults to "1".."T" when `None`.
    pub fn new(
        values: DMatrix<f64>,
        time_labels: Option<Vec<String>>,
        series_ids: Vec<String>,
    ) -> Result<Self> {
        let (t, n) = (values.nrows(), values.ncols());
        if t < 2 {
            return Err(Error::Input(format!("panel needs T >= 2 periods, got {t}")));
        }
        if n < 1 {
            return Err(Error::Input("panel needs N >= 1 series".into()));
        }
        if series_ids.len() != n {
            return Err(Error::Input(format!(
                "expected {n} series ids, got {}",
                series_ids.len()
            )));
        }
        {
            let mut sorted = series_ids.clone();
            sorted.sort_unstable();
            if sorted.windows(2).any(|w| w[0] == w[1]) {
                return Err(Error::Input("series ids must be unique".into()));
            }
        }
        let time_labels =
            time_labels.unwrap_or_else(|| (1..=t).map(|i| i.to_string()).collect());
        if time_labels.len() != t {
            return Err(Error::Input(format!(
                "expected {t} time labels, got {}",
                time_labels.len()
            )));
        }
        for (idx, v) in values.iter().enumerate() {
            if !v.is_finite() {
                let (r, c) = (idx % t, idx / t);
                return Err(Error::Input(format!(
                    "non-finite value in series '{}' at period '{}'",
                    series_ids[c], time_labels[r]
                )));
            }
        }
        Ok(Self { values, time_labels, series_ids })
    }

    /// Panel with synthetic time labels and series ids "V1".."VN".
    pub fn from_matrix(values: DMatrix<f64>) -> Result<Self> {
        let n = values.ncols();
        PanelData::new(values, None, (1..=n).map(|i| format!("V{i}")).collect())
    }

    /// Number of time periods T.
    pub fn t_obs(&self) -> usize {
        self.values.nrows()
    }

    /// Number of cross-sectional units N.
    pub fn n_units(&self) -> usize {
        self.values.ncols()
    }

    pub fn values(&self) -> &DMatrix<f64> {
        &self.values
    }

    pub fn time_labels(&self) -> &[String] {
        &self.time_labels
    }

    pub fn series_ids(&self) -> &[String] {
        &self.series_ids
    }

    /// Column-standardized copy: every series gets sample mean 0 and sample
    /// standard deviation 1 (denominator T - 1). Errors on a constant series.
    pub fn standardize(&self) -> Result<PanelData> {
        let (t, n) = (self.t_obs(), self.n_units());
        let mut out = self.values.clone();
        for j in 0..n {
            let mut col = out.column_mut(j);
            let mean = col.iter().sum::<f64>() / t as f64;
            let ss: f64 = col.iter().map(|v| (v - mean) * (v - mean)).sum();
            let sd = (ss / (t - 1) as f64).sqrt();
            // Relative floor: constant columns demean to rounding noise.
            let scale = col.iter().fold(0.0f64, |a, v| a.max(v.abs()));
            if sd <= 1e-12 * scale {
                return Err(Error::Input(format!(
                    "constant series '{}' cannot be standardized",
                    self.series_ids[j]
                )));
            }
            for v in col.iter_mut() {
                *v = (*v - mean) / sd;
            }
        }
        Ok(PanelData {
            values: out,
            time_labels: self.time_labels.clone(),
            series_ids: self.series_ids.clone(),
        })
    }

    /// Write the panel as CSV with a `time` column. Floats use Rust's
    /// shortest round-trip formatting, so reading the file back recovers the
    /// exact bit pattern.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut out = String::new();
        out.push_str("time");
        for id in &self.series_ids {
            out.push(',');
            out.push_str(id);
        }
        out.push('\n');
        for r in 0..self.t_obs() {
            out.push_str(&self.time_labels[r]);
            for c in 0..self.n_units() {
                let _ = write!(out, ",{}", self.values[(r, c)]);
            }
            out.push('\n');
        }
        std::fs::write(path, out)
            .map_err(|e| Error::Input(format!("cannot write {}: {e}", path.display())))
    }
}

/// Load a panel from CSV per the ingestion options.
pub fn load_csv(path: &Path, opts: &IngestOptions) -> Result<PanelData> {
    let raw = std::fs::read_to_string(path)
        .map_err(|e| Error::Input(format!("cannot read {}: {e}", path.display())))?;
    load_csv_str(&raw, opts).map_err(|e| match e {
        Error::Input(msg) => Error::Input(format!("{}: {msg}", path.display())),
        other => other,
    })
}

/// CSV ingestion from an in-memory string (the file loader delegates here).
pub fn load_csv_str(raw: &str, opts: &IngestOptions) -> Result<PanelData> {
    let raw = raw.strip_prefix('\u{feff}').unwrap_or(raw);
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(false)
        .trim(csv::Trim::All)
        .from_reader(raw.as_bytes());

    let headers: Vec<String> = reader
        .headers()
        .map_err(|e| Error::Input(format!("bad header row: {e}")))?
        .iter()
        .map(|s| s.to_string())
        .collect();
    if headers.is_empty() {
        return Err(Error::Input("empty header row".into()));
    }

    let mut rows: Vec<Vec<String>> = Vec::new();
    for (i, rec) in reader.records().enumerate() {
        let rec = rec.map_err(|e| Error::Input(format!("row {}: {e}", i + 2)))?;
        rows.push(rec.iter().map(|s| s.to_string()).collect());
    }

    let is_na = |cell: &str| opts.na_tokens.iter().any(|tok| cell.eq_ignore_ascii_case(tok));
    let parses = |cell: &str| {
        cell.parse::<f64>().ok().filter(|v| v.is_finite()).is_some()
    };

    // FRED-MD exports carry a transform-code row right under the header;
    // detect it by its first cell and skip it (codes are not applied).
    if let Some(first) = rows.first() {
        if first
            .first()
            .map(|c| c.to_ascii_lowercase().starts_with("transform"))
            .unwrap_or(false)
        {
            rows.remove(0);
        }
    }
    if rows.is_empty() {
        return Err(Error::Input("no data rows".into()));
    }

    let has_time_col = match opts.time_column {
        TimeColumn::First => true,
        TimeColumn::None => false,
        TimeColumn::Auto => {
            let name = headers[0].to_ascii_lowercase();
            TIME_HEADER_NAMES.contains(&name.as_str())
                || rows.iter().any(|r| !r.is_empty() && !is_na(&r[0]) && !parses(&r[0]))
        }
    };

    let data_start = usize::from(has_time_col);
    if headers.len() <= data_start {
        return Err(Error::Input("no data columns".into()));
    }
    let t = rows.len();
    let n_all = headers.len() - data_start;

    let time_labels: Option<Vec<String>> = has_time_col
        .then(|| rows.iter().map(|r| r[0].clone()).collect());

    // Parse every cell, recording columns that contain an NA.
    let mut parsed = vec![vec![0.0f64; t]; n_all];
    let mut col_has_na = vec![false; n_all];
    for (ri, row) in rows.iter().enumerate() {
        for (cj, cell) in row.iter().skip(data_start).enumerate() {
            if is_na(cell) {
                col_has_na[cj] = true;
            } else {
                match cell.parse::<f64>().ok().filter(|v| v.is_finite()) {
                    Some(v) => parsed[cj][ri] = v,
                    None => {
                        return Err(Error::Input(format!(
                            "non-numeric cell '{}' in column '{}', row {}",
                            cell,
                            headers[data_start + cj],
                            ri + 2
                        )))
                    }
                }
            }
        }
    }

    if !opts.drop_incomplete_columns {
        if let Some(cj) = col_has_na.iter().position(|&b| b) {
            return Err(Error::Input(format!(
                "column '{}' has missing values and drop_incomplete_columns is off",
                headers[data_start + cj]
            )));
        }
    }

    let kept: Vec<usize> = (0..n_all).filter(|&j| !col_has_na[j]).collect();
    if kept.is_empty() {
        return Err(Error::Input("zero usable columns after cleaning".into()));
    }

    let n = kept.len();
    let values = DMatrix::from_fn(t, n, |r, c| parsed[kept[c]][r]);
    let series_ids = kept.iter().map(|&j| headers[data_start + j].clone()).collect();
    PanelData::new(values, time_labels, series_ids)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn panel_from_cols(cols: &[&[f64]]) -> PanelData {
        let t = cols[0].len();
        let m = DMatrix::from_fn(t, cols.len(), |r, c| cols[c][r]);
        PanelData::from_matrix(m).unwrap()
    }

    #[test]
    fn loads_plain_csv_without_time_column() {
        let p = load_csv_str("a,b\n1,2\n3,4\n5,6\n", &IngestOptions::default()).unwrap();
        assert_eq!(p.t_obs(), 3);
        assert_eq!(p.n_units(), 2);
        assert_eq!(p.time_labels(), ["1", "2", "3"]);
        assert_eq!(p.series_ids(), ["a", "b"]);
        assert_eq!(p.values()[(2, 1)], 6.0);
    }

    #[test]
    fn detects_date_column_and_drops_incomplete_series() {
        let raw = "sasdate,x,y,z\n1/31/03,1,2,3\n2/28/03,4,,6\n3/31/03,7,8,9\n4/30/03,1,2,3\n5/31/03,4,5,6\n";
        let p = load_csv_str(raw, &IngestOptions::default()).unwrap();
        assert_eq!(p.t_obs(), 5);
        assert_eq!(p.n_units(), 2, "column y has an empty cell and must go");
        assert_eq!(p.series_ids(), ["x", "z"]);
        assert_eq!(p.time_labels()[0], "1/31/03");
    }

    #[test]
    fn skips_transform_code_row() {
        let raw = "sasdate,x,y\nTransform:,5,2\n1/31/03,1,2\n2/28/03,3,4\n";
        let p = load_csv_str(raw, &IngestOptions::default()).unwrap();
        assert_eq!(p.t_obs(), 2);
        assert_eq!(p.values()[(0, 0)], 1.0);
    }

    #[test]
    fn rejects_bad_cells_and_ragged_rows() {
        let e = load_csv_str("a,b\n1,2\n3,oops\n", &IngestOptions::default()).unwrap_err();
        assert!(e.to_string().contains("oops"), "{e}");
        assert!(load_csv_str("a,b\n1,2\n3\n", &IngestOptions::default()).is_err());
        assert!(load_csv_str("a,b\n1,inf\n3,4\n", &IngestOptions::default()).is_err());
        // All columns have an NA somewhere.
        let e = load_csv_str("a,b\nNA,2\n3,na\n", &IngestOptions::default()).unwrap_err();
        assert!(e.to_string().contains("zero usable columns"), "{e}");
    }

    #[test]
    fn na_handling_respects_drop_flag() {
        let mut opts = IngestOptions::default();
        opts.drop_incomplete_columns = false;
        let e = load_csv_str("a,b\n1,2\n3,NaN\n", &opts).unwrap_err();
        assert!(e.to_string().contains("missing values"), "{e}");
    }

    #[test]
    fn standardize_hand_case_and_constant_error() {
        let p = panel_from_cols(&[&[1.0, 2.0, 3.0]]);
        let s = p.standardize().unwrap();
        assert!((s.values()[(0, 0)] + 1.0).abs() < 1e-14);
        assert!(s.values()[(1, 0)].abs() < 1e-14);
        assert!((s.values()[(2, 0)] - 1.0).abs() < 1e-14);

        let c = panel_from_cols(&[&[5.0, 5.0, 5.0]]);
        let e = c.standardize().unwrap_err();
        assert!(e.to_string().contains("constant series 'V1'"), "{e}");
    }

    #[test]
    fn standardize_is_idempotent() {
        let p = panel_from_cols(&[&[1.0, 4.0, 2.0, 8.0], &[0.5, -0.25, 0.75, 0.0]]);
        let s1 = p.standardize().unwrap();
        let s2 = s1.standardize().unwrap();
        for (a, b) in s1.values().iter().zip(s2.values().iter()) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn constructor_guards() {
        let one_row = DMatrix::from_row_slice(1, 2, &[1.0, 2.0]);
        assert!(PanelData::from_matrix(one_row).is_err());
        let m = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 3.0, 4.0]);
        assert!(PanelData::new(m.clone(), None, vec!["a".into(), "a".into()]).is_err());
        assert!(PanelData::new(m, Some(vec!["t1".into()]), vec!["a".into(), "b".into()]).is_err());
        let nan = DMatrix::from_row_slice(2, 1, &[1.0, f64::NAN]);
        assert!(PanelData::new(nan, None, vec!["a".into()]).is_err());
    }

    #[test]
    fn csv_round_trip_is_bit_exact() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("panel.csv");
        let vals = [0.1, -3.25e-7, 2.0 / 3.0, 1e18, 4.0, -0.0, 1.5, 9.75];
        let m = DMatrix::from_row_slice(4, 2, &vals);
        let p = PanelData::from_matrix(m).unwrap();
        p.write_csv(&path).unwrap();
        let q = load_csv(&path, &IngestOptions::default()).unwrap();
        assert_eq!(p.t_obs(), q.t_obs());
        assert_eq!(p.n_units(), q.n_units());
        for (a, b) in p.values().iter().zip(q.values().iter()) {
            assert_eq!(a.to_bits(), b.to_bits(), "{a} vs {b}");
        }
        assert_eq!(p.series_ids(), q.series_ids());
    }

    proptest! {
        #[test]
        fn standardize_commutes_with_column_permutation(
            cols in proptest::collection::vec(
                proptest::collection::vec(-50.0f64..50.0, 6),
                2..5,
            )
        ) {
            // Make columns non-constant by construction.
            let mut cols = cols;
            for (j, col) in cols.iter_mut().enumerate() {
                col[0] += 1.0 + j as f64;
            }
            let n = cols.len();
            let t = cols[0].len();
            let m = DMatrix::from_fn(t, n, |r, c| cols[c][r]);
            let p = PanelData::from_matrix(m).unwrap();
            // Reverse the columns, standardize, compare against standardizing
            // first and then reversing.
            let rev = DMatrix::from_fn(t, n, |r, c| cols[n - 1 - c][r]);
            let ids_rev: Vec<String> = (0..n).map(|c| format!("V{}", n - c)).collect();
            let p_rev = PanelData::new(rev, None, ids_rev).unwrap();
            let s_then_perm = p.standardize().unwrap();
            let perm_then_s = p_rev.standardize().unwrap();
            for c in 0..n {
                for r in 0..t {
                    let a = s_then_perm.values()[(r, n - 1 - c)];
                    let b = perm_then_s.values()[(r, c)];
                    prop_assert!((a - b).abs() < 1e-12);
                }
            }
        }
    }
}
