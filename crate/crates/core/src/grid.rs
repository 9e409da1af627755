//! Accuracy grids and 1-D series.
//!
//! Grids are stored s-major (`values[s][q]`). On disk the layout is the
//! transpose: the header row lists the s values after a literal `q\s`
//! cell, and every following row is a q value and its accuracies.

use std::fmt::Write as _;
use std::io::Read;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const CORNER_CELL: &str = "q\\s";

/// Measured task accuracy (percent) over compression quality and
/// Shannon-gap ratio.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawGrid", into = "RawGrid")]
pub struct AccuracyGrid {
    q_axis: Vec<f64>,
    s_axis: Vec<f64>,
    values: Vec<Vec<f64>>,
    label: String,
}

#[derive(Serialize, Deserialize)]
struct RawGrid {
    q_axis: Vec<f64>,
    s_axis: Vec<f64>,
    values: Vec<Vec<f64>>,
    label: String,
}

impl TryFrom<RawGrid> for AccuracyGrid {
    type Error = Error;
    fn try_from(r: RawGrid) -> Result<Self> {
        AccuracyGrid::new(r.q_axis, r.s_axis, r.values, r.label)
    }
}

impl From<AccuracyGrid> for RawGrid {
    fn from(g: AccuracyGrid) -> Self {
        RawGrid {
            q_axis: g.q_axis,
            s_axis: g.s_axis,
            values: g.values,
            label: g.label,
        }
    }
}

fn check_axis(axis: &[f64], name: &str) -> Result<()> {
    if axis.is_empty() {
        return Err(Error::data(None, None, format!("{name} axis is empty")));
    }
    for (i, &v) in axis.iter().enumerate() {
        if !v.is_finite() || v <= 0.0 {
            return Err(Error::data(
                None,
                None,
                format!("{name} axis entry {i} must be finite and > 0, got {v}"),
            ));
        }
    }
    if let Some(i) = axis.windows(2).position(|w| w[1] <= w[0]) {
        return Err(Error::data(
            None,
            None,
            format!(
                "{name} axis not strictly increasing at entry {} ({} after {})",
                i + 1,
                axis[i + 1],
                axis[i]
            ),
        ));
    }
    Ok(())
}

impl AccuracyGrid {
    /// `values` is indexed `[s][q]`.
    pub fn new(
        q_axis: Vec<f64>,
        s_axis: Vec<f64>,
        values: Vec<Vec<f64>>,
        label: impl Into<String>,
    ) -> Result<Self> {
        check_axis(&q_axis, "q")?;
        check_axis(&s_axis, "s")?;
        if values.len() != s_axis.len() {
            return Err(Error::data(
                None,
                None,
                format!("{} value rows for {} s levels", values.len(), s_axis.len()),
            ));
        }
        for (si, row) in values.iter().enumerate() {
            if row.len() != q_axis.len() {
                return Err(Error::data(
                    None,
                    None,
                    format!(
                        "ragged row: s index {si} has {} values, expected {}",
                        row.len(),
                        q_axis.len()
                    ),
                ));
            }
            for (qi, &v) in row.iter().enumerate() {
                if !v.is_finite() || !(0.0..=100.0).contains(&v) {
                    return Err(Error::data(
                        None,
                        None,
                        format!("accuracy {v} at (s index {si}, q index {qi}) outside [0, 100]"),
                    ));
                }
            }
        }
        Ok(AccuracyGrid {
            q_axis,
            s_axis,
            values,
            label: label.into(),
        })
    }

    pub fn q_axis(&self) -> &[f64] {
        &self.q_axis
    }

    pub fn s_axis(&self) -> &[f64] {
        &self.s_axis
    }

    /// Rows are s levels, columns q levels.
    pub fn values(&self) -> &[Vec<f64>] {
        &self.values
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn value(&self, s_index: usize, q_index: usize) -> f64 {
        self.values[s_index][q_index]
    }

    pub fn len(&self) -> usize {
        self.q_axis.len() * self.s_axis.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Accuracies flattened s-major, the order used for residual vectors.
    pub fn flat_values(&self) -> Vec<f64> {
        self.values.iter().flatten().copied().collect()
    }

    /// The accuracy-vs-q slice at one s level.
    pub fn column_series(&self, s_index: usize) -> Result<Series1D> {
        let row = self.values.get(s_index).ok_or(Error::IndexOutOfRange {
            index: s_index,
            len: self.s_axis.len(),
        })?;
        Series1D::new(
            self.q_axis.clone(),
            row.clone(),
            format!("{} / s={}", self.label, self.s_axis[s_index]),
        )
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    pub fn to_csv_string(&self) -> String {
        let mut out = String::from(CORNER_CELL);
        for s in &self.s_axis {
            write!(out, ",{s}").unwrap();
        }
        out.push('\n');
        for (qi, q) in self.q_axis.iter().enumerate() {
            write!(out, "{q}").unwrap();
            for row in &self.values {
                write!(out, ",{}", row[qi]).unwrap();
            }
            out.push('\n');
        }
        out
    }
}

fn parse_cell(text: &str, row: usize, col: usize) -> Result<f64> {
    let t = text.trim();
    let v: f64 = t
        .parse()
        .map_err(|_| Error::data(Some(row), Some(col), format!("non-numeric cell `{t}`")))?;
    if !v.is_finite() {
        return Err(Error::data(Some(row), Some(col), format!("non-finite cell `{t}`")));
    }
    Ok(v)
}

fn increasing_check(axis: &[f64], at: impl Fn(usize) -> (Option<usize>, Option<usize>), name: &str) -> Result<()> {
    for (i, &v) in axis.iter().enumerate() {
        if v <= 0.0 {
            let (r, c) = at(i);
            return Err(Error::data(r, c, format!("{name} value {v} must be > 0")));
        }
        if i > 0 && v <= axis[i - 1] {
            let (r, c) = at(i);
            return Err(Error::data(r, c, format!("{name} axis not strictly increasing ({v} after {})", axis[i - 1])));
        }
    }
    Ok(())
}

/// Parse the grid CSV format from any reader.
pub fn read_grid_csv<R: Read>(reader: R, label: impl Into<String>) -> Result<AccuracyGrid> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let mut records = rdr.records();

    let header = match records.next() {
        Some(r) => r.map_err(|e| Error::data(Some(1), None, e.to_string()))?,
        None => return Err(Error::data(None, None, "empty file")),
    };
    if header.get(0) != Some(CORNER_CELL) {
        return Err(Error::data(
            Some(1),
            Some(1),
            format!("malformed header: first cell must be `{CORNER_CELL}`"),
        ));
    }
    if header.len() < 2 {
        return Err(Error::data(Some(1), None, "malformed header: no s values"));
    }
    let s_axis = header
        .iter()
        .enumerate()
        .skip(1)
        .map(|(c, cell)| parse_cell(cell, 1, c + 1))
        .collect::<Result<Vec<_>>>()?;
    increasing_check(&s_axis, |i| (Some(1), Some(i + 2)), "s")?;

    let mut q_axis = Vec::new();
    let mut columns: Vec<Vec<f64>> = vec![Vec::new(); s_axis.len()];
    for (ri, rec) in records.enumerate() {
        let row = ri + 2;
        let rec = rec.map_err(|e| Error::data(Some(row), None, e.to_string()))?;
        if rec.len() == 1 && rec.get(0) == Some("") {
            continue;
        }
        if rec.len() != header.len() {
            return Err(Error::data(
                Some(row),
                None,
                format!("ragged row: {} cells, header has {}", rec.len(), header.len()),
            ));
        }
        q_axis.push(parse_cell(&rec[0], row, 1)?);
        for (c, cell) in rec.iter().enumerate().skip(1) {
            let v = parse_cell(cell, row, c + 1)?;
            if !(0.0..=100.0).contains(&v) {
                return Err(Error::data(
                    Some(row),
                    Some(c + 1),
                    format!("accuracy {v} outside [0, 100]"),
                ));
            }
            columns[c - 1].push(v);
        }
    }
    if q_axis.is_empty() {
        return Err(Error::data(None, None, "no data rows"));
    }
    increasing_check(&q_axis, |i| (Some(i + 2), Some(1)), "q")?;
    AccuracyGrid::new(q_axis, s_axis, columns, label)
}

pub fn parse_grid_csv(text: &str, label: impl Into<String>) -> Result<AccuracyGrid> {
    read_grid_csv(text.as_bytes(), label)
}

pub fn load_grid_csv(path: impl AsRef<Path>) -> Result<AccuracyGrid> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| Error::Io {
        path: path.to_path_buf(),
        source_msg: e.to_string(),
    })?;
    read_grid_csv(file, path.display().to_string())
}

pub fn write_grid_csv(grid: &AccuracyGrid, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, grid.to_csv_string()).map_err(|e| Error::Io {
        path: path.to_path_buf(),
        source_msg: e.to_string(),
    })
}

/// Paired abscissae/ordinates for one-dimensional fits.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Series1D {
    x: Vec<f64>,
    y: Vec<f64>,
    label: String,
}

impl Series1D {
    pub fn new(x: Vec<f64>, y: Vec<f64>, label: impl Into<String>) -> Result<Self> {
        if x.len() != y.len() {
            return Err(Error::LengthMismatch(x.len(), y.len()));
        }
        if x.len() < 2 {
            return Err(Error::InvalidArgument(format!(
                "series needs at least 2 points, got {}",
                x.len()
            )));
        }
        if x.iter().chain(&y).any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("series contains non-finite values".into()));
        }
        if x.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidArgument("series x not strictly increasing".into()));
        }
        Ok(Series1D {
            x,
            y,
            label: label.into(),
        })
    }

    pub fn x(&self) -> &[f64] {
        &self.x
    }

    pub fn y(&self) -> &[f64] {
        &self.y
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }
}
