//! Compiled-in reference data: the EfficientViT accuracy grid, the
//! per-column Exp-2 parameters, the published 4-term surface parameters
//! and the sigmoid fitted to the Exp-2 `a` coefficients.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{AccuracyGrid, Series1D};
use crate::model::Model1DParams;
use crate::surface::{SemanticLossParams, Term};

pub const TABLE1_Q: [f64; 10] = [10.0, 20.0, 30.0, 40.0, 50.0, 60.0, 70.0, 80.0, 90.0, 100.0];
pub const TABLE1_S: [f64; 4] = [0.41, 0.82, 1.23, 1.64];

/// EfficientViT accuracy (%), one row per s level.
pub const TABLE1_VALUES: [[f64; 10]; 4] = [
    [81.94, 83.92, 84.95, 85.67, 85.99, 86.17, 86.23, 86.28, 86.32, 86.39],
    [81.94, 86.75, 87.57, 87.77, 88.38, 88.54, 88.62, 88.87, 89.17, 89.37],
    [88.42, 92.91, 95.02, 95.92, 96.33, 96.65, 96.87, 97.07, 97.64, 98.05],
    [88.50, 93.72, 95.51, 96.31, 96.74, 96.95, 97.31, 97.58, 97.94, 98.37],
];

const TABLE2_LABELS: [f64; 4] = [0.80, 0.94, 1.08, 1.24];
const TABLE2_ROWS: [[f64; 4]; 4] = [
    [86.4433, -7.624e-06, -8.0206, -0.0578],
    [87.0050, 2.711e-04, -37.5884, -0.1959],
    [94.9856, 3.011e-04, -18.7067, -0.1001],
    [95.2171, 3.160e-04, -23.7064, -0.1217],
];

const TABLE3_MU0: f64 = -65.51;
/// μ₁..μ₄ per term, then μ₅ as printed (scaled by 10³).
const TABLE3_ROWS: [[f64; 5]; 4] = [
    [151.72, 8.33, 8.77, -7.89, 0.17],
    [-25.38, 16.23, -5.84, 4.18, -123.03],
    [-1.44, 2.08, 213.56, -218.38, 4.96],
    [155.01, -118.34, -68.98, 70.58, 581.15],
];
pub const TABLE3_MU5_PRINT_SCALE: f64 = 1e3;

pub const SIGMOID_FIG5: Model1DParams = Model1DParams::Sigmoid {
    b: 95.3055,
    c: -8.7716,
    d: -14.9563,
    e: 15.3302,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FixtureName {
    Table1,
    Table2,
    Table3,
    SigmoidFig5,
}

impl FixtureName {
    pub const ALL: [FixtureName; 4] = [
        FixtureName::Table1,
        FixtureName::Table2,
        FixtureName::Table3,
        FixtureName::SigmoidFig5,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            FixtureName::Table1 => "table1",
            FixtureName::Table2 => "table2",
            FixtureName::Table3 => "table3",
            FixtureName::SigmoidFig5 => "sigmoid_fig5",
        }
    }
}

impl fmt::Display for FixtureName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for FixtureName {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let norm = s.to_ascii_lowercase().replace('-', "_");
        FixtureName::ALL
            .into_iter()
            .find(|f| f.as_str() == norm)
            .ok_or_else(|| Error::UnknownFixture(s.to_string()))
    }
}

/// One Exp-2 parameter row with its printed label and the Table I
/// column it describes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Exp2Row {
    pub label: f64,
    pub params: Model1DParams,
    pub grid_s_index: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Table2 {
    pub rows: Vec<Exp2Row>,
}

impl Table2 {
    /// The `a` coefficients against the row labels, the data behind the
    /// sigmoid fit.
    pub fn a_series(&self) -> Series1D {
        let x = self.rows.iter().map(|r| r.label).collect();
        let y = self
            .rows
            .iter()
            .map(|r| match r.params {
                Model1DParams::Exp2 { a, .. } => a,
                _ => unreachable!("table2 rows are Exp-2"),
            })
            .collect();
        Series1D::new(x, y, "Exp-2 a vs s (table2)").expect("fixture series is valid")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Table3 {
    /// μ₅ already divided by [`TABLE3_MU5_PRINT_SCALE`].
    pub params: SemanticLossParams,
    /// μ₅ per term exactly as printed.
    pub mu5_printed: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "fixture", rename_all = "snake_case")]
pub enum Fixture {
    Table1(AccuracyGrid),
    Table2(Table2),
    Table3(Table3),
    SigmoidFig5 { params: Model1DParams },
}

pub fn table1() -> AccuracyGrid {
    AccuracyGrid::new(
        TABLE1_Q.to_vec(),
        TABLE1_S.to_vec(),
        TABLE1_VALUES.iter().map(|r| r.to_vec()).collect(),
        "EfficientViT (table1)",
    )
    .expect("embedded table1 is valid")
}

pub fn table2() -> Table2 {
    Table2 {
        rows: TABLE2_ROWS
            .iter()
            .zip(TABLE2_LABELS)
            .enumerate()
            .map(|(k, (r, label))| Exp2Row {
                label,
                params: Model1DParams::Exp2 { a: r[0], b: r[1], c: r[2], d: r[3] },
                grid_s_index: k,
            })
            .collect(),
    }
}

pub fn table3() -> Table3 {
    let terms = TABLE3_ROWS
        .iter()
        .map(|r| Term {
            mu1: r[0],
            mu2: r[1],
            mu3: r[2],
            mu4: r[3],
            mu5: r[4] / TABLE3_MU5_PRINT_SCALE,
        })
        .collect();
    Table3 {
        params: SemanticLossParams { mu0: TABLE3_MU0, terms },
        mu5_printed: TABLE3_ROWS.iter().map(|r| r[4]).collect(),
    }
}

pub fn embedded_fixture(name: FixtureName) -> Fixture {
    match name {
        FixtureName::Table1 => Fixture::Table1(table1()),
        FixtureName::Table2 => Fixture::Table2(table2()),
        FixtureName::Table3 => Fixture::Table3(table3()),
        FixtureName::SigmoidFig5 => Fixture::SigmoidFig5 { params: SIGMOID_FIG5 },
    }
}

/// Lookup by string name.
pub fn embedded_fixture_by_name(name: &str) -> Result<Fixture> {
    Ok(embedded_fixture(name.parse()?))
}
