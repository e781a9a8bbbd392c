//! ARX structures and models, least-squares identification and
//! one-step-ahead evaluation.
//!
//! A model relates output `y` to inputs `u_1..u_m` through
//!
//! ```text
//! y(t) + a_1 y(t-1) + ... + a_na y(t-na)
//!     = sum_i [ b_i1 u_i(t-nk-1) + ... + b_inb u_i(t-nk-nb) ] + e(t)
//! ```
//!
//! Predictions are series-parallel: lagged outputs are taken from the
//! observed table, never from earlier predictions.

use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use thiserror::Error;

use crate::data::{TimeSeriesTable, INPUT_COUNT, OUTPUT_COUNT};
use crate::linalg::{solve_least_squares, LstsqFailure};

/// Predictions larger than this in magnitude mark a model as diverged.
pub const OVERFLOW_GUARD: f64 = 1e12;
/// SSE assigned to diverged models.
pub const WORST_SSE: f64 = 1e300;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum IdentError {
    #[error("invalid ARX structure: {0}")]
    InvalidStructure(String),
    #[error("output index {0} is outside 1..=4")]
    OutputIndex(usize),
    #[error("coefficient counts do not match the structure: {0}")]
    CoefficientShape(String),
    #[error("non-finite coefficient")]
    NonFinite,
    #[error("table has {rows} rows; at least {needed} are required")]
    InsufficientRows { rows: usize, needed: usize },
    #[error("year {0} lacks the lags required by the model")]
    MissingLags(i32),
    #[error("singular regression")]
    SingularRegression,
    #[error("model text: {0}")]
    Format(String),
}

/// Orders of an ARX model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ArxStructure {
    pub na: usize,
    pub nb: usize,
    pub nk: usize,
    pub input_count: usize,
}

impl ArxStructure {
    pub fn new(na: usize, nb: usize, nk: usize, input_count: usize) -> Result<Self, IdentError> {
        let s = Self {
            na,
            nb,
            nk,
            input_count,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn siso(na: usize, nb: usize, nk: usize) -> Result<Self, IdentError> {
        Self::new(na, nb, nk, 1)
    }

    pub fn validate(&self) -> Result<(), IdentError> {
        if self.nb == 0 {
            return Err(IdentError::InvalidStructure("nb must be >= 1".into()));
        }
        if self.input_count == 0 || self.input_count > INPUT_COUNT {
            return Err(IdentError::InvalidStructure(format!(
                "input count must be in 1..={INPUT_COUNT}, got {}",
                self.input_count
            )));
        }
        Ok(())
    }

    /// Largest lag reached by any regressor.
    pub fn max_lag(&self) -> usize {
        self.na.max(self.nk + self.nb)
    }

    pub fn parameter_count(&self) -> usize {
        self.na + self.nb * self.input_count
    }
}

impl Default for ArxStructure {
    fn default() -> Self {
        Self {
            na: 5,
            nb: 8,
            nk: 0,
            input_count: 1,
        }
    }
}

/// ARX model coefficients. `a[j]` multiplies `y(t-j-1)` on the left-hand
/// side; `b[i][k]` multiplies `u_{i+1}(t-nk-k-1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ArxModel {
    pub structure: ArxStructure,
    pub a: Vec<f64>,
    pub b: Vec<Vec<f64>>,
}

impl ArxModel {
    pub fn new(structure: ArxStructure, a: Vec<f64>, b: Vec<Vec<f64>>) -> Result<Self, IdentError> {
        structure.validate()?;
        if a.len() != structure.na {
            return Err(IdentError::CoefficientShape(format!(
                "{} a-coefficients for na={}",
                a.len(),
                structure.na
            )));
        }
        if b.len() != structure.input_count || b.iter().any(|r| r.len() != structure.nb) {
            return Err(IdentError::CoefficientShape(format!(
                "b must be {} x {}",
                structure.input_count, structure.nb
            )));
        }
        if a.iter().chain(b.iter().flatten()).any(|v| !v.is_finite()) {
            return Err(IdentError::NonFinite);
        }
        Ok(Self { structure, a, b })
    }

    /// Single-input model with orders taken from the coefficient counts.
    pub fn siso(a: Vec<f64>, b: Vec<f64>, nk: usize) -> Result<Self, IdentError> {
        let structure = ArxStructure::siso(a.len(), b.len(), nk)?;
        Self::new(structure, a, vec![b])
    }

    pub fn zeros(structure: ArxStructure) -> Self {
        Self {
            structure,
            a: vec![0.0; structure.na],
            b: vec![vec![0.0; structure.nb]; structure.input_count],
        }
    }

    /// Prediction at `row` of `table` for 0-based output column `out`.
    /// The caller guarantees `row >= max_lag`.
    #[inline]
    pub(crate) fn predict_row(&self, table: &TimeSeriesTable, out: usize, row: usize) -> f64 {
        let nk = self.structure.nk;
        let mut value = 0.0;
        for (j, a) in self.a.iter().enumerate() {
            value -= a * table.output(row - j - 1, out);
        }
        for (i, b_row) in self.b.iter().enumerate() {
            for (k, b) in b_row.iter().enumerate() {
                value += b * table.input(row - nk - k - 1, i);
            }
        }
        value
    }
}

fn output_column(output_index: usize) -> Result<usize, IdentError> {
    if (1..=OUTPUT_COUNT).contains(&output_index) {
        Ok(output_index - 1)
    } else {
        Err(IdentError::OutputIndex(output_index))
    }
}

/// Design matrix and target of the ARX regression on `table`.
///
/// Row `r` corresponds to `t = max_lag + r` and holds
/// `[-y(t-1) .. -y(t-na), u_1(t-nk-1) .. u_1(t-nk-nb), .., u_m(..)]`.
pub fn build_regression(
    table: &TimeSeriesTable,
    structure: &ArxStructure,
    output_index: usize,
) -> Result<(DMatrix<f64>, DVector<f64>), IdentError> {
    structure.validate()?;
    let out = output_column(output_index)?;
    let lag = structure.max_lag();
    if table.len() <= lag {
        return Err(IdentError::InsufficientRows {
            rows: table.len(),
            needed: lag + 1,
        });
    }
    let rows = table.len() - lag;
    let width = structure.parameter_count();
    let mut x = DMatrix::zeros(rows, width);
    let mut y = DVector::zeros(rows);
    for r in 0..rows {
        let t = lag + r;
        for j in 0..structure.na {
            x[(r, j)] = -table.output(t - j - 1, out);
        }
        for i in 0..structure.input_count {
            for k in 0..structure.nb {
                x[(r, structure.na + i * structure.nb + k)] =
                    table.input(t - structure.nk - k - 1, i);
            }
        }
        y[r] = table.output(t, out);
    }
    Ok((x, y))
}

/// Least-squares ARX fit of output `output_index` (1-based) on inputs
/// `u1..u_{input_count}`.
pub fn fit_arx_ls(
    table: &TimeSeriesTable,
    structure: &ArxStructure,
    output_index: usize,
) -> Result<ArxModel, IdentError> {
    let (x, y) = build_regression(table, structure, output_index)?;
    if x.nrows() < x.ncols() {
        return Err(IdentError::InsufficientRows {
            rows: table.len(),
            needed: structure.max_lag() + structure.parameter_count(),
        });
    }
    let theta = solve_least_squares(&x, &y).map_err(|e| match e {
        LstsqFailure::Singular => IdentError::SingularRegression,
        LstsqFailure::Underdetermined => IdentError::InsufficientRows {
            rows: table.len(),
            needed: structure.max_lag() + structure.parameter_count(),
        },
    })?;
    let a = theta.as_slice()[..structure.na].to_vec();
    let b = (0..structure.input_count)
        .map(|i| {
            let start = structure.na + i * structure.nb;
            theta.as_slice()[start..start + structure.nb].to_vec()
        })
        .collect();
    ArxModel::new(*structure, a, b)
}

/// One-step-ahead prediction of output `output_index` for `year`, using
/// observed lags.
pub fn predict_one_step(
    model: &ArxModel,
    table: &TimeSeriesTable,
    year: i32,
    output_index: usize,
) -> Result<f64, IdentError> {
    let out = output_column(output_index)?;
    let row = table.row_of(year).ok_or(IdentError::MissingLags(year))?;
    if row < model.structure.max_lag() {
        return Err(IdentError::MissingLags(year));
    }
    if model.structure.input_count > INPUT_COUNT {
        return Err(IdentError::InvalidStructure("too many inputs".into()));
    }
    Ok(model.predict_row(table, out, row))
}

/// Sum of squared one-step-ahead residuals over every row that has a full
/// set of lags. Returns [`WORST_SSE`] once any prediction leaves the
/// `OVERFLOW_GUARD` band.
pub fn residual_sse(
    model: &ArxModel,
    table: &TimeSeriesTable,
    output_index: usize,
) -> Result<f64, IdentError> {
    let out = output_column(output_index)?;
    let lag = model.structure.max_lag();
    if table.len() <= lag {
        return Err(IdentError::InsufficientRows {
            rows: table.len(),
            needed: lag + 1,
        });
    }
    Ok(sse_unchecked(model, table, out))
}

/// `residual_sse` without precondition checks; `out` is 0-based.
#[inline]
pub(crate) fn sse_unchecked(model: &ArxModel, table: &TimeSeriesTable, out: usize) -> f64 {
    let mut sse = 0.0;
    for row in model.structure.max_lag()..table.len() {
        let predicted = model.predict_row(table, out, row);
        if !predicted.is_finite() || predicted.abs() > OVERFLOW_GUARD {
            return WORST_SSE;
        }
        let e = table.output(row, out) - predicted;
        sse += e * e;
    }
    if sse.is_finite() {
        sse
    } else {
        WORST_SSE
    }
}

fn write_reals(f: &mut fmt::Formatter<'_>, values: &[f64]) -> fmt::Result {
    for v in values {
        write!(f, " {v:.16e}")?;
    }
    Ok(())
}

/// Text form used for `best_model.txt`:
///
/// ```text
/// na=5 nb=8 nk=0 inputs=1
/// a: <na reals>
/// b1: <nb reals>
/// ```
impl fmt::Display for ArxModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = &self.structure;
        writeln!(
            f,
            "na={} nb={} nk={} inputs={}",
            s.na, s.nb, s.nk, s.input_count
        )?;
        write!(f, "a:")?;
        write_reals(f, &self.a)?;
        writeln!(f)?;
        for (i, row) in self.b.iter().enumerate() {
            write!(f, "b{}:", i + 1)?;
            write_reals(f, row)?;
            writeln!(f)?;
        }
        Ok(())
    }
}

impl FromStr for ArxModel {
    type Err = IdentError;

    fn from_str(text: &str) -> Result<Self, Self::Err> {
        let bad = |m: &str| IdentError::Format(m.to_string());
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let head = lines.next().ok_or_else(|| bad("empty input"))?;

        let mut fields = [None; 4];
        for token in head.split_whitespace() {
            let (key, value) = token
                .split_once('=')
                .ok_or_else(|| bad("malformed header"))?;
            let slot = match key {
                "na" => 0,
                "nb" => 1,
                "nk" => 2,
                "inputs" => 3,
                _ => return Err(bad(&format!("unknown header key `{key}`"))),
            };
            fields[slot] = Some(
                value
                    .parse::<usize>()
                    .map_err(|_| bad("bad header value"))?,
            );
        }
        let [Some(na), Some(nb), Some(nk), Some(inputs)] = fields else {
            return Err(bad("header must define na, nb, nk and inputs"));
        };
        let structure = ArxStructure::new(na, nb, nk, inputs)?;

        let parse_line = |line: Option<&str>, label: &str| -> Result<Vec<f64>, IdentError> {
            let line = line.ok_or_else(|| bad(&format!("missing `{label}` line")))?;
            let rest = line
                .strip_prefix(label)
                .and_then(|r| r.strip_prefix(':'))
                .ok_or_else(|| bad(&format!("expected `{label}:`")))?;
            rest.split_whitespace()
                .map(|v| {
                    v.parse::<f64>()
                        .map_err(|_| bad(&format!("bad real `{v}`")))
                })
                .collect()
        };
        let a = parse_line(lines.next(), "a")?;
        let b = (1..=inputs)
            .map(|i| parse_line(lines.next(), &format!("b{i}")))
            .collect::<Result<Vec<_>, _>>()?;
        if lines.next().is_some() {
            return Err(bad("trailing content"));
        }
        ArxModel::new(structure, a, b)
    }
}
