//! Annual input/output tables: CSV ingestion, sliding windows and
//! synthetic series generation.
//!
//! A table always carries the full schema of 14 inputs (`u1..u14`) and
//! 4 outputs (`y1..y4`). Models that use fewer inputs read the leading
//! columns; synthetic tables zero-fill the columns they do not drive.

use std::fmt::Write as _;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use thiserror::Error;

use crate::identification::{ArxModel, OVERFLOW_GUARD};

/// Number of input columns in the table schema.
pub const INPUT_COUNT: usize = 14;
/// Number of output columns in the table schema.
pub const OUTPUT_COUNT: usize = 4;
/// First year label used by generated series.
pub const FIRST_YEAR: i32 = 1946;

/// Published 1946 and 2007 input rows (`u1..u14`) of the power-system
/// dataset; the only two rows that are publicly available.
pub const PUBLISHED_INPUTS_1946: [f64; INPUT_COUNT] = [
    3000.0, 2553.0, 174.0, 333.0, 3224.0, 24420.0, 882.0, 76000.0, 7091.0, 3550.0, 190.0, 15.0,
    176.0, 21.0,
];
pub const PUBLISHED_INPUTS_2007: [f64; INPUT_COUNT] = [
    35096.0, 35800.0, 254.0, 591.0, 243000.0, 359526.0, 49500.0, 759500.0, 201500.0, 45150.0,
    60200.0, 1704800.0, 35500.0, 7752.0,
];
pub const PUBLISHED_Y1_1946: f64 = 2004.0;
pub const PUBLISHED_Y1_2007: f64 = 34877.0;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DataError {
    #[error("missing header row")]
    MissingHeader,
    #[error("header column {position}: expected `{expected}`, found `{found}`")]
    BadHeader {
        position: usize,
        expected: String,
        found: String,
    },
    #[error("no data rows")]
    NoDataRows,
    #[error("line {line}, column `{column}`: {message}")]
    Parse {
        line: u64,
        column: String,
        message: String,
    },
    #[error("table needs at least 2 rows, got {0}")]
    TooFewRows(usize),
    #[error("years must increase by exactly 1: {previous} is followed by {next}")]
    NonConsecutiveYears { previous: i32, next: i32 },
    #[error("non-finite value in row {row}")]
    NonFinite { row: usize },
    #[error("invalid window: {0}")]
    InvalidWindow(String),
    #[error("window length {length} exceeds table length {rows}")]
    WindowTooLong { length: usize, rows: usize },
    #[error("input matrix has {found} columns but the model expects {expected}")]
    InputWidth { expected: usize, found: usize },
    #[error("noise standard deviation must be finite and >= 0, got {0}")]
    InvalidNoise(f64),
    #[error("synthetic recursion diverged at step {step}")]
    Unstable { step: usize },
    #[error("csv error: {0}")]
    Csv(String),
}

/// Annual observations of the 14 inputs and 4 outputs.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeriesTable {
    years: Vec<i32>,
    inputs: Vec<[f64; INPUT_COUNT]>,
    outputs: Vec<[f64; OUTPUT_COUNT]>,
}

impl TimeSeriesTable {
    pub fn new(
        years: Vec<i32>,
        inputs: Vec<[f64; INPUT_COUNT]>,
        outputs: Vec<[f64; OUTPUT_COUNT]>,
    ) -> Result<Self, DataError> {
        if years.len() != inputs.len() || years.len() != outputs.len() {
            return Err(DataError::InvalidWindow(format!(
                "column lengths differ: {} years, {} input rows, {} output rows",
                years.len(),
                inputs.len(),
                outputs.len()
            )));
        }
        if years.len() < 2 {
            return Err(DataError::TooFewRows(years.len()));
        }
        for pair in years.windows(2) {
            if pair[1] != pair[0] + 1 {
                return Err(DataError::NonConsecutiveYears {
                    previous: pair[0],
                    next: pair[1],
                });
            }
        }
        for (row, (u, y)) in inputs.iter().zip(&outputs).enumerate() {
            if u.iter().chain(y.iter()).any(|v| !v.is_finite()) {
                return Err(DataError::NonFinite { row });
            }
        }
        Ok(Self {
            years,
            inputs,
            outputs,
        })
    }

    pub fn len(&self) -> usize {
        self.years.len()
    }

    pub fn is_empty(&self) -> bool {
        self.years.is_empty()
    }

    pub fn years(&self) -> &[i32] {
        &self.years
    }

    pub fn first_year(&self) -> i32 {
        self.years[0]
    }

    /// Row index of `year`, if present.
    pub fn row_of(&self, year: i32) -> Option<usize> {
        let offset = year.checked_sub(self.years[0])?;
        usize::try_from(offset).ok().filter(|&r| r < self.len())
    }

    pub fn inputs(&self, row: usize) -> &[f64; INPUT_COUNT] {
        &self.inputs[row]
    }

    pub fn outputs(&self, row: usize) -> &[f64; OUTPUT_COUNT] {
        &self.outputs[row]
    }

    /// Value of input `u_{col+1}` at `row` (0-based column).
    #[inline]
    pub fn input(&self, row: usize, col: usize) -> f64 {
        self.inputs[row][col]
    }

    /// Value of output `y_{col+1}` at `row` (0-based column).
    #[inline]
    pub fn output(&self, row: usize, col: usize) -> f64 {
        self.outputs[row][col]
    }

    /// Contiguous sub-table of rows `start..start + len`.
    pub fn slice(&self, start: usize, len: usize) -> Result<Self, DataError> {
        let end = start + len;
        if end > self.len() {
            return Err(DataError::WindowTooLong {
                length: len,
                rows: self.len(),
            });
        }
        Self::new(
            self.years[start..end].to_vec(),
            self.inputs[start..end].to_vec(),
            self.outputs[start..end].to_vec(),
        )
    }

    /// Serializes to the ingestion CSV format. Values use the shortest
    /// representation that parses back to the same `f64`.
    pub fn to_csv(&self) -> String {
        let mut out = header().join(",");
        out.push('\n');
        for row in 0..self.len() {
            write!(out, "{}", self.years[row]).unwrap();
            for v in self.inputs[row].iter().chain(self.outputs[row].iter()) {
                write!(out, ",{v}").unwrap();
            }
            out.push('\n');
        }
        out
    }
}

fn header() -> Vec<String> {
    std::iter::once("year".to_string())
        .chain((1..=INPUT_COUNT).map(|i| format!("u{i}")))
        .chain((1..=OUTPUT_COUNT).map(|i| format!("y{i}")))
        .collect()
}

/// Parses the `year,u1,...,u14,y1,...,y4` CSV format.
pub fn parse_table(text: &str) -> Result<TimeSeriesTable, DataError> {
    let expected = header();
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .from_reader(text.as_bytes());
    let mut records = reader.records();

    let head = match records.next() {
        Some(r) => r.map_err(|e| DataError::Csv(e.to_string()))?,
        None => return Err(DataError::MissingHeader),
    };
    for (position, name) in expected.iter().enumerate() {
        let found = head.get(position).unwrap_or("");
        if found != name {
            return Err(DataError::BadHeader {
                position: position + 1,
                expected: name.clone(),
                found: found.to_string(),
            });
        }
    }
    if head.len() > expected.len() {
        return Err(DataError::BadHeader {
            position: expected.len() + 1,
            expected: String::new(),
            found: head[expected.len()].to_string(),
        });
    }

    let mut years = Vec::new();
    let mut inputs = Vec::new();
    let mut outputs = Vec::new();
    for record in records {
        let record = record.map_err(|e| DataError::Csv(e.to_string()))?;
        let line = record.position().map_or(0, |p| p.line());
        if record.len() == 1 && record[0].trim().is_empty() {
            continue;
        }
        if record.len() != expected.len() {
            let column = expected
                .get(record.len())
                .cloned()
                .unwrap_or_else(|| format!("#{}", record.len()));
            return Err(DataError::Parse {
                line,
                column,
                message: format!("expected {} fields, found {}", expected.len(), record.len()),
            });
        }
        let year: i32 = record[0].trim().parse().map_err(|_| DataError::Parse {
            line,
            column: "year".into(),
            message: format!("invalid year `{}`", &record[0]),
        })?;
        if let Some(&prev) = years.last() {
            if year == prev {
                return Err(DataError::Parse {
                    line,
                    column: "year".into(),
                    message: format!("duplicate year {year}"),
                });
            }
            if year != prev + 1 {
                return Err(DataError::Parse {
                    line,
                    column: "year".into(),
                    message: format!("year {year} does not follow {prev}"),
                });
            }
        }
        let mut values = [0.0; INPUT_COUNT + OUTPUT_COUNT];
        for (k, slot) in values.iter_mut().enumerate() {
            let raw = record[k + 1].trim();
            let v: f64 = raw.parse().map_err(|_| DataError::Parse {
                line,
                column: expected[k + 1].clone(),
                message: format!("malformed number `{raw}`"),
            })?;
            if !v.is_finite() {
                return Err(DataError::Parse {
                    line,
                    column: expected[k + 1].clone(),
                    message: format!("non-finite value `{raw}`"),
                });
            }
            *slot = v;
        }
        years.push(year);
        let mut u = [0.0; INPUT_COUNT];
        u.copy_from_slice(&values[..INPUT_COUNT]);
        let mut y = [0.0; OUTPUT_COUNT];
        y.copy_from_slice(&values[INPUT_COUNT..]);
        inputs.push(u);
        outputs.push(y);
    }
    if years.is_empty() {
        return Err(DataError::NoDataRows);
    }
    TimeSeriesTable::new(years, inputs, outputs)
}

/// Sliding-window geometry in years.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct WindowSpec {
    pub length: usize,
    pub step: usize,
}

impl WindowSpec {
    pub fn new(length: usize, step: usize) -> Result<Self, DataError> {
        let spec = Self { length, step };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<(), DataError> {
        if self.step == 0 {
            return Err(DataError::InvalidWindow("step must be >= 1".into()));
        }
        if self.length < 2 {
            return Err(DataError::InvalidWindow("length must be >= 2".into()));
        }
        Ok(())
    }

    /// Number of windows over `rows` observations.
    pub fn count(&self, rows: usize) -> usize {
        if self.length > rows || self.step == 0 {
            0
        } else {
            (rows - self.length) / self.step + 1
        }
    }
}

impl Default for WindowSpec {
    fn default() -> Self {
        Self {
            length: 30,
            step: 1,
        }
    }
}

/// Splits `table` into `floor((N - length) / step) + 1` contiguous windows.
pub fn window(
    table: &TimeSeriesTable,
    spec: WindowSpec,
) -> Result<Vec<TimeSeriesTable>, DataError> {
    spec.validate()?;
    if spec.length > table.len() {
        return Err(DataError::WindowTooLong {
            length: spec.length,
            rows: table.len(),
        });
    }
    (0..spec.count(table.len()))
        .map(|k| table.slice(k * spec.step, spec.length))
        .collect()
}

/// Generates a table whose output `y1` follows the ARX recursion of `model`
/// driven by `input` (one row per year, `model.structure.input_count`
/// columns). Lags before the first row are taken as zero, so every row
/// past the model's maximum lag satisfies the model exactly when
/// `noise_sd` is zero.
pub fn synth_series(
    model: &ArxModel,
    input: &[Vec<f64>],
    noise_sd: f64,
    seed: u64,
) -> Result<TimeSeriesTable, DataError> {
    let width = model.structure.input_count;
    if let Some(row) = input.iter().find(|r| r.len() != width) {
        return Err(DataError::InputWidth {
            expected: width,
            found: row.len(),
        });
    }
    if width > INPUT_COUNT {
        return Err(DataError::InputWidth {
            expected: INPUT_COUNT,
            found: width,
        });
    }
    if !(noise_sd.is_finite() && noise_sd >= 0.0) {
        return Err(DataError::InvalidNoise(noise_sd));
    }
    let n = input.len();
    if n < 2 {
        return Err(DataError::TooFewRows(n));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let noise = Normal::new(0.0, noise_sd).map_err(|_| DataError::InvalidNoise(noise_sd))?;
    let nk = model.structure.nk;

    let mut y = vec![0.0; n];
    for t in 0..n {
        let mut value = 0.0;
        for (j, a) in model.a.iter().enumerate() {
            if let Some(lag) = t.checked_sub(j + 1) {
                value -= a * y[lag];
            }
        }
        for (i, b_row) in model.b.iter().enumerate() {
            for (k, b) in b_row.iter().enumerate() {
                if let Some(lag) = t.checked_sub(nk + k + 1) {
                    value += b * input[lag][i];
                }
            }
        }
        if noise_sd > 0.0 {
            value += noise.sample(&mut rng);
        }
        if !value.is_finite() || value.abs() > OVERFLOW_GUARD {
            return Err(DataError::Unstable { step: t });
        }
        y[t] = value;
    }

    let years = (0..n as i32).map(|k| FIRST_YEAR + k).collect();
    let inputs = input
        .iter()
        .map(|row| {
            let mut u = [0.0; INPUT_COUNT];
            u[..width].copy_from_slice(row);
            u
        })
        .collect();
    let outputs = y
        .into_iter()
        .map(|v| {
            let mut o = [0.0; OUTPUT_COUNT];
            o[0] = v;
            o
        })
        .collect();
    TimeSeriesTable::new(years, inputs, outputs)
}

/// A 62-year (1946-2007) synthetic stand-in for the power-system dataset.
///
/// Inputs interpolate geometrically between the published 1946 and 2007
/// rows with up to 3% multiplicative jitter on interior years. `y1` is
/// produced by a stable SISO ARX recursion on `u1` plus Gaussian noise;
/// `y2..y4` are zero.
pub fn kse_like_series(seed: u64) -> TimeSeriesTable {
    use rand::Rng;

    const ROWS: usize = 62;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut full_inputs = Vec::with_capacity(ROWS);
    for t in 0..ROWS {
        let frac = t as f64 / (ROWS - 1) as f64;
        let mut u = [0.0; INPUT_COUNT];
        for i in 0..INPUT_COUNT {
            let start = PUBLISHED_INPUTS_1946[i];
            let end = PUBLISHED_INPUTS_2007[i];
            u[i] = if t == 0 {
                start
            } else if t == ROWS - 1 {
                end
            } else {
                start * (end / start).powf(frac) * (1.0 + rng.random_range(-0.03..=0.03))
            };
        }
        full_inputs.push(u);
    }

    let model =
        ArxModel::siso(vec![-0.6], vec![0.25, 0.1], 0).expect("generator model is well formed");
    let driver: Vec<Vec<f64>> = full_inputs.iter().map(|u| vec![u[0]]).collect();
    let siso = synth_series(&model, &driver, 150.0, seed.wrapping_add(1))
        .expect("stable generator on bounded input");

    let outputs = (0..ROWS).map(|r| *siso.outputs(r)).collect();
    TimeSeriesTable::new(siso.years().to_vec(), full_inputs, outputs)
        .expect("generated table satisfies invariants")
}
