//! Raw evaluation (one-step-ahead SSE) and the three population-relative
//! adaptation functions.

use std::fmt;
use std::str::FromStr;

use crate::data::TimeSeriesTable;
use crate::exec::Execution;
use crate::genome::{decode_with_delay, Population};
use crate::identification::{sse_unchecked, IdentError};

/// Population-relative adaptation transform of the quality values.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum AdaptationVariant {
    /// `q - avg(q)`
    I,
    /// `q - max(q)`
    II,
    /// `q - avg(q)` over a genotype extended by one gene.
    III,
}

impl AdaptationVariant {
    pub const ALL: [AdaptationVariant; 3] = [Self::I, Self::II, Self::III];

    pub fn extends_genotype(self) -> bool {
        self == Self::III
    }
}

impl fmt::Display for AdaptationVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::I => "I",
            Self::II => "II",
            Self::III => "III",
        })
    }
}

impl FromStr for AdaptationVariant {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "I" => Ok(Self::I),
            "II" => Ok(Self::II),
            "III" => Ok(Self::III),
            _ => Err(format!("unknown adaptation variant `{s}`")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvaluationRecord {
    pub sse: f64,
    /// `1 / (1 + sse)`
    pub quality: f64,
    pub fitness: f64,
}

#[inline]
pub fn quality_from_sse(sse: f64) -> f64 {
    1.0 / (1.0 + sse)
}

/// Applies the adaptation transform to a population's qualities.
pub fn adaptation(qualities: &[f64], variant: AdaptationVariant) -> Vec<f64> {
    if qualities.is_empty() {
        return Vec::new();
    }
    let reference = match variant {
        AdaptationVariant::I | AdaptationVariant::III => {
            qualities.iter().sum::<f64>() / qualities.len() as f64
        }
        AdaptationVariant::II => qualities.iter().copied().fold(f64::NEG_INFINITY, f64::max),
    };
    qualities.iter().map(|q| q - reference).collect()
}

/// Evaluates populations against a fixed table.
#[derive(Debug, Clone, Copy)]
pub struct Evaluator<'a> {
    table: &'a TimeSeriesTable,
    nk: usize,
    output_col: usize,
    execution: Execution,
}

impl<'a> Evaluator<'a> {
    /// `output_index` is 1-based.
    pub fn new(
        table: &'a TimeSeriesTable,
        nk: usize,
        output_index: usize,
        execution: Execution,
    ) -> Result<Self, IdentError> {
        if !(1..=crate::data::OUTPUT_COUNT).contains(&output_index) {
            return Err(IdentError::OutputIndex(output_index));
        }
        Ok(Self {
            table,
            nk,
            output_col: output_index - 1,
            execution,
        })
    }

    pub fn with_execution(self, execution: Execution) -> Self {
        Self { execution, ..self }
    }

    /// Raw SSE of every individual, in population order.
    pub fn sse(&self, pop: &Population) -> Result<Vec<f64>, IdentError> {
        if let Some(first) = pop.individuals().first() {
            let lag = decode_with_delay(first, self.nk).structure.max_lag();
            if self.table.len() <= lag {
                return Err(IdentError::InsufficientRows {
                    rows: self.table.len(),
                    needed: lag + 1,
                });
            }
        }
        Ok(self.execution.map(pop.individuals(), |ch| {
            sse_unchecked(&decode_with_delay(ch, self.nk), self.table, self.output_col)
        }))
    }

    pub fn evaluate(
        &self,
        pop: &Population,
        variant: AdaptationVariant,
    ) -> Result<Vec<EvaluationRecord>, IdentError> {
        Ok(records_from_sse(&self.sse(pop)?, variant))
    }
}

/// Builds evaluation records from raw SSE values.
pub fn records_from_sse(sse: &[f64], variant: AdaptationVariant) -> Vec<EvaluationRecord> {
    let qualities: Vec<f64> = sse.iter().map(|&s| quality_from_sse(s)).collect();
    let fitness = adaptation(&qualities, variant);
    sse.iter()
        .zip(qualities)
        .zip(fitness)
        .map(|((&sse, quality), fitness)| EvaluationRecord {
            sse,
            quality,
            fitness,
        })
        .collect()
}

/// Evaluates `pop` on output `y1` with `nk = 0`.
pub fn evaluate_population(
    pop: &Population,
    table: &TimeSeriesTable,
    variant: AdaptationVariant,
) -> Result<Vec<EvaluationRecord>, IdentError> {
    Evaluator::new(table, 0, 1, Execution::default())?.evaluate(pop, variant)
}
