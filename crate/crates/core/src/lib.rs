//! Systemic evolutionary refinement of ARX time-series models.
//!
//! The pipeline windows an annual input/output table, identifies one ARX
//! model per window by least squares, encodes the models as real-valued
//! chromosomes `[ch_a | ch_b]`, seeds a population around them and evolves
//! it under configurable selection, crossover and mutation operators and
//! one of three population-relative adaptation functions.
//!
//! ```no_run
//! use arx_evolve::{data, engine};
//!
//! let table = data::kse_like_series(7);
//! let result = engine::run(&engine::EngineConfig::default(), &table).unwrap();
//! println!("{}", result.best_model);
//! ```

pub mod data;
pub mod engine;
pub mod exec;
pub mod fitness;
pub mod genome;
pub mod identification;
mod linalg;
pub mod operators;
pub mod rng;
pub mod variant;

pub use data::{parse_table, synth_series, window, TimeSeriesTable, WindowSpec};
pub use engine::{run, step, EngineConfig, EngineError, GenerationStats, RunResult, Timing};
pub use exec::Execution;
pub use fitness::{evaluate_population, AdaptationVariant, EvaluationRecord};
pub use genome::{decode, encode, seed_population, subsystem_split, Chromosome, Population};
pub use identification::{
    build_regression, fit_arx_ls, predict_one_step, residual_sse, ArxModel, ArxStructure,
};
pub use operators::{crossover, extend_genotype, mutate, select, OperatorConfig};
pub use variant::Variant;
