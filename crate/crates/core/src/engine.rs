//! Generational loop: identification-seeded population, evaluation,
//! elitism, then select / crossover / mutate refill.

use std::fmt::Write as _;
use std::time::{Duration, Instant};

use rand::Rng;
use thiserror::Error;

use crate::data::{window, DataError, TimeSeriesTable, WindowSpec};
use crate::exec::Execution;
use crate::fitness::{AdaptationVariant, EvaluationRecord, Evaluator};
use crate::genome::{
    decode_with_delay, seed_population, Chromosome, GenomeError, Population, SEED_RANGE,
};
use crate::identification::{fit_arx_ls, ArxModel, ArxStructure, IdentError};
use crate::operators::{
    crossover, extend_genotype, mutate, OperatorConfig, OperatorError, Selector,
};
use crate::rng::seeded_rng;
use crate::variant::Variant;

#[derive(Debug, Error)]
pub enum EngineError {
    #[error("invalid engine configuration: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Data(#[from] DataError),
    #[error("identification failed for the window starting in {start_year}: {source}")]
    Identification {
        start_year: i32,
        #[source]
        source: IdentError,
    },
    #[error(transparent)]
    Model(#[from] IdentError),
    #[error(transparent)]
    Genome(#[from] GenomeError),
    #[error(transparent)]
    Operator(#[from] OperatorError),
}

/// Whether generation statistics carry wall-clock measurements.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Timing {
    #[default]
    Wall,
    /// Report 0 ms everywhere; makes every output byte-reproducible.
    Disabled,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EngineConfig {
    pub operators: OperatorConfig,
    pub variant: AdaptationVariant,
    pub generations: usize,
    pub population_size: usize,
    pub seed: u64,
    pub elitism_count: usize,
    pub arx_structure: ArxStructure,
    pub window_spec: WindowSpec,
    /// 1-based output column that is identified and predicted.
    pub output_index: usize,
    /// Half-width of the child perturbation interval at seeding.
    pub seed_range: f64,
    pub timing: Timing,
    pub execution: Execution,
}

impl Default for EngineConfig {
    fn default() -> Self {
        Self {
            operators: OperatorConfig::default(),
            variant: AdaptationVariant::I,
            generations: 1000,
            population_size: 99,
            seed: 42,
            elitism_count: 1,
            arx_structure: ArxStructure::default(),
            window_spec: WindowSpec::default(),
            output_index: 1,
            seed_range: SEED_RANGE,
            timing: Timing::Wall,
            execution: Execution::default(),
        }
    }
}

impl EngineConfig {
    /// Canonical configuration for one of the nine table variants.
    pub fn for_variant(variant: Variant) -> Self {
        let mut cfg = Self::default();
        cfg.set_variant(variant);
        cfg
    }

    pub fn set_variant(&mut self, variant: Variant) {
        self.variant = variant.adaptation;
        self.operators = variant.apply(&self.operators);
    }

    pub fn validate(&self) -> Result<(), EngineError> {
        self.operators.validate()?;
        self.arx_structure.validate()?;
        self.window_spec.validate()?;
        if self.arx_structure.input_count != 1 {
            return Err(GenomeError::NotSiso.into());
        }
        if self.population_size < 2 {
            return Err(EngineError::InvalidConfig(
                "population size must be >= 2".into(),
            ));
        }
        if self.elitism_count >= self.population_size {
            return Err(EngineError::InvalidConfig(
                "elitism count must be smaller than the population size".into(),
            ));
        }
        if self.window_spec.length < self.arx_structure.max_lag() + 1 {
            return Err(EngineError::InvalidConfig(format!(
                "window length {} is shorter than max lag + 1 = {}",
                self.window_spec.length,
                self.arx_structure.max_lag() + 1
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GenerationStats {
    pub generation: usize,
    pub best_sse: f64,
    pub avg_quality: f64,
    pub max_quality: f64,
    /// Milliseconds elapsed since the run started, at the end of this
    /// generation's evaluation.
    pub wall_ms: u64,
}

#[derive(Debug, Clone)]
pub struct RunResult {
    pub best: Chromosome,
    pub best_model: ArxModel,
    pub stats: Vec<GenerationStats>,
    /// Generation 0, after seeding and any genotype extension.
    pub initial_population: Population,
    pub final_population: Population,
    pub final_records: Vec<EvaluationRecord>,
    /// Windowed base models the population was seeded from.
    pub base_models: Vec<ArxModel>,
    pub elapsed: Duration,
}

impl RunResult {
    pub fn final_stats(&self) -> &GenerationStats {
        self.stats
            .last()
            .expect("stats always include generation 0")
    }

    /// `generation,best_sse,avg_quality,max_quality,wall_ms` CSV.
    pub fn stats_csv(&self) -> String {
        stats_csv(&self.stats)
    }
}

pub fn stats_csv(stats: &[GenerationStats]) -> String {
    let mut out = String::from("generation,best_sse,avg_quality,max_quality,wall_ms\n");
    for s in stats {
        writeln!(
            out,
            "{},{:e},{:e},{:e},{}",
            s.generation, s.best_sse, s.avg_quality, s.max_quality, s.wall_ms
        )
        .unwrap();
    }
    out
}

/// Fits one base model per window of `table`.
pub fn identify_bases(
    cfg: &EngineConfig,
    table: &TimeSeriesTable,
) -> Result<Vec<ArxModel>, EngineError> {
    window(table, cfg.window_spec)?
        .iter()
        .map(|w| {
            fit_arx_ls(w, &cfg.arx_structure, cfg.output_index).map_err(|source| {
                EngineError::Identification {
                    start_year: w.first_year(),
                    source,
                }
            })
        })
        .collect()
}

/// Runs the full pipeline. Deterministic for a given `(cfg, table)` apart
/// from the wall-clock fields when `cfg.timing` is [`Timing::Wall`].
pub fn run(cfg: &EngineConfig, table: &TimeSeriesTable) -> Result<RunResult, EngineError> {
    cfg.validate()?;
    let start = Instant::now();
    let elapsed_ms = |timing: Timing| match timing {
        Timing::Wall => start.elapsed().as_millis() as u64,
        Timing::Disabled => 0,
    };

    let bases = identify_bases(cfg, table)?;
    let mut rng = seeded_rng(cfg.seed);
    let mut pop = seed_population(&bases, cfg.population_size, cfg.seed_range, &mut rng)?;
    if cfg.variant.extends_genotype() {
        pop = extend_genotype(&pop, &mut rng)?;
    }

    let initial_population = pop.clone();
    let evaluator = Evaluator::new(table, cfg.arx_structure.nk, cfg.output_index, cfg.execution)?;
    let mut stats = Vec::with_capacity(cfg.generations + 1);
    let mut best: Option<(f64, Chromosome)> = None;
    let mut records;
    loop {
        records = evaluator.evaluate(&pop, cfg.variant)?;
        let (idx, gen_best) = records
            .iter()
            .enumerate()
            .min_by(|(_, a), (_, b)| a.sse.total_cmp(&b.sse))
            .expect("population is non-empty");
        if best.as_ref().is_none_or(|(sse, _)| gen_best.sse < *sse) {
            best = Some((gen_best.sse, pop.individuals()[idx].clone()));
        }
        let n = records.len() as f64;
        stats.push(GenerationStats {
            generation: pop.generation(),
            best_sse: gen_best.sse,
            avg_quality: records.iter().map(|r| r.quality).sum::<f64>() / n,
            max_quality: records
                .iter()
                .map(|r| r.quality)
                .fold(f64::NEG_INFINITY, f64::max),
            wall_ms: elapsed_ms(cfg.timing),
        });
        if pop.generation() >= cfg.generations {
            break;
        }
        pop = step(&pop, &records, cfg, &mut rng);
    }

    let (_, best) = best.expect("at least one generation evaluated");
    let best_model = decode_with_delay(&best, cfg.arx_structure.nk);
    Ok(RunResult {
        best,
        best_model,
        stats,
        initial_population,
        final_population: pop,
        final_records: records,
        base_models: bases,
        elapsed: start.elapsed(),
    })
}

/// Indices of `records` from best to worst: fitness descending, then SSE
/// ascending, then original index.
pub fn fitness_order(records: &[EvaluationRecord]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..records.len()).collect();
    order.sort_by(|&i, &j| {
        records[j]
            .fitness
            .total_cmp(&records[i].fitness)
            .then(records[i].sse.total_cmp(&records[j].sse))
    });
    order
}

/// Builds generation `t + 1` from generation `t`.
///
/// The population is first ordered by fitness; the leading
/// `elitism_count` individuals survive verbatim and the rest is refilled
/// by pairs of selections from the ordered list, each pair crossed over
/// and each child mutated.
pub fn step<R: Rng + ?Sized>(
    pop: &Population,
    records: &[EvaluationRecord],
    cfg: &EngineConfig,
    rng: &mut R,
) -> Population {
    assert_eq!(
        pop.len(),
        records.len(),
        "records must align with the population"
    );
    let order = fitness_order(records);
    let sorted: Vec<&Chromosome> = order.iter().map(|&i| &pop.individuals()[i]).collect();
    let sorted_fitness: Vec<f64> = order.iter().map(|&i| records[i].fitness).collect();

    let target = pop.len();
    let mut next: Vec<Chromosome> = Vec::with_capacity(target);
    next.extend(sorted.iter().take(cfg.elitism_count).map(|c| (*c).clone()));

    if next.len() < target {
        let selector = Selector::new(&sorted_fitness, &cfg.operators)
            .expect("fitness values are finite for a non-empty population");
        while next.len() < target {
            let a = selector.pick(rng);
            let b = selector.pick(rng);
            let (c1, c2) = crossover(sorted[a], sorted[b], &cfg.operators, rng)
                .expect("individuals share one layout");
            next.push(mutate(&c1, &cfg.operators, rng));
            if next.len() < target {
                next.push(mutate(&c2, &cfg.operators, rng));
            }
        }
    }
    Population::with_extension(next, pop.generation() + 1, pop.is_extended())
        .expect("operators preserve genotype length")
}
