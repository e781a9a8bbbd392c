use std::ffi::OsString;
use std::path::PathBuf;

use arx_evolve::data::WindowSpec;
use arx_evolve::engine::{EngineConfig, Timing};
use arx_evolve::exec::Execution;
use arx_evolve::operators::CrossoverMethod;
use arx_evolve::{ArxStructure, Variant};
use clap::{Args, Parser, Subcommand};

use crate::{CliError, ExperimentPlan, Mode};

/// Systemic evolutionary refinement of ARX models.
#[derive(Parser, Debug)]
#[command(name = "arx-evolve", version, about)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Single run: writes stats.csv, best_model.txt and population_final.txt.
    Run(CommonArgs),
    /// All nine variants: per-variant stats and ranking.csv.
    Matrix(CommonArgs),
    /// Mutation-probability sweep: sweep.csv and sweep_summary.csv.
    Sweep(CommonArgs),
    /// Writes a 62-row synthetic data set in the input CSV format.
    Synth(SynthArgs),
}

#[derive(Args, Debug, Clone)]
pub struct CommonArgs {
    /// Input CSV (`year,u1..u14,y1..y4`)
    #[arg(long)]
    pub data: PathBuf,

    /// Output directory; `ARX_EVOLVE_OUT` takes precedence
    #[arg(long, default_value = "out")]
    pub out: PathBuf,

    /// Adaptation variant and operator row, e.g. `II.III`
    #[arg(long, default_value = "I.I")]
    pub variant: Variant,

    /// Crossover probability
    #[arg(long, default_value_t = 0.75)]
    pub pc: f64,

    /// Mutation probability
    #[arg(long, default_value_t = 0.01)]
    pub pm: f64,

    #[arg(long, default_value_t = 1000)]
    pub generations: usize,

    #[arg(long, default_value_t = 99)]
    pub pop_size: usize,

    #[arg(long, default_value_t = 42)]
    pub seed: u64,

    #[arg(long, default_value_t = 5)]
    pub na: usize,

    #[arg(long, default_value_t = 8)]
    pub nb: usize,

    #[arg(long, default_value_t = 0)]
    pub nk: usize,

    #[arg(long, default_value_t = 30)]
    pub window_len: usize,

    #[arg(long, default_value_t = 1)]
    pub window_step: usize,

    /// Individuals copied unchanged into the next generation
    #[arg(long, default_value_t = 1)]
    pub elitism: usize,

    /// Mutation probabilities for sweeps and susceptibility
    #[arg(
        long,
        value_delimiter = ',',
        default_value = "0.001,0.005,0.01,0.05,0.1"
    )]
    pub sweep_grid: Vec<f64>,

    /// Runs per grid point in `sweep`
    #[arg(long, default_value_t = 3)]
    pub repeats: usize,

    /// Replaces the crossover method of the operator row
    #[arg(long)]
    pub crossover: Option<CrossoverMethod>,

    /// Report 0 ms for all timings so outputs are byte-reproducible
    #[arg(long)]
    pub no_timing: bool,

    /// Evaluate individuals on one thread
    #[arg(long)]
    pub sequential: bool,
}

#[derive(Args, Debug, Clone)]
pub struct SynthArgs {
    /// Destination CSV file
    pub path: PathBuf,

    #[arg(long, default_value_t = 1946)]
    pub seed: u64,
}

impl CommonArgs {
    /// Builds a plan; `env_out` (the value of `ARX_EVOLVE_OUT`) replaces `--out`.
    pub fn into_plan(
        self,
        mode: Mode,
        env_out: Option<OsString>,
    ) -> Result<ExperimentPlan, CliError> {
        let mut base = EngineConfig {
            generations: self.generations,
            population_size: self.pop_size,
            seed: self.seed,
            elitism_count: self.elitism,
            arx_structure: ArxStructure::siso(self.na, self.nb, self.nk)?,
            window_spec: WindowSpec {
                length: self.window_len,
                step: self.window_step,
            },
            timing: if self.no_timing {
                Timing::Disabled
            } else {
                Timing::Wall
            },
            execution: if self.sequential {
                Execution::Sequential
            } else {
                Execution::Parallel
            },
            ..EngineConfig::default()
        };
        base.set_variant(self.variant);
        base.operators.p_c = self.pc;
        base.operators.p_m = self.pm;
        let plan = ExperimentPlan {
            mode,
            base_config: base,
            crossover_override: self.crossover,
            sweep_grid: self.sweep_grid,
            repeats: self.repeats,
            data_path: self.data,
            out_dir: env_out
                .filter(|v| !v.is_empty())
                .map(PathBuf::from)
                .unwrap_or(self.out),
        };
        plan.validate()?;
        Ok(plan)
    }
}
