//! Experiment runner: single runs, the nine-variant matrix with ranking,
//! and mutation-probability sweeps, all emitting plain CSV/text.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use arx_evolve::data::{parse_table, DataError, TimeSeriesTable};
use arx_evolve::engine::{run, EngineConfig, EngineError, RunResult};
use arx_evolve::fitness::quality_from_sse;
use arx_evolve::identification::IdentError;
use arx_evolve::operators::CrossoverMethod;
use arx_evolve::Variant;
use thiserror::Error;

pub mod args;
pub mod ranking;

pub use args::{Cli, Command, CommonArgs, SynthArgs};
pub use ranking::{category_points, rank, ranking_csv, RankedVariant, VariantSummary};

/// Exit status for a data file that does not exist.
pub const EXIT_MISSING_DATA: i32 = 2;
pub const EXIT_FAILURE: i32 = 1;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("data file not found: {}", .0.display())]
    MissingData(PathBuf),
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{}: {source}", path.display())]
    Data {
        path: PathBuf,
        #[source]
        source: DataError,
    },
    #[error(transparent)]
    Engine(#[from] EngineError),
    #[error(transparent)]
    Model(#[from] IdentError),
    #[error("invalid plan: {0}")]
    InvalidPlan(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::MissingData(_) => EXIT_MISSING_DATA,
            _ => EXIT_FAILURE,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Run,
    Matrix,
    Sweep,
}

#[derive(Debug, Clone)]
pub struct ExperimentPlan {
    pub mode: Mode,
    pub base_config: EngineConfig,
    /// Replaces the crossover method of every operator row when set.
    pub crossover_override: Option<CrossoverMethod>,
    pub sweep_grid: Vec<f64>,
    pub repeats: usize,
    pub data_path: PathBuf,
    pub out_dir: PathBuf,
}

impl ExperimentPlan {
    pub fn validate(&self) -> Result<(), CliError> {
        if self.mode != Mode::Run && self.sweep_grid.is_empty() {
            return Err(CliError::InvalidPlan("sweep grid is empty".into()));
        }
        if let Some(p) = self.sweep_grid.iter().find(|p| !(0.0..=1.0).contains(*p)) {
            return Err(CliError::InvalidPlan(format!(
                "mutation probability {p} outside [0, 1]"
            )));
        }
        if self.repeats == 0 {
            return Err(CliError::InvalidPlan("repeats must be >= 1".into()));
        }
        self.base_config.validate()?;
        Ok(())
    }

    /// Base configuration switched to `variant`, keeping probabilities.
    pub fn config_for(&self, variant: Variant) -> EngineConfig {
        let mut cfg = self.base_config.clone();
        cfg.set_variant(variant);
        self.apply_override(&mut cfg);
        cfg
    }

    fn base(&self) -> EngineConfig {
        let mut cfg = self.base_config.clone();
        self.apply_override(&mut cfg);
        cfg
    }

    fn apply_override(&self, cfg: &mut EngineConfig) {
        if let Some(method) = self.crossover_override {
            cfg.operators.crossover = method;
        }
    }

    pub fn load_table(&self) -> Result<TimeSeriesTable, CliError> {
        let path = &self.data_path;
        if !path.is_file() {
            return Err(CliError::MissingData(path.clone()));
        }
        let text = fs::read_to_string(path).map_err(|source| CliError::Io {
            path: path.clone(),
            source,
        })?;
        parse_table(&text).map_err(|source| CliError::Data {
            path: path.clone(),
            source,
        })
    }
}

fn write_output(dir: &Path, name: &str, contents: &str) -> Result<PathBuf, CliError> {
    let path = dir.join(name);
    fs::write(&path, contents).map_err(|source| CliError::Io {
        path: path.clone(),
        source,
    })?;
    Ok(path)
}

fn prepare_out_dir(dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(|source| CliError::Io {
        path: dir.to_path_buf(),
        source,
    })
}

/// Lowest SSE seen over the whole run.
pub fn best_ever_sse(result: &RunResult) -> f64 {
    result
        .stats
        .iter()
        .map(|s| s.best_sse)
        .fold(f64::INFINITY, f64::min)
}

/// Single run. Writes `stats.csv`, `best_model.txt`, `population_final.txt`.
pub fn cmd_run(plan: &ExperimentPlan) -> Result<RunResult, CliError> {
    let table = plan.load_table()?;
    let result = run(&plan.base(), &table)?;
    prepare_out_dir(&plan.out_dir)?;
    write_output(&plan.out_dir, "stats.csv", &result.stats_csv())?;
    write_output(
        &plan.out_dir,
        "best_model.txt",
        &result.best_model.to_string(),
    )?;
    write_output(
        &plan.out_dir,
        "population_final.txt",
        &result.final_population.to_snapshot(),
    )?;
    Ok(result)
}

/// Runs all nine variants with the shared seed. Per variant it writes
/// `stats_<variant>.csv`, `population_initial_<variant>.txt` and
/// `population_final_<variant>.txt`; the aggregate goes to `ranking.csv`.
///
/// Base runs are executed one after another so their wall-clock costs are
/// comparable; the susceptibility runs (one per variant and grid point)
/// fan out according to the configured execution mode.
pub fn cmd_matrix(plan: &ExperimentPlan) -> Result<Vec<RankedVariant>, CliError> {
    let table = plan.load_table()?;
    let variants = Variant::all();
    prepare_out_dir(&plan.out_dir)?;

    let mut base_runs = Vec::with_capacity(variants.len());
    for &variant in &variants {
        let result = run(&plan.config_for(variant), &table)?;
        let tag = variant.to_string();
        write_output(
            &plan.out_dir,
            &format!("stats_{tag}.csv"),
            &result.stats_csv(),
        )?;
        write_output(
            &plan.out_dir,
            &format!("population_initial_{tag}.txt"),
            &result.initial_population.to_snapshot(),
        )?;
        write_output(
            &plan.out_dir,
            &format!("population_final_{tag}.txt"),
            &result.final_population.to_snapshot(),
        )?;
        base_runs.push(result);
    }

    let cells: Vec<(usize, f64)> = (0..variants.len())
        .flat_map(|v| plan.sweep_grid.iter().map(move |&pm| (v, pm)))
        .collect();
    let cell_quality = plan.base_config.execution.map(&cells, |&(v, pm)| {
        let mut cfg = plan.config_for(variants[v]);
        cfg.operators.p_m = pm;
        run(&cfg, &table).map(|r| quality_from_sse(best_ever_sse(&r)))
    });
    let cell_quality = cell_quality.into_iter().collect::<Result<Vec<f64>, _>>()?;

    let mut summaries = Vec::with_capacity(variants.len());
    for (v, result) in base_runs.iter().enumerate() {
        let grid = &cell_quality[v * plan.sweep_grid.len()..(v + 1) * plan.sweep_grid.len()];
        let lo = grid.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = grid.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        summaries.push(VariantSummary {
            variant: variants[v],
            best_result: best_ever_sse(result),
            cost_ms_total: result.final_stats().wall_ms,
            susceptibility: hi - lo,
            genotype_len: result.final_population.genotype_len(),
        });
    }

    let ranked = rank(summaries);
    write_output(&plan.out_dir, "ranking.csv", &ranking_csv(&ranked))?;
    Ok(ranked)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepRow {
    pub pm: f64,
    pub repeat: usize,
    pub final_best_sse: f64,
    pub final_best_quality: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepPoint {
    pub pm: f64,
    pub mean_best_sse: f64,
    pub mean_best_quality: f64,
    pub min_best_sse: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepOutcome {
    pub rows: Vec<SweepRow>,
    pub points: Vec<SweepPoint>,
    /// Grid value with the highest mean final best quality (first on ties).
    pub optimum_pm: f64,
}

/// Repeat `r` at every grid point runs with seed `seed + r`.
pub fn sweep_seed(base_seed: u64, repeat: usize) -> u64 {
    base_seed.wrapping_add(repeat as u64)
}

/// Runs `repeats` seeds per grid value. Writes `sweep.csv` and
/// `sweep_summary.csv`.
pub fn cmd_sweep(plan: &ExperimentPlan) -> Result<SweepOutcome, CliError> {
    let table = plan.load_table()?;
    prepare_out_dir(&plan.out_dir)?;
    let cells: Vec<(f64, usize)> = plan
        .sweep_grid
        .iter()
        .flat_map(|&pm| (0..plan.repeats).map(move |r| (pm, r)))
        .collect();
    let results = plan.base_config.execution.map(&cells, |&(pm, repeat)| {
        let mut cfg = plan.base();
        cfg.operators.p_m = pm;
        cfg.seed = sweep_seed(cfg.seed, repeat);
        run(&cfg, &table).map(|r| best_ever_sse(&r))
    });

    let mut rows = Vec::with_capacity(cells.len());
    for (&(pm, repeat), sse) in cells.iter().zip(results) {
        let sse = sse?;
        rows.push(SweepRow {
            pm,
            repeat,
            final_best_sse: sse,
            final_best_quality: quality_from_sse(sse),
        });
    }

    let points: Vec<SweepPoint> = rows
        .chunks(plan.repeats)
        .map(|chunk| {
            let n = chunk.len() as f64;
            SweepPoint {
                pm: chunk[0].pm,
                mean_best_sse: chunk.iter().map(|r| r.final_best_sse).sum::<f64>() / n,
                mean_best_quality: chunk.iter().map(|r| r.final_best_quality).sum::<f64>() / n,
                min_best_sse: chunk
                    .iter()
                    .map(|r| r.final_best_sse)
                    .fold(f64::INFINITY, f64::min),
            }
        })
        .collect();
    let optimum_pm = points
        .iter()
        .fold(None::<&SweepPoint>, |best, p| match best {
            Some(b) if b.mean_best_quality >= p.mean_best_quality => Some(b),
            _ => Some(p),
        })
        .map(|p| p.pm)
        .expect("grid is non-empty");

    let mut sweep = String::from("pm,repeat,final_best_sse,final_best_quality\n");
    for r in &rows {
        writeln!(
            sweep,
            "{},{},{:e},{:e}",
            r.pm, r.repeat, r.final_best_sse, r.final_best_quality
        )
        .unwrap();
    }
    let mut summary = String::from("pm,mean_best_sse,mean_best_quality,min_best_sse\n");
    for p in &points {
        writeln!(
            summary,
            "{},{:e},{:e},{:e}",
            p.pm, p.mean_best_sse, p.mean_best_quality, p.min_best_sse
        )
        .unwrap();
    }
    write_output(&plan.out_dir, "sweep.csv", &sweep)?;
    write_output(&plan.out_dir, "sweep_summary.csv", &summary)?;
    Ok(SweepOutcome {
        rows,
        points,
        optimum_pm,
    })
}

/// Dispatches a parsed command line. Returns the process exit status.
pub fn execute(cli: Cli, env_out: Option<std::ffi::OsString>) -> i32 {
    match dispatch(cli, env_out) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn dispatch(cli: Cli, env_out: Option<std::ffi::OsString>) -> Result<(), CliError> {
    match cli.command {
        Command::Run(args) => {
            let plan = args.into_plan(Mode::Run, env_out)?;
            let result = cmd_run(&plan)?;
            println!(
                "best_sse={:e} generations={} out={}",
                best_ever_sse(&result),
                plan.base_config.generations,
                plan.out_dir.display()
            );
        }
        Command::Matrix(args) => {
            let plan = args.into_plan(Mode::Matrix, env_out)?;
            let ranked = cmd_matrix(&plan)?;
            for r in &ranked {
                println!(
                    "{:<8} best_sse={:e} points={}",
                    r.summary.variant.to_string(),
                    r.summary.best_result,
                    r.points_total()
                );
            }
            println!("ranking: {}", plan.out_dir.join("ranking.csv").display());
        }
        Command::Sweep(args) => {
            let plan = args.into_plan(Mode::Sweep, env_out)?;
            let outcome = cmd_sweep(&plan)?;
            for p in &outcome.points {
                println!("pm={} mean_best_quality={:e}", p.pm, p.mean_best_quality);
            }
            println!("optimum p_m: {}", outcome.optimum_pm);
        }
        Command::Synth(args) => {
            let table = arx_evolve::data::kse_like_series(args.seed);
            fs::write(&args.path, table.to_csv()).map_err(|source| CliError::Io {
                path: args.path.clone(),
                source,
            })?;
            println!("wrote {} rows to {}", table.len(), args.path.display());
        }
    }
    Ok(())
}
