//! Selection, crossover and mutation operators, plus the systemic
//! genotype extension (gene addition) and knock-out (gene removal).
//!
//! Every operator is a pure function of its inputs and the RNG stream it
//! is handed.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand_distr::{Distribution, Normal};
use thiserror::Error;

use crate::genome::{perturb_within, Chromosome, Population, SEED_RANGE};

/// Floor added to shifted roulette weights so the worst individual keeps
/// a non-zero share.
pub const ROULETTE_EPSILON: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OperatorError {
    #[error("invalid operator configuration: {0}")]
    InvalidConfig(String),
    #[error("parents differ in layout: {0} genes (boundary {1}) vs {2} genes (boundary {3})")]
    LengthMismatch(usize, usize, usize, usize),
    #[error("empty fitness list")]
    EmptyFitness,
    #[error("no finite fitness value")]
    NoFiniteFitness,
    #[error("population genotype is already extended")]
    AlreadyExtended,
    #[error("unknown {kind} `{value}`")]
    Unknown { kind: &'static str, value: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SelectionMethod {
    Roulette,
    Tournament,
    Ranking,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CrossoverMethod {
    SinglePoint,
    DoublePoint,
    Uniform,
    /// Cut fixed at the `ch_a | ch_b` boundary.
    Longitudinal,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MutationMethod {
    SinglePoint,
    MultiPoint,
    Probabilistic,
}

macro_rules! named_enum {
    ($ty:ident, $kind:literal, { $($variant:ident => $name:literal),* $(,)? }) => {
        impl $ty {
            pub fn name(&self) -> &'static str {
                match self { $(Self::$variant => $name),* }
            }
        }
        impl fmt::Display for $ty {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(self.name())
            }
        }
        impl FromStr for $ty {
            type Err = OperatorError;
            fn from_str(s: &str) -> Result<Self, Self::Err> {
                match s {
                    $($name => Ok(Self::$variant),)*
                    _ => Err(OperatorError::Unknown { kind: $kind, value: s.to_string() }),
                }
            }
        }
    };
}

named_enum!(SelectionMethod, "selection", {
    Roulette => "roulette", Tournament => "tournament", Ranking => "ranking",
});
named_enum!(CrossoverMethod, "crossover", {
    SinglePoint => "single_point", DoublePoint => "double_point",
    Uniform => "uniform", Longitudinal => "longitudinal",
});
named_enum!(MutationMethod, "mutation", {
    SinglePoint => "single_point", MultiPoint => "multi_point", Probabilistic => "probabilistic",
});

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OperatorConfig {
    pub selection: SelectionMethod,
    pub crossover: CrossoverMethod,
    pub mutation: MutationMethod,
    /// Crossover probability.
    pub p_c: f64,
    /// Mutation probability.
    pub p_m: f64,
    pub tournament_k: usize,
    /// Linear ranking selective pressure in (1, 2].
    pub ranking_pressure: f64,
    /// Mutation perturbation scale.
    pub delta: f64,
}

impl Default for OperatorConfig {
    fn default() -> Self {
        Self {
            selection: SelectionMethod::Roulette,
            crossover: CrossoverMethod::SinglePoint,
            mutation: MutationMethod::SinglePoint,
            p_c: 0.75,
            p_m: 0.01,
            tournament_k: 2,
            ranking_pressure: 1.5,
            delta: SEED_RANGE,
        }
    }
}

impl OperatorConfig {
    pub fn validate(&self) -> Result<(), OperatorError> {
        let unit = |p: f64| (0.0..=1.0).contains(&p);
        if !unit(self.p_c) {
            return Err(OperatorError::InvalidConfig(format!(
                "p_c = {} not in [0,1]",
                self.p_c
            )));
        }
        if !unit(self.p_m) {
            return Err(OperatorError::InvalidConfig(format!(
                "p_m = {} not in [0,1]",
                self.p_m
            )));
        }
        if self.tournament_k < 2 {
            return Err(OperatorError::InvalidConfig(
                "tournament size must be >= 2".into(),
            ));
        }
        if !(self.ranking_pressure > 1.0 && self.ranking_pressure <= 2.0) {
            return Err(OperatorError::InvalidConfig(format!(
                "ranking pressure {} not in (1,2]",
                self.ranking_pressure
            )));
        }
        if !(self.delta.is_finite() && self.delta >= 0.0) {
            return Err(OperatorError::InvalidConfig(format!(
                "delta = {}",
                self.delta
            )));
        }
        Ok(())
    }
}

/// Selection state prepared once per generation; `pick` is then O(n).
#[derive(Debug, Clone)]
pub struct Selector {
    kind: SelectorKind,
}

#[derive(Debug, Clone)]
enum SelectorKind {
    Uniform(usize),
    /// Cumulative weights over the original indices.
    Cumulative(Vec<f64>),
    Tournament {
        fitness: Vec<f64>,
        k: usize,
    },
}

impl Selector {
    pub fn new(fitness: &[f64], cfg: &OperatorConfig) -> Result<Self, OperatorError> {
        if fitness.is_empty() {
            return Err(OperatorError::EmptyFitness);
        }
        if !fitness.iter().any(|f| f.is_finite()) {
            return Err(OperatorError::NoFiniteFitness);
        }
        let n = fitness.len();
        // Non-finite entries rank below every finite one.
        let clean: Vec<f64> = fitness
            .iter()
            .map(|&f| if f.is_finite() { f } else { f64::NEG_INFINITY })
            .collect();
        let first = clean[0];
        if clean.iter().all(|&f| f == first) {
            return Ok(Self {
                kind: SelectorKind::Uniform(n),
            });
        }

        let kind = match cfg.selection {
            SelectionMethod::Roulette => {
                let min = clean
                    .iter()
                    .copied()
                    .filter(|f| f.is_finite())
                    .fold(f64::INFINITY, f64::min);
                let weights = clean.iter().map(|&f| {
                    if f.is_finite() {
                        f - min + ROULETTE_EPSILON
                    } else {
                        0.0
                    }
                });
                SelectorKind::Cumulative(cumulate(weights))
            }
            SelectionMethod::Tournament => SelectorKind::Tournament {
                fitness: clean,
                k: cfg.tournament_k,
            },
            SelectionMethod::Ranking => {
                let s = cfg.ranking_pressure;
                let mut order: Vec<usize> = (0..n).collect();
                // ascending; equal fitness keeps index order
                order.sort_by(|&i, &j| clean[i].total_cmp(&clean[j]));
                let mut weights = vec![0.0; n];
                for (rank, &idx) in order.iter().enumerate() {
                    weights[idx] = linear_rank_probability(rank, n, s);
                }
                SelectorKind::Cumulative(cumulate(weights.into_iter()))
            }
        };
        Ok(Self { kind })
    }

    pub fn pick<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        match &self.kind {
            SelectorKind::Uniform(n) => rng.random_range(0..*n),
            SelectorKind::Cumulative(cum) => {
                let total = *cum.last().expect("non-empty");
                let r = rng.random::<f64>() * total;
                let idx = cum.partition_point(|&c| c <= r);
                // r < total always; guard the last bucket against rounding
                idx.min(cum.len() - 1)
            }
            SelectorKind::Tournament { fitness, k } => {
                let mut best = rng.random_range(0..fitness.len());
                for _ in 1..*k {
                    let c = rng.random_range(0..fitness.len());
                    if fitness[c] > fitness[best] || (fitness[c] == fitness[best] && c < best) {
                        best = c;
                    }
                }
                best
            }
        }
    }
}

fn cumulate(weights: impl Iterator<Item = f64>) -> Vec<f64> {
    weights
        .scan(0.0, |acc, w| {
            *acc += w;
            Some(*acc)
        })
        .collect()
}

/// Probability of the individual at `rank` (0 = worst) under linear
/// ranking with pressure `s` among `n` individuals.
pub fn linear_rank_probability(rank: usize, n: usize, s: f64) -> f64 {
    if n == 1 {
        return 1.0;
    }
    let n_f = n as f64;
    (2.0 - s) / n_f + 2.0 * rank as f64 * (s - 1.0) / (n_f * (n_f - 1.0))
}

/// Draws one index; higher fitness is better.
pub fn select<R: Rng + ?Sized>(
    fitness: &[f64],
    cfg: &OperatorConfig,
    rng: &mut R,
) -> Result<usize, OperatorError> {
    Ok(Selector::new(fitness, cfg)?.pick(rng))
}

/// Produces two children. With probability `1 - p_c` they are copies of
/// the parents.
pub fn crossover<R: Rng + ?Sized>(
    p1: &Chromosome,
    p2: &Chromosome,
    cfg: &OperatorConfig,
    rng: &mut R,
) -> Result<(Chromosome, Chromosome), OperatorError> {
    if p1.len() != p2.len() || p1.boundary() != p2.boundary() {
        return Err(OperatorError::LengthMismatch(
            p1.len(),
            p1.boundary(),
            p2.len(),
            p2.boundary(),
        ));
    }
    let mut c1 = p1.clone();
    let mut c2 = p2.clone();
    if rng.random::<f64>() >= cfg.p_c {
        return Ok((c1, c2));
    }
    let len = p1.len();
    let (g1, g2) = (c1.genes_mut(), c2.genes_mut());
    match cfg.crossover {
        CrossoverMethod::SinglePoint => {
            if len >= 2 {
                let cut = rng.random_range(1..len);
                g1[cut..].swap_with_slice(&mut g2[cut..]);
            }
        }
        CrossoverMethod::DoublePoint => {
            if len >= 3 {
                let a = rng.random_range(1..len);
                let mut b = rng.random_range(1..len - 1);
                if b >= a {
                    b += 1;
                }
                let (lo, hi) = if a < b { (a, b) } else { (b, a) };
                g1[lo..hi].swap_with_slice(&mut g2[lo..hi]);
            }
        }
        CrossoverMethod::Uniform => {
            for (x, y) in g1.iter_mut().zip(g2.iter_mut()) {
                if rng.random_bool(0.5) {
                    std::mem::swap(x, y);
                }
            }
        }
        CrossoverMethod::Longitudinal => {
            let cut = p1.boundary();
            g1[cut..].swap_with_slice(&mut g2[cut..]);
        }
    }
    Ok((c1, c2))
}

/// Perturbs genes with probability `p_m`: uniform within `delta` for the
/// point mutations, Gaussian with standard deviation `delta` for the
/// probabilistic one.
pub fn mutate<R: Rng + ?Sized>(ch: &Chromosome, cfg: &OperatorConfig, rng: &mut R) -> Chromosome {
    let mut out = ch.clone();
    let delta = cfg.delta;
    let genes = out.genes_mut();
    match cfg.mutation {
        MutationMethod::SinglePoint => {
            if rng.random::<f64>() < cfg.p_m {
                let i = rng.random_range(0..genes.len());
                genes[i] = perturb_within(genes[i], delta, rng);
            }
        }
        MutationMethod::MultiPoint => {
            for g in genes.iter_mut() {
                if rng.random::<f64>() < cfg.p_m {
                    *g = perturb_within(*g, delta, rng);
                }
            }
        }
        MutationMethod::Probabilistic => {
            let normal = Normal::new(0.0, delta).expect("delta validated as finite and >= 0");
            for g in genes.iter_mut() {
                if rng.random::<f64>() < cfg.p_m {
                    *g += normal.sample(rng);
                }
            }
        }
    }
    out
}

/// Systemic removal: zeroes one uniformly chosen gene. The genotype
/// length is left unchanged so the population stays uniform.
pub fn knock_out_gene<R: Rng + ?Sized>(ch: &Chromosome, rng: &mut R) -> Chromosome {
    let mut out = ch.clone();
    let genes = out.genes_mut();
    let i = rng.random_range(0..genes.len());
    genes[i] = 0.0;
    out
}

/// Systemic addition: appends one gene to every individual, drawn
/// uniformly between the smallest and largest gene in the population.
pub fn extend_genotype<R: Rng + ?Sized>(
    pop: &Population,
    rng: &mut R,
) -> Result<Population, OperatorError> {
    if pop.is_extended() {
        return Err(OperatorError::AlreadyExtended);
    }
    let (lo, hi) = pop
        .individuals()
        .iter()
        .flat_map(|c| c.genes().iter().copied())
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), g| {
            (lo.min(g), hi.max(g))
        });
    let individuals = pop
        .individuals()
        .iter()
        .map(|c| {
            let mut c = c.clone();
            let gene = if lo < hi {
                rng.random_range(lo..=hi)
            } else {
                lo
            };
            c.push_gene(gene);
            c
        })
        .collect();
    Ok(
        Population::with_extension(individuals, pop.generation(), true)
            .expect("uniform extension keeps lengths equal"),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn rng(seed: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(seed)
    }

    fn cfg() -> OperatorConfig {
        OperatorConfig::default()
    }

    fn chromosome(offset: f64) -> Chromosome {
        Chromosome::new((0..13).map(|i| offset + i as f64).collect(), 5).unwrap()
    }

    fn frequencies(fitness: &[f64], cfg: &OperatorConfig, draws: usize, seed: u64) -> Vec<f64> {
        let selector = Selector::new(fitness, cfg).unwrap();
        let mut r = rng(seed);
        let mut counts = vec![0usize; fitness.len()];
        for _ in 0..draws {
            counts[selector.pick(&mut r)] += 1;
        }
        counts.iter().map(|&c| c as f64 / draws as f64).collect()
    }

    #[test]
    fn roulette_concentrates_on_the_only_positive_weight() {
        let f = frequencies(&[0.0, 0.0, 1.0], &cfg(), 100_000, 1);
        assert_eq!(f[2], 1.0);
    }

    #[test]
    fn roulette_handles_negative_fitness() {
        let f = frequencies(&[-3.0, -1.0, -2.0], &cfg(), 100_000, 2);
        // shifted weights 0, 2, 1
        assert!(f[0] < 1e-3);
        assert!((f[1] - 2.0 / 3.0).abs() < 0.01);
        assert!((f[2] - 1.0 / 3.0).abs() < 0.01);
    }

    #[test]
    fn tournament_frequencies() {
        let c = OperatorConfig {
            selection: SelectionMethod::Tournament,
            ..cfg()
        };
        let f = frequencies(&[1.0, 2.0, 3.0], &c, 100_000, 3);
        assert!((f[2] - 5.0 / 9.0).abs() < 0.01);
        assert!((f[1] - 3.0 / 9.0).abs() < 0.01);
        assert!((f[0] - 1.0 / 9.0).abs() < 0.01);
    }

    #[test]
    fn ranking_with_full_pressure_on_two() {
        let c = OperatorConfig {
            selection: SelectionMethod::Ranking,
            ranking_pressure: 2.0,
            ..cfg()
        };
        let f = frequencies(&[5.0, 1.0], &c, 100_000, 4);
        assert_eq!(f[1], 0.0);
        assert_eq!(f[0], 1.0);
    }

    #[test]
    fn degenerate_fitness_selects_uniformly() {
        let c = OperatorConfig {
            selection: SelectionMethod::Tournament,
            ..cfg()
        };
        let f = frequencies(&[-1e300; 4], &c, 100_000, 5);
        assert!(f.iter().all(|p| (p - 0.25).abs() < 0.01));
        assert_eq!(
            select(&[], &c, &mut rng(0)),
            Err(OperatorError::EmptyFitness)
        );
        assert_eq!(
            select(&[f64::NAN], &c, &mut rng(0)),
            Err(OperatorError::NoFiniteFitness)
        );
    }

    #[test]
    fn rank_probabilities_sum_to_one() {
        for n in [1, 2, 7, 99] {
            for s in [1.1, 1.5, 2.0] {
                let total: f64 = (0..n).map(|r| linear_rank_probability(r, n, s)).sum();
                assert!((total - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn longitudinal_swaps_subsystems() {
        let (x, y) = (chromosome(0.0), chromosome(100.0));
        let c = OperatorConfig {
            crossover: CrossoverMethod::Longitudinal,
            p_c: 1.0,
            ..cfg()
        };
        let (c1, c2) = crossover(&x, &y, &c, &mut rng(6)).unwrap();
        assert_eq!(c1.control(), x.control());
        assert_eq!(c1.realization(), y.realization());
        assert_eq!(c2.control(), y.control());
        assert_eq!(c2.realization(), x.realization());
    }

    #[test]
    fn zero_crossover_probability_copies_parents() {
        let (x, y) = (chromosome(0.0), chromosome(100.0));
        for method in [
            CrossoverMethod::SinglePoint,
            CrossoverMethod::DoublePoint,
            CrossoverMethod::Uniform,
            CrossoverMethod::Longitudinal,
        ] {
            let c = OperatorConfig {
                crossover: method,
                p_c: 0.0,
                ..cfg()
            };
            let mut r = rng(7);
            for _ in 0..50 {
                let (c1, c2) = crossover(&x, &y, &c, &mut r).unwrap();
                assert_eq!((&c1, &c2), (&x, &y));
            }
            let c = OperatorConfig { p_c: 1.0, ..c };
            let (c1, c2) = crossover(&x, &x, &c, &mut r).unwrap();
            assert_eq!((&c1, &c2), (&x, &x));
        }
    }

    #[test]
    fn double_point_swaps_an_inner_segment() {
        let (x, y) = (chromosome(0.0), chromosome(100.0));
        let c = OperatorConfig {
            crossover: CrossoverMethod::DoublePoint,
            p_c: 1.0,
            ..cfg()
        };
        let mut r = rng(8);
        for _ in 0..200 {
            let (c1, _) = crossover(&x, &y, &c, &mut r).unwrap();
            let from_y: Vec<bool> = c1.genes().iter().map(|&g| g >= 100.0).collect();
            assert!(!from_y[0], "first gene is never exchanged");
            let switches = from_y.windows(2).filter(|w| w[0] != w[1]).count();
            assert!(switches == 1 || switches == 2);
            assert!(from_y.iter().any(|&b| b));
        }
    }

    #[test]
    fn crossover_rejects_mismatched_parents() {
        let short = Chromosome::new(vec![1.0; 12], 5).unwrap();
        assert!(matches!(
            crossover(&chromosome(0.0), &short, &cfg(), &mut rng(0)),
            Err(OperatorError::LengthMismatch(..))
        ));
    }

    #[test]
    fn mutation_edge_cases() {
        let x = chromosome(0.0);
        for method in [
            MutationMethod::SinglePoint,
            MutationMethod::MultiPoint,
            MutationMethod::Probabilistic,
        ] {
            let c = OperatorConfig {
                mutation: method,
                p_m: 0.0,
                ..cfg()
            };
            assert_eq!(mutate(&x, &c, &mut rng(9)), x);
        }
        let c = OperatorConfig {
            mutation: MutationMethod::MultiPoint,
            p_m: 1.0,
            ..cfg()
        };
        let mut r = rng(10);
        for _ in 0..100 {
            let m = mutate(&x, &c, &mut r);
            for (a, b) in m.genes().iter().zip(x.genes()) {
                assert!((a - b).abs() <= 0.001);
            }
        }
    }

    #[test]
    fn multi_point_mutation_rate() {
        let x = Chromosome::new(vec![0.5; 13], 5).unwrap();
        let c = OperatorConfig {
            mutation: MutationMethod::MultiPoint,
            p_m: 0.01,
            ..cfg()
        };
        let mut r = rng(12);
        let trials = 100_000;
        let changed: usize = (0..trials)
            .map(|_| {
                let m = mutate(&x, &c, &mut r);
                m.genes()
                    .iter()
                    .zip(x.genes())
                    .filter(|(a, b)| a != b)
                    .count()
            })
            .sum();
        let mean = changed as f64 / trials as f64;
        assert!((mean - 0.13).abs() < 0.01, "mean = {mean}");
    }

    #[test]
    fn knock_out_zeroes_one_gene() {
        let x = chromosome(1.0);
        let k = knock_out_gene(&x, &mut rng(13));
        assert_eq!(k.len(), x.len());
        assert_eq!(k.genes().iter().filter(|&&g| g == 0.0).count(), 1);
    }

    #[test]
    fn extension_appends_bounded_gene() {
        let pop = Population::new(vec![chromosome(-17.04), chromosome(0.343)], 0).unwrap();
        let ext = extend_genotype(&pop, &mut rng(14)).unwrap();
        assert!(ext.is_extended());
        for c in ext.individuals() {
            assert_eq!(c.len(), 14);
            assert!((-17.04..=12.343).contains(&c.genes()[13]));
        }
        assert_eq!(
            extend_genotype(&ext, &mut rng(14)),
            Err(OperatorError::AlreadyExtended)
        );

        let flat = Population::new(vec![Chromosome::new(vec![2.5; 13], 5).unwrap()], 0).unwrap();
        let ext = extend_genotype(&flat, &mut rng(15)).unwrap();
        assert_eq!(ext.individuals()[0].genes()[13], 2.5);
    }

    #[test]
    fn config_validation() {
        assert!(cfg().validate().is_ok());
        assert!(OperatorConfig { p_c: 1.5, ..cfg() }.validate().is_err());
        assert!(OperatorConfig { p_m: -0.1, ..cfg() }.validate().is_err());
        assert!(OperatorConfig {
            tournament_k: 1,
            ..cfg()
        }
        .validate()
        .is_err());
        assert!(OperatorConfig {
            ranking_pressure: 1.0,
            ..cfg()
        }
        .validate()
        .is_err());
        assert_eq!(
            "uniform".parse::<CrossoverMethod>(),
            Ok(CrossoverMethod::Uniform)
        );
        assert!("bogus".parse::<MutationMethod>().is_err());
    }
}
