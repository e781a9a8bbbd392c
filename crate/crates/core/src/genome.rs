//! Real-valued chromosomes `[ch_a | ch_b]` and identification-seeded
//! populations.
//!
//! `ch_a` carries the autoregressive coefficients `a_1..a_na` (the control
//! subsystem), `ch_b` the input coefficients `b_1..b_nb` (the realization
//! subsystem). The boundary between the two is the only structural cut
//! the genotype exposes and is the cut used by longitudinal crossover.

use std::fmt::Write as _;

use rand::Rng;
use thiserror::Error;

use crate::identification::{ArxModel, ArxStructure};

/// Canonical number of `ch_a` genes.
pub const CONTROL_GENES: usize = 5;
/// Canonical number of `ch_b` genes.
pub const REALIZATION_GENES: usize = 8;
/// Half-width of the uniform interval used to derive children from a base.
pub const SEED_RANGE: f64 = 0.001;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GenomeError {
    #[error("genome is SISO")]
    NotSiso,
    #[error("chromosome needs at least one realization gene (boundary {boundary}, length {len})")]
    BadBoundary { boundary: usize, len: usize },
    #[error("non-finite gene at position {0}")]
    NonFinite(usize),
    #[error("no base individuals")]
    NoBases,
    #[error("target size {target} is smaller than the {bases} base individuals")]
    TargetTooSmall { target: usize, bases: usize },
    #[error("seeding range must be finite and >= 0, got {0}")]
    InvalidRange(f64),
    #[error("base individuals have differing genome layouts")]
    MixedLayouts,
    #[error("population is empty")]
    EmptyPopulation,
    #[error("individuals have differing genotype lengths")]
    RaggedPopulation,
    #[error("snapshot line {line}: {message}")]
    Snapshot { line: usize, message: String },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Chromosome {
    genes: Vec<f64>,
    boundary: usize,
}

impl Chromosome {
    pub fn new(genes: Vec<f64>, boundary: usize) -> Result<Self, GenomeError> {
        if boundary >= genes.len() {
            return Err(GenomeError::BadBoundary {
                boundary,
                len: genes.len(),
            });
        }
        if let Some(pos) = genes.iter().position(|g| !g.is_finite()) {
            return Err(GenomeError::NonFinite(pos));
        }
        Ok(Self { genes, boundary })
    }

    /// Builds a chromosome whose genes are already known to be valid.
    pub(crate) fn from_parts(genes: Vec<f64>, boundary: usize) -> Self {
        debug_assert!(boundary < genes.len());
        debug_assert!(genes.iter().all(|g| g.is_finite()));
        Self { genes, boundary }
    }

    pub fn genes(&self) -> &[f64] {
        &self.genes
    }

    pub(crate) fn genes_mut(&mut self) -> &mut [f64] {
        &mut self.genes
    }

    pub fn len(&self) -> usize {
        self.genes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.genes.is_empty()
    }

    /// Index of the first `ch_b` gene, equal to the number of `ch_a` genes.
    pub fn boundary(&self) -> usize {
        self.boundary
    }

    pub fn control(&self) -> &[f64] {
        &self.genes[..self.boundary]
    }

    pub fn realization(&self) -> &[f64] {
        &self.genes[self.boundary..]
    }

    pub(crate) fn push_gene(&mut self, gene: f64) {
        self.genes.push(gene);
    }
}

/// Longitudinal decomposition of a chromosome into its control (`ch_a`)
/// and realization (`ch_b`) subsystems.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SubsystemView<'a> {
    pub control: &'a [f64],
    pub realization: &'a [f64],
}

impl SubsystemView<'_> {
    pub fn join(&self) -> Result<Chromosome, GenomeError> {
        let mut genes = Vec::with_capacity(self.control.len() + self.realization.len());
        genes.extend_from_slice(self.control);
        genes.extend_from_slice(self.realization);
        Chromosome::new(genes, self.control.len())
    }
}

pub fn subsystem_split(ch: &Chromosome) -> SubsystemView<'_> {
    SubsystemView {
        control: ch.control(),
        realization: ch.realization(),
    }
}

/// Encodes a SISO model, zero-padding to 5 `ch_a` and 8 `ch_b` genes.
/// Orders above the canonical sizes widen the corresponding block.
pub fn encode(model: &ArxModel) -> Result<Chromosome, GenomeError> {
    if model.structure.input_count != 1 {
        return Err(GenomeError::NotSiso);
    }
    let control = model.structure.na.max(CONTROL_GENES);
    let realization = model.structure.nb.max(REALIZATION_GENES);
    let mut genes = vec![0.0; control + realization];
    genes[..model.a.len()].copy_from_slice(&model.a);
    genes[control..control + model.b[0].len()].copy_from_slice(&model.b[0]);
    Chromosome::new(genes, control)
}

/// Decodes with input delay `nk = 0`.
pub fn decode(ch: &Chromosome) -> ArxModel {
    decode_with_delay(ch, 0)
}

/// Decodes into a SISO model with `na = boundary`, `nb = len - boundary`.
pub fn decode_with_delay(ch: &Chromosome, nk: usize) -> ArxModel {
    let structure = ArxStructure {
        na: ch.boundary,
        nb: ch.len() - ch.boundary,
        nk,
        input_count: 1,
    };
    ArxModel {
        structure,
        a: ch.control().to_vec(),
        b: vec![ch.realization().to_vec()],
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Population {
    individuals: Vec<Chromosome>,
    generation: usize,
    extended: bool,
}

impl Population {
    pub fn new(individuals: Vec<Chromosome>, generation: usize) -> Result<Self, GenomeError> {
        Self::with_extension(individuals, generation, false)
    }

    pub(crate) fn with_extension(
        individuals: Vec<Chromosome>,
        generation: usize,
        extended: bool,
    ) -> Result<Self, GenomeError> {
        let first = individuals.first().ok_or(GenomeError::EmptyPopulation)?;
        let (len, boundary) = (first.len(), first.boundary());
        if individuals
            .iter()
            .any(|c| c.len() != len || c.boundary() != boundary)
        {
            return Err(GenomeError::RaggedPopulation);
        }
        Ok(Self {
            individuals,
            generation,
            extended,
        })
    }

    pub fn individuals(&self) -> &[Chromosome] {
        &self.individuals
    }

    pub fn into_individuals(self) -> Vec<Chromosome> {
        self.individuals
    }

    pub fn len(&self) -> usize {
        self.individuals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.individuals.is_empty()
    }

    pub fn generation(&self) -> usize {
        self.generation
    }

    /// Whether the genotype has been extended by one appended gene.
    pub fn is_extended(&self) -> bool {
        self.extended
    }

    pub fn genotype_len(&self) -> usize {
        self.individuals[0].len()
    }

    pub fn boundary(&self) -> usize {
        self.individuals[0].boundary()
    }

    /// Snapshot text: one chromosome per line, genes with 17 significant
    /// digits, `|` between `ch_a` and `ch_b`.
    pub fn to_snapshot(&self) -> String {
        let mut out = String::new();
        for ch in &self.individuals {
            for g in ch.control() {
                write!(out, "{g:.16e} ").unwrap();
            }
            out.push('|');
            for g in ch.realization() {
                write!(out, " {g:.16e}").unwrap();
            }
            out.push('\n');
        }
        out
    }

    pub fn from_snapshot(text: &str) -> Result<Self, GenomeError> {
        let mut individuals = Vec::new();
        for (idx, line) in text
            .lines()
            .enumerate()
            .filter(|(_, l)| !l.trim().is_empty())
        {
            let err = |message: String| GenomeError::Snapshot {
                line: idx + 1,
                message,
            };
            let (left, right) = line
                .split_once('|')
                .ok_or_else(|| err("missing `|` boundary".into()))?;
            let parse = |s: &str| -> Result<Vec<f64>, GenomeError> {
                s.split_whitespace()
                    .map(|v| v.parse::<f64>().map_err(|_| err(format!("bad real `{v}`"))))
                    .collect()
            };
            let mut genes = parse(left)?;
            let boundary = genes.len();
            genes.extend(parse(right)?);
            individuals.push(Chromosome::new(genes, boundary).map_err(|e| err(e.to_string()))?);
        }
        Self::new(individuals, 0)
    }
}

/// Draws `base + d` with `d` uniform on `[-range, range]`, nudged so that
/// `|child - base| <= range` holds exactly in floating point.
pub(crate) fn perturb_within<R: Rng + ?Sized>(base: f64, range: f64, rng: &mut R) -> f64 {
    if range == 0.0 {
        return base;
    }
    let mut child = base + rng.random_range(-range..=range);
    while (child - base).abs() > range {
        child = if child > base {
            child.next_down()
        } else {
            child.next_up()
        };
    }
    child
}

/// Builds a population from identified base models: every base is
/// encoded and kept, then children are derived round-robin over the bases
/// until `target_size` is reached. Each child gene is uniform within
/// `range` of the matching base gene.
pub fn seed_population<R: Rng + ?Sized>(
    bases: &[ArxModel],
    target_size: usize,
    range: f64,
    rng: &mut R,
) -> Result<Population, GenomeError> {
    if bases.is_empty() {
        return Err(GenomeError::NoBases);
    }
    if target_size < bases.len() {
        return Err(GenomeError::TargetTooSmall {
            target: target_size,
            bases: bases.len(),
        });
    }
    if !(range.is_finite() && range >= 0.0) {
        return Err(GenomeError::InvalidRange(range));
    }
    let encoded = bases.iter().map(encode).collect::<Result<Vec<_>, _>>()?;
    if encoded
        .iter()
        .any(|c| c.len() != encoded[0].len() || c.boundary() != encoded[0].boundary())
    {
        return Err(GenomeError::MixedLayouts);
    }

    let mut individuals = Vec::with_capacity(target_size);
    individuals.extend(encoded.iter().cloned());
    for (_, base) in (0..target_size - encoded.len()).zip(encoded.iter().cycle()) {
        let genes = base
            .genes()
            .iter()
            .map(|&g| perturb_within(g, range, rng))
            .collect();
        individuals.push(Chromosome::from_parts(genes, base.boundary()));
    }
    Population::new(individuals, 0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn ch1() -> ArxModel {
        ArxModel::siso(vec![-0.1342], vec![0.343, -0.05387, -0.1443], 0).unwrap()
    }

    #[test]
    fn encodes_chromosome_one() {
        let ch = encode(&ch1()).unwrap();
        assert_eq!(
            ch.genes(),
            &[-0.1342, 0.0, 0.0, 0.0, 0.0, 0.343, -0.05387, -0.1443, 0.0, 0.0, 0.0, 0.0, 0.0]
        );
        assert_eq!(ch.boundary(), 5);
        let view = subsystem_split(&ch);
        assert_eq!(view.control, &[-0.1342, 0.0, 0.0, 0.0, 0.0]);
        assert_eq!(view.realization.len(), 8);
        assert_eq!(view.join().unwrap(), ch);
    }

    #[test]
    fn zero_model_encodes_to_zeros() {
        let ch = encode(&ArxModel::zeros(ArxStructure::default())).unwrap();
        assert_eq!(ch.genes(), &[0.0; 13]);
        let view = subsystem_split(&ch);
        assert!(view
            .control
            .iter()
            .chain(view.realization)
            .all(|&g| g == 0.0));
        let model = decode(&ch);
        assert_eq!(model, ArxModel::zeros(ArxStructure::default()));
    }

    #[test]
    fn miso_is_rejected() {
        let m = ArxModel::zeros(ArxStructure::new(1, 3, 0, 14).unwrap());
        assert_eq!(encode(&m), Err(GenomeError::NotSiso));
    }

    #[test]
    fn decode_pads_structure() {
        let m = decode(&encode(&ch1()).unwrap());
        assert_eq!(m.structure, ArxStructure::default());
        assert_eq!(m.a[0], -0.1342);
        assert_eq!(m.b[0][2], -0.1443);
        assert_eq!(m.b[0][7], 0.0);
    }

    #[test]
    fn extended_chromosome_decodes_with_nine_b_terms() {
        let mut genes = encode(&ch1()).unwrap().genes().to_vec();
        genes.push(0.25);
        let m = decode(&Chromosome::new(genes, 5).unwrap());
        assert_eq!(m.structure.nb, 9);
        assert_eq!(m.b[0][8], 0.25);
    }

    #[test]
    fn seeding_counts_and_bounds() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let pop = seed_population(&[ch1()], 3, 0.0, &mut rng).unwrap();
        assert_eq!(pop.len(), 3);
        assert!(pop.individuals().iter().all(|c| c == &pop.individuals()[0]));

        let bases: Vec<ArxModel> = (0..4)
            .map(|k| ArxModel::siso(vec![k as f64], vec![1.0], 0).unwrap())
            .collect();
        let pop = seed_population(&bases, 11, 0.001, &mut rng).unwrap();
        assert_eq!(pop.len(), 11);
        // 7 children: bases 0,1,2 get two, base 3 gets one
        let a1: Vec<f64> = pop.individuals().iter().map(|c| c.genes()[0]).collect();
        for (child, base) in (4..11).zip([0, 1, 2, 3, 0, 1, 2]) {
            assert!((a1[child] - base as f64).abs() <= 0.001);
        }

        assert_eq!(
            seed_population(&bases, 3, 0.001, &mut rng),
            Err(GenomeError::TargetTooSmall {
                target: 3,
                bases: 4
            })
        );
        assert_eq!(
            seed_population(&[], 3, 0.001, &mut rng),
            Err(GenomeError::NoBases)
        );
    }

    #[test]
    fn perturbation_never_exceeds_range() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        for base in [-17.04, -0.7413, 0.0, 1e-5, 0.343, 123456.789] {
            for _ in 0..2000 {
                let c = perturb_within(base, 0.001, &mut rng);
                assert!((c - base).abs() <= 0.001);
            }
        }
    }

    #[test]
    fn snapshot_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let pop = seed_population(&[ch1()], 6, 0.001, &mut rng).unwrap();
        let text = pop.to_snapshot();
        assert_eq!(text.lines().count(), 6);
        assert!(text.lines().all(|l| l.matches('|').count() == 1));
        let back = Population::from_snapshot(&text).unwrap();
        assert_eq!(back.individuals(), pop.individuals());
        assert!(Population::from_snapshot("1 2 3\n").is_err());
    }
}
