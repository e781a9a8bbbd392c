//! The nine algorithm variants: an adaptation function (I, II, III) crossed
//! with an operator row (I, II, III), written `<adaptation>.<row>`.
//!
//! | row | selection  | crossover    | mutation      |
//! |-----|------------|--------------|---------------|
//! | I   | roulette   | single point | single point  |
//! | II  | tournament | double point | multi point   |
//! | III | ranking    | uniform      | probabilistic |

use std::fmt;
use std::str::FromStr;

use crate::fitness::AdaptationVariant;
use crate::operators::{CrossoverMethod, MutationMethod, OperatorConfig, SelectionMethod};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum OperatorRow {
    I,
    II,
    III,
}

impl OperatorRow {
    pub const ALL: [OperatorRow; 3] = [Self::I, Self::II, Self::III];

    pub fn methods(self) -> (SelectionMethod, CrossoverMethod, MutationMethod) {
        match self {
            Self::I => (
                SelectionMethod::Roulette,
                CrossoverMethod::SinglePoint,
                MutationMethod::SinglePoint,
            ),
            Self::II => (
                SelectionMethod::Tournament,
                CrossoverMethod::DoublePoint,
                MutationMethod::MultiPoint,
            ),
            Self::III => (
                SelectionMethod::Ranking,
                CrossoverMethod::Uniform,
                MutationMethod::Probabilistic,
            ),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Variant {
    pub adaptation: AdaptationVariant,
    pub row: OperatorRow,
}

impl Variant {
    /// All nine variants in table order `I.I, I.II, ..., III.III`.
    pub fn all() -> Vec<Variant> {
        AdaptationVariant::ALL
            .iter()
            .flat_map(|&adaptation| {
                OperatorRow::ALL
                    .iter()
                    .map(move |&row| Variant { adaptation, row })
            })
            .collect()
    }

    /// Sets the selection, crossover and mutation methods of `cfg`,
    /// leaving probabilities and tuning parameters untouched.
    pub fn apply(&self, cfg: &OperatorConfig) -> OperatorConfig {
        let (selection, crossover, mutation) = self.row.methods();
        OperatorConfig {
            selection,
            crossover,
            mutation,
            ..*cfg
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let row = match self.row {
            OperatorRow::I => "I",
            OperatorRow::II => "II",
            OperatorRow::III => "III",
        };
        write!(f, "{}.{}", self.adaptation, row)
    }
}

impl FromStr for Variant {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (a, r) = s
            .split_once('.')
            .ok_or_else(|| format!("variant `{s}` is not of the form <I|II|III>.<I|II|III>"))?;
        let adaptation = a.parse()?;
        let row = match r {
            "I" => OperatorRow::I,
            "II" => OperatorRow::II,
            "III" => OperatorRow::III,
            _ => return Err(format!("unknown operator row `{r}`")),
        };
        Ok(Variant { adaptation, row })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nine_variants_in_order() {
        let names: Vec<String> = Variant::all().iter().map(|v| v.to_string()).collect();
        assert_eq!(
            names,
            ["I.I", "I.II", "I.III", "II.I", "II.II", "II.III", "III.I", "III.II", "III.III"]
        );
        for n in &names {
            assert_eq!(n.parse::<Variant>().unwrap().to_string(), *n);
        }
        assert!("IV.I".parse::<Variant>().is_err());
        assert!("I".parse::<Variant>().is_err());
    }

    #[test]
    fn row_binds_operator_triple() {
        let base = OperatorConfig::default();
        let v: Variant = "II.III".parse().unwrap();
        let cfg = v.apply(&base);
        assert_eq!(cfg.selection, SelectionMethod::Ranking);
        assert_eq!(cfg.crossover, CrossoverMethod::Uniform);
        assert_eq!(cfg.mutation, MutationMethod::Probabilistic);
        assert_eq!(cfg.p_c, base.p_c);
        assert_eq!(v.adaptation, AdaptationVariant::II);
    }
}
