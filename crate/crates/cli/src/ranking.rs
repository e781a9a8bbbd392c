//! Variant ranking on a 0-2 point scale per category.

use std::fmt::Write as _;

use arx_evolve::Variant;

/// First line of `ranking.csv`.
pub const RANKING_HEADER_NOTE: &str =
    "# points per category: 2 = best, 0 = worst, 1 = otherwise; lower values rank better; ties share the higher score";

#[derive(Debug, Clone, PartialEq)]
pub struct VariantSummary {
    pub variant: Variant,
    /// Best SSE reached by the base run.
    pub best_result: f64,
    /// Wall clock of the base run.
    pub cost_ms_total: u64,
    /// Spread (max - min) of final best quality across the mutation grid.
    pub susceptibility: f64,
    pub genotype_len: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RankedVariant {
    pub summary: VariantSummary,
    pub points_best_result: u8,
    pub points_cost: u8,
    pub points_susceptibility: u8,
}

impl RankedVariant {
    pub fn points_total(&self) -> u8 {
        self.points_best_result + self.points_cost + self.points_susceptibility
    }
}

/// Scores one category where smaller values are better: the minimum
/// earns 2, the maximum 0, everything else 1. If all values tie, all earn 2.
pub fn category_points(values: &[f64]) -> Vec<u8> {
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    values
        .iter()
        .map(|&v| {
            if v == min {
                2
            } else if v == max {
                0
            } else {
                1
            }
        })
        .collect()
}

pub fn rank(summaries: Vec<VariantSummary>) -> Vec<RankedVariant> {
    let best = category_points(&summaries.iter().map(|s| s.best_result).collect::<Vec<_>>());
    let cost = category_points(
        &summaries
            .iter()
            .map(|s| s.cost_ms_total as f64)
            .collect::<Vec<_>>(),
    );
    let susc = category_points(
        &summaries
            .iter()
            .map(|s| s.susceptibility)
            .collect::<Vec<_>>(),
    );
    summaries
        .into_iter()
        .enumerate()
        .map(|(i, summary)| RankedVariant {
            summary,
            points_best_result: best[i],
            points_cost: cost[i],
            points_susceptibility: susc[i],
        })
        .collect()
}

pub fn ranking_csv(rows: &[RankedVariant]) -> String {
    let mut out = String::new();
    writeln!(out, "{RANKING_HEADER_NOTE}").unwrap();
    out.push_str(
        "variant,best_result,cost_ms_total,susceptibility,genotype_len,\
         points_best_result,points_cost,points_susceptibility,points_total\n",
    );
    for r in rows {
        let s = &r.summary;
        writeln!(
            out,
            "{},{:e},{},{:e},{},{},{},{},{}",
            s.variant,
            s.best_result,
            s.cost_ms_total,
            s.susceptibility,
            s.genotype_len,
            r.points_best_result,
            r.points_cost,
            r.points_susceptibility,
            r.points_total()
        )
        .unwrap();
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn extremes_get_two_and_zero() {
        assert_eq!(category_points(&[3.0, 1.0, 2.0, 5.0]), [1, 2, 1, 0]);
    }

    #[test]
    fn ties_share_the_higher_score() {
        assert_eq!(category_points(&[1.0, 1.0, 4.0, 4.0, 2.0]), [2, 2, 0, 0, 1]);
        assert_eq!(category_points(&[0.0, 0.0, 0.0]), [2, 2, 2]);
    }

    #[test]
    fn csv_has_one_row_per_variant() {
        let summaries = Variant::all()
            .into_iter()
            .enumerate()
            .map(|(i, variant)| VariantSummary {
                variant,
                best_result: 10.0 - i as f64,
                cost_ms_total: i as u64,
                susceptibility: 0.5,
                genotype_len: 13,
            })
            .collect();
        let ranked = rank(summaries);
        let text = ranking_csv(&ranked);
        assert_eq!(text.lines().count(), 11);
        assert!(text
            .lines()
            .nth(2)
            .unwrap()
            .starts_with("I.I,1e1,0,5e-1,13,0,2,2,4"));
        assert_eq!(ranked[8].points_best_result, 2);
    }
}
