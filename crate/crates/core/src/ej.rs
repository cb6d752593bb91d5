//! Expert-judgement scoring: min-max normalization, additive weighting,
//! and competition ranking.

/// Rectangular score table: one row per UCA, one column per criterion in
/// [`crate::model::Criterion::ALL`] order. Values are either raw scores or
/// their normalized counterparts in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreMatrix {
    uca_ids: Vec<String>,
    rows: Vec<[f64; 5]>,
}

impl ScoreMatrix {
    /// Panics if `uca_ids` and `rows` differ in length.
    pub fn new(uca_ids: Vec<String>, rows: Vec<[f64; 5]>) -> ScoreMatrix {
        assert_eq!(uca_ids.len(), rows.len(), "one row per UCA id");
        ScoreMatrix { uca_ids, rows }
    }

    pub fn uca_ids(&self) -> &[String] {
        &self.uca_ids
    }

    pub fn rows(&self) -> &[[f64; 5]] {
        &self.rows
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }
}

/// Min-max normalizes every column into `[0, 1]`.
///
/// A column with a single distinct value maps to 0.0 for every row, so a
/// criterion that does not discriminate cannot shift the ranking.
pub fn normalize(matrix: &ScoreMatrix) -> ScoreMatrix {
    ScoreMatrix {
        uca_ids: matrix.uca_ids.clone(),
        rows: normalize_rows(&matrix.rows),
    }
}

pub(crate) fn normalize_rows(rows: &[[f64; 5]]) -> Vec<[f64; 5]> {
    let mut out = rows.to_vec();
    for col in 0..5 {
        let mut min = f64::INFINITY;
        let mut max = f64::NEG_INFINITY;
        for row in rows {
            min = min.min(row[col]);
            max = max.max(row[col]);
        }
        let span = max - min;
        for row in &mut out {
            row[col] = if span > 0.0 { (row[col] - min) / span } else { 0.0 };
        }
    }
    out
}

/// Sums the normalized criterion values of each row.
pub fn saw(matrix: &ScoreMatrix) -> Vec<f64> {
    saw_rows(matrix.rows())
}

pub(crate) fn saw_rows(rows: &[[f64; 5]]) -> Vec<f64> {
    rows.iter().map(|row| row.iter().sum()).collect()
}

/// Which end of the score scale wins when ranking.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    HigherIsBetter,
    LowerIsBetter,
}

/// Competition ("1-1-3") ranking: tied scores share the best rank and the
/// next distinct score skips the tied positions, so that
/// `rank(x) = 1 + #(strictly better than x)`.
pub fn rank_competition(scores: &[f64], direction: Direction) -> Vec<u32> {
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| match direction {
        Direction::HigherIsBetter => scores[b].total_cmp(&scores[a]),
        Direction::LowerIsBetter => scores[a].total_cmp(&scores[b]),
    });
    let mut ranks = vec![0u32; scores.len()];
    for (pos, &idx) in order.iter().enumerate() {
        if pos > 0 && scores[idx] == scores[order[pos - 1]] {
            ranks[idx] = ranks[order[pos - 1]];
        } else {
            ranks[idx] = (pos + 1) as u32;
        }
    }
    ranks
}

/// Scores and competition ranks from one normalize-sum-rank pass.
#[derive(Debug, Clone, PartialEq)]
pub struct SawRanking {
    pub scores: Vec<f64>,
    pub ranks: Vec<u32>,
}

/// Runs the full scoring chain on a raw matrix. Higher scores receive
/// numerically lower (better) ranks.
pub fn initial_ranking(raw: &ScoreMatrix) -> SawRanking {
    let scores = saw_rows(&normalize_rows(raw.rows()));
    let ranks = rank_competition(&scores, Direction::HigherIsBetter);
    SawRanking { scores, ranks }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn example_matrix() -> ScoreMatrix {
        ScoreMatrix::new(
            vec!["UCA-1.1.1".into(), "UCA-1.2.1".into(), "UCA-2.1.1".into()],
            vec![
                [3.0, 3.0, 2.0, 3.0, 0.0],
                [2.0, 2.0, 3.0, 3.0, 1.0],
                [1.0, 2.0, 1.0, 2.0, 1.0],
            ],
        )
    }

    // Independent ranking oracle: count strictly better scores.
    fn rank_oracle(scores: &[f64], direction: Direction) -> Vec<u32> {
        scores
            .iter()
            .map(|&s| {
                let better = scores
                    .iter()
                    .filter(|&&o| match direction {
                        Direction::HigherIsBetter => o > s,
                        Direction::LowerIsBetter => o < s,
                    })
                    .count();
                (better + 1) as u32
            })
            .collect()
    }

    #[test]
    fn normalize_matches_worked_example() {
        let expected = [
            [1.0, 1.0, 0.5, 1.0, 0.0],
            [0.5, 0.0, 1.0, 1.0, 1.0],
            [0.0, 0.0, 0.0, 0.0, 1.0],
        ];
        let normalized = normalize(&example_matrix());
        for (row, want) in normalized.rows().iter().zip(expected) {
            for (value, expect) in row.iter().zip(want) {
                assert!((value - expect).abs() < 1e-9, "{value} vs {expect}");
            }
        }
    }

    #[test]
    fn saw_matches_worked_example() {
        let scores = saw(&normalize(&example_matrix()));
        let expected = [3.5, 3.5, 1.0];
        for (score, want) in scores.iter().zip(expected) {
            assert!((score - want).abs() < 1e-9);
        }
        assert_eq!(
            rank_competition(&scores, Direction::HigherIsBetter),
            vec![1, 1, 3]
        );
    }

    #[test]
    fn single_row_normalizes_to_zeros() {
        let matrix = ScoreMatrix::new(vec!["only".into()], vec![[3.0, 1.0, 2.0, 3.0, 1.0]]);
        assert_eq!(normalize(&matrix).rows()[0], [0.0; 5]);
        assert_eq!(saw(&normalize(&matrix)), vec![0.0]);
    }

    #[test]
    fn competition_ranking_examples() {
        assert_eq!(rank_competition(&[5.0], Direction::HigherIsBetter), vec![1]);
        // Frozen from the counting oracle: 1 + #(strictly greater).
        assert_eq!(
            rank_competition(&[1.0, 2.0, 2.0, 3.0], Direction::HigherIsBetter),
            vec![4, 2, 2, 1]
        );
        assert_eq!(
            rank_competition(&[1.0, 2.0, 2.0, 3.0], Direction::LowerIsBetter),
            vec![1, 2, 2, 4]
        );
    }

    #[test]
    fn ranking_is_permutation_equivariant() {
        let scores = [3.5, 1.0, 3.5, 2.0];
        let ranks = rank_competition(&scores, Direction::HigherIsBetter);
        assert_eq!(ranks, rank_oracle(&scores, Direction::HigherIsBetter));
        let reversed: Vec<f64> = scores.iter().rev().copied().collect();
        let reversed_ranks = rank_competition(&reversed, Direction::HigherIsBetter);
        let expected: Vec<u32> = ranks.iter().rev().copied().collect();
        assert_eq!(reversed_ranks, expected);
    }

    proptest! {
        #[test]
        fn rank_matches_oracle(scores in proptest::collection::vec(-100.0f64..100.0, 1..40)) {
            let ranks = rank_competition(&scores, Direction::HigherIsBetter);
            prop_assert_eq!(ranks, rank_oracle(&scores, Direction::HigherIsBetter));
        }

        #[test]
        fn normalized_values_stay_in_unit_interval(
            rows in proptest::collection::vec(
                proptest::array::uniform5(0u8..=3).prop_map(|r| r.map(f64::from)),
                1..20,
            )
        ) {
            let normalized = normalize_rows(&rows);
            for col in 0..5 {
                let column: Vec<f64> = normalized.iter().map(|r| r[col]).collect();
                for value in &column {
                    prop_assert!((0.0..=1.0).contains(value));
                }
                let raw: Vec<f64> = rows.iter().map(|r| r[col]).collect();
                let constant = raw.iter().all(|v| *v == raw[0]);
                if constant {
                    prop_assert!(column.iter().all(|v| *v == 0.0));
                } else {
                    prop_assert!(column.contains(&0.0));
                    prop_assert!(column.contains(&1.0));
                }
            }
        }

        #[test]
        fn normalize_is_idempotent_for_non_constant_columns(
            rows in proptest::collection::vec(
                proptest::array::uniform5(0u8..=3).prop_map(|r| r.map(f64::from)),
                2..20,
            )
        ) {
            let once = normalize_rows(&rows);
            let twice = normalize_rows(&once);
            prop_assert_eq!(once, twice);
        }

        // Positive per-column affine rescaling of raw scores must not change
        // the ranking: min-max normalization cancels scale and shift. Integer
        // inputs keep the arithmetic exact, so scores match bit for bit.
        #[test]
        fn ranking_invariant_under_column_affine_maps(
            rows in proptest::collection::vec(
                proptest::array::uniform5(0u8..=3).prop_map(|r| r.map(f64::from)),
                1..20,
            ),
            scale in proptest::array::uniform5(1u8..=5),
            shift in proptest::array::uniform5(-3i8..=3),
        ) {
            let transformed: Vec<[f64; 5]> = rows
                .iter()
                .map(|row| {
                    let mut out = *row;
                    for col in 0..5 {
                        out[col] = f64::from(scale[col]) * out[col] + f64::from(shift[col]);
                    }
                    out
                })
                .collect();
            let base = rank_competition(&saw_rows(&normalize_rows(&rows)), Direction::HigherIsBetter);
            let mapped = rank_competition(&saw_rows(&normalize_rows(&transformed)), Direction::HigherIsBetter);
            prop_assert_eq!(base, mapped);
        }
    }
}
