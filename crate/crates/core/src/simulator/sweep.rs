//! Criticality-threshold calibration against a planted gold clustering.
//!
//! For every candidate threshold, two situations are predicted to belong to
//! the same group when their similarity reaches the threshold; pairwise
//! precision compares those predictions against the gold labels:
//!
//! ```text
//! precision(B) = |predicted pairs with equal labels| / |predicted pairs|
//! ```
//!
//! Precision is piecewise constant in the threshold, with breakpoints only
//! at observed pairwise similarities. A threshold so high that nothing is
//! predicted gives vacuous precision, reported as 1.0 but flagged; the
//! reported optimum is the smallest threshold attaining the best
//! non-vacuous precision, since a vacuous point carries no evidence.

use super::SimulatorError;
use crate::situation::{situation_sim, SimilarityWeights, Situation};
use crate::TaxonomySet;

/// Situation sample with planted group labels.
#[derive(Debug, Clone, PartialEq)]
pub struct GoldClustering {
    pub members: Vec<(Situation, usize)>,
}

impl GoldClustering {
    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }
}

/// Precision at one threshold value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepPoint {
    pub threshold: f64,
    pub precision: f64,
    pub predicted_pairs: u64,
    /// True when no pair was predicted and the precision is vacuous.
    pub vacuous: bool,
}

/// The precision curve and its reported optimum.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub points: Vec<SweepPoint>,
    /// Smallest threshold attaining the maximal non-vacuous precision.
    pub best: SweepPoint,
}

/// Sweeps the similarity threshold over `thresholds`, predicting
/// same-group for pairs at or above each value and scoring pairwise
/// precision against the gold labels.
pub fn threshold_sweep(
    gold: &GoldClustering,
    weights: &SimilarityWeights,
    taxonomies: &TaxonomySet,
    thresholds: &[f64],
) -> Result<SweepResult, SimulatorError> {
    if gold.members.len() < 2 {
        return Err(SimulatorError::EmptyGold);
    }
    if thresholds.is_empty() {
        return Err(SimulatorError::EmptyThresholdGrid);
    }
    let max = weights.total();
    for &b in thresholds {
        if !b.is_finite() || b < 0.0 || b > max {
            return Err(SimulatorError::ThresholdOutOfRange { value: b, max });
        }
    }

    // All pairwise similarities once; each threshold is then a scan.
    let mut pairs: Vec<(f64, bool)> = Vec::new();
    for i in 0..gold.members.len() {
        for j in (i + 1)..gold.members.len() {
            let (a, la) = &gold.members[i];
            let (b, lb) = &gold.members[j];
            let sim = situation_sim(a, b, weights, taxonomies)?;
            pairs.push((sim, la == lb));
        }
    }

    let mut points = Vec::with_capacity(thresholds.len());
    for &threshold in thresholds {
        let mut predicted = 0u64;
        let mut true_positive = 0u64;
        for &(sim, same) in &pairs {
            if sim >= threshold {
                predicted += 1;
                true_positive += u64::from(same);
            }
        }
        let vacuous = predicted == 0;
        let precision = if vacuous {
            1.0
        } else {
            true_positive as f64 / predicted as f64
        };
        points.push(SweepPoint {
            threshold,
            precision,
            predicted_pairs: predicted,
            vacuous,
        });
    }

    let best = points
        .iter()
        .filter(|p| !p.vacuous)
        .fold(None::<SweepPoint>, |best, p| match best {
            Some(b)
                if b.precision > p.precision
                    || (b.precision == p.precision && b.threshold <= p.threshold) =>
            {
                Some(b)
            }
            _ => Some(*p),
        })
        .unwrap_or(points[0]);

    Ok(SweepResult { points, best })
}

/// Writes the sweep as CSV: `threshold_b,precision,predicted_pairs`.
pub fn write_sweep_csv<W: std::io::Write>(
    result: &SweepResult,
    mut out: W,
) -> std::io::Result<()> {
    writeln!(out, "threshold_b,precision,predicted_pairs")?;
    for p in &result.points {
        writeln!(
            out,
            "{:.6},{:.6},{}",
            p.threshold, p.precision, p.predicted_pairs
        )?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::simulator::{Environment, EnvironmentConfig};
    use crate::taxonomy::{ConceptId, Dimension, Taxonomy};

    fn cid(s: &str) -> ConceptId {
        ConceptId::new(s).unwrap()
    }

    fn sit(loc: &str, time: &str, social: &str) -> Situation {
        Situation::new(cid(loc), cid(time), cid(social))
    }

    /// Two branches far apart: leaves of different branches have
    /// per-dimension similarity 2*1/(3+3) = 1/3, so cross-group situation
    /// similarity is 1.0 while duplicated triples score 3.0.
    fn split_taxonomies() -> TaxonomySet {
        let text = "R\t-\nA\tR\nA1\tA\nB\tR\nB1\tB\n";
        TaxonomySet::new(
            Taxonomy::parse(text, Dimension::Location).unwrap(),
            Taxonomy::parse(text, Dimension::Time).unwrap(),
            Taxonomy::parse(text, Dimension::Social).unwrap(),
        )
    }

    #[test]
    fn perfectly_separable_gold_saturates_precision() {
        let taxos = split_taxonomies();
        let w = SimilarityWeights::default();
        // Each group repeats one triple, so intra pairs sit at 3.0 and
        // inter pairs at 1.0.
        let a = sit("A1", "A1", "A1");
        let b = sit("B1", "B1", "B1");
        let gold = GoldClustering {
            members: vec![
                (a.clone(), 0),
                (a.clone(), 0),
                (a, 0),
                (b.clone(), 1),
                (b.clone(), 1),
                (b, 1),
            ],
        };
        let grid: Vec<f64> = (0..=6).map(|i| i as f64 * 0.5).collect();
        let result = threshold_sweep(&gold, &w, &taxos, &grid).unwrap();
        for p in &result.points {
            if p.threshold > 1.0 {
                assert_eq!(p.precision, 1.0, "B {} should be clean", p.threshold);
                assert!(!p.vacuous);
                assert_eq!(p.predicted_pairs, 6);
            }
        }
        // B = 0 predicts everything; precision is the same-group share:
        // 6 of 15 pairs.
        let at_zero = result.points[0];
        assert_eq!(at_zero.predicted_pairs, 15);
        assert!((at_zero.precision - 0.4).abs() < 1e-12);
        // Reported optimum: the smallest saturating threshold.
        assert_eq!(result.best.threshold, 1.5);
        assert_eq!(result.best.precision, 1.0);
    }

    #[test]
    fn planted_environment_curve_rises_then_falls() {
        let env = Environment::generate(&EnvironmentConfig::default()).unwrap();
        let gold = env.gold_clustering(6, 1, 1);
        let grid: Vec<f64> = (0..=12).map(|i| i as f64 * 0.25).collect();
        let result = threshold_sweep(&gold, env.weights(), env.taxonomies(), &grid).unwrap();

        let at = |b: f64| {
            *result
                .points
                .iter()
                .find(|p| (p.threshold - b).abs() < 1e-9)
                .unwrap()
        };
        // Intra pairs sit at 2.5 (plus the duplicated triples at 3.0) and
        // inter pairs at 2.0, so thresholds in (2.0, 2.5] keep every intra
        // pair and drop every clean inter pair.
        assert!(at(2.25).precision > at(2.0).precision);
        assert!(at(2.25).precision >= 0.9);
        // Beyond the intra band only the duplicated triples remain: one
        // consistent duplicate and one misfiled one.
        assert_eq!(at(2.75).predicted_pairs, 2);
        assert!((at(2.75).precision - 0.5).abs() < 1e-12);
        assert!((at(3.0).precision - 0.5).abs() < 1e-12);
        assert!(!at(3.0).vacuous);
        // The optimum is interior and the curve falls on both sides.
        assert_eq!(result.best.threshold, 2.25);
        assert!(at(0.0).precision < result.best.precision);
        assert!(at(3.0).precision < result.best.precision);
    }

    #[test]
    fn precision_is_piecewise_constant_between_observed_sims() {
        let env = Environment::generate(&EnvironmentConfig::default()).unwrap();
        let gold = env.gold_clustering(4, 0, 0);
        // Our geometry only produces pairwise sims 2.0 and 2.5 here, so any
        // two thresholds inside (2.0, 2.5] must agree.
        let grid = vec![2.1, 2.2, 2.3, 2.4, 2.5];
        let result = threshold_sweep(&gold, env.weights(), env.taxonomies(), &grid).unwrap();
        let first = result.points[0];
        for p in &result.points {
            assert_eq!(p.precision, first.precision);
            assert_eq!(p.predicted_pairs, first.predicted_pairs);
        }
    }

    #[test]
    fn vacuous_points_are_flagged_and_never_win() {
        let taxos = split_taxonomies();
        let w = SimilarityWeights::default();
        let gold = GoldClustering {
            members: vec![(sit("A1", "A1", "A1"), 0), (sit("B1", "B1", "B1"), 1)],
        };
        // The only pair sits at 1.0; 2.0 predicts nothing.
        let result = threshold_sweep(&gold, &w, &taxos, &[0.5, 2.0]).unwrap();
        assert!(!result.points[0].vacuous);
        assert!(result.points[1].vacuous);
        assert_eq!(result.points[1].precision, 1.0);
        assert_eq!(result.best.threshold, 0.5);
    }

    #[test]
    fn degenerate_inputs_error() {
        let taxos = split_taxonomies();
        let w = SimilarityWeights::default();
        let single = GoldClustering {
            members: vec![(sit("A1", "A1", "A1"), 0)],
        };
        assert!(matches!(
            threshold_sweep(&single, &w, &taxos, &[1.0]),
            Err(SimulatorError::EmptyGold)
        ));
        let gold = GoldClustering {
            members: vec![(sit("A1", "A1", "A1"), 0), (sit("B1", "B1", "B1"), 1)],
        };
        assert!(matches!(
            threshold_sweep(&gold, &w, &taxos, &[]),
            Err(SimulatorError::EmptyThresholdGrid)
        ));
        assert!(matches!(
            threshold_sweep(&gold, &w, &taxos, &[3.5]),
            Err(SimulatorError::ThresholdOutOfRange { .. })
        ));
    }

    #[test]
    fn csv_layout() {
        let taxos = split_taxonomies();
        let w = SimilarityWeights::default();
        let gold = GoldClustering {
            members: vec![
                (sit("A1", "A1", "A1"), 0),
                (sit("A1", "A1", "A1"), 0),
                (sit("B1", "B1", "B1"), 1),
            ],
        };
        let result = threshold_sweep(&gold, &w, &taxos, &[0.0, 2.0]).unwrap();
        let mut out = Vec::new();
        write_sweep_csv(&result, &mut out).unwrap();
        let text = String::from_utf8(out).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "threshold_b,precision,predicted_pairs");
        assert_eq!(lines[1], "0.000000,0.333333,3");
        assert_eq!(lines[2], "2.000000,1.000000,1");
    }
}
