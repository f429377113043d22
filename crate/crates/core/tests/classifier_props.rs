mod common;

use celltriage::classifier::{predicate_counts, Classifier, StrategicRule, TowerClass};
use celltriage::metrics::EnrichedTower;
use celltriage::thresholds::ThresholdSet;
use proptest::prelude::*;

use common::{oracle_label, overlap_case, tower, BRANCH_LABELS};

fn towers() -> impl Strategy<Value = Vec<EnrichedTower>> {
    prop::collection::vec((0u64..2_000, 1u64..5_000, 0u64..1_500), 1..60)
        .prop_map(|rows| rows.into_iter().map(|(s, r, a)| tower(s, r, a)).collect())
}

/// Valid thresholds on a quarter grid, so scaling by an integer stays exact.
fn thresholds() -> impl Strategy<Value = ThresholdSet> {
    (0u32..4_000, 0u32..4_000, 0u32..200, 0u32..200, 0u32..6_000).prop_map(|(s1, s2, d1, d2, a)| {
        let q = |v: u32| v as f64 / 4.0;
        ThresholdSet {
            high_samples: q(s1.max(s2)),
            low_samples: q(s1.min(s2)),
            high_density: q(d1.max(d2)) / 8.0,
            low_density: q(d1.min(d2)) / 8.0,
            long_active: q(a),
        }
    })
}

#[test]
fn every_ordered_branch_pair_resolves_to_the_earlier_branch() {
    for j in 1..=5 {
        for k in j + 1..=5 {
            for (s, r, a) in [(7, 250, 40), (1, 1000, 1), (300, 9000, 900), (0, 1, 0)] {
                let (t, th) = overlap_case(j, k, s, r, a);
                let got = Classifier::new(th).classify(&t);
                assert_eq!(
                    got,
                    BRANCH_LABELS[j - 1],
                    "pair ({j}, {k}) on {t:?} with {th:?}"
                );
            }
        }
    }
}

proptest! {
    #[test]
    fn matches_straight_line_oracle(ts in towers(), th in thresholds()) {
        let rule = StrategicRule::default();
        let c = Classifier::new(th);
        for t in &ts {
            let want = oracle_label(t.record.samples as f64, t.record.range_m as f64, t.active_days as f64, &th, &rule);
            prop_assert_eq!(c.classify(t), want);
        }
    }

    #[test]
    fn labels_partition_the_towers(ts in towers(), th in thresholds()) {
        let (labels, summary) = Classifier::new(th).classify_all(&ts);
        prop_assert_eq!(labels.len(), ts.len());
        prop_assert_eq!(summary.total, ts.len());
        prop_assert_eq!(summary.counts.values().sum::<usize>(), ts.len());
        prop_assert_eq!(summary.counts.len(), TowerClass::ALL.len());
    }

    #[test]
    fn high_density_is_always_over_utilized(ts in towers(), th in thresholds()) {
        let (labels, summary) = Classifier::new(th).classify_all(&ts);
        for (t, l) in ts.iter().zip(&labels) {
            if t.signal_density > th.high_density {
                prop_assert!(l.is_over_utilized(), "{:?} labelled {:?}", t, l);
            }
        }
        let over = summary.count(TowerClass::OverUtilizedHighTrafficDensity)
            + summary.count(TowerClass::OverUtilizedLocalizedCongestion);
        prop_assert_eq!(over, predicate_counts(&ts, &th).high_density);
    }

    #[test]
    fn scaling_samples_range_and_sample_thresholds_keeps_labels(
        ts in towers(),
        th in thresholds(),
        k in 1u64..50,
    ) {
        let rule = StrategicRule::default();
        let base = Classifier::new(th).with_strategic(rule);
        let kf = k as f64;
        let scaled_th = ThresholdSet {
            high_samples: th.high_samples * kf,
            low_samples: th.low_samples * kf,
            ..th
        };
        let scaled_rule = StrategicRule {
            min_range_m: rule.min_range_m * kf,
            max_samples: rule.max_samples * kf,
        };
        let scaled = Classifier::new(scaled_th).with_strategic(scaled_rule);
        for t in &ts {
            let big = tower(t.record.samples * k, t.record.range_m * k, t.active_days);
            prop_assert_eq!(big.signal_density, t.signal_density);
            prop_assert_eq!(scaled.classify(&big), base.classify(t));
        }
    }
}
