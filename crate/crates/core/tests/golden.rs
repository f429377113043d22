//! Byte-for-byte check of the full report on the bundled fixture.
//!
//! Set `UPDATE_GOLDEN=1` to rewrite `tests/fixtures/golden_report.json`
//! after an intentional output change.

mod common;

use std::collections::BTreeMap;
use std::fs;

use celltriage::classifier::{StrategicRule, TowerClass};
use celltriage::ingest::{parse_dataset, ColumnMapping};
use celltriage::metrics::enrich;
use celltriage::thresholds::ThresholdSet;
use serde_json::Value;

use common::{celltriage, fixture, golden_args, oracle_label, oracle_quantile};

fn report_bytes() -> Vec<u8> {
    let mut args = vec!["report".to_string()];
    args.extend(golden_args());
    let args: Vec<&str> = args.iter().map(String::as_str).collect();
    let out = celltriage(&args);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    out.stdout
}

#[test]
fn report_matches_golden_file() {
    let path = fixture("golden_report.json");
    let got = report_bytes();
    if std::env::var_os("UPDATE_GOLDEN").is_some() {
        fs::write(&path, &got).unwrap();
        return;
    }
    let want = fs::read(&path).expect("golden file present; run with UPDATE_GOLDEN=1 to create it");
    assert!(got == want, "report differs from {}", path.display());
}

fn golden() -> Value {
    serde_json::from_slice(&fs::read(fixture("golden_report.json")).unwrap()).unwrap()
}

#[test]
fn golden_labels_agree_with_oracle_recomputation() {
    let text = fs::read(fixture("golden_towers.csv")).unwrap();
    let (records, _) = parse_dataset(text.as_slice(), &ColumnMapping::default()).unwrap();
    let towers = enrich(&records).unwrap();
    let col = |f: fn(&celltriage::EnrichedTower) -> f64| towers.iter().map(f).collect::<Vec<f64>>();
    let (s, d, a) = (
        col(|t| t.record.samples as f64),
        col(|t| t.signal_density),
        col(|t| t.active_days as f64),
    );
    let th = ThresholdSet {
        high_samples: oracle_quantile(&s, 0.8),
        low_samples: oracle_quantile(&s, 0.1),
        high_density: oracle_quantile(&d, 0.8),
        low_density: oracle_quantile(&d, 0.1),
        long_active: oracle_quantile(&a, 0.75),
    };
    let rule = StrategicRule::default();
    let report = golden();
    let rows = report["classification"]["towers"].as_array().unwrap();
    assert_eq!(rows.len(), towers.len());
    let mut counts: BTreeMap<String, usize> = BTreeMap::new();
    for (t, row) in towers.iter().zip(rows) {
        let want = oracle_label(
            t.record.samples as f64,
            t.record.range_m as f64,
            t.active_days as f64,
            &th,
            &rule,
        );
        assert_eq!(row["cell"].as_u64(), Some(t.record.cell));
        assert_eq!(
            row["classification"].as_str(),
            Some(want.as_str()),
            "cell {}",
            t.record.cell
        );
        *counts.entry(want.as_str().to_string()).or_default() += 1;
    }
    for class in TowerClass::ALL {
        assert!(
            counts.get(class.as_str()).copied().unwrap_or(0) > 0,
            "{class} missing from fixture"
        );
    }
}

#[test]
fn golden_fixture_has_the_engineered_shape() {
    let r = golden();
    let clusters = &r["clusters"]["summary"]["counts"];
    assert_eq!(clusters["balanced"], 16);
    assert_eq!(clusters["over_utilized_high_traffic_density"], 4);
    assert_eq!(r["zones"]["demand_zones"].as_array().unwrap().len(), 1);
    assert_eq!(r["zones"]["lte_gaps"].as_array().unwrap().len(), 1);
    for c in r["clusters"]["contrasts"].as_array().unwrap() {
        assert_eq!(c["test"]["df"], 18.0);
    }
    // cluster sample totals against a direct sum over members
    let towers = r["classification"]["towers"].as_array().unwrap();
    for c in r["clusters"]["clusters"].as_array().unwrap() {
        let sum: u64 = c["members"]
            .as_array()
            .unwrap()
            .iter()
            .map(|m| {
                towers[m.as_u64().unwrap() as usize]["samples"]
                    .as_u64()
                    .unwrap()
            })
            .sum();
        assert_eq!(c["total_samples"].as_u64(), Some(sum));
    }
}
