#![allow(dead_code)]

use std::path::PathBuf;
use std::process::{Command, Output};

use celltriage::classifier::{StrategicRule, TowerClass};
use celltriage::ingest::{Radio, TowerRecord};
use celltriage::metrics::{EnrichedTower, SECONDS_PER_DAY};
use celltriage::thresholds::ThresholdSet;

pub const BASE_TS: i64 = 1_700_000_000;

pub fn record(
    radio: Radio,
    samples: u64,
    range_m: u64,
    days: u64,
    lat: f64,
    lon: f64,
) -> TowerRecord {
    TowerRecord {
        radio,
        mcc: 410,
        net: 1,
        area: 1,
        cell: 1,
        lat,
        lon,
        range_m,
        samples,
        created_ts: BASE_TS,
        updated_ts: BASE_TS + days as i64 * SECONDS_PER_DAY,
    }
}

pub fn tower(samples: u64, range_m: u64, days: u64) -> EnrichedTower {
    EnrichedTower::new(record(Radio::Lte, samples, range_m, days, 30.0, 70.0)).unwrap()
}

/// Branch order of the decision logic, 1-based.
pub const BRANCH_LABELS: [TowerClass; 5] = [
    TowerClass::OverUtilizedHighTrafficDensity,
    TowerClass::OverUtilizedLocalizedCongestion,
    TowerClass::UnderUtilizedInefficient,
    TowerClass::StrategicCoverage,
    TowerClass::Balanced,
];

/// Straight-line restatement of the five conditions, evaluated independently
/// and resolved by taking the first one that holds.
pub fn oracle_label(s: f64, r: f64, a: f64, t: &ThresholdSet, rule: &StrategicRule) -> TowerClass {
    let rho = s / r;
    let conditions = [
        s > t.high_samples && rho > t.high_density,
        rho > t.high_density,
        s < t.low_samples && rho < t.low_density && a > t.long_active,
        r >= rule.min_range_m && s <= rule.max_samples,
        true,
    ];
    let first = conditions.iter().position(|&c| c).unwrap();
    BRANCH_LABELS[first]
}

/// A tower and thresholds under which branches `j` and `k` (1-based, j < k)
/// both hold while every branch before `j` fails.
pub fn overlap_case(
    j: usize,
    k: usize,
    samples: u64,
    range_m: u64,
    days: u64,
) -> (EnrichedTower, ThresholdSet) {
    assert!(1 <= j && j < k && k <= 5);
    let wants = |b: usize| b == j || b == k;
    let (samples, range_m) = if wants(4) {
        (1, range_m.max(1000))
    } else {
        (samples.max(1), range_m)
    };
    let days = days.max(1);
    let t = tower(samples, range_m, days);
    let (s, rho, a) = (samples as f64, t.signal_density, days as f64);

    let high_samples = if wants(1) { s - 0.5 } else { s + 0.5 };
    let high_density = if wants(1) || wants(2) {
        rho / 2.0
    } else {
        rho * 2.0 + 1.0
    };
    let (low_samples, low_density, long_active) = if wants(3) {
        (s + 1.0, rho * 2.0 + 1.0, a - 0.5)
    } else {
        (0.0, 0.0, a + 1.0)
    };
    (
        t,
        ThresholdSet {
            high_samples,
            low_samples,
            high_density,
            low_density,
            long_active,
        },
    )
}

/// Type-7 quantile written from the `j = floor(np + m)`, `m = 1 - p` form.
pub fn oracle_quantile(values: &[f64], p: f64) -> f64 {
    let mut x = values.to_vec();
    x.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = x.len() as f64;
    let npm = n * p + (1.0 - p);
    let j = npm.floor();
    let g = npm - j;
    let at = |i: f64| x[(i as usize).clamp(1, x.len()) - 1];
    (1.0 - g) * at(j) + g * at(j + 1.0)
}

pub fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("tests/fixtures")
        .join(name)
}

pub fn golden_args() -> Vec<String> {
    vec![
        "--input".into(),
        fixture("golden_towers.csv").display().to_string(),
        "--gazetteer".into(),
        fixture("golden_gazetteer.csv").display().to_string(),
        "--q-high".into(),
        "0.8".into(),
        "--seed".into(),
        "0".into(),
    ]
}

pub fn celltriage(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_celltriage"))
        .args(args)
        .env_remove("CELLTRIAGE_SEED")
        .output()
        .expect("spawn celltriage")
}

pub fn run_ok(args: &[&str]) -> String {
    let out = celltriage(args);
    assert!(
        out.status.success(),
        "celltriage {args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).expect("stdout is UTF-8")
}
