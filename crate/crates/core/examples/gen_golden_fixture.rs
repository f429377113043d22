//! Writes the synthetic golden dataset used by the integration tests.
//!
//! Usage: `cargo run --example gen_golden_fixture -- <out_dir>`
//!
//! Twenty tower blobs of ten towers each sit around Pakistani cities, far
//! enough apart for k = 20 to recover them. Four blobs carry heavy LTE
//! traffic, one blob is legacy-only, and one blob hosts congested legacy
//! cells. Each blob uses the same set of active-day values, so every
//! cluster has the same median age.

use std::fs;
use std::path::PathBuf;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const CITIES: [(&str, &str, f64, f64); 20] = [
    ("Karachi", "Sindh", 24.8607, 67.0011),
    ("Hyderabad", "Sindh", 25.3960, 68.3578),
    ("Sukkur", "Sindh", 27.7052, 68.8574),
    ("Larkana", "Sindh", 27.5570, 68.2264),
    ("Quetta", "Balochistan", 30.1798, 66.9750),
    ("Multan", "Punjab", 30.1575, 71.5249),
    ("Bahawalpur", "Punjab", 29.3956, 71.6836),
    ("Faisalabad", "Punjab", 31.4504, 73.1350),
    ("Lahore", "Punjab", 31.5204, 74.3587),
    ("Sialkot", "Punjab", 32.4945, 74.5229),
    ("Rawalpindi", "Punjab", 33.5651, 73.0169),
    ("Peshawar", "Khyber Pakhtunkhwa", 34.0151, 71.5249),
    ("Abbottabad", "Khyber Pakhtunkhwa", 34.1688, 73.2215),
    ("Gilgit", "Gilgit-Baltistan", 35.9208, 74.3144),
    ("Skardu", "Gilgit-Baltistan", 35.2971, 75.6333),
    ("Dera Ismail Khan", "Khyber Pakhtunkhwa", 31.8626, 70.9019),
    ("Gwadar", "Balochistan", 25.1264, 62.3225),
    ("Turbat", "Balochistan", 26.0031, 63.0544),
    ("Sargodha", "Punjab", 32.0740, 72.6861),
    ("Chitral", "Khyber Pakhtunkhwa", 35.8518, 71.7864),
];

/// Gazetteer-only places with no towers nearby.
const EXTRA_PLACES: [(&str, &str, f64, f64); 3] = [
    ("Zhob", "Balochistan", 31.3413, 69.4493),
    ("Mirpur Khas", "Sindh", 25.5276, 69.0111),
    ("Nawabshah", "Sindh", 26.2442, 68.4100),
];

const HOT: [usize; 4] = [0, 8, 10, 11];
const DEMAND: usize = 9;
const CONGESTED_LTE: usize = 5;
const LEGACY_ONLY: usize = 13;

/// Active days per slot; the median of each blob is 275.
const DAYS: [i64; 10] = [30, 60, 90, 120, 150, 400, 500, 600, 700, 800];

const DAY: i64 = 86_400;
/// 2023-06-01T00:00:00Z
const FIRST_MONTH_TS: i64 = 1_685_577_600;

struct Row {
    radio: &'static str,
    area: u64,
    cell: u64,
    lat: f64,
    lon: f64,
    range: u64,
    samples: u64,
    created: i64,
    updated: i64,
}

fn main() {
    let out: PathBuf = std::env::args_os()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from("."));
    fs::create_dir_all(&out).expect("create output directory");
    let mut rng = ChaCha8Rng::seed_from_u64(20250501);

    let mut rows = Vec::new();
    for (b, &(_, _, clat, clon)) in CITIES.iter().enumerate() {
        let area = 2000 + b as u64 * 3;
        for (slot, &days) in DAYS.iter().enumerate() {
            let lat = clat + rng.random_range(-0.02..0.02);
            let lon = clon + rng.random_range(-0.02..0.02);
            let mut radio = match slot % 4 {
                0 => "GSM",
                1 => "UMTS",
                _ => "LTE",
            };
            let mut samples = rng.random_range(5..=60);
            let mut range = rng.random_range(5..=30) * 100;

            if HOT.contains(&b) {
                radio = "LTE";
                samples = rng.random_range(400..=1000);
                // two wide cells per hot blob keep their density modest
                range = if slot >= 8 {
                    6000
                } else {
                    rng.random_range(2..=5) * 100
                };
            } else if b == LEGACY_ONLY {
                radio = if slot % 2 == 0 { "GSM" } else { "UMTS" };
            } else if (b == DEMAND || b == CONGESTED_LTE) && slot < 4 {
                radio = match (b, slot % 2) {
                    (DEMAND, 0) => "GSM",
                    (DEMAND, _) => "UMTS",
                    _ => "LTE",
                };
                samples = rng.random_range(30..=50);
                range = 10;
            } else if matches!(b, 2 | 4 | 16 | 17) && slot == 9 {
                // low usage over a wide footprint for a long time
                samples = 2;
                range = 8000;
            } else if matches!(b, 3 | 6 | 19) && slot == 1 {
                samples = 1;
                range = 2000;
            }

            let month = match rng.random_range(0..10) {
                0..=2 => rng.random_range(0..12),
                _ => rng.random_range(12..24),
            };
            let updated =
                month_start(month) + rng.random_range(0..27) * DAY + rng.random_range(0..DAY);
            let created = updated - days * DAY - rng.random_range(0..DAY);
            rows.push(Row {
                radio,
                area,
                cell: 31_000_000 + b as u64 * 1000 + slot as u64,
                lat,
                lon,
                range,
                samples,
                created,
                updated,
            });
        }
    }

    let mut w = csv::Writer::from_path(out.join("golden_towers.csv")).expect("open tower csv");
    w.write_record([
        "radio",
        "mcc",
        "net",
        "area",
        "cell",
        "unit",
        "lon",
        "lat",
        "range",
        "samples",
        "changeable",
        "created",
        "updated",
        "averageSignal",
    ])
    .unwrap();
    for (i, r) in rows.iter().enumerate() {
        let net = [1, 3, 4, 6][i % 4];
        w.write_record([
            r.radio.to_string(),
            "410".into(),
            net.to_string(),
            r.area.to_string(),
            r.cell.to_string(),
            String::new(),
            format!("{:.6}", r.lon),
            format!("{:.6}", r.lat),
            r.range.to_string(),
            r.samples.to_string(),
            "1".into(),
            r.created.to_string(),
            r.updated.to_string(),
            "0".into(),
        ])
        .unwrap();
    }
    // rows the validator must quarantine
    for bad in [
        [
            "NR",
            "410",
            "1",
            "2000",
            "39000001",
            "",
            "67.0",
            "24.9",
            "500",
            "10",
            "1",
            "1700000000",
            "1710000000",
            "0",
        ],
        [
            "LTE",
            "410",
            "1",
            "2000",
            "39000002",
            "",
            "67.0",
            "95.0",
            "500",
            "10",
            "1",
            "1700000000",
            "1710000000",
            "0",
        ],
        [
            "GSM",
            "410",
            "1",
            "2000",
            "39000003",
            "",
            "67.0",
            "24.9",
            "0",
            "10",
            "1",
            "1700000000",
            "1710000000",
            "0",
        ],
        [
            "UMTS",
            "410",
            "1",
            "2000",
            "39000004",
            "",
            "67.0",
            "24.9",
            "500",
            "10",
            "1",
            "1710000000",
            "1700000000",
            "0",
        ],
        [
            "LTE",
            "410",
            "1",
            "2000",
            "39000005",
            "",
            "67.0",
            "24.9",
            "n/a",
            "10",
            "1",
            "1700000000",
            "1710000000",
            "0",
        ],
    ] {
        w.write_record(bad).unwrap();
    }
    w.flush().unwrap();

    let mut g =
        csv::Writer::from_path(out.join("golden_gazetteer.csv")).expect("open gazetteer csv");
    g.write_record(["name", "admin", "lat", "lon"]).unwrap();
    for (name, admin, lat, lon) in CITIES.iter().chain(EXTRA_PLACES.iter()) {
        g.write_record([
            name.to_string(),
            admin.to_string(),
            lat.to_string(),
            lon.to_string(),
        ])
        .unwrap();
    }
    g.flush().unwrap();
    eprintln!("wrote {} towers to {}", rows.len(), out.display());
}

/// Start of the `i`-th month after June 2023.
fn month_start(i: i64) -> i64 {
    let (mut y, mut m) = (2023, 6 + i);
    while m > 12 {
        m -= 12;
        y += 1;
    }
    let days_before = |y: i64, m: i64| -> i64 {
        let lengths = [31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31];
        let leap = (y % 4 == 0) as i64;
        (1..m)
            .map(|k| lengths[(k - 1) as usize] + if k == 2 { leap } else { 0 })
            .sum()
    };
    let mut ts = FIRST_MONTH_TS - days_before(2023, 6) * DAY;
    for year in 2023..y {
        ts += (365 + (year % 4 == 0) as i64) * DAY;
    }
    ts + days_before(y, m) * DAY
}
