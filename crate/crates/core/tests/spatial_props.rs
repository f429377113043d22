mod common;

use celltriage::ingest::Radio;
use celltriage::metrics::EnrichedTower;
use celltriage::spatial::{cluster_towers, haversine_km, kmeans, Point};
use proptest::prelude::*;

use common::record;

fn points() -> impl Strategy<Value = Vec<Point>> {
    prop::collection::vec(
        (-500.0f64..500.0, -500.0f64..500.0).prop_map(|(x, y)| [x, y]),
        1..120,
    )
}

fn sited_towers() -> impl Strategy<Value = Vec<EnrichedTower>> {
    prop::collection::vec(
        (
            0u64..5_000,
            1u64..8_000,
            0u64..900,
            24.0f64..37.0,
            61.0f64..77.0,
        ),
        1..80,
    )
    .prop_map(|rows| {
        rows.into_iter()
            .map(|(s, r, a, lat, lon)| {
                EnrichedTower::new(record(Radio::Gsm, s, r, a, lat, lon)).unwrap()
            })
            .collect()
    })
}

proptest! {
    #[test]
    fn kmeans_assignment_is_a_partition(pts in points(), k in 1usize..12, seed in any::<u64>()) {
        prop_assume!(k <= pts.len());
        let km = kmeans(&pts, k, seed).unwrap();
        prop_assert_eq!(km.assignments.len(), pts.len());
        prop_assert_eq!(km.centroids.len(), k);
        let mut sizes = vec![0usize; k];
        for &a in &km.assignments {
            prop_assert!(a < k);
            sizes[a] += 1;
        }
        prop_assert_eq!(sizes.iter().sum::<usize>(), pts.len());
    }

    #[test]
    fn kmeans_objective_never_increases(pts in points(), k in 1usize..12, seed in any::<u64>()) {
        prop_assume!(k <= pts.len());
        let km = kmeans(&pts, k, seed).unwrap();
        for w in km.objective_history.windows(2) {
            prop_assert!(w[1] <= w[0], "objective rose from {} to {}", w[0], w[1]);
        }
    }

    #[test]
    fn haversine_is_symmetric_and_zero_only_on_identity(
        a in (-90.0f64..=90.0, -180.0f64..=180.0),
        b in (-90.0f64..=90.0, -180.0f64..=180.0),
    ) {
        let ab = haversine_km(a.0, a.1, b.0, b.1);
        let ba = haversine_km(b.0, b.1, a.0, a.1);
        prop_assert!((ab - ba).abs() <= 1e-9 * ab.max(1.0));
        prop_assert_eq!(haversine_km(a.0, a.1, a.0, a.1), 0.0);
        if a != b {
            prop_assert!(ab > 0.0);
        }
    }

    #[test]
    fn cluster_totals_add_up(ts in sited_towers(), k in 1usize..10, seed in 0u64..1_000) {
        prop_assume!(k <= ts.len());
        let c = cluster_towers(&ts, k, seed).unwrap();
        prop_assert_eq!(c.profiles.iter().map(|p| p.member_count).sum::<usize>(), ts.len());
        prop_assert_eq!(
            c.profiles.iter().map(|p| p.total_samples).sum::<u64>(),
            ts.iter().map(|t| t.record.samples).sum::<u64>()
        );
        let mut seen = vec![false; ts.len()];
        for (j, p) in c.profiles.iter().enumerate() {
            for &m in &p.members {
                prop_assert!(!seen[m]);
                seen[m] = true;
                prop_assert_eq!(c.assignments[m], j);
            }
        }
        prop_assert!(seen.iter().all(|&s| s));
    }
}
