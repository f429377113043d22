//! Spatial grouping of towers and offline reverse geocoding.

pub mod geocode;
pub mod kmeans;

use serde::{Deserialize, Serialize};

use crate::classifier::{Classifier, TowerClass};
use crate::error::{Error, Result};
use crate::metrics::{EnrichedTower, UtilizationKpis};
use crate::thresholds::quantile;

pub use geocode::{haversine_km, Gazetteer, GazetteerEntry, GeocodeHit};
pub use kmeans::{kmeans, KMeansResult, Point};

pub const KM_PER_DEGREE_LON_AT_EQUATOR: f64 = 111.320;
pub const KM_PER_DEGREE_LAT: f64 = 110.574;

/// Equirectangular projection to kilometers around `ref_lat`.
pub fn project(lat: f64, lon: f64, ref_lat: f64) -> Point {
    [
        KM_PER_DEGREE_LON_AT_EQUATOR * ref_lat.to_radians().cos() * lon,
        KM_PER_DEGREE_LAT * lat,
    ]
}

/// Aggregate utilization figures for one spatial cluster.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterProfile {
    pub cluster_id: String,
    pub member_count: usize,
    pub total_samples: u64,
    pub mean_range_m: f64,
    /// `total_samples / mean_range_m`
    pub cluster_density: f64,
    pub median_active_days: f64,
    pub centroid_lat: f64,
    pub centroid_lon: f64,
    /// Indices of member towers in the enriched tower list, ascending.
    pub members: Vec<usize>,
}

impl UtilizationKpis for ClusterProfile {
    fn samples(&self) -> f64 {
        self.total_samples as f64
    }
    fn signal_density(&self) -> f64 {
        self.cluster_density
    }
    fn active_days(&self) -> f64 {
        self.median_active_days
    }
    fn range_m(&self) -> f64 {
        self.mean_range_m
    }
}

pub fn cluster_label(index: usize) -> String {
    format!("T{index:02}")
}

/// Builds a profile from member towers. `members` are the member indices
/// recorded on the profile and must line up with `towers`.
pub fn aggregate_cluster(
    towers: &[&EnrichedTower],
    members: Vec<usize>,
    id: &str,
) -> Result<ClusterProfile> {
    if towers.is_empty() {
        return Err(Error::EmptyInput {
            what: "cluster member list",
        });
    }
    let n = towers.len() as f64;
    let total_samples: u64 = towers.iter().map(|t| t.record.samples).sum();
    let mean_range_m = towers.iter().map(|t| t.record.range_m as f64).sum::<f64>() / n;
    let days: Vec<f64> = towers.iter().map(|t| t.active_days as f64).collect();
    Ok(ClusterProfile {
        cluster_id: id.to_string(),
        member_count: towers.len(),
        total_samples,
        mean_range_m,
        cluster_density: total_samples as f64 / mean_range_m,
        median_active_days: quantile(&days, 0.5)?,
        centroid_lat: towers.iter().map(|t| t.record.lat).sum::<f64>() / n,
        centroid_lon: towers.iter().map(|t| t.record.lon).sum::<f64>() / n,
        members,
    })
}

/// Runs the cluster profile through the tower decision logic. The
/// classifier's thresholds must have been derived from cluster profiles.
pub fn classify_cluster(profile: &ClusterProfile, classifier: &Classifier) -> TowerClass {
    classifier.classify(profile)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Clustering {
    /// Cluster index per tower.
    pub assignments: Vec<usize>,
    pub profiles: Vec<ClusterProfile>,
    pub reference_lat: f64,
    pub iterations: usize,
    pub objective_history: Vec<f64>,
}

/// Projects towers, runs k-means and aggregates one profile per cluster.
pub fn cluster_towers(towers: &[EnrichedTower], k: usize, seed: u64) -> Result<Clustering> {
    if towers.is_empty() {
        return Err(Error::EmptyInput { what: "tower list" });
    }
    let reference_lat = towers.iter().map(|t| t.record.lat).sum::<f64>() / towers.len() as f64;
    let points: Vec<Point> = towers
        .iter()
        .map(|t| project(t.record.lat, t.record.lon, reference_lat))
        .collect();
    let km = kmeans(&points, k, seed)?;

    let mut member_lists = vec![Vec::new(); k];
    for (i, &a) in km.assignments.iter().enumerate() {
        member_lists[a].push(i);
    }
    let profiles = member_lists
        .into_iter()
        .enumerate()
        .map(|(j, members)| {
            let refs: Vec<&EnrichedTower> = members.iter().map(|&i| &towers[i]).collect();
            aggregate_cluster(&refs, members, &cluster_label(j))
        })
        .collect::<Result<Vec<_>>>()?;

    Ok(Clustering {
        assignments: km.assignments,
        profiles,
        reference_lat,
        iterations: km.iterations,
        objective_history: km.objective_history,
    })
}
