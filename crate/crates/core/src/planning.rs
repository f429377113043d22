//! Planning analyses: coverage-only towers, LTE gaps, legacy demand zones,
//! cluster priorities, technology mix and the busiest-area baseline.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::classifier::{StrategicRule, TowerClass};
use crate::error::{Error, Result};
use crate::ingest::{Radio, TowerRecord};
use crate::metrics::EnrichedTower;
use crate::spatial::{ClusterProfile, Gazetteer, GeocodeHit};
use crate::thresholds::ThresholdSet;

/// Towers with a wide radius but (almost) no usage, in input order.
pub fn high_range_low_usage<'a>(
    towers: &'a [EnrichedTower],
    rule: &StrategicRule,
) -> Vec<&'a EnrichedTower> {
    towers
        .iter()
        .filter(|t| rule.matches(t.record.range_m as f64, t.record.samples as f64))
        .collect()
}

/// Reverse-geocodes every tower.
pub fn geocode_towers(towers: &[EnrichedTower], g: &Gazetteer) -> Result<Vec<GeocodeHit>> {
    towers
        .iter()
        .map(|t| g.reverse_geocode(t.record.lat, t.record.lon))
        .collect()
}

/// A gazetteer place and the towers that geocoded to it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlaceTowers {
    pub name: String,
    pub admin: String,
    pub lat: f64,
    pub lon: f64,
    pub gsm: usize,
    pub umts: usize,
    pub lte: usize,
}

fn group_by_place(
    hits: &[GeocodeHit],
    towers: &[EnrichedTower],
    g: &Gazetteer,
) -> BTreeMap<usize, (PlaceTowers, Vec<usize>)> {
    let mut places: BTreeMap<usize, (PlaceTowers, Vec<usize>)> = BTreeMap::new();
    for (i, (hit, t)) in hits.iter().zip(towers).enumerate() {
        let (place, members) = places.entry(hit.entry).or_insert_with(|| {
            let e = &g.entries()[hit.entry];
            (
                PlaceTowers {
                    name: e.name.clone(),
                    admin: e.admin.clone(),
                    lat: e.lat,
                    lon: e.lon,
                    gsm: 0,
                    umts: 0,
                    lte: 0,
                },
                Vec::new(),
            )
        });
        match t.record.radio {
            Radio::Gsm => place.gsm += 1,
            Radio::Umts => place.umts += 1,
            Radio::Lte => place.lte += 1,
        }
        members.push(i);
    }
    places
}

fn check_hits(hits: &[GeocodeHit], towers: &[EnrichedTower]) -> Result<()> {
    if hits.len() != towers.len() {
        return Err(Error::Consistency(format!(
            "{} geocode hits for {} towers",
            hits.len(),
            towers.len()
        )));
    }
    Ok(())
}

/// Places with at least one tower and no LTE tower, sorted by name.
pub fn lte_gap_locations_from(
    hits: &[GeocodeHit],
    towers: &[EnrichedTower],
    g: &Gazetteer,
) -> Result<Vec<PlaceTowers>> {
    check_hits(hits, towers)?;
    let mut gaps: Vec<PlaceTowers> = group_by_place(hits, towers, g)
        .into_values()
        .map(|(p, _)| p)
        .filter(|p| p.lte == 0)
        .collect();
    gaps.sort_by(|a, b| a.name.cmp(&b.name).then_with(|| a.admin.cmp(&b.admin)));
    Ok(gaps)
}

/// Names of places whose towers include no LTE at all, alphabetically.
pub fn lte_gap_locations(towers: &[EnrichedTower], g: &Gazetteer) -> Result<Vec<String>> {
    let hits = geocode_towers(towers, g)?;
    Ok(lte_gap_locations_from(&hits, towers, g)?
        .into_iter()
        .map(|p| p.name)
        .collect())
}

/// How legacy tower densities are folded into one value per place.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum ZoneAggregation {
    #[default]
    Max,
    Mean,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DemandZone {
    pub name: String,
    pub admin: String,
    pub lat: f64,
    pub lon: f64,
    /// GSM + UMTS towers in the place.
    pub legacy_tower_count: usize,
    pub max_legacy_density: f64,
    pub mean_legacy_density: f64,
    pub lte_present: bool,
}

impl DemandZone {
    fn score(&self, agg: ZoneAggregation) -> f64 {
        match agg {
            ZoneAggregation::Max => self.max_legacy_density,
            ZoneAggregation::Mean => self.mean_legacy_density,
        }
    }
}

/// Places where legacy (GSM/UMTS) towers carry high signal density, ranked by
/// the aggregated legacy density, highest first (ties by name).
pub fn non4g_demand_zones_from(
    hits: &[GeocodeHit],
    towers: &[EnrichedTower],
    thresholds: &ThresholdSet,
    g: &Gazetteer,
    agg: ZoneAggregation,
) -> Result<Vec<DemandZone>> {
    check_hits(hits, towers)?;
    let mut zones = Vec::new();
    for (place, members) in group_by_place(hits, towers, g).into_values() {
        let legacy: Vec<f64> = members
            .iter()
            .map(|&i| &towers[i])
            .filter(|t| t.record.radio.is_legacy())
            .map(|t| t.signal_density)
            .collect();
        if legacy.is_empty() {
            continue;
        }
        let zone = DemandZone {
            name: place.name,
            admin: place.admin,
            lat: place.lat,
            lon: place.lon,
            legacy_tower_count: legacy.len(),
            max_legacy_density: legacy.iter().cloned().fold(f64::NEG_INFINITY, f64::max),
            mean_legacy_density: legacy.iter().sum::<f64>() / legacy.len() as f64,
            lte_present: place.lte > 0,
        };
        if zone.score(agg) > thresholds.high_density {
            zones.push(zone);
        }
    }
    zones.sort_by(|a, b| {
        b.score(agg)
            .total_cmp(&a.score(agg))
            .then_with(|| a.name.cmp(&b.name))
            .then_with(|| a.admin.cmp(&b.admin))
    });
    Ok(zones)
}

pub fn non4g_demand_zones(
    towers: &[EnrichedTower],
    thresholds: &ThresholdSet,
    g: &Gazetteer,
    agg: ZoneAggregation,
) -> Result<Vec<DemandZone>> {
    let hits = geocode_towers(towers, g)?;
    non4g_demand_zones_from(&hits, towers, thresholds, g, agg)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PriorityEntry {
    pub rank: usize,
    pub cluster_id: String,
    pub total_samples: u64,
    pub classification: TowerClass,
}

/// Over-utilized clusters by descending total samples (ties by id), top `n`.
pub fn priority_ranking(
    profiles: &[ClusterProfile],
    labels: &[TowerClass],
    n: usize,
) -> Result<Vec<PriorityEntry>> {
    if profiles.len() != labels.len() {
        return Err(Error::Consistency(format!(
            "{} cluster profiles but {} labels",
            profiles.len(),
            labels.len()
        )));
    }
    let mut over: Vec<(&ClusterProfile, TowerClass)> = profiles
        .iter()
        .zip(labels.iter().copied())
        .filter(|(_, l)| l.is_over_utilized())
        .collect();
    over.sort_by(|(a, _), (b, _)| {
        b.total_samples
            .cmp(&a.total_samples)
            .then_with(|| a.cluster_id.cmp(&b.cluster_id))
    });
    Ok(over
        .into_iter()
        .take(n)
        .enumerate()
        .map(|(i, (p, l))| PriorityEntry {
            rank: i + 1,
            cluster_id: p.cluster_id.clone(),
            total_samples: p.total_samples,
            classification: l,
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TechRow {
    pub radio: Radio,
    pub count: usize,
    /// Percent of all towers, rounded to one decimal.
    pub percentage: f64,
    /// `None` when there are no towers of this radio.
    pub mean_range_m: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TechDistribution {
    pub rows: Vec<TechRow>,
    pub total_count: usize,
    pub total_mean_range_m: f64,
}

fn round1(x: f64) -> f64 {
    (x * 10.0).round() / 10.0
}

/// Tower count, share and mean range per radio, in LTE/UMTS/GSM order.
pub fn tech_distribution(records: &[TowerRecord]) -> Result<TechDistribution> {
    if records.is_empty() {
        return Err(Error::EmptyInput {
            what: "record list",
        });
    }
    let total = records.len();
    let rows = [Radio::Lte, Radio::Umts, Radio::Gsm]
        .into_iter()
        .map(|radio| {
            let ranges: Vec<f64> = records
                .iter()
                .filter(|r| r.radio == radio)
                .map(|r| r.range_m as f64)
                .collect();
            TechRow {
                radio,
                count: ranges.len(),
                percentage: round1(ranges.len() as f64 / total as f64 * 100.0),
                mean_range_m: (!ranges.is_empty())
                    .then(|| ranges.iter().sum::<f64>() / ranges.len() as f64),
            }
        })
        .collect();
    Ok(TechDistribution {
        rows,
        total_count: total,
        total_mean_range_m: records.iter().map(|r| r.range_m as f64).sum::<f64>() / total as f64,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CellTraffic {
    pub cell: u64,
    pub samples: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BaselineResult {
    pub busiest_area: u64,
    pub area_total_samples: u64,
    pub top_cells: Vec<CellTraffic>,
}

/// Top `n_c` cells by samples inside the area code with the most samples.
/// Area ties go to the smaller code; cell ties to the smaller cell id.
pub fn netdatadrilling_baseline(records: &[TowerRecord], n_c: usize) -> Result<BaselineResult> {
    if records.is_empty() {
        return Err(Error::EmptyInput {
            what: "record list",
        });
    }
    if n_c == 0 {
        return Err(Error::InvalidArgument("N_c must be at least 1".into()));
    }
    let mut per_area: BTreeMap<u64, u64> = BTreeMap::new();
    for r in records {
        *per_area.entry(r.area).or_default() += r.samples;
    }
    // BTreeMap iterates ascending, so keeping only strictly larger sums
    // leaves the smallest code on ties.
    let (&busiest_area, &area_total_samples) = per_area
        .iter()
        .fold(None::<(&u64, &u64)>, |best, cur| match best {
            Some(b) if b.1 >= cur.1 => Some(b),
            _ => Some(cur),
        })
        .unwrap();
    let mut cells: Vec<CellTraffic> = records
        .iter()
        .filter(|r| r.area == busiest_area)
        .map(|r| CellTraffic {
            cell: r.cell,
            samples: r.samples,
        })
        .collect();
    cells.sort_by(|a, b| b.samples.cmp(&a.samples).then(a.cell.cmp(&b.cell)));
    cells.truncate(n_c);
    Ok(BaselineResult {
        busiest_area,
        area_total_samples,
        top_cells: cells,
    })
}
