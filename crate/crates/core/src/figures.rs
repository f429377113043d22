//! Plot-ready data series projected from an [`AnalysisReport`].

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::classifier::TowerClass;
use crate::error::{Error, Result};
use crate::ingest::Radio;
use crate::report::{AnalysisReport, ClusterSection, TowerRow, ZonesSection};
use crate::thresholds::quantile_sorted;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FiveNumber {
    pub min: f64,
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    pub max: f64,
}

/// Box-plot summary using type-7 quantiles.
pub fn five_number(values: &[f64]) -> Result<FiveNumber> {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    Ok(FiveNumber {
        min: quantile_sorted(&v, 0.0)?,
        q1: quantile_sorted(&v, 0.25)?,
        median: quantile_sorted(&v, 0.5)?,
        q3: quantile_sorted(&v, 0.75)?,
        max: quantile_sorted(&v, 1.0)?,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonthlyPoint {
    pub year: i32,
    pub month: u32,
    pub count: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadioBox {
    pub radio: Radio,
    pub variable: String,
    pub n: usize,
    #[serde(flatten)]
    pub stats: FiveNumber,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScatterPoint {
    pub samples: u64,
    pub signal_density: f64,
    pub classification: TowerClass,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabelLoad {
    pub classification: TowerClass,
    pub n: usize,
    pub mean_samples: Option<f64>,
    /// Sample (n - 1) standard deviation; `None` below two towers.
    pub sd_samples: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabelShare {
    pub classification: TowerClass,
    pub count: usize,
    pub percentage: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum FigureData {
    /// Monthly update counts.
    MonthlyUpdates(Vec<MonthlyPoint>),
    /// Per-radio box statistics for range and samples.
    RadioBoxes(Vec<RadioBox>),
    /// Samples versus signal density per tower.
    DensityScatter(Vec<ScatterPoint>),
    /// Cluster centroids and towers as a GeoJSON FeatureCollection.
    ClusterMap(Value),
    /// Mean and standard deviation of samples per label.
    LoadByLabel(Vec<LabelLoad>),
    /// Counts and shares per label.
    LabelShares(Vec<LabelShare>),
}

impl FigureData {
    pub fn to_json(&self) -> Result<Value> {
        Ok(match self {
            FigureData::MonthlyUpdates(v) => serde_json::to_value(v)?,
            FigureData::RadioBoxes(v) => serde_json::to_value(v)?,
            FigureData::DensityScatter(v) => serde_json::to_value(v)?,
            FigureData::ClusterMap(v) => v.clone(),
            FigureData::LoadByLabel(v) => serde_json::to_value(v)?,
            FigureData::LabelShares(v) => serde_json::to_value(v)?,
        })
    }

    /// CSV rendering; the map figure has no tabular form.
    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let opt = |x: Option<f64>| x.map(|v| v.to_string()).unwrap_or_default();
        match self {
            FigureData::MonthlyUpdates(rows) => {
                w.write_record(["year", "month", "count"])?;
                for r in rows {
                    w.write_record([r.year.to_string(), r.month.to_string(), r.count.to_string()])?;
                }
            }
            FigureData::RadioBoxes(rows) => {
                w.write_record(["radio", "variable", "n", "min", "q1", "median", "q3", "max"])?;
                for r in rows {
                    let s = &r.stats;
                    w.write_record([
                        r.radio.to_string(),
                        r.variable.clone(),
                        r.n.to_string(),
                        s.min.to_string(),
                        s.q1.to_string(),
                        s.median.to_string(),
                        s.q3.to_string(),
                        s.max.to_string(),
                    ])?;
                }
            }
            FigureData::DensityScatter(rows) => {
                w.write_record(["samples", "signal_density", "classification"])?;
                for r in rows {
                    w.write_record([
                        r.samples.to_string(),
                        r.signal_density.to_string(),
                        r.classification.to_string(),
                    ])?;
                }
            }
            FigureData::ClusterMap(_) => {
                return Err(Error::InvalidArgument(
                    "figure 4 is GeoJSON only; use --format geojson or json".into(),
                ))
            }
            FigureData::LoadByLabel(rows) => {
                w.write_record(["classification", "n", "mean_samples", "sd_samples"])?;
                for r in rows {
                    w.write_record([
                        r.classification.to_string(),
                        r.n.to_string(),
                        opt(r.mean_samples),
                        opt(r.sd_samples),
                    ])?;
                }
            }
            FigureData::LabelShares(rows) => {
                w.write_record(["classification", "count", "percentage"])?;
                for r in rows {
                    w.write_record([
                        r.classification.to_string(),
                        r.count.to_string(),
                        r.percentage.to_string(),
                    ])?;
                }
            }
        }
        let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
        Ok(String::from_utf8(bytes).expect("csv output is UTF-8"))
    }
}

fn point(lon: f64, lat: f64, properties: Value) -> Value {
    json!({
        "type": "Feature",
        "geometry": { "type": "Point", "coordinates": [lon, lat] },
        "properties": properties,
    })
}

/// Cluster centroids followed by every tower, tagged with `kind`.
pub fn cluster_geojson(clusters: &ClusterSection, towers: &[TowerRow]) -> Result<Value> {
    let ids = clusters.tower_cluster_ids(towers.len())?;
    let mut features: Vec<Value> = clusters
        .clusters
        .iter()
        .map(|c| {
            let p = &c.profile;
            point(
                p.centroid_lon,
                p.centroid_lat,
                json!({
                    "kind": "cluster",
                    "cluster_id": p.cluster_id,
                    "classification": c.classification,
                    "total_samples": p.total_samples,
                    "mean_range_m": p.mean_range_m,
                    "member_count": p.member_count,
                }),
            )
        })
        .collect();
    features.extend(towers.iter().zip(ids).map(|(t, id)| {
        point(
            t.lon,
            t.lat,
            json!({
                "kind": "tower",
                "cell": t.cell,
                "classification": t.classification,
                "cluster_id": id,
            }),
        )
    }));
    Ok(json!({ "type": "FeatureCollection", "features": features }))
}

/// Demand zones and LTE-gap places as GeoJSON points at the gazetteer location.
pub fn zones_geojson(zones: &ZonesSection) -> Value {
    let mut features: Vec<Value> = zones
        .demand_zones
        .iter()
        .map(|z| {
            point(
                z.lon,
                z.lat,
                json!({
                    "kind": "demand_zone",
                    "name": z.name,
                    "admin": z.admin,
                    "legacy_tower_count": z.legacy_tower_count,
                    "max_legacy_density": z.max_legacy_density,
                    "mean_legacy_density": z.mean_legacy_density,
                    "lte_present": z.lte_present,
                }),
            )
        })
        .collect();
    features.extend(zones.lte_gaps.iter().map(|p| {
        point(
            p.lon,
            p.lat,
            json!({
                "kind": "lte_gap",
                "name": p.name,
                "admin": p.admin,
                "gsm": p.gsm,
                "umts": p.umts,
                "lte": p.lte,
            }),
        )
    }));
    json!({ "type": "FeatureCollection", "features": features })
}

fn radio_boxes(towers: &[TowerRow]) -> Result<Vec<RadioBox>> {
    let mut out = Vec::new();
    for radio in Radio::ALL {
        let members: Vec<&TowerRow> = towers.iter().filter(|t| t.radio == radio).collect();
        if members.is_empty() {
            continue;
        }
        for (variable, values) in [
            (
                "range_m",
                members.iter().map(|t| t.range_m as f64).collect::<Vec<_>>(),
            ),
            (
                "samples",
                members.iter().map(|t| t.samples as f64).collect(),
            ),
        ] {
            out.push(RadioBox {
                radio,
                variable: variable.to_string(),
                n: values.len(),
                stats: five_number(&values)?,
            });
        }
    }
    Ok(out)
}

fn load_by_label(towers: &[TowerRow]) -> Vec<LabelLoad> {
    TowerClass::ALL
        .iter()
        .map(|&c| {
            let v: Vec<f64> = towers
                .iter()
                .filter(|t| t.classification == c)
                .map(|t| t.samples as f64)
                .collect();
            let n = v.len();
            let mean = (n > 0).then(|| v.iter().sum::<f64>() / n as f64);
            let sd = mean.filter(|_| n > 1).map(|m| {
                (v.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (n - 1) as f64).sqrt()
            });
            LabelLoad {
                classification: c,
                n,
                mean_samples: mean,
                sd_samples: sd,
            }
        })
        .collect()
}

/// Projects the data series behind figure `id` (1-6) out of the report.
pub fn emit_figure_data(report: &AnalysisReport, id: u8) -> Result<FigureData> {
    let towers = &report.classification.towers;
    Ok(match id {
        1 => FigureData::MonthlyUpdates(
            report
                .temporal
                .series
                .buckets
                .iter()
                .map(|b| MonthlyPoint {
                    year: b.year,
                    month: b.month,
                    count: b.count,
                })
                .collect(),
        ),
        2 => FigureData::RadioBoxes(radio_boxes(towers)?),
        3 => FigureData::DensityScatter(
            towers
                .iter()
                .map(|t| ScatterPoint {
                    samples: t.samples,
                    signal_density: t.signal_density,
                    classification: t.classification,
                })
                .collect(),
        ),
        4 => FigureData::ClusterMap(cluster_geojson(&report.clusters, towers)?),
        5 => FigureData::LoadByLabel(load_by_label(towers)),
        6 => {
            let s = &report.classification.summary;
            FigureData::LabelShares(
                TowerClass::ALL
                    .iter()
                    .map(|&c| LabelShare {
                        classification: c,
                        count: s.count(c),
                        percentage: if s.total == 0 {
                            0.0
                        } else {
                            s.count(c) as f64 / s.total as f64 * 100.0
                        },
                    })
                    .collect(),
            )
        }
        other => return Err(Error::UnknownFigure(other)),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn five_number_on_one_to_five() {
        let f = five_number(&[5.0, 3.0, 1.0, 4.0, 2.0]).unwrap();
        assert_eq!(
            f,
            FiveNumber {
                min: 1.0,
                q1: 2.0,
                median: 3.0,
                q3: 4.0,
                max: 5.0
            }
        );
        assert!(five_number(&[]).is_err());
    }

    fn row(samples: u64, classification: TowerClass) -> TowerRow {
        TowerRow {
            radio: Radio::Lte,
            mcc: 410,
            net: 1,
            area: 1,
            cell: samples,
            lat: 0.0,
            lon: 0.0,
            range_m: 100,
            samples,
            signal_density: samples as f64 / 100.0,
            active_days: 0,
            classification,
        }
    }

    #[test]
    fn load_by_label_uses_sample_sd() {
        let towers = [
            row(2, TowerClass::Balanced),
            row(4, TowerClass::Balanced),
            row(9, TowerClass::Balanced),
            row(7, TowerClass::StrategicCoverage),
        ];
        let l = load_by_label(&towers);
        let b = l
            .iter()
            .find(|x| x.classification == TowerClass::Balanced)
            .unwrap();
        assert_eq!(b.mean_samples, Some(5.0));
        // deviations -3, -1, 4 -> 26 / 2
        assert!((b.sd_samples.unwrap() - 13f64.sqrt()).abs() < 1e-12);
        let s = l
            .iter()
            .find(|x| x.classification == TowerClass::StrategicCoverage)
            .unwrap();
        assert_eq!((s.n, s.sd_samples), (1, None));
        let u = l
            .iter()
            .find(|x| x.classification == TowerClass::UnderUtilizedInefficient)
            .unwrap();
        assert_eq!((u.n, u.mean_samples), (0, None));
    }

    #[test]
    fn csv_rendering() {
        let f = FigureData::MonthlyUpdates(vec![MonthlyPoint {
            year: 2025,
            month: 4,
            count: 384,
        }]);
        assert_eq!(f.to_csv().unwrap(), "year,month,count\n2025,4,384\n");
        assert!(FigureData::ClusterMap(json!({})).to_csv().is_err());
    }
}
