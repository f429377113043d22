//! Pipeline stages and the assembled [`AnalysisReport`].
//!
//! Each stage produces one serializable section; the CLI subcommands print
//! single sections and `report` prints all of them together, so a full report
//! is exactly the composition of the per-stage outputs.

use std::collections::{BTreeMap, BTreeSet};
use std::io::Read;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::classifier::{
    predicate_counts, ClassificationSummary, Classifier, PredicateCounts, StrategicRule, TowerClass,
};
use crate::error::{Error, Result};
use crate::ingest::{parse_dataset, ColumnMapping, Radio, TowerRecord, ValidationReport};
use crate::metrics::{enrich, EnrichedTower, SECONDS_PER_DAY};
use crate::planning::{
    self, geocode_towers, high_range_low_usage, netdatadrilling_baseline, non4g_demand_zones_from,
    priority_ranking, tech_distribution, BaselineResult, DemandZone, PlaceTowers, PriorityEntry,
    TechDistribution, ZoneAggregation,
};
use crate::spatial::{cluster_towers, ClusterProfile, Gazetteer};
use crate::stats::{self, bonferroni, kruskal_wallis, mann_whitney_u, pearson, TestResult};
use crate::temporal::{
    freshness, monthly_counts, phase_compare, MonthRange, MonthlySeries, PhaseComparison, YearMonth,
};
use crate::thresholds::{
    compute_thresholds, resolve_thresholds, QuantileConfig, ThresholdOverrides, ThresholdSet,
};

/// Every tunable of a run. Echoed into the report header.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalysisConfig {
    pub quantiles: QuantileConfig,
    pub overrides: ThresholdOverrides,
    pub strategic: StrategicRule,
    pub clusters: usize,
    pub seed: u64,
    pub phase_a: MonthRange,
    pub phase_b: MonthRange,
    pub freshness_window_days: u32,
    pub top_cells: usize,
    pub priority_top_n: usize,
    pub zone_aggregation: ZoneAggregation,
    pub welch: bool,
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        Self {
            quantiles: QuantileConfig::default(),
            overrides: ThresholdOverrides::default(),
            strategic: StrategicRule::default(),
            clusters: 20,
            seed: 0,
            phase_a: MonthRange {
                start: YearMonth {
                    year: 2023,
                    month: 12,
                },
                end: YearMonth {
                    year: 2024,
                    month: 5,
                },
            },
            phase_b: MonthRange {
                start: YearMonth {
                    year: 2024,
                    month: 12,
                },
                end: YearMonth {
                    year: 2025,
                    month: 5,
                },
            },
            freshness_window_days: 365,
            top_cells: 10,
            priority_top_n: 3,
            zone_aggregation: ZoneAggregation::Max,
            welch: false,
        }
    }
}

/// Accepted records, their derived metrics and the ingest report.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub records: Vec<TowerRecord>,
    pub towers: Vec<EnrichedTower>,
    pub validation: ValidationReport,
}

impl Dataset {
    pub fn from_reader<R: Read>(source: R, mapping: &ColumnMapping) -> Result<Self> {
        let (records, validation) = parse_dataset(source, mapping)?;
        Self::from_records(records, validation)
    }

    pub fn from_records(records: Vec<TowerRecord>, validation: ValidationReport) -> Result<Self> {
        let towers = enrich(&records)?;
        Ok(Self {
            records,
            towers,
            validation,
        })
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetSummary {
    pub total_rows: usize,
    pub accepted: usize,
    pub quarantined: usize,
    pub quarantine_by_reason: BTreeMap<String, usize>,
    pub first_created_ts: i64,
    pub last_updated_ts: i64,
    /// Whole days from the earliest creation to the latest update.
    pub span_days: i64,
    pub distinct_mcc: usize,
    pub distinct_net: usize,
    pub distinct_area: usize,
}

pub fn dataset_summary(ds: &Dataset) -> Result<DatasetSummary> {
    if ds.is_empty() {
        return Err(Error::EmptyInput {
            what: "accepted record set",
        });
    }
    let first = ds.records.iter().map(|r| r.created_ts).min().unwrap();
    let last = ds.records.iter().map(|r| r.updated_ts).max().unwrap();
    let mut by_reason = BTreeMap::new();
    for q in &ds.validation.quarantined {
        *by_reason.entry(q.reason.to_string()).or_insert(0) += 1;
    }
    let distinct =
        |f: fn(&TowerRecord) -> u64| ds.records.iter().map(f).collect::<BTreeSet<_>>().len();
    Ok(DatasetSummary {
        total_rows: ds.validation.total_rows,
        accepted: ds.len(),
        quarantined: ds.validation.quarantined.len(),
        quarantine_by_reason: by_reason,
        first_created_ts: first,
        last_updated_ts: last,
        span_days: (last - first).div_euclid(SECONDS_PER_DAY),
        distinct_mcc: distinct(|r| r.mcc as u64),
        distinct_net: distinct(|r| r.net as u64),
        distinct_area: distinct(|r| r.area),
    })
}

/// One tower with its metrics and label.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TowerRow {
    pub radio: Radio,
    pub mcc: u32,
    pub net: u32,
    pub area: u64,
    pub cell: u64,
    pub lat: f64,
    pub lon: f64,
    pub range_m: u64,
    pub samples: u64,
    pub signal_density: f64,
    pub active_days: u64,
    pub classification: TowerClass,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassifySection {
    pub thresholds: ThresholdSet,
    pub summary: ClassificationSummary,
    pub predicate_counts: PredicateCounts,
    pub towers: Vec<TowerRow>,
}

impl ClassifySection {
    pub fn labels(&self) -> Vec<TowerClass> {
        self.towers.iter().map(|t| t.classification).collect()
    }
}

pub fn classify_section(ds: &Dataset, cfg: &AnalysisConfig) -> Result<ClassifySection> {
    let thresholds = resolve_thresholds(&ds.towers, &cfg.quantiles, &cfg.overrides)?;
    let classifier = Classifier::new(thresholds).with_strategic(cfg.strategic);
    let (labels, summary) = classifier.classify_all(&ds.towers);
    let towers = ds
        .towers
        .iter()
        .zip(&labels)
        .map(|(t, &classification)| {
            let r = &t.record;
            TowerRow {
                radio: r.radio,
                mcc: r.mcc,
                net: r.net,
                area: r.area,
                cell: r.cell,
                lat: r.lat,
                lon: r.lon,
                range_m: r.range_m,
                samples: r.samples,
                signal_density: t.signal_density,
                active_days: t.active_days,
                classification,
            }
        })
        .collect();
    Ok(ClassifySection {
        predicate_counts: predicate_counts(&ds.towers, &thresholds),
        thresholds,
        summary,
        towers,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassifiedCluster {
    #[serde(flatten)]
    pub profile: ClusterProfile,
    pub classification: TowerClass,
}

/// Over-utilized versus balanced clusters on one metric.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterContrast {
    pub metric: String,
    pub over_utilized_n: usize,
    pub balanced_n: usize,
    pub over_utilized_mean: Option<f64>,
    pub balanced_mean: Option<f64>,
    /// `None` when either group has fewer than two clusters or the data is degenerate.
    pub test: Option<TestResult>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterSection {
    pub k: usize,
    pub seed: u64,
    pub reference_lat: f64,
    pub iterations: usize,
    pub objective: f64,
    /// Thresholds recomputed over the cluster profiles.
    pub thresholds: ThresholdSet,
    pub summary: ClassificationSummary,
    pub clusters: Vec<ClassifiedCluster>,
    pub priority: Vec<PriorityEntry>,
    pub contrasts: Vec<ClusterContrast>,
}

impl ClusterSection {
    /// Cluster id of every tower, in tower order.
    pub fn tower_cluster_ids(&self, n_towers: usize) -> Result<Vec<String>> {
        let mut ids = vec![None; n_towers];
        for c in &self.clusters {
            for &m in &c.profile.members {
                let slot = ids.get_mut(m).ok_or_else(|| {
                    Error::Consistency(format!("cluster member {m} out of range"))
                })?;
                *slot = Some(c.profile.cluster_id.clone());
            }
        }
        ids.into_iter()
            .enumerate()
            .map(|(i, id)| {
                id.ok_or_else(|| Error::Consistency(format!("tower {i} has no cluster")))
            })
            .collect()
    }
}

fn mean_of(v: &[f64]) -> Option<f64> {
    (!v.is_empty()).then(|| v.iter().sum::<f64>() / v.len() as f64)
}

fn contrast(metric: &str, over: Vec<f64>, balanced: Vec<f64>, welch: bool) -> ClusterContrast {
    let test = if welch {
        stats::welch_t_test(&over, &balanced)
    } else {
        stats::pooled_t_test(&over, &balanced)
    };
    ClusterContrast {
        metric: metric.to_string(),
        over_utilized_n: over.len(),
        balanced_n: balanced.len(),
        over_utilized_mean: mean_of(&over),
        balanced_mean: mean_of(&balanced),
        test: test.ok(),
    }
}

pub fn cluster_section(ds: &Dataset, cfg: &AnalysisConfig) -> Result<ClusterSection> {
    let clustering = cluster_towers(&ds.towers, cfg.clusters, cfg.seed)?;
    let thresholds = compute_thresholds(&clustering.profiles, &cfg.quantiles)?;
    let classifier = Classifier::new(thresholds).with_strategic(cfg.strategic);
    let (labels, summary) = classifier.classify_all(&clustering.profiles);
    let priority = priority_ranking(&clustering.profiles, &labels, cfg.priority_top_n)?;

    let pick = |f: fn(&ClusterProfile) -> f64, want_over: bool| -> Vec<f64> {
        clustering
            .profiles
            .iter()
            .zip(&labels)
            .filter(|(_, l)| {
                if want_over {
                    l.is_over_utilized()
                } else {
                    **l == TowerClass::Balanced
                }
            })
            .map(|(p, _)| f(p))
            .collect()
    };
    let contrasts = vec![
        contrast(
            "mean_range_m",
            pick(|p| p.mean_range_m, true),
            pick(|p| p.mean_range_m, false),
            cfg.welch,
        ),
        contrast(
            "total_samples",
            pick(|p| p.total_samples as f64, true),
            pick(|p| p.total_samples as f64, false),
            cfg.welch,
        ),
    ];

    Ok(ClusterSection {
        k: cfg.clusters,
        seed: cfg.seed,
        reference_lat: clustering.reference_lat,
        iterations: clustering.iterations,
        objective: clustering.objective_history.last().copied().unwrap_or(0.0),
        thresholds,
        summary,
        clusters: clustering
            .profiles
            .into_iter()
            .zip(labels)
            .map(|(profile, classification)| ClassifiedCluster {
                profile,
                classification,
            })
            .collect(),
        priority,
        contrasts,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupSummary {
    pub name: String,
    pub n: usize,
    pub mean: f64,
    pub median: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairwiseComparison {
    pub a: String,
    pub b: String,
    pub result: TestResult,
}

/// Omnibus Kruskal-Wallis plus Bonferroni-adjusted pairwise Mann-Whitney.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupComparison {
    pub variable: String,
    pub groups: Vec<GroupSummary>,
    pub omnibus: Option<TestResult>,
    pub pairwise: Vec<PairwiseComparison>,
}

/// Runs the omnibus and post-hoc tests over the non-empty groups.
pub fn compare_groups(variable: &str, groups: Vec<(String, Vec<f64>)>) -> Result<GroupComparison> {
    let groups: Vec<(String, Vec<f64>)> =
        groups.into_iter().filter(|(_, v)| !v.is_empty()).collect();
    let summaries = groups
        .iter()
        .map(|(name, v)| {
            Ok(GroupSummary {
                name: name.clone(),
                n: v.len(),
                mean: v.iter().sum::<f64>() / v.len() as f64,
                median: crate::thresholds::quantile(v, 0.5)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let slices: Vec<&[f64]> = groups.iter().map(|(_, v)| v.as_slice()).collect();
    let omnibus = kruskal_wallis(&slices).ok();

    let mut pairwise = Vec::new();
    for i in 0..groups.len() {
        for j in i + 1..groups.len() {
            pairwise.push(PairwiseComparison {
                a: groups[i].0.clone(),
                b: groups[j].0.clone(),
                result: mann_whitney_u(&groups[i].1, &groups[j].1)?,
            });
        }
    }
    let raw: Vec<f64> = pairwise.iter().map(|p| p.result.p_value).collect();
    for (p, adj) in pairwise.iter_mut().zip(bonferroni(&raw)?) {
        p.result.p_adjusted = Some(adj);
    }
    Ok(GroupComparison {
        variable: variable.to_string(),
        groups: summaries,
        omnibus,
        pairwise,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StatsSection {
    pub technology: TechDistribution,
    pub range_by_radio: GroupComparison,
    pub samples_by_radio: GroupComparison,
    pub samples_by_classification: GroupComparison,
    /// Range versus samples; `None` when fewer than 3 towers or no variance.
    pub range_samples_correlation: Option<TestResult>,
}

pub fn stats_section(ds: &Dataset, labels: &[TowerClass]) -> Result<StatsSection> {
    if labels.len() != ds.len() {
        return Err(Error::Consistency(format!(
            "{} labels for {} towers",
            labels.len(),
            ds.len()
        )));
    }
    let by_radio = |f: fn(&TowerRecord) -> f64| -> Vec<(String, Vec<f64>)> {
        Radio::ALL
            .iter()
            .map(|&radio| {
                let v = ds
                    .records
                    .iter()
                    .filter(|r| r.radio == radio)
                    .map(f)
                    .collect();
                (radio.to_string(), v)
            })
            .collect()
    };
    let by_class: Vec<(String, Vec<f64>)> = TowerClass::ALL
        .iter()
        .map(|&c| {
            let v = ds
                .records
                .iter()
                .zip(labels)
                .filter(|(_, l)| **l == c)
                .map(|(r, _)| r.samples as f64)
                .collect();
            (c.to_string(), v)
        })
        .collect();
    let range: Vec<f64> = ds.records.iter().map(|r| r.range_m as f64).collect();
    let samples: Vec<f64> = ds.records.iter().map(|r| r.samples as f64).collect();
    Ok(StatsSection {
        technology: tech_distribution(&ds.records)?,
        range_by_radio: compare_groups("range_m", by_radio(|r| r.range_m as f64))?,
        samples_by_radio: compare_groups("samples", by_radio(|r| r.samples as f64))?,
        samples_by_classification: compare_groups("samples", by_class)?,
        range_samples_correlation: pearson(&range, &samples).ok(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TemporalSection {
    pub series: MonthlySeries,
    pub phases: PhaseComparison,
    pub freshness_window_days: u32,
    pub freshness: f64,
}

pub fn temporal_section(ds: &Dataset, cfg: &AnalysisConfig) -> Result<TemporalSection> {
    let series = monthly_counts(&ds.records)?;
    let phases = phase_compare(&series, cfg.phase_a, cfg.phase_b)?;
    Ok(TemporalSection {
        freshness: freshness(&ds.records, cfg.freshness_window_days)?,
        freshness_window_days: cfg.freshness_window_days,
        series,
        phases,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZonesSection {
    pub zone_aggregation: ZoneAggregation,
    pub high_range_low_usage_count: usize,
    pub high_range_low_usage_share: f64,
    pub demand_zones: Vec<DemandZone>,
    pub lte_gaps: Vec<PlaceTowers>,
}

pub fn zones_section(
    ds: &Dataset,
    thresholds: &ThresholdSet,
    g: &Gazetteer,
    cfg: &AnalysisConfig,
) -> Result<ZonesSection> {
    let hits = geocode_towers(&ds.towers, g)?;
    let hrlu = high_range_low_usage(&ds.towers, &cfg.strategic).len();
    Ok(ZonesSection {
        zone_aggregation: cfg.zone_aggregation,
        high_range_low_usage_count: hrlu,
        high_range_low_usage_share: if ds.is_empty() {
            0.0
        } else {
            hrlu as f64 / ds.len() as f64
        },
        demand_zones: non4g_demand_zones_from(
            &hits,
            &ds.towers,
            thresholds,
            g,
            cfg.zone_aggregation,
        )?,
        lte_gaps: planning::lte_gap_locations_from(&hits, &ds.towers, g)?,
    })
}

pub fn baseline_section(ds: &Dataset, cfg: &AnalysisConfig) -> Result<BaselineResult> {
    netdatadrilling_baseline(&ds.records, cfg.top_cells)
}

/// Everything a run produces.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalysisReport {
    pub generator: String,
    pub config: AnalysisConfig,
    pub dataset: DatasetSummary,
    pub validation: ValidationReport,
    pub classification: ClassifySection,
    pub clusters: ClusterSection,
    pub statistics: StatsSection,
    pub temporal: TemporalSection,
    pub zones: ZonesSection,
    pub baseline: BaselineResult,
}

/// The stage outputs `build_report` stitches together.
#[derive(Debug, Clone)]
pub struct StageOutputs {
    pub dataset: DatasetSummary,
    pub validation: ValidationReport,
    pub classification: ClassifySection,
    pub clusters: ClusterSection,
    pub statistics: StatsSection,
    pub temporal: TemporalSection,
    pub zones: ZonesSection,
    pub baseline: BaselineResult,
}

/// Assembles the report, refusing stage outputs that disagree on the
/// number of accepted towers.
pub fn build_report(config: AnalysisConfig, s: StageOutputs) -> Result<AnalysisReport> {
    let n = s.dataset.accepted;
    let member_sum: usize = s
        .clusters
        .clusters
        .iter()
        .map(|c| c.profile.member_count)
        .sum();
    let checks: [(&str, usize); 7] = [
        ("validation accepted count", s.validation.accepted_count),
        ("classified towers", s.classification.towers.len()),
        (
            "classification summary total",
            s.classification.summary.total,
        ),
        ("cluster members", member_sum),
        (
            "technology distribution total",
            s.statistics.technology.total_count,
        ),
        ("monthly series total", s.temporal.series.total() as usize),
        (
            "towers per radio",
            s.statistics.range_by_radio.groups.iter().map(|g| g.n).sum(),
        ),
    ];
    for (what, got) in checks {
        if got != n {
            return Err(Error::Consistency(format!(
                "{what} is {got} but the dataset has {n} accepted records"
            )));
        }
    }
    if s.validation.accepted_count + s.validation.quarantined.len() != s.validation.total_rows {
        return Err(Error::Consistency("validation rows do not add up".into()));
    }
    s.clusters.tower_cluster_ids(n)?;
    Ok(AnalysisReport {
        generator: "celltriage".to_string(),
        config,
        dataset: s.dataset,
        validation: s.validation,
        classification: s.classification,
        clusters: s.clusters,
        statistics: s.statistics,
        temporal: s.temporal,
        zones: s.zones,
        baseline: s.baseline,
    })
}

/// Runs every stage on one dataset and builds the report.
pub fn run_analysis(
    ds: &Dataset,
    gazetteer: &Gazetteer,
    cfg: &AnalysisConfig,
) -> Result<AnalysisReport> {
    let classification = classify_section(ds, cfg)?;
    let statistics = stats_section(ds, &classification.labels())?;
    let zones = zones_section(ds, &classification.thresholds, gazetteer, cfg)?;
    build_report(
        cfg.clone(),
        StageOutputs {
            dataset: dataset_summary(ds)?,
            validation: ds.validation.clone(),
            clusters: cluster_section(ds, cfg)?,
            temporal: temporal_section(ds, cfg)?,
            baseline: baseline_section(ds, cfg)?,
            classification,
            statistics,
            zones,
        },
    )
}

/// Rounds a real to 6 significant digits.
pub fn round_sig6(x: f64) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return x;
    }
    format!("{x:.5e}").parse().unwrap_or(x)
}

fn canonicalize(v: &mut Value) {
    match v {
        Value::Number(n) if n.is_f64() => {
            let x = n.as_f64().unwrap();
            if let Some(r) = serde_json::Number::from_f64(round_sig6(x)) {
                *n = r;
            }
        }
        Value::Array(items) => items.iter_mut().for_each(canonicalize),
        Value::Object(map) => map.values_mut().for_each(canonicalize),
        _ => {}
    }
}

/// Canonical JSON: sorted keys, reals at 6 significant digits, exact
/// integers, pretty-printed with a trailing newline.
pub fn to_canonical_json<T: Serialize>(value: &T) -> Result<String> {
    let mut v = serde_json::to_value(value)?;
    canonicalize(&mut v);
    let mut s = serde_json::to_string_pretty(&v)?;
    s.push('\n');
    Ok(s)
}
