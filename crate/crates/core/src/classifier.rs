//! Five-way utilization classifier.
//!
//! Branches are evaluated in a fixed order and the first match wins:
//!
//! 1. `s > T_H(s)` and `rho > T_H(rho)` -> over-utilized, high traffic and density
//! 2. `rho > T_H(rho)` -> over-utilized, localized congestion
//! 3. `s < T_L(s)` and `rho < T_L(rho)` and `a > T_long(a)` -> under-utilized
//! 4. `r >= 1000 m` and `s <= 1` -> strategic coverage
//! 5. otherwise balanced
//!
//! Boundary equality never satisfies a strict comparison.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::metrics::UtilizationKpis;
use crate::thresholds::ThresholdSet;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TowerClass {
    OverUtilizedHighTrafficDensity,
    OverUtilizedLocalizedCongestion,
    UnderUtilizedInefficient,
    StrategicCoverage,
    Balanced,
}

impl TowerClass {
    /// All labels in branch order.
    pub const ALL: [TowerClass; 5] = [
        TowerClass::OverUtilizedHighTrafficDensity,
        TowerClass::OverUtilizedLocalizedCongestion,
        TowerClass::UnderUtilizedInefficient,
        TowerClass::StrategicCoverage,
        TowerClass::Balanced,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            TowerClass::OverUtilizedHighTrafficDensity => "over_utilized_high_traffic_density",
            TowerClass::OverUtilizedLocalizedCongestion => "over_utilized_localized_congestion",
            TowerClass::UnderUtilizedInefficient => "under_utilized_inefficient",
            TowerClass::StrategicCoverage => "strategic_coverage",
            TowerClass::Balanced => "balanced",
        }
    }

    pub fn is_over_utilized(self) -> bool {
        matches!(
            self,
            TowerClass::OverUtilizedHighTrafficDensity
                | TowerClass::OverUtilizedLocalizedCongestion
        )
    }
}

impl fmt::Display for TowerClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Wide-radius, near-zero-usage cut-offs for the strategic coverage branch.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StrategicRule {
    /// Inclusive lower bound on range.
    pub min_range_m: f64,
    /// Inclusive upper bound on samples.
    pub max_samples: f64,
}

impl StrategicRule {
    pub const DEFAULT_MIN_RANGE_M: f64 = 1000.0;
    pub const DEFAULT_MAX_SAMPLES: f64 = 1.0;

    pub fn matches(&self, range_m: f64, samples: f64) -> bool {
        range_m >= self.min_range_m && samples <= self.max_samples
    }
}

impl Default for StrategicRule {
    fn default() -> Self {
        Self {
            min_range_m: Self::DEFAULT_MIN_RANGE_M,
            max_samples: Self::DEFAULT_MAX_SAMPLES,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Classifier {
    pub thresholds: ThresholdSet,
    pub strategic: StrategicRule,
}

impl Classifier {
    pub fn new(thresholds: ThresholdSet) -> Self {
        Self {
            thresholds,
            strategic: StrategicRule::default(),
        }
    }

    pub fn with_strategic(mut self, strategic: StrategicRule) -> Self {
        self.strategic = strategic;
        self
    }

    pub fn classify<K: UtilizationKpis + ?Sized>(&self, item: &K) -> TowerClass {
        let t = &self.thresholds;
        let s = item.samples();
        let rho = item.signal_density();
        if s > t.high_samples && rho > t.high_density {
            TowerClass::OverUtilizedHighTrafficDensity
        } else if rho > t.high_density {
            TowerClass::OverUtilizedLocalizedCongestion
        } else if s < t.low_samples && rho < t.low_density && item.active_days() > t.long_active {
            TowerClass::UnderUtilizedInefficient
        } else if self.strategic.matches(item.range_m(), s) {
            TowerClass::StrategicCoverage
        } else {
            TowerClass::Balanced
        }
    }

    /// Labels every item in input order.
    pub fn classify_all<K: UtilizationKpis + Sync>(
        &self,
        items: &[K],
    ) -> (Vec<TowerClass>, ClassificationSummary) {
        let labels: Vec<TowerClass> = items.iter().map(|t| self.classify(t)).collect();
        let summary = ClassificationSummary::from_labels(&labels);
        (labels, summary)
    }
}

/// Classifies one tower with the default strategic rule.
pub fn classify_tower<K: UtilizationKpis + ?Sized>(
    item: &K,
    thresholds: &ThresholdSet,
) -> TowerClass {
    Classifier::new(*thresholds).classify(item)
}

/// Per-label counts. Every label is present, zero-filled.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassificationSummary {
    pub counts: BTreeMap<TowerClass, usize>,
    pub total: usize,
}

impl ClassificationSummary {
    pub fn from_labels(labels: &[TowerClass]) -> Self {
        let mut counts: BTreeMap<TowerClass, usize> =
            TowerClass::ALL.iter().map(|&c| (c, 0)).collect();
        for l in labels {
            *counts.entry(*l).or_default() += 1;
        }
        Self {
            counts,
            total: labels.len(),
        }
    }

    pub fn count(&self, class: TowerClass) -> usize {
        self.counts.get(&class).copied().unwrap_or(0)
    }
}

/// Raw predicate hit counts, independent of branch precedence.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PredicateCounts {
    /// `s > T_H(s)`
    pub high_samples: usize,
    /// `rho > T_H(rho)`
    pub high_density: usize,
    /// `s < T_L(s)` and `rho < T_L(rho)` and `a > T_long(a)`
    pub strict_under_utilized: usize,
}

pub fn predicate_counts<K: UtilizationKpis>(items: &[K], t: &ThresholdSet) -> PredicateCounts {
    let mut out = PredicateCounts {
        high_samples: 0,
        high_density: 0,
        strict_under_utilized: 0,
    };
    for k in items {
        out.high_samples += (k.samples() > t.high_samples) as usize;
        out.high_density += (k.signal_density() > t.high_density) as usize;
        out.strict_under_utilized += (k.samples() < t.low_samples
            && k.signal_density() < t.low_density
            && k.active_days() > t.long_active) as usize;
    }
    out
}
