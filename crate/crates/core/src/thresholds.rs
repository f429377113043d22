//! Quantile-derived decision thresholds.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metrics::UtilizationKpis;

/// Type-7 quantile (linear interpolation between order statistics at
/// `h = (n - 1) * q`). Input order does not matter.
pub fn quantile(values: &[f64], q: f64) -> Result<f64> {
    if values.is_empty() {
        return Err(Error::EmptyInput {
            what: "quantile input",
        });
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    quantile_sorted(&sorted, q)
}

/// Same as [`quantile`] but the caller guarantees `sorted` is ascending.
pub fn quantile_sorted(sorted: &[f64], q: f64) -> Result<f64> {
    if sorted.is_empty() {
        return Err(Error::EmptyInput {
            what: "quantile input",
        });
    }
    if !(0.0..=1.0).contains(&q) {
        return Err(Error::InvalidArgument(format!(
            "quantile level {q} outside [0, 1]"
        )));
    }
    let h = (sorted.len() - 1) as f64 * q;
    let lo = h.floor() as usize;
    if lo + 1 >= sorted.len() {
        return Ok(sorted[sorted.len() - 1]);
    }
    let frac = h - lo as f64;
    Ok(sorted[lo] + frac * (sorted[lo + 1] - sorted[lo]))
}

/// Quantile levels used to derive a [`ThresholdSet`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuantileConfig {
    pub q_high: f64,
    pub q_low: f64,
    pub q_long: f64,
}

impl Default for QuantileConfig {
    fn default() -> Self {
        Self {
            q_high: 0.90,
            q_low: 0.10,
            q_long: 0.75,
        }
    }
}

impl QuantileConfig {
    pub fn validate(&self) -> Result<()> {
        let ok = self.q_high > 0.0
            && self.q_high <= 1.0
            && self.q_low >= 0.0
            && self.q_low < 1.0
            && self.q_long > 0.0
            && self.q_long <= 1.0
            && self.q_low < self.q_high;
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidArgument(format!(
                "invalid quantile levels: high={} low={} long={}",
                self.q_high, self.q_low, self.q_long
            )))
        }
    }
}

/// The five cut-points of the utilization classifier.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThresholdSet {
    pub high_samples: f64,
    pub low_samples: f64,
    pub high_density: f64,
    pub low_density: f64,
    pub long_active: f64,
}

impl ThresholdSet {
    pub fn validate(&self) -> Result<()> {
        let all = [
            self.high_samples,
            self.low_samples,
            self.high_density,
            self.low_density,
            self.long_active,
        ];
        if all.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::InvalidArgument(format!(
                "thresholds must be finite and non-negative: {self:?}"
            )));
        }
        if self.high_samples < self.low_samples || self.high_density < self.low_density {
            return Err(Error::InvalidArgument(format!(
                "high thresholds must not be below low thresholds: {self:?}"
            )));
        }
        Ok(())
    }
}

/// Explicit values that replace individual quantile-derived thresholds.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct ThresholdOverrides {
    pub high_samples: Option<f64>,
    pub low_samples: Option<f64>,
    pub high_density: Option<f64>,
    pub low_density: Option<f64>,
    pub long_active: Option<f64>,
}

impl ThresholdOverrides {
    pub fn is_complete(&self) -> bool {
        self.high_samples.is_some()
            && self.low_samples.is_some()
            && self.high_density.is_some()
            && self.low_density.is_some()
            && self.long_active.is_some()
    }

    pub fn apply(&self, base: ThresholdSet) -> Result<ThresholdSet> {
        let t = ThresholdSet {
            high_samples: self.high_samples.unwrap_or(base.high_samples),
            low_samples: self.low_samples.unwrap_or(base.low_samples),
            high_density: self.high_density.unwrap_or(base.high_density),
            low_density: self.low_density.unwrap_or(base.low_density),
            long_active: self.long_active.unwrap_or(base.long_active),
        };
        t.validate()?;
        Ok(t)
    }
}

/// Derives thresholds from the whole population passed in.
///
/// Works for towers and for cluster profiles alike; each metric is taken
/// over every item.
pub fn compute_thresholds<K: UtilizationKpis>(
    items: &[K],
    config: &QuantileConfig,
) -> Result<ThresholdSet> {
    if items.is_empty() {
        return Err(Error::EmptyInput {
            what: "threshold population",
        });
    }
    config.validate()?;
    let sorted = |f: fn(&K) -> f64| {
        let mut v: Vec<f64> = items.iter().map(f).collect();
        v.sort_by(f64::total_cmp);
        v
    };
    let samples = sorted(K::samples);
    let density = sorted(K::signal_density);
    let active = sorted(K::active_days);
    let t = ThresholdSet {
        high_samples: quantile_sorted(&samples, config.q_high)?,
        low_samples: quantile_sorted(&samples, config.q_low)?,
        high_density: quantile_sorted(&density, config.q_high)?,
        low_density: quantile_sorted(&density, config.q_low)?,
        long_active: quantile_sorted(&active, config.q_long)?,
    };
    t.validate()?;
    Ok(t)
}

/// Threshold derivation honoring any explicit overrides. A complete set of
/// overrides skips the quantile computation entirely.
pub fn resolve_thresholds<K: UtilizationKpis>(
    items: &[K],
    config: &QuantileConfig,
    overrides: &ThresholdOverrides,
) -> Result<ThresholdSet> {
    if overrides.is_complete() {
        let zero = ThresholdSet {
            high_samples: 0.0,
            low_samples: 0.0,
            high_density: 0.0,
            low_density: 0.0,
            long_active: 0.0,
        };
        return overrides.apply(zero);
    }
    overrides.apply(compute_thresholds(items, config)?)
}
