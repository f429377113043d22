//! Per-tower derived metrics: signal density and active days.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingest::TowerRecord;

pub const SECONDS_PER_DAY: i64 = 86_400;

/// Samples per meter of coverage range.
pub fn signal_density(samples: u64, range_m: u64) -> Result<f64> {
    if range_m == 0 {
        return Err(Error::NonPositiveRange(range_m));
    }
    Ok(samples as f64 / range_m as f64)
}

/// Whole days between first and last observation, floored.
pub fn active_days(created_ts: i64, updated_ts: i64) -> Result<u64> {
    if updated_ts < created_ts {
        return Err(Error::TimestampOrder {
            created: created_ts,
            updated: updated_ts,
        });
    }
    Ok(((updated_ts - created_ts) / SECONDS_PER_DAY) as u64)
}

/// The four quantities the utilization classifier looks at.
///
/// Implemented by single towers and by cluster aggregates so both can run
/// through the same decision logic and threshold derivation.
pub trait UtilizationKpis {
    fn samples(&self) -> f64;
    fn signal_density(&self) -> f64;
    fn active_days(&self) -> f64;
    fn range_m(&self) -> f64;
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnrichedTower {
    pub record: TowerRecord,
    pub signal_density: f64,
    pub active_days: u64,
}

impl EnrichedTower {
    pub fn new(record: TowerRecord) -> Result<Self> {
        let signal_density = signal_density(record.samples, record.range_m)?;
        let active_days = active_days(record.created_ts, record.updated_ts)?;
        Ok(Self {
            record,
            signal_density,
            active_days,
        })
    }
}

impl UtilizationKpis for EnrichedTower {
    fn samples(&self) -> f64 {
        self.record.samples as f64
    }
    fn signal_density(&self) -> f64 {
        self.signal_density
    }
    fn active_days(&self) -> f64 {
        self.active_days as f64
    }
    fn range_m(&self) -> f64 {
        self.record.range_m as f64
    }
}

/// Attaches derived metrics to every record, preserving order.
pub fn enrich(records: &[TowerRecord]) -> Result<Vec<EnrichedTower>> {
    records.iter().cloned().map(EnrichedTower::new).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::Radio;
    use proptest::prelude::*;

    pub(crate) fn record(samples: u64, range_m: u64) -> TowerRecord {
        TowerRecord {
            radio: Radio::Lte,
            mcc: 410,
            net: 1,
            area: 1,
            cell: 1,
            lat: 30.0,
            lon: 70.0,
            range_m,
            samples,
            created_ts: 1_700_000_000,
            updated_ts: 1_700_000_000,
        }
    }

    #[test]
    fn density_examples() {
        assert_eq!(signal_density(55, 1000).unwrap(), 0.055);
        assert_eq!(signal_density(0, 2000).unwrap(), 0.0);
        assert!(matches!(
            signal_density(100, 0),
            Err(Error::NonPositiveRange(0))
        ));
    }

    #[test]
    fn active_day_examples() {
        assert_eq!(active_days(1_700_000_000, 1_700_000_000).unwrap(), 0);
        assert_eq!(active_days(1_700_000_000, 1_700_086_400).unwrap(), 1);
        assert_eq!(active_days(1_700_000_000, 1_700_086_399).unwrap(), 0);
        assert!(active_days(10, 9).is_err());
    }

    #[test]
    fn enrich_examples() {
        assert!(enrich(&[]).unwrap().is_empty());
        let e = enrich(&[record(10, 100)]).unwrap();
        assert_eq!(e.len(), 1);
        assert_eq!(e[0].signal_density, 0.1);
        assert_eq!(e[0].active_days, 0);
    }

    proptest! {
        #[test]
        fn density_scale_invariant(s in 0u64..1_000_000, r in 1u64..100_000, k in 1u64..1000) {
            prop_assert_eq!(signal_density(k * s, k * r).unwrap(), signal_density(s, r).unwrap());
        }

        #[test]
        fn density_monotone_in_samples(s in 0u64..1_000_000, r in 1u64..100_000) {
            prop_assert!(signal_density(s + 1, r).unwrap() > signal_density(s, r).unwrap());
        }

        #[test]
        fn density_zero_iff_no_samples(s in 0u64..1000, r in 1u64..100_000) {
            let d = signal_density(s, r).unwrap();
            prop_assert!(d >= 0.0);
            prop_assert_eq!(d == 0.0, s == 0);
        }

        #[test]
        fn active_days_translation_invariant(
            c in -1_000_000_000i64..2_000_000_000,
            span in 0i64..100_000_000,
            shift in -500_000_000i64..500_000_000,
        ) {
            prop_assert_eq!(
                active_days(c, c + span).unwrap(),
                active_days(c + shift, c + span + shift).unwrap()
            );
        }

        #[test]
        fn enrich_preserves_order(
            rows in proptest::collection::vec((0u64..10_000, 1u64..50_000, 0i64..50_000_000), 0..1000)
        ) {
            let records: Vec<_> = rows
                .iter()
                .enumerate()
                .map(|(i, &(s, r, span))| TowerRecord {
                    cell: i as u64,
                    updated_ts: 1_600_000_000 + span,
                    created_ts: 1_600_000_000,
                    ..record(s, r)
                })
                .collect();
            let out = enrich(&records).unwrap();
            prop_assert_eq!(out.len(), records.len());
            for (e, &(s, r, span)) in out.iter().zip(&rows) {
                // Independent recomputation of both metrics.
                prop_assert_eq!(e.signal_density, s as f64 / r as f64);
                prop_assert_eq!(e.active_days, (span / 86_400) as u64);
            }
            for (i, e) in out.iter().enumerate() {
                prop_assert_eq!(e.record.cell, i as u64);
            }
        }
    }
}
