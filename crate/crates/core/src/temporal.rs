//! Monthly update series, phase comparison and data freshness.

use std::fmt;
use std::str::FromStr;

use chrono::{DateTime, Datelike};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingest::TowerRecord;
use crate::metrics::SECONDS_PER_DAY;

/// A calendar month.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct YearMonth {
    pub year: i32,
    pub month: u32,
}

impl YearMonth {
    pub fn new(year: i32, month: u32) -> Result<Self> {
        if !(1..=12).contains(&month) {
            return Err(Error::InvalidArgument(format!(
                "month {month} outside 1-12"
            )));
        }
        Ok(Self { year, month })
    }

    /// UTC calendar month of an epoch timestamp.
    pub fn from_timestamp(ts: i64) -> Result<Self> {
        let dt = DateTime::from_timestamp(ts, 0)
            .ok_or_else(|| Error::InvalidArgument(format!("timestamp {ts} out of range")))?;
        Ok(Self {
            year: dt.year(),
            month: dt.month(),
        })
    }

    fn index(self) -> i64 {
        self.year as i64 * 12 + (self.month as i64 - 1)
    }

    fn from_index(i: i64) -> Self {
        Self {
            year: i.div_euclid(12) as i32,
            month: (i.rem_euclid(12) + 1) as u32,
        }
    }

    pub fn succ(self) -> Self {
        Self::from_index(self.index() + 1)
    }
}

impl fmt::Display for YearMonth {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:04}-{:02}", self.year, self.month)
    }
}

impl FromStr for YearMonth {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidArgument(format!("expected YYYY-MM, got '{s}'"));
        let (y, m) = s.split_once('-').ok_or_else(bad)?;
        let year = y.parse().map_err(|_| bad())?;
        let month = m.parse().map_err(|_| bad())?;
        Self::new(year, month)
    }
}

/// Inclusive range of months.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MonthRange {
    pub start: YearMonth,
    pub end: YearMonth,
}

impl MonthRange {
    pub fn new(start: YearMonth, end: YearMonth) -> Result<Self> {
        if end < start {
            return Err(Error::InvalidArgument(format!(
                "empty month range {start}..{end}"
            )));
        }
        Ok(Self { start, end })
    }

    pub fn len(&self) -> usize {
        (self.end.index() - self.start.index() + 1) as usize
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn contains(&self, m: YearMonth) -> bool {
        self.start <= m && m <= self.end
    }
}

impl FromStr for MonthRange {
    type Err = Error;

    /// `YYYY-MM..YYYY-MM`
    fn from_str(s: &str) -> Result<Self> {
        let (a, b) = s.split_once("..").ok_or_else(|| {
            Error::InvalidArgument(format!("expected YYYY-MM..YYYY-MM, got '{s}'"))
        })?;
        Self::new(a.parse()?, b.parse()?)
    }
}

impl fmt::Display for MonthRange {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}..{}", self.start, self.end)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MonthBucket {
    pub year: i32,
    pub month: u32,
    pub count: u64,
}

impl MonthBucket {
    pub fn month(&self) -> YearMonth {
        YearMonth {
            year: self.year,
            month: self.month,
        }
    }
}

/// Zero-filled update counts for every month between the first and last
/// update in the data.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MonthlySeries {
    pub buckets: Vec<MonthBucket>,
}

impl MonthlySeries {
    pub fn first(&self) -> Option<YearMonth> {
        self.buckets.first().map(MonthBucket::month)
    }

    pub fn last(&self) -> Option<YearMonth> {
        self.buckets.last().map(MonthBucket::month)
    }

    pub fn count(&self, m: YearMonth) -> u64 {
        let Some(first) = self.first() else { return 0 };
        let offset = m.index() - first.index();
        if offset < 0 {
            return 0;
        }
        self.buckets.get(offset as usize).map_or(0, |b| b.count)
    }

    pub fn total(&self) -> u64 {
        self.buckets.iter().map(|b| b.count).sum()
    }
}

/// Buckets records by the UTC month of their last update.
pub fn monthly_counts(records: &[TowerRecord]) -> Result<MonthlySeries> {
    if records.is_empty() {
        return Err(Error::EmptyInput {
            what: "record list",
        });
    }
    let months = records
        .iter()
        .map(|r| YearMonth::from_timestamp(r.updated_ts))
        .collect::<Result<Vec<_>>>()?;
    let first = months.iter().min().unwrap().index();
    let last = months.iter().max().unwrap().index();
    let mut counts = vec![0u64; (last - first + 1) as usize];
    for m in &months {
        counts[(m.index() - first) as usize] += 1;
    }
    let buckets = counts
        .into_iter()
        .enumerate()
        .map(|(i, count)| {
            let m = YearMonth::from_index(first + i as i64);
            MonthBucket {
                year: m.year,
                month: m.month,
                count,
            }
        })
        .collect();
    Ok(MonthlySeries { buckets })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhaseComparison {
    pub phase_a: MonthRange,
    pub phase_b: MonthRange,
    pub phase_a_mean: f64,
    pub phase_b_mean: f64,
    /// `None` when the first phase has no updates at all.
    pub percent_change: Option<f64>,
    pub peak_month: YearMonth,
    pub peak_count: u64,
}

fn phase_mean(series: &MonthlySeries, range: &MonthRange) -> f64 {
    let mut m = range.start;
    let mut sum = 0u64;
    while m <= range.end {
        sum += series.count(m);
        m = m.succ();
    }
    sum as f64 / range.len() as f64
}

/// Mean monthly updates in two phases plus the series-wide peak (earliest
/// month wins a tie).
pub fn phase_compare(
    series: &MonthlySeries,
    phase_a: MonthRange,
    phase_b: MonthRange,
) -> Result<PhaseComparison> {
    let peak = series
        .buckets
        .iter()
        .fold(None::<&MonthBucket>, |best, b| match best {
            Some(p) if p.count >= b.count => Some(p),
            _ => Some(b),
        })
        .ok_or(Error::EmptyInput {
            what: "monthly series",
        })?;
    let a = phase_mean(series, &phase_a);
    let b = phase_mean(series, &phase_b);
    Ok(PhaseComparison {
        phase_a,
        phase_b,
        phase_a_mean: a,
        phase_b_mean: b,
        percent_change: (a > 0.0).then(|| 100.0 * (b - a) / a),
        peak_month: peak.month(),
        peak_count: peak.count,
    })
}

/// Share of records updated within `window_days` of the newest update.
pub fn freshness(records: &[TowerRecord], window_days: u32) -> Result<f64> {
    if records.is_empty() {
        return Err(Error::EmptyInput {
            what: "record list",
        });
    }
    if window_days == 0 {
        return Err(Error::InvalidArgument(
            "freshness window must be positive".into(),
        ));
    }
    let newest = records.iter().map(|r| r.updated_ts).max().unwrap();
    let cutoff = newest - window_days as i64 * SECONDS_PER_DAY;
    let fresh = records.iter().filter(|r| r.updated_ts >= cutoff).count();
    Ok(fresh as f64 / records.len() as f64)
}
