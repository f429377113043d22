//! Loading OpenCelliD-style CSV snapshots.
//!
//! Every data row ends up either as an accepted [`TowerRecord`] or as a
//! quarantine entry in the [`ValidationReport`]; a bad row never aborts the
//! load. Only an unreadable source or a missing mandatory header is fatal.

use std::fmt;
use std::io::{Read, Write};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Radio access technology of a cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Radio {
    #[serde(rename = "GSM")]
    Gsm,
    #[serde(rename = "UMTS")]
    Umts,
    #[serde(rename = "LTE")]
    Lte,
}

impl Radio {
    pub const ALL: [Radio; 3] = [Radio::Gsm, Radio::Umts, Radio::Lte];

    pub fn as_str(self) -> &'static str {
        match self {
            Radio::Gsm => "GSM",
            Radio::Umts => "UMTS",
            Radio::Lte => "LTE",
        }
    }

    /// GSM and UMTS, i.e. anything older than LTE.
    pub fn is_legacy(self) -> bool {
        !matches!(self, Radio::Lte)
    }
}

impl fmt::Display for Radio {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Radio {
    type Err = ();

    fn from_str(s: &str) -> Result<Self, ()> {
        match s {
            "GSM" => Ok(Radio::Gsm),
            "UMTS" => Ok(Radio::Umts),
            "LTE" => Ok(Radio::Lte),
            _ => Err(()),
        }
    }
}

/// One validated cell-tower row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TowerRecord {
    pub radio: Radio,
    pub mcc: u32,
    pub net: u32,
    pub area: u64,
    pub cell: u64,
    pub lat: f64,
    pub lon: f64,
    /// Estimated coverage radius in meters, always > 0.
    pub range_m: u64,
    pub samples: u64,
    /// UTC Unix epoch seconds.
    pub created_ts: i64,
    /// UTC Unix epoch seconds, never earlier than `created_ts`.
    pub updated_ts: i64,
}

/// Why a row was quarantined.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum ReasonCode {
    BadRadio,
    BadCoordinate,
    NonPositiveRange,
    NegativeSamples,
    TimestampOrder,
    ParseFailure,
}

impl fmt::Display for ReasonCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            ReasonCode::BadRadio => "BadRadio",
            ReasonCode::BadCoordinate => "BadCoordinate",
            ReasonCode::NonPositiveRange => "NonPositiveRange",
            ReasonCode::NegativeSamples => "NegativeSamples",
            ReasonCode::TimestampOrder => "TimestampOrder",
            ReasonCode::ParseFailure => "ParseFailure",
        };
        f.write_str(s)
    }
}

/// A rejected row. `row` is the 1-based data row number (the header is not counted).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuarantineEntry {
    pub row: usize,
    pub reason: ReasonCode,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub total_rows: usize,
    pub accepted_count: usize,
    pub quarantined: Vec<QuarantineEntry>,
}

impl ValidationReport {
    /// Writes the quarantine list as JSON lines: `{"row": n, "reason": "<code>"}`.
    pub fn write_jsonl<W: Write>(&self, mut out: W) -> Result<()> {
        for entry in &self.quarantined {
            serde_json::to_writer(&mut out, entry)?;
            out.write_all(b"\n")?;
        }
        Ok(())
    }
}

/// Maps logical field names onto the column headers of a particular export.
///
/// The default matches the OpenCelliD public dump headers. Extra columns in
/// the input (`unit`, `changeable`, `averageSignal`, ...) are ignored.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ColumnMapping {
    pub radio: String,
    pub mcc: String,
    pub net: String,
    pub area: String,
    pub cell: String,
    pub lon: String,
    pub lat: String,
    pub range: String,
    pub samples: String,
    pub created: String,
    pub updated: String,
}

impl Default for ColumnMapping {
    fn default() -> Self {
        Self {
            radio: "radio".into(),
            mcc: "mcc".into(),
            net: "net".into(),
            area: "area".into(),
            cell: "cell".into(),
            lon: "lon".into(),
            lat: "lat".into(),
            range: "range".into(),
            samples: "samples".into(),
            created: "created".into(),
            updated: "updated".into(),
        }
    }
}

impl ColumnMapping {
    pub const FIELDS: [&'static str; 11] = [
        "radio", "mcc", "net", "area", "cell", "lon", "lat", "range", "samples", "created",
        "updated",
    ];

    /// Overrides the header for one logical field.
    pub fn set(&mut self, field: &str, header: impl Into<String>) -> Result<()> {
        let slot = match field {
            "radio" => &mut self.radio,
            "mcc" => &mut self.mcc,
            "net" => &mut self.net,
            "area" => &mut self.area,
            "cell" => &mut self.cell,
            "lon" => &mut self.lon,
            "lat" => &mut self.lat,
            "range" => &mut self.range,
            "samples" => &mut self.samples,
            "created" => &mut self.created,
            "updated" => &mut self.updated,
            other => {
                return Err(Error::InvalidArgument(format!(
                    "unknown column field '{other}'"
                )))
            }
        };
        *slot = header.into();
        Ok(())
    }

    fn headers(&self) -> [&str; 11] {
        [
            &self.radio,
            &self.mcc,
            &self.net,
            &self.area,
            &self.cell,
            &self.lon,
            &self.lat,
            &self.range,
            &self.samples,
            &self.created,
            &self.updated,
        ]
    }

    /// Column index of each logical field, in [`Self::FIELDS`] order.
    fn resolve(&self, header: &csv::StringRecord) -> Result<[usize; 11]> {
        let mut idx = [0usize; 11];
        for (i, (field, column)) in Self::FIELDS.iter().zip(self.headers()).enumerate() {
            idx[i] = header
                .iter()
                .position(|h| h.trim() == column)
                .ok_or_else(|| Error::MissingColumn {
                    field,
                    column: column.to_string(),
                })?;
        }
        Ok(idx)
    }
}

/// The raw string fields of one row, before validation.
#[derive(Debug, Clone, Copy, Default)]
pub struct RawRow<'a> {
    pub radio: &'a str,
    pub mcc: &'a str,
    pub net: &'a str,
    pub area: &'a str,
    pub cell: &'a str,
    pub lon: &'a str,
    pub lat: &'a str,
    pub range: &'a str,
    pub samples: &'a str,
    pub created: &'a str,
    pub updated: &'a str,
}

fn num<T: FromStr>(s: &str) -> Result<T, ReasonCode> {
    s.trim().parse().map_err(|_| ReasonCode::ParseFailure)
}

/// Validates one raw row.
///
/// Checks run in a fixed order and the first failure wins: ParseFailure,
/// BadRadio, BadCoordinate, NonPositiveRange, NegativeSamples, TimestampOrder.
pub fn validate_record(raw: &RawRow<'_>) -> Result<TowerRecord, ReasonCode> {
    let mcc: u32 = num(raw.mcc)?;
    let net: u32 = num(raw.net)?;
    let area: u64 = num(raw.area)?;
    let cell: u64 = num(raw.cell)?;
    let lat: f64 = num(raw.lat)?;
    let lon: f64 = num(raw.lon)?;
    let range: i64 = num(raw.range)?;
    let samples: i64 = num(raw.samples)?;
    let created_ts: i64 = num(raw.created)?;
    let updated_ts: i64 = num(raw.updated)?;

    let radio: Radio = raw.radio.trim().parse().map_err(|_| ReasonCode::BadRadio)?;
    if !(-90.0..=90.0).contains(&lat) || !(-180.0..=180.0).contains(&lon) {
        return Err(ReasonCode::BadCoordinate);
    }
    if range <= 0 {
        return Err(ReasonCode::NonPositiveRange);
    }
    if samples < 0 {
        return Err(ReasonCode::NegativeSamples);
    }
    if updated_ts < created_ts {
        return Err(ReasonCode::TimestampOrder);
    }

    Ok(TowerRecord {
        radio,
        mcc,
        net,
        area,
        cell,
        lat,
        lon,
        range_m: range as u64,
        samples: samples as u64,
        created_ts,
        updated_ts,
    })
}

/// Parses a CSV snapshot with a header row.
pub fn parse_dataset<R: Read>(
    source: R,
    mapping: &ColumnMapping,
) -> Result<(Vec<TowerRecord>, ValidationReport)> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .from_reader(source);
    let header = rdr.headers()?.clone();
    let idx = mapping.resolve(&header)?;

    let mut records = Vec::new();
    let mut report = ValidationReport::default();
    let mut raw = csv::ByteRecord::new();
    let mut row = 0usize;
    loop {
        match rdr.read_byte_record(&mut raw) {
            Ok(false) => break,
            Ok(true) => {
                row += 1;
                match validate_byte_record(&raw, &idx) {
                    Ok(rec) => records.push(rec),
                    Err(reason) => report.quarantined.push(QuarantineEntry { row, reason }),
                }
            }
            // Row-level decode problems are quarantined; the reader resyncs at the next line.
            Err(e) if !matches!(e.kind(), csv::ErrorKind::Io(_)) => {
                row += 1;
                report.quarantined.push(QuarantineEntry {
                    row,
                    reason: ReasonCode::ParseFailure,
                });
            }
            Err(e) => return Err(e.into()),
        }
    }
    report.total_rows = row;
    report.accepted_count = records.len();
    Ok((records, report))
}

fn validate_byte_record(
    rec: &csv::ByteRecord,
    idx: &[usize; 11],
) -> Result<TowerRecord, ReasonCode> {
    let mut fields = [""; 11];
    for (slot, &i) in fields.iter_mut().zip(idx) {
        let bytes = rec.get(i).ok_or(ReasonCode::ParseFailure)?;
        *slot = std::str::from_utf8(bytes).map_err(|_| ReasonCode::ParseFailure)?;
    }
    let [radio, mcc, net, area, cell, lon, lat, range, samples, created, updated] = fields;
    validate_record(&RawRow {
        radio,
        mcc,
        net,
        area,
        cell,
        lon,
        lat,
        range,
        samples,
        created,
        updated,
    })
}

/// Writes records as CSV using the default OpenCelliD header names.
pub fn write_records<W: Write>(out: W, records: &[TowerRecord]) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(out);
    wtr.write_record(ColumnMapping::FIELDS)?;
    for r in records {
        wtr.write_record([
            r.radio.as_str().to_string(),
            r.mcc.to_string(),
            r.net.to_string(),
            r.area.to_string(),
            r.cell.to_string(),
            r.lon.to_string(),
            r.lat.to_string(),
            r.range_m.to_string(),
            r.samples.to_string(),
            r.created_ts.to_string(),
            r.updated_ts.to_string(),
        ])?;
    }
    wtr.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    const HEADER: &str = "radio,mcc,net,area,cell,unit,lon,lat,range,samples,changeable,created,updated,averageSignal\n";

    fn parse(body: &str) -> (Vec<TowerRecord>, ValidationReport) {
        let text = format!("{HEADER}{body}");
        parse_dataset(text.as_bytes(), &ColumnMapping::default()).unwrap()
    }

    fn clean_row() -> RawRow<'static> {
        RawRow {
            radio: "LTE",
            mcc: "410",
            net: "1",
            area: "5056",
            cell: "2442763",
            lon: "67.00",
            lat: "24.86",
            range: "1365",
            samples: "7",
            created: "1700000000",
            updated: "1700086400",
        }
    }

    #[test]
    fn three_clean_rows() {
        let (recs, rep) = parse(
            "GSM,410,1,10,1,0,67.0,24.8,2000,3,1,1700000000,1700000100,0\n\
             UMTS,410,4,11,2,0,73.0,33.6,1500,0,1,1700000000,1700000000,0\n\
             LTE,410,6,12,3,0,74.3,31.5,800,55,1,1690000000,1700000000,0\n",
        );
        assert_eq!(recs.len(), 3);
        assert!(rep.quarantined.is_empty());
        assert_eq!(rep.accepted_count, 3);
        assert_eq!(rep.total_rows, 3);
        assert_eq!(
            recs.iter().map(|r| r.radio).collect::<Vec<_>>(),
            vec![Radio::Gsm, Radio::Umts, Radio::Lte]
        );
    }

    #[test]
    fn zero_range_is_quarantined() {
        let (recs, rep) = parse("LTE,410,1,10,1,0,67.0,24.8,0,3,1,1700000000,1700000100,0\n");
        assert!(recs.is_empty());
        assert_eq!(
            rep.quarantined,
            vec![QuarantineEntry {
                row: 1,
                reason: ReasonCode::NonPositiveRange
            }]
        );
    }

    #[test]
    fn nr_radio_is_quarantined() {
        let (_, rep) = parse("NR,410,1,10,1,0,67.0,24.8,100,3,1,1700000000,1700000100,0\n");
        assert_eq!(rep.quarantined[0].reason, ReasonCode::BadRadio);
    }

    #[test]
    fn validate_clean_row() {
        let rec = validate_record(&clean_row()).unwrap();
        assert_eq!(rec.radio, Radio::Lte);
        assert_eq!(rec.range_m, 1365);
        assert_eq!(rec.samples, 7);
        assert_eq!(rec.lat, 24.86);
    }

    #[test]
    fn validate_bad_latitude() {
        let raw = RawRow {
            lat: "95.0",
            ..clean_row()
        };
        assert_eq!(validate_record(&raw), Err(ReasonCode::BadCoordinate));
        let raw = RawRow {
            lon: "-180.5",
            ..clean_row()
        };
        assert_eq!(validate_record(&raw), Err(ReasonCode::BadCoordinate));
        let raw = RawRow {
            lat: "NaN",
            ..clean_row()
        };
        assert_eq!(validate_record(&raw), Err(ReasonCode::BadCoordinate));
    }

    #[test]
    fn validate_timestamp_order() {
        let raw = RawRow {
            updated: "1699999999",
            ..clean_row()
        };
        assert_eq!(validate_record(&raw), Err(ReasonCode::TimestampOrder));
    }

    #[test]
    fn validate_negative_samples() {
        let raw = RawRow {
            samples: "-1",
            ..clean_row()
        };
        assert_eq!(validate_record(&raw), Err(ReasonCode::NegativeSamples));
    }

    #[test]
    fn check_order_is_fixed() {
        // Everything wrong at once: parse failure is reported first.
        let raw = RawRow {
            radio: "CDMA",
            lat: "100",
            range: "-5",
            samples: "x",
            ..clean_row()
        };
        assert_eq!(validate_record(&raw), Err(ReasonCode::ParseFailure));
        let raw = RawRow {
            radio: "CDMA",
            lat: "100",
            range: "-5",
            ..clean_row()
        };
        assert_eq!(validate_record(&raw), Err(ReasonCode::BadRadio));
        let raw = RawRow {
            lat: "100",
            range: "-5",
            ..clean_row()
        };
        assert_eq!(validate_record(&raw), Err(ReasonCode::BadCoordinate));
        let raw = RawRow {
            range: "-5",
            samples: "-1",
            ..clean_row()
        };
        assert_eq!(validate_record(&raw), Err(ReasonCode::NonPositiveRange));
        let raw = RawRow {
            samples: "-1",
            updated: "0",
            ..clean_row()
        };
        assert_eq!(validate_record(&raw), Err(ReasonCode::NegativeSamples));
    }

    #[test]
    fn short_row_is_parse_failure() {
        let (recs, rep) = parse(
            "LTE,410,1\n\
             LTE,410,1,10,1,0,67.0,24.8,100,3,1,1700000000,1700000100,0\n",
        );
        assert_eq!(recs.len(), 1);
        assert_eq!(
            rep.quarantined,
            vec![QuarantineEntry {
                row: 1,
                reason: ReasonCode::ParseFailure
            }]
        );
    }

    #[test]
    fn invalid_utf8_is_parse_failure() {
        let mut bytes = HEADER.as_bytes().to_vec();
        bytes.extend_from_slice(b"LTE,410,1,10,1,0,67.0,24.8,100,3,1,17000\xff0000,1700000100,0\n");
        let (recs, rep) = parse_dataset(&bytes[..], &ColumnMapping::default()).unwrap();
        assert!(recs.is_empty());
        assert_eq!(rep.quarantined[0].reason, ReasonCode::ParseFailure);
    }

    #[test]
    fn missing_header_is_fatal() {
        let text = "radio,mcc,net,area,cell,lon,lat,range,samples,created\nLTE,1,1,1,1,1,1,1,1,1\n";
        let err = parse_dataset(text.as_bytes(), &ColumnMapping::default()).unwrap_err();
        assert!(matches!(
            err,
            Error::MissingColumn {
                field: "updated",
                ..
            }
        ));
    }

    #[test]
    fn renamed_headers_via_mapping() {
        let text = "rat,mcc,mnc,lac,cid,longitude,latitude,range,samples,created,updated\n\
                    UMTS,410,3,7,99,73.0,33.6,1500,4,1700000000,1700000000\n";
        let mut m = ColumnMapping::default();
        for (f, h) in [
            ("radio", "rat"),
            ("net", "mnc"),
            ("area", "lac"),
            ("cell", "cid"),
            ("lon", "longitude"),
            ("lat", "latitude"),
        ] {
            m.set(f, h).unwrap();
        }
        let (recs, rep) = parse_dataset(text.as_bytes(), &m).unwrap();
        assert_eq!(rep.accepted_count, 1);
        assert_eq!(recs[0].cell, 99);
        assert_eq!(recs[0].lat, 33.6);
        assert!(m.set("bogus", "x").is_err());
    }

    #[test]
    fn quarantine_jsonl_format() {
        let rep = ValidationReport {
            total_rows: 2,
            accepted_count: 0,
            quarantined: vec![
                QuarantineEntry {
                    row: 1,
                    reason: ReasonCode::BadRadio,
                },
                QuarantineEntry {
                    row: 2,
                    reason: ReasonCode::TimestampOrder,
                },
            ],
        };
        let mut out = Vec::new();
        rep.write_jsonl(&mut out).unwrap();
        assert_eq!(
            String::from_utf8(out).unwrap(),
            "{\"row\":1,\"reason\":\"BadRadio\"}\n{\"row\":2,\"reason\":\"TimestampOrder\"}\n"
        );
    }
}
