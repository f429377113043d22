//! Offline reverse geocoding against a small place-name gazetteer.

use std::io::Read;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const EARTH_RADIUS_KM: f64 = 6371.0088;

/// Great-circle distance in kilometers.
pub fn haversine_km(lat1: f64, lon1: f64, lat2: f64, lon2: f64) -> f64 {
    let (p1, p2) = (lat1.to_radians(), lat2.to_radians());
    let dphi = p2 - p1;
    let dlambda = (lon2 - lon1).to_radians();
    let a = (dphi / 2.0).sin().powi(2) + p1.cos() * p2.cos() * (dlambda / 2.0).sin().powi(2);
    2.0 * EARTH_RADIUS_KM * a.sqrt().min(1.0).asin()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GazetteerEntry {
    pub name: String,
    pub admin: String,
    pub lat: f64,
    pub lon: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Gazetteer {
    entries: Vec<GazetteerEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeocodeHit {
    /// Index of the matched entry in the gazetteer.
    pub entry: usize,
    pub name: String,
    pub admin: String,
    pub distance_km: f64,
}

impl Gazetteer {
    pub fn new(entries: Vec<GazetteerEntry>) -> Result<Self> {
        for e in &entries {
            if !(-90.0..=90.0).contains(&e.lat) || !(-180.0..=180.0).contains(&e.lon) {
                return Err(Error::InvalidArgument(format!(
                    "gazetteer entry '{}' has out-of-bounds coordinates ({}, {})",
                    e.name, e.lat, e.lon
                )));
            }
        }
        Ok(Self { entries })
    }

    /// Reads a CSV with header `name,admin,lat,lon`.
    pub fn from_csv<R: Read>(source: R) -> Result<Self> {
        let mut rdr = csv::Reader::from_reader(source);
        let header = rdr.headers()?.clone();
        for col in ["name", "admin", "lat", "lon"] {
            if !header.iter().any(|h| h.trim() == col) {
                return Err(Error::MissingColumn {
                    field: col,
                    column: col.to_string(),
                });
            }
        }
        let entries = rdr
            .deserialize::<GazetteerEntry>()
            .collect::<Result<Vec<_>, _>>()?;
        Self::new(entries)
    }

    pub fn entries(&self) -> &[GazetteerEntry] {
        &self.entries
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Nearest entry by haversine distance. Ties go to the lexicographically
    /// smallest place name.
    pub fn reverse_geocode(&self, lat: f64, lon: f64) -> Result<GeocodeHit> {
        let mut best: Option<(usize, f64)> = None;
        for (i, e) in self.entries.iter().enumerate() {
            let d = haversine_km(lat, lon, e.lat, e.lon);
            let better = match best {
                None => true,
                Some((bi, bd)) => d < bd || (d == bd && e.name < self.entries[bi].name),
            };
            if better {
                best = Some((i, d));
            }
        }
        let (i, d) = best.ok_or(Error::EmptyInput { what: "gazetteer" })?;
        let e = &self.entries[i];
        Ok(GeocodeHit {
            entry: i,
            name: e.name.clone(),
            admin: e.admin.clone(),
            distance_km: d,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn entry(name: &str, lat: f64, lon: f64) -> GazetteerEntry {
        GazetteerEntry {
            name: name.into(),
            admin: "Sindh".into(),
            lat,
            lon,
        }
    }

    #[test]
    fn exact_hit_has_zero_distance() {
        let g = Gazetteer::new(vec![
            entry("Karachi", 24.86, 67.01),
            entry("Hyderabad", 25.39, 68.37),
        ])
        .unwrap();
        let hit = g.reverse_geocode(25.39, 68.37).unwrap();
        assert_eq!(hit.name, "Hyderabad");
        assert_eq!(hit.distance_km, 0.0);
    }

    #[test]
    fn nearer_entry_wins() {
        let g = Gazetteer::new(vec![entry("A", 10.0, 10.0), entry("B", 20.0, 20.0)]).unwrap();
        assert_eq!(g.reverse_geocode(11.0, 11.0).unwrap().name, "A");
    }

    #[test]
    fn ties_prefer_smaller_name() {
        let g = Gazetteer::new(vec![entry("Zeta", 0.0, 1.0), entry("Alpha", 0.0, -1.0)]).unwrap();
        assert_eq!(g.reverse_geocode(0.0, 0.0).unwrap().name, "Alpha");
    }

    #[test]
    fn empty_gazetteer_is_error() {
        let g = Gazetteer::default();
        assert!(matches!(
            g.reverse_geocode(0.0, 0.0),
            Err(Error::EmptyInput { .. })
        ));
    }

    #[test]
    fn bad_coordinates_rejected() {
        assert!(Gazetteer::new(vec![entry("X", 91.0, 0.0)]).is_err());
    }

    #[test]
    fn csv_loading() {
        let text =
            "name,admin,lat,lon\nGwadar,Balochistan,25.12,62.32\nPasni,Balochistan,25.26,63.47\n";
        let g = Gazetteer::from_csv(text.as_bytes()).unwrap();
        assert_eq!(g.entries().len(), 2);
        assert_eq!(g.entries()[1].name, "Pasni");
        assert!(Gazetteer::from_csv("name,lat,lon\nA,1,1\n".as_bytes()).is_err());
    }

    #[test]
    fn haversine_known_distance() {
        // One degree of latitude along a meridian.
        let d = haversine_km(0.0, 0.0, 1.0, 0.0);
        assert!((d - EARTH_RADIUS_KM.to_radians()).abs() < 1e-9);
        assert_eq!(haversine_km(12.5, 40.0, 12.5, 40.0), 0.0);
    }
}
