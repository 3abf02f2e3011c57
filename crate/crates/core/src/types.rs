//! Domain types shared by every stage: sensors, drones, readings and log records.
//!
//! The constant tables (sensor deployment, drone characteristics) are also
//! documented in `docs/sensors.md`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// UNIX epoch milliseconds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Timestamp(pub u64);

impl Timestamp {
    pub fn millis(self) -> u64 {
        self.0
    }

    /// Absolute distance to `other` in milliseconds.
    pub fn abs_diff(self, other: Timestamp) -> u64 {
        self.0.abs_diff(other.0)
    }
}

impl fmt::Display for Timestamp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// WGS-84 position. `alt_m` is absent for 2D sources.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeoPosition {
    pub lat_deg: f64,
    pub lon_deg: f64,
    pub alt_m: Option<f64>,
}

impl GeoPosition {
    pub fn new(lat_deg: f64, lon_deg: f64, alt_m: Option<f64>) -> Result<Self> {
        let pos = GeoPosition {
            lat_deg,
            lon_deg,
            alt_m,
        };
        let problems = pos.violations();
        if problems.is_empty() {
            Ok(pos)
        } else {
            Err(Error::InvalidValue(problems.join("; ")))
        }
    }

    pub fn surface(lat_deg: f64, lon_deg: f64) -> Self {
        GeoPosition {
            lat_deg,
            lon_deg,
            alt_m: None,
        }
    }

    pub fn with_alt(self, alt_m: f64) -> Self {
        GeoPosition {
            alt_m: Some(alt_m),
            ..self
        }
    }

    pub(crate) fn violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        if !(self.lat_deg.is_finite() && (-90.0..=90.0).contains(&self.lat_deg)) {
            out.push("latitude out of range".to_string());
        }
        if !(self.lon_deg.is_finite() && (-180.0..=180.0).contains(&self.lon_deg)) {
            out.push("longitude out of range".to_string());
        }
        if let Some(alt) = self.alt_m {
            if !(alt.is_finite() && alt >= 0.0) {
                out.push("altitude out of range".to_string());
            }
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum SensorName {
    Diana,
    Venus,
    Alvira,
    Arcus,
}

impl SensorName {
    pub const ALL: [SensorName; 4] = [
        SensorName::Alvira,
        SensorName::Arcus,
        SensorName::Diana,
        SensorName::Venus,
    ];

    /// Lower-case identifier used for file names and column prefixes.
    pub fn key(self) -> &'static str {
        match self {
            SensorName::Diana => "diana",
            SensorName::Venus => "venus",
            SensorName::Alvira => "alvira",
            SensorName::Arcus => "arcus",
        }
    }

    pub fn spec(self) -> SensorSpec {
        SensorSpec::of(self)
    }
}

impl fmt::Display for SensorName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.key())
    }
}

impl FromStr for SensorName {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "diana" => Ok(SensorName::Diana),
            "venus" => Ok(SensorName::Venus),
            "alvira" => Ok(SensorName::Alvira),
            "arcus" => Ok(SensorName::Arcus),
            other => Err(Error::InvalidValue(format!("unknown sensor {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SensorKind {
    RfDf,
    Radar2d,
    Radar3d,
}

impl SensorKind {
    pub fn is_radar(self) -> bool {
        !matches!(self, SensorKind::RfDf)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SensorSpec {
    pub name: SensorName,
    pub kind: SensorKind,
    pub position: GeoPosition,
    pub bearing_ambiguous: bool,
}

impl SensorSpec {
    /// Fixed deployment of the four sensors. Altitudes are not published and
    /// default to 0 m.
    pub fn of(name: SensorName) -> SensorSpec {
        let (kind, lat, lon) = match name {
            SensorName::Diana => (SensorKind::RfDf, 51.51913, 5.85795),
            SensorName::Venus => (SensorKind::RfDf, 51.51927, 5.85791),
            SensorName::Alvira => (SensorKind::Radar2d, 51.52126, 5.85860),
            SensorName::Arcus => (SensorKind::Radar3d, 51.52147, 5.87056),
        };
        SensorSpec {
            name,
            kind,
            position: GeoPosition {
                lat_deg: lat,
                lon_deg: lon,
                alt_m: Some(0.0),
            },
            bearing_ambiguous: name == SensorName::Diana,
        }
    }

    pub fn all() -> [SensorSpec; 4] {
        SensorName::ALL.map(SensorSpec::of)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Airframe {
    MultiCopter,
    FixedWing,
}

/// Drone models, in the fixed class order used for tie-breaking and vote vectors.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum DroneType {
    MavicPro,
    Mavic2,
    Phantom4Pro,
    ParrotDisco,
}

impl DroneType {
    pub const ALL: [DroneType; 4] = [
        DroneType::MavicPro,
        DroneType::Mavic2,
        DroneType::Phantom4Pro,
        DroneType::ParrotDisco,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Option<DroneType> {
        DroneType::ALL.get(i).copied()
    }

    pub fn airframe(self) -> Airframe {
        match self {
            DroneType::ParrotDisco => Airframe::FixedWing,
            _ => Airframe::MultiCopter,
        }
    }

    /// Commercial model name as it appears in flight logs.
    pub fn model_name(self) -> &'static str {
        match self {
            DroneType::MavicPro => "DJI Mavic Pro",
            DroneType::Mavic2 => "DJI Mavic 2",
            DroneType::Phantom4Pro => "DJI Phantom 4 Pro",
            DroneType::ParrotDisco => "Parrot Disco",
        }
    }

    pub fn spec(self) -> DroneSpec {
        let (rcs_m2, fcsf_m2) = match self {
            DroneType::ParrotDisco => (0.005, 0.1),
            _ => (0.01, 0.02),
        };
        DroneSpec {
            drone_type: self,
            weight_kg: 1.0,
            max_velocity_mps: 20.0,
            rcs_m2,
            fcsf_m2,
        }
    }
}

impl fmt::Display for DroneType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.model_name())
    }
}

impl FromStr for DroneType {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let norm: String = s
            .chars()
            .filter(|c| c.is_ascii_alphanumeric())
            .collect::<String>()
            .to_ascii_lowercase();
        let t = match norm.as_str() {
            "djimavicpro" | "mavicpro" => DroneType::MavicPro,
            "djimavic2" | "mavic2" => DroneType::Mavic2,
            "djiphantom4pro" | "phantom4pro" => DroneType::Phantom4Pro,
            "parrotdisco" | "parrot" => DroneType::ParrotDisco,
            _ => return Err(Error::UnknownDroneType(s.to_string())),
        };
        Ok(t)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DroneSpec {
    pub drone_type: DroneType,
    pub weight_kg: f64,
    pub max_velocity_mps: f64,
    pub rcs_m2: f64,
    pub fcsf_m2: f64,
}

/// One timestamped observation from one sensor. Every measurement is optional.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SensorReading {
    pub t: Timestamp,
    pub sensor: SensorName,
    pub bearing_deg: Option<f64>,
    pub range_m: Option<f64>,
    pub rss_dbm: Option<f64>,
    pub rcs_dbsm: Option<f64>,
    pub freq_mhz: Option<f64>,
    pub position: Option<GeoPosition>,
}

impl SensorReading {
    pub fn empty(t: Timestamp, sensor: SensorName) -> Self {
        SensorReading {
            t,
            sensor,
            bearing_deg: None,
            range_m: None,
            rss_dbm: None,
            rcs_dbsm: None,
            freq_mhz: None,
            position: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DroneLogRecord {
    pub t: Timestamp,
    pub position: GeoPosition,
    pub speed_mps: f64,
    pub drone_type: DroneType,
}

impl DroneLogRecord {
    pub fn violations(&self) -> Vec<String> {
        let mut out = self.position.violations();
        let limit = 1.25 * self.drone_type.spec().max_velocity_mps;
        if !(self.speed_mps.is_finite() && self.speed_mps >= 0.0) {
            out.push("speed negative or not finite".to_string());
        } else if self.speed_mps > limit {
            out.push(format!("speed {} exceeds {limit} m/s", self.speed_mps));
        }
        out
    }
}

/// Result of [`validate_reading`]: empty means the reading is well-formed.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Verdict {
    pub violations: Vec<String>,
}

impl Verdict {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks a reading against the schema of its sensor kind.
///
/// Violations are reported in a fixed order regardless of which fields are set.
pub fn validate_reading(r: &SensorReading) -> Verdict {
    let kind = r.sensor.spec().kind;
    let mut v = Vec::new();

    if let Some(b) = r.bearing_deg {
        if !(b.is_finite() && (0.0..360.0).contains(&b)) {
            v.push("bearing out of range".to_string());
        }
    }
    if let Some(range) = r.range_m {
        if !(range.is_finite() && range >= 0.0) {
            v.push("range out of range".to_string());
        }
    }
    if let Some(f) = r.freq_mhz {
        if !(f.is_finite() && f > 0.0) {
            v.push("frequency must be positive".to_string());
        }
    }
    if r.rss_dbm.is_some_and(|x| !x.is_finite()) {
        v.push("rss not finite".to_string());
    }
    if r.rcs_dbsm.is_some_and(|x| !x.is_finite()) {
        v.push("rcs not finite".to_string());
    }
    if let Some(p) = &r.position {
        v.extend(p.violations());
    }

    match kind {
        SensorKind::RfDf => {
            if r.range_m.is_some() {
                v.push("RF/DF carries range".to_string());
            }
            if r.position.is_some() {
                v.push("RF/DF carries position".to_string());
            }
            if r.rcs_dbsm.is_some() {
                v.push("RF/DF carries rcs".to_string());
            }
        }
        SensorKind::Radar2d | SensorKind::Radar3d => {
            if r.rss_dbm.is_some() || r.freq_mhz.is_some() {
                v.push("radar carries RF emission fields".to_string());
            }
            if kind == SensorKind::Radar2d && r.position.is_some_and(|p| p.alt_m.is_some()) {
                v.push("2D radar carries altitude".to_string());
            }
        }
    }
    Verdict { violations: v }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sensor_table_matches_deployment() {
        let diana = SensorSpec::of(SensorName::Diana);
        assert_eq!(diana.kind, SensorKind::RfDf);
        assert!(diana.bearing_ambiguous);
        assert_eq!(SensorSpec::of(SensorName::Venus).kind, SensorKind::RfDf);
        assert!(!SensorSpec::of(SensorName::Venus).bearing_ambiguous);
        assert_eq!(SensorSpec::of(SensorName::Alvira).kind, SensorKind::Radar2d);
        assert_eq!(SensorSpec::of(SensorName::Arcus).kind, SensorKind::Radar3d);
        assert_eq!(SensorSpec::of(SensorName::Arcus).position.lon_deg, 5.87056);
    }

    #[test]
    fn drone_specs() {
        for t in DroneType::ALL {
            let s = t.spec();
            assert_eq!(s.max_velocity_mps, 20.0);
            assert_eq!(s.weight_kg, 1.0);
            assert_eq!(t == DroneType::ParrotDisco, t.airframe() == Airframe::FixedWing);
        }
        assert_eq!(DroneType::MavicPro.spec().rcs_m2, 0.01);
        assert_eq!(DroneType::ParrotDisco.spec().rcs_m2, 0.005);
        assert_eq!(DroneType::ParrotDisco.spec().fcsf_m2, 0.1);
    }

    #[test]
    fn parses_model_names() {
        assert_eq!("DJI Mavic Pro".parse::<DroneType>().unwrap(), DroneType::MavicPro);
        assert_eq!("Parrot Disco".parse::<DroneType>().unwrap(), DroneType::ParrotDisco);
        assert_eq!("DJI Phantom 4 Pro".parse::<DroneType>().unwrap(), DroneType::Phantom4Pro);
        assert!(matches!(
            "DJI Spark".parse::<DroneType>(),
            Err(Error::UnknownDroneType(_))
        ));
    }

    #[test]
    fn venus_with_range_is_flagged() {
        let mut r = SensorReading::empty(Timestamp(0), SensorName::Venus);
        r.range_m = Some(100.0);
        r.bearing_deg = Some(10.0);
        let v = validate_reading(&r);
        assert_eq!(v.violations, vec!["RF/DF carries range".to_string()]);
    }

    #[test]
    fn arcus_with_position_and_rcs_is_ok() {
        let mut r = SensorReading::empty(Timestamp(5), SensorName::Arcus);
        r.position = Some(GeoPosition::surface(51.52, 5.86).with_alt(40.0));
        r.rcs_dbsm = Some(-12.0);
        assert!(validate_reading(&r).is_ok());
    }

    #[test]
    fn bearing_361_is_flagged() {
        let mut r = SensorReading::empty(Timestamp(0), SensorName::Diana);
        r.bearing_deg = Some(361.0);
        let v = validate_reading(&r);
        assert!(v.violations.contains(&"bearing out of range".to_string()));
    }

    #[test]
    fn validation_does_not_depend_on_field_assignment_order() {
        let mut a = SensorReading::empty(Timestamp(1), SensorName::Venus);
        a.range_m = Some(1.0);
        a.bearing_deg = Some(400.0);
        a.rcs_dbsm = Some(1.0);
        let mut b = SensorReading::empty(Timestamp(1), SensorName::Venus);
        b.rcs_dbsm = Some(1.0);
        b.bearing_deg = Some(400.0);
        b.range_m = Some(1.0);
        assert_eq!(validate_reading(&a), validate_reading(&b));
        assert_eq!(validate_reading(&a), validate_reading(&a));
    }

    #[test]
    fn log_speed_limit_has_slack() {
        let rec = DroneLogRecord {
            t: Timestamp(0),
            position: GeoPosition::surface(51.5, 5.8).with_alt(10.0),
            speed_mps: 24.0,
            drone_type: DroneType::Mavic2,
        };
        assert!(rec.violations().is_empty());
        let fast = DroneLogRecord {
            speed_mps: 26.0,
            ..rec
        };
        assert_eq!(fast.violations().len(), 1);
    }
}
