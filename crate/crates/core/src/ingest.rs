//! Loading sensor streams and drone logs from CSV, and merging them into a
//! fused frame on the timestamp axis.
//!
//! A scenario directory holds one CSV per sensor (`alvira.csv`, `arcus.csv`,
//! `diana.csv`, `venus.csv`) and, for training scenarios, `drone_log.csv`.
//! See `docs/dataset-layout.md`.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::frame::{Column, ColumnValues, FusedFrame, RowSource, SensorTable, Targets};
use crate::types::{
    validate_reading, DroneLogRecord, DroneType, GeoPosition, SensorName, SensorReading, SensorSpec,
    Timestamp,
};

pub const DRONE_LOG_FILE: &str = "drone_log.csv";

/// Canonical sensor CSV columns, in the order they are written.
pub const SENSOR_COLUMNS: [&str; 9] = [
    "timestamp",
    "lat_deg",
    "lon_deg",
    "alt_m",
    "bearing_deg",
    "range_m",
    "rss_dbm",
    "rcs_dbsm",
    "freq_mhz",
];

pub const LOG_COLUMNS: [&str; 6] = [
    "timestamp",
    "latitude",
    "longitude",
    "speed",
    "altitude",
    "drone_type",
];

pub fn sensor_file_name(sensor: SensorName) -> String {
    format!("{}.csv", sensor.key())
}

/// Maps raw CSV header names onto canonical column names.
///
/// Matching is case-insensitive. The default table covers the canonical names
/// and common spellings; dataset-specific headers can be added per sensor.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct HeaderMap {
    aliases: BTreeMap<String, String>,
}

impl HeaderMap {
    pub fn sensor_default() -> Self {
        let mut m = HeaderMap::default();
        for c in SENSOR_COLUMNS {
            m.alias(c, c);
        }
        for (raw, canon) in [
            ("time", "timestamp"),
            ("time_ms", "timestamp"),
            ("unix_ms", "timestamp"),
            ("latitude", "lat_deg"),
            ("lat", "lat_deg"),
            ("longitude", "lon_deg"),
            ("lon", "lon_deg"),
            ("lng", "lon_deg"),
            ("altitude", "alt_m"),
            ("alt", "alt_m"),
            ("height", "alt_m"),
            ("bearing", "bearing_deg"),
            ("azimuth", "bearing_deg"),
            ("direction", "bearing_deg"),
            ("range", "range_m"),
            ("distance", "range_m"),
            ("rss", "rss_dbm"),
            ("rssi", "rss_dbm"),
            ("signal_strength", "rss_dbm"),
            ("rcs", "rcs_dbsm"),
            ("frequency", "freq_mhz"),
            ("freq", "freq_mhz"),
        ] {
            m.alias(raw, canon);
        }
        m
    }

    pub fn log_default() -> Self {
        let mut m = HeaderMap::default();
        for c in LOG_COLUMNS {
            m.alias(c, c);
        }
        for (raw, canon) in [
            ("time", "timestamp"),
            ("lat", "latitude"),
            ("lon", "longitude"),
            ("lng", "longitude"),
            ("alt", "altitude"),
            ("height", "altitude"),
            ("velocity", "speed"),
            ("model", "drone_type"),
            ("drone", "drone_type"),
            ("type", "drone_type"),
        ] {
            m.alias(raw, canon);
        }
        m
    }

    pub fn alias(&mut self, raw: &str, canonical: &str) -> &mut Self {
        self.aliases
            .insert(raw.trim().to_ascii_lowercase(), canonical.to_string());
        self
    }

    pub fn canonical(&self, raw: &str) -> Option<&str> {
        self.aliases
            .get(&raw.trim().to_ascii_lowercase())
            .map(String::as_str)
    }
}

/// What happened while loading one file.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct LoadReport {
    pub path: PathBuf,
    pub rows: usize,
    /// Rows dropped because their timestamp could not be parsed.
    pub dropped_rows: usize,
    /// Absent cells per canonical column (blank or unparseable).
    pub absent: BTreeMap<String, usize>,
    /// Cells that were present but could not be parsed; a subset of `absent`.
    pub unparseable: BTreeMap<String, usize>,
    pub ignored_columns: Vec<String>,
    /// Schema violations as (row index after sorting, message).
    pub violations: Vec<(usize, String)>,
}

fn read_csv(path: &Path) -> Result<csv::Reader<fs::File>> {
    if !path.is_file() {
        return Err(Error::ScenarioIncomplete(format!(
            "missing file {}",
            path.display()
        )));
    }
    let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
    Ok(csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(file))
}

/// Resolve raw headers into canonical positions; returns (canonical → index, ignored).
fn resolve_headers(
    headers: &csv::StringRecord,
    map: &HeaderMap,
) -> (BTreeMap<String, usize>, Vec<String>) {
    let mut idx = BTreeMap::new();
    let mut ignored = Vec::new();
    for (i, h) in headers.iter().enumerate() {
        match map.canonical(h) {
            Some(c) if !idx.contains_key(c) => {
                idx.insert(c.to_string(), i);
            }
            _ => ignored.push(h.to_string()),
        }
    }
    (idx, ignored)
}

fn parse_timestamp(raw: &str) -> Option<Timestamp> {
    let s = raw.trim();
    if let Ok(v) = s.parse::<u64>() {
        return Some(Timestamp(v));
    }
    // Some exports write integral milliseconds as floats.
    match s.parse::<f64>() {
        Ok(v) if v.is_finite() && v >= 0.0 && v.fract() == 0.0 && v < 9.0e15 => {
            Some(Timestamp(v as u64))
        }
        _ => None,
    }
}

/// Total order used to sort readings: timestamp first, then field values.
/// Makes the sorted output independent of input row order.
pub(crate) fn reading_order(a: &SensorReading, b: &SensorReading) -> Ordering {
    fn opt(a: Option<f64>, b: Option<f64>) -> Ordering {
        match (a, b) {
            (None, None) => Ordering::Equal,
            (None, Some(_)) => Ordering::Less,
            (Some(_), None) => Ordering::Greater,
            (Some(x), Some(y)) => x.total_cmp(&y),
        }
    }
    a.t.cmp(&b.t)
        .then_with(|| opt(a.position.map(|p| p.lat_deg), b.position.map(|p| p.lat_deg)))
        .then_with(|| opt(a.position.map(|p| p.lon_deg), b.position.map(|p| p.lon_deg)))
        .then_with(|| {
            opt(
                a.position.and_then(|p| p.alt_m),
                b.position.and_then(|p| p.alt_m),
            )
        })
        .then_with(|| opt(a.bearing_deg, b.bearing_deg))
        .then_with(|| opt(a.range_m, b.range_m))
        .then_with(|| opt(a.rss_dbm, b.rss_dbm))
        .then_with(|| opt(a.rcs_dbsm, b.rcs_dbsm))
        .then_with(|| opt(a.freq_mhz, b.freq_mhz))
}

pub fn load_sensor_csv(path: &Path, sensor: &SensorSpec) -> Result<(Vec<SensorReading>, LoadReport)> {
    load_sensor_csv_with(path, sensor, &HeaderMap::sensor_default())
}

pub fn load_sensor_csv_with(
    path: &Path,
    sensor: &SensorSpec,
    headers: &HeaderMap,
) -> Result<(Vec<SensorReading>, LoadReport)> {
    let mut rdr = read_csv(path)?;
    let raw_headers = rdr.headers()?.clone();
    let (idx, ignored) = resolve_headers(&raw_headers, headers);
    let Some(&ts_col) = idx.get("timestamp") else {
        return Err(Error::SchemaViolation {
            path: path.to_path_buf(),
            message: "no timestamp column".into(),
        });
    };
    let mut report = LoadReport {
        path: path.to_path_buf(),
        ignored_columns: ignored,
        ..Default::default()
    };
    let numeric_cols: Vec<&str> = SENSOR_COLUMNS[1..]
        .iter()
        .copied()
        .filter(|c| idx.contains_key(*c))
        .collect();

    let mut readings = Vec::new();
    for record in rdr.records() {
        let record = record?;
        let Some(t) = record.get(ts_col).and_then(parse_timestamp) else {
            report.dropped_rows += 1;
            continue;
        };
        let mut cells: BTreeMap<&str, f64> = BTreeMap::new();
        for &c in &numeric_cols {
            let raw = record.get(idx[c]).unwrap_or("");
            if raw.is_empty() {
                *report.absent.entry(c.to_string()).or_default() += 1;
                continue;
            }
            match raw.parse::<f64>() {
                Ok(v) if v.is_finite() => {
                    cells.insert(c, v);
                }
                _ => {
                    *report.absent.entry(c.to_string()).or_default() += 1;
                    *report.unparseable.entry(c.to_string()).or_default() += 1;
                }
            }
        }
        let position = match (cells.get("lat_deg"), cells.get("lon_deg")) {
            (Some(&lat), Some(&lon)) => Some(GeoPosition {
                lat_deg: lat,
                lon_deg: lon,
                alt_m: cells.get("alt_m").copied(),
            }),
            _ => None,
        };
        readings.push(SensorReading {
            t,
            sensor: sensor.name,
            bearing_deg: cells.get("bearing_deg").copied(),
            range_m: cells.get("range_m").copied(),
            rss_dbm: cells.get("rss_dbm").copied(),
            rcs_dbsm: cells.get("rcs_dbsm").copied(),
            freq_mhz: cells.get("freq_mhz").copied(),
            position,
        });
    }
    readings.sort_by(reading_order);
    for (i, r) in readings.iter().enumerate() {
        for v in validate_reading(r).violations {
            report.violations.push((i, v));
        }
    }
    report.rows = readings.len();
    Ok((readings, report))
}

pub fn load_drone_log(path: &Path) -> Result<Vec<DroneLogRecord>> {
    let mut rdr = read_csv(path)?;
    let (idx, _) = resolve_headers(&rdr.headers()?.clone(), &HeaderMap::log_default());
    for c in LOG_COLUMNS {
        if !idx.contains_key(c) {
            return Err(Error::SchemaViolation {
                path: path.to_path_buf(),
                message: format!("drone log lacks column {c}"),
            });
        }
    }
    let mut out = Vec::new();
    for (line, record) in rdr.records().enumerate() {
        let record = record?;
        let get = |c: &str| record.get(idx[c]).unwrap_or("");
        let bad = |c: &str| Error::SchemaViolation {
            path: path.to_path_buf(),
            message: format!("row {}: bad {c} {:?}", line + 1, get(c)),
        };
        let num = |c: &str| -> Result<f64> {
            get(c)
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| bad(c))
        };
        let t = parse_timestamp(get("timestamp")).ok_or_else(|| bad("timestamp"))?;
        let drone_type: DroneType = get("drone_type").parse()?;
        out.push(DroneLogRecord {
            t,
            position: GeoPosition {
                lat_deg: num("latitude")?,
                lon_deg: num("longitude")?,
                alt_m: Some(num("altitude")?),
            },
            speed_mps: num("speed")?,
            drone_type,
        });
    }
    out.sort_by(log_order);
    Ok(out)
}

pub(crate) fn log_order(a: &DroneLogRecord, b: &DroneLogRecord) -> Ordering {
    a.t.cmp(&b.t)
        .then_with(|| a.drone_type.cmp(&b.drone_type))
        .then_with(|| a.position.lat_deg.total_cmp(&b.position.lat_deg))
        .then_with(|| a.position.lon_deg.total_cmp(&b.position.lon_deg))
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(|x| format!("{x}")).unwrap_or_default()
}

/// Write readings in the canonical sensor CSV layout. Only columns the sensor
/// kind can carry are emitted.
pub fn write_sensor_csv(path: &Path, sensor: SensorName, readings: &[SensorReading]) -> Result<()> {
    let kind = sensor.spec().kind;
    let cols: Vec<&str> = SENSOR_COLUMNS
        .iter()
        .copied()
        .filter(|c| match *c {
            "lat_deg" | "lon_deg" | "range_m" | "rcs_dbsm" => kind.is_radar(),
            "alt_m" => kind == crate::types::SensorKind::Radar3d,
            "rss_dbm" | "freq_mhz" => !kind.is_radar(),
            _ => true,
        })
        .collect();
    let mut w = csv::Writer::from_path(path).map_err(|e| map_csv_io(path, e))?;
    w.write_record(&cols)?;
    for r in readings {
        let row: Vec<String> = cols
            .iter()
            .map(|c| match *c {
                "timestamp" => r.t.to_string(),
                "lat_deg" => fmt_opt(r.position.map(|p| p.lat_deg)),
                "lon_deg" => fmt_opt(r.position.map(|p| p.lon_deg)),
                "alt_m" => fmt_opt(r.position.and_then(|p| p.alt_m)),
                "bearing_deg" => fmt_opt(r.bearing_deg),
                "range_m" => fmt_opt(r.range_m),
                "rss_dbm" => fmt_opt(r.rss_dbm),
                "rcs_dbsm" => fmt_opt(r.rcs_dbsm),
                "freq_mhz" => fmt_opt(r.freq_mhz),
                _ => unreachable!(),
            })
            .collect();
        w.write_record(&row)?;
    }
    w.flush().map_err(|e| Error::io(path, e))?;
    Ok(())
}

pub fn write_drone_log(path: &Path, records: &[DroneLogRecord]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| map_csv_io(path, e))?;
    w.write_record(LOG_COLUMNS)?;
    for r in records {
        w.write_record([
            r.t.to_string(),
            format!("{}", r.position.lat_deg),
            format!("{}", r.position.lon_deg),
            format!("{}", r.speed_mps),
            format!("{}", r.position.alt_m.unwrap_or(0.0)),
            r.drone_type.model_name().to_string(),
        ])?;
    }
    w.flush().map_err(|e| Error::io(path, e))?;
    Ok(())
}

fn map_csv_io(path: &Path, e: csv::Error) -> Error {
    if e.is_io_error() {
        match e.into_kind() {
            csv::ErrorKind::Io(io) => Error::io(path, io),
            _ => unreachable!(),
        }
    } else {
        Error::Csv(e)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MergePolicy {
    pub tolerance_ms: u64,
    /// Drop anchor rows that no sensor matched.
    pub drop_unmatched: bool,
}

impl Default for MergePolicy {
    fn default() -> Self {
        MergePolicy {
            tolerance_ms: 1_000,
            drop_unmatched: true,
        }
    }
}

impl MergePolicy {
    pub fn with_tolerance(tolerance_ms: u64) -> Self {
        MergePolicy {
            tolerance_ms,
            ..Default::default()
        }
    }
}

/// Nearest reading to `anchor` within `tolerance`; ties go to the earlier one.
fn nearest(timestamps: &[Timestamp], anchor: Timestamp, tolerance: u64) -> Option<usize> {
    let after = timestamps.partition_point(|t| *t < anchor);
    let before = after.checked_sub(1).map(|i| {
        // first of a run of equal timestamps
        let t = timestamps[i];
        timestamps[..i].partition_point(|x| *x < t)
    });
    let best = match (before, timestamps.get(after)) {
        (Some(b), Some(&ta)) => {
            if anchor.abs_diff(timestamps[b]) <= ta.abs_diff(anchor) {
                b
            } else {
                after
            }
        }
        (Some(b), None) => b,
        (None, Some(_)) => after,
        (None, None) => return None,
    };
    (timestamps[best].abs_diff(anchor) <= tolerance).then_some(best)
}

/// Convenience form of [`merge_tables`] over raw reading lists.
pub fn merge_frames(
    sensors: &[(SensorName, Vec<SensorReading>)],
    log: Option<&[DroneLogRecord]>,
    policy: MergePolicy,
) -> Result<FusedFrame> {
    let tables: Vec<SensorTable> = sensors
        .iter()
        .map(|(name, readings)| {
            let mut sorted = readings.clone();
            sorted.sort_by(reading_order);
            SensorTable::from_readings(*name, &sorted)
        })
        .collect();
    merge_tables(&tables, log, policy)
}

/// Join sensor tables onto anchor timestamps.
///
/// Anchors are the drone log records when a log is given (one row per record),
/// otherwise the sorted union of sensor timestamps. Each sensor contributes
/// its nearest reading within tolerance, or absent cells. Columns are named
/// `<sensor>.<column>`, in table order.
pub fn merge_tables(
    tables: &[SensorTable],
    log: Option<&[DroneLogRecord]>,
    policy: MergePolicy,
) -> Result<FusedFrame> {
    if policy.tolerance_ms == 0 {
        return Err(Error::InvalidValue("merge tolerance must be positive".into()));
    }
    if tables.iter().all(SensorTable::is_empty) {
        return Err(Error::NothingToMerge);
    }
    for t in tables {
        if t.timestamps.windows(2).any(|w| w[0] > w[1]) {
            return Err(Error::InvalidValue(format!(
                "{} table is not sorted by timestamp",
                t.sensor
            )));
        }
    }

    let mut sorted_log: Option<Vec<DroneLogRecord>> = log.map(<[_]>::to_vec);
    if let Some(l) = sorted_log.as_mut() {
        l.sort_by(log_order);
    }
    let anchors: Vec<Timestamp> = match &sorted_log {
        Some(l) => l.iter().map(|r| r.t).collect(),
        None => {
            let mut all: Vec<Timestamp> = tables
                .iter()
                .flat_map(|t| t.timestamps.iter().copied())
                .collect();
            all.sort();
            all.dedup();
            all
        }
    };

    let mut columns: Vec<Column> = Vec::new();
    let mut col_src: Vec<(usize, usize)> = Vec::new();
    for (ti, t) in tables.iter().enumerate() {
        for (ci, c) in t.columns.iter().enumerate() {
            let values = match &c.values {
                ColumnValues::Numeric(_) => ColumnValues::Numeric(Vec::new()),
                ColumnValues::Categorical(_) => ColumnValues::Categorical(Vec::new()),
            };
            columns.push(Column {
                name: format!("{}.{}", t.sensor.key(), c.name),
                values,
            });
            col_src.push((ti, ci));
        }
    }

    let mut frame = FusedFrame {
        columns,
        targets: sorted_log.as_ref().map(|_| Targets::default()),
        ..Default::default()
    };

    for (ai, &anchor) in anchors.iter().enumerate() {
        let matches: Vec<Option<usize>> = tables
            .iter()
            .map(|t| nearest(&t.timestamps, anchor, policy.tolerance_ms))
            .collect();
        if policy.drop_unmatched && matches.iter().all(Option::is_none) {
            continue;
        }
        for (col, &(ti, ci)) in frame.columns.iter_mut().zip(&col_src) {
            let src = &tables[ti].columns[ci].values;
            match (&mut col.values, src) {
                (ColumnValues::Numeric(dst), ColumnValues::Numeric(s)) => {
                    dst.push(matches[ti].and_then(|r| s[r]))
                }
                (ColumnValues::Categorical(dst), ColumnValues::Categorical(s)) => {
                    dst.push(matches[ti].and_then(|r| s[r].clone()))
                }
                _ => unreachable!(),
            }
        }
        frame.timestamps.push(anchor);
        frame.sources.push(RowSource {
            sensors: tables
                .iter()
                .zip(&matches)
                .filter_map(|(t, m)| m.map(|i| (t.sensor, i)))
                .collect(),
            log: sorted_log.as_ref().map(|_| ai),
        });
        if let (Some(targets), Some(l)) = (frame.targets.as_mut(), sorted_log.as_ref()) {
            let rec = &l[ai];
            targets.latitude.push(rec.position.lat_deg);
            targets.longitude.push(rec.position.lon_deg);
            targets.speed.push(rec.speed_mps);
            targets.altitude.push(rec.position.alt_m.unwrap_or(0.0));
            targets.drone_type.push(rec.drone_type);
        }
    }
    frame.scenario = vec![String::new(); frame.n_rows()];
    Ok(frame)
}

/// Everything loaded from one scenario directory.
#[derive(Debug, Clone)]
pub struct ScenarioData {
    pub id: String,
    pub dir: PathBuf,
    pub readings: Vec<(SensorName, Vec<SensorReading>)>,
    pub reports: Vec<LoadReport>,
    pub log: Option<Vec<DroneLogRecord>>,
}

impl ScenarioData {
    /// Load all four sensor files and the drone log if present.
    /// `require_log` turns a missing log into "scenario incomplete".
    pub fn load(dir: &Path, require_log: bool) -> Result<ScenarioData> {
        if !dir.is_dir() {
            return Err(Error::ScenarioIncomplete(format!(
                "no scenario directory {}",
                dir.display()
            )));
        }
        let mut readings = Vec::new();
        let mut reports = Vec::new();
        for name in SensorName::ALL {
            let (r, rep) = load_sensor_csv(&dir.join(sensor_file_name(name)), &name.spec())?;
            readings.push((name, r));
            reports.push(rep);
        }
        let log_path = dir.join(DRONE_LOG_FILE);
        let log = if log_path.is_file() {
            Some(load_drone_log(&log_path)?)
        } else if require_log {
            return Err(Error::ScenarioIncomplete(format!(
                "{} has no drone log",
                dir.display()
            )));
        } else {
            None
        };
        Ok(ScenarioData {
            id: scenario_id(dir),
            dir: dir.to_path_buf(),
            readings,
            reports,
            log,
        })
    }

    pub fn sensor(&self, name: SensorName) -> &[SensorReading] {
        self.readings
            .iter()
            .find(|(n, _)| *n == name)
            .map(|(_, r)| r.as_slice())
            .unwrap_or(&[])
    }

    pub fn sensor_mut(&mut self, name: SensorName) -> &mut Vec<SensorReading> {
        let i = self
            .readings
            .iter()
            .position(|(n, _)| *n == name)
            .expect("all four sensors are loaded");
        &mut self.readings[i].1
    }
}

pub fn scenario_id(dir: &Path) -> String {
    dir.file_name()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default()
}

/// `Scenario <major>[.<minor>]`, e.g. "Scenario 1.1" or "Scenario 3".
pub fn is_scenario_dir_name(name: &str) -> bool {
    let Some(rest) = name.strip_prefix("Scenario ") else {
        return false;
    };
    let mut parts = rest.split('.');
    let ok = |p: Option<&str>| p.is_some_and(|s| !s.is_empty() && s.chars().all(|c| c.is_ascii_digit()));
    match (parts.next(), parts.next(), parts.next()) {
        (major, None, None) => ok(major),
        (major, minor @ Some(_), None) => ok(major) && ok(minor),
        _ => false,
    }
}

/// Dataset root holding `train/` and `test/` scenario directories.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetLayout {
    pub root: PathBuf,
    pub train: Vec<String>,
    pub test: Vec<String>,
}

impl DatasetLayout {
    pub const TRAIN_DIR: &'static str = "train";
    pub const TEST_DIR: &'static str = "test";

    /// Scan `root` for scenario directories. Training scenarios must carry a
    /// drone log and test scenarios must not.
    pub fn scan(root: &Path) -> Result<DatasetLayout> {
        let list = |sub: &str| -> Result<Vec<String>> {
            let dir = root.join(sub);
            if !dir.is_dir() {
                return Ok(Vec::new());
            }
            let mut out = Vec::new();
            for entry in fs::read_dir(&dir).map_err(|e| Error::io(&dir, e))? {
                let entry = entry.map_err(|e| Error::io(&dir, e))?;
                let name = entry.file_name().to_string_lossy().into_owned();
                if entry.path().is_dir() && is_scenario_dir_name(&name) {
                    out.push(name);
                }
            }
            out.sort();
            Ok(out)
        };
        let layout = DatasetLayout {
            root: root.to_path_buf(),
            train: list(Self::TRAIN_DIR)?,
            test: list(Self::TEST_DIR)?,
        };
        for s in &layout.train {
            if !layout.train_dir(s).join(DRONE_LOG_FILE).is_file() {
                return Err(Error::ScenarioIncomplete(format!(
                    "training scenario {s} has no drone log"
                )));
            }
        }
        for s in &layout.test {
            if layout.test_dir(s).join(DRONE_LOG_FILE).is_file() {
                return Err(Error::InvalidValue(format!(
                    "test scenario {s} carries a drone log"
                )));
            }
        }
        Ok(layout)
    }

    pub fn train_dir(&self, scenario: &str) -> PathBuf {
        self.root.join(Self::TRAIN_DIR).join(scenario)
    }

    pub fn test_dir(&self, scenario: &str) -> PathBuf {
        self.root.join(Self::TEST_DIR).join(scenario)
    }
}
