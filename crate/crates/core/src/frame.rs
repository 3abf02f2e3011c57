//! Columnar tables: per-sensor reading tables and the fused, timestamp-indexed frame.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::types::{DroneType, SensorName, SensorReading, Timestamp};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum ColumnValues {
    Numeric(Vec<Option<f64>>),
    Categorical(Vec<Option<String>>),
}

impl ColumnValues {
    pub fn len(&self) -> usize {
        match self {
            ColumnValues::Numeric(v) => v.len(),
            ColumnValues::Categorical(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn is_absent(&self, row: usize) -> bool {
        match self {
            ColumnValues::Numeric(v) => v[row].is_none(),
            ColumnValues::Categorical(v) => v[row].is_none(),
        }
    }

    fn empty_like(&self) -> ColumnValues {
        match self {
            ColumnValues::Numeric(_) => ColumnValues::Numeric(Vec::new()),
            ColumnValues::Categorical(_) => ColumnValues::Categorical(Vec::new()),
        }
    }

    fn push_absent(&mut self) {
        match self {
            ColumnValues::Numeric(v) => v.push(None),
            ColumnValues::Categorical(v) => v.push(None),
        }
    }

    fn push_from(&mut self, other: &ColumnValues, row: Option<usize>) {
        match (self, other) {
            (ColumnValues::Numeric(dst), ColumnValues::Numeric(src)) => {
                dst.push(row.and_then(|r| src[r]))
            }
            (ColumnValues::Categorical(dst), ColumnValues::Categorical(src)) => {
                dst.push(row.and_then(|r| src[r].clone()))
            }
            _ => unreachable!("column kinds are fixed per name"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Column {
    pub name: String,
    pub values: ColumnValues,
}

impl Column {
    pub fn numeric(name: impl Into<String>, values: Vec<Option<f64>>) -> Self {
        Column {
            name: name.into(),
            values: ColumnValues::Numeric(values),
        }
    }

    pub fn categorical(name: impl Into<String>, values: Vec<Option<String>>) -> Self {
        Column {
            name: name.into(),
            values: ColumnValues::Categorical(values),
        }
    }

    pub fn as_numeric(&self) -> Option<&[Option<f64>]> {
        match &self.values {
            ColumnValues::Numeric(v) => Some(v),
            ColumnValues::Categorical(_) => None,
        }
    }
}

/// Format a frequency as a channel label, e.g. `2406.5`.
pub fn channel_label(freq_mhz: f64) -> String {
    format!("{}", (freq_mhz * 10.0).round() / 10.0)
}

/// Columnar view of one sensor's readings, sorted by timestamp.
#[derive(Debug, Clone, PartialEq)]
pub struct SensorTable {
    pub sensor: SensorName,
    pub timestamps: Vec<Timestamp>,
    pub columns: Vec<Column>,
}

impl SensorTable {
    /// Columns carried depend on the sensor kind. Frequencies become categorical
    /// channel labels.
    pub fn from_readings(sensor: SensorName, readings: &[SensorReading]) -> Self {
        let kind = sensor.spec().kind;
        let pick = |f: &dyn Fn(&SensorReading) -> Option<f64>| -> Vec<Option<f64>> {
            readings.iter().map(f).collect()
        };
        let mut columns = Vec::new();
        if kind.is_radar() {
            columns.push(Column::numeric("lat_deg", pick(&|r| r.position.map(|p| p.lat_deg))));
            columns.push(Column::numeric("lon_deg", pick(&|r| r.position.map(|p| p.lon_deg))));
            if kind == crate::types::SensorKind::Radar3d {
                columns.push(Column::numeric(
                    "alt_m",
                    pick(&|r| r.position.and_then(|p| p.alt_m)),
                ));
            }
            columns.push(Column::numeric("bearing_deg", pick(&|r| r.bearing_deg)));
            columns.push(Column::numeric("range_m", pick(&|r| r.range_m)));
            columns.push(Column::numeric("rcs_dbsm", pick(&|r| r.rcs_dbsm)));
        } else {
            columns.push(Column::numeric("bearing_deg", pick(&|r| r.bearing_deg)));
            columns.push(Column::numeric("rss_dbm", pick(&|r| r.rss_dbm)));
            columns.push(Column::categorical(
                "freq_mhz",
                readings
                    .iter()
                    .map(|r| r.freq_mhz.map(channel_label))
                    .collect(),
            ));
        }
        SensorTable {
            sensor,
            timestamps: readings.iter().map(|r| r.t).collect(),
            columns,
        }
    }

    pub fn len(&self) -> usize {
        self.timestamps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.timestamps.is_empty()
    }

    pub fn add_column(&mut self, column: Column) -> Result<()> {
        if column.values.len() != self.len() {
            return Err(Error::LengthMismatch(format!(
                "column {} has {} values, table has {} rows",
                column.name,
                column.values.len(),
                self.len()
            )));
        }
        self.columns.retain(|c| c.name != column.name);
        self.columns.push(column);
        Ok(())
    }
}

/// The five prediction targets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Target {
    Latitude,
    Longitude,
    Speed,
    Altitude,
    DroneType,
}

impl Target {
    pub const ALL: [Target; 5] = [
        Target::Latitude,
        Target::Longitude,
        Target::Speed,
        Target::Altitude,
        Target::DroneType,
    ];
    pub const REGRESSION: [Target; 4] = [Target::Latitude, Target::Longitude, Target::Speed, Target::Altitude];

    pub fn name(self) -> &'static str {
        match self {
            Target::Latitude => "latitude",
            Target::Longitude => "longitude",
            Target::Speed => "speed",
            Target::Altitude => "altitude",
            Target::DroneType => "drone_type",
        }
    }

    pub fn is_classification(self) -> bool {
        self == Target::DroneType
    }
}

impl std::fmt::Display for Target {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Target {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Target::ALL
            .into_iter()
            .find(|t| t.name() == s)
            .ok_or_else(|| Error::InvalidValue(format!("unknown target {s:?}")))
    }
}

/// Ground-truth target columns of a training frame.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Targets {
    pub latitude: Vec<f64>,
    pub longitude: Vec<f64>,
    pub speed: Vec<f64>,
    pub altitude: Vec<f64>,
    pub drone_type: Vec<DroneType>,
}

impl Targets {
    pub fn len(&self) -> usize {
        self.latitude.len()
    }

    pub fn is_empty(&self) -> bool {
        self.latitude.is_empty()
    }

    /// Values of a regression target; `None` for the class target.
    pub fn regression(&self, t: Target) -> Option<&[f64]> {
        match t {
            Target::Latitude => Some(&self.latitude),
            Target::Longitude => Some(&self.longitude),
            Target::Speed => Some(&self.speed),
            Target::Altitude => Some(&self.altitude),
            Target::DroneType => None,
        }
    }

    /// Class indices of the drone type target.
    pub fn classes(&self) -> Vec<usize> {
        self.drone_type.iter().map(|d| d.index()).collect()
    }

    fn push_row(&mut self, other: &Targets, row: usize) {
        self.latitude.push(other.latitude[row]);
        self.longitude.push(other.longitude[row]);
        self.speed.push(other.speed[row]);
        self.altitude.push(other.altitude[row]);
        self.drone_type.push(other.drone_type[row]);
    }
}

/// Where a fused row's cells came from: an index into each sensor's sorted
/// reading list, and into the sorted drone log.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct RowSource {
    pub sensors: Vec<(SensorName, usize)>,
    pub log: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct FusedFrame {
    pub timestamps: Vec<Timestamp>,
    pub columns: Vec<Column>,
    pub targets: Option<Targets>,
    pub sources: Vec<RowSource>,
    /// Scenario label per row.
    pub scenario: Vec<String>,
}

impl FusedFrame {
    pub fn n_rows(&self) -> usize {
        self.timestamps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.timestamps.is_empty()
    }

    pub fn column_names(&self) -> Vec<&str> {
        self.columns.iter().map(|c| c.name.as_str()).collect()
    }

    pub fn column(&self, name: &str) -> Result<&Column> {
        self.columns
            .iter()
            .find(|c| c.name == name)
            .ok_or_else(|| Error::ColumnNotFound(name.to_string()))
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c.name == name)
    }

    pub fn numeric(&self, name: &str) -> Result<&[Option<f64>]> {
        self.column(name)?
            .as_numeric()
            .ok_or_else(|| Error::InvalidValue(format!("column {name} is categorical")))
    }

    /// Keep only the listed rows, in the given order.
    pub fn select_rows(&self, rows: &[usize]) -> FusedFrame {
        let columns = self
            .columns
            .iter()
            .map(|c| {
                let mut values = c.values.empty_like();
                for &r in rows {
                    values.push_from(&c.values, Some(r));
                }
                Column {
                    name: c.name.clone(),
                    values,
                }
            })
            .collect();
        let targets = self.targets.as_ref().map(|t| {
            let mut out = Targets::default();
            for &r in rows {
                out.push_row(t, r);
            }
            out
        });
        FusedFrame {
            timestamps: rows.iter().map(|&r| self.timestamps[r]).collect(),
            columns,
            targets,
            sources: rows.iter().map(|&r| self.sources[r].clone()).collect(),
            scenario: rows.iter().map(|&r| self.scenario[r].clone()).collect(),
        }
    }

    /// Stack frames vertically. Column sets are unioned in first-appearance
    /// order; cells missing from a frame become absent. Target columns must be
    /// all-present or all-absent across inputs.
    pub fn concat(frames: &[FusedFrame]) -> Result<FusedFrame> {
        let Some(first) = frames.first() else {
            return Ok(FusedFrame::default());
        };
        let with_targets = first.targets.is_some();
        if frames.iter().any(|f| f.targets.is_some() != with_targets) {
            return Err(Error::InvalidValue(
                "cannot concatenate training and test frames".into(),
            ));
        }
        let mut templates: Vec<(&str, &ColumnValues)> = Vec::new();
        for f in frames {
            for c in &f.columns {
                match templates.iter().find(|(n, _)| *n == c.name) {
                    Some((_, v)) => {
                        if std::mem::discriminant(*v) != std::mem::discriminant(&c.values) {
                            return Err(Error::InvalidValue(format!(
                                "column {} changes kind between frames",
                                c.name
                            )));
                        }
                    }
                    None => templates.push((&c.name, &c.values)),
                }
            }
        }
        let mut out = FusedFrame {
            columns: templates
                .iter()
                .map(|(n, v)| Column {
                    name: n.to_string(),
                    values: v.empty_like(),
                })
                .collect(),
            targets: with_targets.then(Targets::default),
            ..Default::default()
        };
        for f in frames {
            for (dst, (name, _)) in out.columns.iter_mut().zip(&templates) {
                match f.columns.iter().find(|c| c.name == *name) {
                    Some(src) => {
                        for r in 0..f.n_rows() {
                            dst.values.push_from(&src.values, Some(r));
                        }
                    }
                    None => {
                        for _ in 0..f.n_rows() {
                            dst.values.push_absent();
                        }
                    }
                }
            }
            if let (Some(dst), Some(src)) = (out.targets.as_mut(), f.targets.as_ref()) {
                for r in 0..src.len() {
                    dst.push_row(src, r);
                }
            }
            out.timestamps.extend_from_slice(&f.timestamps);
            out.sources.extend(f.sources.iter().cloned());
            out.scenario.extend(f.scenario.iter().cloned());
        }
        Ok(out)
    }

    /// Row-major numeric matrix over the named features.
    pub fn matrix(&self, features: &[String]) -> Result<Vec<Vec<Option<f64>>>> {
        let cols: Vec<&[Option<f64>]> = features
            .iter()
            .map(|f| {
                self.numeric(f)
                    .map_err(|_| Error::FeatureMismatch(format!("frame lacks numeric column {f}")))
            })
            .collect::<Result<_>>()?;
        Ok((0..self.n_rows())
            .map(|r| cols.iter().map(|c| c[r]).collect())
            .collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny(label: &str, n: usize, with_extra: bool) -> FusedFrame {
        let mut columns = vec![Column::numeric("a", (0..n).map(|i| Some(i as f64)).collect())];
        if with_extra {
            columns.push(Column::categorical("b", vec![Some("x".into()); n]));
        }
        FusedFrame {
            timestamps: (0..n as u64).map(Timestamp).collect(),
            columns,
            targets: None,
            sources: vec![RowSource::default(); n],
            scenario: vec![label.to_string(); n],
        }
    }

    #[test]
    fn concat_unions_columns() {
        let f = FusedFrame::concat(&[tiny("s1", 2, false), tiny("s2", 3, true)]).unwrap();
        assert_eq!(f.n_rows(), 5);
        assert_eq!(f.column_names(), vec!["a", "b"]);
        match &f.column("b").unwrap().values {
            ColumnValues::Categorical(v) => {
                assert_eq!(v[..2], [None, None]);
                assert_eq!(v[2].as_deref(), Some("x"));
            }
            _ => panic!(),
        }
        assert_eq!(f.scenario[4], "s2");
    }

    #[test]
    fn select_rows_reorders() {
        let f = tiny("s", 4, true).select_rows(&[3, 1]);
        assert_eq!(f.numeric("a").unwrap(), &[Some(3.0), Some(1.0)]);
        assert_eq!(f.timestamps, vec![Timestamp(3), Timestamp(1)]);
    }

    #[test]
    fn matrix_rejects_unknown_feature() {
        let f = tiny("s", 2, false);
        assert!(matches!(
            f.matrix(&["zzz".to_string()]),
            Err(Error::FeatureMismatch(_))
        ));
        assert_eq!(f.matrix(&["a".into()]).unwrap(), vec![vec![Some(0.0)], vec![Some(1.0)]]);
    }

    #[test]
    fn channel_labels() {
        assert_eq!(channel_label(2406.5), "2406.5");
        assert_eq!(channel_label(2440.0), "2440");
        assert_eq!(channel_label(2440.04), "2440");
    }
}
