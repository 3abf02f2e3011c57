use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde::Serialize;
use uranus_core::geo::haversine_m;
use uranus_core::pipeline::{read_predictions, ModelBundle, TrackEstimate};
use uranus_core::{DroneType, Error, GeoPosition, Result, SensorName, Timestamp};

/// Points further than this from every open track start a new one.
pub const TRACK_GATE_M: f64 = 100.0;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScenarioInfo {
    pub id: String,
    pub from: Option<u64>,
    pub to: Option<u64>,
    pub rows: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DetectionRow {
    pub t: u64,
    pub sensors: Vec<SensorName>,
    pub latitude: f64,
    pub longitude: f64,
    pub altitude: f64,
    pub speed: f64,
    pub drone_type: String,
    pub confidence: f64,
}

impl From<&TrackEstimate> for DetectionRow {
    fn from(e: &TrackEstimate) -> Self {
        DetectionRow {
            t: e.t.0,
            sensors: e.sensors.clone(),
            latitude: e.latitude,
            longitude: e.longitude,
            altitude: e.altitude,
            speed: e.speed,
            drone_type: e.drone_type.model_name().to_string(),
            confidence: e.confidence,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Summary {
    pub rows: usize,
    pub modal_type: String,
    pub mean_confidence: f64,
}

/// Modal predicted type (ties to the first in type order) and mean confidence.
pub fn summarize(rows: &[&TrackEstimate]) -> Option<Summary> {
    if rows.is_empty() {
        return None;
    }
    let mut votes = [0usize; 4];
    for r in rows {
        votes[r.drone_type.index()] += 1;
    }
    let best = (0..4).fold(0, |b, i| if votes[i] > votes[b] { i } else { b });
    Some(Summary {
        rows: rows.len(),
        modal_type: DroneType::ALL[best].model_name().to_string(),
        mean_confidence: rows.iter().map(|r| r.confidence).sum::<f64>() / rows.len() as f64,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrackPoint {
    pub t: u64,
    pub latitude: f64,
    pub longitude: f64,
    pub altitude: f64,
}

/// Split time-ordered estimates into polylines: each point joins the track
/// whose last point is nearest, if within `gate_m`, otherwise opens a new one.
pub fn polylines(rows: &[&TrackEstimate], gate_m: f64) -> Vec<Vec<TrackPoint>> {
    let mut tracks: Vec<Vec<TrackPoint>> = Vec::new();
    for r in rows {
        let here = GeoPosition::surface(r.latitude, r.longitude);
        let nearest = tracks
            .iter()
            .enumerate()
            .map(|(i, tr)| {
                let last = tr.last().expect("tracks are never empty");
                (i, haversine_m(&GeoPosition::surface(last.latitude, last.longitude), &here))
            })
            .filter(|(_, d)| *d <= gate_m)
            .min_by(|a, b| a.1.total_cmp(&b.1));
        let p = TrackPoint {
            t: r.t.0,
            latitude: r.latitude,
            longitude: r.longitude,
            altitude: r.altitude,
        };
        match nearest {
            Some((i, _)) => tracks[i].push(p),
            None => tracks.push(vec![p]),
        }
    }
    tracks
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TargetInfo {
    pub target: String,
    pub features: Vec<String>,
    pub cv_accuracy: Option<f64>,
    pub cv_r2: Option<f64>,
    pub cv_mae: Option<f64>,
}

/// Bundle metadata exposed by `/model/info`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ModelInfo {
    pub format: String,
    pub version: u16,
    pub seed: u64,
    pub input_digest: String,
    pub training_rows: usize,
    pub targets: Vec<TargetInfo>,
    /// Out-of-fold drone type accuracy.
    pub cv_accuracy: Option<f64>,
}

impl From<&ModelBundle> for ModelInfo {
    fn from(b: &ModelBundle) -> Self {
        let m = &b.meta;
        ModelInfo {
            format: m.format.clone(),
            version: m.version,
            seed: m.seed,
            input_digest: m.input_digest.clone(),
            training_rows: m.analysis.training_rows,
            targets: m
                .targets
                .iter()
                .map(|e| TargetInfo {
                    target: e.target.name().to_string(),
                    features: e.features.clone(),
                    cv_accuracy: e.cv.mean.accuracy,
                    cv_r2: e.cv.mean.r2,
                    cv_mae: e.cv.mean.mae,
                })
                .collect(),
            cv_accuracy: m.cv_report.classification.as_ref().map(|c| c.accuracy),
        }
    }
}

/// Immutable prediction store: one time-sorted estimate list per scenario.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct Store {
    scenarios: BTreeMap<String, Vec<TrackEstimate>>,
    model: Option<ModelInfo>,
}

impl Store {
    pub fn new(scenarios: BTreeMap<String, Vec<TrackEstimate>>, model: Option<ModelInfo>) -> Self {
        let scenarios = scenarios
            .into_iter()
            .map(|(id, mut rows)| {
                rows.sort_by_key(|r| r.t);
                (id, rows)
            })
            .collect();
        Store { scenarios, model }
    }

    /// Every `<scenario>.csv` prediction file in `dir` (truth files are
    /// skipped), plus the bundle at `model` when given.
    pub fn load(dir: &Path, model: Option<&Path>) -> Result<Store> {
        let mut scenarios = BTreeMap::new();
        let entries = fs::read_dir(dir).map_err(|e| Error::Io {
            path: dir.to_path_buf(),
            source: e,
        })?;
        for entry in entries.flatten() {
            let path = entry.path();
            let name = entry.file_name().to_string_lossy().into_owned();
            let Some(id) = name.strip_suffix(".csv") else { continue };
            if id.ends_with(".truth") || !path.is_file() {
                continue;
            }
            scenarios.insert(id.to_string(), read_predictions(&path)?);
        }
        let model = model.map(ModelBundle::load).transpose()?.as_ref().map(ModelInfo::from);
        Ok(Store::new(scenarios, model))
    }

    pub fn list(&self) -> Vec<ScenarioInfo> {
        self.scenarios
            .iter()
            .map(|(id, rows)| ScenarioInfo {
                id: id.clone(),
                from: rows.first().map(|r| r.t.0),
                to: rows.last().map(|r| r.t.0),
                rows: rows.len(),
            })
            .collect()
    }

    pub fn model(&self) -> Option<&ModelInfo> {
        self.model.as_ref()
    }

    /// Rows with `from <= t <= to`; `None` for an unknown scenario.
    pub fn window(&self, id: &str, from: u64, to: u64) -> Option<&[TrackEstimate]> {
        let rows = self.scenarios.get(id)?;
        let lo = rows.partition_point(|r| r.t < Timestamp(from));
        let hi = rows.partition_point(|r| r.t <= Timestamp(to));
        Some(&rows[lo..hi.max(lo)])
    }
}
