//! Preprocessing shared by training and prediction. Everything fitted at
//! training time lives in [`Preprocessing`] and is stored in the bundle.

use log::{info, warn};
use serde::{Deserialize, Serialize};

use super::config::{ClusterConfig, PipelineConfig};
use crate::error::{Error, Result};
use crate::frame::{Column, ColumnValues, FusedFrame, SensorTable};
use crate::ingest::{merge_tables, reading_order, MergePolicy, ScenarioData};
use crate::prep::{
    apply_reading_fences, fit_reading_fences, kmeans, select_drone_cluster, silhouette, track_speed, IqrFences,
    OneHotEncoding, ReadingField, TrackSpeedWindow, TRACK_SPEED_COLUMN,
};
use crate::types::{DroneLogRecord, SensorKind, SensorName, SensorReading};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FenceEntry {
    pub sensor: SensorName,
    pub field: ReadingField,
    pub fences: IqrFences,
}

/// Frozen preprocessing parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Preprocessing {
    pub merge: MergePolicy,
    pub fences: Vec<FenceEntry>,
    pub clustering: ClusterConfig,
    pub cluster_seed: u64,
    pub track_speed: Option<TrackSpeedWindow>,
    pub encodings: Vec<OneHotEncoding>,
}

/// What clutter removal did to one scenario.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterSummary {
    pub sensor: SensorName,
    pub clustered: usize,
    pub kept: usize,
    pub removed: usize,
    /// Index of the cluster kept; `None` when selection failed and every
    /// reading was kept.
    pub cluster: Option<usize>,
    pub silhouette: Option<f64>,
}

impl Preprocessing {
    /// Fences fitted over every listed scenario; encodings start empty.
    pub(crate) fn fit_fences(config: &PipelineConfig, scenarios: &[ScenarioData], cluster_seed: u64) -> Result<Self> {
        let mut fences = Vec::new();
        for &sensor in &config.iqr.sensors {
            for &field in &config.iqr.fields {
                let all = scenarios.iter().flat_map(|s| s.sensor(sensor));
                match fit_reading_fences(all, field) {
                    Ok(f) => fences.push(FenceEntry { sensor, field, fences: f }),
                    Err(Error::InsufficientData(m)) => warn!("no {field:?} fences for {sensor}: {m}"),
                    Err(e) => return Err(e),
                }
            }
        }
        Ok(Preprocessing {
            merge: config.merge_policy(),
            fences,
            clustering: config.clustering.clone(),
            cluster_seed,
            track_speed: config.track_speed,
            encodings: Vec::new(),
        })
    }

    /// Clear out-of-fence cells. Returns the number cleared.
    pub fn apply_fences(&self, data: &mut ScenarioData) -> usize {
        self.fences
            .iter()
            .map(|e| apply_reading_fences(data.sensor_mut(e.sensor), e.field, &e.fences))
            .sum()
    }

    /// k-means on the configured sensor's readings, keeping the drone
    /// cluster. With `truth` the cluster is picked by agreement with the log,
    /// otherwise by the moving-target heuristic. Readings lacking a clustering
    /// feature are kept. When no cluster qualifies every reading is kept.
    pub fn remove_clutter(
        &self,
        data: &mut ScenarioData,
        truth: Option<&[DroneLogRecord]>,
        with_silhouette: bool,
    ) -> Result<Option<ClusterSummary>> {
        let cfg = &self.clustering;
        if !cfg.enabled {
            return Ok(None);
        }
        let id = data.id.clone();
        let readings = data.sensor_mut(cfg.sensor);
        let feature = |r: &SensorReading| -> Option<Vec<f64>> { cfg.features.iter().map(|f| f.get(r)).collect() };
        let idx: Vec<usize> = (0..readings.len()).filter(|&i| feature(&readings[i]).is_some()).collect();
        let mut summary = ClusterSummary {
            sensor: cfg.sensor,
            clustered: idx.len(),
            kept: readings.len(),
            removed: 0,
            cluster: None,
            silhouette: None,
        };
        if idx.len() < cfg.k.max(2) {
            warn!("{id}: too few {} readings to cluster; keeping all", cfg.sensor);
            return Ok(Some(summary));
        }
        let points: Vec<Vec<f64>> = idx.iter().map(|&i| feature(&readings[i]).expect("filtered")).collect();
        let km = kmeans(&points, cfg.k, self.cluster_seed)?;
        if with_silhouette {
            summary.silhouette = silhouette(&points, &km.assignments).ok().map(|s| s.mean);
        }
        let subset: Vec<SensorReading> = idx.iter().map(|&i| readings[i].clone()).collect();
        let choice = match select_drone_cluster(&subset, &km.assignments, truth, &cfg.selection) {
            Ok(c) => c,
            Err(Error::NoDroneCluster) => {
                warn!("{id}: no {} cluster looks like a drone; keeping all readings", cfg.sensor);
                return Ok(Some(summary));
            }
            Err(e) => return Err(e),
        };
        let mut keep = vec![true; readings.len()];
        for (&i, &a) in idx.iter().zip(&km.assignments) {
            keep[i] = a == choice.cluster;
        }
        let mut it = keep.iter();
        readings.retain(|_| *it.next().expect("one flag per reading"));
        summary.cluster = Some(choice.cluster);
        summary.kept = readings.len();
        summary.removed = keep.len() - readings.len();
        info!(
            "{id}: kept {} of {} {} readings",
            summary.kept,
            keep.len(),
            cfg.sensor
        );
        Ok(Some(summary))
    }

    /// Per-sensor tables (with track speed for radars) merged onto the log
    /// when given, else onto the union of sensor timestamps. Returns an empty
    /// frame when no sensor has readings.
    pub fn fuse(&self, data: &ScenarioData, log: Option<&[DroneLogRecord]>) -> Result<FusedFrame> {
        let mut tables = Vec::with_capacity(data.readings.len());
        for (name, readings) in &data.readings {
            let mut sorted = readings.clone();
            sorted.sort_by(reading_order);
            let mut table = SensorTable::from_readings(*name, &sorted);
            if let Some(window) = self.track_speed {
                let kind = name.spec().kind;
                if kind.is_radar() {
                    let speeds = track_speed(&sorted, kind == SensorKind::Radar3d, window);
                    table.add_column(Column::numeric(TRACK_SPEED_COLUMN, speeds))?;
                }
            }
            tables.push(table);
        }
        if tables.iter().all(SensorTable::is_empty) {
            return Ok(empty_frame(&tables, log.is_some()));
        }
        let mut frame = merge_tables(&tables, log, self.merge)?;
        frame.scenario = vec![data.id.clone(); frame.n_rows()];
        Ok(frame)
    }

    /// Fit one-hot vocabularies for every categorical column. Categories are
    /// sorted so the vocabulary does not depend on row order.
    pub(crate) fn fit_encodings(&mut self, frame: &FusedFrame) -> Result<()> {
        self.encodings = frame
            .columns
            .iter()
            .filter(|c| matches!(c.values, ColumnValues::Categorical(_)))
            .map(|c| {
                let mut enc = OneHotEncoding::fit(frame, &c.name)?;
                enc.categories.sort();
                Ok(enc)
            })
            .collect::<Result<_>>()?;
        Ok(())
    }

    pub fn encode(&self, frame: &mut FusedFrame) -> Result<()> {
        for enc in &self.encodings {
            enc.apply(frame)?;
        }
        Ok(())
    }
}

/// Zero-row frame with the columns a merge would have produced.
fn empty_frame(tables: &[SensorTable], with_targets: bool) -> FusedFrame {
    FusedFrame {
        columns: tables
            .iter()
            .flat_map(|t| {
                t.columns.iter().map(move |c| Column {
                    name: format!("{}.{}", t.sensor.key(), c.name),
                    values: match c.values {
                        ColumnValues::Numeric(_) => ColumnValues::Numeric(Vec::new()),
                        ColumnValues::Categorical(_) => ColumnValues::Categorical(Vec::new()),
                    },
                })
            })
            .collect(),
        targets: with_targets.then(Default::default),
        ..Default::default()
    }
}
