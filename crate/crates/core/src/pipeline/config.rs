use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::forest::ForestParams;
use crate::frame::Target;
use crate::ingest::{DatasetLayout, MergePolicy};
use crate::prep::{DroneClusterParams, ReadingField, SelectionPolicy, TrackSpeedWindow};
use crate::types::SensorName;

/// Which sensors and fields get IQR fences.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IqrScope {
    pub sensors: Vec<SensorName>,
    pub fields: Vec<ReadingField>,
}

impl Default for IqrScope {
    fn default() -> Self {
        IqrScope {
            sensors: vec![SensorName::Arcus],
            fields: vec![ReadingField::RcsDbsm, ReadingField::RangeM, ReadingField::AltM],
        }
    }
}

/// Clutter removal by k-means on one sensor's readings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ClusterConfig {
    pub enabled: bool,
    pub sensor: SensorName,
    pub k: usize,
    pub features: Vec<ReadingField>,
    pub selection: DroneClusterParams,
}

impl Default for ClusterConfig {
    fn default() -> Self {
        ClusterConfig {
            enabled: true,
            sensor: SensorName::Alvira,
            k: 2,
            features: vec![ReadingField::RcsDbsm],
            selection: DroneClusterParams::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ForestConfig {
    pub regression: ForestParams,
    pub classification: ForestParams,
    /// Per-target replacements for the two defaults above.
    pub per_target: BTreeMap<Target, ForestParams>,
}

impl Default for ForestConfig {
    fn default() -> Self {
        ForestConfig {
            regression: ForestParams::regression(),
            classification: ForestParams::classification(),
            per_target: BTreeMap::new(),
        }
    }
}

impl ForestConfig {
    pub fn params(&self, target: Target) -> &ForestParams {
        self.per_target.get(&target).unwrap_or(if target.is_classification() {
            &self.classification
        } else {
            &self.regression
        })
    }
}

fn default_tolerance() -> u64 {
    MergePolicy::default().tolerance_ms
}

fn default_folds() -> usize {
    5
}

fn default_track_speed() -> Option<TrackSpeedWindow> {
    Some(TrackSpeedWindow::default())
}

/// Training configuration, read from JSON. Only `data_root` and `seed` are
/// required.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PipelineConfig {
    pub data_root: PathBuf,
    /// Training scenario directory names. Empty means every scenario under
    /// `<data_root>/train`.
    #[serde(default)]
    pub scenarios: Vec<String>,
    #[serde(default = "default_tolerance")]
    pub merge_tolerance_ms: u64,
    #[serde(default)]
    pub iqr: IqrScope,
    #[serde(default)]
    pub clustering: ClusterConfig,
    #[serde(default)]
    pub selection: SelectionPolicy,
    /// Use one feature list (the union of the per-target selections) for all
    /// five models.
    #[serde(default)]
    pub shared_features: bool,
    #[serde(default)]
    pub forest: ForestConfig,
    #[serde(default = "default_folds")]
    pub cv_folds: usize,
    /// Extra radar feature; `null` disables it.
    #[serde(default = "default_track_speed")]
    pub track_speed: Option<TrackSpeedWindow>,
    pub seed: u64,
    /// Bundle directory; the CLI flag takes precedence. Not part of the
    /// snapshot stored in bundles.
    #[serde(default, skip_serializing)]
    pub output: Option<PathBuf>,
}

impl PipelineConfig {
    /// Defaults for everything except the data root and seed.
    pub fn new(data_root: impl Into<PathBuf>, seed: u64) -> Self {
        PipelineConfig {
            data_root: data_root.into(),
            scenarios: Vec::new(),
            merge_tolerance_ms: default_tolerance(),
            iqr: IqrScope::default(),
            clustering: ClusterConfig::default(),
            selection: SelectionPolicy::default(),
            shared_features: false,
            forest: ForestConfig::default(),
            cv_folds: default_folds(),
            track_speed: default_track_speed(),
            seed,
            output: None,
        }
    }

    /// Parse a config file. Relative paths resolve against the file's
    /// directory.
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        let mut cfg: PipelineConfig =
            serde_json::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new("."));
        cfg.data_root = base.join(&cfg.data_root);
        if let Some(out) = cfg.output.take() {
            cfg.output = Some(base.join(out));
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if self.merge_tolerance_ms == 0 {
            return bad("merge_tolerance_ms must be positive".into());
        }
        if self.cv_folds < 2 {
            return bad(format!("cv_folds must be at least 2, got {}", self.cv_folds));
        }
        if self.clustering.enabled && (self.clustering.k == 0 || self.clustering.features.is_empty()) {
            return bad("clustering needs k >= 1 and at least one feature".into());
        }
        if let SelectionPolicy::TopK(0) = self.selection {
            return bad("selection top_k must be at least 1".into());
        }
        for t in Target::ALL {
            self.forest
                .params(t)
                .validate()
                .map_err(|e| Error::Config(format!("forest params for {t}: {e}")))?;
        }
        if !self.data_root.is_dir() {
            return bad(format!("data root {} is not a directory", self.data_root.display()));
        }
        Ok(())
    }

    /// Training scenario directories, checked to exist.
    pub fn scenario_dirs(&self) -> Result<Vec<PathBuf>> {
        let names = if self.scenarios.is_empty() {
            DatasetLayout::scan(&self.data_root)?.train
        } else {
            self.scenarios.clone()
        };
        if names.is_empty() {
            return Err(Error::Config(format!(
                "no training scenarios under {}",
                self.data_root.display()
            )));
        }
        names
            .iter()
            .map(|n| {
                let nested = self.data_root.join(DatasetLayout::TRAIN_DIR).join(n);
                let flat = self.data_root.join(n);
                if nested.is_dir() {
                    Ok(nested)
                } else if flat.is_dir() {
                    Ok(flat)
                } else {
                    Err(Error::Config(format!(
                        "scenario {n:?} not found under {}",
                        self.data_root.display()
                    )))
                }
            })
            .collect()
    }

    pub fn merge_policy(&self) -> MergePolicy {
        MergePolicy::with_tolerance(self.merge_tolerance_ms)
    }
}
