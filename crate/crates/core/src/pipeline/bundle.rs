//! Model bundle: a directory holding `bundle.json` and one `.urns` file per
//! target.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::config::PipelineConfig;
use super::prepare::{ClusterSummary, Preprocessing};
use crate::error::{Error, Result};
use crate::forest::{decode, encode, ForestModel, Task, FORMAT_VERSION};
use crate::frame::Target;
use crate::metrics::{EvaluationReport, SummaryMetrics};
use crate::prep::{AnovaScore, ColumnMissing};
use crate::rfanalysis::SignatureReport;

pub const BUNDLE_FILE: &str = "bundle.json";
pub const BUNDLE_FORMAT: &str = "uranus-bundle";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvSummary {
    pub folds: usize,
    pub per_fold: Vec<SummaryMetrics>,
    pub mean: SummaryMetrics,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TargetEntry {
    pub target: Target,
    pub model_file: String,
    pub seed: u64,
    pub features: Vec<String>,
    /// Scores of every candidate feature, highest first.
    pub anova: Vec<AnovaScore>,
    pub cv: CvSummary,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioSummary {
    pub id: String,
    /// Readings loaded per sensor, before cleaning.
    pub readings: Vec<(String, usize)>,
    pub dropped_rows: usize,
    pub fence_cleared: usize,
    pub clustering: Option<ClusterSummary>,
    pub fused_rows: usize,
}

/// Step 1 output: what the training data looked like.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct TrainingAnalysis {
    pub scenarios: Vec<ScenarioSummary>,
    pub training_rows: usize,
    pub missing: Vec<ColumnMissing>,
    pub signatures: SignatureReport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BundleMeta {
    pub format: String,
    pub version: u16,
    pub seed: u64,
    /// SHA-256 over every training input file.
    pub input_digest: String,
    /// SHA-256 of the config snapshot.
    pub config_digest: String,
    pub config: PipelineConfig,
    pub preprocessing: Preprocessing,
    pub targets: Vec<TargetEntry>,
    /// Out-of-fold predictions scored against the training truth.
    pub cv_report: EvaluationReport,
    pub analysis: TrainingAnalysis,
}

/// Five models plus everything needed to reproduce their inputs.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelBundle {
    pub meta: BundleMeta,
    /// Same order as `meta.targets`.
    pub models: Vec<ForestModel>,
}

impl ModelBundle {
    pub fn model(&self, target: Target) -> Option<(&TargetEntry, &ForestModel)> {
        self.meta
            .targets
            .iter()
            .zip(&self.models)
            .find(|(e, _)| e.target == target)
    }

    /// Structural checks shared by training and loading.
    pub fn validate(&self) -> Result<()> {
        let corrupt = |m: String| Err(Error::CorruptModel(m));
        if self.meta.format != BUNDLE_FORMAT {
            return Err(Error::NotAModel);
        }
        if self.meta.version != FORMAT_VERSION {
            return Err(Error::VersionMismatch {
                expected: FORMAT_VERSION,
                found: self.meta.version,
            });
        }
        if self.meta.targets.len() != Target::ALL.len() || self.models.len() != Target::ALL.len() {
            return corrupt(format!("bundle holds {} models, expected 5", self.models.len()));
        }
        for t in Target::ALL {
            let Some((entry, model)) = self.model(t) else {
                return corrupt(format!("bundle has no {t} model"));
            };
            if model.feature_names != entry.features || model.target_name != t.name() {
                return corrupt(format!("{} does not match its bundle entry", entry.model_file));
            }
            if matches!(model.task, Task::Classification { .. }) != t.is_classification() {
                return corrupt(format!("{} has the wrong task", entry.model_file));
            }
        }
        Ok(())
    }

    /// Write atomically: files go to a sibling staging directory that is
    /// renamed into place. An existing bundle at `dir` is replaced; any other
    /// existing directory is left alone and reported.
    pub fn save(&self, dir: &Path) -> Result<()> {
        self.validate()?;
        if dir.exists() && !is_replaceable(dir) {
            return Err(Error::Config(format!(
                "{} exists and is not a model bundle",
                dir.display()
            )));
        }
        let staging = staging_dir(dir);
        if staging.exists() {
            fs::remove_dir_all(&staging).map_err(|e| Error::io(&staging, e))?;
        }
        let result = self.write_into(&staging).and_then(|()| {
            if dir.exists() {
                fs::remove_dir_all(dir).map_err(|e| Error::io(dir, e))?;
            }
            fs::rename(&staging, dir).map_err(|e| Error::io(dir, e))
        });
        if result.is_err() {
            let _ = fs::remove_dir_all(&staging);
        }
        result
    }

    fn write_into(&self, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let json = serde_json::to_vec_pretty(&self.meta)?;
        let meta_path = dir.join(BUNDLE_FILE);
        fs::write(&meta_path, json).map_err(|e| Error::io(&meta_path, e))?;
        for (entry, model) in self.meta.targets.iter().zip(&self.models) {
            let p = dir.join(&entry.model_file);
            fs::write(&p, encode(model)).map_err(|e| Error::io(&p, e))?;
        }
        Ok(())
    }

    pub fn load(dir: &Path) -> Result<ModelBundle> {
        let meta_path = dir.join(BUNDLE_FILE);
        if !meta_path.is_file() {
            // a single model file or anything else
            if dir.is_file() {
                let bytes = fs::read(dir).map_err(|e| Error::io(dir, e))?;
                decode(&bytes)?;
            }
            return Err(Error::NotAModel);
        }
        let text = fs::read(&meta_path).map_err(|e| Error::io(&meta_path, e))?;
        let probe: serde_json::Value = serde_json::from_slice(&text).map_err(|_| Error::NotAModel)?;
        if probe.get("format").and_then(|v| v.as_str()) != Some(BUNDLE_FORMAT) {
            return Err(Error::NotAModel);
        }
        if let Some(v) = probe.get("version").and_then(|v| v.as_u64()) {
            if v != u64::from(FORMAT_VERSION) {
                return Err(Error::VersionMismatch {
                    expected: FORMAT_VERSION,
                    found: u16::try_from(v).unwrap_or(u16::MAX),
                });
            }
        }
        let meta: BundleMeta =
            serde_json::from_value(probe).map_err(|e| Error::CorruptModel(format!("{BUNDLE_FILE}: {e}")))?;
        let models = meta
            .targets
            .iter()
            .map(|e| {
                if e.model_file.contains(['/', '\\']) || e.model_file.starts_with('.') {
                    return Err(Error::CorruptModel(format!("bad model file name {:?}", e.model_file)));
                }
                let p = dir.join(&e.model_file);
                decode(&fs::read(&p).map_err(|err| Error::io(&p, err))?)
            })
            .collect::<Result<Vec<_>>>()?;
        let bundle = ModelBundle { meta, models };
        bundle.validate()?;
        Ok(bundle)
    }
}

pub fn model_file_name(t: Target) -> String {
    format!("{}.urns", t.name())
}

fn staging_dir(dir: &Path) -> PathBuf {
    let name = dir
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_else(|| "bundle".into());
    dir.with_file_name(format!(".{name}.partial"))
}

fn is_replaceable(dir: &Path) -> bool {
    dir.join(BUNDLE_FILE).is_file() || fs::read_dir(dir).is_ok_and(|mut d| d.next().is_none())
}
