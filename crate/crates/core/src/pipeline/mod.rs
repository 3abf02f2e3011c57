//! End-to-end orchestration: data analysis, IQR cleaning, clutter removal,
//! fusion, feature selection and the five forest fits, then prediction and
//! reporting on new scenarios.
//!
//! Stage failures are wrapped in [`Error::Stage`] carrying the stage name.

mod bundle;
mod config;
mod predict;
mod prepare;

use std::fs;
use std::path::{Path, PathBuf};

use log::info;
use serde::Serialize;
use sha2::{Digest, Sha256};

pub use bundle::{
    model_file_name, BundleMeta, CvSummary, ModelBundle, ScenarioSummary, TargetEntry, TrainingAnalysis,
    BUNDLE_FILE, BUNDLE_FORMAT,
};
pub use config::{ClusterConfig, ForestConfig, IqrScope, PipelineConfig};
pub use predict::{
    estimate, predict, predict_scenario, read_predictions, report, write_predictions, DescriptiveReport,
    PredictionSet, Report, Spread, TrackEstimate, PREDICTION_COLUMNS,
};
pub use prepare::{ClusterSummary, FenceEntry, Preprocessing};

use crate::error::{Error, Result};
use crate::forest::{cross_validate, fit_forest, FoldSpec, ForestModel, Prediction, TargetData, FORMAT_VERSION};
use crate::frame::{ColumnValues, FusedFrame, Target};
use crate::ingest::ScenarioData;
use crate::metrics::{evaluate_predictions, ClassPredictions, EvaluationReport, RegressionPair};
use crate::prep::{anova_scores, missing_report, select_features, AnovaScore};
use crate::rfanalysis::{distance_series, signatures, DistanceSeries, SignatureReport};
use crate::types::{DroneLogRecord, DroneType, SensorName, SensorSpec};

/// Seed for one consumer of the master seed.
pub fn derive_seed(master: u64, salt: u64) -> u64 {
    let mut x = master ^ salt.wrapping_mul(0x9e37_79b9_7f4a_7c15);
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^ (x >> 31)
}

const CLUSTER_SALT: u64 = 1;

fn target_seed(master: u64, t: Target) -> u64 {
    derive_seed(master, 100 + t as u64)
}

/// Result of a training run.
#[derive(Debug, Clone, PartialEq)]
pub struct Trained {
    pub bundle: ModelBundle,
    /// Fused, encoded training frame.
    pub frame: FusedFrame,
}

impl Trained {
    pub fn report(&self) -> &EvaluationReport {
        &self.bundle.meta.cv_report
    }
}

/// SHA-256 over every file (name and bytes) in the scenario directories,
/// in sorted order.
pub fn input_digest(dirs: &[PathBuf]) -> Result<String> {
    let mut h = Sha256::new();
    for dir in dirs {
        let mut files: Vec<PathBuf> = fs::read_dir(dir)
            .map_err(|e| Error::io(dir, e))?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.is_file())
            .collect();
        files.sort();
        h.update(crate::ingest::scenario_id(dir).as_bytes());
        for f in files {
            let bytes = fs::read(&f).map_err(|e| Error::io(&f, e))?;
            h.update(f.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default().as_bytes());
            h.update((bytes.len() as u64).to_le_bytes());
            h.update(&bytes);
        }
    }
    Ok(hex(&h.finalize()))
}

fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

/// Stages shared by training and RF analysis: ingest, IQR, clutter removal,
/// fusion and concatenation.
struct Prepared {
    snapshot: PipelineConfig,
    config_digest: String,
    input_digest: String,
    analysis: TrainingAnalysis,
    prep: Preprocessing,
    scenarios: Vec<ScenarioData>,
    /// Concatenated fused frame, before encoding.
    frame: FusedFrame,
}

fn prepare(config: &PipelineConfig) -> Result<Prepared> {
    config.validate().map_err(|e| e.at_stage("config"))?;
    // a scanned training scenario without its log is a data problem
    let dirs = config.scenario_dirs().map_err(|e| match e {
        Error::ScenarioIncomplete(_) => e.at_stage("ingest"),
        e => e.at_stage("config"),
    })?;
    let snapshot = PipelineConfig {
        output: None,
        ..config.clone()
    };
    let config_digest = hex(&Sha256::digest(serde_json::to_vec(&snapshot)?));

    // ingest
    let mut scenarios: Vec<ScenarioData> = dirs
        .iter()
        .map(|d| ScenarioData::load(d, true))
        .collect::<Result<_>>()
        .map_err(|e| e.at_stage("ingest"))?;
    let input_digest = input_digest(&dirs).map_err(|e| e.at_stage("ingest"))?;
    let mut analysis = TrainingAnalysis::default();
    for s in &scenarios {
        analysis.scenarios.push(ScenarioSummary {
            id: s.id.clone(),
            readings: s.readings.iter().map(|(n, r)| (n.key().to_string(), r.len())).collect(),
            dropped_rows: s.reports.iter().map(|r| r.dropped_rows).sum(),
            fence_cleared: 0,
            clustering: None,
            fused_rows: 0,
        });
    }

    // IQR on the configured sensors, fitted across all scenarios
    let prep = Preprocessing::fit_fences(config, &scenarios, derive_seed(config.seed, CLUSTER_SALT))
        .map_err(|e| e.at_stage("iqr"))?;
    for (s, summary) in scenarios.iter_mut().zip(&mut analysis.scenarios) {
        summary.fence_cleared = prep.apply_fences(s);
    }

    // clutter removal, guided by the log
    for (s, summary) in scenarios.iter_mut().zip(&mut analysis.scenarios) {
        let log = s.log.clone();
        summary.clustering = prep
            .remove_clutter(s, log.as_deref(), true)
            .map_err(|e| e.at_stage("kmeans"))?;
    }

    // fusion
    let mut frames = Vec::with_capacity(scenarios.len());
    for (s, summary) in scenarios.iter().zip(&mut analysis.scenarios) {
        let f = prep.fuse(s, s.log.as_deref()).map_err(|e| e.at_stage("merge"))?;
        summary.fused_rows = f.n_rows();
        frames.push(f);
    }
    let frame = FusedFrame::concat(&frames).map_err(|e| e.at_stage("merge"))?;
    if frame.is_empty() {
        return Err(Error::EmptyFrame.at_stage("merge"));
    }
    analysis.training_rows = frame.n_rows();
    analysis.signatures = signature_report(&frame);
    Ok(Prepared {
        snapshot,
        config_digest,
        input_digest,
        analysis,
        prep,
        scenarios,
        frame,
    })
}

/// Train the five models on the configured scenarios.
pub fn train(config: &PipelineConfig) -> Result<Trained> {
    let Prepared {
        snapshot,
        config_digest,
        input_digest,
        mut analysis,
        mut prep,
        mut frame,
        ..
    } = prepare(config)?;

    prep.fit_encodings(&frame).map_err(|e| e.at_stage("encode"))?;
    prep.encode(&mut frame).map_err(|e| e.at_stage("encode"))?;
    analysis.missing = missing_report(&frame).map_err(|e| e.at_stage("analysis"))?.columns;

    // feature selection
    let mut selected: Vec<(Target, Vec<AnovaScore>, Vec<String>)> = Vec::new();
    for t in Target::ALL {
        let mut scores = anova_scores(&frame, t).map_err(|e| e.at_stage("anova"))?;
        scores.sort_by(|a, b| b.f.total_cmp(&a.f).then_with(|| a.feature.cmp(&b.feature)));
        let features = select_features(&scores, config.selection);
        if features.is_empty() {
            return Err(Error::InsufficientData(format!("no features selected for {t}")).at_stage("anova"));
        }
        selected.push((t, scores, features));
    }
    if config.shared_features {
        let mut union: Vec<String> = Vec::new();
        for (_, _, f) in &selected {
            for name in f {
                if !union.contains(name) {
                    union.push(name.clone());
                }
            }
        }
        for s in &mut selected {
            s.2 = union.clone();
        }
    }

    // cross-validation and final fits
    let targets = frame.targets.clone().ok_or(Error::EmptyFrame)?;
    let labels = targets.classes();
    let mut entries = Vec::with_capacity(5);
    let mut models = Vec::with_capacity(5);
    let mut oof: Vec<Vec<Prediction>> = Vec::with_capacity(5);
    for (t, anova, features) in selected {
        let x = frame.matrix(&features).map_err(|e| e.at_stage("fit"))?;
        let data = match targets.regression(t) {
            Some(y) => TargetData::Regression(y),
            None => TargetData::Classification {
                labels: &labels,
                n_classes: DroneType::ALL.len(),
            },
        };
        let params = config.forest.params(t);
        let seed = target_seed(config.seed, t);
        info!("fitting {t} on {} rows, {} features", x.len(), features.len());
        let cv = cross_validate(&x, &data, params, FoldSpec::new(config.cv_folds, seed), seed)
            .map_err(|e| e.at_stage("fit"))?;
        let model: ForestModel =
            fit_forest(&x, &data, params, seed, &features, t.name()).map_err(|e| e.at_stage("fit"))?;
        entries.push(TargetEntry {
            target: t,
            model_file: model_file_name(t),
            seed,
            features,
            anova,
            cv: CvSummary {
                folds: cv.folds.len(),
                per_fold: cv.per_fold,
                mean: cv.mean,
            },
        });
        models.push(model);
        oof.push(cv.predictions);
    }
    let cv_report = oof_report(&targets, &labels, &oof).map_err(|e| e.at_stage("fit"))?;

    let bundle = ModelBundle {
        meta: BundleMeta {
            format: BUNDLE_FORMAT.to_string(),
            version: FORMAT_VERSION,
            seed: config.seed,
            input_digest,
            config_digest,
            config: snapshot,
            preprocessing: prep,
            targets: entries,
            cv_report,
            analysis,
        },
        models,
    };
    bundle.validate()?;
    Ok(Trained { bundle, frame })
}

/// Score out-of-fold predictions, one list per target in [`Target::ALL`]
/// order.
fn oof_report(targets: &crate::frame::Targets, labels: &[usize], oof: &[Vec<Prediction>]) -> Result<EvaluationReport> {
    let values: Vec<Vec<f64>> = Target::REGRESSION
        .iter()
        .enumerate()
        .map(|(i, _)| oof[i].iter().filter_map(Prediction::value).collect())
        .collect();
    let pairs: Vec<RegressionPair<'_>> = Target::REGRESSION
        .iter()
        .zip(&values)
        .map(|(t, p)| RegressionPair {
            target: t.name(),
            observed: targets.regression(*t).expect("regression target"),
            predicted: p,
        })
        .collect();
    let class_preds = &oof[Target::ALL.len() - 1];
    let predicted: Vec<usize> = class_preds.iter().filter_map(Prediction::class).collect();
    let scores: Vec<Vec<f64>> = class_preds
        .iter()
        .map(|p| match p {
            Prediction::Class { fractions, .. } => fractions.clone(),
            Prediction::Value(_) => Vec::new(),
        })
        .collect();
    evaluate_predictions(
        &pairs,
        Some(&ClassPredictions {
            classes: DroneType::ALL.iter().map(|d| d.model_name().to_string()).collect(),
            actual: labels,
            predicted: &predicted,
            scores: &scores,
        }),
    )
}

/// RCS from the 3D radar and operating frequencies from both RF sensors,
/// labelled by the logged drone type.
fn signature_report(frame: &FusedFrame) -> SignatureReport {
    let Some(targets) = &frame.targets else {
        return Default::default();
    };
    let rcs_col = format!("{}.rcs_dbsm", SensorName::Arcus.key());
    let rcs: Vec<(DroneType, f64)> = frame
        .numeric(&rcs_col)
        .map(|v| {
            v.iter()
                .zip(&targets.drone_type)
                .filter_map(|(x, d)| x.map(|x| (*d, x)))
                .collect()
        })
        .unwrap_or_default();
    let mut freq = Vec::new();
    for s in [SensorName::Diana, SensorName::Venus] {
        if let Ok(c) = frame.column(&format!("{}.freq_mhz", s.key())) {
            if let ColumnValues::Categorical(v) = &c.values {
                for (x, d) in v.iter().zip(&targets.drone_type) {
                    if let Some(f) = x.as_deref().and_then(|x| x.parse::<f64>().ok()) {
                        freq.push((*d, f));
                    }
                }
            }
        }
    }
    signatures(&rcs, &freq)
}

/// RF signatures and per-sensor distance series for the configured scenarios.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RfAnalysis {
    pub signatures: SignatureReport,
    pub distances: Vec<ScenarioDistances>,
}

/// Distance series of one logged drone to every sensor.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScenarioDistances {
    pub scenario: String,
    pub drone_type: DroneType,
    pub series: Vec<DistanceSeries>,
}

/// Run the preprocessing stages and fit the RCS and frequency signatures on
/// the fused rows; distances come straight from the drone logs.
pub fn analyze_rf(config: &PipelineConfig) -> Result<RfAnalysis> {
    let prepared = prepare(config)?;
    let mut distances = Vec::new();
    for s in &prepared.scenarios {
        let log = s.log.as_deref().unwrap_or_default();
        for d in DroneType::ALL {
            let track: Vec<DroneLogRecord> = log.iter().filter(|r| r.drone_type == d).cloned().collect();
            if track.is_empty() {
                continue;
            }
            let series = SensorSpec::all()
                .iter()
                .map(|spec| distance_series(&track, spec))
                .collect::<Result<_>>()
                .map_err(|e| e.at_stage("analysis"))?;
            distances.push(ScenarioDistances {
                scenario: s.id.clone(),
                drone_type: d,
                series,
            });
        }
    }
    Ok(RfAnalysis {
        signatures: prepared.analysis.signatures,
        distances,
    })
}

/// Train and save in one step; the bundle directory only appears when every
/// stage succeeded.
pub fn train_to(config: &PipelineConfig, out: &Path) -> Result<Trained> {
    let trained = train(config)?;
    trained.bundle.save(out).map_err(|e| e.at_stage("save"))?;
    Ok(trained)
}
