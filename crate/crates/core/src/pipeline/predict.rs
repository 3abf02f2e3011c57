use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use log::warn;
use serde::{Deserialize, Serialize};

use super::bundle::ModelBundle;
use crate::error::{Error, Result};
use crate::forest::Prediction;
use crate::frame::{FusedFrame, Target};
use crate::ingest::ScenarioData;
use crate::metrics::{evaluate_predictions, ClassPredictions, EvaluationReport, RegressionPair};
use crate::types::{DroneLogRecord, DroneType, GeoPosition, SensorName, Timestamp};

/// One output row per fused test row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrackEstimate {
    pub t: Timestamp,
    /// Sensors that contributed a reading to the row.
    pub sensors: Vec<SensorName>,
    pub latitude: f64,
    pub longitude: f64,
    pub speed: f64,
    pub altitude: f64,
    pub drone_type: DroneType,
    /// Vote fraction of the predicted type.
    pub confidence: f64,
    /// Vote fraction per type, in [`DroneType::ALL`] order.
    pub fractions: [f64; 4],
}

#[derive(Debug, Clone, PartialEq)]
pub struct PredictionSet {
    pub scenario: String,
    pub rows: Vec<TrackEstimate>,
    /// Aligned 1:1 with `rows` when the scenario carried a drone log.
    pub truth: Option<Vec<DroneLogRecord>>,
}

pub const PREDICTION_COLUMNS: [&str; 12] = [
    "timestamp",
    "sensors",
    "latitude",
    "longitude",
    "speed",
    "altitude",
    "drone_type",
    "confidence",
    "p_mavic_pro",
    "p_mavic_2",
    "p_phantom_4_pro",
    "p_parrot_disco",
];

pub fn predict(bundle: &ModelBundle, scenario_dir: &Path) -> Result<PredictionSet> {
    let data = ScenarioData::load(scenario_dir, false).map_err(|e| e.at_stage("ingest"))?;
    predict_scenario(bundle, data)
}

/// Apply the frozen preprocessing and all five models. A drone log, when
/// present, only sets the row anchors and the returned truth; clutter removal
/// never looks at it.
pub fn predict_scenario(bundle: &ModelBundle, mut data: ScenarioData) -> Result<PredictionSet> {
    let prep = &bundle.meta.preprocessing;
    prep.apply_fences(&mut data);
    prep.remove_clutter(&mut data, None, false)
        .map_err(|e| e.at_stage("kmeans"))?;
    let log = data.log.take();
    let mut frame = prep.fuse(&data, log.as_deref()).map_err(|e| e.at_stage("merge"))?;
    if frame.is_empty() {
        warn!("{}: no fused rows; nothing to predict", data.id);
        return Ok(PredictionSet {
            scenario: data.id,
            rows: Vec::new(),
            truth: log.map(|_| Vec::new()),
        });
    }
    prep.encode(&mut frame).map_err(|e| e.at_stage("encode"))?;
    let rows = estimate(bundle, &frame).map_err(|e| e.at_stage("predict"))?;
    let truth = frame.targets.as_ref().map(|t| {
        (0..t.len())
            .map(|i| DroneLogRecord {
                t: frame.timestamps[i],
                position: GeoPosition {
                    lat_deg: t.latitude[i],
                    lon_deg: t.longitude[i],
                    alt_m: Some(t.altitude[i]),
                },
                speed_mps: t.speed[i],
                drone_type: t.drone_type[i],
            })
            .collect()
    });
    Ok(PredictionSet {
        scenario: data.id,
        rows,
        truth,
    })
}

/// Run every model over an encoded frame.
pub fn estimate(bundle: &ModelBundle, frame: &FusedFrame) -> Result<Vec<TrackEstimate>> {
    let mut per_target: BTreeMap<Target, Vec<Prediction>> = BTreeMap::new();
    for (entry, model) in bundle.meta.targets.iter().zip(&bundle.models) {
        let x = frame.matrix(&entry.features)?;
        per_target.insert(entry.target, model.predict_all(&x)?);
    }
    let value = |t: Target, i: usize| per_target[&t][i].value().expect("regression model");
    (0..frame.n_rows())
        .map(|i| {
            let Prediction::Class { class, fractions } = &per_target[&Target::DroneType][i] else {
                return Err(Error::CorruptModel("drone_type model is not a classifier".into()));
            };
            let mut f = [0.0; 4];
            for (dst, src) in f.iter_mut().zip(fractions) {
                *dst = *src;
            }
            let drone_type =
                DroneType::from_index(*class).ok_or_else(|| Error::CorruptModel(format!("class {class} out of range")))?;
            Ok(TrackEstimate {
                t: frame.timestamps[i],
                sensors: frame.sources[i].sensors.iter().map(|(s, _)| *s).collect(),
                latitude: value(Target::Latitude, i),
                longitude: value(Target::Longitude, i),
                speed: value(Target::Speed, i),
                altitude: value(Target::Altitude, i),
                drone_type,
                confidence: f[*class],
                fractions: f,
            })
        })
        .collect()
}

pub fn write_predictions(path: &Path, rows: &[TrackEstimate]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(PREDICTION_COLUMNS)?;
    for r in rows {
        let sensors: Vec<&str> = r.sensors.iter().map(|s| s.key()).collect();
        let mut rec = vec![
            r.t.0.to_string(),
            sensors.join("+"),
            r.latitude.to_string(),
            r.longitude.to_string(),
            r.speed.to_string(),
            r.altitude.to_string(),
            r.drone_type.model_name().to_string(),
            r.confidence.to_string(),
        ];
        rec.extend(r.fractions.iter().map(f64::to_string));
        w.write_record(&rec)?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn read_predictions(path: &Path) -> Result<Vec<TrackEstimate>> {
    let mut rdr = csv::Reader::from_path(path)?;
    let header: Vec<String> = rdr.headers()?.iter().map(str::to_string).collect();
    if header != PREDICTION_COLUMNS {
        return Err(Error::SchemaViolation {
            path: path.to_path_buf(),
            message: format!("expected columns {}", PREDICTION_COLUMNS.join(",")),
        });
    }
    let mut out = Vec::new();
    for (line, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let bad = |m: String| Error::SchemaViolation {
            path: path.to_path_buf(),
            message: format!("row {}: {m}", line + 1),
        };
        let num = |i: usize| -> Result<f64> {
            rec[i]
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| bad(format!("{} is not a number: {:?}", PREDICTION_COLUMNS[i], &rec[i])))
        };
        let t = rec[0]
            .parse::<u64>()
            .map_err(|_| bad(format!("bad timestamp {:?}", &rec[0])))?;
        let sensors = if rec[1].is_empty() {
            Vec::new()
        } else {
            rec[1].split('+').map(str::parse).collect::<Result<Vec<SensorName>>>()?
        };
        let mut fractions = [0.0; 4];
        for (k, f) in fractions.iter_mut().enumerate() {
            *f = num(8 + k)?;
        }
        out.push(TrackEstimate {
            t: Timestamp(t),
            sensors,
            latitude: num(2)?,
            longitude: num(3)?,
            speed: num(4)?,
            altitude: num(5)?,
            drone_type: rec[6].parse()?,
            confidence: num(7)?,
            fractions,
        });
    }
    Ok(out)
}

/// Range and mean of one predicted quantity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Spread {
    pub min: f64,
    pub max: f64,
    pub mean: f64,
}

impl Spread {
    fn of(v: impl Iterator<Item = f64>) -> Option<Spread> {
        let (mut n, mut min, mut max, mut sum) = (0usize, f64::INFINITY, f64::NEG_INFINITY, 0.0);
        for x in v {
            n += 1;
            min = min.min(x);
            max = max.max(x);
            sum += x;
        }
        (n > 0).then(|| Spread {
            min,
            max,
            mean: sum / n as f64,
        })
    }
}

/// What can be said about predictions without ground truth.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct DescriptiveReport {
    pub rows: usize,
    pub first: Option<Timestamp>,
    pub last: Option<Timestamp>,
    pub targets: BTreeMap<String, Spread>,
    pub class_distribution: BTreeMap<String, usize>,
    pub mean_confidence: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum Report {
    Evaluation(EvaluationReport),
    Descriptive(DescriptiveReport),
}

impl Report {
    pub fn summary(&self) -> String {
        match self {
            Report::Evaluation(e) => e.summary(),
            Report::Descriptive(d) => {
                let mut s = String::new();
                let _ = writeln!(s, "rows: {}", d.rows);
                if let (Some(a), Some(b)) = (d.first, d.last) {
                    let _ = writeln!(s, "time span: {} .. {}", a.0, b.0);
                }
                if !d.targets.is_empty() {
                    let _ = writeln!(s, "\n{:<12} {:>16} {:>16} {:>16}", "target", "min", "max", "mean");
                    for (t, sp) in &d.targets {
                        let _ = writeln!(s, "{:<12} {:>16.6} {:>16.6} {:>16.6}", t, sp.min, sp.max, sp.mean);
                    }
                }
                if !d.class_distribution.is_empty() {
                    let _ = writeln!(s, "\npredicted types:");
                    for (c, n) in &d.class_distribution {
                        let _ = writeln!(s, "  {c:<18} {n}");
                    }
                }
                if let Some(c) = d.mean_confidence {
                    let _ = writeln!(s, "mean confidence: {c:.4}");
                }
                s
            }
        }
    }
}

/// Score predictions against truth rows with the same timestamps, or
/// describe them when no truth is given.
pub fn report(predictions: &[TrackEstimate], truth: Option<&[DroneLogRecord]>) -> Result<Report> {
    let Some(truth) = truth else {
        return Ok(Report::Descriptive(describe(predictions)));
    };
    if truth.len() != predictions.len() {
        return Err(Error::LengthMismatch(format!(
            "{} predictions, {} truth rows",
            predictions.len(),
            truth.len()
        )));
    }
    if let Some(i) = (0..truth.len()).find(|&i| truth[i].t != predictions[i].t) {
        return Err(Error::LengthMismatch(format!(
            "row {i}: prediction at {} but truth at {}",
            predictions[i].t, truth[i].t
        )));
    }
    if predictions.is_empty() {
        return Ok(Report::Evaluation(EvaluationReport::default()));
    }
    let col = |f: &dyn Fn(&TrackEstimate) -> f64| -> Vec<f64> { predictions.iter().map(f).collect() };
    let obs = |f: &dyn Fn(&DroneLogRecord) -> f64| -> Vec<f64> { truth.iter().map(f).collect() };
    let series = [
        (Target::Latitude, obs(&|r| r.position.lat_deg), col(&|p| p.latitude)),
        (Target::Longitude, obs(&|r| r.position.lon_deg), col(&|p| p.longitude)),
        (Target::Speed, obs(&|r| r.speed_mps), col(&|p| p.speed)),
        (
            Target::Altitude,
            obs(&|r| r.position.alt_m.unwrap_or(0.0)),
            col(&|p| p.altitude),
        ),
    ];
    let pairs: Vec<RegressionPair<'_>> = series
        .iter()
        .map(|(t, o, p)| RegressionPair {
            target: t.name(),
            observed: o,
            predicted: p,
        })
        .collect();
    let actual: Vec<usize> = truth.iter().map(|r| r.drone_type.index()).collect();
    let predicted: Vec<usize> = predictions.iter().map(|p| p.drone_type.index()).collect();
    let scores: Vec<Vec<f64>> = predictions.iter().map(|p| p.fractions.to_vec()).collect();
    let classes = ClassPredictions {
        classes: DroneType::ALL.iter().map(|d| d.model_name().to_string()).collect(),
        actual: &actual,
        predicted: &predicted,
        scores: &scores,
    };
    Ok(Report::Evaluation(evaluate_predictions(&pairs, Some(&classes))?))
}

fn describe(p: &[TrackEstimate]) -> DescriptiveReport {
    let mut d = DescriptiveReport {
        rows: p.len(),
        first: p.iter().map(|r| r.t).min(),
        last: p.iter().map(|r| r.t).max(),
        mean_confidence: Spread::of(p.iter().map(|r| r.confidence)).map(|s| s.mean),
        ..Default::default()
    };
    let fields: [(Target, fn(&TrackEstimate) -> f64); 4] = [
        (Target::Latitude, |r| r.latitude),
        (Target::Longitude, |r| r.longitude),
        (Target::Speed, |r| r.speed),
        (Target::Altitude, |r| r.altitude),
    ];
    for (t, f) in fields {
        if let Some(s) = Spread::of(p.iter().map(f)) {
            d.targets.insert(t.name().to_string(), s);
        }
    }
    for r in p {
        *d.class_distribution.entry(r.drone_type.model_name().to_string()).or_default() += 1;
    }
    d
}
