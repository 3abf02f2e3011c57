//! RF signature analysis: Gaussian RCS fits, operating-frequency PMFs and
//! drone-to-sensor distance series.

use std::collections::BTreeMap;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::frame::channel_label;
use crate::geo::distance_3d_m;
use crate::types::{DroneLogRecord, DroneType, SensorName, SensorSpec, Timestamp};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RcsModel {
    pub drone_type: Option<DroneType>,
    pub mean_dbsm: f64,
    /// Population (maximum-likelihood) standard deviation.
    pub sigma_dbsm: f64,
    pub count: usize,
    /// Set when every sample is identical.
    pub degenerate: bool,
}

/// Maximum-likelihood Gaussian fit. The mode of the fitted PDF is the mean.
pub fn fit_rcs(samples: &[f64]) -> Result<RcsModel> {
    if samples.len() < 2 {
        return Err(Error::InsufficientData(format!("RCS fit needs 2 samples, got {}", samples.len())));
    }
    if samples.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidValue("RCS samples must be finite".into()));
    }
    let n = samples.len() as f64;
    // shift by the first sample so constant inputs give an exact mean
    let x0 = samples[0];
    let mean = x0 + samples.iter().map(|v| v - x0).sum::<f64>() / n;
    let var = samples.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    let degenerate = samples.iter().all(|&v| v == x0);
    Ok(RcsModel {
        drone_type: None,
        mean_dbsm: mean,
        sigma_dbsm: if degenerate { 0.0 } else { var.sqrt() },
        count: samples.len(),
        degenerate,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FreqLikelihood {
    pub drone_type: Option<DroneType>,
    /// Channel label (MHz, one decimal) to probability.
    pub pmf: BTreeMap<String, f64>,
    pub mode_mhz: f64,
    pub mode_probability: f64,
    pub count: usize,
}

/// Empirical PMF over observed channels. Ties for the mode go to the lowest
/// channel.
pub fn freq_likelihood(samples: &[f64]) -> Result<FreqLikelihood> {
    if samples.is_empty() {
        return Err(Error::EmptyInput);
    }
    let mut counts: BTreeMap<u64, usize> = BTreeMap::new();
    for &f in samples {
        if !(f.is_finite() && f > 0.0) {
            return Err(Error::InvalidValue(format!("bad frequency {f}")));
        }
        *counts.entry((f * 10.0).round() as u64).or_default() += 1;
    }
    let n = samples.len() as f64;
    let (mut mode, mut best) = (0u64, 0usize);
    for (&ch, &c) in &counts {
        if c > best {
            mode = ch;
            best = c;
        }
    }
    let pmf = counts
        .iter()
        .map(|(&ch, &c)| (channel_label(ch as f64 / 10.0), c as f64 / n))
        .collect();
    Ok(FreqLikelihood {
        drone_type: None,
        pmf,
        mode_mhz: mode as f64 / 10.0,
        mode_probability: best as f64 / n,
        count: samples.len(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistanceSeries {
    pub sensor: SensorName,
    pub distance_m: Vec<(Timestamp, f64)>,
    pub altitude_m: Vec<(Timestamp, f64)>,
}

/// 3D distance from the sensor to each log position, with the altitude series.
pub fn distance_series(track: &[DroneLogRecord], sensor: &SensorSpec) -> Result<DistanceSeries> {
    if track.is_empty() {
        return Err(Error::EmptyInput);
    }
    let mut sorted: Vec<&DroneLogRecord> = track.iter().collect();
    sorted.sort_by_key(|r| r.t);
    Ok(DistanceSeries {
        sensor: sensor.name,
        distance_m: sorted
            .iter()
            .map(|r| (r.t, distance_3d_m(&sensor.position, &r.position)))
            .collect(),
        altitude_m: sorted
            .iter()
            .map(|r| (r.t, r.position.alt_m.unwrap_or(0.0)))
            .collect(),
    })
}

impl DistanceSeries {
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["timestamp", "distance_m", "alt_m"])?;
        for ((t, d), (_, a)) in self.distance_m.iter().zip(&self.altitude_m) {
            out.write_record([t.0.to_string(), d.to_string(), a.to_string()])?;
        }
        out.flush().map_err(csv::Error::from)?;
        Ok(())
    }
}

/// RCS and frequency signatures of every drone type seen in a set of
/// scenarios.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SignatureReport {
    pub rcs: Vec<RcsModel>,
    pub frequency: Vec<FreqLikelihood>,
}

/// Group samples by drone type and fit each group. Types with too few samples
/// are skipped.
pub fn signatures(rcs: &[(DroneType, f64)], freq: &[(DroneType, f64)]) -> SignatureReport {
    let mut report = SignatureReport::default();
    for t in DroneType::ALL {
        let r: Vec<f64> = rcs.iter().filter(|(d, _)| *d == t).map(|x| x.1).collect();
        if let Ok(mut m) = fit_rcs(&r) {
            m.drone_type = Some(t);
            report.rcs.push(m);
        }
        let f: Vec<f64> = freq.iter().filter(|(d, _)| *d == t).map(|x| x.1).collect();
        if let Ok(mut l) = freq_likelihood(&f) {
            l.drone_type = Some(t);
            report.frequency.push(l);
        }
    }
    report
}
