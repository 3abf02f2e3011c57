//! Preprocessing: missingness report, IQR outlier removal, one-hot encoding,
//! k-means with silhouette scoring, drone-cluster selection, ANOVA feature
//! ranking and radar track-speed features.

use std::cmp::Ordering;
use std::collections::{BTreeSet, HashMap};
use std::io::Write;

use log::warn;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::frame::{Column, ColumnValues, FusedFrame, Target};
use crate::geo::{distance_3d_m, haversine_m};
use crate::types::{DroneLogRecord, SensorReading};

// ---------------------------------------------------------------------------
// Missingness

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MissingTag {
    McarCandidate,
    MarCandidate,
    /// Never assigned automatically; exists so reviewers can annotate.
    MnarUnknown,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ColumnMissing {
    pub name: String,
    pub missing: usize,
    pub percent: f64,
    pub tag: MissingTag,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MissingReport {
    pub n_rows: usize,
    pub columns: Vec<ColumnMissing>,
    /// `mask[row][col]` is true when the cell is absent.
    pub mask: Vec<Vec<bool>>,
    /// `row_histogram[k]` = number of rows with exactly `k` absent cells.
    pub row_histogram: Vec<usize>,
    /// Pearson correlation between missingness indicators; `None` when either
    /// indicator is constant.
    pub correlation: Vec<Vec<Option<f64>>>,
}

/// Indicator correlation above which a column is tagged MAR-candidate.
pub const MAR_THRESHOLD: f64 = 0.5;

pub fn pearson(x: &[f64], y: &[f64]) -> Option<f64> {
    let n = x.len();
    if n < 2 || n != y.len() {
        return None;
    }
    let mx = x.iter().sum::<f64>() / n as f64;
    let my = y.iter().sum::<f64>() / n as f64;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let (dx, dy) = (a - mx, b - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return None;
    }
    Some((sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0))
}

pub fn missing_report(frame: &FusedFrame) -> Result<MissingReport> {
    let n = frame.n_rows();
    if n == 0 || frame.columns.is_empty() {
        return Err(Error::EmptyFrame);
    }
    let indicators: Vec<Vec<f64>> = frame
        .columns
        .iter()
        .map(|c| (0..n).map(|r| if c.values.is_absent(r) { 1.0 } else { 0.0 }).collect())
        .collect();
    let mask: Vec<Vec<bool>> = (0..n)
        .map(|r| indicators.iter().map(|ind| ind[r] == 1.0).collect())
        .collect();
    let mut row_histogram = vec![0usize; frame.columns.len() + 1];
    for row in &mask {
        row_histogram[row.iter().filter(|&&b| b).count()] += 1;
    }
    let correlation: Vec<Vec<Option<f64>>> = indicators
        .iter()
        .map(|a| indicators.iter().map(|b| pearson(a, b)).collect())
        .collect();

    let columns = frame
        .columns
        .iter()
        .enumerate()
        .map(|(ci, c)| {
            let missing = indicators[ci].iter().filter(|&&v| v == 1.0).count();
            let mar = missing > 0
                && frame.columns.iter().enumerate().any(|(oi, other)| {
                    if oi == ci {
                        return false;
                    }
                    let Some(vals) = other.as_numeric() else {
                        return false;
                    };
                    let (xs, ys): (Vec<f64>, Vec<f64>) = vals
                        .iter()
                        .zip(&indicators[ci])
                        .filter_map(|(v, ind)| v.map(|v| (v, *ind)))
                        .unzip();
                    pearson(&xs, &ys).is_some_and(|r| r.abs() > MAR_THRESHOLD)
                });
            ColumnMissing {
                name: c.name.clone(),
                missing,
                percent: 100.0 * missing as f64 / n as f64,
                tag: if mar {
                    MissingTag::MarCandidate
                } else {
                    MissingTag::McarCandidate
                },
            }
        })
        .collect();

    Ok(MissingReport {
        n_rows: n,
        columns,
        mask,
        row_histogram,
        correlation,
    })
}

impl MissingReport {
    /// Heatmap mask as CSV: header of column names, one 0/1 row per frame row.
    pub fn write_mask_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(self.columns.iter().map(|c| c.name.as_str()))?;
        for row in &self.mask {
            out.write_record(row.iter().map(|&b| if b { "1" } else { "0" }))?;
        }
        out.flush().map_err(csv::Error::from)?;
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// IQR

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IqrFences {
    pub q1: f64,
    pub q3: f64,
    pub iqr: f64,
    pub lower: f64,
    pub upper: f64,
}

impl IqrFences {
    pub fn contains(&self, v: f64) -> bool {
        v >= self.lower && v <= self.upper
    }
}

/// Quantile by linear interpolation between order statistics (`sorted` ascending).
pub fn quantile(sorted: &[f64], p: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * p;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

pub fn iqr_fences(values: &[f64]) -> Result<IqrFences> {
    let mut v: Vec<f64> = values.iter().copied().filter(|x| x.is_finite()).collect();
    if v.len() < 4 {
        return Err(Error::InsufficientData(format!(
            "IQR needs at least 4 finite values, got {}",
            v.len()
        )));
    }
    v.sort_by(f64::total_cmp);
    let q1 = quantile(&v, 0.25);
    let q3 = quantile(&v, 0.75);
    let iqr = q3 - q1;
    Ok(IqrFences {
        q1,
        q3,
        iqr,
        lower: q1 - 1.5 * iqr,
        upper: q3 + 1.5 * iqr,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct IqrOutcome {
    pub fences: IqrFences,
    pub retained: Vec<f64>,
    pub outliers: Vec<usize>,
}

pub fn iqr_filter(values: &[f64]) -> Result<IqrOutcome> {
    let fences = iqr_fences(values)?;
    let mut retained = Vec::with_capacity(values.len());
    let mut outliers = Vec::new();
    for (i, &v) in values.iter().enumerate() {
        if fences.contains(v) {
            retained.push(v);
        } else {
            outliers.push(i);
        }
    }
    Ok(IqrOutcome {
        fences,
        retained,
        outliers,
    })
}

/// Numeric fields of a reading that IQR cleaning can act on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReadingField {
    RcsDbsm,
    RangeM,
    AltM,
    RssDbm,
}

impl ReadingField {
    pub fn get(self, r: &SensorReading) -> Option<f64> {
        match self {
            ReadingField::RcsDbsm => r.rcs_dbsm,
            ReadingField::RangeM => r.range_m,
            ReadingField::AltM => r.position.and_then(|p| p.alt_m),
            ReadingField::RssDbm => r.rss_dbm,
        }
    }

    pub fn clear(self, r: &mut SensorReading) {
        match self {
            ReadingField::RcsDbsm => r.rcs_dbsm = None,
            ReadingField::RangeM => r.range_m = None,
            ReadingField::AltM => {
                if let Some(p) = r.position.as_mut() {
                    p.alt_m = None
                }
            }
            ReadingField::RssDbm => r.rss_dbm = None,
        }
    }
}

/// Fit fences for `field` over all present values.
pub fn fit_reading_fences<'a, I>(readings: I, field: ReadingField) -> Result<IqrFences>
where
    I: IntoIterator<Item = &'a SensorReading>,
{
    let vals: Vec<f64> = readings.into_iter().filter_map(|r| field.get(r)).collect();
    iqr_fences(&vals)
}

/// Mark values outside the fences absent. Returns how many cells were cleared.
pub fn apply_reading_fences(readings: &mut [SensorReading], field: ReadingField, fences: &IqrFences) -> usize {
    let mut cleared = 0;
    for r in readings {
        if field.get(r).is_some_and(|v| !fences.contains(v)) {
            field.clear(r);
            cleared += 1;
        }
    }
    cleared
}

// ---------------------------------------------------------------------------
// One-hot

/// Frozen category vocabulary of one categorical column.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OneHotEncoding {
    pub column: String,
    pub categories: Vec<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct OneHotOutcome {
    /// Rows whose source cell was absent (all-zero encoding).
    pub absent_rows: Vec<usize>,
    /// Rows whose category was not in the vocabulary (all-zero encoding).
    pub unseen_rows: Vec<usize>,
}

fn categorical<'a>(frame: &'a FusedFrame, column: &str) -> Result<&'a [Option<String>]> {
    match &frame.column(column)?.values {
        ColumnValues::Categorical(v) => Ok(v),
        ColumnValues::Numeric(_) => Err(Error::InvalidValue(format!("column {column} is not categorical"))),
    }
}

impl OneHotEncoding {
    /// Vocabulary in first-appearance order.
    pub fn fit(frame: &FusedFrame, column: &str) -> Result<Self> {
        let mut categories: Vec<String> = Vec::new();
        for v in categorical(frame, column)?.iter().flatten() {
            if !categories.contains(v) {
                categories.push(v.clone());
            }
        }
        Ok(OneHotEncoding {
            column: column.to_string(),
            categories,
        })
    }

    pub fn indicator_name(&self, category: &str) -> String {
        format!("{}={}", self.column, category)
    }

    pub fn column_names(&self) -> Vec<String> {
        self.categories.iter().map(|c| self.indicator_name(c)).collect()
    }

    /// Replace the categorical column by one 0/1 column per category, in place.
    pub fn apply(&self, frame: &mut FusedFrame) -> Result<OneHotOutcome> {
        let idx = frame
            .column_index(&self.column)
            .ok_or_else(|| Error::ColumnNotFound(self.column.clone()))?;
        let values = categorical(frame, &self.column)?;
        let lookup: HashMap<&str, usize> = self
            .categories
            .iter()
            .enumerate()
            .map(|(i, c)| (c.as_str(), i))
            .collect();
        let mut cols = vec![Vec::with_capacity(values.len()); self.categories.len()];
        let mut outcome = OneHotOutcome::default();
        for (row, v) in values.iter().enumerate() {
            let hit = match v {
                None => {
                    outcome.absent_rows.push(row);
                    None
                }
                Some(v) => {
                    let hit = lookup.get(v.as_str()).copied();
                    if hit.is_none() {
                        outcome.unseen_rows.push(row);
                    }
                    hit
                }
            };
            for (ci, col) in cols.iter_mut().enumerate() {
                col.push(Some(if hit == Some(ci) { 1.0 } else { 0.0 }));
            }
        }
        if !outcome.unseen_rows.is_empty() {
            warn!(
                "{}: {} rows carry categories unseen at fit time; encoded as all zeros",
                self.column,
                outcome.unseen_rows.len()
            );
        }
        let new_cols: Vec<Column> = self
            .column_names()
            .into_iter()
            .zip(cols)
            .map(|(name, v)| Column::numeric(name, v))
            .collect();
        frame.columns.splice(idx..=idx, new_cols);
        Ok(outcome)
    }

    /// Reconstruct the categorical column from the indicator columns. Rows with
    /// no indicator set map to absent.
    pub fn invert(&self, frame: &FusedFrame) -> Result<Vec<Option<String>>> {
        let cols: Vec<&[Option<f64>]> = self
            .column_names()
            .iter()
            .map(|n| frame.numeric(n))
            .collect::<Result<_>>()?;
        Ok((0..frame.n_rows())
            .map(|r| {
                cols.iter()
                    .position(|c| c[r] == Some(1.0))
                    .map(|i| self.categories[i].clone())
            })
            .collect())
    }
}

/// Fit a vocabulary on `column` and encode it in place.
pub fn one_hot(frame: &mut FusedFrame, column: &str) -> Result<(OneHotEncoding, OneHotOutcome)> {
    let enc = OneHotEncoding::fit(frame, column)?;
    let outcome = enc.apply(frame)?;
    Ok((enc, outcome))
}

// ---------------------------------------------------------------------------
// k-means and silhouette

pub const KMEANS_MAX_ITER: usize = 300;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KMeansResult {
    pub assignments: Vec<usize>,
    pub centroids: Vec<Vec<f64>>,
    pub iterations: usize,
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

fn euclid(a: &[f64], b: &[f64]) -> f64 {
    sq_dist(a, b).sqrt()
}

/// Index of the nearest centroid; ties go to the lowest index.
pub fn nearest_centroid(centroids: &[Vec<f64>], p: &[f64]) -> usize {
    let mut best = 0;
    let mut best_d = f64::INFINITY;
    for (i, c) in centroids.iter().enumerate() {
        let d = sq_dist(c, p);
        if d < best_d {
            best = i;
            best_d = d;
        }
    }
    best
}

/// Lloyd's algorithm with k-means++ seeding. Empty clusters keep their
/// previous centroid.
pub fn kmeans(points: &[Vec<f64>], k: usize, seed: u64) -> Result<KMeansResult> {
    if k == 0 {
        return Err(Error::InvalidValue("k must be at least 1".into()));
    }
    if points.len() < k {
        return Err(Error::InsufficientData(format!("k = {k} exceeds {} points", points.len())));
    }
    let dim = points[0].len();
    if points.iter().any(|p| p.len() != dim || p.iter().any(|v| !v.is_finite())) {
        return Err(Error::InvalidValue("points must be finite and share one dimension".into()));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut centroids = vec![points[rng.random_range(0..points.len())].clone()];
    let mut d2: Vec<f64> = points.iter().map(|p| sq_dist(p, &centroids[0])).collect();
    while centroids.len() < k {
        let total: f64 = d2.iter().sum();
        let next = if total > 0.0 {
            let target = rng.random::<f64>() * total;
            let mut acc = 0.0;
            let mut pick = d2.iter().rposition(|&d| d > 0.0).unwrap_or(0);
            for (i, d) in d2.iter().enumerate() {
                acc += d;
                if acc > target && *d > 0.0 {
                    pick = i;
                    break;
                }
            }
            pick
        } else {
            rng.random_range(0..points.len())
        };
        centroids.push(points[next].clone());
        for (d, p) in d2.iter_mut().zip(points) {
            *d = d.min(sq_dist(p, &centroids[centroids.len() - 1]));
        }
    }

    let mut assignments: Vec<usize> = points.iter().map(|p| nearest_centroid(&centroids, p)).collect();
    let mut iterations = 0;
    while iterations < KMEANS_MAX_ITER {
        iterations += 1;
        let mut sums = vec![vec![0.0; dim]; k];
        let mut counts = vec![0usize; k];
        for (p, &a) in points.iter().zip(&assignments) {
            counts[a] += 1;
            for (s, v) in sums[a].iter_mut().zip(p) {
                *s += v;
            }
        }
        for c in 0..k {
            if counts[c] > 0 {
                centroids[c] = sums[c].iter().map(|s| s / counts[c] as f64).collect();
            }
        }
        let next: Vec<usize> = points.iter().map(|p| nearest_centroid(&centroids, p)).collect();
        if next == assignments {
            break;
        }
        assignments = next;
    }
    Ok(KMeansResult {
        assignments,
        centroids,
        iterations,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SilhouetteResult {
    pub s: Vec<f64>,
    pub a: Vec<f64>,
    pub b: Vec<f64>,
    pub mean: f64,
}

/// Per-point `(b - a) / max(a, b)`; points in singleton clusters score 0.
/// Cluster labels may be any integers.
pub fn silhouette(points: &[Vec<f64>], assignments: &[usize]) -> Result<SilhouetteResult> {
    if points.len() != assignments.len() {
        return Err(Error::LengthMismatch(format!(
            "{} points, {} assignments",
            points.len(),
            assignments.len()
        )));
    }
    let labels: Vec<usize> = assignments.iter().copied().collect::<BTreeSet<_>>().into_iter().collect();
    if labels.len() < 2 {
        return Err(Error::SilhouetteUndefined("fewer than two clusters".into()));
    }
    let slot: HashMap<usize, usize> = labels.iter().enumerate().map(|(i, &l)| (l, i)).collect();
    let members: Vec<usize> = assignments.iter().map(|l| slot[l]).collect();
    let mut sizes = vec![0usize; labels.len()];
    for &m in &members {
        sizes[m] += 1;
    }

    let n = points.len();
    let (mut s, mut a, mut b) = (vec![0.0; n], vec![0.0; n], vec![0.0; n]);
    let mut sums = vec![0.0; labels.len()];
    for i in 0..n {
        sums.iter_mut().for_each(|x| *x = 0.0);
        for j in 0..n {
            if i != j {
                sums[members[j]] += euclid(&points[i], &points[j]);
            }
        }
        let own = members[i];
        b[i] = (0..labels.len())
            .filter(|&c| c != own)
            .map(|c| sums[c] / sizes[c] as f64)
            .fold(f64::INFINITY, f64::min);
        if sizes[own] == 1 {
            continue;
        }
        a[i] = sums[own] / (sizes[own] - 1) as f64;
        let m = a[i].max(b[i]);
        s[i] = if m > 0.0 { (b[i] - a[i]) / m } else { 0.0 };
    }
    let mean = s.iter().sum::<f64>() / n as f64;
    Ok(SilhouetteResult { s, a, b, mean })
}

// ---------------------------------------------------------------------------
// Drone cluster selection

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DroneClusterParams {
    /// Time window for matching a reading to a log record.
    pub tolerance_ms: u64,
    /// Maximum horizontal distance from a log position.
    pub max_distance_m: f64,
    /// Minimum net speed for the moving-target heuristic.
    pub min_speed_mps: f64,
    pub min_members: usize,
}

impl Default for DroneClusterParams {
    fn default() -> Self {
        DroneClusterParams {
            tolerance_ms: 1_000,
            max_distance_m: 100.0,
            min_speed_mps: 1.0,
            min_members: 2,
        }
    }
}

/// Per-cluster score: truth matches (with a log) or net displacement rate in
/// m/s (without).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterChoice {
    pub cluster: usize,
    pub scores: Vec<f64>,
}

/// Pick the cluster that holds the drone.
///
/// With a log (sorted by time) the winner has the most readings within the
/// time tolerance and distance limit of some log position. Without one, the
/// winner moves fastest: net displacement between the mean position of its
/// first and last tenth of readings, divided by the time between them.
pub fn select_drone_cluster(
    readings: &[SensorReading],
    assignments: &[usize],
    truth: Option<&[DroneLogRecord]>,
    params: &DroneClusterParams,
) -> Result<ClusterChoice> {
    if readings.len() != assignments.len() {
        return Err(Error::LengthMismatch(format!(
            "{} readings, {} assignments",
            readings.len(),
            assignments.len()
        )));
    }
    let k = assignments.iter().max().map_or(0, |m| m + 1);
    let mut scores = vec![0.0; k];
    match truth {
        Some(log) => {
            for (r, &c) in readings.iter().zip(assignments) {
                let Some(p) = r.position else { continue };
                let lo = log.partition_point(|x| x.t.0 + params.tolerance_ms < r.t.0);
                let hit = log[lo..]
                    .iter()
                    .take_while(|x| x.t.0 <= r.t.0 + params.tolerance_ms)
                    .any(|x| haversine_m(&x.position, &p) <= params.max_distance_m);
                if hit {
                    scores[c] += 1.0;
                }
            }
        }
        None => {
            for (c, score) in scores.iter_mut().enumerate() {
                let mut pts: Vec<&SensorReading> = readings
                    .iter()
                    .zip(assignments)
                    .filter(|(r, &a)| a == c && r.position.is_some())
                    .map(|(r, _)| r)
                    .collect();
                if pts.len() < params.min_members {
                    continue;
                }
                pts.sort_by_key(|r| r.t);
                let m = (pts.len() / 10).max(1);
                let centre = |s: &[&SensorReading]| {
                    let n = s.len() as f64;
                    let lat = s.iter().map(|r| r.position.unwrap().lat_deg).sum::<f64>() / n;
                    let lon = s.iter().map(|r| r.position.unwrap().lon_deg).sum::<f64>() / n;
                    let t = s.iter().map(|r| r.t.0 as f64).sum::<f64>() / n;
                    (crate::types::GeoPosition::surface(lat, lon), t)
                };
                let (p0, t0) = centre(&pts[..m]);
                let (p1, t1) = centre(&pts[pts.len() - m..]);
                let dt = (t1 - t0) / 1000.0;
                if dt > 0.0 {
                    let rate = haversine_m(&p0, &p1) / dt;
                    if rate >= params.min_speed_mps {
                        *score = rate;
                    }
                }
            }
        }
    }
    let best = scores
        .iter()
        .enumerate()
        .filter(|(_, &s)| s > 0.0)
        .max_by(|a, b| a.1.total_cmp(b.1).then(b.0.cmp(&a.0)))
        .map(|(i, _)| i)
        .ok_or(Error::NoDroneCluster)?;
    Ok(ClusterChoice { cluster: best, scores })
}

// ---------------------------------------------------------------------------
// ANOVA

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnovaScore {
    pub feature: String,
    pub target: String,
    /// F statistic; `f64::INFINITY` when groups are perfectly separated.
    #[serde(with = "f_serde")]
    pub f: f64,
    pub df: (usize, usize),
}

/// JSON has no infinity; encode it as the string "inf".
mod f_serde {
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    #[derive(Serialize, Deserialize)]
    #[serde(untagged)]
    enum Repr {
        Num(f64),
        Text(String),
    }

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_infinite() {
            Repr::Text("inf".into()).serialize(s)
        } else {
            Repr::Num(*v).serialize(s)
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        match Repr::deserialize(d)? {
            Repr::Num(v) => Ok(v),
            Repr::Text(t) if t == "inf" => Ok(f64::INFINITY),
            Repr::Text(t) => Err(serde::de::Error::custom(format!("bad F value {t:?}"))),
        }
    }
}

/// Classic one-way F over labelled groups. Returns (F, (g - 1, n - g)).
pub fn anova_groups(values: &[f64], groups: &[usize]) -> Result<(f64, (usize, usize))> {
    if values.len() != groups.len() {
        return Err(Error::LengthMismatch(format!("{} values, {} labels", values.len(), groups.len())));
    }
    let mut by: HashMap<usize, (f64, usize)> = HashMap::new();
    for (&v, &g) in values.iter().zip(groups) {
        let e = by.entry(g).or_default();
        e.0 += v;
        e.1 += 1;
    }
    let n = values.len();
    let g = by.len();
    if g < 2 || n <= g {
        return Err(Error::DegenerateGroups(format!("{g} groups over {n} samples")));
    }
    let grand = values.iter().sum::<f64>() / n as f64;
    let means: HashMap<usize, f64> = by.iter().map(|(&k, &(s, c))| (k, s / c as f64)).collect();
    // sum in a fixed label order so permuted inputs give identical sums
    let mut labels: Vec<usize> = by.keys().copied().collect();
    labels.sort_unstable();
    let ssb: f64 = labels
        .iter()
        .map(|l| by[l].1 as f64 * (means[l] - grand).powi(2))
        .sum();
    let ssw: f64 = values.iter().zip(groups).map(|(v, g)| (v - means[g]).powi(2)).sum();
    let df = (g - 1, n - g);
    let f = if ssw == 0.0 {
        if ssb > 0.0 {
            f64::INFINITY
        } else {
            0.0
        }
    } else {
        (ssb / df.0 as f64) / (ssw / df.1 as f64)
    };
    Ok((f, df))
}

/// Univariate-regression F: r²(n - 2) / (1 - r²). Returns (F, (1, n - 2)).
pub fn regression_f(x: &[f64], y: &[f64]) -> Result<(f64, (usize, usize))> {
    if x.len() != y.len() {
        return Err(Error::LengthMismatch(format!("{} values, {} targets", x.len(), y.len())));
    }
    let n = x.len();
    if n < 3 {
        return Err(Error::DegenerateGroups(format!("{n} samples; need at least 3")));
    }
    let df = (1, n - 2);
    let Some(r) = pearson(x, y) else {
        return Ok((0.0, df));
    };
    let r2 = r * r;
    let f = if r2 >= 1.0 {
        f64::INFINITY
    } else {
        r2 * (n - 2) as f64 / (1.0 - r2)
    };
    Ok((f, df))
}

/// F score of one numeric feature against one target. Rows where the feature
/// is absent are skipped.
pub fn anova_f(frame: &FusedFrame, feature: &str, target: Target) -> Result<AnovaScore> {
    let targets = frame
        .targets
        .as_ref()
        .ok_or_else(|| Error::InvalidValue("frame has no targets".into()))?;
    let col = frame.numeric(feature)?;
    let (f, df) = match targets.regression(target) {
        Some(y) => {
            let (xs, ys): (Vec<f64>, Vec<f64>) =
                col.iter().zip(y).filter_map(|(x, y)| x.map(|x| (x, *y))).unzip();
            regression_f(&xs, &ys)?
        }
        None => {
            let classes = targets.classes();
            let (xs, gs): (Vec<f64>, Vec<usize>) =
                col.iter().zip(&classes).filter_map(|(x, g)| x.map(|x| (x, *g))).unzip();
            anova_groups(&xs, &gs)?
        }
    };
    Ok(AnovaScore {
        feature: feature.to_string(),
        target: target.name().to_string(),
        f,
        df,
    })
}

/// Score every numeric column; degenerate columns score 0.
pub fn anova_scores(frame: &FusedFrame, target: Target) -> Result<Vec<AnovaScore>> {
    let mut out = Vec::new();
    for c in &frame.columns {
        if c.as_numeric().is_none() {
            continue;
        }
        match anova_f(frame, &c.name, target) {
            Ok(s) => out.push(s),
            Err(Error::DegenerateGroups(_)) => out.push(AnovaScore {
                feature: c.name.clone(),
                target: target.name().to_string(),
                f: 0.0,
                df: (0, 0),
            }),
            Err(e) => return Err(e),
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind", content = "value")]
pub enum SelectionPolicy {
    TopK(usize),
    /// Every feature with F at or above the threshold.
    MinF(f64),
    All,
}

impl Default for SelectionPolicy {
    fn default() -> Self {
        SelectionPolicy::TopK(10)
    }
}

/// Features ordered by descending F, ties by name, cut by the policy.
pub fn select_features(scores: &[AnovaScore], policy: SelectionPolicy) -> Vec<String> {
    let mut sorted: Vec<&AnovaScore> = scores.iter().collect();
    sorted.sort_by(|a, b| match b.f.total_cmp(&a.f) {
        Ordering::Equal => a.feature.cmp(&b.feature),
        o => o,
    });
    let keep = match policy {
        SelectionPolicy::TopK(k) => k.min(sorted.len()),
        SelectionPolicy::MinF(t) => sorted.iter().take_while(|s| s.f >= t).count(),
        SelectionPolicy::All => sorted.len(),
    };
    sorted[..keep].iter().map(|s| s.feature.clone()).collect()
}

// ---------------------------------------------------------------------------
// Track speed

pub const TRACK_SPEED_COLUMN: &str = "track_speed_mps";

/// Look-back window for track speed estimates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrackSpeedWindow {
    pub min_gap_ms: u64,
    pub max_gap_ms: u64,
}

impl Default for TrackSpeedWindow {
    fn default() -> Self {
        TrackSpeedWindow {
            min_gap_ms: 3_000,
            max_gap_ms: 6_000,
        }
    }
}

/// Apparent speed of each radar return: distance to the closest (in space)
/// earlier return inside the look-back window, over the elapsed time.
/// `readings` must be sorted by time. 2D radars use horizontal distance.
pub fn track_speed(readings: &[SensorReading], three_d: bool, window: TrackSpeedWindow) -> Vec<Option<f64>> {
    let mut out = Vec::with_capacity(readings.len());
    for (i, r) in readings.iter().enumerate() {
        let Some(p) = r.position else {
            out.push(None);
            continue;
        };
        let mut best: Option<(f64, f64)> = None;
        for prev in readings[..i].iter().rev() {
            let gap = r.t.0.saturating_sub(prev.t.0);
            if gap > window.max_gap_ms {
                break;
            }
            if gap < window.min_gap_ms {
                continue;
            }
            let Some(q) = prev.position else { continue };
            let d = if three_d && p.alt_m.is_some() && q.alt_m.is_some() {
                distance_3d_m(&p, &q)
            } else {
                haversine_m(&p, &q)
            };
            if best.is_none_or(|(bd, _)| d < bd) {
                best = Some((d, gap as f64 / 1000.0));
            }
        }
        out.push(best.map(|(d, dt)| d / dt));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frame::Targets;
    use crate::types::{DroneType, GeoPosition, SensorName, Timestamp};

    fn frame_with(columns: Vec<Column>) -> FusedFrame {
        let n = columns[0].values.len();
        FusedFrame {
            timestamps: (0..n as u64).map(Timestamp).collect(),
            columns,
            targets: None,
            sources: vec![Default::default(); n],
            scenario: vec![String::new(); n],
        }
    }

    #[test]
    fn missing_percentage_counts_cells() {
        let mut v: Vec<Option<f64>> = (0..10).map(|i| Some(i as f64)).collect();
        v[3] = None;
        let r = missing_report(&frame_with(vec![Column::numeric("c", v)])).unwrap();
        assert_eq!(r.columns[0].missing, 1);
        assert!((r.columns[0].percent - 10.0).abs() < 1e-12);
        assert_eq!(r.row_histogram, vec![9, 1]);
        assert_eq!(r.mask.len(), 10);
        assert!(r.mask[3][0]);
    }

    #[test]
    fn dense_frame_is_all_mcar() {
        let f = frame_with(vec![
            Column::numeric("a", vec![Some(1.0), Some(2.0), Some(3.0)]),
            Column::numeric("b", vec![Some(3.0), Some(1.0), Some(2.0)]),
        ]);
        let r = missing_report(&f).unwrap();
        assert!(r.mask.iter().flatten().all(|b| !b));
        assert!(r.columns.iter().all(|c| c.tag == MissingTag::McarCandidate));
    }

    #[test]
    fn mar_fixture_is_tagged() {
        // c2 is absent exactly where c1 > 0.9; |r| = 0.9555 computed offline
        let c1 = [0.1, 0.2, 0.3, 0.4, 0.5, 0.92, 0.94, 0.96, 0.98, 0.99];
        let c2: Vec<Option<f64>> = c1.iter().map(|&v| if v > 0.9 { None } else { Some(v * 2.0) }).collect();
        let c3 = [3.0, 1.0, 4.0, 1.0, 5.0, 9.0, 2.0, 6.0, 5.0, 3.0];
        let f = frame_with(vec![
            Column::numeric("c1", c1.iter().map(|&v| Some(v)).collect()),
            Column::numeric("c2", c2),
            Column::numeric("c3", c3.iter().map(|&v| Some(v)).collect()),
        ]);
        let r = missing_report(&f).unwrap();
        assert_eq!(r.columns[1].tag, MissingTag::MarCandidate);
        assert_eq!(r.columns[0].tag, MissingTag::McarCandidate);
        let ind: Vec<f64> = c1.iter().map(|&v| if v > 0.9 { 1.0 } else { 0.0 }).collect();
        assert!((pearson(&c1, &ind).unwrap() - 0.9554551802443128).abs() < 1e-12);
    }

    #[test]
    fn missing_report_rejects_empty() {
        assert!(matches!(missing_report(&FusedFrame::default()), Err(Error::EmptyFrame)));
    }

    #[test]
    fn mask_csv_shape() {
        let f = frame_with(vec![Column::numeric("a", vec![Some(1.0), None])]);
        let mut buf = Vec::new();
        missing_report(&f).unwrap().write_mask_csv(&mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "a\n0\n1\n");
    }

    #[test]
    fn iqr_oracle() {
        let v: Vec<f64> = (1..=9).map(f64::from).chain([100.0]).collect();
        let o = iqr_filter(&v).unwrap();
        assert_eq!(o.fences.q1, 3.25);
        assert_eq!(o.fences.q3, 7.75);
        assert_eq!(o.fences.lower, -3.5);
        assert_eq!(o.fences.upper, 14.5);
        assert_eq!(o.outliers, vec![9]);
        assert_eq!(o.retained.len(), 9);
    }

    #[test]
    fn iqr_degenerate_inputs() {
        assert!(iqr_filter(&[5.0; 4]).unwrap().outliers.is_empty());
        assert!(iqr_filter(&[-2.0, -1.0, 1.0, 2.0]).unwrap().outliers.is_empty());
        assert!(matches!(iqr_filter(&[1.0, 2.0, 3.0]), Err(Error::InsufficientData(_))));
    }

    #[test]
    fn reading_fences_clear_cells() {
        let mut rs: Vec<SensorReading> = [1.0, 2.0, 3.0, 4.0, 50.0]
            .iter()
            .enumerate()
            .map(|(i, &v)| SensorReading {
                rcs_dbsm: Some(v),
                ..SensorReading::empty(Timestamp(i as u64), SensorName::Arcus)
            })
            .collect();
        let fences = fit_reading_fences(&rs, ReadingField::RcsDbsm).unwrap();
        assert_eq!(apply_reading_fences(&mut rs, ReadingField::RcsDbsm, &fences), 1);
        assert_eq!(rs[4].rcs_dbsm, None);
        assert_eq!(rs.len(), 5);
    }

    fn cat_frame(vals: &[Option<&str>]) -> FusedFrame {
        frame_with(vec![
            Column::numeric("x", vals.iter().map(|_| Some(0.0)).collect()),
            Column::categorical("f", vals.iter().map(|v| v.map(String::from)).collect()),
        ])
    }

    #[test]
    fn one_hot_definition() {
        let mut f = cat_frame(&[Some("A"), Some("B"), Some("A")]);
        let (enc, out) = one_hot(&mut f, "f").unwrap();
        assert_eq!(enc.categories, vec!["A", "B"]);
        assert_eq!(f.column_names(), vec!["x", "f=A", "f=B"]);
        assert_eq!(f.numeric("f=A").unwrap(), &[Some(1.0), Some(0.0), Some(1.0)]);
        assert_eq!(f.numeric("f=B").unwrap(), &[Some(0.0), Some(1.0), Some(0.0)]);
        assert_eq!(out, OneHotOutcome::default());
    }

    #[test]
    fn one_hot_single_category_and_absent() {
        let mut f = cat_frame(&[Some("A"), None, Some("A")]);
        let (_, out) = one_hot(&mut f, "f").unwrap();
        assert_eq!(f.numeric("f=A").unwrap(), &[Some(1.0), Some(0.0), Some(1.0)]);
        assert_eq!(out.absent_rows, vec![1]);
    }

    #[test]
    fn one_hot_unseen_category_is_zero_row() {
        let train = cat_frame(&[Some("A"), Some("B")]);
        let enc = OneHotEncoding::fit(&train, "f").unwrap();
        let mut test = cat_frame(&[Some("C"), Some("B")]);
        let out = enc.apply(&mut test).unwrap();
        assert_eq!(out.unseen_rows, vec![0]);
        assert_eq!(test.numeric("f=A").unwrap()[0], Some(0.0));
        assert_eq!(test.numeric("f=B").unwrap()[0], Some(0.0));
    }

    #[test]
    fn one_hot_errors() {
        let mut f = cat_frame(&[Some("A")]);
        assert!(matches!(one_hot(&mut f, "nope"), Err(Error::ColumnNotFound(_))));
        assert!(one_hot(&mut f, "x").is_err());
    }

    #[test]
    fn kmeans_separated_pairs() {
        let pts = vec![vec![0.0], vec![0.0], vec![10.0], vec![10.0]];
        let r = kmeans(&pts, 2, 1).unwrap();
        assert_eq!(r.assignments[0], r.assignments[1]);
        assert_eq!(r.assignments[2], r.assignments[3]);
        assert_ne!(r.assignments[0], r.assignments[2]);
    }

    #[test]
    fn kmeans_single_cluster_is_mean() {
        let pts = vec![vec![1.0, 2.0], vec![3.0, 4.0], vec![5.0, 9.0]];
        let r = kmeans(&pts, 1, 0).unwrap();
        assert_eq!(r.centroids[0], vec![3.0, 5.0]);
        assert!(matches!(kmeans(&pts, 4, 0), Err(Error::InsufficientData(_))));
    }

    #[test]
    fn silhouette_oracle() {
        let pts: Vec<Vec<f64>> = [0.0, 1.0, 9.0, 10.0].iter().map(|&v| vec![v]).collect();
        let r = silhouette(&pts, &[0, 0, 1, 1]).unwrap();
        let expect = [0.894736842105263, 0.882352941176470, 0.882352941176470, 0.894736842105263];
        for (s, e) in r.s.iter().zip(expect) {
            assert!((s - e).abs() < 1e-12);
        }
        assert!((r.mean - 0.888544891640867).abs() < 1e-12);
        assert_eq!(r.a, vec![1.0, 1.0, 1.0, 1.0]);
        assert_eq!(r.b, vec![9.5, 8.5, 8.5, 9.5]);
    }

    #[test]
    fn silhouette_conventions() {
        let two = vec![vec![0.0], vec![5.0]];
        assert_eq!(silhouette(&two, &[0, 1]).unwrap().mean, 0.0);
        let dup = vec![vec![1.0], vec![1.0], vec![1.0], vec![1.0]];
        assert!(silhouette(&dup, &[0, 0, 1, 1]).unwrap().s.iter().all(|&s| s == 0.0));
        assert!(matches!(silhouette(&two, &[3, 3]), Err(Error::SilhouetteUndefined(_))));
    }

    #[test]
    fn anova_oracle() {
        let (f, df) = anova_groups(&[1.0, 2.0, 3.0, 4.0, 5.0, 6.0], &[0, 0, 0, 1, 1, 1]).unwrap();
        assert!((f - 13.5).abs() < 1e-9);
        assert_eq!(df, (1, 4));
        let (f, _) = anova_groups(&[2.0, 2.0, 2.0, 2.0], &[0, 0, 1, 1]).unwrap();
        assert_eq!(f, 0.0);
        let (f, _) = anova_groups(&[1.0, 1.0, 2.0, 2.0], &[0, 0, 1, 1]).unwrap();
        assert_eq!(f, f64::INFINITY);
        assert!(matches!(anova_groups(&[1.0, 2.0], &[0, 0]), Err(Error::DegenerateGroups(_))));
    }

    #[test]
    fn regression_f_sentinel() {
        let y = [1.0, 2.5, 3.0, 7.0];
        assert_eq!(regression_f(&y, &y).unwrap().0, f64::INFINITY);
        assert_eq!(regression_f(&[1.0; 4], &y).unwrap().0, 0.0);
        assert!(regression_f(&[1.0, 2.0], &[1.0, 2.0]).is_err());
    }

    #[test]
    fn anova_f_on_frame() {
        let mut f = frame_with(vec![Column::numeric(
            "x",
            vec![Some(1.0), Some(2.0), Some(3.0), Some(4.0), Some(5.0), Some(6.0), None],
        )]);
        let types = [0, 0, 0, 1, 1, 1, 2].map(|i| DroneType::from_index(i).unwrap());
        f.targets = Some(Targets {
            latitude: vec![0.0; 7],
            longitude: vec![0.0; 7],
            speed: vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 100.0],
            altitude: vec![0.0; 7],
            drone_type: types.to_vec(),
        });
        let s = anova_f(&f, "x", Target::DroneType).unwrap();
        assert!((s.f - 13.5).abs() < 1e-9);
        assert_eq!(anova_f(&f, "x", Target::Speed).unwrap().f, f64::INFINITY);
        let json = serde_json::to_string(&s).unwrap();
        assert_eq!(serde_json::from_str::<AnovaScore>(&json).unwrap(), s);
    }

    fn score(name: &str, f: f64) -> AnovaScore {
        AnovaScore {
            feature: name.into(),
            target: "t".into(),
            f,
            df: (1, 1),
        }
    }

    #[test]
    fn selection_policies() {
        let s = vec![score("a", 13.5), score("b", 0.0), score("c", 2.0)];
        assert_eq!(select_features(&s, SelectionPolicy::TopK(2)), vec!["a", "c"]);
        assert_eq!(select_features(&s, SelectionPolicy::TopK(10)).len(), 3);
        let eq = vec![score("z", 1.0), score("m", 1.0), score("a", 1.0)];
        assert_eq!(select_features(&eq, SelectionPolicy::TopK(2)), vec!["a", "m"]);
        assert_eq!(select_features(&s, SelectionPolicy::MinF(1.0)), vec!["a", "c"]);
        let inf = vec![score("x", 1.0), score("y", f64::INFINITY)];
        assert_eq!(select_features(&inf, SelectionPolicy::All), vec!["y", "x"]);
    }

    fn radar(t: u64, lat: f64, lon: f64) -> SensorReading {
        SensorReading {
            position: Some(GeoPosition::surface(lat, lon)),
            ..SensorReading::empty(Timestamp(t), SensorName::Alvira)
        }
    }

    #[test]
    fn moving_cluster_wins_without_truth() {
        let mut rs = Vec::new();
        let mut asg = Vec::new();
        for i in 0..20u64 {
            rs.push(radar(i * 1000, 51.5 + i as f64 * 1e-4, 5.85));
            asg.push(1);
            rs.push(radar(i * 1000 + 500, 51.52, 5.86));
            asg.push(0);
        }
        let c = select_drone_cluster(&rs, &asg, None, &DroneClusterParams::default()).unwrap();
        assert_eq!(c.cluster, 1);
        assert_eq!(c.scores[0], 0.0);
    }

    #[test]
    fn static_clusters_have_no_drone() {
        let rs: Vec<SensorReading> = (0..10).map(|i| radar(i * 1000, 51.52, 5.86)).collect();
        let asg = vec![0; 10];
        assert!(matches!(
            select_drone_cluster(&rs, &asg, None, &DroneClusterParams::default()),
            Err(Error::NoDroneCluster)
        ));
    }

    #[test]
    fn truth_picks_matching_cluster() {
        let log: Vec<DroneLogRecord> = (0..10u64)
            .map(|i| DroneLogRecord {
                t: Timestamp(i * 1000),
                position: GeoPosition::new(51.5 + i as f64 * 1e-4, 5.85, Some(50.0)).unwrap(),
                speed_mps: 11.1,
                drone_type: DroneType::MavicPro,
            })
            .collect();
        let rs: Vec<SensorReading> = (0..10u64)
            .flat_map(|i| [radar(i * 1000 + 100, 51.5 + i as f64 * 1e-4, 5.85), radar(i * 1000 + 600, 51.53, 5.87)])
            .collect();
        let asg: Vec<usize> = (0..20).map(|i| i % 2).collect();
        let c = select_drone_cluster(&rs, &asg, Some(&log), &DroneClusterParams::default()).unwrap();
        assert_eq!(c.cluster, 0);
        assert_eq!(c.scores, vec![10.0, 0.0]);
    }

    #[test]
    fn track_speed_uses_lookback() {
        // 10 m/s northward: 1e-4 deg lat is ~11.1 m
        let rs: Vec<SensorReading> = (0..10u64).map(|i| radar(i * 1000, 51.5 + i as f64 * 0.9e-4, 5.85)).collect();
        let v = track_speed(&rs, false, TrackSpeedWindow::default());
        assert_eq!(v[..3], [None, None, None]);
        for s in v[3..].iter() {
            assert!((s.unwrap() - 10.0).abs() < 0.1, "{s:?}");
        }
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn pts() -> impl Strategy<Value = (Vec<Vec<f64>>, Vec<usize>)> {
            prop::collection::vec((-100.0..100.0f64, -100.0..100.0f64, 0..3usize), 4..40).prop_filter_map(
                "needs two clusters",
                |v| {
                    let labels: Vec<usize> = v.iter().map(|x| x.2).collect();
                    let distinct = labels.iter().collect::<BTreeSet<_>>().len();
                    (distinct >= 2).then(|| (v.iter().map(|x| vec![x.0, x.1]).collect(), labels))
                },
            )
        }

        proptest! {
            #[test]
            fn silhouette_bounded_and_scale_invariant((p, l) in pts(), scale in 0.01..100.0f64) {
                let r = silhouette(&p, &l).unwrap();
                prop_assert!(r.s.iter().all(|s| (-1.0..=1.0).contains(s)));
                prop_assert!((-1.0..=1.0).contains(&r.mean));
                let mean = r.s.iter().sum::<f64>() / r.s.len() as f64;
                prop_assert!((mean - r.mean).abs() < 1e-12);
                let scaled: Vec<Vec<f64>> = p.iter().map(|x| x.iter().map(|v| v * scale).collect()).collect();
                prop_assert!((silhouette(&scaled, &l).unwrap().mean - r.mean).abs() < 1e-9);
            }

            #[test]
            fn iqr_retained_subset(v in prop::collection::vec(-1e3..1e3f64, 4..60)) {
                let o = iqr_filter(&v).unwrap();
                prop_assert_eq!(o.retained.len() + o.outliers.len(), v.len());
                prop_assert!(o.retained.iter().all(|x| o.fences.contains(*x) && v.contains(x)));
                prop_assert!(o.fences.q1 <= o.fences.q3 && o.fences.lower <= o.fences.upper);
            }

            #[test]
            fn one_hot_rows_sum_to_one_and_invert(v in prop::collection::vec(prop::option::weighted(0.8, 0..5u8), 1..40)) {
                let vals: Vec<Option<String>> = v.iter().map(|x| x.map(|c| format!("c{c}"))).collect();
                let mut f = frame_with(vec![Column::categorical("f", vals.clone())]);
                let (enc, out) = one_hot(&mut f, "f").unwrap();
                for r in 0..vals.len() {
                    let sum: f64 = enc.column_names().iter().map(|n| f.numeric(n).unwrap()[r].unwrap()).sum();
                    prop_assert_eq!(sum, if vals[r].is_some() { 1.0 } else { 0.0 });
                }
                prop_assert_eq!(enc.invert(&f).unwrap(), vals);
                prop_assert!(out.unseen_rows.is_empty());
            }

            #[test]
            fn anova_permutation_and_shift_invariant(
                v in prop::collection::vec((-50.0..50.0f64, 0..3usize), 6..40),
                shift in -1e3..1e3f64,
                rot in 0usize..40,
            ) {
                let xs: Vec<f64> = v.iter().map(|x| x.0).collect();
                let gs: Vec<usize> = v.iter().map(|x| x.1).collect();
                let Ok((f, _)) = anova_groups(&xs, &gs) else { return Ok(()) };
                prop_assume!(f.is_finite());
                let mut pairs = v.clone();
                pairs.rotate_left(rot % v.len());
                pairs.reverse();
                let (px, pg): (Vec<f64>, Vec<usize>) = pairs.into_iter().unzip();
                let (fp, _) = anova_groups(&px, &pg).unwrap();
                prop_assert!((fp - f).abs() <= 1e-9 * f.abs().max(1.0));
                let sx: Vec<f64> = xs.iter().map(|x| x + shift).collect();
                let (fs, _) = anova_groups(&sx, &gs).unwrap();
                prop_assert!((fs - f).abs() <= 1e-9 * f.abs().max(1.0) * 10.0);
            }

            #[test]
            fn kmeans_is_deterministic(v in prop::collection::vec(-10.0..10.0f64, 3..50), seed in any::<u64>()) {
                let pts: Vec<Vec<f64>> = v.iter().map(|x| vec![*x]).collect();
                prop_assert_eq!(kmeans(&pts, 3, seed).unwrap(), kmeans(&pts, 3, seed).unwrap());
            }
        }
    }

    #[test]
    fn kmeans_recovers_blobs() {
        use rand_distr::{Distribution, Normal};
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let noise = Normal::new(0.0, 1.0).unwrap();
        let centres = [[0.0, 0.0], [10.0, 0.0], [0.0, 10.0]];
        let mut pts = Vec::new();
        let mut truth = Vec::new();
        for (c, centre) in centres.iter().enumerate() {
            for _ in 0..100 {
                pts.push(vec![centre[0] + noise.sample(&mut rng), centre[1] + noise.sample(&mut rng)]);
                truth.push(c);
            }
        }
        let r = kmeans(&pts, 3, 7).unwrap();
        let mut correct = 0;
        for c in 0..3 {
            let mut counts = [0usize; 3];
            for (a, t) in r.assignments.iter().zip(&truth) {
                if *a == c {
                    counts[*t] += 1;
                }
            }
            correct += counts.iter().max().unwrap();
        }
        assert!(correct as f64 / 300.0 >= 0.99);
        assert!(silhouette(&pts, &r.assignments).unwrap().mean >= 0.75);
    }
}
