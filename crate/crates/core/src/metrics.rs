//! Regression and classification metrics, ROC curves and evaluation reports.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

fn check_lengths(y: &[f64], y_hat: &[f64]) -> Result<()> {
    if y.is_empty() {
        return Err(Error::EmptyInput);
    }
    if y.len() != y_hat.len() {
        return Err(Error::LengthMismatch(format!("{} observed, {} predicted", y.len(), y_hat.len())));
    }
    Ok(())
}

pub fn mae(y: &[f64], y_hat: &[f64]) -> Result<f64> {
    check_lengths(y, y_hat)?;
    Ok(y.iter().zip(y_hat).map(|(a, b)| (a - b).abs()).sum::<f64>() / y.len() as f64)
}

pub fn mse(y: &[f64], y_hat: &[f64]) -> Result<f64> {
    check_lengths(y, y_hat)?;
    Ok(y.iter().zip(y_hat).map(|(a, b)| (a - b) * (a - b)).sum::<f64>() / y.len() as f64)
}

/// Coefficient of determination with ȳ the mean of the observed values.
pub fn r2(y: &[f64], y_hat: &[f64]) -> Result<f64> {
    check_lengths(y, y_hat)?;
    let mean = y.iter().sum::<f64>() / y.len() as f64;
    let ss_tot: f64 = y.iter().map(|v| (v - mean) * (v - mean)).sum();
    if ss_tot == 0.0 {
        return Err(Error::UndefinedR2);
    }
    let ss_res: f64 = y.iter().zip(y_hat).map(|(a, b)| (a - b) * (a - b)).sum();
    Ok(1.0 - ss_res / ss_tot)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegressionMetrics {
    pub n: usize,
    pub mae: f64,
    pub mse: f64,
    /// `None` when the observed values are constant.
    pub r2: Option<f64>,
}

pub fn regression_metrics(y: &[f64], y_hat: &[f64]) -> Result<RegressionMetrics> {
    Ok(RegressionMetrics {
        n: y.len(),
        mae: mae(y, y_hat)?,
        mse: mse(y, y_hat)?,
        r2: match r2(y, y_hat) {
            Ok(v) => Some(v),
            Err(Error::UndefinedR2) => None,
            Err(e) => return Err(e),
        },
    })
}

/// Counts indexed `[actual][predicted]`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub classes: Vec<String>,
    pub counts: Vec<Vec<u64>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct BinaryCounts {
    pub tp: u64,
    pub tn: u64,
    pub fp: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
}

impl ConfusionMatrix {
    pub fn new(classes: Vec<String>) -> Self {
        let k = classes.len();
        ConfusionMatrix {
            classes,
            counts: vec![vec![0; k]; k],
        }
    }

    pub fn from_predictions(classes: Vec<String>, actual: &[usize], predicted: &[usize]) -> Result<Self> {
        if actual.len() != predicted.len() {
            return Err(Error::LengthMismatch(format!(
                "{} actual, {} predicted",
                actual.len(),
                predicted.len()
            )));
        }
        let mut cm = ConfusionMatrix::new(classes);
        let k = cm.classes.len();
        for (&a, &p) in actual.iter().zip(predicted) {
            if a >= k || p >= k {
                return Err(Error::InvalidValue(format!("class index out of range ({a}, {p})")));
            }
            cm.counts[a][p] += 1;
        }
        Ok(cm)
    }

    /// Two-class matrix with class 1 as the positive class.
    pub fn binary(c: BinaryCounts) -> Self {
        ConfusionMatrix {
            classes: vec!["negative".into(), "positive".into()],
            counts: vec![vec![c.tn, c.fp], vec![c.fn_, c.tp]],
        }
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().flatten().sum()
    }

    pub fn correct(&self) -> u64 {
        (0..self.classes.len()).map(|i| self.counts[i][i]).sum()
    }

    /// One-vs-rest counts for `class`.
    pub fn one_vs_rest(&self, class: usize) -> BinaryCounts {
        let tp = self.counts[class][class];
        let actual: u64 = self.counts[class].iter().sum();
        let predicted: u64 = self.counts.iter().map(|row| row[class]).sum();
        let fn_ = actual - tp;
        let fp = predicted - tp;
        BinaryCounts {
            tp,
            fp,
            fn_,
            tn: self.total() - tp - fp - fn_,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Degeneracy {
    NoPositivePredictions,
    NoPositiveLabels,
    ZeroPrecisionAndRecall,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassScores {
    pub accuracy: f64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub flags: Vec<Degeneracy>,
}

pub fn scores_from_counts(c: BinaryCounts) -> Result<ClassScores> {
    let total = c.tp + c.tn + c.fp + c.fn_;
    if total == 0 {
        return Err(Error::EmptyInput);
    }
    let mut flags = Vec::new();
    let ratio = |num: u64, den: u64, flag: Degeneracy, flags: &mut Vec<Degeneracy>| {
        if den == 0 {
            flags.push(flag);
            0.0
        } else {
            num as f64 / den as f64
        }
    };
    let precision = ratio(c.tp, c.tp + c.fp, Degeneracy::NoPositivePredictions, &mut flags);
    let recall = ratio(c.tp, c.tp + c.fn_, Degeneracy::NoPositiveLabels, &mut flags);
    let f1 = if precision + recall == 0.0 {
        flags.push(Degeneracy::ZeroPrecisionAndRecall);
        0.0
    } else {
        2.0 * precision * recall / (precision + recall)
    };
    Ok(ClassScores {
        accuracy: (c.tp + c.tn) as f64 / total as f64,
        precision,
        recall,
        f1,
        flags,
    })
}

/// Accuracy, precision, recall and F1 of `class` against the rest.
pub fn classification_scores(cm: &ConfusionMatrix, class: usize) -> Result<ClassScores> {
    if class >= cm.classes.len() {
        return Err(Error::InvalidValue(format!("no class {class}")));
    }
    scores_from_counts(cm.one_vs_rest(class))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RocPoint {
    pub fpr: f64,
    pub tpr: f64,
    /// Score threshold (`score >= threshold` counts as positive); `None` for
    /// the initial point where nothing is positive.
    pub threshold: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RocCurve {
    pub points: Vec<RocPoint>,
    pub auc: f64,
    /// Point maximizing Youden's J = TPR - FPR (first one on ties).
    pub operating_point: RocPoint,
}

impl RocCurve {
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["fpr", "tpr", "threshold"])?;
        for p in &self.points {
            out.write_record([
                p.fpr.to_string(),
                p.tpr.to_string(),
                p.threshold.map(|t| t.to_string()).unwrap_or_default(),
            ])?;
        }
        out.flush().map_err(csv::Error::from)?;
        Ok(())
    }
}

/// Sweep thresholds over the unique scores from high to low.
pub fn roc(scores: &[f64], labels: &[bool]) -> Result<RocCurve> {
    if scores.len() != labels.len() {
        return Err(Error::LengthMismatch(format!("{} scores, {} labels", scores.len(), labels.len())));
    }
    if scores.iter().any(|s| s.is_nan()) {
        return Err(Error::InvalidValue("NaN score".into()));
    }
    let pos = labels.iter().filter(|&&l| l).count() as f64;
    let neg = labels.len() as f64 - pos;
    if pos == 0.0 || neg == 0.0 {
        return Err(Error::SingleClass);
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]));

    let mut points = vec![RocPoint {
        fpr: 0.0,
        tpr: 0.0,
        threshold: None,
    }];
    let (mut tp, mut fp) = (0.0, 0.0);
    let mut i = 0;
    while i < order.len() {
        let t = scores[order[i]];
        while i < order.len() && scores[order[i]] == t {
            if labels[order[i]] {
                tp += 1.0;
            } else {
                fp += 1.0;
            }
            i += 1;
        }
        points.push(RocPoint {
            fpr: fp / neg,
            tpr: tp / pos,
            threshold: Some(t),
        });
    }
    let auc = points
        .windows(2)
        .map(|w| (w[1].fpr - w[0].fpr) * (w[1].tpr + w[0].tpr) / 2.0)
        .sum();
    let mut best = points[0];
    for p in &points[1..] {
        if p.tpr - p.fpr > best.tpr - best.fpr {
            best = *p;
        }
    }
    Ok(RocCurve {
        points,
        auc,
        operating_point: best,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassReport {
    pub class: String,
    pub support: u64,
    pub scores: ClassScores,
    /// Absent when the class never occurs (or always occurs) in the labels.
    pub roc: Option<RocCurve>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MacroAverage {
    pub accuracy: f64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub auc: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassificationReport {
    /// Fraction of rows whose predicted class equals the actual class.
    pub accuracy: f64,
    pub confusion: ConfusionMatrix,
    pub per_class: Vec<ClassReport>,
    pub macro_avg: MacroAverage,
}

/// Class predictions with per-class scores (e.g. vote fractions, one row per
/// sample, one column per class).
pub struct ClassPredictions<'a> {
    pub classes: Vec<String>,
    pub actual: &'a [usize],
    pub predicted: &'a [usize],
    pub scores: &'a [Vec<f64>],
}

pub fn classification_report(p: &ClassPredictions<'_>) -> Result<ClassificationReport> {
    if p.actual.is_empty() {
        return Err(Error::EmptyInput);
    }
    if p.scores.len() != p.actual.len() {
        return Err(Error::LengthMismatch(format!("{} labels, {} score rows", p.actual.len(), p.scores.len())));
    }
    let confusion = ConfusionMatrix::from_predictions(p.classes.clone(), p.actual, p.predicted)?;
    let mut per_class = Vec::with_capacity(p.classes.len());
    for (c, name) in p.classes.iter().enumerate() {
        let labels: Vec<bool> = p.actual.iter().map(|&a| a == c).collect();
        let col: Vec<f64> = p.scores.iter().map(|row| row.get(c).copied().unwrap_or(0.0)).collect();
        let roc = match roc(&col, &labels) {
            Ok(r) => Some(r),
            Err(Error::SingleClass) => None,
            Err(e) => return Err(e),
        };
        per_class.push(ClassReport {
            class: name.clone(),
            support: confusion.counts[c].iter().sum(),
            scores: classification_scores(&confusion, c)?,
            roc,
        });
    }
    let k = per_class.len() as f64;
    let mean = |f: &dyn Fn(&ClassReport) -> f64| per_class.iter().map(f).sum::<f64>() / k;
    let aucs: Vec<f64> = per_class.iter().filter_map(|c| c.roc.as_ref().map(|r| r.auc)).collect();
    let macro_avg = MacroAverage {
        accuracy: mean(&|c| c.scores.accuracy),
        precision: mean(&|c| c.scores.precision),
        recall: mean(&|c| c.scores.recall),
        f1: mean(&|c| c.scores.f1),
        auc: (!aucs.is_empty()).then(|| aucs.iter().sum::<f64>() / aucs.len() as f64),
    };
    Ok(ClassificationReport {
        accuracy: confusion.correct() as f64 / confusion.total() as f64,
        confusion,
        per_class,
        macro_avg,
    })
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct EvaluationReport {
    pub n_rows: usize,
    /// Keyed by target name.
    pub regression: BTreeMap<String, RegressionMetrics>,
    pub classification: Option<ClassificationReport>,
}

/// Observed and predicted values of one regression target.
pub struct RegressionPair<'a> {
    pub target: &'a str,
    pub observed: &'a [f64],
    pub predicted: &'a [f64],
}

pub fn evaluate_predictions(
    regression: &[RegressionPair<'_>],
    classification: Option<&ClassPredictions<'_>>,
) -> Result<EvaluationReport> {
    let mut report = EvaluationReport::default();
    for pair in regression {
        report.n_rows = pair.observed.len();
        report
            .regression
            .insert(pair.target.to_string(), regression_metrics(pair.observed, pair.predicted)?);
    }
    if let Some(c) = classification {
        report.n_rows = c.actual.len();
        report.classification = Some(classification_report(c)?);
    }
    Ok(report)
}

fn opt(v: Option<f64>) -> String {
    v.map_or_else(|| "n/a".to_string(), |v| format!("{v:.4}"))
}

impl EvaluationReport {
    /// Plain-text tables: regression metrics per target, then per-class scores
    /// and the confusion matrix.
    pub fn summary(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "rows evaluated: {}", self.n_rows);
        if !self.regression.is_empty() {
            let _ = writeln!(s, "\n{:<12} {:>10} {:>14} {:>14}", "target", "R2", "MAE", "MSE");
            for (t, m) in &self.regression {
                let _ = writeln!(s, "{:<12} {:>10} {:>14.6} {:>14.6}", t, opt(m.r2), m.mae, m.mse);
            }
        }
        if let Some(c) = &self.classification {
            let _ = writeln!(s, "\noverall accuracy: {:.4}", c.accuracy);
            let _ = writeln!(
                s,
                "\n{:<16} {:>8} {:>9} {:>10} {:>8} {:>8} {:>8}",
                "class", "support", "accuracy", "precision", "recall", "F1", "AUC"
            );
            let mut row = |name: &str, support: String, acc: f64, p: f64, r: f64, f1: f64, auc: Option<f64>| {
                let _ = writeln!(
                    s,
                    "{:<16} {:>8} {:>9.4} {:>10.4} {:>8.4} {:>8.4} {:>8}",
                    name,
                    support,
                    acc,
                    p,
                    r,
                    f1,
                    opt(auc)
                );
            };
            for pc in &c.per_class {
                row(
                    &pc.class,
                    pc.support.to_string(),
                    pc.scores.accuracy,
                    pc.scores.precision,
                    pc.scores.recall,
                    pc.scores.f1,
                    pc.roc.as_ref().map(|r| r.auc),
                );
            }
            let m = &c.macro_avg;
            row("macro avg", String::new(), m.accuracy, m.precision, m.recall, m.f1, m.auc);
            let _ = writeln!(s, "\nconfusion matrix (rows actual, columns predicted):");
            for (name, counts) in c.confusion.classes.iter().zip(&c.confusion.counts) {
                let cells: Vec<String> = counts.iter().map(|n| format!("{n:>7}")).collect();
                let _ = writeln!(s, "{:<16} {}", name, cells.join(""));
            }
        }
        s
    }
}

/// Per-fold headline numbers used by cross-validation.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct SummaryMetrics {
    pub accuracy: Option<f64>,
    pub mae: Option<f64>,
    pub mse: Option<f64>,
    pub r2: Option<f64>,
}

impl SummaryMetrics {
    pub fn mean(items: &[SummaryMetrics]) -> SummaryMetrics {
        let avg = |f: &dyn Fn(&SummaryMetrics) -> Option<f64>| {
            let v: Vec<f64> = items.iter().filter_map(f).collect();
            (!v.is_empty()).then(|| v.iter().sum::<f64>() / v.len() as f64)
        };
        SummaryMetrics {
            accuracy: avg(&|m| m.accuracy),
            mae: avg(&|m| m.mae),
            mse: avg(&|m| m.mse),
            r2: avg(&|m| m.r2),
        }
    }
}
