//! Random forests built from CART trees, with bagging and k-fold
//! cross-validation.
//!
//! Tree seeds are derived from the master seed before any training starts, so
//! serial and parallel fits give identical models.

mod codec;
mod tree;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metrics::{self, SummaryMetrics};

pub use codec::{decode, encode, load_model, save_model, FORMAT_VERSION, MAGIC};
pub use tree::{argmax, Leaf, Node, Tree};
use tree::{Columns, Grower};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum Task {
    Regression,
    Classification { n_classes: usize },
}

/// Number of candidate features tried per split.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind", content = "value")]
pub enum FeatureRule {
    /// ⌈√p⌉
    Sqrt,
    /// ⌈p/3⌉
    Third,
    All,
    Fixed(usize),
}

impl FeatureRule {
    pub fn resolve(self, p: usize) -> usize {
        let m = match self {
            FeatureRule::Sqrt => (p as f64).sqrt().ceil() as usize,
            FeatureRule::Third => p.div_ceil(3),
            FeatureRule::All => p,
            FeatureRule::Fixed(k) => k,
        };
        m.clamp(1, p.max(1))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForestParams {
    pub n_trees: usize,
    /// `None` grows until leaves are pure or too small.
    pub max_depth: Option<usize>,
    pub min_leaf: usize,
    pub features: FeatureRule,
    pub bootstrap: bool,
}

impl ForestParams {
    pub fn classification() -> Self {
        ForestParams {
            n_trees: 100,
            max_depth: None,
            min_leaf: 1,
            features: FeatureRule::Sqrt,
            bootstrap: true,
        }
    }

    pub fn regression() -> Self {
        ForestParams {
            n_trees: 100,
            max_depth: None,
            min_leaf: 5,
            features: FeatureRule::Third,
            bootstrap: true,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_trees == 0 {
            return Err(Error::InvalidValue("n_trees must be at least 1".into()));
        }
        if self.min_leaf == 0 {
            return Err(Error::InvalidValue("min_leaf must be at least 1".into()));
        }
        Ok(())
    }
}

/// Training targets.
#[derive(Debug, Clone, Copy)]
pub enum TargetData<'a> {
    Regression(&'a [f64]),
    Classification { labels: &'a [usize], n_classes: usize },
}

impl TargetData<'_> {
    pub fn len(&self) -> usize {
        match self {
            TargetData::Regression(y) => y.len(),
            TargetData::Classification { labels, .. } => labels.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn task(&self) -> Task {
        match self {
            TargetData::Regression(_) => Task::Regression,
            TargetData::Classification { n_classes, .. } => Task::Classification { n_classes: *n_classes },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForestModel {
    pub task: Task,
    pub params: ForestParams,
    pub feature_names: Vec<String>,
    pub target_name: String,
    pub master_seed: u64,
    /// Range of the training targets (regression only; `(0, 0)` otherwise).
    pub target_range: (f64, f64),
    /// Out-of-bag accuracy (classification) or R² (regression), when defined.
    pub oob_score: Option<f64>,
    pub trees: Vec<Tree>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Prediction {
    Value(f64),
    Class { class: usize, fractions: Vec<f64> },
}

impl Prediction {
    pub fn value(&self) -> Option<f64> {
        match self {
            Prediction::Value(v) => Some(*v),
            Prediction::Class { .. } => None,
        }
    }

    pub fn class(&self) -> Option<usize> {
        match self {
            Prediction::Class { class, .. } => Some(*class),
            Prediction::Value(_) => None,
        }
    }
}

/// Per-tree seeds drawn from a ChaCha8 stream keyed by the master seed.
pub fn tree_seeds(master_seed: u64, n: usize) -> Vec<u64> {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    (0..n).map(|_| rng.random()).collect()
}

/// Grow one tree on all rows (no resampling).
pub fn fit_tree(rows: &[Vec<Option<f64>>], target: &TargetData<'_>, params: &ForestParams, seed: u64) -> Result<Tree> {
    params.validate()?;
    let data = Columns::new(rows, target)?;
    let mut g = Grower::new(&data, params, seed);
    Ok(g.grow((0..rows.len() as u32).collect()))
}

fn grow_one(data: &Columns<'_>, params: &ForestParams, seed: u64, n: usize) -> (Tree, Vec<u32>) {
    let mut g = Grower::new(data, params, seed);
    let sample: Vec<u32> = if params.bootstrap {
        let rng = g.rng();
        (0..n).map(|_| rng.random_range(0..n as u32)).collect()
    } else {
        (0..n as u32).collect()
    };
    let mut in_bag = vec![0u32; n];
    for &r in &sample {
        in_bag[r as usize] += 1;
    }
    (g.grow(sample), in_bag)
}

fn fit_impl(
    rows: &[Vec<Option<f64>>],
    target: &TargetData<'_>,
    params: &ForestParams,
    master_seed: u64,
    feature_names: &[String],
    target_name: &str,
    parallel: bool,
) -> Result<ForestModel> {
    params.validate()?;
    let data = Columns::new(rows, target)?;
    if feature_names.len() != data.cols.len() {
        return Err(Error::FeatureMismatch(format!(
            "{} names for {} features",
            feature_names.len(),
            data.cols.len()
        )));
    }
    let n = rows.len();
    let seeds = tree_seeds(master_seed, params.n_trees);
    let grown: Vec<(Tree, Vec<u32>)> = if parallel {
        seeds.par_iter().map(|&s| grow_one(&data, params, s, n)).collect()
    } else {
        seeds.iter().map(|&s| grow_one(&data, params, s, n)).collect()
    };
    let (trees, bags): (Vec<Tree>, Vec<Vec<u32>>) = grown.into_iter().unzip();

    let target_range = match target {
        TargetData::Regression(y) => y
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v))),
        TargetData::Classification { .. } => (0.0, 0.0),
    };
    let mut model = ForestModel {
        task: target.task(),
        params: params.clone(),
        feature_names: feature_names.to_vec(),
        target_name: target_name.to_string(),
        master_seed,
        target_range,
        oob_score: None,
        trees,
    };
    model.oob_score = oob_score(&model, rows, target, &bags);
    Ok(model)
}

fn oob_score(model: &ForestModel, rows: &[Vec<Option<f64>>], target: &TargetData<'_>, bags: &[Vec<u32>]) -> Option<f64> {
    let mut y_obs = Vec::new();
    let mut y_hat = Vec::new();
    let mut labels = Vec::new();
    let mut preds = Vec::new();
    for (i, row) in rows.iter().enumerate() {
        let trees: Vec<&Tree> = model
            .trees
            .iter()
            .zip(bags)
            .filter(|(_, b)| b[i] == 0)
            .map(|(t, _)| t)
            .collect();
        if trees.is_empty() {
            continue;
        }
        match (model.aggregate(trees.into_iter(), row), target) {
            (Prediction::Value(v), TargetData::Regression(y)) => {
                y_obs.push(y[i]);
                y_hat.push(v);
            }
            (Prediction::Class { class, .. }, TargetData::Classification { labels: l, .. }) => {
                labels.push(l[i]);
                preds.push(class);
            }
            _ => unreachable!("prediction kind follows the task"),
        }
    }
    match target {
        TargetData::Regression(_) => metrics::r2(&y_obs, &y_hat).ok(),
        TargetData::Classification { .. } => (!labels.is_empty())
            .then(|| labels.iter().zip(&preds).filter(|(a, b)| a == b).count() as f64 / labels.len() as f64),
    }
}

/// Bagged forest; trees are trained in parallel.
pub fn fit_forest(
    rows: &[Vec<Option<f64>>],
    target: &TargetData<'_>,
    params: &ForestParams,
    master_seed: u64,
    feature_names: &[String],
    target_name: &str,
) -> Result<ForestModel> {
    fit_impl(rows, target, params, master_seed, feature_names, target_name, true)
}

/// Same as [`fit_forest`] on the calling thread only.
pub fn fit_forest_serial(
    rows: &[Vec<Option<f64>>],
    target: &TargetData<'_>,
    params: &ForestParams,
    master_seed: u64,
    feature_names: &[String],
    target_name: &str,
) -> Result<ForestModel> {
    fit_impl(rows, target, params, master_seed, feature_names, target_name, false)
}

/// Default feature names `f0, f1, ...`.
pub fn generic_names(p: usize) -> Vec<String> {
    (0..p).map(|i| format!("f{i}")).collect()
}

impl ForestModel {
    pub fn n_features(&self) -> usize {
        self.feature_names.len()
    }

    fn aggregate<'t>(&self, trees: impl Iterator<Item = &'t Tree>, row: &[Option<f64>]) -> Prediction {
        match self.task {
            Task::Regression => {
                let (mut sum, mut n) = (0.0, 0usize);
                for t in trees {
                    if let Leaf::Mean(v) = t.leaf_for(row) {
                        sum += v;
                        n += 1;
                    }
                }
                let (lo, hi) = self.target_range;
                Prediction::Value((sum / n as f64).clamp(lo, hi))
            }
            Task::Classification { n_classes } => {
                let mut votes = vec![0u32; n_classes];
                let mut n = 0u32;
                for t in trees {
                    if let Leaf::Counts(c) = t.leaf_for(row) {
                        votes[argmax(c)] += 1;
                        n += 1;
                    }
                }
                Prediction::Class {
                    class: argmax(&votes),
                    fractions: votes.iter().map(|&v| v as f64 / n as f64).collect(),
                }
            }
        }
    }

    /// Mean of tree outputs (regression) or hard-vote majority with vote
    /// fractions (classification). Ties go to the lowest class index.
    pub fn predict(&self, row: &[Option<f64>]) -> Result<Prediction> {
        if row.len() != self.n_features() {
            return Err(Error::FeatureMismatch(format!(
                "row has {} values, model expects {}",
                row.len(),
                self.n_features()
            )));
        }
        Ok(self.aggregate(self.trees.iter(), row))
    }

    pub fn predict_all(&self, rows: &[Vec<Option<f64>>]) -> Result<Vec<Prediction>> {
        rows.par_iter().map(|r| self.predict(r)).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FoldSpec {
    pub k: usize,
    pub seed: u64,
}

impl FoldSpec {
    pub fn new(k: usize, seed: u64) -> Self {
        FoldSpec { k, seed }
    }
}

/// Shuffle row indices once, then cut into `k` contiguous folds whose sizes
/// differ by at most one.
pub fn fold_indices(n: usize, spec: FoldSpec) -> Result<Vec<Vec<usize>>> {
    if spec.k < 2 || spec.k > n {
        return Err(Error::InvalidValue(format!("need 2 <= k <= n, got k = {} for n = {n}", spec.k)));
    }
    let mut idx: Vec<usize> = (0..n).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    for i in (1..n).rev() {
        let j = rng.random_range(0..=i);
        idx.swap(i, j);
    }
    let (base, extra) = (n / spec.k, n % spec.k);
    let mut out = Vec::with_capacity(spec.k);
    let mut start = 0;
    for f in 0..spec.k {
        let len = base + usize::from(f < extra);
        out.push(idx[start..start + len].to_vec());
        start += len;
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvResult {
    /// Held-out row indices per fold.
    pub folds: Vec<Vec<usize>>,
    pub per_fold: Vec<SummaryMetrics>,
    pub mean: SummaryMetrics,
    /// Out-of-fold prediction for every row.
    pub predictions: Vec<Prediction>,
}

/// k-fold cross-validation; each fold trains with the same master seed.
pub fn cross_validate(
    rows: &[Vec<Option<f64>>],
    target: &TargetData<'_>,
    params: &ForestParams,
    fold: FoldSpec,
    master_seed: u64,
) -> Result<CvResult> {
    if rows.len() != target.len() {
        return Err(Error::LengthMismatch(format!("{} rows, {} targets", rows.len(), target.len())));
    }
    let folds = fold_indices(rows.len(), fold)?;
    let names = generic_names(rows.first().map_or(0, |r| r.len()));
    let mut predictions: Vec<Option<Prediction>> = vec![None; rows.len()];
    let mut per_fold = Vec::with_capacity(folds.len());
    for test in &folds {
        let mut is_test = vec![false; rows.len()];
        for &i in test {
            is_test[i] = true;
        }
        let train: Vec<usize> = (0..rows.len()).filter(|&i| !is_test[i]).collect();
        let train_rows: Vec<Vec<Option<f64>>> = train.iter().map(|&i| rows[i].clone()).collect();
        let model = match target {
            TargetData::Regression(y) => {
                let ty: Vec<f64> = train.iter().map(|&i| y[i]).collect();
                fit_forest(&train_rows, &TargetData::Regression(&ty), params, master_seed, &names, "target")?
            }
            TargetData::Classification { labels, n_classes } => {
                let tl: Vec<usize> = train.iter().map(|&i| labels[i]).collect();
                let t = TargetData::Classification {
                    labels: &tl,
                    n_classes: *n_classes,
                };
                fit_forest(&train_rows, &t, params, master_seed, &names, "target")?
            }
        };
        let test_rows: Vec<Vec<Option<f64>>> = test.iter().map(|&i| rows[i].clone()).collect();
        let preds = model.predict_all(&test_rows)?;
        per_fold.push(summarize(target, test, &preds));
        for (&i, p) in test.iter().zip(preds) {
            predictions[i] = Some(p);
        }
    }
    Ok(CvResult {
        mean: SummaryMetrics::mean(&per_fold),
        per_fold,
        folds,
        predictions: predictions.into_iter().map(|p| p.expect("folds cover all rows")).collect(),
    })
}

fn summarize(target: &TargetData<'_>, idx: &[usize], preds: &[Prediction]) -> SummaryMetrics {
    match target {
        TargetData::Regression(y) => {
            let obs: Vec<f64> = idx.iter().map(|&i| y[i]).collect();
            let hat: Vec<f64> = preds.iter().filter_map(Prediction::value).collect();
            SummaryMetrics {
                accuracy: None,
                mae: metrics::mae(&obs, &hat).ok(),
                mse: metrics::mse(&obs, &hat).ok(),
                r2: metrics::r2(&obs, &hat).ok(),
            }
        }
        TargetData::Classification { labels, .. } => {
            let correct = idx
                .iter()
                .zip(preds)
                .filter(|(&i, p)| p.class() == Some(labels[i]))
                .count();
            SummaryMetrics {
                accuracy: Some(correct as f64 / idx.len() as f64),
                ..Default::default()
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand_distr::{Distribution, Normal};

    fn rows(v: &[&[f64]]) -> Vec<Vec<Option<f64>>> {
        v.iter().map(|r| r.iter().map(|&x| Some(x)).collect()).collect()
    }

    fn single(n_trees: usize) -> ForestParams {
        ForestParams {
            n_trees,
            bootstrap: false,
            features: FeatureRule::All,
            ..ForestParams::classification()
        }
    }

    fn accuracy(model: &ForestModel, x: &[Vec<Option<f64>>], y: &[usize]) -> f64 {
        let p = model.predict_all(x).unwrap();
        p.iter().zip(y).filter(|(p, y)| p.class() == Some(**y)).count() as f64 / y.len() as f64
    }

    #[test]
    fn separable_binary_feature() {
        let x = rows(&[&[0.0], &[0.0], &[1.0], &[1.0]]);
        let y = [0, 0, 1, 1];
        let t = TargetData::Classification { labels: &y, n_classes: 2 };
        let tree = fit_tree(&x, &t, &single(1), 1).unwrap();
        assert_eq!(tree.depth(), 1);
        let m = fit_forest(&x, &t, &single(1), 1, &generic_names(1), "y").unwrap();
        assert_eq!(accuracy(&m, &x, &y), 1.0);
    }

    #[test]
    fn constant_target_is_single_leaf() {
        let x = rows(&[&[0.0], &[3.0], &[1.0]]);
        let y = [0.1, 0.1, 0.1];
        let tree = fit_tree(&x, &TargetData::Regression(&y), &ForestParams::regression(), 0).unwrap();
        assert_eq!(tree.nodes, vec![Node::Leaf(Leaf::Mean(0.1))]);
    }

    #[test]
    fn xor_needs_depth_two() {
        let x = rows(&[&[0.0, 0.0], &[0.0, 1.0], &[1.0, 0.0], &[1.0, 1.0]]);
        let y = [0, 1, 1, 0];
        let t = TargetData::Classification { labels: &y, n_classes: 2 };
        let tree = fit_tree(&x, &t, &single(1), 3).unwrap();
        assert_eq!(tree.depth(), 2);
        let m = fit_forest(&x, &t, &single(1), 3, &generic_names(2), "y").unwrap();
        assert_eq!(accuracy(&m, &x, &y), 1.0);
    }

    #[test]
    fn single_unbagged_tree_equals_fit_tree() {
        let x = rows(&[&[1.0, 5.0], &[2.0, 3.0], &[3.0, 1.0], &[4.0, 0.0], &[5.0, 2.0]]);
        let y = [0, 0, 1, 1, 2];
        let t = TargetData::Classification { labels: &y, n_classes: 3 };
        let p = ForestParams {
            n_trees: 1,
            bootstrap: false,
            ..ForestParams::classification()
        };
        let m = fit_forest(&x, &t, &p, 77, &generic_names(2), "y").unwrap();
        assert_eq!(m.trees[0], fit_tree(&x, &t, &p, tree_seeds(77, 1)[0]).unwrap());
    }

    fn gaussian_two_class(seed: u64, n: usize) -> (Vec<Vec<Option<f64>>>, Vec<usize>) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let noise = Normal::new(0.0, 1.0).unwrap();
        let mut x = Vec::new();
        let mut y = Vec::new();
        for i in 0..n {
            let c = i % 2;
            let centre = if c == 0 { 0.0 } else { 5.0 };
            x.push(vec![Some(centre + noise.sample(&mut rng)), Some(centre + noise.sample(&mut rng))]);
            y.push(c);
        }
        (x, y)
    }

    #[test]
    fn forest_is_deterministic_and_oob_accurate() {
        let (x, y) = gaussian_two_class(1, 200);
        let t = TargetData::Classification { labels: &y, n_classes: 2 };
        let p = ForestParams::classification();
        let a = fit_forest(&x, &t, &p, 9, &generic_names(2), "y").unwrap();
        let b = fit_forest(&x, &t, &p, 9, &generic_names(2), "y").unwrap();
        assert_eq!(a, b);
        assert!(a.oob_score.unwrap() >= 0.95, "{:?}", a.oob_score);
    }

    #[test]
    fn serial_equals_parallel() {
        let (x, y) = gaussian_two_class(2, 120);
        let t = TargetData::Classification { labels: &y, n_classes: 2 };
        let p = ForestParams {
            n_trees: 16,
            ..ForestParams::classification()
        };
        let names = generic_names(2);
        assert_eq!(
            fit_forest(&x, &t, &p, 4, &names, "y").unwrap(),
            fit_forest_serial(&x, &t, &p, 4, &names, "y").unwrap()
        );
    }

    #[test]
    fn votes_and_ties() {
        let leaf = |c: usize| Tree {
            nodes: vec![Node::Leaf(Leaf::Counts((0..4).map(|i| u32::from(i == c)).collect()))],
        };
        let mut m = ForestModel {
            task: Task::Classification { n_classes: 4 },
            params: ForestParams::classification(),
            feature_names: vec![],
            target_name: "drone_type".into(),
            master_seed: 0,
            target_range: (0.0, 0.0),
            oob_score: None,
            trees: vec![leaf(0), leaf(0), leaf(3)],
        };
        match m.predict(&[]).unwrap() {
            Prediction::Class { class, fractions } => {
                assert_eq!(class, 0);
                assert_eq!(fractions, vec![2.0 / 3.0, 0.0, 0.0, 1.0 / 3.0]);
            }
            _ => panic!(),
        }
        m.trees = vec![leaf(3), leaf(1)];
        assert_eq!(m.predict(&[]).unwrap().class(), Some(1));
        assert!(matches!(m.predict(&[Some(1.0)]), Err(Error::FeatureMismatch(_))));
    }

    #[test]
    fn absent_values_route_to_larger_child() {
        let x = vec![
            vec![Some(0.0)],
            vec![Some(0.1)],
            vec![Some(0.2)],
            vec![Some(5.0)],
            vec![None],
        ];
        let y = [0, 0, 0, 1, 0];
        let t = TargetData::Classification { labels: &y, n_classes: 2 };
        let tree = fit_tree(&x, &t, &single(1), 0).unwrap();
        match &tree.nodes[0] {
            Node::Split { absent_left, .. } => assert!(*absent_left),
            n => panic!("{n:?}"),
        }
        assert!(matches!(tree.leaf_for(&[None]), Leaf::Counts(c) if c[0] > 0));
    }

    #[test]
    fn folds_partition_rows() {
        let f = fold_indices(10, FoldSpec::new(5, 3)).unwrap();
        assert!(f.iter().all(|x| x.len() == 2));
        let mut all: Vec<usize> = f.concat();
        all.sort();
        assert_eq!(all, (0..10).collect::<Vec<_>>());
        let g = fold_indices(11, FoldSpec::new(3, 3)).unwrap();
        assert_eq!(g.iter().map(Vec::len).collect::<Vec<_>>(), vec![4, 4, 3]);
        assert!(fold_indices(3, FoldSpec::new(5, 0)).is_err());
    }

    #[test]
    fn memorized_rows_cross_validate_perfectly() {
        let base = rows(&[&[0.0], &[1.0], &[2.0], &[3.0]]);
        let x: Vec<Vec<Option<f64>>> = base.iter().cycle().take(20).cloned().collect();
        let y: Vec<usize> = (0..20).map(|i| (i % 4) / 2).collect();
        let t = TargetData::Classification { labels: &y, n_classes: 2 };
        let cv = cross_validate(&x, &t, &ForestParams::classification(), FoldSpec::new(5, 1), 0).unwrap();
        assert_eq!(cv.mean.accuracy, Some(1.0));
        assert_eq!(cv.predictions.len(), 20);
    }

    #[test]
    fn regression_cv_reports_errors() {
        let x: Vec<Vec<Option<f64>>> = (0..50).map(|i| vec![Some(i as f64)]).collect();
        let y: Vec<f64> = (0..50).map(|i| 2.0 * i as f64).collect();
        let cv = cross_validate(&x, &TargetData::Regression(&y), &ForestParams::regression(), FoldSpec::new(5, 1), 0).unwrap();
        assert!(cv.mean.r2.unwrap() > 0.9);
        assert!(cv.mean.accuracy.is_none());
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(24))]

            #[test]
            fn regression_bounded_by_training_range(
                data in prop::collection::vec((-50.0..50.0f64, -50.0..50.0f64, -1e3..1e3f64), 8..60),
                queries in prop::collection::vec((-1e4..1e4f64, -1e4..1e4f64), 40),
                seed in any::<u64>(),
            ) {
                let x: Vec<Vec<Option<f64>>> = data.iter().map(|d| vec![Some(d.0), Some(d.1)]).collect();
                let y: Vec<f64> = data.iter().map(|d| d.2).collect();
                let p = ForestParams { n_trees: 10, ..ForestParams::regression() };
                let m = fit_forest(&x, &TargetData::Regression(&y), &p, seed, &generic_names(2), "y").unwrap();
                let lo = y.iter().cloned().fold(f64::INFINITY, f64::min);
                let hi = y.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                for q in &queries {
                    let v = m.predict(&[Some(q.0), Some(q.1)]).unwrap().value().unwrap();
                    prop_assert!(v >= lo && v <= hi);
                }
            }

            #[test]
            fn vote_fractions_sum_to_one(
                data in prop::collection::vec((-5.0..5.0f64, 0usize..4), 4..40),
                seed in any::<u64>(),
            ) {
                let x: Vec<Vec<Option<f64>>> = data.iter().map(|d| vec![Some(d.0)]).collect();
                let y: Vec<usize> = data.iter().map(|d| d.1).collect();
                let p = ForestParams { n_trees: 7, ..ForestParams::classification() };
                let t = TargetData::Classification { labels: &y, n_classes: 4 };
                let m = fit_forest(&x, &t, &p, seed, &generic_names(1), "y").unwrap();
                for r in &x {
                    if let Prediction::Class { fractions, .. } = m.predict(r).unwrap() {
                        prop_assert!((fractions.iter().sum::<f64>() - 1.0).abs() <= 1e-12);
                    }
                }
            }

            #[test]
            fn duplicated_feature_keeps_training_accuracy(seed in 0u64..1000) {
                let (x, y) = gaussian_two_class(seed, 80);
                let t = TargetData::Classification { labels: &y, n_classes: 2 };
                let p = ForestParams { n_trees: 20, ..ForestParams::classification() };
                let base = fit_forest(&x, &t, &p, seed, &generic_names(2), "y").unwrap();
                let x2: Vec<Vec<Option<f64>>> = x.iter().map(|r| vec![r[0], r[1], r[0]]).collect();
                let dup = fit_forest(&x2, &t, &p, seed, &generic_names(3), "y").unwrap();
                prop_assert!(accuracy(&dup, &x2, &y) >= accuracy(&base, &x, &y) - 0.02);
            }
        }
    }
}
