//! CART trees stored as node arenas.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{ForestParams, TargetData};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Leaf {
    Mean(f64),
    /// Training row count per class.
    Counts(Vec<u32>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Node {
    /// `value <= threshold` goes left; an absent value goes left iff `absent_left`.
    Split {
        feature: u32,
        threshold: f64,
        left: u32,
        right: u32,
        absent_left: bool,
    },
    Leaf(Leaf),
}

/// Nodes in an arena; the root is node 0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tree {
    pub nodes: Vec<Node>,
}

impl Tree {
    pub fn leaf_for(&self, row: &[Option<f64>]) -> &Leaf {
        let mut i = 0usize;
        loop {
            match &self.nodes[i] {
                Node::Leaf(l) => return l,
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                    absent_left,
                } => {
                    let go_left = match row[*feature as usize] {
                        Some(v) => v <= *threshold,
                        None => *absent_left,
                    };
                    i = if go_left { *left } else { *right } as usize;
                }
            }
        }
    }

    pub fn depth(&self) -> usize {
        fn walk(nodes: &[Node], i: usize) -> usize {
            match &nodes[i] {
                Node::Leaf(_) => 0,
                Node::Split { left, right, .. } => 1 + walk(nodes, *left as usize).max(walk(nodes, *right as usize)),
            }
        }
        walk(&self.nodes, 0)
    }
}

/// Class with the most votes; ties go to the lowest index.
pub fn argmax(counts: &[u32]) -> usize {
    let mut best = 0;
    for (i, &c) in counts.iter().enumerate() {
        if c > counts[best] {
            best = i;
        }
    }
    best
}

/// Column-major view with absent cells.
pub(crate) struct Columns<'a> {
    pub cols: Vec<Vec<Option<f64>>>,
    pub target: &'a TargetData<'a>,
}

impl<'a> Columns<'a> {
    pub fn new(rows: &[Vec<Option<f64>>], target: &'a TargetData<'a>) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::EmptyInput);
        }
        if rows.len() != target.len() {
            return Err(Error::LengthMismatch(format!("{} rows, {} targets", rows.len(), target.len())));
        }
        let p = rows[0].len();
        if rows.iter().any(|r| r.len() != p) {
            return Err(Error::FeatureMismatch("rows differ in width".into()));
        }
        if rows.iter().flatten().flatten().any(|v| !v.is_finite()) {
            return Err(Error::InvalidValue("feature values must be finite".into()));
        }
        if let TargetData::Classification { labels, n_classes } = target {
            if labels.iter().any(|&l| l >= *n_classes) {
                return Err(Error::InvalidValue("class label out of range".into()));
            }
        }
        if let TargetData::Regression(y) = target {
            if y.iter().any(|v| !v.is_finite()) {
                return Err(Error::InvalidValue("targets must be finite".into()));
            }
        }
        let cols = (0..p).map(|f| rows.iter().map(|r| r[f]).collect()).collect();
        Ok(Columns { cols, target })
    }
}

/// Impurity accumulator over a set of rows.
#[derive(Clone)]
enum Stats {
    /// count, sum and sum of squares of targets centred on the node mean.
    Reg { n: f64, s: f64, ss: f64 },
    Class { n: f64, counts: Vec<f64> },
}

impl Stats {
    fn empty_like(&self) -> Stats {
        match self {
            Stats::Reg { .. } => Stats::Reg { n: 0.0, s: 0.0, ss: 0.0 },
            Stats::Class { counts, .. } => Stats::Class {
                n: 0.0,
                counts: vec![0.0; counts.len()],
            },
        }
    }

    fn add(&mut self, y: TargetValue, sign: f64) {
        match (self, y) {
            (Stats::Reg { n, s, ss }, TargetValue::Reg(v)) => {
                *n += sign;
                *s += sign * v;
                *ss += sign * v * v;
            }
            (Stats::Class { n, counts }, TargetValue::Class(c)) => {
                *n += sign;
                counts[c] += sign;
            }
            _ => unreachable!("target kind fixed per tree"),
        }
    }

    /// Total impurity: SSE for regression, n * Gini for classification.
    fn impurity(&self) -> f64 {
        match self {
            Stats::Reg { n, s, ss } => {
                if *n == 0.0 {
                    0.0
                } else {
                    (ss - s * s / n).max(0.0)
                }
            }
            Stats::Class { n, counts } => {
                if *n == 0.0 {
                    0.0
                } else {
                    n - counts.iter().map(|c| c * c).sum::<f64>() / n
                }
            }
        }
    }
}

#[derive(Clone, Copy)]
enum TargetValue {
    Reg(f64),
    Class(usize),
}

struct Best {
    gain: f64,
    feature: usize,
    threshold: f64,
    absent_left: bool,
}

pub(crate) struct Grower<'a> {
    data: &'a Columns<'a>,
    params: &'a ForestParams,
    n_features: usize,
    mtry: usize,
    rng: ChaCha8Rng,
}

impl<'a> Grower<'a> {
    pub fn new(data: &'a Columns<'a>, params: &'a ForestParams, seed: u64) -> Self {
        let n_features = data.cols.len();
        Grower {
            data,
            params,
            n_features,
            mtry: params.features.resolve(n_features),
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    pub fn rng(&mut self) -> &mut ChaCha8Rng {
        &mut self.rng
    }

    fn target(&self, row: usize, centre: f64) -> TargetValue {
        match self.data.target {
            TargetData::Regression(y) => TargetValue::Reg(y[row] - centre),
            TargetData::Classification { labels, .. } => TargetValue::Class(labels[row]),
        }
    }

    fn leaf(&self, rows: &[u32]) -> Leaf {
        match self.data.target {
            TargetData::Regression(y) => {
                let vals = rows.iter().map(|&r| y[r as usize]);
                let y0 = y[rows[0] as usize];
                let (lo, hi) = vals.clone().fold((y0, y0), |(lo, hi), v| (lo.min(v), hi.max(v)));
                let mean = y0 + vals.map(|v| v - y0).sum::<f64>() / rows.len() as f64;
                Leaf::Mean(mean.clamp(lo, hi))
            }
            TargetData::Classification { labels, n_classes } => {
                let mut c = vec![0u32; *n_classes];
                for &r in rows {
                    c[labels[r as usize]] += 1;
                }
                Leaf::Counts(c)
            }
        }
    }

    fn centre(&self, rows: &[u32]) -> f64 {
        match self.data.target {
            TargetData::Regression(y) => rows.iter().map(|&r| y[r as usize]).sum::<f64>() / rows.len() as f64,
            TargetData::Classification { .. } => 0.0,
        }
    }

    fn stats(&self, rows: &[u32], centre: f64) -> Stats {
        let mut st = match self.data.target {
            TargetData::Regression(_) => Stats::Reg { n: 0.0, s: 0.0, ss: 0.0 },
            TargetData::Classification { n_classes, .. } => Stats::Class {
                n: 0.0,
                counts: vec![0.0; *n_classes],
            },
        };
        for &r in rows {
            st.add(self.target(r as usize, centre), 1.0);
        }
        st
    }

    /// Best split of `rows` on one feature, evaluated over rows where the
    /// feature is present. Gain is scaled by the present fraction.
    fn best_on(&self, f: usize, rows: &[u32], centre: f64, template: &Stats) -> Option<Best> {
        let col = &self.data.cols[f];
        let mut present: Vec<(f64, u32)> = rows
            .iter()
            .filter_map(|&r| col[r as usize].map(|v| (v, r)))
            .collect();
        if present.len() < 2 {
            return None;
        }
        present.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        if present[0].0 == present[present.len() - 1].0 {
            return None;
        }
        let n_absent = rows.len() - present.len();
        let mut right = template.empty_like();
        for &(_, r) in &present {
            right.add(self.target(r as usize, centre), 1.0);
        }
        let parent = right.impurity();
        let mut left = template.empty_like();
        let scale = present.len() as f64 / rows.len() as f64;
        let min_leaf = self.params.min_leaf.max(1);
        let mut best: Option<Best> = None;
        for i in 0..present.len() - 1 {
            let y = self.target(present[i].1 as usize, centre);
            left.add(y, 1.0);
            right.add(y, -1.0);
            let (a, b) = (present[i].0, present[i + 1].0);
            if a == b {
                continue;
            }
            let (nl, nr) = (i + 1, present.len() - i - 1);
            let absent_left = nl >= nr;
            let (tl, tr) = if absent_left { (nl + n_absent, nr) } else { (nl, nr + n_absent) };
            if tl < min_leaf || tr < min_leaf {
                continue;
            }
            let gain = scale * (parent - left.impurity() - right.impurity());
            if best.as_ref().is_none_or(|bb| gain > bb.gain) {
                let mut threshold = a + (b - a) / 2.0;
                if threshold >= b {
                    threshold = a;
                }
                best = Some(Best {
                    gain,
                    feature: f,
                    threshold,
                    absent_left,
                });
            }
        }
        best
    }

    fn pure(&self, rows: &[u32]) -> bool {
        match self.data.target {
            TargetData::Regression(y) => {
                let v0 = y[rows[0] as usize];
                rows.iter().all(|&r| y[r as usize] == v0)
            }
            TargetData::Classification { labels, .. } => {
                let c0 = labels[rows[0] as usize];
                rows.iter().all(|&r| labels[r as usize] == c0)
            }
        }
    }

    fn find_split(&mut self, rows: &[u32]) -> Option<Best> {
        let centre = self.centre(rows);
        let template = self.stats(rows, centre);
        let mut order: Vec<usize> = (0..self.n_features).collect();
        order.shuffle(&mut self.rng);
        let mut best: Option<Best> = None;
        for (tried, &f) in order.iter().enumerate() {
            // past the random subset, keep going only until something splits
            if tried >= self.mtry && best.is_some() {
                break;
            }
            if let Some(b) = self.best_on(f, rows, centre, &template) {
                if best.as_ref().is_none_or(|bb| b.gain > bb.gain) {
                    best = Some(b);
                }
            }
        }
        best
    }

    pub fn grow(&mut self, rows: Vec<u32>) -> Tree {
        let mut nodes = vec![Node::Leaf(Leaf::Mean(0.0))];
        let mut stack: Vec<(usize, Vec<u32>, usize)> = vec![(0, rows, 0)];
        let min_leaf = self.params.min_leaf.max(1);
        while let Some((idx, rows, depth)) = stack.pop() {
            let stop = self.params.max_depth.is_some_and(|d| depth >= d)
                || rows.len() < 2 * min_leaf
                || self.pure(&rows);
            let split = if stop { None } else { self.find_split(&rows) };
            let Some(b) = split else {
                nodes[idx] = Node::Leaf(self.leaf(&rows));
                continue;
            };
            let col = &self.data.cols[b.feature];
            let (l, r): (Vec<u32>, Vec<u32>) = rows.iter().partition(|&&row| match col[row as usize] {
                Some(v) => v <= b.threshold,
                None => b.absent_left,
            });
            let (li, ri) = (nodes.len(), nodes.len() + 1);
            nodes.push(Node::Leaf(Leaf::Mean(0.0)));
            nodes.push(Node::Leaf(Leaf::Mean(0.0)));
            nodes[idx] = Node::Split {
                feature: b.feature as u32,
                threshold: b.threshold,
                left: li as u32,
                right: ri as u32,
                absent_left: b.absent_left,
            };
            stack.push((ri, r, depth + 1));
            stack.push((li, l, depth + 1));
        }
        Tree { nodes }
    }
}
