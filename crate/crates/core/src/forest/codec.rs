//! Binary model container. Layout is documented in `docs/model-format.md`.

use std::fs;
use std::path::Path;

use super::{FeatureRule, ForestModel, ForestParams, Leaf, Node, Task, Tree};
use crate::error::{Error, Result};

pub const MAGIC: &[u8; 5] = b"URNS1";
pub const FORMAT_VERSION: u16 = 1;

const TAG_SPLIT: u8 = 0;
const TAG_LEAF: u8 = 1;
const NO_DEPTH: u32 = u32::MAX;

struct Writer(Vec<u8>);

impl Writer {
    fn u8(&mut self, v: u8) {
        self.0.push(v);
    }
    fn u16(&mut self, v: u16) {
        self.0.extend_from_slice(&v.to_le_bytes());
    }
    fn u32(&mut self, v: u32) {
        self.0.extend_from_slice(&v.to_le_bytes());
    }
    fn u64(&mut self, v: u64) {
        self.0.extend_from_slice(&v.to_le_bytes());
    }
    fn f64(&mut self, v: f64) {
        self.u64(v.to_bits());
    }
    fn str(&mut self, s: &str) {
        self.u32(s.len() as u32);
        self.0.extend_from_slice(s.as_bytes());
    }
}

struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

fn corrupt(msg: impl Into<String>) -> Error {
    Error::CorruptModel(msg.into())
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        let end = self.pos.checked_add(n).filter(|&e| e <= self.buf.len());
        let end = end.ok_or_else(|| corrupt(format!("truncated at byte {}", self.pos)))?;
        let s = &self.buf[self.pos..end];
        self.pos = end;
        Ok(s)
    }
    fn u8(&mut self) -> Result<u8> {
        Ok(self.take(1)?[0])
    }
    fn u16(&mut self) -> Result<u16> {
        Ok(u16::from_le_bytes(self.take(2)?.try_into().expect("2 bytes")))
    }
    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().expect("4 bytes")))
    }
    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().expect("8 bytes")))
    }
    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_bits(self.u64()?))
    }
    fn bool(&mut self) -> Result<bool> {
        match self.u8()? {
            0 => Ok(false),
            1 => Ok(true),
            b => Err(corrupt(format!("bad boolean byte {b}"))),
        }
    }
    fn str(&mut self) -> Result<String> {
        let n = self.u32()? as usize;
        String::from_utf8(self.take(n)?.to_vec()).map_err(|_| corrupt("string is not UTF-8"))
    }
    /// Element count, bounded by the bytes left so corrupt headers cannot
    /// trigger huge allocations.
    fn count(&mut self, min_elem: usize) -> Result<usize> {
        let n = self.u32()? as usize;
        if n.saturating_mul(min_elem) > self.buf.len() - self.pos {
            return Err(corrupt(format!("count {n} exceeds remaining bytes")));
        }
        Ok(n)
    }
}

pub fn encode(model: &ForestModel) -> Vec<u8> {
    let mut w = Writer(Vec::new());
    w.0.extend_from_slice(MAGIC);
    w.u16(FORMAT_VERSION);
    let n_classes = match model.task {
        Task::Regression => {
            w.u8(0);
            0
        }
        Task::Classification { n_classes } => {
            w.u8(1);
            n_classes
        }
    };
    w.u32(n_classes as u32);
    let p = &model.params;
    w.u32(p.n_trees as u32);
    w.u32(p.max_depth.map_or(NO_DEPTH, |d| d as u32));
    w.u32(p.min_leaf as u32);
    let (rule, k) = match p.features {
        FeatureRule::Sqrt => (0, 0),
        FeatureRule::Third => (1, 0),
        FeatureRule::All => (2, 0),
        FeatureRule::Fixed(k) => (3, k as u32),
    };
    w.u8(rule);
    w.u32(k);
    w.u8(p.bootstrap as u8);
    w.u64(model.master_seed);
    w.str(&model.target_name);
    w.u32(model.feature_names.len() as u32);
    for f in &model.feature_names {
        w.str(f);
    }
    w.f64(model.target_range.0);
    w.f64(model.target_range.1);
    match model.oob_score {
        Some(s) => {
            w.u8(1);
            w.f64(s);
        }
        None => {
            w.u8(0);
            w.f64(0.0);
        }
    }
    w.u32(model.trees.len() as u32);
    for t in &model.trees {
        w.u32(t.nodes.len() as u32);
        for n in &t.nodes {
            match n {
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                    absent_left,
                } => {
                    w.u8(TAG_SPLIT);
                    w.u32(*feature);
                    w.f64(*threshold);
                    w.u32(*left);
                    w.u32(*right);
                    w.u8(*absent_left as u8);
                }
                Node::Leaf(Leaf::Mean(v)) => {
                    w.u8(TAG_LEAF);
                    w.f64(*v);
                }
                Node::Leaf(Leaf::Counts(c)) => {
                    w.u8(TAG_LEAF);
                    for &x in c {
                        w.u32(x);
                    }
                }
            }
        }
    }
    w.0
}

pub fn decode(buf: &[u8]) -> Result<ForestModel> {
    if buf.len() < MAGIC.len() || &buf[..MAGIC.len()] != MAGIC {
        return Err(Error::NotAModel);
    }
    let mut r = Reader { buf, pos: MAGIC.len() };
    let version = r.u16()?;
    if version != FORMAT_VERSION {
        return Err(Error::VersionMismatch {
            expected: FORMAT_VERSION,
            found: version,
        });
    }
    let task_tag = r.u8()?;
    let n_classes = r.u32()? as usize;
    let task = match task_tag {
        0 => Task::Regression,
        1 if n_classes > 0 => Task::Classification { n_classes },
        t => return Err(corrupt(format!("bad task tag {t}"))),
    };
    let n_trees = r.u32()? as usize;
    let max_depth = match r.u32()? {
        NO_DEPTH => None,
        d => Some(d as usize),
    };
    let min_leaf = r.u32()? as usize;
    let rule = r.u8()?;
    let k = r.u32()? as usize;
    let features = match rule {
        0 => FeatureRule::Sqrt,
        1 => FeatureRule::Third,
        2 => FeatureRule::All,
        3 => FeatureRule::Fixed(k),
        x => return Err(corrupt(format!("bad feature rule {x}"))),
    };
    let bootstrap = r.bool()?;
    let master_seed = r.u64()?;
    let target_name = r.str()?;
    let n_features = r.count(4)?;
    let feature_names = (0..n_features).map(|_| r.str()).collect::<Result<Vec<_>>>()?;
    let target_range = (r.f64()?, r.f64()?);
    let has_oob = r.bool()?;
    let oob = r.f64()?;
    let tree_count = r.count(4)?;
    let mut trees = Vec::with_capacity(tree_count);
    for ti in 0..tree_count {
        let n_nodes = r.count(9)?;
        if n_nodes == 0 {
            return Err(corrupt(format!("tree {ti} is empty")));
        }
        let mut nodes = Vec::with_capacity(n_nodes);
        for _ in 0..n_nodes {
            let node = match r.u8()? {
                TAG_SPLIT => {
                    let feature = r.u32()?;
                    let threshold = r.f64()?;
                    let left = r.u32()?;
                    let right = r.u32()?;
                    let absent_left = r.bool()?;
                    let ok = (feature as usize) < n_features
                        && (left as usize) < n_nodes
                        && (right as usize) < n_nodes
                        && left != 0
                        && right != 0
                        && threshold.is_finite();
                    if !ok {
                        return Err(corrupt(format!("invalid split in tree {ti}")));
                    }
                    Node::Split {
                        feature,
                        threshold,
                        left,
                        right,
                        absent_left,
                    }
                }
                TAG_LEAF => match task {
                    Task::Regression => Node::Leaf(Leaf::Mean(r.f64()?)),
                    Task::Classification { n_classes } => {
                        Node::Leaf(Leaf::Counts((0..n_classes).map(|_| r.u32()).collect::<Result<_>>()?))
                    }
                },
                t => return Err(corrupt(format!("bad node tag {t}"))),
            };
            nodes.push(node);
        }
        let tree = Tree { nodes };
        check_acyclic(&tree).ok_or_else(|| corrupt(format!("tree {ti} is not a tree")))?;
        trees.push(tree);
    }
    if r.pos != buf.len() {
        return Err(corrupt("trailing bytes"));
    }
    Ok(ForestModel {
        task,
        params: ForestParams {
            n_trees,
            max_depth,
            min_leaf,
            features,
            bootstrap,
        },
        feature_names,
        target_name,
        master_seed,
        target_range,
        oob_score: has_oob.then_some(oob),
        trees,
    })
}

/// Every node reachable from the root exactly once.
fn check_acyclic(t: &Tree) -> Option<()> {
    let mut seen = vec![false; t.nodes.len()];
    let mut stack = vec![0usize];
    while let Some(i) = stack.pop() {
        if std::mem::replace(&mut seen[i], true) {
            return None;
        }
        if let Node::Split { left, right, .. } = t.nodes[i] {
            stack.push(left as usize);
            stack.push(right as usize);
        }
    }
    Some(())
}

pub fn save_model(path: &Path, model: &ForestModel) -> Result<()> {
    fs::write(path, encode(model)).map_err(|e| Error::io(path, e))
}

pub fn load_model(path: &Path) -> Result<ForestModel> {
    decode(&fs::read(path).map_err(|e| Error::io(path, e))?)
}

#[cfg(test)]
mod tests {
    use super::super::*;
    use super::*;

    fn model(task: TargetData<'_>) -> ForestModel {
        let x: Vec<Vec<Option<f64>>> = (0..30)
            .map(|i| vec![Some(i as f64 * 0.37), if i % 7 == 0 { None } else { Some((i * i) as f64) }])
            .collect();
        let p = ForestParams {
            n_trees: 5,
            ..match task {
                TargetData::Regression(_) => ForestParams::regression(),
                _ => ForestParams::classification(),
            }
        };
        fit_forest(&x, &task, &p, 11, &["a".into(), "b".into()], "t").unwrap()
    }

    #[test]
    fn round_trip_is_exact() {
        let y: Vec<f64> = (0..30).map(|i| (i as f64).sin() * 1e-3 + 51.5).collect();
        let labels: Vec<usize> = (0..30).map(|i| i % 4).collect();
        for m in [
            model(TargetData::Regression(&y)),
            model(TargetData::Classification {
                labels: &labels,
                n_classes: 4,
            }),
        ] {
            let bytes = encode(&m);
            assert_eq!(&bytes[..5], b"URNS1");
            let back = decode(&bytes).unwrap();
            assert_eq!(back, m);
            assert_eq!(encode(&back), bytes);
        }
    }

    #[test]
    fn wrong_magic_is_not_a_model() {
        let err = decode(b"PK\x03\x04garbage").unwrap_err();
        assert!(matches!(err, Error::NotAModel));
        assert_eq!(err.to_string(), "not a URANUS model");
    }

    #[test]
    fn version_and_truncation_errors() {
        let y: Vec<f64> = (0..30).map(f64::from).collect();
        let mut bytes = encode(&model(TargetData::Regression(&y)));
        assert!(matches!(decode(&bytes[..bytes.len() - 3]), Err(Error::CorruptModel(_))));
        bytes[5] = 9;
        assert!(matches!(decode(&bytes), Err(Error::VersionMismatch { expected: 1, found: 9 })));
    }

    #[test]
    fn save_and_load() {
        let dir = tempfile::tempdir().unwrap();
        let y: Vec<f64> = (0..30).map(f64::from).collect();
        let m = model(TargetData::Regression(&y));
        let path = dir.path().join("m.urns");
        save_model(&path, &m).unwrap();
        assert_eq!(load_model(&path).unwrap(), m);
    }
}
