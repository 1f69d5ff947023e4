//! Graph representation, ingestion and elementary structure queries.
//!
//! Graphs are undirected and weighted, with dense 0-based node ids. Each
//! unordered edge pair is stored exactly once with `u < v` and carries a
//! stable id; pruning never reassigns ids, it only shrinks the active
//! [`EdgeSubset`].

use std::collections::HashMap;
use std::fmt::Display;
use std::fs;
use std::path::Path;

use ndarray::Array2;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::scalar::Scalar;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Edge<F> {
    pub u: usize,
    pub v: usize,
    pub w: F,
    pub id: usize,
}

/// Undirected weighted graph with per-node features.
///
/// Immutable after construction; mutation happens only by constructing new
/// `Graph` / `EdgeSubset` values, so values are safe to share read-only
/// across parallel workers.
#[derive(Debug, Clone)]
pub struct Graph<F: Scalar = f64> {
    num_nodes: usize,
    edges: Vec<Edge<F>>,
    features: Array2<F>,
}

impl<F: Scalar> Graph<F> {
    /// Build a validated graph. `raw` edges are given as `(u, v, w)` in any
    /// orientation; duplicates of the same unordered pair are an error unless
    /// `merge_sum` is set, in which case their weights are summed.
    pub fn new(
        num_nodes: usize,
        raw: &[(usize, usize, F)],
        features: Array2<F>,
        merge_sum: bool,
    ) -> Result<Self> {
        if features.nrows() != num_nodes {
            return Err(Error::Shape(format!(
                "feature rows {} != num_nodes {}",
                features.nrows(),
                num_nodes
            )));
        }
        let mut merged: HashMap<(usize, usize), F> = HashMap::new();
        let mut order: Vec<(usize, usize)> = Vec::new();
        for &(a, b, w) in raw {
            if a == b {
                return Err(Error::Validation(format!("self-loop at node {a}")));
            }
            if a >= num_nodes || b >= num_nodes {
                return Err(Error::Index(format!(
                    "edge ({a},{b}) has node id >= num_nodes {num_nodes}"
                )));
            }
            if !(w > F::zero()) {
                return Err(Error::Validation(format!(
                    "edge ({a},{b}) has non-positive weight {w}"
                )));
            }
            let key = (a.min(b), a.max(b));
            match merged.get_mut(&key) {
                None => {
                    merged.insert(key, w);
                    order.push(key);
                }
                Some(prev) => {
                    if merge_sum {
                        *prev = *prev + w;
                    } else if *prev != w {
                        return Err(Error::Validation(format!(
                            "duplicate edge ({},{}) with conflicting weights {} and {} \
                             (pass merge-sum to sum them)",
                            key.0, key.1, *prev, w
                        )));
                    }
                    // equal-weight duplicate: symmetrized directed input, keep one copy
                }
            }
        }
        order.sort_unstable();
        let edges = order
            .into_iter()
            .enumerate()
            .map(|(id, (u, v))| Edge {
                u,
                v,
                w: merged[&(u, v)],
                id,
            })
            .collect();
        Ok(Self {
            num_nodes,
            edges,
            features,
        })
    }

    pub fn num_nodes(&self) -> usize {
        self.num_nodes
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[Edge<F>] {
        &self.edges
    }

    pub fn edge(&self, id: usize) -> Option<&Edge<F>> {
        self.edges.iter().find(|e| e.id == id)
    }

    pub fn features(&self) -> &Array2<F> {
        &self.features
    }

    pub fn feature_dim(&self) -> usize {
        self.features.ncols()
    }

    /// Largest edge id plus one; the index space for [`EdgeSubset`].
    /// Equals `num_edges` for freshly constructed graphs; stays at the
    /// parent's value for graphs produced by [`Graph::remove_edges`].
    pub fn edge_id_space(&self) -> usize {
        self.edges.iter().map(|e| e.id + 1).max().unwrap_or(0)
    }

    pub fn full_subset(&self) -> EdgeSubset {
        let mut s = EdgeSubset::empty(self.edge_id_space());
        for e in &self.edges {
            s.insert(e.id);
        }
        s
    }

    /// New graph with `doomed` edges absent. Node set, features and the ids
    /// of surviving edges are unchanged.
    pub fn remove_edges(&self, doomed: &EdgeSubset) -> Result<Self> {
        for id in doomed.iter() {
            if self.edge(id).is_none() {
                return Err(Error::Index(format!("unknown edge id {id}")));
            }
        }
        let edges = self
            .edges
            .iter()
            .filter(|e| !doomed.contains(e.id))
            .copied()
            .collect();
        Ok(Self {
            num_nodes: self.num_nodes,
            edges,
            features: self.features.clone(),
        })
    }

    /// Component label per node via union-find over the stored edges.
    /// Labels are the smallest node id in each component.
    pub fn connected_components(&self) -> Vec<usize> {
        let mut parent: Vec<usize> = (0..self.num_nodes).collect();
        fn find(parent: &mut Vec<usize>, x: usize) -> usize {
            let mut r = x;
            while parent[r] != r {
                r = parent[r];
            }
            let mut c = x;
            while parent[c] != r {
                let next = parent[c];
                parent[c] = r;
                c = next;
            }
            r
        }
        for e in &self.edges {
            let (ru, rv) = (find(&mut parent, e.u), find(&mut parent, e.v));
            if ru != rv {
                let (lo, hi) = (ru.min(rv), ru.max(rv));
                parent[hi] = lo;
            }
        }
        (0..self.num_nodes)
            .map(|i| find(&mut parent, i))
            .collect()
    }

    pub fn num_components(&self) -> usize {
        let labels = self.connected_components();
        let mut distinct = labels;
        distinct.sort_unstable();
        distinct.dedup();
        distinct.len()
    }

    /// Unweighted adjacency lists over edges in `active`.
    pub fn adjacency_lists(&self, active: &EdgeSubset) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.num_nodes];
        for e in &self.edges {
            if active.contains(e.id) {
                adj[e.u].push(e.v);
                adj[e.v].push(e.u);
            }
        }
        for nbrs in &mut adj {
            nbrs.sort_unstable();
        }
        adj
    }
}

/// Bitmask over the edge-id space of a parent [`Graph`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EdgeSubset {
    words: Vec<u64>,
    universe: usize,
}

impl EdgeSubset {
    pub fn empty(universe: usize) -> Self {
        Self {
            words: vec![0; universe.div_ceil(64)],
            universe,
        }
    }

    pub fn universe(&self) -> usize {
        self.universe
    }

    pub fn contains(&self, id: usize) -> bool {
        id < self.universe && self.words[id / 64] >> (id % 64) & 1 == 1
    }

    pub fn insert(&mut self, id: usize) {
        assert!(id < self.universe, "edge id {id} out of range");
        self.words[id / 64] |= 1 << (id % 64);
    }

    pub fn remove(&mut self, id: usize) {
        if id < self.universe {
            self.words[id / 64] &= !(1 << (id % 64));
        }
    }

    pub fn count(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_subset_of(&self, other: &EdgeSubset) -> bool {
        self.words
            .iter()
            .zip(&other.words)
            .all(|(a, b)| a & !b == 0)
            && self.words[other.words.len().min(self.words.len())..]
                .iter()
                .all(|&w| w == 0)
    }

    /// Set difference `self \ other`.
    pub fn minus(&self, other: &EdgeSubset) -> EdgeSubset {
        let mut out = self.clone();
        for (a, b) in out.words.iter_mut().zip(&other.words) {
            *a &= !b;
        }
        out
    }

    /// Member ids in ascending order.
    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.universe).filter(|&i| self.contains(i))
    }
}

/// Node-classification task: labels plus disjoint train/val/test masks.
#[derive(Debug, Clone)]
pub struct Task {
    pub labels: Vec<usize>,
    pub num_classes: usize,
    pub train_mask: Vec<bool>,
    pub val_mask: Vec<bool>,
    pub test_mask: Vec<bool>,
}

impl Task {
    pub fn new(
        labels: Vec<usize>,
        num_classes: usize,
        train_mask: Vec<bool>,
        val_mask: Vec<bool>,
        test_mask: Vec<bool>,
    ) -> Result<Self> {
        let n = labels.len();
        if train_mask.len() != n || val_mask.len() != n || test_mask.len() != n {
            return Err(Error::Shape("mask length != label length".into()));
        }
        if let Some(&bad) = labels.iter().find(|&&y| y >= num_classes) {
            return Err(Error::Validation(format!(
                "label {bad} >= num_classes {num_classes}"
            )));
        }
        for i in 0..n {
            if (train_mask[i] && val_mask[i])
                || (train_mask[i] && test_mask[i])
                || (val_mask[i] && test_mask[i])
            {
                return Err(Error::Validation(format!("masks overlap at node {i}")));
            }
        }
        for (name, m) in [
            ("train", &train_mask),
            ("val", &val_mask),
            ("test", &test_mask),
        ] {
            if !m.iter().any(|&b| b) {
                return Err(Error::EmptyMask(name.into()));
            }
        }
        Ok(Self {
            labels,
            num_classes,
            train_mask,
            val_mask,
            test_mask,
        })
    }

    pub fn num_nodes(&self) -> usize {
        self.labels.len()
    }

    pub fn mask(&self, which: MaskKind) -> &[bool] {
        match which {
            MaskKind::Train => &self.train_mask,
            MaskKind::Val => &self.val_mask,
            MaskKind::Test => &self.test_mask,
        }
    }

    pub fn masked_labels(&self, which: MaskKind) -> Vec<usize> {
        self.labels
            .iter()
            .zip(self.mask(which))
            .filter(|(_, &m)| m)
            .map(|(&y, _)| y)
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MaskKind {
    Train,
    Val,
    Test,
}

/// Seeded 60/20/20 split of `num_nodes` ids into train/val/test masks.
///
/// Train takes `floor(0.6 n)` nodes, validation `floor(0.2 n)`, and the
/// remainder goes to test (34 nodes split 20/6/8). The held-out test set is
/// peeled off the seeded permutation first so it stays fixed as the other
/// fractions round.
pub fn gen_split(num_nodes: usize, seed: u64) -> Result<(Vec<bool>, Vec<bool>, Vec<bool>)> {
    if num_nodes < 5 {
        return Err(Error::DegenerateSplit(num_nodes));
    }
    let mut ids: Vec<usize> = (0..num_nodes).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    ids.shuffle(&mut rng);
    // peel the held-out test set off the shuffled order first, then the
    // training set; validation gets the remainder
    let n_train = num_nodes * 6 / 10;
    let n_val = num_nodes * 2 / 10;
    let n_test = num_nodes - n_train - n_val;
    let mut train = vec![false; num_nodes];
    let mut val = vec![false; num_nodes];
    let mut test = vec![false; num_nodes];
    for (pos, &id) in ids.iter().enumerate() {
        if pos < n_test {
            test[id] = true;
        } else if pos < n_test + n_train {
            train[id] = true;
        } else {
            val[id] = true;
        }
    }
    Ok((train, val, test))
}

// ---------------------------------------------------------------------------
// Text formats: TSV edge list, CSV feature matrix, label and split files.
// ---------------------------------------------------------------------------

/// Parse a TSV edge list: `u\tv` or `u\tv\tw`, `#` comments ignored.
/// Directed duplicates are merged by symmetrization; conflicting duplicate
/// weights are an error unless `merge_sum` is set.
pub fn load_graph<F: Scalar>(
    edge_list_path: &Path,
    features_path: &Path,
    merge_sum: bool,
) -> Result<Graph<F>> {
    let features = load_features::<F>(features_path)?;
    let num_nodes = features.nrows();
    let raw = parse_edge_list::<F>(edge_list_path)?;
    Graph::new(num_nodes, &raw, features, merge_sum)
}

pub fn parse_edge_list<F: Scalar>(path: &Path) -> Result<Vec<(usize, usize, F)>> {
    let text = fs::read_to_string(path)?;
    let pathstr = path.display().to_string();
    let mut raw = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut cols = line.split('\t');
        let perr = |msg: &str| Error::Parse {
            path: pathstr.clone(),
            line: lineno + 1,
            msg: msg.into(),
        };
        let u: usize = cols
            .next()
            .ok_or_else(|| perr("missing source column"))?
            .parse()
            .map_err(|_| perr("bad source id"))?;
        let v: usize = cols
            .next()
            .ok_or_else(|| perr("missing destination column"))?
            .parse()
            .map_err(|_| perr("bad destination id"))?;
        let w = match cols.next() {
            None => F::one(),
            Some(s) => {
                let w: f64 = s.parse().map_err(|_| perr("bad weight"))?;
                F::from_f64_lossy(w)
            }
        };
        if cols.next().is_some() {
            return Err(perr("too many columns"));
        }
        raw.push((u, v, w));
    }
    Ok(raw)
}

pub fn load_features<F: Scalar>(path: &Path) -> Result<Array2<F>> {
    let text = fs::read_to_string(path)?;
    let pathstr = path.display().to_string();
    let mut rows: Vec<Vec<F>> = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let row: std::result::Result<Vec<F>, _> = line
            .split(',')
            .map(|s| s.trim().parse::<f64>().map(F::from_f64_lossy))
            .collect();
        let row = row.map_err(|_| Error::Parse {
            path: pathstr.clone(),
            line: lineno + 1,
            msg: "bad feature value".into(),
        })?;
        if let Some(first) = rows.first() {
            if row.len() != first.len() {
                return Err(Error::Parse {
                    path: pathstr,
                    line: lineno + 1,
                    msg: format!("row has {} columns, expected {}", row.len(), first.len()),
                });
            }
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(Error::Validation(format!("empty feature file {pathstr}")));
    }
    let dim = rows[0].len();
    let flat: Vec<F> = rows.into_iter().flatten().collect();
    let n = flat.len() / dim;
    Array2::from_shape_vec((n, dim), flat)
        .map_err(|e| Error::Shape(e.to_string()))
}

pub fn load_labels(path: &Path) -> Result<Vec<usize>> {
    let text = fs::read_to_string(path)?;
    let mut labels = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        labels.push(line.parse().map_err(|_| Error::Parse {
            path: path.display().to_string(),
            line: lineno + 1,
            msg: "bad label".into(),
        })?);
    }
    Ok(labels)
}

/// Splits file: JSON `{"train":[ids],"val":[ids],"test":[ids]}`.
pub fn load_splits(path: &Path, num_nodes: usize) -> Result<(Vec<bool>, Vec<bool>, Vec<bool>)> {
    #[derive(serde::Deserialize)]
    struct Splits {
        train: Vec<usize>,
        val: Vec<usize>,
        test: Vec<usize>,
    }
    let s: Splits = serde_json::from_str(&fs::read_to_string(path)?)?;
    let to_mask = |ids: &[usize]| -> Result<Vec<bool>> {
        let mut m = vec![false; num_nodes];
        for &i in ids {
            if i >= num_nodes {
                return Err(Error::Index(format!("split id {i} >= num_nodes")));
            }
            m[i] = true;
        }
        Ok(m)
    };
    Ok((to_mask(&s.train)?, to_mask(&s.val)?, to_mask(&s.test)?))
}

/// Write the active edges of `g` as a TSV edge list.
pub fn save_edge_list<F: Scalar + Display>(
    g: &Graph<F>,
    active: &EdgeSubset,
    path: &Path,
) -> Result<()> {
    let mut out = String::new();
    for e in g.edges() {
        if active.contains(e.id) {
            out.push_str(&format!("{}\t{}\t{}\n", e.u, e.v, e.w));
        }
    }
    fs::write(path, out)?;
    Ok(())
}
