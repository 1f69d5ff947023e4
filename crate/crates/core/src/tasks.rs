//! Synthetic centrality-based node classification tasks.
//!
//! Each task labels nodes by terciles (low / medium / high) of a centrality
//! statistic computed on the *original* graph; the labels then stay fixed
//! while the graph is pruned.

use serde::{Deserialize, Serialize};

use crate::graph::Graph;
use crate::scalar::Scalar;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CentralityKind {
    Degree,
    DegreeCentrality,
    Closeness,
    Pagerank,
}

impl CentralityKind {
    pub const ALL: [CentralityKind; 4] = [
        CentralityKind::Degree,
        CentralityKind::DegreeCentrality,
        CentralityKind::Closeness,
        CentralityKind::Pagerank,
    ];

    pub fn id(&self) -> &'static str {
        match self {
            CentralityKind::Degree => "degree",
            CentralityKind::DegreeCentrality => "degree_centrality",
            CentralityKind::Closeness => "closeness",
            CentralityKind::Pagerank => "pagerank",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|k| k.id() == s)
            .ok_or_else(|| Error::UnknownMethod(s.into()))
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CentralityVector {
    pub values: Vec<f64>,
    pub kind: CentralityKind,
}

pub const PAGERANK_DAMPING: f64 = 0.85;
pub const PAGERANK_TOL: f64 = 1e-10;
pub const PAGERANK_MAX_ITER: usize = 200;

/// Compute a centrality vector with the default parameters for `kind`.
pub fn centrality<F: Scalar>(g: &Graph<F>, kind: CentralityKind) -> Result<CentralityVector> {
    match kind {
        CentralityKind::Degree | CentralityKind::DegreeCentrality => Ok(degree_like(g, kind)),
        CentralityKind::Closeness => Ok(closeness(g)),
        CentralityKind::Pagerank => {
            pagerank(g, PAGERANK_DAMPING, PAGERANK_TOL, PAGERANK_MAX_ITER)
        }
    }
}

/// Power-iteration PageRank on the weight-proportional column-stochastic
/// transition with uniform teleport; dangling nodes redistribute their mass
/// uniformly. Converged once the L1 change drops below `tol`.
pub fn pagerank<F: Scalar>(
    g: &Graph<F>,
    damping: f64,
    tol: f64,
    max_iter: usize,
) -> Result<CentralityVector> {
    if !(damping > 0.0 && damping < 1.0) {
        return Err(Error::Validation("damping must be in (0,1)".into()));
    }
    let n = g.num_nodes();
    if n == 0 {
        return Err(Error::Validation("pagerank needs at least one node".into()));
    }
    let active = g.full_subset();
    let mut out_weight = vec![0.0f64; n];
    let mut arcs: Vec<(usize, usize, f64)> = Vec::with_capacity(2 * g.num_edges());
    for e in g.edges() {
        if !active.contains(e.id) {
            continue;
        }
        let w = e.w.to_f64().unwrap();
        arcs.push((e.u, e.v, w));
        arcs.push((e.v, e.u, w));
        out_weight[e.u] += w;
        out_weight[e.v] += w;
    }

    let teleport = (1.0 - damping) / n as f64;
    let mut x = vec![1.0 / n as f64; n];
    let mut next = vec![0.0f64; n];
    let mut residual = f64::INFINITY;
    for _ in 0..max_iter {
        let dangling: f64 = (0..n)
            .filter(|&u| out_weight[u] == 0.0)
            .map(|u| x[u])
            .sum();
        let base = teleport + damping * dangling / n as f64;
        next.iter_mut().for_each(|v| *v = base);
        for &(src, dst, w) in &arcs {
            next[dst] += damping * x[src] * w / out_weight[src];
        }
        residual = x
            .iter()
            .zip(next.iter())
            .map(|(a, b)| (a - b).abs())
            .sum();
        std::mem::swap(&mut x, &mut next);
        if residual < tol {
            return Ok(CentralityVector {
                values: x,
                kind: CentralityKind::Pagerank,
            });
        }
    }
    Err(Error::NonConvergence {
        iters: max_iter,
        residual,
    })
}

/// Wasserman–Faust closeness: `(R/(n−1)) · (R/Σd)` where `R` is the number
/// of other nodes reachable from `u` and `Σd` their total BFS distance;
/// isolated nodes score 0. The component-size factor keeps scores
/// comparable on disconnected graphs.
pub fn closeness<F: Scalar>(g: &Graph<F>) -> CentralityVector {
    let n = g.num_nodes();
    let adj = g.adjacency_lists(&g.full_subset());
    let mut values = vec![0.0f64; n];
    let mut dist = vec![usize::MAX; n];
    for u in 0..n {
        dist.iter_mut().for_each(|d| *d = usize::MAX);
        dist[u] = 0;
        let mut queue = std::collections::VecDeque::from([u]);
        let mut reachable = 0usize;
        let mut total = 0usize;
        while let Some(a) = queue.pop_front() {
            for &b in &adj[a] {
                if dist[b] == usize::MAX {
                    dist[b] = dist[a] + 1;
                    reachable += 1;
                    total += dist[b];
                    queue.push_back(b);
                }
            }
        }
        if reachable > 0 && n > 1 {
            let r = reachable as f64;
            values[u] = (r / (n - 1) as f64) * (r / total as f64);
        }
    }
    CentralityVector {
        values,
        kind: CentralityKind::Closeness,
    }
}

/// Unweighted degree, optionally normalized by `n − 1`.
pub fn degree_like<F: Scalar>(g: &Graph<F>, kind: CentralityKind) -> CentralityVector {
    debug_assert!(matches!(
        kind,
        CentralityKind::Degree | CentralityKind::DegreeCentrality
    ));
    let n = g.num_nodes();
    let adj = g.adjacency_lists(&g.full_subset());
    let norm = if kind == CentralityKind::DegreeCentrality && n > 1 {
        (n - 1) as f64
    } else {
        1.0
    };
    CentralityVector {
        values: adj.iter().map(|nbrs| nbrs.len() as f64 / norm).collect(),
        kind,
    }
}

/// Split nodes into terciles of the centrality value: sort ascending by
/// `(value, node id)`, label the first `⌈n/3⌉` nodes 0 (low), the next
/// `⌈(n−⌈n/3⌉)/2⌉` nodes 1, and the rest 2. Group sizes differ by at most 1
/// and ties are broken deterministically by node id.
pub fn tercile_labels(c: &CentralityVector) -> Result<Vec<usize>> {
    let n = c.values.len();
    if n < 3 {
        return Err(Error::Validation(format!(
            "tercile labels need at least 3 nodes, got {n}"
        )));
    }
    if c.values.iter().any(|v| !v.is_finite()) {
        return Err(Error::Validation("centrality values must be finite".into()));
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        c.values[a]
            .partial_cmp(&c.values[b])
            .unwrap()
            .then(a.cmp(&b))
    });
    let low = n.div_ceil(3);
    let mid = (n - low).div_ceil(2);
    let mut labels = vec![0usize; n];
    for (pos, &node) in order.iter().enumerate() {
        labels[node] = if pos < low {
            0
        } else if pos < low + mid {
            1
        } else {
            2
        };
    }
    Ok(labels)
}
