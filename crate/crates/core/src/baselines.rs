//! Heuristic edge scorers used as pruning baselines.
//!
//! Every scorer returns one finite "keep" score per active edge, in
//! ascending edge-id order; the harness removes the lowest-scoring edges
//! first. RE, RN and EFF are pure functions of `(graph, seed)`; LD, LS,
//! SCAN and SO are pure functions of the graph.

use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::graph::{EdgeSubset, Graph};
use crate::scalar::Scalar;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum BaselineMethod {
    RandomEdge,
    RandomNode,
    ForestFire,
    LocalDegree,
    LocalSimilarity,
    Scan,
    SimmelianOverlap,
}

impl BaselineMethod {
    pub const ALL: [BaselineMethod; 7] = [
        BaselineMethod::RandomEdge,
        BaselineMethod::RandomNode,
        BaselineMethod::ForestFire,
        BaselineMethod::LocalDegree,
        BaselineMethod::LocalSimilarity,
        BaselineMethod::Scan,
        BaselineMethod::SimmelianOverlap,
    ];

    pub fn id(&self) -> &'static str {
        match self {
            BaselineMethod::RandomEdge => "RE",
            BaselineMethod::RandomNode => "RN",
            BaselineMethod::ForestFire => "EFF",
            BaselineMethod::LocalDegree => "LD",
            BaselineMethod::LocalSimilarity => "LS",
            BaselineMethod::Scan => "SCAN",
            BaselineMethod::SimmelianOverlap => "SO",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|m| m.id().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::UnknownMethod(s.into()))
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BaselineParams {
    pub forest_fire_burn_prob: f64,
    pub forest_fire_fires: usize,
    pub simmelian_max_rank: usize,
    /// Recompute the (stochastic) forest-fire scores on each step's
    /// surviving subgraph instead of reusing the full-graph ranking.
    pub rescore_per_step: bool,
}

impl Default for BaselineParams {
    fn default() -> Self {
        Self {
            forest_fire_burn_prob: 0.7,
            forest_fire_fires: 1000,
            simmelian_max_rank: 10,
            rescore_per_step: false,
        }
    }
}

impl BaselineParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.forest_fire_burn_prob > 0.0 && self.forest_fire_burn_prob < 1.0) {
            return Err(Error::Validation("burn probability must be in (0,1)".into()));
        }
        if self.forest_fire_fires == 0 || self.simmelian_max_rank == 0 {
            return Err(Error::Validation("fires and max rank must be >= 1".into()));
        }
        Ok(())
    }
}

pub fn score<F: Scalar>(
    method: BaselineMethod,
    g: &Graph<F>,
    active: &EdgeSubset,
    seed: u64,
    params: &BaselineParams,
) -> Result<Vec<(usize, f64)>> {
    params.validate()?;
    Ok(match method {
        BaselineMethod::RandomEdge => score_random_edge(g, active, seed),
        BaselineMethod::RandomNode => score_random_node(g, active, seed),
        BaselineMethod::ForestFire => score_forest_fire(g, active, seed, params),
        BaselineMethod::LocalDegree => score_local_degree(g, active),
        BaselineMethod::LocalSimilarity => score_local_similarity(g, active),
        BaselineMethod::Scan => score_scan(g, active),
        BaselineMethod::SimmelianOverlap => score_simmelian(g, active, params.simmelian_max_rank),
    })
}

fn active_ids<F: Scalar>(g: &Graph<F>, active: &EdgeSubset) -> Vec<usize> {
    g.edges()
        .iter()
        .filter(|e| active.contains(e.id))
        .map(|e| e.id)
        .collect()
}

/// Seeded uniform permutation rank per edge; lower rank removed first.
pub fn score_random_edge<F: Scalar>(
    g: &Graph<F>,
    active: &EdgeSubset,
    seed: u64,
) -> Vec<(usize, f64)> {
    let mut ids = active_ids(g, active);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    ids.shuffle(&mut rng);
    let mut ranked: Vec<(usize, f64)> = ids
        .into_iter()
        .enumerate()
        .map(|(rank, id)| (id, rank as f64))
        .collect();
    ranked.sort_by_key(|&(id, _)| id);
    ranked
}

/// Seeded random node order; an edge scores the earliest position of either
/// endpoint, so edges of early-drawn nodes are removed first.
pub fn score_random_node<F: Scalar>(
    g: &Graph<F>,
    active: &EdgeSubset,
    seed: u64,
) -> Vec<(usize, f64)> {
    let mut nodes: Vec<usize> = (0..g.num_nodes()).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    nodes.shuffle(&mut rng);
    let mut pos = vec![0usize; g.num_nodes()];
    for (p, &node) in nodes.iter().enumerate() {
        pos[node] = p;
    }
    g.edges()
        .iter()
        .filter(|e| active.contains(e.id))
        .map(|e| (e.id, pos[e.u].min(pos[e.v]) as f64))
        .collect()
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E3779B97F4A7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58476D1CE4E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D049BB133111EB);
    x ^ (x >> 31)
}

/// Forest-fire burn counts: each of `fires` seeded burns starts at a uniform
/// node and spreads breadth-first, burning each incident edge with
/// probability `burn_prob * w` (clamped to 1); each edge burns at most once
/// per fire. Higher burn count = keep. Per-fire sub-seeds derive from
/// `(seed, fire index)`, so any execution order gives the same counts.
pub fn score_forest_fire<F: Scalar>(
    g: &Graph<F>,
    active: &EdgeSubset,
    seed: u64,
    params: &BaselineParams,
) -> Vec<(usize, f64)> {
    let n = g.num_nodes();
    // incidence lists ordered by (neighbor, edge id) for deterministic spread
    let mut incident: Vec<Vec<(usize, usize, f64)>> = vec![Vec::new(); n];
    for e in g.edges() {
        if active.contains(e.id) {
            let w = e.w.to_f64().unwrap();
            incident[e.u].push((e.v, e.id, w));
            incident[e.v].push((e.u, e.id, w));
        }
    }
    for lst in &mut incident {
        lst.sort_unstable_by_key(|&(nbr, id, _)| (nbr, id));
    }

    let mut counts = vec![0u64; g.edge_id_space()];
    for fire in 0..params.forest_fire_fires {
        let mut rng = ChaCha8Rng::seed_from_u64(splitmix64(seed ^ fire as u64));
        let start = rng.random_range(0..n);
        let mut burned_edge = vec![false; g.edge_id_space()];
        let mut queued = vec![false; n];
        let mut queue = std::collections::VecDeque::from([start]);
        queued[start] = true;
        while let Some(u) = queue.pop_front() {
            for &(v, id, w) in &incident[u] {
                if burned_edge[id] {
                    continue;
                }
                let p = (params.forest_fire_burn_prob * w).min(1.0);
                if rng.random_range(0.0..1.0) < p {
                    burned_edge[id] = true;
                    counts[id] += 1;
                    if !queued[v] {
                        queued[v] = true;
                        queue.push_back(v);
                    }
                }
            }
        }
    }
    active_ids(g, active)
        .into_iter()
        .map(|id| (id, counts[id] as f64))
        .collect()
}

/// Per-node degree-rank score favoring edges that point at high-degree
/// neighbors. Within each node's incidence list, edges are dense-ranked by
/// neighbor degree (equal degrees share a rank) and the rank is normalized
/// to [0, 1]; a node with a single degree class gives all its edges 1. The
/// edge keeps the larger of its two endpoint ranks, which makes the score
/// invariant under node relabeling.
pub fn score_local_degree<F: Scalar>(g: &Graph<F>, active: &EdgeSubset) -> Vec<(usize, f64)> {
    let adj = g.adjacency_lists(active);
    let degree: Vec<usize> = adj.iter().map(|nbrs| nbrs.len()).collect();

    // normalized dense rank of `deg` among the node's neighbor degrees
    let rank_at = |node: usize, nbr: usize| -> f64 {
        let mut degs: Vec<usize> = adj[node].iter().map(|&x| degree[x]).collect();
        degs.sort_unstable();
        degs.dedup();
        if degs.len() <= 1 {
            return 1.0;
        }
        let rank = degs.binary_search(&degree[nbr]).unwrap();
        rank as f64 / (degs.len() - 1) as f64
    };

    g.edges()
        .iter()
        .filter(|e| active.contains(e.id))
        .map(|e| (e.id, rank_at(e.u, e.v).max(rank_at(e.v, e.u))))
        .collect()
}

fn closed_neighborhoods<F: Scalar>(g: &Graph<F>, active: &EdgeSubset) -> Vec<BTreeSet<usize>> {
    let mut nbh: Vec<BTreeSet<usize>> = (0..g.num_nodes())
        .map(|i| BTreeSet::from([i]))
        .collect();
    for e in g.edges() {
        if active.contains(e.id) {
            nbh[e.u].insert(e.v);
            nbh[e.v].insert(e.u);
        }
    }
    nbh
}

/// Jaccard similarity of closed neighborhoods.
pub fn score_local_similarity<F: Scalar>(g: &Graph<F>, active: &EdgeSubset) -> Vec<(usize, f64)> {
    let nbh = closed_neighborhoods(g, active);
    g.edges()
        .iter()
        .filter(|e| active.contains(e.id))
        .map(|e| {
            let inter = nbh[e.u].intersection(&nbh[e.v]).count();
            let union = nbh[e.u].union(&nbh[e.v]).count();
            (e.id, inter as f64 / union as f64)
        })
        .collect()
}

/// Structural similarity `|N[u] ∩ N[v]| / sqrt(|N[u]| |N[v]|)` over closed
/// neighborhoods.
pub fn score_scan<F: Scalar>(g: &Graph<F>, active: &EdgeSubset) -> Vec<(usize, f64)> {
    let nbh = closed_neighborhoods(g, active);
    g.edges()
        .iter()
        .filter(|e| active.contains(e.id))
        .map(|e| {
            let inter = nbh[e.u].intersection(&nbh[e.v]).count();
            let sigma = inter as f64 / ((nbh[e.u].len() * nbh[e.v].len()) as f64).sqrt();
            (e.id, sigma)
        })
        .collect()
}

/// Simmelian overlap: each node ranks its neighbors by embeddedness (common
/// neighbor count, ties by id) and keeps the strongest `max_rank` ties with
/// embeddedness at least 1; the edge score is the overlap of the two
/// endpoints' strong-tie sets.
pub fn score_simmelian<F: Scalar>(
    g: &Graph<F>,
    active: &EdgeSubset,
    max_rank: usize,
) -> Vec<(usize, f64)> {
    let adj = g.adjacency_lists(active);
    let nbr_sets: Vec<BTreeSet<usize>> = adj
        .iter()
        .map(|nbrs| nbrs.iter().copied().collect())
        .collect();
    let embeddedness =
        |u: usize, v: usize| nbr_sets[u].intersection(&nbr_sets[v]).count();

    let strong: Vec<BTreeSet<usize>> = (0..g.num_nodes())
        .map(|u| {
            let mut ranked: Vec<(usize, usize)> = adj[u]
                .iter()
                .map(|&v| (embeddedness(u, v), v))
                .filter(|&(emb, _)| emb >= 1)
                .collect();
            ranked.sort_by(|a, b| b.0.cmp(&a.0).then(a.1.cmp(&b.1)));
            ranked.into_iter().take(max_rank).map(|(_, v)| v).collect()
        })
        .collect();

    g.edges()
        .iter()
        .filter(|e| active.contains(e.id))
        .map(|e| {
            let overlap = strong[e.u].intersection(&strong[e.v]).count();
            (e.id, overlap as f64)
        })
        .collect()
}
