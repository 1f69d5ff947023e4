//! Built-in Zachary karate club dataset.

use ndarray::Array2;

use crate::graph::{gen_split, Graph, Task};
use crate::scalar::Scalar;
use crate::Result;

/// The 78 undirected edges of Zachary's karate club, as shipped by
/// `networkx.karate_club_graph()`.
pub const KARATE_EDGES: [(usize, usize); 78] = [
    (0, 1), (0, 2), (0, 3), (0, 4), (0, 5), (0, 6), (0, 7), (0, 8), (0, 10),
    (0, 11), (0, 12), (0, 13), (0, 17), (0, 19), (0, 21), (0, 31), (1, 2),
    (1, 3), (1, 7), (1, 13), (1, 17), (1, 19), (1, 21), (1, 30), (2, 3),
    (2, 7), (2, 8), (2, 9), (2, 13), (2, 27), (2, 28), (2, 32), (3, 7),
    (3, 12), (3, 13), (4, 6), (4, 10), (5, 6), (5, 10), (5, 16), (6, 16),
    (8, 30), (8, 32), (8, 33), (9, 33), (13, 33), (14, 32), (14, 33),
    (15, 32), (15, 33), (18, 32), (18, 33), (19, 33), (20, 32), (20, 33),
    (22, 32), (22, 33), (23, 25), (23, 27), (23, 29), (23, 32), (23, 33),
    (24, 25), (24, 27), (24, 31), (25, 31), (26, 29), (26, 33), (27, 33),
    (28, 31), (28, 33), (29, 32), (29, 33), (30, 32), (30, 33), (31, 32),
    (31, 33), (32, 33),
];

/// Four-community node labels for the karate club.
///
/// This is the modularity-based 4-community labeling distributed with the
/// `KarateClub` dataset of PyTorch Geometric, which mainstream GNN demos use
/// for the 4-class classification task (Zachary's original data has only the
/// 2 faction labels).
pub const KARATE_LABELS: [usize; 34] = [
    1, 1, 1, 1, 3, 3, 3, 1, 0, 1, 3, 1, 1, 1, 0, 0, 3, 1, 0, 1, 0, 1, 0, 0,
    2, 2, 0, 0, 2, 0, 0, 2, 0, 0,
];

/// Seed for the fixed 60/20/20 split (20 train / 6 val / 8 test nodes).
pub const KARATE_SPLIT_SEED: u64 = 42;

/// Zachary's karate club with identity features (34x34), the 4-community
/// labels and the fixed seeded split.
pub fn builtin_karate<F: Scalar>() -> Result<(Graph<F>, Task)> {
    let n = 34;
    let mut features = Array2::zeros((n, n));
    for i in 0..n {
        features[(i, i)] = F::one();
    }
    let raw: Vec<(usize, usize, F)> = KARATE_EDGES
        .iter()
        .map(|&(u, v)| (u, v, F::one()))
        .collect();
    let graph = Graph::new(n, &raw, features, false)?;
    let (train, val, test) = gen_split(n, KARATE_SPLIT_SEED)?;
    let task = Task::new(KARATE_LABELS.to_vec(), 4, train, val, test)?;
    Ok((graph, task))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn karate_shape() {
        let (g, task) = builtin_karate::<f64>().unwrap();
        assert_eq!(g.num_nodes(), 34);
        assert_eq!(g.num_edges(), 78);
        assert_eq!(g.feature_dim(), 34);
        let mut classes = task.labels.clone();
        classes.sort_unstable();
        classes.dedup();
        assert_eq!(classes, vec![0, 1, 2, 3]);
    }

    #[test]
    fn karate_is_connected() {
        let (g, _) = builtin_karate::<f64>().unwrap();
        // BFS oracle over the canonical edge list
        let adj = g.adjacency_lists(&g.full_subset());
        let mut seen = vec![false; 34];
        let mut queue = std::collections::VecDeque::from([0usize]);
        seen[0] = true;
        while let Some(u) = queue.pop_front() {
            for &v in &adj[u] {
                if !seen[v] {
                    seen[v] = true;
                    queue.push_back(v);
                }
            }
        }
        assert!(seen.iter().all(|&s| s));
        assert_eq!(g.num_components(), 1);
    }
}
