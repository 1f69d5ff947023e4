//! The K-step pruning loop: train, score edges, remove the least important,
//! record the trajectory. Two scoring modes are available — exact
//! leave-one-out re-evaluation of the validation loss under fixed trained
//! parameters, and its first-order gradient approximation — plus a harness
//! that drives the heuristic baseline scorers through the same budgeted
//! removal schedule.

use std::fs;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::baselines::{self, BaselineMethod, BaselineParams};
use crate::gcn::{self, PredictorModel, TrainConfig};
use crate::graph::{save_edge_list, EdgeSubset, Graph, MaskKind, Task};
use crate::scalar::Scalar;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScoringMode {
    Exact,
    Gradient,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PruneConfig {
    pub steps: usize,
    pub scoring_mode: ScoringMode,
    pub train_cfg: TrainConfig,
    pub seed: u64,
}

/// One recorded pruning step: the surviving subset, the edges removed to
/// reach it, and the scores every active edge had at removal time.
#[derive(Debug, Clone)]
pub struct TrajectoryStep {
    pub subset: EdgeSubset,
    pub removed: Vec<usize>,
    /// `(edge id, score)` for each edge active before this step.
    pub scores: Vec<(usize, f64)>,
}

/// Ordered record of a full pruning run: nested subsets from the full edge
/// set down to the edgeless graph, each step computed from its predecessor
/// only.
#[derive(Debug, Clone)]
pub struct Trajectory<F: Scalar = f64> {
    base: Graph<F>,
    steps: Vec<TrajectoryStep>,
    method: String,
    seed: u64,
}

impl<F: Scalar> Trajectory<F> {
    pub fn base(&self) -> &Graph<F> {
        &self.base
    }

    pub fn steps(&self) -> &[TrajectoryStep] {
        &self.steps
    }

    pub fn subsets(&self) -> Vec<&EdgeSubset> {
        self.steps.iter().map(|s| &s.subset).collect()
    }

    pub fn method(&self) -> &str {
        &self.method
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn num_steps(&self) -> usize {
        self.steps.len() - 1
    }
}

/// Per-step removal budgets: `K` counts of `floor(E0/K)` or `ceil(E0/K)`
/// summing exactly to `E0`, remainder spread over the earliest steps.
pub fn step_budgets(edges_0: usize, steps: usize) -> Vec<usize> {
    assert!(steps >= 1, "need at least one pruning step");
    let base = edges_0 / steps;
    let remainder = edges_0 % steps;
    (0..steps)
        .map(|k| if k < remainder { base + 1 } else { base })
        .collect()
}

/// Exact leave-one-out edge score: `S(e) = L_val(active \ {e}) - L_val(active)`
/// under the same trained parameters, one masked forward pass per edge.
/// Returns `(edge id, score)` in ascending edge-id order.
pub fn score_exact<F: Scalar>(
    model: &PredictorModel<F>,
    g: &Graph<F>,
    active: &EdgeSubset,
    task: &Task,
) -> Result<Vec<(usize, f64)>> {
    let base_loss = gcn::nll(model, g, active, task, MaskKind::Val)?;
    let ids: Vec<usize> = active.iter().collect();
    ids.par_iter()
        .map(|&id| {
            let mut masked = active.clone();
            masked.remove(id);
            let loss = gcn::nll(model, g, &masked, task, MaskKind::Val)?;
            Ok((id, (loss - base_loss).to_f64().unwrap()))
        })
        .collect()
}

/// First-order approximation of the exact score: removing edge `e` changes
/// its weight by `-w_e`, so `S(e) = -w_e * dL_val/dw_e`.
pub fn score_gradient<F: Scalar>(
    model: &PredictorModel<F>,
    g: &Graph<F>,
    active: &EdgeSubset,
    task: &Task,
) -> Result<Vec<(usize, f64)>> {
    let grads = gcn::adjacency_gradient(model, g, active, task)?;
    let weights: Vec<(usize, F)> = g
        .edges()
        .iter()
        .filter(|e| active.contains(e.id))
        .map(|e| (e.id, e.w))
        .collect();
    Ok(weights
        .iter()
        .zip(&grads)
        .map(|(&(id, w), &grad)| (id, (-(w * grad)).to_f64().unwrap()))
        .collect())
}

/// Select the `budget` lowest-scoring edge ids; ties break by ascending id
/// (the sort key `(score, id)` is a strict total order).
fn select_removals(scores: &[(usize, f64)], budget: usize) -> Vec<usize> {
    let mut ranked: Vec<(usize, f64)> = scores.to_vec();
    ranked.sort_by(|a, b| {
        a.1.partial_cmp(&b.1)
            .expect("edge scores are finite")
            .then(a.0.cmp(&b.0))
    });
    ranked.iter().take(budget).map(|&(id, _)| id).collect()
}

/// Information-guided pruning: for each step, train a fresh predictor on the
/// current subset, score the active edges, remove the lowest-scoring budgeted
/// batch, and record the step. The final step is always edgeless.
pub fn prune<F: Scalar>(g: &Graph<F>, task: &Task, cfg: &PruneConfig) -> Result<Trajectory<F>> {
    if g.num_edges() == 0 {
        return Err(Error::Validation("cannot prune an edgeless graph".into()));
    }
    let budgets = step_budgets(g.num_edges(), cfg.steps);
    let mut active = g.full_subset();
    let mut steps = vec![TrajectoryStep {
        subset: active.clone(),
        removed: Vec::new(),
        scores: Vec::new(),
    }];

    for (k, &budget) in budgets.iter().enumerate() {
        if active.count() == 0 || budget == 0 {
            // nothing to remove; record the step as a no-op
            steps.push(TrajectoryStep {
                subset: active.clone(),
                removed: Vec::new(),
                scores: Vec::new(),
            });
            continue;
        }
        // fresh random initialization each step
        let step_cfg = TrainConfig {
            seed: cfg.train_cfg.seed.wrapping_add(k as u64 + 1),
            ..cfg.train_cfg.clone()
        };
        let model = gcn::train(g, &active, task, &step_cfg)
            .map_err(|e| match e {
                Error::Divergence { epoch } => Error::Validation(format!(
                    "training diverged at step {} epoch {epoch}",
                    k + 1
                )),
                other => other,
            })?;
        let scores = match cfg.scoring_mode {
            ScoringMode::Exact => score_exact(&model, g, &active, task)?,
            ScoringMode::Gradient => score_gradient(&model, g, &active, task)?,
        };
        let removed = select_removals(&scores, budget);
        for &id in &removed {
            active.remove(id);
        }
        steps.push(TrajectoryStep {
            subset: active.clone(),
            removed,
            scores,
        });
    }

    let method = match cfg.scoring_mode {
        ScoringMode::Exact => "igprune-exact",
        ScoringMode::Gradient => "igprune-gradient",
    };
    Ok(Trajectory {
        base: g.clone(),
        steps,
        method: method.into(),
        seed: cfg.seed,
    })
}

/// Run one of the heuristic baseline scorers through the same budgeted
/// K-step removal loop. Scores are computed once on the full graph and
/// reused across steps, except when `params.rescore_per_step` is set (only
/// the forest-fire scorer is stochastic enough to benefit).
pub fn run_baseline<F: Scalar>(
    g: &Graph<F>,
    method: BaselineMethod,
    steps: usize,
    seed: u64,
    params: &BaselineParams,
) -> Result<Trajectory<F>> {
    if g.num_edges() == 0 {
        return Err(Error::Validation("cannot prune an edgeless graph".into()));
    }
    let budgets = step_budgets(g.num_edges(), steps);
    let mut active = g.full_subset();
    let static_scores = baselines::score(method, g, &active, seed, params)?;
    let mut trajectory = vec![TrajectoryStep {
        subset: active.clone(),
        removed: Vec::new(),
        scores: Vec::new(),
    }];

    for (k, &budget) in budgets.iter().enumerate() {
        if active.count() == 0 || budget == 0 {
            trajectory.push(TrajectoryStep {
                subset: active.clone(),
                removed: Vec::new(),
                scores: Vec::new(),
            });
            continue;
        }
        let scores: Vec<(usize, f64)> =
            if params.rescore_per_step && method == BaselineMethod::ForestFire && k > 0 {
                baselines::score(method, g, &active, seed.wrapping_add(k as u64), params)?
            } else {
                static_scores
                    .iter()
                    .filter(|&&(id, _)| active.contains(id))
                    .copied()
                    .collect()
            };
        let removed = select_removals(&scores, budget);
        for &id in &removed {
            active.remove(id);
        }
        trajectory.push(TrajectoryStep {
            subset: active.clone(),
            removed,
            scores,
        });
    }

    Ok(Trajectory {
        base: g.clone(),
        steps: trajectory,
        method: method.id().into(),
        seed,
    })
}

// ---------------------------------------------------------------------------
// Trajectory directory layout:
//   step_000.edges ... step_KKK.edges   TSV edge lists
//   removed_001.csv ... removed_KKK.csv edge id, u, v, score
//   trajectory.json                     manifest
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TrajectoryManifest {
    pub method: String,
    pub steps: usize,
    pub seed: u64,
    pub edge_counts: Vec<usize>,
    pub config: serde_json::Value,
}

pub fn write_trajectory<F: Scalar>(
    traj: &Trajectory<F>,
    dir: &Path,
    config_echo: serde_json::Value,
) -> Result<()> {
    fs::create_dir_all(dir)?;
    for (k, step) in traj.steps.iter().enumerate() {
        save_edge_list(&traj.base, &step.subset, &dir.join(format!("step_{k:03}.edges")))?;
        if k > 0 {
            let mut csv = String::from("edge_id,u,v,score\n");
            let score_of: std::collections::HashMap<usize, f64> =
                step.scores.iter().copied().collect();
            for &id in &step.removed {
                let e = traj.base.edge(id).expect("removed id exists in base");
                csv.push_str(&format!("{},{},{},{}\n", id, e.u, e.v, score_of[&id]));
            }
            fs::write(dir.join(format!("removed_{k:03}.csv")), csv)?;
        }
    }
    let manifest = TrajectoryManifest {
        method: traj.method.clone(),
        steps: traj.num_steps(),
        seed: traj.seed,
        edge_counts: traj.steps.iter().map(|s| s.subset.count()).collect(),
        config: config_echo,
    };
    fs::write(
        dir.join("trajectory.json"),
        serde_json::to_string_pretty(&manifest)?,
    )?;
    Ok(())
}

pub fn read_manifest(dir: &Path) -> Result<TrajectoryManifest> {
    let path = dir.join("trajectory.json");
    let manifest: TrajectoryManifest = serde_json::from_str(
        &fs::read_to_string(&path)
            .map_err(|e| Error::Manifest(format!("{}: {e}", path.display())))?,
    )?;
    Ok(manifest)
}

/// Parse a `removed_k.csv` file into the ordered removal list and the
/// scores recorded for the removed edges.
fn read_removed_csv(path: &Path) -> Result<(Vec<usize>, Vec<(usize, f64)>)> {
    let text = fs::read_to_string(path)
        .map_err(|e| Error::Manifest(format!("{}: {e}", path.display())))?;
    let mut removed = Vec::new();
    let mut scores = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        if lineno == 0 {
            if line.trim() != "edge_id,u,v,score" {
                return Err(Error::Parse {
                    path: path.display().to_string(),
                    line: 1,
                    msg: format!("unexpected header {line:?}"),
                });
            }
            continue;
        }
        if line.trim().is_empty() {
            continue;
        }
        let parse_err = |msg: String| Error::Parse {
            path: path.display().to_string(),
            line: lineno + 1,
            msg,
        };
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 4 {
            return Err(parse_err(format!("expected 4 fields, got {}", fields.len())));
        }
        let id: usize = fields[0]
            .trim()
            .parse()
            .map_err(|e| parse_err(format!("bad edge id: {e}")))?;
        let score: f64 = fields[3]
            .trim()
            .parse()
            .map_err(|e| parse_err(format!("bad score: {e}")))?;
        removed.push(id);
        scores.push((id, score));
    }
    Ok((removed, scores))
}

/// Rebuild a trajectory from a directory given the base graph it was
/// produced from. Step files are matched against the base edge set.
/// The per-step `scores` are restored only for the removed edges (the
/// full active-set scores are not persisted).
pub fn read_trajectory<F: Scalar>(dir: &Path, base: &Graph<F>) -> Result<Trajectory<F>> {
    let manifest = read_manifest(dir)?;
    let by_pair: std::collections::HashMap<(usize, usize), usize> = base
        .edges()
        .iter()
        .map(|e| ((e.u, e.v), e.id))
        .collect();
    let mut steps = Vec::with_capacity(manifest.steps + 1);
    let mut prev: Option<EdgeSubset> = None;
    for k in 0..=manifest.steps {
        let path = dir.join(format!("step_{k:03}.edges"));
        let raw = crate::graph::parse_edge_list::<F>(&path)?;
        let mut subset = EdgeSubset::empty(base.edge_id_space());
        for (u, v, _) in raw {
            let key = (u.min(v), u.max(v));
            let id = by_pair.get(&key).ok_or_else(|| {
                Error::Manifest(format!("step {k} edge ({u},{v}) not in base graph"))
            })?;
            subset.insert(*id);
        }
        let (removed, scores) = match &prev {
            None => (Vec::new(), Vec::new()),
            Some(p) => {
                if !subset.is_subset_of(p) {
                    return Err(Error::Manifest(format!(
                        "step {k} is not nested in step {}",
                        k - 1
                    )));
                }
                let (removed, scores) = read_removed_csv(&dir.join(format!("removed_{k:03}.csv")))?;
                let mut from_csv: Vec<usize> = removed.clone();
                from_csv.sort_unstable();
                let from_diff: Vec<usize> = p.minus(&subset).iter().collect();
                if from_csv != from_diff {
                    return Err(Error::Manifest(format!(
                        "step {k} removal list disagrees with the step edge files"
                    )));
                }
                (removed, scores)
            }
        };
        prev = Some(subset.clone());
        steps.push(TrajectoryStep {
            subset,
            removed,
            scores,
        });
    }
    Ok(Trajectory {
        base: base.clone(),
        steps,
        method: manifest.method,
        seed: manifest.seed,
    })
}
