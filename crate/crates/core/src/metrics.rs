//! Information-theoretic measurement of pruning trajectories.
//!
//! All entropies and likelihoods use the natural logarithm. The per-step
//! information estimate is the hold-out (test mask) form of the
//! predictor-based mutual-information lower bound: empirical label entropy
//! minus mean test NLL. Information scores normalize that estimate to 1 at
//! the full graph and 0 at the edgeless graph; AUC-IC and IBP summarize the
//! whole trajectory.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::gcn::{self, TrainConfig};
use crate::graph::{MaskKind, Task};
use crate::prune::Trajectory;
use crate::scalar::Scalar;
use crate::{Error, Result};

pub const DEFAULT_DELTA: f64 = 0.8;
const INFO_DENOM_EPS: f64 = 1e-9;

/// `-sum p(y) ln p(y)` over the empirical label frequencies.
pub fn empirical_entropy(labels: &[usize]) -> Result<f64> {
    if labels.is_empty() {
        return Err(Error::EmptyMask("entropy of empty multiset".into()));
    }
    let mut counts = std::collections::BTreeMap::new();
    for &y in labels {
        *counts.entry(y).or_insert(0usize) += 1;
    }
    let n = labels.len() as f64;
    Ok(counts
        .values()
        .map(|&c| {
            let p = c as f64 / n;
            -p * p.ln()
        })
        .sum())
}

/// Predictor-based MI lower bound: entropy minus mean NLL. May be negative
/// when the predictor is worse than chance.
pub fn mi_lower_bound(entropy: f64, mean_nll: f64) -> f64 {
    entropy - mean_nll
}

/// Fraction of original edges remaining.
pub fn complexity_score(edges_k: usize, edges_0: usize) -> Result<f64> {
    if edges_0 == 0 {
        return Err(Error::Validation("complexity with zero base edges".into()));
    }
    if edges_k > edges_0 {
        return Err(Error::Validation(format!(
            "edges_k {edges_k} > edges_0 {edges_0}"
        )));
    }
    Ok(edges_k as f64 / edges_0 as f64)
}

/// Normalized information retention `(mi_k - mi_K) / (mi_0 - mi_K)`.
/// 1 at step 0 and 0 at step K by construction; intermediate values may
/// leave `[0, 1]` since the underlying estimate is a lower bound.
pub fn info_score(mi_k: f64, mi_0: f64, mi_last: f64) -> Result<f64> {
    let gap = mi_0 - mi_last;
    if gap.abs() <= INFO_DENOM_EPS {
        return Err(Error::DegenerateTrajectory {
            gap: gap.abs(),
            eps: INFO_DENOM_EPS,
        });
    }
    Ok((mi_k - mi_last) / gap)
}

fn check_curve(curve: &[(f64, f64)]) -> Result<()> {
    if curve.first().map(|&(c, _)| c) != Some(1.0) || curve.last().map(|&(c, _)| c) != Some(0.0) {
        return Err(Error::Validation(
            "curve must run from complexity 1 down to 0".into(),
        ));
    }
    for w in curve.windows(2) {
        if w[1].0 >= w[0].0 {
            return Err(Error::Validation(
                "curve complexities must be strictly decreasing".into(),
            ));
        }
    }
    Ok(())
}

/// Trapezoidal area of the information score over complexity on [0, 1].
/// Negative scores integrate as-is; the result may exceed 1.
pub fn auc_ic(curve: &[(f64, f64)]) -> Result<f64> {
    check_curve(curve)?;
    let mut area = 0.0;
    for w in curve.windows(2) {
        let (c0, i0) = w[0];
        let (c1, i1) = w[1];
        area += (c0 - c1) * (i0 + i1) / 2.0;
    }
    Ok(area)
}

/// Smallest recorded complexity whose information score meets `delta`,
/// without interpolation. The full-graph step always qualifies, so the
/// result is 1.0 when no later step does.
pub fn ibp(curve: &[(f64, f64)], delta: f64) -> Result<f64> {
    check_curve(curve)?;
    if !(delta > 0.0 && delta <= 1.0) {
        return Err(Error::Validation(format!("delta {delta} not in (0,1]")));
    }
    let qualifying = curve
        .iter()
        .filter(|&&(_, i)| i >= delta)
        .map(|&(c, _)| c)
        .fold(f64::INFINITY, f64::min);
    assert!(
        qualifying.is_finite(),
        "full-graph step has info score 1 >= delta"
    );
    Ok(qualifying)
}

/// Per-step evaluation record.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StepMetrics {
    pub step: usize,
    pub edges_remaining: usize,
    pub complexity: f64,
    pub mi_estimate_mean: f64,
    pub mi_estimate_std: f64,
    pub info_score: f64,
    pub test_accuracy_mean: f64,
}

/// Whole-trajectory summary.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SummaryMetrics {
    pub auc_ic: f64,
    pub ibp: f64,
    pub delta: f64,
    pub steps: Vec<StepMetrics>,
}

impl SummaryMetrics {
    pub fn curve(&self) -> Vec<(f64, f64)> {
        self.steps
            .iter()
            .map(|s| (s.complexity, s.info_score))
            .collect()
    }

    /// `metrics.csv` body with header.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("step,edges,complexity,mi_mean,mi_std,info_score,acc_mean\n");
        for s in &self.steps {
            out.push_str(&format!(
                "{},{},{},{},{},{},{}\n",
                s.step,
                s.edges_remaining,
                s.complexity,
                s.mi_estimate_mean,
                s.mi_estimate_std,
                s.info_score,
                s.test_accuracy_mean
            ));
        }
        out
    }
}

/// Train `repetitions` fresh predictors per step (seeds `seed..seed+reps-1`),
/// estimate the hold-out MI lower bound per step, normalize the mean curve
/// into information scores, and summarize with AUC-IC and IBP.
///
/// Per-step evaluations run in parallel; aggregation is ordered by step and
/// repetition, so the result is independent of thread count.
pub fn evaluate_trajectory<F: Scalar>(
    traj: &Trajectory<F>,
    task: &Task,
    cfg: &TrainConfig,
    repetitions: usize,
    delta: f64,
) -> Result<SummaryMetrics> {
    if repetitions == 0 {
        return Err(Error::Validation("repetitions must be >= 1".into()));
    }
    let base = traj.base();
    let edges_0 = base.num_edges();
    let subsets = traj.subsets();
    if subsets.first().map(|s| s.count()) != Some(edges_0) {
        return Err(Error::Validation("trajectory step 0 is not the full graph".into()));
    }
    if subsets.last().map(|s| s.count()) != Some(0) {
        return Err(Error::Validation("trajectory final step is not edgeless".into()));
    }

    let test_entropy = empirical_entropy(&task.masked_labels(MaskKind::Test))?;

    struct StepEval {
        nlls: Vec<f64>,
        accs: Vec<f64>,
    }

    let evals: Result<Vec<StepEval>> = subsets
        .par_iter()
        .map(|active| {
            let mut nlls = Vec::with_capacity(repetitions);
            let mut accs = Vec::with_capacity(repetitions);
            for r in 0..repetitions {
                let rep_cfg = TrainConfig {
                    seed: cfg.seed + r as u64,
                    ..cfg.clone()
                };
                let model = gcn::train(base, active, task, &rep_cfg)?;
                let nll = gcn::nll(&model, base, active, task, MaskKind::Test)?;
                let acc = gcn::accuracy(&model, base, active, task, MaskKind::Test)?;
                nlls.push(nll.to_f64().unwrap());
                accs.push(acc.to_f64().unwrap());
            }
            Ok(StepEval { nlls, accs })
        })
        .collect();
    let evals = evals?;

    let mi_means: Vec<f64> = evals
        .iter()
        .map(|e| {
            let mean_nll = e.nlls.iter().sum::<f64>() / e.nlls.len() as f64;
            mi_lower_bound(test_entropy, mean_nll)
        })
        .collect();
    let mi_stds: Vec<f64> = evals
        .iter()
        .zip(&mi_means)
        .map(|(e, &mean)| {
            if e.nlls.len() < 2 {
                return 0.0;
            }
            let var = e
                .nlls
                .iter()
                .map(|&nll| {
                    let mi = mi_lower_bound(test_entropy, nll);
                    (mi - mean) * (mi - mean)
                })
                .sum::<f64>()
                / (e.nlls.len() - 1) as f64;
            var.sqrt()
        })
        .collect();

    let mi_0 = mi_means[0];
    let mi_last = *mi_means.last().unwrap();
    let mut steps = Vec::with_capacity(subsets.len());
    for (k, (subset, eval)) in subsets.iter().zip(&evals).enumerate() {
        let edges_k = subset.count();
        steps.push(StepMetrics {
            step: k,
            edges_remaining: edges_k,
            complexity: complexity_score(edges_k, edges_0)?,
            mi_estimate_mean: mi_means[k],
            mi_estimate_std: mi_stds[k],
            info_score: info_score(mi_means[k], mi_0, mi_last)?,
            test_accuracy_mean: eval.accs.iter().sum::<f64>() / eval.accs.len() as f64,
        });
    }

    // no-op steps (possible when E0 < K) repeat a complexity; keep the first
    // occurrence so the curve stays strictly decreasing
    let mut curve: Vec<(f64, f64)> = Vec::with_capacity(steps.len());
    for s in &steps {
        if curve.last().map(|&(c, _)| s.complexity < c).unwrap_or(true) {
            curve.push((s.complexity, s.info_score));
        }
    }
    Ok(SummaryMetrics {
        auc_ic: auc_ic(&curve)?,
        ibp: ibp(&curve, delta)?,
        delta,
        steps,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn entropy_balanced_binary() {
        let h = empirical_entropy(&[0, 0, 1, 1]).unwrap();
        assert!((h - (2.0f64).ln()).abs() < 1e-12);
    }

    #[test]
    fn entropy_single_class() {
        assert_eq!(empirical_entropy(&[3, 3, 3]).unwrap(), 0.0);
    }

    #[test]
    fn entropy_skewed() {
        // -(0.75 ln 0.75 + 0.25 ln 0.25)
        let h = empirical_entropy(&[0, 0, 0, 1]).unwrap();
        let expect = -(0.75f64 * 0.75f64.ln() + 0.25 * 0.25f64.ln());
        assert!((h - expect).abs() < 1e-12);
        assert!((h - 0.5623).abs() < 1e-4);
    }

    #[test]
    fn entropy_empty_is_error() {
        assert!(empirical_entropy(&[]).is_err());
    }

    #[test]
    fn mi_bound_arithmetic() {
        let ln2 = (2.0f64).ln();
        assert_eq!(mi_lower_bound(ln2, 0.0), ln2);
        assert_eq!(mi_lower_bound(ln2, ln2), 0.0);
        assert!((mi_lower_bound(0.6931, 1.0) + 0.3069).abs() < 1e-12);
    }

    #[test]
    fn complexity_arithmetic() {
        assert_eq!(complexity_score(78, 78).unwrap(), 1.0);
        assert_eq!(complexity_score(0, 78).unwrap(), 0.0);
        assert!((complexity_score(36, 78).unwrap() - 0.4615).abs() < 1e-4);
        assert!(complexity_score(1, 0).is_err());
    }

    #[test]
    fn info_score_endpoints_and_midpoint() {
        assert_eq!(info_score(1.0, 1.0, 0.2).unwrap(), 1.0);
        assert_eq!(info_score(0.2, 1.0, 0.2).unwrap(), 0.0);
        assert!((info_score(0.6, 1.0, 0.2).unwrap() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn info_score_degenerate_denominator() {
        assert!(matches!(
            info_score(0.5, 0.5, 0.5),
            Err(Error::DegenerateTrajectory { .. })
        ));
    }

    #[test]
    fn auc_constant_one() {
        let curve = [(1.0, 1.0), (0.5, 1.0), (0.0, 1.0)];
        assert!((auc_ic(&curve).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn auc_linear_is_half() {
        let curve: Vec<(f64, f64)> = (0..=10)
            .rev()
            .map(|i| (i as f64 / 10.0, i as f64 / 10.0))
            .collect();
        assert!((auc_ic(&curve).unwrap() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn auc_piecewise_can_exceed_segments() {
        // 0.5*(1+1.5)/2 + 0.5*(1.5+0)/2 = 1.0
        let curve = [(1.0, 1.0), (0.5, 1.5), (0.0, 0.0)];
        assert!((auc_ic(&curve).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn auc_requires_endpoints() {
        assert!(auc_ic(&[(0.9, 1.0), (0.0, 0.0)]).is_err());
        assert!(auc_ic(&[(1.0, 1.0), (0.1, 0.0)]).is_err());
    }

    #[test]
    fn ibp_linear_curve() {
        let curve: Vec<(f64, f64)> = (0..=10)
            .rev()
            .map(|i| (i as f64 / 10.0, i as f64 / 10.0))
            .collect();
        assert!((ibp(&curve, 0.8).unwrap() - 0.8).abs() < 1e-12);
    }

    #[test]
    fn ibp_constant_one_reaches_zero() {
        let curve = [(1.0, 1.0), (0.5, 1.0), (0.0, 1.0)];
        assert_eq!(ibp(&curve, 0.8).unwrap(), 0.0);
    }

    #[test]
    fn ibp_boundary_convention() {
        // only the full graph qualifies
        let curve = [(1.0, 1.0), (0.5, 0.2), (0.0, 0.0)];
        assert_eq!(ibp(&curve, 0.8).unwrap(), 1.0);
    }

    /// Independent Riemann-sum oracle on a dense refinement of the
    /// piecewise-linear curve.
    pub(crate) fn riemann_oracle(curve: &[(f64, f64)], points: usize) -> f64 {
        let interp = |c: f64| -> f64 {
            for w in curve.windows(2) {
                let (c0, i0) = w[0];
                let (c1, i1) = w[1];
                if c <= c0 && c >= c1 {
                    if c0 == c1 {
                        return i0;
                    }
                    let t = (c0 - c) / (c0 - c1);
                    return i0 + t * (i1 - i0);
                }
            }
            0.0
        };
        let dx = 1.0 / points as f64;
        (0..points)
            .map(|k| {
                let mid = (k as f64 + 0.5) * dx;
                interp(mid) * dx
            })
            .sum()
    }

    #[test]
    fn auc_matches_riemann_oracle() {
        let curve = [
            (1.0, 1.0),
            (0.8, 1.3),
            (0.6, 0.9),
            (0.4, 0.7),
            (0.2, -0.1),
            (0.0, 0.0),
        ];
        let trapezoid = auc_ic(&curve).unwrap();
        let riemann = riemann_oracle(&curve, 10_000);
        assert!(
            (trapezoid - riemann).abs() < 1e-9,
            "trapezoid {trapezoid} vs riemann {riemann}"
        );
    }
}
