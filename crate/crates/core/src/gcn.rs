//! Two-layer graph convolutional classifier trained from scratch.
//!
//! The model is `logits = A2 * relu(A2 * X * W1 + b1) * W2 + b2` followed by
//! a row-wise log-softmax, where `A2 = D^{-1/2} (A + I) D^{-1/2}` is the
//! self-loop-augmented symmetric normalization of the active edge set.
//! Training is full-batch Adam with decoupled L2 weight decay on `W1`/`W2`.
//! Backpropagation is written out by hand so that the per-edge gradient of
//! the validation loss with respect to the pre-normalization edge weights is
//! available (the chain rule passes through both off-diagonal entries and
//! both degree terms of the normalization).

use std::fs;
use std::path::Path;

use ndarray::{azip, Array1, Array2, Axis};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::graph::{EdgeSubset, Graph, MaskKind, Task};
use crate::scalar::Scalar;
use crate::{Error, Result};

/// Sparse symmetric operator `D^{-1/2} (A + I) D^{-1/2}`.
#[derive(Debug, Clone)]
pub struct NormalizedAdjacency<F: Scalar = f64> {
    n: usize,
    /// All nonzero entries `(i, j, value)`; both orientations of each edge
    /// plus the diagonal self-loop entries.
    entries: Vec<(usize, usize, F)>,
    /// Augmented degrees `d_i = 1 + sum of active incident weights`.
    degrees: Vec<F>,
}

impl<F: Scalar> NormalizedAdjacency<F> {
    /// Build from explicit undirected weighted edges (u < v, no self-loops).
    pub fn from_edges(n: usize, edges: &[(usize, usize, F)]) -> Self {
        let mut degrees = vec![F::one(); n];
        for &(u, v, w) in edges {
            degrees[u] += w;
            degrees[v] += w;
        }
        let mut entries = Vec::with_capacity(2 * edges.len() + n);
        for i in 0..n {
            entries.push((i, i, F::one() / degrees[i]));
        }
        for &(u, v, w) in edges {
            let val = w / (degrees[u] * degrees[v]).sqrt();
            entries.push((u, v, val));
            entries.push((v, u, val));
        }
        Self {
            n,
            entries,
            degrees,
        }
    }

    pub fn from_graph(g: &Graph<F>, active: &EdgeSubset) -> Self {
        let edges: Vec<_> = g
            .edges()
            .iter()
            .filter(|e| active.contains(e.id))
            .map(|e| (e.u, e.v, e.w))
            .collect();
        Self::from_edges(g.num_nodes(), &edges)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn degrees(&self) -> &[F] {
        &self.degrees
    }

    pub fn entries(&self) -> &[(usize, usize, F)] {
        &self.entries
    }

    /// Sparse-dense product `A2 * x`.
    pub fn matmul(&self, x: &Array2<F>) -> Array2<F> {
        let mut out = Array2::zeros((self.n, x.ncols()));
        for &(i, j, val) in &self.entries {
            let src = x.row(j);
            let mut dst = out.row_mut(i);
            dst.scaled_add(val, &src);
        }
        out
    }

    /// Dense materialization; test and small-scale use.
    pub fn to_dense(&self) -> Array2<F> {
        let mut out = Array2::zeros((self.n, self.n));
        for &(i, j, val) in &self.entries {
            out[(i, j)] = val;
        }
        out
    }
}

/// Parameters of the two-layer GCN.
#[derive(Debug, Clone, PartialEq)]
pub struct PredictorModel<F: Scalar = f64> {
    pub w1: Array2<F>,
    pub b1: Array1<F>,
    pub w2: Array2<F>,
    pub b2: Array1<F>,
}

impl<F: Scalar> PredictorModel<F> {
    /// Glorot-uniform weights, zero biases, seeded PRNG.
    pub fn init(in_dim: usize, hidden: usize, num_classes: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut glorot = |rows: usize, cols: usize| -> Array2<F> {
            let limit = (6.0 / (rows + cols) as f64).sqrt();
            Array2::from_shape_fn((rows, cols), |_| {
                F::from_f64_lossy(rng.random_range(-limit..limit))
            })
        };
        Self {
            w1: glorot(in_dim, hidden),
            b1: Array1::zeros(hidden),
            w2: glorot(hidden, num_classes),
            b2: Array1::zeros(num_classes),
        }
    }

    pub fn hidden_dim(&self) -> usize {
        self.w1.ncols()
    }

    pub fn num_classes(&self) -> usize {
        self.w2.ncols()
    }
}

/// Training hyperparameters. Scalar values are given in `f64` and converted
/// to the working scalar type.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct TrainConfig {
    pub hidden_dim: usize,
    pub learning_rate: f64,
    pub weight_decay: f64,
    pub epochs: usize,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            hidden_dim: 128,
            learning_rate: 1e-2,
            weight_decay: 5e-4,
            epochs: 200,
            seed: 0,
        }
    }
}

/// Intermediate activations kept for backpropagation.
struct ForwardPass<F: Scalar> {
    /// `A2 * X`
    q: Array2<F>,
    z1: Array2<F>,
    h: Array2<F>,
    /// `A2 * h`
    p: Array2<F>,
    logp: Array2<F>,
}

fn log_softmax_rows<F: Scalar>(z: &Array2<F>) -> Array2<F> {
    let mut out = z.clone();
    for mut row in out.rows_mut() {
        let max = row.iter().cloned().fold(F::neg_infinity(), F::max);
        let mut sum = F::zero();
        for x in row.iter() {
            sum += (*x - max).exp();
        }
        let lse = max + sum.ln();
        row.mapv_inplace(|x| x - lse);
    }
    out
}

fn forward_pass<F: Scalar>(
    m: &PredictorModel<F>,
    adj: &NormalizedAdjacency<F>,
    x: &Array2<F>,
) -> ForwardPass<F> {
    let q = adj.matmul(x);
    let mut z1 = q.dot(&m.w1);
    z1 += &m.b1;
    let h = z1.mapv(|v| v.max(F::zero()));
    let p = adj.matmul(&h);
    let mut z2 = p.dot(&m.w2);
    z2 += &m.b2;
    let logp = log_softmax_rows(&z2);
    ForwardPass { q, z1, h, p, logp }
}

/// Class log-probabilities, one row per node; `exp` of each row sums to 1.
pub fn forward<F: Scalar>(
    m: &PredictorModel<F>,
    g: &Graph<F>,
    active: &EdgeSubset,
) -> Result<Array2<F>> {
    if m.w1.nrows() != g.feature_dim() {
        return Err(Error::Shape(format!(
            "model input dim {} != feature dim {}",
            m.w1.nrows(),
            g.feature_dim()
        )));
    }
    let adj = NormalizedAdjacency::from_graph(g, active);
    Ok(forward_pass(m, &adj, g.features()).logp)
}

fn masked_nll<F: Scalar>(logp: &Array2<F>, labels: &[usize], mask: &[bool]) -> Result<F> {
    let mut sum = F::zero();
    let mut count = 0usize;
    for (i, &m) in mask.iter().enumerate() {
        if m {
            sum -= logp[(i, labels[i])];
            count += 1;
        }
    }
    if count == 0 {
        return Err(Error::EmptyMask("nll over empty mask".into()));
    }
    Ok(sum / F::from_count(count))
}

/// Mean negative log-likelihood over the chosen mask (natural log).
pub fn nll<F: Scalar>(
    m: &PredictorModel<F>,
    g: &Graph<F>,
    active: &EdgeSubset,
    task: &Task,
    mask: MaskKind,
) -> Result<F> {
    let logp = forward(m, g, active)?;
    masked_nll(&logp, &task.labels, task.mask(mask))
}

/// Fraction of correctly argmax-classified nodes in the mask (ties resolve
/// to the lowest class index).
pub fn accuracy<F: Scalar>(
    m: &PredictorModel<F>,
    g: &Graph<F>,
    active: &EdgeSubset,
    task: &Task,
    mask: MaskKind,
) -> Result<F> {
    let logp = forward(m, g, active)?;
    let mask = task.mask(mask);
    let mut correct = 0usize;
    let mut total = 0usize;
    for (i, &msk) in mask.iter().enumerate() {
        if !msk {
            continue;
        }
        let row = logp.row(i);
        let mut best = 0usize;
        for c in 1..row.len() {
            if row[c] > row[best] {
                best = c;
            }
        }
        if best == task.labels[i] {
            correct += 1;
        }
        total += 1;
    }
    if total == 0 {
        return Err(Error::EmptyMask("accuracy over empty mask".into()));
    }
    Ok(F::from_count(correct) / F::from_count(total))
}

/// `d loss / d z2` for a mean-NLL loss over `mask`: `(softmax - onehot) / m`
/// on masked rows, zero elsewhere.
fn nll_output_grad<F: Scalar>(
    logp: &Array2<F>,
    labels: &[usize],
    mask: &[bool],
) -> (Array2<F>, usize) {
    let count = mask.iter().filter(|&&b| b).count();
    let scale = F::one() / F::from_count(count.max(1));
    let mut dz2 = Array2::zeros(logp.raw_dim());
    for (i, &m) in mask.iter().enumerate() {
        if m {
            for c in 0..logp.ncols() {
                let p = logp[(i, c)].exp();
                let target = if c == labels[i] { F::one() } else { F::zero() };
                dz2[(i, c)] = (p - target) * scale;
            }
        }
    }
    (dz2, count)
}

struct ParamGrads<F: Scalar> {
    dw1: Array2<F>,
    db1: Array1<F>,
    dw2: Array2<F>,
    db2: Array1<F>,
}

fn backward_params<F: Scalar>(
    m: &PredictorModel<F>,
    adj: &NormalizedAdjacency<F>,
    fp: &ForwardPass<F>,
    dz2: &Array2<F>,
) -> ParamGrads<F> {
    let dw2 = fp.p.t().dot(dz2);
    let db2 = dz2.sum_axis(Axis(0));
    let dp = dz2.dot(&m.w2.t());
    // adjacency is symmetric, so A2^T dp = A2 dp
    let dh = adj.matmul(&dp);
    let relu_mask = fp.z1.mapv(|v| if v > F::zero() { F::one() } else { F::zero() });
    let dz1 = &dh * &relu_mask;
    let dw1 = fp.q.t().dot(&dz1);
    let db1 = dz1.sum_axis(Axis(0));
    ParamGrads { dw1, db1, dw2, db2 }
}

/// Full-batch Adam with L2 weight decay folded into every parameter
/// gradient (coupled decay, the convention of mainstream deep-learning
/// optimizers).
/// Deterministic for fixed config and inputs.
pub fn train<F: Scalar>(
    g: &Graph<F>,
    active: &EdgeSubset,
    task: &Task,
    cfg: &TrainConfig,
) -> Result<PredictorModel<F>> {
    let adj = NormalizedAdjacency::from_graph(g, active);
    let x = g.features();
    let mut model = PredictorModel::init(
        g.feature_dim(),
        cfg.hidden_dim,
        task.num_classes,
        cfg.seed,
    );

    let lr = F::from_f64_lossy(cfg.learning_rate);
    let wd = F::from_f64_lossy(cfg.weight_decay);
    let beta1 = F::from_f64_lossy(0.9);
    let beta2 = F::from_f64_lossy(0.999);
    let eps = F::from_f64_lossy(1e-8);

    let mut m_w1 = Array2::<F>::zeros(model.w1.raw_dim());
    let mut v_w1 = Array2::<F>::zeros(model.w1.raw_dim());
    let mut m_b1 = Array1::<F>::zeros(model.b1.raw_dim());
    let mut v_b1 = Array1::<F>::zeros(model.b1.raw_dim());
    let mut m_w2 = Array2::<F>::zeros(model.w2.raw_dim());
    let mut v_w2 = Array2::<F>::zeros(model.w2.raw_dim());
    let mut m_b2 = Array1::<F>::zeros(model.b2.raw_dim());
    let mut v_b2 = Array1::<F>::zeros(model.b2.raw_dim());

    for epoch in 1..=cfg.epochs {
        let fp = forward_pass(&model, &adj, x);
        let loss = masked_nll(&fp.logp, &task.labels, &task.train_mask)?;
        if !loss.is_finite() {
            return Err(Error::Divergence { epoch });
        }
        let (dz2, _) = nll_output_grad(&fp.logp, &task.labels, &task.train_mask);
        let mut grads = backward_params(&model, &adj, &fp, &dz2);

        // coupled L2 weight decay on every parameter (as in torch Adam)
        azip!((g in &mut grads.dw1, &w in &model.w1) *g = *g + wd * w);
        azip!((g in &mut grads.db1, &b in &model.b1) *g = *g + wd * b);
        azip!((g in &mut grads.dw2, &w in &model.w2) *g = *g + wd * w);
        azip!((g in &mut grads.db2, &b in &model.b2) *g = *g + wd * b);

        let t = F::from_count(epoch);
        let bc1 = F::one() - beta1.powf(t);
        let bc2 = F::one() - beta2.powf(t);

        macro_rules! adam_step {
            ($param:expr, $grad:expr, $m:expr, $v:expr) => {
                azip_update(&mut $m, &mut $v, &mut $param, &$grad, beta1, beta2, lr, eps, bc1, bc2);
            };
        }
        adam_step!(model.w1, grads.dw1, m_w1, v_w1);
        adam_step!(model.w2, grads.dw2, m_w2, v_w2);
        adam_step_1d(&mut m_b1, &mut v_b1, &mut model.b1, &grads.db1, beta1, beta2, lr, eps, bc1, bc2);
        adam_step_1d(&mut m_b2, &mut v_b2, &mut model.b2, &grads.db2, beta1, beta2, lr, eps, bc1, bc2);
    }
    Ok(model)
}

#[allow(clippy::too_many_arguments)]
fn azip_update<F: Scalar>(
    m: &mut Array2<F>,
    v: &mut Array2<F>,
    param: &mut Array2<F>,
    grad: &Array2<F>,
    beta1: F,
    beta2: F,
    lr: F,
    eps: F,
    bc1: F,
    bc2: F,
) {
    ndarray::azip!((m in m, v in v, p in param, &g in grad) {
        *m = beta1 * *m + (F::one() - beta1) * g;
        *v = beta2 * *v + (F::one() - beta2) * g * g;
        let mhat = *m / bc1;
        let vhat = *v / bc2;
        *p -= lr * mhat / (vhat.sqrt() + eps);
    });
}

#[allow(clippy::too_many_arguments)]
fn adam_step_1d<F: Scalar>(
    m: &mut Array1<F>,
    v: &mut Array1<F>,
    param: &mut Array1<F>,
    grad: &Array1<F>,
    beta1: F,
    beta2: F,
    lr: F,
    eps: F,
    bc1: F,
    bc2: F,
) {
    ndarray::azip!((m in m, v in v, p in param, &g in grad) {
        *m = beta1 * *m + (F::one() - beta1) * g;
        *v = beta2 * *v + (F::one() - beta2) * g * g;
        let mhat = *m / bc1;
        let vhat = *v / bc2;
        *p -= lr * mhat / (vhat.sqrt() + eps);
    });
}

/// Gradient of the validation-mask mean NLL with respect to each active
/// edge's pre-normalization symmetric weight, in ascending edge-id order.
///
/// Writing `G = d loss / d A2` (nonzero only on the sparsity pattern of
/// `A2`), the weight `w_e` of edge `(u, v)` enters through the two
/// off-diagonal entries and through the degrees `d_u`, `d_v`:
///
/// `d loss / d w_e = (G_uv + G_vu) / sqrt(d_u d_v)
///                   - r_u / (2 d_u) - r_v / (2 d_v)`
///
/// where `r_i = sum_j A2_ij (G_ij + G_ji)`.
pub fn adjacency_gradient<F: Scalar>(
    m: &PredictorModel<F>,
    g: &Graph<F>,
    active: &EdgeSubset,
    task: &Task,
) -> Result<Vec<F>> {
    let adj = NormalizedAdjacency::from_graph(g, active);
    let x = g.features();
    let fp = forward_pass(m, &adj, x);
    let (dz2, _) = nll_output_grad(&fp.logp, &task.labels, &task.val_mask);
    if !task.val_mask.iter().any(|&b| b) {
        return Err(Error::EmptyMask("val".into()));
    }

    // loss gradient wrt the inputs of the two propagation steps
    let dp = dz2.dot(&m.w2.t());
    let dh = adj.matmul(&dp);
    let relu_mask = fp.z1.mapv(|v| if v > F::zero() { F::one() } else { F::zero() });
    let dz1 = &dh * &relu_mask;
    let dq = dz1.dot(&m.w1.t());

    // G_ij = dP_i . H_j + dQ_i . X_j on the sparsity pattern
    let g_at = |i: usize, j: usize| -> F {
        let mut s = F::zero();
        for (a, b) in dp.row(i).iter().zip(fp.h.row(j).iter()) {
            s += *a * *b;
        }
        for (a, b) in dq.row(i).iter().zip(x.row(j).iter()) {
            s += *a * *b;
        }
        s
    };

    let degrees = adj.degrees();
    let mut r = vec![F::zero(); adj.n()];
    for &(i, j, val) in adj.entries() {
        let gij = g_at(i, j);
        r[i] += val * gij;
        r[j] += val * gij;
    }

    let two = F::from_f64_lossy(2.0);
    let mut grads = Vec::new();
    for e in g.edges() {
        if !active.contains(e.id) {
            continue;
        }
        let (u, v) = (e.u, e.v);
        let direct = (g_at(u, v) + g_at(v, u)) / (degrees[u] * degrees[v]).sqrt();
        let degree_term = r[u] / (two * degrees[u]) + r[v] / (two * degrees[v]);
        grads.push(direct - degree_term);
    }
    Ok(grads)
}

// ---------------------------------------------------------------------------
// Checkpoint format: versioned JSON with shapes and row-major arrays.
// ---------------------------------------------------------------------------

const CHECKPOINT_MAGIC: &str = "igprune-gcn-ckpt-v1";

#[derive(serde::Serialize, serde::Deserialize)]
struct Checkpoint {
    magic: String,
    in_dim: usize,
    hidden_dim: usize,
    num_classes: usize,
    w1: Vec<f64>,
    b1: Vec<f64>,
    w2: Vec<f64>,
    b2: Vec<f64>,
}

pub fn save_model<F: Scalar>(m: &PredictorModel<F>, path: &Path) -> Result<()> {
    let ckpt = Checkpoint {
        magic: CHECKPOINT_MAGIC.into(),
        in_dim: m.w1.nrows(),
        hidden_dim: m.hidden_dim(),
        num_classes: m.num_classes(),
        w1: m.w1.iter().map(|&x| x.to_f64().unwrap()).collect(),
        b1: m.b1.iter().map(|&x| x.to_f64().unwrap()).collect(),
        w2: m.w2.iter().map(|&x| x.to_f64().unwrap()).collect(),
        b2: m.b2.iter().map(|&x| x.to_f64().unwrap()).collect(),
    };
    fs::write(path, serde_json::to_string(&ckpt)?)?;
    Ok(())
}

pub fn load_model<F: Scalar>(path: &Path) -> Result<PredictorModel<F>> {
    let ckpt: Checkpoint = serde_json::from_str(&fs::read_to_string(path)?)?;
    if ckpt.magic != CHECKPOINT_MAGIC {
        return Err(Error::Manifest(format!(
            "bad checkpoint magic {:?}",
            ckpt.magic
        )));
    }
    let arr2 = |data: &[f64], rows: usize, cols: usize| -> Result<Array2<F>> {
        Array2::from_shape_vec(
            (rows, cols),
            data.iter().map(|&x| F::from_f64_lossy(x)).collect(),
        )
        .map_err(|e| Error::Shape(e.to_string()))
    };
    Ok(PredictorModel {
        w1: arr2(&ckpt.w1, ckpt.in_dim, ckpt.hidden_dim)?,
        b1: Array1::from_vec(ckpt.b1.iter().map(|&x| F::from_f64_lossy(x)).collect()),
        w2: arr2(&ckpt.w2, ckpt.hidden_dim, ckpt.num_classes)?,
        b2: Array1::from_vec(ckpt.b2.iter().map(|&x| F::from_f64_lossy(x)).collect()),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::builtin_karate;

    fn graph(n: usize, edges: &[(usize, usize)], features: Array2<f64>) -> Graph<f64> {
        let raw: Vec<_> = edges.iter().map(|&(u, v)| (u, v, 1.0)).collect();
        Graph::new(n, &raw, features, false).unwrap()
    }

    #[test]
    fn edgeless_normalization_is_identity() {
        let adj = NormalizedAdjacency::<f64>::from_edges(3, &[]);
        let dense = adj.to_dense();
        assert_eq!(dense, Array2::<f64>::eye(3));
    }

    #[test]
    fn single_edge_normalization() {
        let adj = NormalizedAdjacency::<f64>::from_edges(2, &[(0, 1, 1.0)]);
        let dense = adj.to_dense();
        for i in 0..2 {
            for j in 0..2 {
                assert!((dense[(i, j)] - 0.5).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn triangle_normalization() {
        // hand evaluation: degrees 3, every entry 1/3
        let adj =
            NormalizedAdjacency::<f64>::from_edges(3, &[(0, 1, 1.0), (0, 2, 1.0), (1, 2, 1.0)]);
        let dense = adj.to_dense();
        for v in dense.iter() {
            assert!((v - 1.0 / 3.0).abs() < 1e-15);
        }
    }

    #[test]
    fn forward_rows_normalize() {
        let (g, _) = builtin_karate::<f64>().unwrap();
        let m = PredictorModel::init(34, 16, 4, 3);
        let logp = forward(&m, &g, &g.full_subset()).unwrap();
        for row in logp.rows() {
            let s: f64 = row.iter().map(|x| x.exp()).sum();
            assert!((s - 1.0).abs() < 1e-9, "row sums to {s}");
        }
    }

    #[test]
    fn zero_model_is_uniform() {
        let g = graph(3, &[(0, 1)], Array2::zeros((3, 2)));
        let m = PredictorModel::<f64> {
            w1: Array2::zeros((2, 4)),
            b1: Array1::zeros(4),
            w2: Array2::zeros((4, 3)),
            b2: Array1::zeros(3),
        };
        let logp = forward(&m, &g, &g.full_subset()).unwrap();
        for v in logp.iter() {
            assert!((v + (3.0f64).ln()).abs() < 1e-12);
        }
    }

    #[test]
    fn nll_uniform_is_ln_c() {
        let g = graph(5, &[(0, 1), (2, 3)], Array2::zeros((5, 2)));
        let task = Task::new(
            vec![0, 1, 0, 1, 0],
            2,
            vec![true, true, true, false, false],
            vec![false, false, false, true, false],
            vec![false, false, false, false, true],
        )
        .unwrap();
        let m = PredictorModel::<f64> {
            w1: Array2::zeros((2, 4)),
            b1: Array1::zeros(4),
            w2: Array2::zeros((4, 2)),
            b2: Array1::zeros(2),
        };
        let v = nll(&m, &g, &g.full_subset(), &task, MaskKind::Train).unwrap();
        assert!((v - (2.0f64).ln()).abs() < 1e-12);
    }

    #[test]
    fn train_is_deterministic() {
        let (g, task) = builtin_karate::<f64>().unwrap();
        let cfg = TrainConfig {
            hidden_dim: 16,
            epochs: 30,
            seed: 11,
            ..Default::default()
        };
        let a = train(&g, &g.full_subset(), &task, &cfg).unwrap();
        let b = train(&g, &g.full_subset(), &task, &cfg).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn karate_trains_to_low_nll() {
        let (g, task) = builtin_karate::<f64>().unwrap();
        let cfg = TrainConfig {
            seed: 42,
            ..Default::default()
        };
        let m = train(&g, &g.full_subset(), &task, &cfg).unwrap();
        let train_nll = nll(&m, &g, &g.full_subset(), &task, MaskKind::Train).unwrap();
        assert!(train_nll < 0.1, "train NLL {train_nll}");
        let acc = accuracy(&m, &g, &g.full_subset(), &task, MaskKind::Train).unwrap();
        assert_eq!(acc, 1.0);
    }

    #[test]
    fn separable_tiny_graph_fits() {
        // 6 nodes, features equal to one-hot labels
        let mut feats = Array2::zeros((6, 2));
        let labels = vec![0, 1, 0, 1, 0, 1];
        for (i, &y) in labels.iter().enumerate() {
            feats[(i, y)] = 1.0;
        }
        let g = graph(6, &[(0, 2), (1, 3)], feats);
        let task = Task::new(
            labels,
            2,
            vec![true, true, true, true, false, false],
            vec![false, false, false, false, true, false],
            vec![false, false, false, false, false, true],
        )
        .unwrap();
        let cfg = TrainConfig {
            hidden_dim: 8,
            epochs: 200,
            seed: 1,
            ..Default::default()
        };
        let m = train(&g, &g.full_subset(), &task, &cfg).unwrap();
        let acc = accuracy(&m, &g, &g.full_subset(), &task, MaskKind::Train).unwrap();
        assert_eq!(acc, 1.0);
    }

    #[test]
    fn zero_w1_has_zero_adjacency_gradient() {
        let g = graph(4, &[(0, 1), (1, 2), (2, 3)], Array2::zeros((4, 2)));
        let task = Task::new(
            vec![0, 1, 0, 1],
            2,
            vec![true, false, false, false],
            vec![false, true, false, false],
            vec![false, false, true, true],
        )
        .unwrap();
        let m = PredictorModel::<f64> {
            w1: Array2::zeros((2, 4)),
            b1: Array1::zeros(4),
            w2: Array2::zeros((4, 2)),
            b2: Array1::zeros(2),
        };
        let grads = adjacency_gradient(&m, &g, &g.full_subset(), &task).unwrap();
        for gr in grads {
            assert_eq!(gr, 0.0);
        }
    }

    /// Central finite-difference oracle for the per-edge weight gradient.
    pub(crate) fn fd_gradient_oracle(
        m: &PredictorModel<f64>,
        g: &Graph<f64>,
        active: &EdgeSubset,
        task: &Task,
        eps: f64,
    ) -> Vec<f64> {
        let base_edges: Vec<_> = g
            .edges()
            .iter()
            .filter(|e| active.contains(e.id))
            .map(|e| (e.u, e.v, e.w))
            .collect();
        let eval = |edges: &[(usize, usize, f64)]| -> f64 {
            let adj = NormalizedAdjacency::from_edges(g.num_nodes(), edges);
            let fp = forward_pass(m, &adj, g.features());
            masked_nll(&fp.logp, &task.labels, &task.val_mask).unwrap()
        };
        (0..base_edges.len())
            .map(|k| {
                let mut plus = base_edges.clone();
                plus[k].2 += eps;
                let mut minus = base_edges.clone();
                minus[k].2 -= eps;
                (eval(&plus) - eval(&minus)) / (2.0 * eps)
            })
            .collect()
    }

    #[test]
    fn gradient_matches_finite_differences() {
        // seeded 10-node random graph
        let mut edges = Vec::new();
        let mut state = 0x9E3779B97F4A7C15u64;
        let mut next = || {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            state
        };
        for u in 0..10usize {
            for v in (u + 1)..10 {
                if next() % 10 < 4 {
                    edges.push((u, v));
                }
            }
        }
        let feats = Array2::from_shape_fn((10, 5), |(i, j)| {
            (((i * 5 + j) as f64) * 0.37).sin()
        });
        let g = graph(10, &edges, feats);
        let labels: Vec<usize> = (0..10).map(|i| i % 3).collect();
        let task = Task::new(
            labels,
            3,
            (0..10).map(|i| i < 6).collect(),
            (0..10).map(|i| (6..8).contains(&i)).collect(),
            (0..10).map(|i| i >= 8).collect(),
        )
        .unwrap();
        let cfg = TrainConfig {
            hidden_dim: 8,
            epochs: 50,
            seed: 5,
            ..Default::default()
        };
        let m = train(&g, &g.full_subset(), &task, &cfg).unwrap();
        let analytic = adjacency_gradient(&m, &g, &g.full_subset(), &task).unwrap();
        let numeric = fd_gradient_oracle(&m, &g, &g.full_subset(), &task, 1e-4);
        for (a, n) in analytic.iter().zip(&numeric) {
            let rel = (a - n).abs() / (a.abs() + 1e-12);
            assert!(rel < 1e-4, "analytic {a} vs numeric {n}, rel {rel}");
        }
    }

    #[test]
    fn checkpoint_roundtrip() {
        let dir = tempfile::tempdir().unwrap();
        let m = PredictorModel::<f64>::init(5, 8, 3, 9);
        let path = dir.path().join("model.json");
        save_model(&m, &path).unwrap();
        let m2 = load_model::<f64>(&path).unwrap();
        assert_eq!(m, m2);
    }

    #[test]
    fn checkpoint_rejects_bad_magic() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("model.json");
        std::fs::write(
            &path,
            r#"{"magic":"nope","in_dim":1,"hidden_dim":1,"num_classes":1,"w1":[0.0],"b1":[0.0],"w2":[0.0],"b2":[0.0]}"#,
        )
        .unwrap();
        assert!(load_model::<f64>(&path).is_err());
    }
}
