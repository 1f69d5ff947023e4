//! `igprune` command line: prune graphs, evaluate pruning trajectories with
//! information-theoretic metrics, and compare evaluated runs.
//!
//! Exit codes: 0 success, 2 usage error, 3 data error, 4 numeric divergence.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use ndarray::Array2;
use serde::{Deserialize, Serialize};
use serde_json::json;

use igprune::gcn::TrainConfig;
use igprune::graph::{gen_split, load_features, load_labels, load_splits, parse_edge_list};
use igprune::metrics::{evaluate_trajectory, StepMetrics, DEFAULT_DELTA};
use igprune::prune::{
    prune, read_manifest, read_trajectory, run_baseline, write_trajectory, PruneConfig,
    ScoringMode,
};
use igprune::tasks::{
    centrality, PAGERANK_DAMPING, PAGERANK_MAX_ITER, PAGERANK_TOL,
};
use igprune::{
    builtin_karate, tercile_labels, BaselineMethod, BaselineParams, CentralityKind,
    CentralityVector, Error, Graph, Task,
};

#[derive(Parser)]
#[command(
    name = "igprune",
    version,
    about = "Multi-step information-guided graph pruning"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Prune a graph over K nested steps and write a trajectory directory
    Prune(PruneArgs),
    /// Evaluate a trajectory: per-step MI estimates, AUC-IC and IBP
    Eval(EvalArgs),
    /// Tabulate evaluated runs, sorted by AUC-IC descending
    Compare(CompareArgs),
}

#[derive(Args, Clone)]
struct DatasetArgs {
    /// Built-in dataset (currently: karate)
    #[arg(long, conflicts_with_all = ["edges", "features", "labels", "splits"])]
    builtin: Option<String>,
    /// TSV edge list: "u<TAB>v" or "u<TAB>v<TAB>w", 0-based dense node ids
    #[arg(long)]
    edges: Option<PathBuf>,
    /// CSV node-feature matrix, one row per node (default: identity features)
    #[arg(long)]
    features: Option<PathBuf>,
    /// Label file, one integer per line (required for --task original)
    #[arg(long)]
    labels: Option<PathBuf>,
    /// JSON split file {"train":[ids],"val":[ids],"test":[ids]}
    /// (default: seeded 60/20/20 split)
    #[arg(long)]
    splits: Option<PathBuf>,
}

#[derive(Args, Clone)]
struct TrainArgs {
    /// Training epochs per predictor
    #[arg(long, default_value_t = 200)]
    epochs: usize,
    /// Hidden layer width
    #[arg(long, default_value_t = 128)]
    hidden: usize,
    /// Adam learning rate
    #[arg(long, default_value_t = 1e-2)]
    lr: f64,
    /// L2 weight decay
    #[arg(long = "weight-decay", default_value_t = 5e-4)]
    weight_decay: f64,
}

impl TrainArgs {
    fn to_config(&self, seed: u64) -> TrainConfig {
        TrainConfig {
            hidden_dim: self.hidden,
            learning_rate: self.lr,
            weight_decay: self.weight_decay,
            epochs: self.epochs,
            seed,
        }
    }

    fn echo(&self) -> serde_json::Value {
        json!({
            "epochs": self.epochs,
            "hidden": self.hidden,
            "lr": self.lr,
            "weight_decay": self.weight_decay,
        })
    }
}

#[derive(Args)]
struct PruneArgs {
    #[command(flatten)]
    dataset: DatasetArgs,
    /// Label task: original | degree | degree_centrality | closeness | pagerank
    #[arg(long, default_value = "original")]
    task: String,
    /// Pruning method: igprune-exact | igprune-gradient | RE | RN | EFF |
    /// LD | LS | SCAN | SO
    #[arg(long, default_value = "igprune-exact")]
    method: String,
    /// Number of pruning steps K
    #[arg(long, default_value_t = 10)]
    steps: usize,
    /// Master seed (training init, baseline randomness, generated splits)
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    train: TrainArgs,
    /// Worker threads (default: all cores); never changes outputs
    #[arg(long)]
    threads: Option<usize>,
    /// Output trajectory directory
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct EvalArgs {
    /// Trajectory directory produced by `igprune prune`
    traj_dir: PathBuf,
    #[command(flatten)]
    dataset: DatasetArgs,
    /// Label task: original | degree | degree_centrality | closeness | pagerank
    #[arg(long, default_value = "original")]
    task: String,
    /// Evaluation repetitions per step
    #[arg(long, default_value_t = 5)]
    reps: usize,
    /// Information threshold for the IBP summary
    #[arg(long, default_value_t = DEFAULT_DELTA)]
    delta: f64,
    /// Evaluation seed (default: the trajectory's recorded seed)
    #[arg(long)]
    seed: Option<u64>,
    #[command(flatten)]
    train: TrainArgs,
    /// Worker threads (default: all cores); never changes outputs
    #[arg(long)]
    threads: Option<usize>,
    /// Output directory for metrics.csv and summary.json
    /// (default: the trajectory directory)
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct CompareArgs {
    /// Evaluated run directories, each containing a summary.json
    #[arg(required = true)]
    runs: Vec<PathBuf>,
    /// Write the comparison as CSV to this path as well
    #[arg(long)]
    out: Option<PathBuf>,
}

// ---------------------------------------------------------------------------
// Error handling and exit codes
// ---------------------------------------------------------------------------

enum CliError {
    Usage(String),
    Core(Error),
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(msg) => write!(f, "{msg}"),
            CliError::Core(e) => write!(f, "{e}"),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Core(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Core(Error::Io(e))
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Core(Error::Json(e))
    }
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Core(e) => match e {
                Error::Divergence { .. }
                | Error::NonConvergence { .. }
                | Error::DegenerateTrajectory { .. } => 4,
                _ => 3,
            },
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Prune(a) => cmd_prune(a),
        Command::Eval(a) => cmd_eval(a),
        Command::Compare(a) => cmd_compare(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

// ---------------------------------------------------------------------------
// Dataset loading
// ---------------------------------------------------------------------------

enum TaskKind {
    Original,
    Centrality(CentralityKind),
}

fn parse_task(s: &str) -> Result<TaskKind, CliError> {
    if s == "original" {
        return Ok(TaskKind::Original);
    }
    CentralityKind::parse(&s.replace('-', "_"))
        .map(TaskKind::Centrality)
        .map_err(|_| {
            CliError::Usage(format!(
                "unknown task {s:?} (expected original, degree, degree_centrality, \
                 closeness or pagerank)"
            ))
        })
}

struct Dataset {
    graph: Graph,
    task: Task,
    echo: serde_json::Value,
    /// Present when labels were generated from a centrality task.
    generated: Option<(CentralityKind, CentralityVector, Vec<usize>)>,
}

fn load_dataset(d: &DatasetArgs, task_name: &str, seed: u64) -> Result<Dataset, CliError> {
    let task_kind = parse_task(task_name)?;

    let (graph, base_task, dataset_echo) = match (&d.builtin, &d.edges) {
        (Some(name), _) if name == "karate" => {
            let (g, t) = builtin_karate::<f64>()?;
            (g, Some(t), json!({ "builtin": "karate" }))
        }
        (Some(name), _) => {
            return Err(CliError::Usage(format!(
                "unknown builtin dataset {name:?} (available: karate)"
            )));
        }
        (None, Some(edges_path)) => {
            let raw = parse_edge_list::<f64>(edges_path)?;
            let labels = d.labels.as_deref().map(load_labels).transpose()?;
            let features = d
                .features
                .as_deref()
                .map(load_features::<f64>)
                .transpose()?;
            let max_id = raw.iter().map(|&(u, v, _)| u.max(v) + 1).max().unwrap_or(0);
            let num_nodes = match (&features, &labels) {
                (Some(f), _) => f.nrows(),
                (None, Some(l)) => l.len().max(max_id),
                (None, None) => max_id,
            };
            let features = features.unwrap_or_else(|| Array2::eye(num_nodes));
            let graph = Graph::new(num_nodes, &raw, features, false)?;
            let (train, val, test) = match &d.splits {
                Some(p) => load_splits(p, num_nodes)?,
                None => gen_split(num_nodes, seed)?,
            };
            let base_task = match labels {
                Some(labels) => {
                    let num_classes = labels.iter().copied().max().map_or(0, |m| m + 1);
                    Some(Task::new(labels, num_classes, train, val, test)?)
                }
                // carry the masks through a placeholder label vector; the
                // centrality branch below replaces the labels
                None => Some(Task::new(
                    vec![0; num_nodes],
                    1,
                    train,
                    val,
                    test,
                )?),
            };
            let echo = json!({
                "edges": edges_path.display().to_string(),
                "features": d.features.as_ref().map(|p| p.display().to_string()),
                "labels": d.labels.as_ref().map(|p| p.display().to_string()),
                "splits": d.splits.as_ref().map(|p| p.display().to_string()),
                "split_seed": if d.splits.is_none() { Some(seed) } else { None },
            });
            (graph, base_task, echo)
        }
        (None, None) => {
            return Err(CliError::Usage(
                "no dataset given: pass --builtin NAME or --edges PATH".into(),
            ));
        }
    };

    let base_task = base_task.expect("every dataset branch builds a task");
    let (task, generated) = match task_kind {
        TaskKind::Original => {
            if d.builtin.is_none() && d.labels.is_none() {
                return Err(CliError::Usage(
                    "--task original needs a --labels file (or a builtin dataset)".into(),
                ));
            }
            (base_task, None)
        }
        TaskKind::Centrality(kind) => {
            let c = centrality(&graph, kind)?;
            let labels = tercile_labels(&c)?;
            let task = Task::new(
                labels.clone(),
                3,
                base_task.train_mask.clone(),
                base_task.val_mask.clone(),
                base_task.test_mask.clone(),
            )?;
            (task, Some((kind, c, labels)))
        }
    };

    Ok(Dataset {
        graph,
        task,
        echo: json!({ "dataset": dataset_echo, "task": task_name }),
        generated,
    })
}

fn init_threads(threads: Option<usize>) -> Result<(), CliError> {
    if let Some(n) = threads {
        if n == 0 {
            return Err(CliError::Usage("--threads must be >= 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Usage(format!("cannot configure thread pool: {e}")))?;
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// prune
// ---------------------------------------------------------------------------

fn cmd_prune(a: PruneArgs) -> Result<(), CliError> {
    if a.steps == 0 {
        return Err(CliError::Usage("--steps must be >= 1".into()));
    }
    init_threads(a.threads)?;
    let ds = load_dataset(&a.dataset, &a.task, a.seed)?;
    let train_cfg = a.train.to_config(a.seed);

    let config_echo = json!({
        "command": "prune",
        "dataset": ds.echo,
        "method": a.method,
        "steps": a.steps,
        "seed": a.seed,
        "train": a.train.echo(),
    });

    let trajectory = match a.method.as_str() {
        "igprune-exact" | "igprune-gradient" => {
            let scoring_mode = if a.method.ends_with("exact") {
                ScoringMode::Exact
            } else {
                ScoringMode::Gradient
            };
            let cfg = PruneConfig {
                steps: a.steps,
                scoring_mode,
                train_cfg,
                seed: a.seed,
            };
            eprintln!(
                "pruning {} edges over {} steps ({})",
                ds.graph.num_edges(),
                a.steps,
                a.method
            );
            prune(&ds.graph, &ds.task, &cfg)?
        }
        other => {
            let method = BaselineMethod::parse(other).map_err(|_| {
                CliError::Usage(format!(
                    "unknown method {other:?} (expected igprune-exact, igprune-gradient, \
                     RE, RN, EFF, LD, LS, SCAN or SO)"
                ))
            })?;
            eprintln!(
                "pruning {} edges over {} steps (baseline {})",
                ds.graph.num_edges(),
                a.steps,
                method.id()
            );
            run_baseline(&ds.graph, method, a.steps, a.seed, &BaselineParams::default())?
        }
    };

    write_trajectory(&trajectory, &a.out, config_echo)?;
    if let Some((kind, c, labels)) = &ds.generated {
        write_generated_labels(&a.out, *kind, c, labels)?;
    }
    println!("{}", a.out.join("trajectory.json").display());
    Ok(())
}

/// Persist generated centrality labels next to the trajectory:
/// `labels_<kind>.txt` (one label per line) and `labels_<kind>.meta.json`
/// (kind, parameters, the two tercile boundary values).
fn write_generated_labels(
    out: &Path,
    kind: CentralityKind,
    c: &CentralityVector,
    labels: &[usize],
) -> Result<(), CliError> {
    let mut txt = String::new();
    for &y in labels {
        txt.push_str(&format!("{y}\n"));
    }
    fs::write(out.join(format!("labels_{}.txt", kind.id())), txt)?;

    let n = c.values.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        c.values[a]
            .partial_cmp(&c.values[b])
            .unwrap()
            .then(a.cmp(&b))
    });
    let low = n.div_ceil(3);
    let mid = (n - low).div_ceil(2);
    let boundaries = [c.values[order[low - 1]], c.values[order[low + mid - 1]]];

    let parameters = match kind {
        CentralityKind::Pagerank => json!({
            "damping": PAGERANK_DAMPING,
            "tolerance": PAGERANK_TOL,
            "max_iterations": PAGERANK_MAX_ITER,
        }),
        _ => json!({}),
    };
    let meta = json!({
        "kind": kind.id(),
        "parameters": parameters,
        "quantile_boundaries": boundaries,
    });
    fs::write(
        out.join(format!("labels_{}.meta.json", kind.id())),
        serde_json::to_string_pretty(&meta)? + "\n",
    )?;
    Ok(())
}

// ---------------------------------------------------------------------------
// eval
// ---------------------------------------------------------------------------

/// `summary.json` schema.
#[derive(Serialize, Deserialize)]
struct RunSummary {
    auc_ic: f64,
    ibp: f64,
    delta: f64,
    method: String,
    seed: u64,
    config: serde_json::Value,
    steps: Vec<StepMetrics>,
}

fn cmd_eval(a: EvalArgs) -> Result<(), CliError> {
    if !(a.delta > 0.0 && a.delta <= 1.0) {
        return Err(CliError::Usage("--delta must be in (0, 1]".into()));
    }
    if a.reps == 0 {
        return Err(CliError::Usage("--reps must be >= 1".into()));
    }
    init_threads(a.threads)?;

    let manifest = read_manifest(&a.traj_dir)?;
    let seed = a.seed.unwrap_or(manifest.seed);
    let ds = load_dataset(&a.dataset, &a.task, seed)?;
    let trajectory = read_trajectory(&a.traj_dir, &ds.graph)?;

    eprintln!(
        "evaluating {} steps x {} repetitions (method {}, seed {seed})",
        trajectory.num_steps() + 1,
        a.reps,
        manifest.method
    );
    let cfg = a.train.to_config(seed);
    let summary = evaluate_trajectory(&trajectory, &ds.task, &cfg, a.reps, a.delta)?;

    let out = a.out.clone().unwrap_or_else(|| a.traj_dir.clone());
    fs::create_dir_all(&out)?;
    fs::write(out.join("metrics.csv"), summary.to_csv())?;
    let run = RunSummary {
        auc_ic: summary.auc_ic,
        ibp: summary.ibp,
        delta: summary.delta,
        method: manifest.method,
        seed,
        config: json!({
            "command": "eval",
            "dataset": ds.echo,
            "trajectory": a.traj_dir.display().to_string(),
            "reps": a.reps,
            "delta": a.delta,
            "seed": seed,
            "train": a.train.echo(),
        }),
        steps: summary.steps,
    };
    fs::write(
        out.join("summary.json"),
        serde_json::to_string_pretty(&run)? + "\n",
    )?;
    println!("AUC-IC {}", run.auc_ic);
    println!("IBP {}", run.ibp);
    Ok(())
}

// ---------------------------------------------------------------------------
// compare
// ---------------------------------------------------------------------------

fn cmd_compare(a: CompareArgs) -> Result<(), CliError> {
    let mut rows: Vec<(PathBuf, RunSummary)> = Vec::new();
    for dir in &a.runs {
        let path = dir.join("summary.json");
        let parsed = fs::read_to_string(&path)
            .map_err(|e| e.to_string())
            .and_then(|text| serde_json::from_str::<RunSummary>(&text).map_err(|e| e.to_string()));
        match parsed {
            Ok(summary) => rows.push((dir.clone(), summary)),
            Err(e) => eprintln!("warning: skipping {}: {e}", path.display()),
        }
    }
    if rows.is_empty() {
        return Err(CliError::Core(Error::Manifest(
            "no readable summary.json in any given run directory".into(),
        )));
    }
    rows.sort_by(|x, y| {
        y.1.auc_ic
            .partial_cmp(&x.1.auc_ic)
            .unwrap_or(std::cmp::Ordering::Equal)
            .then_with(|| x.0.cmp(&y.0))
    });

    println!(
        "{:<20} {:>6} {:>10} {:>10}",
        "method", "seed", "auc_ic", "ibp"
    );
    for (_, s) in &rows {
        println!(
            "{:<20} {:>6} {:>10.4} {:>10.4}",
            s.method, s.seed, s.auc_ic, s.ibp
        );
    }

    if let Some(out) = &a.out {
        let mut csv = String::from("run,method,seed,auc_ic,ibp,delta\n");
        for (dir, s) in &rows {
            csv.push_str(&format!(
                "{},{},{},{},{},{}\n",
                dir.display(),
                s.method,
                s.seed,
                s.auc_ic,
                s.ibp,
                s.delta
            ));
        }
        fs::write(out, csv)?;
    }
    Ok(())
}
