//! Desk-scale benchmark harness: synthetic CLG ground truths, the
//! discretized-versus-mixed learning matrix, structure distances and
//! marginal distribution comparison.

use std::fmt::{self, Write as _};
use std::io::Write;
use std::str::FromStr;
use std::time::Instant;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dag::Dag;
use crate::dataset::{equal_frequency_discretize, split_indices, DataError, Dataset, VariableKind};
use crate::inference::{evaluate_restoration, forward_sample, ImputeStrategy, InferenceError, MetricKind};
use crate::parameters::{
    fit_parameters, with_discretization, BayesianNetwork, ClgEntry, ConditionalLinearGaussian, Cpt, CptRow,
    FitOptions, LinearGaussian, NodeModel, ParamError, Variable,
};
use crate::scoring::{ScoreKind, ScoreOptions, Scorer};
use crate::search::{evolve, hill_climb, EvoConfig, HillClimbOptions, SearchError, SearchOutcome};

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("invalid generator spec: {0}")]
    Spec(String),
    #[error("{0}")]
    Invalid(String),
    #[error(transparent)]
    Data(#[from] DataError),
    #[error(transparent)]
    Search(#[from] SearchError),
    #[error(transparent)]
    Params(#[from] ParamError),
    #[error(transparent)]
    Inference(#[from] InferenceError),
}

/// Shape and parameter ranges of a random CLG ground-truth network.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeneratorSpec {
    #[serde(default)]
    pub name: String,
    pub n_nodes: usize,
    pub n_discrete: usize,
    /// One entry per discrete node, or a single entry shared by all.
    pub cardinalities: Vec<usize>,
    /// Probability that an admissible earlier node becomes a parent.
    pub edge_density: f64,
    #[serde(default)]
    pub max_parents: Option<usize>,
    pub coefficient_range: (f64, f64),
    pub intercept_range: (f64, f64),
    pub noise_variance_range: (f64, f64),
    pub n_rows: usize,
    #[serde(default)]
    pub seed: u64,
}

impl GeneratorSpec {
    fn shaped(name: &str, n_nodes: usize, n_discrete: usize, n_rows: usize, seed: u64) -> Self {
        Self {
            name: name.to_string(),
            n_nodes,
            n_discrete,
            cardinalities: vec![3],
            edge_density: (2.0 / n_nodes as f64).min(0.5),
            max_parents: Some(3),
            coefficient_range: (0.5, 1.0),
            intercept_range: (-3.0, 3.0),
            noise_variance_range: (0.5, 1.0),
            n_rows,
            seed,
        }
    }

    pub fn healthcare(seed: u64) -> Self {
        Self::shaped("HEALTHCARE", 7, 3, 3000, seed)
    }

    pub fn sangiovese(seed: u64) -> Self {
        Self::shaped("SANGIOVESE", 15, 1, 3000, seed)
    }

    pub fn mehra(seed: u64) -> Self {
        Self::shaped("MEHRA", 24, 8, 3000, seed)
    }

    pub fn reservoirs(seed: u64) -> Self {
        Self::shaped("Reservoirs", 10, 5, 514, seed)
    }

    pub fn social(seed: u64) -> Self {
        Self::shaped("Social", 8, 4, 3789, seed)
    }

    /// A preset by case-insensitive name.
    pub fn preset(name: &str, seed: u64) -> Option<Self> {
        match name.to_ascii_lowercase().as_str() {
            "healthcare" => Some(Self::healthcare(seed)),
            "sangiovese" => Some(Self::sangiovese(seed)),
            "mehra" => Some(Self::mehra(seed)),
            "reservoirs" => Some(Self::reservoirs(seed)),
            "social" => Some(Self::social(seed)),
            _ => None,
        }
    }

    fn cardinality(&self, discrete_index: usize) -> usize {
        if self.cardinalities.len() == 1 {
            self.cardinalities[0]
        } else {
            self.cardinalities[discrete_index]
        }
    }

    pub fn validate(&self) -> Result<(), BenchError> {
        let fail = |m: &str| Err(BenchError::Spec(m.to_string()));
        if self.n_nodes == 0 {
            return fail("n_nodes must be positive");
        }
        if self.n_discrete > self.n_nodes {
            return fail("more discrete nodes than nodes");
        }
        if self.n_discrete > 0 && self.cardinalities.len() != 1 && self.cardinalities.len() != self.n_discrete {
            return fail("cardinalities must have one entry or one per discrete node");
        }
        if self.n_discrete > 0 && self.cardinalities.iter().any(|&k| k < 2) {
            return fail("cardinalities must be at least 2");
        }
        if !(0.0..=1.0).contains(&self.edge_density) {
            return fail("edge_density must lie in [0, 1]");
        }
        for (name, (lo, hi)) in [
            ("coefficient_range", self.coefficient_range),
            ("intercept_range", self.intercept_range),
            ("noise_variance_range", self.noise_variance_range),
        ] {
            if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
                return Err(BenchError::Spec(format!("{name} must be a finite interval")));
            }
        }
        if self.noise_variance_range.0 <= 0.0 {
            return fail("noise variances must be positive");
        }
        if self.n_rows == 0 {
            return fail("n_rows must be positive");
        }
        Ok(())
    }
}

fn uniform<R: Rng>(rng: &mut R, (lo, hi): (f64, f64)) -> f64 {
    if lo == hi { lo } else { rng.random_range(lo..hi) }
}

fn dirichlet_ones<R: Rng>(rng: &mut R, k: usize) -> Vec<f64> {
    let g: Vec<f64> = (0..k).map(|_| Exp1.sample(rng)).collect::<Vec<f64>>();
    let s: f64 = g.iter().sum();
    let mut p: Vec<f64> = g.iter().map(|x| x / s).collect();
    // keep the row summing to one after rounding
    let rest: f64 = p[..k - 1].iter().sum();
    p[k - 1] = (1.0 - rest).max(0.0);
    p
}

/// Every combination of discrete-parent values, in lexicographic order.
fn configurations(cards: &[usize]) -> Vec<Vec<u32>> {
    let mut out = vec![Vec::new()];
    for &k in cards {
        out = out
            .into_iter()
            .flat_map(|prefix| {
                (0..k as u32).map(move |c| {
                    let mut next = prefix.clone();
                    next.push(c);
                    next
                })
            })
            .collect();
    }
    out
}

/// Random ground-truth CLG network and a forward sample of `spec.n_rows` rows.
///
/// Nodes are placed in a random order; each admissible earlier node (never a
/// continuous parent for a discrete child) becomes a parent with probability
/// `edge_density`, capped at `max_parents`. Table rows are Dirichlet(1, ..., 1)
/// draws; regression coefficients, intercepts and noise variances are uniform
/// in their ranges, drawn afresh for every discrete-parent configuration.
pub fn generate_clg_network(spec: &GeneratorSpec) -> Result<(BayesianNetwork, Dataset), BenchError> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let n = spec.n_nodes;
    let mut is_discrete = vec![false; n];
    let mut ids: Vec<usize> = (0..n).collect();
    ids.shuffle(&mut rng);
    for &v in &ids[..spec.n_discrete] {
        is_discrete[v] = true;
    }
    let mut cards = vec![0usize; n];
    let mut next_discrete = 0;
    for v in 0..n {
        if is_discrete[v] {
            cards[v] = spec.cardinality(next_discrete);
            next_discrete += 1;
        }
    }
    let names: Vec<String> = (0..n).map(|v| format!("x{v}")).collect();
    let kinds: Vec<VariableKind> = is_discrete
        .iter()
        .map(|&d| if d { VariableKind::Discrete } else { VariableKind::Continuous })
        .collect();

    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut rng);
    let mut dag = Dag::empty(names.clone(), kinds.clone());
    for (pos, &child) in order.iter().enumerate() {
        let mut chosen: Vec<usize> = order[..pos]
            .iter()
            .copied()
            .filter(|&p| dag.type_allows(p, child))
            .filter(|_| rng.random_bool(spec.edge_density))
            .collect();
        if let Some(cap) = spec.max_parents {
            if chosen.len() > cap {
                chosen.shuffle(&mut rng);
                chosen.truncate(cap);
            }
        }
        for p in chosen {
            dag.add_edge(p, child).map_err(|e| BenchError::Spec(e.to_string()))?;
        }
    }

    let mut models = Vec::with_capacity(n);
    for v in 0..n {
        let parents = dag.parents(v);
        let disc: Vec<usize> = parents.iter().copied().filter(|&p| is_discrete[p]).collect();
        let n_cont = parents.len() - disc.len();
        let configs = configurations(&disc.iter().map(|&p| cards[p]).collect::<Vec<_>>());
        let regression = |rng: &mut ChaCha8Rng| LinearGaussian {
            intercept: uniform(rng, spec.intercept_range),
            coefficients: (0..n_cont).map(|_| uniform(rng, spec.coefficient_range)).collect(),
            residual_variance: uniform(rng, spec.noise_variance_range),
        };
        let model = if is_discrete[v] {
            let rows: Vec<CptRow> = configs
                .into_iter()
                .map(|config| CptRow {
                    config,
                    probabilities: dirichlet_ones(&mut rng, cards[v]),
                })
                .collect();
            let fallback = (0..cards[v])
                .map(|c| rows.iter().map(|r| r.probabilities[c]).sum::<f64>() / rows.len() as f64)
                .collect();
            NodeModel::Cpt(Cpt {
                cardinality: cards[v],
                rows,
                fallback,
            })
        } else if !disc.is_empty() {
            let entries: Vec<ClgEntry> = configs
                .into_iter()
                .map(|config| ClgEntry {
                    config,
                    model: regression(&mut rng),
                })
                .collect();
            let fallback = entries[0].model.clone();
            NodeModel::ConditionalLinearGaussian(ConditionalLinearGaussian { entries, fallback })
        } else if n_cont > 0 {
            NodeModel::LinearGaussian(regression(&mut rng))
        } else {
            let lg = regression(&mut rng);
            NodeModel::Gaussian {
                mean: lg.intercept,
                variance: lg.residual_variance,
            }
        };
        models.push(model);
    }
    let variables = (0..n)
        .map(|v| Variable {
            name: names[v].clone(),
            kind: kinds[v],
            labels: (0..cards[v]).map(|c| c.to_string()).collect(),
        })
        .collect();
    let bn = BayesianNetwork::from_parts(variables, dag, models, Vec::new())?;
    let data = forward_sample(&bn, spec.n_rows, spec.seed.wrapping_add(1));
    Ok((bn, data))
}

/// Edge-level differences between a reference and a learned DAG.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct StructureDistance {
    /// Reference edges absent from the learned graph in either direction.
    pub missing: usize,
    /// Learned edges absent from the reference in either direction.
    pub extra: usize,
    /// Edges present in both with opposite directions.
    pub reversed: usize,
}

impl StructureDistance {
    /// Structural Hamming distance: every differing adjacency counts once.
    pub fn shd(&self) -> usize {
        self.missing + self.extra + self.reversed
    }
}

/// Compares two graphs over the same variables.
pub fn structure_distance(truth: &Dag, learned: &Dag) -> StructureDistance {
    let mut d = StructureDistance {
        missing: 0,
        extra: 0,
        reversed: 0,
    };
    for (a, b) in truth.edges() {
        if learned.has_edge(a, b) {
        } else if learned.has_edge(b, a) {
            d.reversed += 1;
        } else {
            d.missing += 1;
        }
    }
    for (a, b) in learned.edges() {
        if !truth.has_edge(a, b) && !truth.has_edge(b, a) {
            d.extra += 1;
        }
    }
    d
}

/// F1 of the learned skeleton against the reference skeleton. Two empty
/// skeletons score 1.
pub fn skeleton_f1(truth: &Dag, learned: &Dag) -> f64 {
    let skeleton = |g: &Dag| {
        g.edges()
            .into_iter()
            .map(|(a, b)| (a.min(b), a.max(b)))
            .collect::<std::collections::BTreeSet<_>>()
    };
    let t = skeleton(truth);
    let l = skeleton(learned);
    if t.is_empty() && l.is_empty() {
        return 1.0;
    }
    let tp = t.intersection(&l).count() as f64;
    if tp == 0.0 {
        return 0.0;
    }
    let precision = tp / l.len() as f64;
    let recall = tp / t.len() as f64;
    2.0 * precision * recall / (precision + recall)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SearchAlgo {
    Hc,
    Evo,
}

impl fmt::Display for SearchAlgo {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SearchAlgo::Hc => "hc",
            SearchAlgo::Evo => "evo",
        })
    }
}

impl FromStr for SearchAlgo {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "hc" => Ok(SearchAlgo::Hc),
            "evo" => Ok(SearchAlgo::Evo),
            other => Err(format!("unknown search algorithm {other:?}")),
        }
    }
}

/// Structure representation × parameter representation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Cell {
    #[serde(rename = "D+D")]
    DD,
    #[serde(rename = "M+D")]
    MD,
    #[serde(rename = "D+M")]
    DM,
    #[serde(rename = "M+M")]
    MM,
}

impl Cell {
    pub const ALL: [Cell; 4] = [Cell::DD, Cell::MD, Cell::DM, Cell::MM];

    pub fn mixed_structure(self) -> bool {
        matches!(self, Cell::MD | Cell::MM)
    }

    pub fn mixed_parameters(self) -> bool {
        matches!(self, Cell::DM | Cell::MM)
    }
}

impl fmt::Display for Cell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Cell::DD => "D+D",
            Cell::MD => "M+D",
            Cell::DM => "D+M",
            Cell::MM => "M+M",
        })
    }
}

/// Knobs shared by every cell of a matrix run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MatrixOptions {
    pub score: ScoreKind,
    pub max_parents: Option<usize>,
    pub bins: usize,
    pub test_fraction: f64,
    pub min_group_size: usize,
    pub laplace_alpha: f64,
    pub strategy: ImputeStrategy,
    /// Restoration passes per cell, each with its own seed.
    pub restoration_repeats: usize,
    pub evo: EvoConfig,
}

impl Default for MatrixOptions {
    fn default() -> Self {
        Self {
            score: ScoreKind::Mi,
            max_parents: None,
            bins: 5,
            test_fraction: 0.1,
            min_group_size: ScoreOptions::default().min_group_size,
            laplace_alpha: 0.0,
            strategy: ImputeStrategy::Sample,
            restoration_repeats: 10,
            evo: EvoConfig::default(),
        }
    }
}

/// Restoration quality of one node in one cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NodeResult {
    pub name: String,
    pub metric: MetricKind,
    /// Mean over restoration repeats of RMSE or accuracy.
    pub value: f64,
    /// Standard deviation over restoration repeats.
    pub spread: f64,
    /// `100 · (baseline − this) / baseline` on the error scale (RMSE, or
    /// `1 − accuracy`) against the D+D cell; `None` when the baseline is 0.
    pub error_reduction: Option<f64>,
    pub fallback_events: usize,
}

impl NodeResult {
    /// RMSE, or the misclassification rate for discrete nodes.
    pub fn error(&self) -> f64 {
        match self.metric {
            MetricKind::Rmse => self.value,
            MetricKind::Accuracy => 1.0 - self.value,
        }
    }
}

#[derive(Debug, Clone)]
pub struct CellResult {
    pub cell: Cell,
    pub network: BayesianNetwork,
    pub structure_score: f64,
    /// Wall-clock time of the structure search this cell used.
    pub structure_seconds: f64,
    pub distance: Option<StructureDistance>,
    pub skeleton_f1: Option<f64>,
    pub nodes: Vec<NodeResult>,
}

#[derive(Debug, Clone)]
pub struct MatrixResult {
    pub search: SearchAlgo,
    pub seed: u64,
    pub train_rows: usize,
    pub test_rows: usize,
    pub cells: Vec<CellResult>,
    pub warnings: Vec<String>,
}

impl MatrixResult {
    pub fn cell(&self, cell: Cell) -> &CellResult {
        self.cells.iter().find(|c| c.cell == cell).expect("all cells present")
    }
}

fn search(
    scorer: &Scorer<'_>,
    start: &Dag,
    algo: SearchAlgo,
    options: &MatrixOptions,
    seed: u64,
) -> Result<(SearchOutcome, f64), BenchError> {
    let t0 = Instant::now();
    let outcome = match algo {
        SearchAlgo::Hc => hill_climb(
            scorer,
            start,
            &HillClimbOptions {
                max_parents: options.max_parents,
                ..HillClimbOptions::default()
            },
        )?,
        SearchAlgo::Evo => evolve(
            scorer,
            start,
            &EvoConfig {
                max_parents: options.max_parents,
                seed,
                ..options.evo
            },
        )?,
    };
    Ok((outcome, t0.elapsed().as_secs_f64()))
}

/// Runs the four D/M × D/M cells on one seeded train/test split.
///
/// D-structure cells search on the `bins`-bin equal-frequency discretization
/// of the training rows (still forbidding edges from originally continuous to
/// discrete columns); M-structure cells search on the raw training rows with
/// the mixed estimator. D-parameter cells fit tables on the discretized rows,
/// M-parameter cells fit the conditional-linear-Gaussian family on the raw
/// rows. Every cell is restored on the same held-out rows with the same
/// restoration seeds.
pub fn run_matrix(
    data: &Dataset,
    truth: Option<&BayesianNetwork>,
    algo: SearchAlgo,
    seed: u64,
    options: &MatrixOptions,
) -> Result<MatrixResult, BenchError> {
    if options.restoration_repeats == 0 {
        return Err(BenchError::Invalid("restoration_repeats must be positive".into()));
    }
    if truth.is_some_and(|t| t.dag().names() != data.names()) {
        return Err(BenchError::Invalid("ground truth and data have different variables".into()));
    }
    let mut warnings = Vec::new();
    let kinds = data.kinds();
    if !kinds.contains(&VariableKind::Continuous) {
        warnings.push("no continuous columns: discretized and mixed cells coincide".to_string());
    }
    if !kinds.contains(&VariableKind::Discrete) {
        warnings.push("no discrete columns: the data is not mixed".to_string());
    }
    let (train_idx, test_idx) = split_indices(data.n_rows(), options.test_fraction, seed)?;
    let train = data.select_rows(&train_idx);
    let test = data.select_rows(&test_idx);
    let (disc_train, maps) = equal_frequency_discretize(&train, options.bins)?;
    for m in &maps {
        if let Some(w) = &m.warning {
            warnings.push(w.clone());
        }
    }

    let score_options = ScoreOptions {
        min_group_size: options.min_group_size,
    };
    let start = Dag::empty(data.names().to_vec(), kinds);
    let d_scorer = Scorer::new(&disc_train, options.score, score_options);
    let (d_outcome, d_seconds) = search(&d_scorer, &start, algo, options, seed)?;
    let m_scorer = Scorer::new(&train, options.score, score_options);
    let (m_outcome, m_seconds) = search(&m_scorer, &start, algo, options, seed)?;

    let fit = FitOptions {
        laplace_alpha: options.laplace_alpha,
    };
    let cells: Vec<CellResult> = Cell::ALL
        .par_iter()
        .map(|&cell| -> Result<CellResult, BenchError> {
            let (outcome, seconds) = if cell.mixed_structure() {
                (&m_outcome, m_seconds)
            } else {
                (&d_outcome, d_seconds)
            };
            let dag = &outcome.network.dag;
            let network = if cell.mixed_parameters() {
                fit_parameters(&train, dag, &fit)?
            } else {
                with_discretization(fit_parameters(&disc_train, dag, &fit)?, maps.clone())
            };
            let reports = (0..options.restoration_repeats)
                .map(|r| evaluate_restoration(&network, &test, options.strategy, seed.wrapping_add(r as u64)))
                .collect::<Result<Vec<_>, _>>()?;
            let nodes = (0..data.n_cols())
                .map(|v| {
                    let values: Vec<f64> = reports.iter().map(|rep| rep.variables[v].value).collect();
                    let m = values.len() as f64;
                    let mean = values.iter().sum::<f64>() / m;
                    let spread = (values.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / m).sqrt();
                    NodeResult {
                        name: data.name(v).to_string(),
                        metric: reports[0].variables[v].metric,
                        value: mean,
                        spread,
                        error_reduction: None,
                        fallback_events: reports.iter().map(|rep| rep.variables[v].fallback_events).sum(),
                    }
                })
                .collect();
            Ok(CellResult {
                cell,
                structure_score: outcome.network.total,
                structure_seconds: seconds,
                distance: truth.map(|t| structure_distance(t.dag(), dag)),
                skeleton_f1: truth.map(|t| skeleton_f1(t.dag(), dag)),
                network,
                nodes,
            })
        })
        .collect::<Result<_, _>>()?;

    let mut result = MatrixResult {
        search: algo,
        seed,
        train_rows: train.n_rows(),
        test_rows: test.n_rows(),
        cells,
        warnings,
    };
    let baseline: Vec<f64> = result.cell(Cell::DD).nodes.iter().map(NodeResult::error).collect();
    for cell in &mut result.cells {
        for (node, base) in cell.nodes.iter_mut().zip(&baseline) {
            node.error_reduction = (*base > 0.0).then(|| 100.0 * (base - node.error()) / base);
        }
    }
    Ok(result)
}

/// One row per (search, seed, cell, node): the long-format results table.
pub fn write_results_csv<W: Write>(results: &[MatrixResult], writer: W) -> Result<(), DataError> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record([
        "search",
        "seed",
        "cell",
        "node",
        "metric",
        "value",
        "spread",
        "error_reduction",
        "fallback_events",
    ])?;
    for r in results {
        for c in &r.cells {
            for n in &c.nodes {
                let metric = match n.metric {
                    MetricKind::Rmse => "rmse",
                    MetricKind::Accuracy => "accuracy",
                };
                w.write_record([
                    r.search.to_string(),
                    r.seed.to_string(),
                    c.cell.to_string(),
                    n.name.clone(),
                    metric.to_string(),
                    n.value.to_string(),
                    n.spread.to_string(),
                    n.error_reduction.map(|x| x.to_string()).unwrap_or_default(),
                    n.fallback_events.to_string(),
                ])?;
            }
        }
    }
    w.flush().map_err(DataError::from)?;
    Ok(())
}

/// Structure-learning wall-clock seconds per (search, seed, cell).
pub fn write_timings_csv<W: Write>(results: &[MatrixResult], writer: W) -> Result<(), DataError> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["search", "seed", "cell", "structure_seconds"])?;
    for r in results {
        for c in &r.cells {
            w.write_record([
                r.search.to_string(),
                r.seed.to_string(),
                c.cell.to_string(),
                c.structure_seconds.to_string(),
            ])?;
        }
    }
    w.flush().map_err(DataError::from)?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NodeSummary {
    pub name: String,
    pub metric: MetricKind,
    pub mean: f64,
    pub spread: f64,
    pub error_reduction: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellSummary {
    pub search: SearchAlgo,
    pub cell: Cell,
    pub seeds: Vec<u64>,
    pub mean_shd: Option<f64>,
    pub mean_skeleton_f1: Option<f64>,
    pub mean_edges: f64,
    pub nodes: Vec<NodeSummary>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchSummary {
    pub cells: Vec<CellSummary>,
    pub warnings: Vec<String>,
}

fn mean_std(values: &[f64]) -> (f64, f64) {
    let m = values.len() as f64;
    let mean = values.iter().sum::<f64>() / m;
    (mean, (values.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / m).sqrt())
}

/// Aggregates matrix runs over seeds for each (search, cell). Spreads are
/// standard deviations of the per-seed values.
pub fn summarize(results: &[MatrixResult]) -> BenchSummary {
    let mut algos: Vec<SearchAlgo> = results.iter().map(|r| r.search).collect();
    algos.sort_by_key(|a| *a as u8);
    algos.dedup();
    let mut cells = Vec::new();
    for algo in algos {
        let runs: Vec<&MatrixResult> = results.iter().filter(|r| r.search == algo).collect();
        for cell in Cell::ALL {
            let per_seed: Vec<&CellResult> = runs.iter().map(|r| r.cell(cell)).collect();
            let opt_mean = |f: &dyn Fn(&CellResult) -> Option<f64>| {
                let xs: Option<Vec<f64>> = per_seed.iter().map(|c| f(c)).collect();
                xs.map(|xs| mean_std(&xs).0)
            };
            let n_nodes = per_seed[0].nodes.len();
            let nodes = (0..n_nodes)
                .map(|v| {
                    let values: Vec<f64> = per_seed.iter().map(|c| c.nodes[v].value).collect();
                    let (mean, spread) = mean_std(&values);
                    let reductions: Option<Vec<f64>> = per_seed.iter().map(|c| c.nodes[v].error_reduction).collect();
                    NodeSummary {
                        name: per_seed[0].nodes[v].name.clone(),
                        metric: per_seed[0].nodes[v].metric,
                        mean,
                        spread,
                        error_reduction: reductions.map(|r| mean_std(&r).0),
                    }
                })
                .collect();
            cells.push(CellSummary {
                search: algo,
                cell,
                seeds: runs.iter().map(|r| r.seed).collect(),
                mean_shd: opt_mean(&|c| c.distance.map(|d| d.shd() as f64)),
                mean_skeleton_f1: opt_mean(&|c| c.skeleton_f1),
                mean_edges: mean_std(&per_seed.iter().map(|c| c.network.dag().n_edges() as f64).collect::<Vec<_>>()).0,
                nodes,
            });
        }
    }
    let mut warnings: Vec<String> = results.iter().flat_map(|r| r.warnings.iter().cloned()).collect();
    warnings.sort();
    warnings.dedup();
    BenchSummary { cells, warnings }
}

/// Per-node error reductions against D+D, one block per search algorithm,
/// plus an HC − EVO column of M+M errors when both algorithms ran.
pub fn format_table(summary: &BenchSummary) -> String {
    let mut out = String::new();
    let mut algos: Vec<SearchAlgo> = summary.cells.iter().map(|c| c.search).collect();
    algos.dedup();
    let find = |algo: SearchAlgo, cell: Cell| summary.cells.iter().find(|c| c.search == algo && c.cell == cell);
    for &algo in &algos {
        let _ = writeln!(out, "search: {algo}  (error reduction vs D+D, %)");
        let _ = writeln!(out, "{:<16} {:>9} {:>12} {:>9} {:>9} {:>9}", "node", "metric", "D+D error", "M+D", "D+M", "M+M");
        let base = find(algo, Cell::DD).expect("baseline present");
        for (v, node) in base.nodes.iter().enumerate() {
            let metric = match node.metric {
                MetricKind::Rmse => "rmse",
                MetricKind::Accuracy => "1-acc",
            };
            let err = match node.metric {
                MetricKind::Rmse => node.mean,
                MetricKind::Accuracy => 1.0 - node.mean,
            };
            let _ = write!(out, "{:<16} {:>9} {:>12.4}", node.name, metric, err);
            for cell in [Cell::MD, Cell::DM, Cell::MM] {
                match find(algo, cell).and_then(|c| c.nodes[v].error_reduction) {
                    Some(x) => {
                        let _ = write!(out, " {x:>9.2}");
                    }
                    None => {
                        let _ = write!(out, " {:>9}", "-");
                    }
                }
            }
            out.push('\n');
        }
        out.push('\n');
    }
    if let (Some(hc), Some(evo)) = (find(SearchAlgo::Hc, Cell::MM), find(SearchAlgo::Evo, Cell::MM)) {
        let _ = writeln!(out, "M+M error, HC - EVO");
        let _ = writeln!(out, "{:<16} {:>12} {:>12} {:>12}", "node", "hc", "evo", "hc-evo");
        for (h, e) in hc.nodes.iter().zip(&evo.nodes) {
            let err = |n: &NodeSummary| match n.metric {
                MetricKind::Rmse => n.mean,
                MetricKind::Accuracy => 1.0 - n.mean,
            };
            let _ = writeln!(out, "{:<16} {:>12.4} {:>12.4} {:>12.4}", h.name, err(h), err(e), err(h) - err(e));
        }
    }
    out
}

/// Aligned histogram bin: reference and sampled relative frequencies.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HistogramBin {
    pub label: String,
    pub lower: Option<f64>,
    pub upper: Option<f64>,
    pub reference: f64,
    pub sampled: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DistanceKind {
    Wasserstein1,
    TotalVariation,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistributionComparison {
    pub node: String,
    pub bins: Vec<HistogramBin>,
    pub distance_kind: DistanceKind,
    pub distance: f64,
}

impl DistributionComparison {
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<(), DataError> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["node", "bin", "lower", "upper", "reference", "sampled"])?;
        for b in &self.bins {
            w.write_record([
                self.node.clone(),
                b.label.clone(),
                b.lower.map(|x| x.to_string()).unwrap_or_default(),
                b.upper.map(|x| x.to_string()).unwrap_or_default(),
                b.reference.to_string(),
                b.sampled.to_string(),
            ])?;
        }
        w.flush().map_err(DataError::from)?;
        Ok(())
    }
}

/// 1-Wasserstein distance between two empirical distributions:
/// the integral of the absolute difference of their CDFs.
pub fn wasserstein1(a: &[f64], b: &[f64]) -> f64 {
    if a.is_empty() || b.is_empty() {
        return f64::NAN;
    }
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j) = (0usize, 0usize);
    let mut x = a[0].min(b[0]);
    let mut total = 0.0;
    while i < a.len() || j < b.len() {
        let next = match (a.get(i), b.get(j)) {
            (Some(&p), Some(&q)) => p.min(q),
            (Some(&p), None) => p,
            (None, Some(&q)) => q,
            (None, None) => unreachable!(),
        };
        total += (i as f64 / na - j as f64 / nb).abs() * (next - x);
        x = next;
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
    }
    total
}

const HISTOGRAM_BINS: usize = 20;

/// Compares the marginal of `node` in `reference` with `n_samples` forward
/// samples from `bn`: aligned histograms plus the 1-Wasserstein distance for
/// continuous columns or total variation for discrete ones.
///
/// A continuous column that `bn` models as bins is compared through the bins'
/// training means.
pub fn compare_distributions(
    bn: &BayesianNetwork,
    reference: &Dataset,
    node: &str,
    n_samples: usize,
    seed: u64,
) -> Result<DistributionComparison, BenchError> {
    if reference.n_rows() == 0 {
        return Err(BenchError::Invalid("reference data is empty".into()));
    }
    if n_samples == 0 {
        return Err(BenchError::Invalid("n_samples must be positive".into()));
    }
    let r = reference
        .index_of(node)
        .ok_or_else(|| BenchError::Invalid(format!("unknown node {node:?} in reference data")))?;
    let v = bn
        .index_of(node)
        .ok_or_else(|| BenchError::Invalid(format!("unknown node {node:?} in network")))?;
    let sample = forward_sample(bn, n_samples, seed);
    match reference.kind(r) {
        VariableKind::Continuous => {
            let sampled: Vec<f64> = match (sample.kind(v), bn.bin_map(v)) {
                (VariableKind::Continuous, _) => sample.values(v).to_vec(),
                (VariableKind::Discrete, Some(map)) => sample.codes(v).iter().map(|&c| map.decode(c)).collect(),
                (VariableKind::Discrete, None) => {
                    return Err(BenchError::Invalid(format!("{node:?} is discrete in the network")));
                }
            };
            let refs = reference.values(r);
            let lo = refs.iter().chain(&sampled).copied().fold(f64::INFINITY, f64::min);
            let hi = refs.iter().chain(&sampled).copied().fold(f64::NEG_INFINITY, f64::max);
            let width = if hi > lo { (hi - lo) / HISTOGRAM_BINS as f64 } else { 1.0 };
            let histogram = |xs: &[f64]| {
                let mut h = vec![0.0; HISTOGRAM_BINS];
                for &x in xs {
                    let b = (((x - lo) / width) as usize).min(HISTOGRAM_BINS - 1);
                    h[b] += 1.0 / xs.len() as f64;
                }
                h
            };
            let (hr, hs) = (histogram(refs), histogram(&sampled));
            let bins = (0..HISTOGRAM_BINS)
                .map(|b| HistogramBin {
                    label: b.to_string(),
                    lower: Some(lo + b as f64 * width),
                    upper: Some(lo + (b + 1) as f64 * width),
                    reference: hr[b],
                    sampled: hs[b],
                })
                .collect();
            Ok(DistributionComparison {
                node: node.to_string(),
                bins,
                distance_kind: DistanceKind::Wasserstein1,
                distance: wasserstein1(refs, &sampled),
            })
        }
        VariableKind::Discrete => {
            if sample.kind(v) != VariableKind::Discrete {
                return Err(BenchError::Invalid(format!("{node:?} is continuous in the network")));
            }
            let mut labels: Vec<String> = reference.labels(r).to_vec();
            for l in sample.labels(v) {
                if !labels.contains(l) {
                    labels.push(l.clone());
                }
            }
            let freq = |data: &Dataset, var: usize| {
                let mut f = vec![0.0; labels.len()];
                let pos: Vec<usize> = data
                    .labels(var)
                    .iter()
                    .map(|l| labels.iter().position(|m| m == l).expect("label collected"))
                    .collect();
                for &c in data.codes(var) {
                    f[pos[c as usize]] += 1.0 / data.n_rows() as f64;
                }
                f
            };
            let (fr, fs) = (freq(reference, r), freq(&sample, v));
            let distance = 0.5 * fr.iter().zip(&fs).map(|(a, b)| (a - b).abs()).sum::<f64>();
            let bins = labels
                .iter()
                .enumerate()
                .map(|(i, l)| HistogramBin {
                    label: l.clone(),
                    lower: None,
                    upper: None,
                    reference: fr[i],
                    sampled: fs[i],
                })
                .collect();
            Ok(DistributionComparison {
                node: node.to_string(),
                bins,
                distance_kind: DistanceKind::TotalVariation,
                distance,
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn brute_shd(truth: &Dag, learned: &Dag) -> usize {
        // compare the adjacency "state" of every unordered pair
        let n = truth.n_nodes();
        let state = |g: &Dag, a: usize, b: usize| (g.has_edge(a, b), g.has_edge(b, a));
        let mut d = 0;
        for a in 0..n {
            for b in a + 1..n {
                if state(truth, a, b) != state(learned, a, b) {
                    d += 1;
                }
            }
        }
        d
    }

    fn random_dag(n: usize, rng: &mut ChaCha8Rng) -> Dag {
        let names = (0..n).map(|i| format!("v{i}")).collect();
        let mut g = Dag::empty(names, vec![VariableKind::Continuous; n]);
        let mut order: Vec<usize> = (0..n).collect();
        order.shuffle(rng);
        for i in 0..n {
            for j in i + 1..n {
                if rng.random_bool(0.4) {
                    g.add_edge(order[i], order[j]).unwrap();
                }
            }
        }
        g
    }

    #[test]
    fn shd_matches_pairwise_comparator() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..300 {
            let n = rng.random_range(1..=5);
            let a = random_dag(n, &mut rng);
            let b = random_dag(n, &mut rng);
            assert_eq!(structure_distance(&a, &b).shd(), brute_shd(&a, &b));
            assert_eq!(structure_distance(&a, &a).shd(), 0);
        }
    }

    #[test]
    fn skeleton_f1_cases() {
        let names: Vec<String> = ["a", "b", "c"].iter().map(|s| s.to_string()).collect();
        let kinds = vec![VariableKind::Continuous; 3];
        let t = Dag::from_edges(names.clone(), kinds.clone(), &[(0, 1), (1, 2)]).unwrap();
        let rev = Dag::from_edges(names.clone(), kinds.clone(), &[(1, 0), (2, 1)]).unwrap();
        assert_eq!(skeleton_f1(&t, &rev), 1.0);
        let half = Dag::from_edges(names.clone(), kinds.clone(), &[(0, 1), (0, 2)]).unwrap();
        assert!((skeleton_f1(&t, &half) - 0.5).abs() < 1e-12);
        let empty = Dag::empty(names, kinds);
        assert_eq!(skeleton_f1(&t, &empty), 0.0);
        assert_eq!(skeleton_f1(&empty, &empty), 1.0);
    }

    #[test]
    fn wasserstein_equal_sizes_is_mean_sorted_gap() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..50 {
            let n = rng.random_range(1..40);
            let mut a: Vec<f64> = (0..n).map(|_| rng.random_range(-3.0..3.0)).collect();
            let mut b: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..5.0)).collect();
            let w = wasserstein1(&a, &b);
            a.sort_by(f64::total_cmp);
            b.sort_by(f64::total_cmp);
            let oracle = a.iter().zip(&b).map(|(x, y)| (x - y).abs()).sum::<f64>() / n as f64;
            assert!((w - oracle).abs() < 1e-10, "{w} vs {oracle}");
        }
        assert_eq!(wasserstein1(&[1.0, 2.0], &[1.0, 2.0]), 0.0);
        // point mass versus a two-point distribution
        assert!((wasserstein1(&[0.0], &[0.0, 2.0]) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn generator_shapes_and_validity() {
        for spec in [GeneratorSpec::healthcare(1), GeneratorSpec::sangiovese(2), GeneratorSpec::reservoirs(3)] {
            let (bn, data) = generate_clg_network(&spec).unwrap();
            bn.validate().unwrap();
            assert_eq!(data.n_cols(), spec.n_nodes);
            assert_eq!(data.n_rows(), spec.n_rows);
            let n_disc = data.kinds().iter().filter(|k| **k == VariableKind::Discrete).count();
            assert_eq!(n_disc, spec.n_discrete);
            for (p, c) in bn.dag().edges() {
                assert!(!(bn.dag().kind(p) == VariableKind::Continuous && bn.dag().kind(c) == VariableKind::Discrete));
            }
            if let Some(cap) = spec.max_parents {
                bn.dag().validate(Some(cap)).unwrap();
            }
        }
    }

    #[test]
    fn zero_density_gives_empty_graph() {
        let spec = GeneratorSpec {
            edge_density: 0.0,
            ..GeneratorSpec::healthcare(4)
        };
        let (bn, _) = generate_clg_network(&spec).unwrap();
        assert_eq!(bn.dag().n_edges(), 0);
    }

    #[test]
    fn bad_specs_rejected() {
        let base = GeneratorSpec::healthcare(0);
        for spec in [
            GeneratorSpec {
                n_discrete: 8,
                ..base.clone()
            },
            GeneratorSpec {
                cardinalities: vec![1],
                ..base.clone()
            },
            GeneratorSpec {
                edge_density: 1.5,
                ..base.clone()
            },
            GeneratorSpec {
                noise_variance_range: (0.0, 1.0),
                ..base.clone()
            },
            GeneratorSpec {
                cardinalities: vec![2, 3],
                ..base.clone()
            },
        ] {
            assert!(matches!(generate_clg_network(&spec), Err(BenchError::Spec(_))));
        }
    }

    #[test]
    fn generator_is_seeded() {
        let (_, a) = generate_clg_network(&GeneratorSpec::social(7)).unwrap();
        let (_, b) = generate_clg_network(&GeneratorSpec::social(7)).unwrap();
        let (_, c) = generate_clg_network(&GeneratorSpec::social(8)).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn configurations_enumerate_in_order() {
        assert_eq!(configurations(&[]), vec![Vec::<u32>::new()]);
        assert_eq!(
            configurations(&[2, 3]),
            vec![vec![0, 0], vec![0, 1], vec![0, 2], vec![1, 0], vec![1, 1], vec![1, 2]]
        );
    }

    #[test]
    fn dirichlet_rows_are_distributions() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        for k in 2..6 {
            let p = dirichlet_ones(&mut rng, k);
            assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
            assert!(p.iter().all(|&x| (0.0..=1.0).contains(&x)));
        }
    }
}
