//! Maximum-likelihood parameters for every node of a DAG.
//!
//! The model family at a node is fixed by its kind and its parents' kinds:
//!
//! | node       | parents                     | model                          |
//! |------------|-----------------------------|--------------------------------|
//! | discrete   | discrete (or none)          | conditional probability table  |
//! | continuous | none                        | Gaussian                       |
//! | continuous | continuous only             | linear Gaussian                |
//! | continuous | any discrete                | conditional linear Gaussian    |
//!
//! The global likelihood factorizes over nodes, so each node is fitted on its
//! own.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dag::{Dag, DagError};
use crate::dataset::{apply_discretization, DataError, Dataset, DiscretizationMap, VariableKind};
use crate::linalg::least_squares;

/// Absolute lower bound on any fitted variance.
pub const VARIANCE_FLOOR_MIN: f64 = 1e-12;

#[derive(Debug, Error)]
pub enum ParamError {
    #[error("graph variables do not match the data columns")]
    VariableMismatch,
    #[error("continuous parent {parent:?} of discrete node {node:?}")]
    TypeConstraint { node: String, parent: String },
    #[error("model for {node:?} does not match its kind and parents: {reason}")]
    Taxonomy { node: String, reason: String },
    #[error("data has no rows")]
    Empty,
    #[error(transparent)]
    Dag(#[from] DagError),
    #[error(transparent)]
    Data(#[from] DataError),
}

/// One row of a conditional probability table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CptRow {
    pub config: Vec<u32>,
    pub probabilities: Vec<f64>,
}

/// Conditional probability table over observed discrete-parent configurations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Cpt {
    pub cardinality: usize,
    /// Sorted by `config`.
    pub rows: Vec<CptRow>,
    /// Marginal distribution of the node, used for unseen configurations.
    pub fallback: Vec<f64>,
}

impl Cpt {
    /// The row for `config`, or the fallback and `true` when unseen.
    pub fn row(&self, config: &[u32]) -> (&[f64], bool) {
        match self.rows.binary_search_by(|r| r.config.as_slice().cmp(config)) {
            Ok(i) => (&self.rows[i].probabilities, false),
            Err(_) => (&self.fallback, true),
        }
    }
}

/// `child = intercept + Σ coefficients · parents + N(0, residual_variance)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearGaussian {
    pub intercept: f64,
    pub coefficients: Vec<f64>,
    pub residual_variance: f64,
}

impl LinearGaussian {
    pub fn mean(&self, parents: &[f64]) -> f64 {
        self.intercept
            + self
                .coefficients
                .iter()
                .zip(parents)
                .map(|(b, x)| b * x)
                .sum::<f64>()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClgEntry {
    pub config: Vec<u32>,
    pub model: LinearGaussian,
}

/// One linear Gaussian per observed discrete-parent configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionalLinearGaussian {
    /// Sorted by `config`.
    pub entries: Vec<ClgEntry>,
    /// Pooled fit on the full sample, used for unseen configurations.
    pub fallback: LinearGaussian,
}

impl ConditionalLinearGaussian {
    pub fn entry(&self, config: &[u32]) -> (&LinearGaussian, bool) {
        match self.entries.binary_search_by(|e| e.config.as_slice().cmp(config)) {
            Ok(i) => (&self.entries[i].model, false),
            Err(_) => (&self.fallback, true),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum NodeModel {
    Cpt(Cpt),
    Gaussian { mean: f64, variance: f64 },
    LinearGaussian(LinearGaussian),
    ConditionalLinearGaussian(ConditionalLinearGaussian),
}

/// The distribution of one node given concrete parent values.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Conditional<'a> {
    Categorical(&'a [f64]),
    Normal { mean: f64, variance: f64 },
}

impl Conditional<'_> {
    /// Log mass (categorical) or log density (normal) of an observation.
    pub fn log_density(&self, value: Value) -> f64 {
        match (self, value) {
            (Conditional::Categorical(p), Value::Discrete(c)) => {
                p.get(c as usize).copied().unwrap_or(0.0).ln()
            }
            (Conditional::Normal { mean, variance }, Value::Continuous(x)) => {
                -0.5 * ((2.0 * std::f64::consts::PI * variance).ln() + (x - mean).powi(2) / variance)
            }
            _ => f64::NEG_INFINITY,
        }
    }

    /// Most probable category, or the mean of a normal.
    pub fn mode(&self) -> Value {
        match self {
            Conditional::Categorical(p) => {
                let mut best = 0;
                for (i, &q) in p.iter().enumerate() {
                    if q > p[best] {
                        best = i;
                    }
                }
                Value::Discrete(best as u32)
            }
            Conditional::Normal { mean, .. } => Value::Continuous(*mean),
        }
    }
}

/// A single cell value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Value {
    Discrete(u32),
    Continuous(f64),
}

impl Value {
    pub fn as_f64(&self) -> f64 {
        match *self {
            Value::Discrete(c) => f64::from(c),
            Value::Continuous(x) => x,
        }
    }
}

impl NodeModel {
    /// The conditional given discrete-parent codes and continuous-parent values,
    /// each in ascending parent-index order. The flag reports a fallback.
    pub fn conditional(&self, config: &[u32], continuous: &[f64]) -> (Conditional<'_>, bool) {
        match self {
            NodeModel::Cpt(cpt) => {
                let (row, fallback) = cpt.row(config);
                (Conditional::Categorical(row), fallback)
            }
            NodeModel::Gaussian { mean, variance } => (
                Conditional::Normal {
                    mean: *mean,
                    variance: *variance,
                },
                false,
            ),
            NodeModel::LinearGaussian(lg) => (
                Conditional::Normal {
                    mean: lg.mean(continuous),
                    variance: lg.residual_variance,
                },
                false,
            ),
            NodeModel::ConditionalLinearGaussian(clg) => {
                let (lg, fallback) = clg.entry(config);
                (
                    Conditional::Normal {
                        mean: lg.mean(continuous),
                        variance: lg.residual_variance,
                    },
                    fallback,
                )
            }
        }
    }

    pub fn variant_name(&self) -> &'static str {
        match self {
            NodeModel::Cpt(_) => "cpt",
            NodeModel::Gaussian { .. } => "gaussian",
            NodeModel::LinearGaussian(_) => "linear_gaussian",
            NodeModel::ConditionalLinearGaussian(_) => "conditional_linear_gaussian",
        }
    }

    /// Checks the model against the node kind and its parents' kinds.
    pub fn check_taxonomy(
        &self,
        kind: VariableKind,
        cardinality: usize,
        discrete_parents: &[usize],
        n_continuous_parents: usize,
    ) -> Result<(), String> {
        let check_lg = |lg: &LinearGaussian| -> Result<(), String> {
            if lg.coefficients.len() != n_continuous_parents {
                return Err(format!(
                    "{} coefficients for {} continuous parents",
                    lg.coefficients.len(),
                    n_continuous_parents
                ));
            }
            if !(lg.residual_variance > 0.0 && lg.residual_variance.is_finite()) {
                return Err("residual variance must be positive".into());
            }
            if !lg.intercept.is_finite() || lg.coefficients.iter().any(|c| !c.is_finite()) {
                return Err("non-finite regression parameter".into());
            }
            Ok(())
        };
        let check_row = |p: &[f64]| -> Result<(), String> {
            if p.len() != cardinality {
                return Err(format!("row of length {} for {} categories", p.len(), cardinality));
            }
            if p.iter().any(|&x| !(0.0..=1.0).contains(&x)) {
                return Err("probability outside [0, 1]".into());
            }
            if (p.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
                return Err("probabilities do not sum to 1".into());
            }
            Ok(())
        };
        let check_config = |config: &[u32]| -> Result<(), String> {
            if config.len() != discrete_parents.len() {
                return Err("configuration length differs from discrete parent count".into());
            }
            Ok(())
        };
        match (kind, self) {
            (VariableKind::Discrete, NodeModel::Cpt(cpt)) => {
                if n_continuous_parents > 0 {
                    return Err("discrete node with continuous parents".into());
                }
                if cpt.cardinality != cardinality {
                    return Err("table cardinality differs from the variable".into());
                }
                check_row(&cpt.fallback)?;
                for row in &cpt.rows {
                    check_config(&row.config)?;
                    check_row(&row.probabilities)?;
                }
                if cpt.rows.windows(2).any(|w| w[0].config >= w[1].config) {
                    return Err("table rows not sorted by configuration".into());
                }
                Ok(())
            }
            (VariableKind::Continuous, NodeModel::Gaussian { mean, variance }) => {
                if !discrete_parents.is_empty() || n_continuous_parents > 0 {
                    return Err("Gaussian model on a node with parents".into());
                }
                if !(*variance > 0.0 && variance.is_finite() && mean.is_finite()) {
                    return Err("invalid Gaussian parameters".into());
                }
                Ok(())
            }
            (VariableKind::Continuous, NodeModel::LinearGaussian(lg)) => {
                if !discrete_parents.is_empty() || n_continuous_parents == 0 {
                    return Err("linear Gaussian needs continuous parents only".into());
                }
                check_lg(lg)
            }
            (VariableKind::Continuous, NodeModel::ConditionalLinearGaussian(clg)) => {
                if discrete_parents.is_empty() {
                    return Err("conditional linear Gaussian without discrete parents".into());
                }
                check_lg(&clg.fallback)?;
                for e in &clg.entries {
                    check_config(&e.config)?;
                    check_lg(&e.model)?;
                }
                if clg.entries.windows(2).any(|w| w[0].config >= w[1].config) {
                    return Err("entries not sorted by configuration".into());
                }
                Ok(())
            }
            (kind, model) => Err(format!("{} model on a {kind} node", model.variant_name())),
        }
    }
}

/// Name, kind and category labels of one modelled variable.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Variable {
    pub name: String,
    pub kind: VariableKind,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub labels: Vec<String>,
}

/// Counts of numerical fallbacks taken while fitting.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct FitDiagnostics {
    /// Regressions that needed the ridge fallback (collinear or too few rows).
    pub ridge_fallbacks: usize,
    /// Variances raised to the floor.
    pub floored_variances: usize,
}

/// A DAG with one fitted model per node.
///
/// When `discretization` is non-empty, every variable that has a map and is
/// modelled as discrete stands for binned values of an originally continuous
/// column.
#[derive(Debug, Clone, PartialEq)]
pub struct BayesianNetwork {
    variables: Vec<Variable>,
    dag: Dag,
    models: Vec<NodeModel>,
    discretization: Vec<DiscretizationMap>,
    diagnostics: FitDiagnostics,
}

impl BayesianNetwork {
    /// Assembles a network from parts and validates every invariant.
    pub fn from_parts(
        variables: Vec<Variable>,
        dag: Dag,
        models: Vec<NodeModel>,
        discretization: Vec<DiscretizationMap>,
    ) -> Result<Self, ParamError> {
        let bn = Self {
            variables,
            dag,
            models,
            discretization,
            diagnostics: FitDiagnostics::default(),
        };
        bn.validate()?;
        Ok(bn)
    }

    pub fn validate(&self) -> Result<(), ParamError> {
        let n = self.variables.len();
        if self.dag.n_nodes() != n || self.models.len() != n {
            return Err(ParamError::VariableMismatch);
        }
        for (v, var) in self.variables.iter().enumerate() {
            if self.dag.names()[v] != var.name || self.dag.kind(v) != var.kind {
                return Err(ParamError::VariableMismatch);
            }
            if var.kind == VariableKind::Discrete && var.labels.is_empty() {
                return Err(ParamError::Taxonomy {
                    node: var.name.clone(),
                    reason: "discrete variable without labels".into(),
                });
            }
        }
        self.dag.validate(None)?;
        for v in 0..n {
            let (disc, cont) = self.split_parents(v);
            self.models[v]
                .check_taxonomy(self.variables[v].kind, self.variables[v].labels.len(), &disc, cont.len())
                .map_err(|reason| ParamError::Taxonomy {
                    node: self.variables[v].name.clone(),
                    reason,
                })?;
        }
        for map in &self.discretization {
            if !self.variables.iter().any(|v| v.name == map.column) {
                return Err(ParamError::VariableMismatch);
            }
        }
        Ok(())
    }

    pub fn variables(&self) -> &[Variable] {
        &self.variables
    }

    pub fn dag(&self) -> &Dag {
        &self.dag
    }

    pub fn models(&self) -> &[NodeModel] {
        &self.models
    }

    pub fn model(&self, node: usize) -> &NodeModel {
        &self.models[node]
    }

    pub fn discretization(&self) -> &[DiscretizationMap] {
        &self.discretization
    }

    pub fn diagnostics(&self) -> FitDiagnostics {
        self.diagnostics
    }

    pub fn n_nodes(&self) -> usize {
        self.variables.len()
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.variables.iter().position(|v| v.name == name)
    }

    /// Map that turns original continuous values of `node` into its bins,
    /// when the node is modelled on discretized data.
    pub fn bin_map(&self, node: usize) -> Option<&DiscretizationMap> {
        if self.variables[node].kind != VariableKind::Discrete {
            return None;
        }
        self.discretization
            .iter()
            .find(|m| m.column == self.variables[node].name)
    }

    /// Discrete and continuous parents of `node`, each ascending.
    pub fn split_parents(&self, node: usize) -> (Vec<usize>, Vec<usize>) {
        self.dag
            .parents(node)
            .iter()
            .partition(|&&p| self.variables[p].kind == VariableKind::Discrete)
    }

    /// Conditional distribution of `node` given a full assignment of values
    /// (only its parents are read).
    pub fn conditional(&self, node: usize, values: &[Value]) -> (Conditional<'_>, bool) {
        let (disc, cont) = self.split_parents(node);
        let config: Vec<u32> = disc
            .iter()
            .map(|&p| match values[p] {
                Value::Discrete(c) => c,
                Value::Continuous(_) => unreachable!("discrete parent holds a continuous value"),
            })
            .collect();
        let xs: Vec<f64> = cont.iter().map(|&p| values[p].as_f64()).collect();
        self.models[node].conditional(&config, &xs)
    }

    /// Converts a dataset in the original schema into this network's model
    /// space, binning columns that are modelled on discretized data.
    pub fn encode(&self, data: &Dataset) -> Result<Dataset, ParamError> {
        if data.names() != self.dag.names() {
            return Err(ParamError::VariableMismatch);
        }
        let maps: Vec<DiscretizationMap> = (0..self.n_nodes())
            .filter(|&v| data.kind(v) == VariableKind::Continuous)
            .filter_map(|v| self.bin_map(v).cloned())
            .collect();
        let encoded = apply_discretization(data, &maps)?;
        if encoded.kinds() != self.dag.kinds() {
            return Err(ParamError::VariableMismatch);
        }
        Ok(encoded)
    }

    /// Sum over nodes of [`local_log_likelihood`] on model-space data.
    pub fn log_likelihood(&self, data: &Dataset) -> Result<LogLikelihood, ParamError> {
        if data.names() != self.dag.names() || data.kinds() != self.dag.kinds() {
            return Err(ParamError::VariableMismatch);
        }
        let mut total = LogLikelihood::default();
        for v in 0..self.n_nodes() {
            let ll = local_log_likelihood(&self.models[v], data, v, self.dag.parents(v));
            total.value += ll.value;
            total.fallback_events += ll.fallback_events;
        }
        Ok(total)
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct FitOptions {
    /// Additive (Laplace) smoothing for probability tables; 0 is plain MLE.
    pub laplace_alpha: f64,
}

/// `max(1e-12, 1e-9 · min column variance)` over the continuous columns.
pub fn variance_floor(data: &Dataset) -> f64 {
    let min_var = (0..data.n_cols())
        .filter(|&v| data.kind(v) == VariableKind::Continuous)
        .map(|v| {
            let x = data.values(v);
            let m = x.iter().sum::<f64>() / x.len() as f64;
            x.iter().map(|a| (a - m).powi(2)).sum::<f64>() / x.len() as f64
        })
        .filter(|&s| s > 0.0)
        .fold(f64::INFINITY, f64::min);
    if min_var.is_finite() {
        (min_var * 1e-9).max(VARIANCE_FLOOR_MIN)
    } else {
        VARIANCE_FLOOR_MIN
    }
}

struct NodeFit {
    model: NodeModel,
    diagnostics: FitDiagnostics,
}

/// Fits every node of `dag` by maximum likelihood on `data`.
///
/// The graph's edges are re-read against the data's column kinds, so a
/// structure learned on one representation can be fitted on another as long
/// as no continuous column ends up parenting a discrete one.
pub fn fit_parameters(data: &Dataset, dag: &Dag, options: &FitOptions) -> Result<BayesianNetwork, ParamError> {
    if data.names() != dag.names() {
        return Err(ParamError::VariableMismatch);
    }
    if data.n_rows() == 0 {
        return Err(ParamError::Empty);
    }
    let kinds = data.kinds();
    let typed = Dag::from_edges(data.names().to_vec(), kinds.clone(), &dag.edges()).map_err(|e| match e {
        DagError::TypeConstraint(p, c) => ParamError::TypeConstraint {
            node: data.name(c).to_string(),
            parent: data.name(p).to_string(),
        },
        other => ParamError::Dag(other),
    })?;
    let floor = variance_floor(data);
    let fits: Vec<NodeFit> = (0..data.n_cols())
        .into_par_iter()
        .map(|v| fit_node(data, v, typed.parents(v), floor, options))
        .collect();
    let mut diagnostics = FitDiagnostics::default();
    let mut models = Vec::with_capacity(fits.len());
    for fit in fits {
        diagnostics.ridge_fallbacks += fit.diagnostics.ridge_fallbacks;
        diagnostics.floored_variances += fit.diagnostics.floored_variances;
        models.push(fit.model);
    }
    let variables = (0..data.n_cols())
        .map(|v| Variable {
            name: data.name(v).to_string(),
            kind: kinds[v],
            labels: data.labels(v).to_vec(),
        })
        .collect();
    Ok(BayesianNetwork {
        variables,
        dag: typed,
        models,
        discretization: Vec::new(),
        diagnostics,
    })
}

/// Attaches discretization maps to a network fitted on discretized data.
pub fn with_discretization(mut bn: BayesianNetwork, maps: Vec<DiscretizationMap>) -> BayesianNetwork {
    bn.discretization = maps;
    bn
}

fn grouped_rows(data: &Dataset, discrete_parents: &[usize]) -> Vec<(Vec<u32>, Vec<usize>)> {
    let mut groups: std::collections::BTreeMap<Vec<u32>, Vec<usize>> = std::collections::BTreeMap::new();
    for r in 0..data.n_rows() {
        let config = discrete_parents.iter().map(|&p| data.codes(p)[r]).collect();
        groups.entry(config).or_default().push(r);
    }
    groups.into_iter().collect()
}

fn fit_node(data: &Dataset, node: usize, parents: &[usize], floor: f64, options: &FitOptions) -> NodeFit {
    let (disc, cont): (Vec<usize>, Vec<usize>) = parents
        .iter()
        .partition(|&&p| data.kind(p) == VariableKind::Discrete);
    let mut diagnostics = FitDiagnostics::default();
    let all_rows: Vec<usize> = (0..data.n_rows()).collect();
    let model = match data.kind(node) {
        VariableKind::Discrete => {
            let k = data.cardinality(node);
            let codes = data.codes(node);
            let alpha = options.laplace_alpha;
            let distribution = |rows: &[usize]| {
                let mut counts = vec![0.0; k];
                for &r in rows {
                    counts[codes[r] as usize] += 1.0;
                }
                let total = rows.len() as f64 + alpha * k as f64;
                counts.iter().map(|c| (c + alpha) / total).collect::<Vec<f64>>()
            };
            NodeModel::Cpt(Cpt {
                cardinality: k,
                rows: grouped_rows(data, &disc)
                    .into_iter()
                    .map(|(config, rows)| CptRow {
                        config,
                        probabilities: distribution(&rows),
                    })
                    .collect(),
                fallback: distribution(&all_rows),
            })
        }
        VariableKind::Continuous => {
            let target = data.values(node);
            let predictors: Vec<&[f64]> = cont.iter().map(|&p| data.values(p)).collect();
            let mut regress = |rows: &[usize]| {
                let fit = least_squares(&predictors, target, rows);
                if fit.ridge {
                    diagnostics.ridge_fallbacks += 1;
                }
                let mut variance = fit.residual_variance;
                if !(variance >= floor) {
                    variance = floor;
                    diagnostics.floored_variances += 1;
                }
                LinearGaussian {
                    intercept: fit.intercept,
                    coefficients: fit.coefficients,
                    residual_variance: variance,
                }
            };
            if disc.is_empty() {
                let lg = regress(&all_rows);
                if cont.is_empty() {
                    NodeModel::Gaussian {
                        mean: lg.intercept,
                        variance: lg.residual_variance,
                    }
                } else {
                    NodeModel::LinearGaussian(lg)
                }
            } else {
                let entries = grouped_rows(data, &disc)
                    .into_iter()
                    .map(|(config, rows)| ClgEntry {
                        config,
                        model: regress(&rows),
                    })
                    .collect();
                NodeModel::ConditionalLinearGaussian(ConditionalLinearGaussian {
                    entries,
                    fallback: regress(&all_rows),
                })
            }
        }
    };
    NodeFit { model, diagnostics }
}

/// Log-likelihood of one node's column and how many rows used a fallback.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct LogLikelihood {
    pub value: f64,
    pub fallback_events: usize,
}

/// `Σ_rows ln p(x_node | parents)` under `model`. `parents` must be the
/// node's parent list (any order); `data` must be in model space.
pub fn local_log_likelihood(model: &NodeModel, data: &Dataset, node: usize, parents: &[usize]) -> LogLikelihood {
    let mut parents = parents.to_vec();
    parents.sort_unstable();
    let (disc, cont): (Vec<usize>, Vec<usize>) = parents
        .iter()
        .partition(|&&p| data.kind(p) == VariableKind::Discrete);
    let mut out = LogLikelihood::default();
    let mut config = vec![0u32; disc.len()];
    let mut xs = vec![0.0; cont.len()];
    for r in 0..data.n_rows() {
        for (slot, &p) in config.iter_mut().zip(&disc) {
            *slot = data.codes(p)[r];
        }
        for (slot, &p) in xs.iter_mut().zip(&cont) {
            *slot = data.values(p)[r];
        }
        let (cond, fallback) = model.conditional(&config, &xs);
        if fallback {
            out.fallback_events += 1;
        }
        let value = match data.kind(node) {
            VariableKind::Discrete => Value::Discrete(data.codes(node)[r]),
            VariableKind::Continuous => Value::Continuous(data.values(node)[r]),
        };
        out.value += cond.log_density(value);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::Column;

    fn disc(codes: Vec<u32>, k: usize) -> Column {
        Column::Discrete {
            codes,
            labels: (0..k).map(|i| format!("s{i}")).collect(),
        }
    }

    fn dataset(cols: Vec<Column>) -> Dataset {
        let names = (0..cols.len()).map(|i| format!("v{i}")).collect();
        Dataset::new(names, cols).unwrap()
    }

    #[test]
    fn frequency_mle_for_root_table() {
        let d = dataset(vec![disc(vec![0, 0, 0, 1], 2)]);
        let bn = fit_parameters(&d, &Dag::empty_for(&d), &FitOptions::default()).unwrap();
        match bn.model(0) {
            NodeModel::Cpt(cpt) => {
                assert_eq!(cpt.rows.len(), 1);
                assert_eq!(cpt.rows[0].probabilities, vec![0.75, 0.25]);
            }
            other => panic!("unexpected {other:?}"),
        }
        let ll = local_log_likelihood(bn.model(0), &d, 0, &[]);
        assert!((ll.value - (3.0 * 0.75f64.ln() + 0.25f64.ln())).abs() < 1e-12);
        assert!((ll.value + 2.249_340_578_914_400_6).abs() < 1e-9);
    }

    #[test]
    fn exact_linear_fit_hits_variance_floor() {
        let x: Vec<f64> = (0..20).map(f64::from).collect();
        let y: Vec<f64> = x.iter().map(|v| 2.0 * v + 1.0).collect();
        let d = dataset(vec![Column::Continuous(x), Column::Continuous(y)]);
        let dag = Dag::from_edges(d.names().to_vec(), d.kinds(), &[(0, 1)]).unwrap();
        let bn = fit_parameters(&d, &dag, &FitOptions::default()).unwrap();
        let floor = variance_floor(&d);
        match bn.model(1) {
            NodeModel::LinearGaussian(lg) => {
                assert!((lg.intercept - 1.0).abs() < 1e-10);
                assert!((lg.coefficients[0] - 2.0).abs() < 1e-12);
                assert_eq!(lg.residual_variance, floor);
            }
            other => panic!("unexpected {other:?}"),
        }
        assert!(bn.diagnostics().floored_variances >= 1);
        let ll = local_log_likelihood(bn.model(1), &d, 1, &[0]);
        assert!(ll.value.is_finite() && ll.value > 0.0);
    }

    #[test]
    fn standard_normal_log_density() {
        let m = NodeModel::Gaussian { mean: 0.0, variance: 1.0 };
        let (c, _) = m.conditional(&[], &[]);
        assert!((c.log_density(Value::Continuous(0.0)) + 0.918_938_533_204_672_7).abs() < 1e-12);
    }

    #[test]
    fn taxonomy_by_parent_kinds() {
        let d = dataset(vec![
            disc(vec![0, 1, 0, 1, 0, 1], 2),
            Column::Continuous(vec![0.1, 0.4, 0.2, 0.9, -0.3, 0.5]),
            Column::Continuous(vec![1.0, 2.0, 0.5, 3.1, 0.2, 2.2]),
            Column::Continuous(vec![1.3, 0.2, 0.7, 0.1, 0.9, 0.4]),
        ]);
        let dag = Dag::from_edges(d.names().to_vec(), d.kinds(), &[(0, 2), (1, 2), (1, 3)]).unwrap();
        let bn = fit_parameters(&d, &dag, &FitOptions::default()).unwrap();
        assert_eq!(bn.model(0).variant_name(), "cpt");
        assert_eq!(bn.model(1).variant_name(), "gaussian");
        assert_eq!(bn.model(2).variant_name(), "conditional_linear_gaussian");
        assert_eq!(bn.model(3).variant_name(), "linear_gaussian");
        bn.validate().unwrap();
    }

    #[test]
    fn continuous_parent_of_discrete_is_rejected() {
        let d = dataset(vec![Column::Continuous(vec![0.0, 1.0]), disc(vec![0, 1], 2)]);
        let mut dag = Dag::empty(d.names().to_vec(), vec![VariableKind::Discrete; 2]);
        dag.add_edge(0, 1).unwrap();
        assert!(matches!(
            fit_parameters(&d, &dag, &FitOptions::default()),
            Err(ParamError::TypeConstraint { .. })
        ));
    }

    #[test]
    fn unseen_configuration_uses_fallback() {
        let d = dataset(vec![disc(vec![0, 0, 0, 0], 2), disc(vec![0, 1, 1, 1], 2)]);
        let dag = Dag::from_edges(d.names().to_vec(), d.kinds(), &[(0, 1)]).unwrap();
        let bn = fit_parameters(&d, &dag, &FitOptions::default()).unwrap();
        let (c, fallback) = bn.conditional(1, &[Value::Discrete(1), Value::Discrete(0)]);
        assert!(fallback);
        assert_eq!(c, Conditional::Categorical(&[0.25, 0.75]));
    }

    #[test]
    fn laplace_smoothing() {
        let d = dataset(vec![disc(vec![0, 0, 0, 0], 2)]);
        let bn = fit_parameters(&d, &Dag::empty_for(&d), &FitOptions { laplace_alpha: 1.0 }).unwrap();
        let (c, _) = bn.conditional(0, &[Value::Discrete(0)]);
        assert_eq!(c, Conditional::Categorical(&[5.0 / 6.0, 1.0 / 6.0]));
    }

    #[test]
    fn mode_picks_argmax() {
        let p = [0.99, 0.01];
        assert_eq!(Conditional::Categorical(&p).mode(), Value::Discrete(0));
    }

    #[test]
    fn taxonomy_violations_are_reported() {
        let m = NodeModel::Gaussian { mean: 0.0, variance: 1.0 };
        assert!(m.check_taxonomy(VariableKind::Discrete, 2, &[], 0).is_err());
        assert!(m.check_taxonomy(VariableKind::Continuous, 0, &[], 1).is_err());
        let cpt = NodeModel::Cpt(Cpt {
            cardinality: 2,
            rows: vec![],
            fallback: vec![0.6, 0.6],
        });
        assert!(cpt.check_taxonomy(VariableKind::Discrete, 2, &[], 0).is_err());
    }
}
