//! Forward sampling and sampling-based gap filling.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dataset::{Column, Dataset, VariableKind};
use crate::parameters::{BayesianNetwork, Conditional, ParamError, Value};

#[derive(Debug, Error)]
pub enum InferenceError {
    #[error("test data does not match the network: {0}")]
    SchemaMismatch(String),
    #[error("row has {got} cells, network has {expected} variables")]
    RowLength { expected: usize, got: usize },
    #[error("observed value for {0:?} does not match its kind")]
    KindMismatch(String),
    #[error(transparent)]
    Params(#[from] ParamError),
}

/// How a missing cell is filled.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ImputeStrategy {
    /// One draw from the node's conditional.
    #[default]
    Sample,
    /// Most probable category, or the conditional mean for continuous nodes.
    Mode,
}

impl std::str::FromStr for ImputeStrategy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "sample" => Ok(ImputeStrategy::Sample),
            "mode" | "mean" => Ok(ImputeStrategy::Mode),
            other => Err(format!("unknown strategy {other:?}")),
        }
    }
}

/// Observed values with gaps, in network variable order.
pub type PartialRow = Vec<Option<Value>>;

fn draw<R: Rng>(cond: &Conditional<'_>, rng: &mut R) -> Value {
    match *cond {
        Conditional::Categorical(p) => {
            let u: f64 = rng.random();
            let mut acc = 0.0;
            for (i, q) in p.iter().enumerate() {
                acc += q;
                if u < acc {
                    return Value::Discrete(i as u32);
                }
            }
            // rounding left u above the total; take the last category with mass
            let last = p.iter().rposition(|&q| q > 0.0).unwrap_or(0);
            Value::Discrete(last as u32)
        }
        Conditional::Normal { mean, variance } => {
            let normal = Normal::new(mean, variance.sqrt()).expect("finite positive variance");
            Value::Continuous(normal.sample(rng))
        }
    }
}

/// `n` joint samples in topological order from a single seeded stream.
///
/// Discrete nodes draw from their table row, continuous nodes from their
/// (conditional) linear Gaussian with parents substituted. Networks fitted on
/// discretized data emit bin labels for the binned columns.
pub fn forward_sample(bn: &BayesianNetwork, n: usize, seed: u64) -> Dataset {
    let order = bn.dag().topological_order().expect("validated network is acyclic");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let p = bn.n_nodes();
    let mut columns: Vec<Vec<Value>> = vec![Vec::with_capacity(n); p];
    let mut row = vec![Value::Discrete(0); p];
    for _ in 0..n {
        for &v in &order {
            let (cond, _) = bn.conditional(v, &row);
            row[v] = draw(&cond, &mut rng);
        }
        for (col, value) in columns.iter_mut().zip(&row) {
            col.push(*value);
        }
    }
    let cols = columns
        .into_iter()
        .zip(bn.variables())
        .map(|(values, var)| match var.kind {
            VariableKind::Discrete => Column::Discrete {
                codes: values
                    .iter()
                    .map(|v| match v {
                        Value::Discrete(c) => *c,
                        Value::Continuous(_) => unreachable!(),
                    })
                    .collect(),
                labels: var.labels.clone(),
            },
            VariableKind::Continuous => Column::Continuous(values.iter().map(Value::as_f64).collect()),
        })
        .collect();
    let names = bn.variables().iter().map(|v| v.name.clone()).collect();
    Dataset::new(names, cols).expect("sampled columns are consistent")
}

/// A completed row and how many cells fell back to a marginal model.
#[derive(Debug, Clone, PartialEq)]
pub struct Imputed {
    pub values: Vec<Value>,
    pub fallback_events: usize,
    pub imputed_cells: usize,
}

/// Fills the gaps of `row` (network model space) in topological order, so a
/// missing parent is imputed before its children read it.
pub fn impute<R: Rng>(
    bn: &BayesianNetwork,
    row: &PartialRow,
    strategy: ImputeStrategy,
    rng: &mut R,
) -> Result<Imputed, InferenceError> {
    if row.len() != bn.n_nodes() {
        return Err(InferenceError::RowLength {
            expected: bn.n_nodes(),
            got: row.len(),
        });
    }
    let mut values = Vec::with_capacity(row.len());
    for (cell, var) in row.iter().zip(bn.variables()) {
        let v = match cell {
            Some(value) => {
                let ok = matches!(
                    (value, var.kind),
                    (Value::Discrete(c), VariableKind::Discrete) if (*c as usize) < var.labels.len()
                ) || matches!((value, var.kind), (Value::Continuous(x), VariableKind::Continuous) if x.is_finite());
                if !ok {
                    return Err(InferenceError::KindMismatch(var.name.clone()));
                }
                *value
            }
            None => Value::Discrete(0),
        };
        values.push(v);
    }
    let mut out = Imputed {
        values,
        fallback_events: 0,
        imputed_cells: 0,
    };
    if row.iter().all(Option::is_some) {
        return Ok(out);
    }
    for v in bn.dag().topological_order().expect("validated network is acyclic") {
        if row[v].is_some() {
            continue;
        }
        let (cond, fallback) = bn.conditional(v, &out.values);
        if fallback {
            out.fallback_events += 1;
        }
        out.values[v] = match strategy {
            ImputeStrategy::Sample => draw(&cond, rng),
            ImputeStrategy::Mode => cond.mode(),
        };
        out.imputed_cells += 1;
    }
    Ok(out)
}

/// Restoration quality measure for one variable.
/// Imputes many rows, each with its own draw stream derived from
/// `(seed, row index)`, so results do not depend on scheduling.
pub fn impute_rows(
    bn: &BayesianNetwork,
    rows: &[PartialRow],
    strategy: ImputeStrategy,
    seed: u64,
) -> Result<Vec<Imputed>, InferenceError> {
    rows.par_iter()
        .enumerate()
        .map(|(r, row)| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(r as u64);
            impute(bn, row, strategy, &mut rng)
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MetricKind {
    Accuracy,
    Rmse,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VariableMetric {
    pub name: String,
    pub metric: MetricKind,
    pub value: f64,
    pub imputed: usize,
    pub fallback_events: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImputationReport {
    pub variables: Vec<VariableMetric>,
}

impl ImputationReport {
    pub fn get(&self, name: &str) -> Option<&VariableMetric> {
        self.variables.iter().find(|m| m.name == name)
    }
}

/// Per-cell draw stream derived from (seed, variable, row).
fn cell_rng(seed: u64, var: usize, row: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((var as u64) << 32) | row as u64);
    rng
}

/// Deletes each cell of `test` in turn, restores it from the network and
/// scores the restoration: exact-match rate for discrete variables and RMSE
/// for continuous ones.
///
/// `test` is in the original schema. A continuous column that the network
/// models as bins is encoded for the parents' sake, and the imputed bin is
/// decoded to the bin's training mean before the error is taken.
pub fn evaluate_restoration(
    bn: &BayesianNetwork,
    test: &Dataset,
    strategy: ImputeStrategy,
    seed: u64,
) -> Result<ImputationReport, InferenceError> {
    if test.names() != bn.dag().names() {
        return Err(InferenceError::SchemaMismatch("column names differ".into()));
    }
    let encoded = bn
        .encode(test)
        .map_err(|e| InferenceError::SchemaMismatch(e.to_string()))?;
    let rows: Vec<Vec<Value>> = (0..encoded.n_rows())
        .map(|r| {
            (0..encoded.n_cols())
                .map(|v| match encoded.kind(v) {
                    VariableKind::Discrete => Value::Discrete(encoded.codes(v)[r]),
                    VariableKind::Continuous => Value::Continuous(encoded.values(v)[r]),
                })
                .collect()
        })
        .collect();

    let variables = (0..bn.n_nodes())
        .map(|v| {
            let per_row: Vec<(f64, usize)> = rows
                .par_iter()
                .enumerate()
                .map(|(r, full)| {
                    let mut partial: PartialRow = full.iter().copied().map(Some).collect();
                    partial[v] = None;
                    let mut rng = cell_rng(seed, v, r);
                    let imputed = impute(bn, &partial, strategy, &mut rng).expect("row matches network");
                    let guess = imputed.values[v];
                    let err = match test.kind(v) {
                        VariableKind::Discrete => {
                            if guess == full[v] {
                                1.0
                            } else {
                                0.0
                            }
                        }
                        VariableKind::Continuous => {
                            let truth = test.values(v)[r];
                            let estimate = match (guess, bn.bin_map(v)) {
                                (Value::Discrete(bin), Some(map)) => map.decode(bin),
                                (value, _) => value.as_f64(),
                            };
                            (estimate - truth).powi(2)
                        }
                    };
                    (err, imputed.fallback_events)
                })
                .collect();
            let m = per_row.len().max(1) as f64;
            let total: f64 = per_row.iter().map(|(e, _)| e).sum();
            let (metric, value) = match test.kind(v) {
                VariableKind::Discrete => (MetricKind::Accuracy, total / m),
                VariableKind::Continuous => (MetricKind::Rmse, (total / m).sqrt()),
            };
            VariableMetric {
                name: test.name(v).to_string(),
                metric,
                value,
                imputed: per_row.len(),
                fallback_events: per_row.iter().map(|(_, f)| f).sum(),
            }
        })
        .collect();
    Ok(ImputationReport { variables })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dag::Dag;
    use crate::parameters::{fit_parameters, FitOptions};

    fn dataset(names: &[&str], cols: Vec<Column>) -> Dataset {
        Dataset::new(names.iter().map(|s| s.to_string()).collect(), cols).unwrap()
    }

    #[test]
    fn complete_row_is_unchanged() {
        let d = dataset(&["a"], vec![Column::Continuous(vec![1.0, 2.0, 3.0])]);
        let bn = fit_parameters(&d, &Dag::empty_for(&d), &FitOptions::default()).unwrap();
        let row = vec![Some(Value::Continuous(7.5))];
        let out = impute(&bn, &row, ImputeStrategy::Sample, &mut ChaCha8Rng::seed_from_u64(0)).unwrap();
        assert_eq!(out.values, vec![Value::Continuous(7.5)]);
        assert_eq!(out.imputed_cells, 0);
    }

    #[test]
    fn mode_strategy_on_skewed_table() {
        let mut codes = vec![0u32; 99];
        codes.push(1);
        let d = dataset(
            &["d"],
            vec![Column::Discrete {
                codes,
                labels: vec!["a".into(), "b".into()],
            }],
        );
        let bn = fit_parameters(&d, &Dag::empty_for(&d), &FitOptions::default()).unwrap();
        for seed in 0..5 {
            let out = impute(&bn, &vec![None], ImputeStrategy::Mode, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap();
            assert_eq!(out.values, vec![Value::Discrete(0)]);
        }
    }

    #[test]
    fn wrong_row_shape_is_rejected() {
        let d = dataset(&["a"], vec![Column::Continuous(vec![1.0, 2.0])]);
        let bn = fit_parameters(&d, &Dag::empty_for(&d), &FitOptions::default()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert!(matches!(
            impute(&bn, &vec![None, None], ImputeStrategy::Sample, &mut rng),
            Err(InferenceError::RowLength { .. })
        ));
        assert!(matches!(
            impute(&bn, &vec![Some(Value::Discrete(0))], ImputeStrategy::Sample, &mut rng),
            Err(InferenceError::KindMismatch(_))
        ));
    }

    #[test]
    fn constant_discrete_column_restores_perfectly() {
        let d = dataset(
            &["d", "x"],
            vec![
                Column::Discrete {
                    codes: vec![0; 20],
                    labels: vec!["only".into()],
                },
                Column::Continuous((0..20).map(f64::from).collect()),
            ],
        );
        let bn = fit_parameters(&d, &Dag::empty_for(&d), &FitOptions::default()).unwrap();
        let report = evaluate_restoration(&bn, &d, ImputeStrategy::Sample, 3).unwrap();
        assert_eq!(report.get("d").unwrap().value, 1.0);
        assert_eq!(report.get("d").unwrap().metric, MetricKind::Accuracy);
    }

    #[test]
    fn schema_mismatch_is_reported() {
        let d = dataset(&["a"], vec![Column::Continuous(vec![1.0, 2.0])]);
        let bn = fit_parameters(&d, &Dag::empty_for(&d), &FitOptions::default()).unwrap();
        let other = dataset(&["b"], vec![Column::Continuous(vec![1.0, 2.0])]);
        assert!(matches!(
            evaluate_restoration(&bn, &other, ImputeStrategy::Sample, 0),
            Err(InferenceError::SchemaMismatch(_))
        ));
    }
}
