//! Entropy and mutual-information estimators for mixed data, and the
//! decomposable local/network scores built on them.
//!
//! Continuous blocks are approximated by multivariate Gaussians, so their
//! differential entropy is `½ ln|2πeΣ|`. A discrete block splits the sample
//! into groups, one per observed configuration, and a continuous block
//! conditioned on it contributes `Σ_j P(y_j) · ½ ln|2πeΣ_j|` with `Σ_j` the
//! MLE covariance inside group `j`.
//!
//! The joint entropy of a mixed set `{C, D}` is `H(D) + H(C | D)`. Mutual
//! information between two sets is `H(A) + H(B) - H(A ∪ B)`; for a node `X`
//! and its parents this is the information the parents carry about `X`.
//!
//! All values are in nats.

use std::collections::HashMap;
use std::f64::consts::{E, PI};
use std::fmt;
use std::str::FromStr;
use std::sync::atomic::{AtomicUsize, Ordering};

use dashmap::DashMap;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dag::{Dag, DagError};
use crate::dataset::{Dataset, VariableKind};
use crate::linalg::{covariance, log_det_stabilized, SymMatrix};

/// Default smallest admissible discrete-parent group.
pub const DEFAULT_MIN_GROUP_SIZE: usize = 2;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ScoreError {
    #[error("empty input")]
    Empty,
    #[error("columns have different lengths")]
    LengthMismatch,
    #[error("variable {0} out of range")]
    UnknownVariable(usize),
    #[error("node {0} listed among its own parents")]
    SelfParent(usize),
    #[error("discrete configuration {config:?} has {count} rows, below the admissible group size {required}")]
    SingletonGroup { config: Vec<u32>, count: usize, required: usize },
    #[error(transparent)]
    Dag(#[from] DagError),
}

/// Plug-in entropy `-Σ p̂ ln p̂` of the joint configuration of one or more
/// discrete columns.
pub fn discrete_entropy(columns: &[&[u32]]) -> Result<f64, ScoreError> {
    let n = columns.first().ok_or(ScoreError::Empty)?.len();
    if n == 0 {
        return Err(ScoreError::Empty);
    }
    if columns.iter().any(|c| c.len() != n) {
        return Err(ScoreError::LengthMismatch);
    }
    let rows: Vec<usize> = (0..n).collect();
    let groups = group_rows(columns, &rows);
    Ok(entropy_of_counts(groups.members.iter().map(Vec::len), n))
}

fn entropy_of_counts(counts: impl Iterator<Item = usize>, n: usize) -> f64 {
    let n = n as f64;
    -counts
        .filter(|&c| c > 0)
        .map(|c| {
            let p = c as f64 / n;
            p * p.ln()
        })
        .sum::<f64>()
}

/// Differential entropy of a Gaussian with covariance `Σ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EntropyEstimate {
    pub value: f64,
    /// Set when the log-determinant needed diagonal jitter.
    pub jittered: bool,
}

/// `½ ln|2πeΣ| = ½ (d ln(2πe) + ln det Σ)` with a stabilized log-determinant.
pub fn gaussian_entropy(covariance: &SymMatrix) -> EntropyEstimate {
    let d = covariance.dim() as f64;
    let ld = log_det_stabilized(covariance);
    EntropyEstimate {
        value: 0.5 * (d * (2.0 * PI * E).ln() + ld.value),
        jittered: ld.jittered(),
    }
}

/// Rows grouped by joint discrete configuration, in first-appearance order.
struct Groups {
    members: Vec<Vec<usize>>,
}

fn group_rows(columns: &[&[u32]], rows: &[usize]) -> Groups {
    if columns.is_empty() {
        return Groups {
            members: vec![rows.to_vec()],
        };
    }
    // Re-densify after each column so keys never overflow.
    let mut keys: Vec<u64> = rows.iter().map(|&r| u64::from(columns[0][r])).collect();
    for col in &columns[1..] {
        let card = rows.iter().map(|&r| col[r]).max().map_or(1, |m| u64::from(m) + 1);
        let mut dense: HashMap<u64, u64> = HashMap::new();
        for (key, &r) in keys.iter_mut().zip(rows) {
            let combined = *key * card + u64::from(col[r]);
            let next = dense.len() as u64;
            *key = *dense.entry(combined).or_insert(next);
        }
    }
    let mut index: HashMap<u64, usize> = HashMap::new();
    let mut members: Vec<Vec<usize>> = Vec::new();
    for (&key, &r) in keys.iter().zip(rows) {
        let g = *index.entry(key).or_insert_with(|| {
            members.push(Vec::new());
            members.len() - 1
        });
        members[g].push(r);
    }
    Groups { members }
}

/// Per-configuration statistics of a continuous block split by a discrete block.
#[derive(Debug, Clone, PartialEq)]
pub struct GroupStats {
    /// Codes of the discrete variables, in the order they were requested.
    pub config: Vec<u32>,
    pub probability: f64,
    /// MLE covariance of the continuous block; `None` when the block is empty.
    pub covariance: Option<SymMatrix>,
    pub count: usize,
}

/// Splits the full sample by the joint configuration of `discrete` and
/// summarizes `continuous` inside each group.
pub fn group_stats(data: &Dataset, continuous: &[usize], discrete: &[usize]) -> Vec<GroupStats> {
    let rows: Vec<usize> = (0..data.n_rows()).collect();
    let disc_cols: Vec<&[u32]> = discrete.iter().map(|&v| data.codes(v)).collect();
    let cont_cols: Vec<&[f64]> = continuous.iter().map(|&v| data.values(v)).collect();
    let n = data.n_rows() as f64;
    group_rows(&disc_cols, &rows)
        .members
        .into_iter()
        .map(|members| GroupStats {
            config: disc_cols.iter().map(|c| c[members[0]]).collect(),
            probability: members.len() as f64 / n,
            covariance: (!cont_cols.is_empty()).then(|| covariance(&cont_cols, &members)),
            count: members.len(),
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
struct JointEntropy {
    value: f64,
    jittered: bool,
    /// First (config, count) whose group was too small; such groups use the
    /// full-sample covariance instead.
    small_group: Option<(Vec<u32>, usize)>,
}

/// Smallest admissible group for a continuous block of dimension `dim`.
/// A group needs more rows than dimensions for a non-singular covariance.
fn required_group_size(min_group_size: usize, dim: usize) -> usize {
    min_group_size.max(dim + 1)
}

/// `H(D) + Σ_j P(d_j) H(C | D = d_j)` for an arbitrary variable set.
fn joint_entropy(data: &Dataset, vars: &[usize], min_group_size: usize) -> JointEntropy {
    let (cont, disc): (Vec<usize>, Vec<usize>) = vars
        .iter()
        .partition(|&&v| data.kind(v) == VariableKind::Continuous);
    let n = data.n_rows();
    let rows: Vec<usize> = (0..n).collect();
    let disc_cols: Vec<&[u32]> = disc.iter().map(|&v| data.codes(v)).collect();
    let cont_cols: Vec<&[f64]> = cont.iter().map(|&v| data.values(v)).collect();
    let groups = group_rows(&disc_cols, &rows);

    let mut value = if disc.is_empty() {
        0.0
    } else {
        entropy_of_counts(groups.members.iter().map(Vec::len), n)
    };
    let mut jittered = false;
    let mut small_group = None;
    if !cont.is_empty() {
        let required = required_group_size(min_group_size, cont.len());
        let mut full: Option<EntropyEstimate> = None;
        for members in &groups.members {
            let p = members.len() as f64 / n as f64;
            let h = if members.len() < required && !disc.is_empty() {
                if small_group.is_none() {
                    let config = disc_cols.iter().map(|c| c[members[0]]).collect();
                    small_group = Some((config, members.len()));
                }
                *full.get_or_insert_with(|| gaussian_entropy(&covariance(&cont_cols, &rows)))
            } else {
                gaussian_entropy(&covariance(&cont_cols, members))
            };
            jittered |= h.jittered;
            value += p * h.value;
        }
    }
    JointEntropy {
        value,
        jittered,
        small_group,
    }
}

/// A mutual-information value and whether any log-determinant needed jitter.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MiEstimate {
    pub value: f64,
    pub jittered: bool,
}

/// Mutual information of a variable block.
///
/// * one variable: its entropy (`MI(X) = H(X)`);
/// * only continuous variables: the Gaussian entropy of the full-sample covariance;
/// * only discrete variables: classical plug-in `MI(first; rest)`;
/// * mixed: `H(C) - Σ_j P(y_j) H(C | Y = y_j)` with `C` the continuous and `Y`
///   the discrete part.
///
/// A discrete configuration with fewer rows than the admissible group size is
/// an error, since its conditional differential entropy is unbounded.
pub fn mixed_mi(data: &Dataset, block: &[usize], min_group_size: usize) -> Result<MiEstimate, ScoreError> {
    if block.is_empty() {
        return Err(ScoreError::Empty);
    }
    if let Some(&v) = block.iter().find(|&&v| v >= data.n_cols()) {
        return Err(ScoreError::UnknownVariable(v));
    }
    if data.n_rows() == 0 {
        return Err(ScoreError::Empty);
    }
    let (cont, disc): (Vec<usize>, Vec<usize>) = block
        .iter()
        .partition(|&&v| data.kind(v) == VariableKind::Continuous);
    let entropy = |vars: &[usize]| joint_entropy(data, vars, min_group_size);

    if block.len() == 1 || disc.is_empty() {
        let h = entropy(block);
        return Ok(MiEstimate {
            value: h.value,
            jittered: h.jittered,
        });
    }
    if cont.is_empty() {
        let (a, b, ab) = (entropy(&block[..1]), entropy(&block[1..]), entropy(block));
        return Ok(MiEstimate {
            value: a.value + b.value - ab.value,
            jittered: false,
        });
    }
    let h_c = entropy(&cont);
    let h_d = entropy(&disc);
    let h_cd = entropy(block);
    if let Some((config, count)) = h_cd.small_group {
        return Err(ScoreError::SingletonGroup {
            config,
            count,
            required: required_group_size(min_group_size, cont.len()),
        });
    }
    // H(C|D) = H(C,D) - H(D)
    Ok(MiEstimate {
        value: h_c.value - (h_cd.value - h_d.value),
        jittered: h_c.jittered || h_cd.jittered,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScoreKind {
    /// `H(X) + MI(X; Π)`, per observation.
    Mi,
    /// `MI(X; Π)`: the log-likelihood gain over the parentless model, per observation.
    Ll,
    /// `n · LL - (k/2) ln n`, total over the sample.
    Bic,
    /// `n · LL - k`, total over the sample.
    Aic,
}

impl fmt::Display for ScoreKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ScoreKind::Mi => "mi",
            ScoreKind::Ll => "ll",
            ScoreKind::Bic => "bic",
            ScoreKind::Aic => "aic",
        })
    }
}

impl FromStr for ScoreKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "mi" => Ok(ScoreKind::Mi),
            "ll" => Ok(ScoreKind::Ll),
            "bic" => Ok(ScoreKind::Bic),
            "aic" => Ok(ScoreKind::Aic),
            other => Err(format!("unknown score kind {other:?}")),
        }
    }
}

/// A node and its sorted, duplicate-free parent set; the canonical cache key.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ParentSet {
    node: usize,
    parents: Vec<usize>,
}

impl ParentSet {
    pub fn new(node: usize, mut parents: Vec<usize>) -> Result<Self, ScoreError> {
        if parents.contains(&node) {
            return Err(ScoreError::SelfParent(node));
        }
        parents.sort_unstable();
        parents.dedup();
        Ok(Self { node, parents })
    }

    pub fn node(&self) -> usize {
        self.node
    }

    pub fn parents(&self) -> &[usize] {
        &self.parents
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LocalScore {
    pub value: f64,
    pub kind: ScoreKind,
    /// The parent set produced an inadmissible group; `value` must not be used.
    pub rejected: bool,
    pub jittered: bool,
}

/// Settings shared by every score evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScoreOptions {
    pub min_group_size: usize,
}

impl Default for ScoreOptions {
    fn default() -> Self {
        Self {
            min_group_size: DEFAULT_MIN_GROUP_SIZE,
        }
    }
}

/// Memo of local scores keyed by canonical parent set.
#[derive(Debug, Default)]
pub struct ScoreCache {
    local: DashMap<ParentSet, LocalScore>,
    entropy: DashMap<Vec<usize>, JointEntropy>,
}

impl ScoreCache {
    pub fn len(&self) -> usize {
        self.local.len()
    }

    pub fn is_empty(&self) -> bool {
        self.local.is_empty()
    }
}

/// Evaluates one score kind over a fixed dataset, with an optional cache.
///
/// The scorer is `Sync`; concurrent callers may compute the same key twice,
/// which is harmless because evaluation is pure.
#[derive(Debug)]
pub struct Scorer<'a> {
    data: &'a Dataset,
    kind: ScoreKind,
    options: ScoreOptions,
    cache: Option<ScoreCache>,
    jitter_events: AtomicUsize,
    evaluations: AtomicUsize,
}

impl<'a> Scorer<'a> {
    pub fn new(data: &'a Dataset, kind: ScoreKind, options: ScoreOptions) -> Self {
        Self {
            data,
            kind,
            options,
            cache: Some(ScoreCache::default()),
            jitter_events: AtomicUsize::new(0),
            evaluations: AtomicUsize::new(0),
        }
    }

    pub fn uncached(data: &'a Dataset, kind: ScoreKind, options: ScoreOptions) -> Self {
        Self {
            cache: None,
            ..Self::new(data, kind, options)
        }
    }

    pub fn data(&self) -> &'a Dataset {
        self.data
    }

    pub fn kind(&self) -> ScoreKind {
        self.kind
    }

    pub fn options(&self) -> ScoreOptions {
        self.options
    }

    /// Number of local-score evaluations that needed log-determinant jitter.
    pub fn jitter_events(&self) -> usize {
        self.jitter_events.load(Ordering::Relaxed)
    }

    /// Number of local scores actually computed (cache misses).
    pub fn evaluations(&self) -> usize {
        self.evaluations.load(Ordering::Relaxed)
    }

    pub fn cache_len(&self) -> usize {
        self.cache.as_ref().map_or(0, ScoreCache::len)
    }

    fn entropy(&self, vars: &[usize]) -> JointEntropy {
        let compute = || joint_entropy(self.data, vars, self.options.min_group_size);
        match &self.cache {
            Some(cache) => {
                if let Some(hit) = cache.entropy.get(vars) {
                    return hit.clone();
                }
                let h = compute();
                cache.entropy.insert(vars.to_vec(), h.clone());
                h
            }
            None => compute(),
        }
    }

    /// Number of free parameters of the local conditional model.
    fn parameter_count(&self, ps: &ParentSet) -> f64 {
        let q: f64 = ps
            .parents
            .iter()
            .filter(|&&p| self.data.kind(p) == VariableKind::Discrete)
            .map(|&p| self.data.cardinality(p).max(1) as f64)
            .product();
        let c = ps
            .parents
            .iter()
            .filter(|&&p| self.data.kind(p) == VariableKind::Continuous)
            .count() as f64;
        match self.data.kind(ps.node) {
            VariableKind::Continuous => q * (c + 2.0),
            VariableKind::Discrete => {
                let k = self.data.cardinality(ps.node).max(1) as f64;
                q * (k - 1.0) * (c + 1.0)
            }
        }
    }

    /// Local score of `ps` under this scorer's kind.
    pub fn local_score(&self, ps: &ParentSet) -> Result<LocalScore, ScoreError> {
        let n_cols = self.data.n_cols();
        if ps.node >= n_cols {
            return Err(ScoreError::UnknownVariable(ps.node));
        }
        if let Some(&p) = ps.parents.iter().find(|&&p| p >= n_cols) {
            return Err(ScoreError::UnknownVariable(p));
        }
        if let Some(cache) = &self.cache {
            if let Some(hit) = cache.local.get(ps) {
                return Ok(*hit);
            }
        }
        let score = self.compute_local(ps);
        if let Some(cache) = &self.cache {
            cache.local.insert(ps.clone(), score);
        }
        Ok(score)
    }

    fn compute_local(&self, ps: &ParentSet) -> LocalScore {
        self.evaluations.fetch_add(1, Ordering::Relaxed);
        let h_x = self.entropy(&[ps.node]);
        let (info, jittered, small) = if ps.parents.is_empty() {
            (0.0, h_x.jittered, false)
        } else {
            let mut all = ps.parents.clone();
            all.push(ps.node);
            all.sort_unstable();
            let h_p = self.entropy(&ps.parents);
            let h_all = self.entropy(&all);
            (
                h_x.value + h_p.value - h_all.value,
                h_x.jittered || h_p.jittered || h_all.jittered,
                h_p.small_group.is_some() || h_all.small_group.is_some(),
            )
        };
        if jittered {
            self.jitter_events.fetch_add(1, Ordering::Relaxed);
        }
        let n = self.data.n_rows() as f64;
        let (value, rejected) = match self.kind {
            ScoreKind::Mi => (h_x.value + info, small),
            ScoreKind::Ll => (info, small),
            ScoreKind::Bic => (n * info - 0.5 * self.parameter_count(ps) * n.ln(), false),
            ScoreKind::Aic => (n * info - self.parameter_count(ps), false),
        };
        LocalScore {
            value,
            kind: self.kind,
            rejected,
            jittered,
        }
    }

    /// Convenience wrapper around [`Scorer::local_score`].
    pub fn local(&self, node: usize, parents: &[usize]) -> Result<LocalScore, ScoreError> {
        self.local_score(&ParentSet::new(node, parents.to_vec())?)
    }

    /// Sum of local scores over every node of `dag`.
    pub fn network_score(&self, dag: &Dag) -> Result<ScoredNetwork, ScoreError> {
        dag.topological_order()?;
        let local = (0..dag.n_nodes())
            .map(|v| self.local(v, dag.parents(v)))
            .collect::<Result<Vec<_>, _>>()?;
        let rejected = local.iter().any(|s| s.rejected);
        let total = if rejected {
            f64::NEG_INFINITY
        } else {
            local.iter().map(|s| s.value).sum()
        };
        Ok(ScoredNetwork {
            dag: dag.clone(),
            total,
            local,
            rejected,
        })
    }
}

/// A DAG with its total and per-node scores. A rejected network has total `-inf`.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoredNetwork {
    pub dag: Dag,
    pub total: f64,
    pub local: Vec<LocalScore>,
    pub rejected: bool,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::Column;

    fn disc(codes: Vec<u32>, k: usize) -> Column {
        Column::Discrete {
            codes,
            labels: (0..k).map(|i| i.to_string()).collect(),
        }
    }

    fn dataset(cols: Vec<Column>) -> Dataset {
        let names = (0..cols.len()).map(|i| format!("v{i}")).collect();
        Dataset::new(names, cols).unwrap()
    }

    #[test]
    fn discrete_entropy_cases() {
        let fair: Vec<u32> = (0..1000).map(|i| i % 2).collect();
        assert!((discrete_entropy(&[&fair]).unwrap() - 2f64.ln()).abs() < 1e-12);
        assert_eq!(discrete_entropy(&[&[3, 3, 3]]).unwrap(), 0.0);
        let h = discrete_entropy(&[&[0, 0, 0, 1]]).unwrap();
        assert!((h - 0.562_335_144_618_64).abs() < 1e-12);
        assert_eq!(discrete_entropy(&[]), Err(ScoreError::Empty));
        assert_eq!(discrete_entropy(&[&[]]), Err(ScoreError::Empty));
        assert_eq!(discrete_entropy(&[&[0, 1], &[0]]), Err(ScoreError::LengthMismatch));
    }

    #[test]
    fn gaussian_entropy_closed_forms() {
        let c = (2.0 * PI * E).ln();
        let one = gaussian_entropy(&SymMatrix::identity(1));
        assert!((one.value - 0.5 * c).abs() < 1e-12);
        assert!((one.value - 1.418_938_533_204_672_7).abs() < 1e-12);
        let two = gaussian_entropy(&SymMatrix::identity(2));
        assert!((two.value - c).abs() < 1e-12);
        let diag = gaussian_entropy(&SymMatrix::from_diagonal(&[4.0, 1.0]).unwrap());
        assert!((diag.value - (c + 0.5 * 4f64.ln())).abs() < 1e-12);
        assert!((diag.value - 3.531_024_246_969_290_7).abs() < 1e-12);
    }

    #[test]
    fn mixed_mi_perfect_discrete_dependence() {
        let x: Vec<u32> = (0..100).map(|i| i % 2).collect();
        let d = dataset(vec![disc(x.clone(), 2), disc(x, 2)]);
        let mi = mixed_mi(&d, &[0, 1], 2).unwrap();
        assert!((mi.value - 2f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn mixed_mi_single_row_group_is_rejected() {
        let y = disc(vec![0, 0, 0, 1], 2);
        let x = Column::Continuous(vec![0.1, 0.5, -0.3, 2.0]);
        let d = dataset(vec![x, y]);
        assert!(matches!(
            mixed_mi(&d, &[0, 1], 2),
            Err(ScoreError::SingletonGroup { count: 1, .. })
        ));
        assert_eq!(mixed_mi(&d, &[], 2), Err(ScoreError::Empty));
    }

    #[test]
    fn empty_parent_set_scores() {
        let x = Column::Continuous(vec![0.3, -1.2, 0.8, 2.2, -0.5]);
        let d = dataset(vec![x]);
        let mi = Scorer::new(&d, ScoreKind::Mi, ScoreOptions::default());
        let h = mixed_mi(&d, &[0], 2).unwrap().value;
        assert_eq!(mi.local(0, &[]).unwrap().value, h);
        let ll = Scorer::new(&d, ScoreKind::Ll, ScoreOptions::default());
        assert_eq!(ll.local(0, &[]).unwrap().value, 0.0);
    }

    #[test]
    fn singleton_group_handling_per_kind() {
        let x = Column::Continuous(vec![0.1, 0.5, -0.3, 2.0, 1.1]);
        let y = disc(vec![0, 0, 0, 0, 1], 2);
        let d = dataset(vec![x, y]);
        let mi = Scorer::new(&d, ScoreKind::Mi, ScoreOptions::default());
        assert!(mi.local(0, &[1]).unwrap().rejected);
        let bic = Scorer::new(&d, ScoreKind::Bic, ScoreOptions::default());
        let s = bic.local(0, &[1]).unwrap();
        assert!(!s.rejected && s.value.is_finite());
    }

    #[test]
    fn parent_set_is_canonical() {
        let a = ParentSet::new(0, vec![3, 1, 3]).unwrap();
        assert_eq!(a.parents(), &[1, 3]);
        assert_eq!(ParentSet::new(2, vec![2]), Err(ScoreError::SelfParent(2)));
    }

    #[test]
    fn bic_parameter_counts() {
        let d = dataset(vec![
            Column::Continuous(vec![0.0, 1.0, 2.0, 3.0]),
            Column::Continuous(vec![1.0, 0.0, 1.0, 0.0]),
            disc(vec![0, 1, 2, 0], 3),
            disc(vec![0, 1, 0, 1], 2),
        ]);
        let s = Scorer::new(&d, ScoreKind::Bic, ScoreOptions::default());
        let ps = |n, p: Vec<usize>| ParentSet::new(n, p).unwrap();
        assert_eq!(s.parameter_count(&ps(0, vec![])), 2.0);
        assert_eq!(s.parameter_count(&ps(0, vec![1, 2])), 3.0 * 3.0);
        assert_eq!(s.parameter_count(&ps(2, vec![3])), 2.0 * 2.0);
    }

    #[test]
    fn cyclic_network_is_an_error() {
        let d = dataset(vec![Column::Continuous(vec![0.0, 1.0]), Column::Continuous(vec![1.0, 0.0])]);
        let mut dag = Dag::empty_for(&d);
        dag.insert_unchecked(0, 1);
        dag.insert_unchecked(1, 0);
        let s = Scorer::new(&d, ScoreKind::Mi, ScoreOptions::default());
        assert_eq!(s.network_score(&dag), Err(ScoreError::Dag(DagError::Cyclic)));
    }
}
