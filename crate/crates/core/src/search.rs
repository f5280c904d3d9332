//! Score-based structure search: greedy Hill-Climbing and an evolutionary
//! algorithm over DAGs.
//!
//! Both walk the same space: graphs over the scorer's variables that respect
//! acyclicity, the continuous-to-discrete prohibition encoded in the start
//! graph's kinds, and an optional cap on parents per node. A move whose new
//! local score is rejected is never taken.

use rand::seq::{IndexedRandom, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dag::{Dag, DagError, Move, MoveKind};
use crate::scoring::{LocalScore, ScoreError, ScoredNetwork, Scorer};

/// Improvements at or below this are treated as ties with "no change".
pub const TIE_EPSILON: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum SearchError {
    #[error("start graph does not match the data columns")]
    VariableMismatch,
    #[error("invalid evolutionary configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Score(#[from] ScoreError),
    #[error(transparent)]
    Dag(#[from] DagError),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HillClimbOptions {
    pub max_parents: Option<usize>,
    pub tie_epsilon: f64,
    pub max_iterations: Option<usize>,
}

impl Default for HillClimbOptions {
    fn default() -> Self {
        Self {
            max_parents: None,
            tie_epsilon: TIE_EPSILON,
            max_iterations: None,
        }
    }
}

/// Best structure found plus the score after every accepted step.
#[derive(Debug, Clone)]
pub struct SearchOutcome {
    pub network: ScoredNetwork,
    /// Accepted totals, starting with the start graph's score.
    pub trace: Vec<f64>,
}

fn check_start(scorer: &Scorer<'_>, start: &Dag) -> Result<(), SearchError> {
    if start.names() != scorer.data().names() {
        return Err(SearchError::VariableMismatch);
    }
    start.validate(None)?;
    Ok(())
}

/// Score change of a move and the new local scores it implies.
fn move_delta(
    scorer: &Scorer<'_>,
    dag: &Dag,
    current: &[LocalScore],
    mv: &Move,
) -> Result<Option<(f64, Vec<(usize, LocalScore)>)>, ScoreError> {
    let with = |node: usize, extra: usize| {
        let mut ps = dag.parents(node).to_vec();
        ps.push(extra);
        ps
    };
    let without = |node: usize, gone: usize| {
        dag.parents(node)
            .iter()
            .copied()
            .filter(|&p| p != gone)
            .collect::<Vec<_>>()
    };
    let changes: Vec<(usize, Vec<usize>)> = match mv.kind {
        MoveKind::Add => vec![(mv.to, with(mv.to, mv.from))],
        MoveKind::Delete => vec![(mv.to, without(mv.to, mv.from))],
        MoveKind::Reverse => vec![(mv.to, without(mv.to, mv.from)), (mv.from, with(mv.from, mv.to))],
    };
    let mut delta = 0.0;
    let mut updates = Vec::with_capacity(changes.len());
    for (node, parents) in changes {
        let s = scorer.local(node, &parents)?;
        if s.rejected {
            return Ok(None);
        }
        delta += s.value - current[node].value;
        updates.push((node, s));
    }
    Ok(Some((delta, updates)))
}

/// Best-improvement Hill-Climbing from `start`.
///
/// Each iteration scores every legal move (in parallel), recomputing only the
/// one or two local scores the move touches, and applies the move with the
/// largest gain. Among gains within `tie_epsilon` of the best, the smallest
/// move in (kind, from, to) order wins. Stops when no gain exceeds
/// `tie_epsilon`.
pub fn hill_climb(scorer: &Scorer<'_>, start: &Dag, options: &HillClimbOptions) -> Result<SearchOutcome, SearchError> {
    check_start(scorer, start)?;
    let mut dag = start.clone();
    let mut current = scorer.network_score(&dag)?;
    if current.rejected {
        // fall back to the empty graph, whose local scores are never rejected
        dag = Dag::empty(start.names().to_vec(), start.kinds().to_vec());
        current = scorer.network_score(&dag)?;
    }
    let mut local = current.local.clone();
    let mut total = current.total;
    let mut trace = vec![total];
    let mut iterations = 0usize;
    loop {
        if options.max_iterations.is_some_and(|cap| iterations >= cap) {
            break;
        }
        let moves = dag.legal_moves(options.max_parents);
        let scored: Vec<(Move, f64, Vec<(usize, LocalScore)>)> = moves
            .par_iter()
            .map(|mv| move_delta(scorer, &dag, &local, mv).map(|r| r.map(|(d, u)| (*mv, d, u))))
            .collect::<Result<Vec<_>, _>>()?
            .into_iter()
            .flatten()
            .collect();
        let Some(best_gain) = scored.iter().map(|(_, d, _)| *d).reduce(f64::max) else {
            break;
        };
        if !(best_gain > options.tie_epsilon) {
            break;
        }
        // moves are sorted, so the first within tolerance is the tie-break winner
        let (mv, _, updates) = scored
            .into_iter()
            .find(|(_, d, _)| *d >= best_gain - options.tie_epsilon)
            .expect("best move exists");
        dag = dag.apply(&mv)?;
        for (node, s) in updates {
            local[node] = s;
        }
        total = local.iter().map(|s| s.value).sum();
        trace.push(total);
        iterations += 1;
        log::debug!("hill-climb step {iterations}: {mv} -> {total}");
    }
    Ok(SearchOutcome {
        network: ScoredNetwork {
            dag,
            total,
            local,
            rejected: false,
        },
        trace,
    })
}

/// Settings of the evolutionary search.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvoConfig {
    pub population_size: usize,
    pub generations: usize,
    pub mutation_rate: f64,
    pub crossover_rate: f64,
    pub tournament_size: usize,
    /// Stop after this many generations without a better best-ever score.
    pub stagnation_limit: usize,
    pub max_parents: Option<usize>,
    pub seed: u64,
}

impl Default for EvoConfig {
    fn default() -> Self {
        Self {
            population_size: 20,
            generations: 100,
            mutation_rate: 0.8,
            crossover_rate: 0.8,
            tournament_size: 3,
            stagnation_limit: 15,
            max_parents: None,
            seed: 0,
        }
    }
}

impl EvoConfig {
    pub fn validate(&self) -> Result<(), SearchError> {
        if self.population_size < 2 {
            return Err(SearchError::Config("population_size must be at least 2".into()));
        }
        if self.tournament_size == 0 || self.tournament_size > self.population_size {
            return Err(SearchError::Config(
                "tournament_size must lie in 1..=population_size".into(),
            ));
        }
        for (name, rate) in [("mutation_rate", self.mutation_rate), ("crossover_rate", self.crossover_rate)] {
            if !(0.0..=1.0).contains(&rate) {
                return Err(SearchError::Config(format!("{name} must lie in [0, 1]")));
            }
        }
        Ok(())
    }
}

/// Deletes randomly chosen edges on cycles until the graph is acyclic, then
/// trims parent sets above the cap.
pub(crate) fn repair<R: Rng>(dag: &mut Dag, max_parents: Option<usize>, rng: &mut R) {
    while let Some(cycle) = dag.find_cycle() {
        let &(from, to) = cycle.choose(rng).expect("cycle has edges");
        dag.remove_edge(from, to).expect("cycle edge exists");
    }
    if let Some(cap) = max_parents {
        for node in 0..dag.n_nodes() {
            let mut ps = dag.parents(node).to_vec();
            if ps.len() > cap {
                ps.shuffle(rng);
                ps.truncate(cap);
                dag.set_parents_unchecked(node, ps);
            }
        }
    }
}

/// Each type-legal ordered pair becomes an edge with probability `2 / n`.
pub(crate) fn random_dag<R: Rng>(template: &Dag, max_parents: Option<usize>, rng: &mut R) -> Dag {
    let n = template.n_nodes();
    let mut dag = Dag::empty(template.names().to_vec(), template.kinds().to_vec());
    let p = if n > 0 { (2.0 / n as f64).min(1.0) } else { 0.0 };
    for from in 0..n {
        for to in 0..n {
            if from != to && template.type_allows(from, to) && rng.random_bool(p) {
                dag.insert_unchecked(from, to);
            }
        }
    }
    // a pair may now hold both directions, which is a 2-cycle; repair removes one
    repair(&mut dag, max_parents, rng);
    dag
}

/// Child takes each node's parent set from a uniformly chosen parent graph.
pub(crate) fn crossover<R: Rng>(a: &Dag, b: &Dag, max_parents: Option<usize>, rng: &mut R) -> Dag {
    let mut child = a.clone();
    for node in 0..a.n_nodes() {
        if rng.random_bool(0.5) {
            child.set_parents_unchecked(node, b.parents(node).to_vec());
        }
    }
    repair(&mut child, max_parents, rng);
    child
}

/// Applies one uniformly chosen legal move, if any exists.
pub(crate) fn mutate<R: Rng>(dag: &Dag, max_parents: Option<usize>, rng: &mut R) -> Dag {
    let moves = dag.legal_moves(max_parents);
    match moves.choose(rng) {
        Some(mv) => dag.apply(mv).expect("legal move applies"),
        None => dag.clone(),
    }
}

fn fitness(scorer: &Scorer<'_>, population: &[Dag]) -> Result<Vec<ScoredNetwork>, ScoreError> {
    population.par_iter().map(|g| scorer.network_score(g)).collect()
}

fn tournament<'p, R: Rng>(scored: &'p [ScoredNetwork], size: usize, rng: &mut R) -> &'p ScoredNetwork {
    let mut best: Option<&ScoredNetwork> = None;
    for _ in 0..size {
        let cand = &scored[rng.random_range(0..scored.len())];
        if best.is_none_or(|b| cand.total > b.total) {
            best = Some(cand);
        }
    }
    best.expect("tournament size is positive")
}

/// Evolutionary structure search.
///
/// Random initial population; each generation keeps the current best (elitism
/// of one) and fills the rest with offspring of tournament winners, produced by
/// crossover and/or a single legal-move mutation. Runs for `generations`
/// generations or until the best-ever score has not improved for
/// `stagnation_limit` generations. Rejected graphs score `-inf` and are never
/// returned. Results depend only on the data and `config.seed`.
pub fn evolve(scorer: &Scorer<'_>, template: &Dag, config: &EvoConfig) -> Result<SearchOutcome, SearchError> {
    config.validate()?;
    check_start(scorer, template)?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let cap = config.max_parents;
    let population: Vec<Dag> = (0..config.population_size)
        .map(|_| random_dag(template, cap, &mut rng))
        .collect();
    let mut scored = fitness(scorer, &population)?;

    let empty = scorer.network_score(&Dag::empty(template.names().to_vec(), template.kinds().to_vec()))?;
    let best_of = |scored: &[ScoredNetwork]| -> Option<ScoredNetwork> {
        scored
            .iter()
            .filter(|s| !s.rejected)
            .fold(None, |best: Option<&ScoredNetwork>, s| match best {
                Some(b) if b.total >= s.total => Some(b),
                _ => Some(s),
            })
            .cloned()
    };
    let mut best = best_of(&scored).unwrap_or_else(|| empty.clone());
    let mut trace = vec![best.total];
    let mut stagnant = 0usize;

    for _generation in 0..config.generations {
        if stagnant >= config.stagnation_limit {
            break;
        }
        let elite = best_of(&scored).unwrap_or_else(|| empty.clone());
        let mut next = Vec::with_capacity(config.population_size);
        next.push(elite.dag.clone());
        while next.len() < config.population_size {
            let a = tournament(&scored, config.tournament_size, &mut rng);
            let mut child = if rng.random_bool(config.crossover_rate) {
                let b = tournament(&scored, config.tournament_size, &mut rng);
                crossover(&a.dag, &b.dag, cap, &mut rng)
            } else {
                a.dag.clone()
            };
            if rng.random_bool(config.mutation_rate) {
                child = mutate(&child, cap, &mut rng);
            }
            debug_assert!(child.validate(cap).is_ok());
            next.push(child);
        }
        scored = fitness(scorer, &next)?;
        match best_of(&scored) {
            Some(gen_best) if gen_best.total > best.total + TIE_EPSILON => {
                best = gen_best;
                stagnant = 0;
            }
            _ => stagnant += 1,
        }
        trace.push(best.total);
    }
    Ok(SearchOutcome { network: best, trace })
}
