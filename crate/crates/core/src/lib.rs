//! Bayesian network learning from mixed discrete/continuous data.
//!
//! Structure is scored with a mutual-information estimator that treats
//! continuous blocks as Gaussians and discrete blocks as groupings, so
//! continuous columns never need to be binned. Parameters follow the
//! conditional-linear-Gaussian family. The crate also covers Hill-Climbing and
//! evolutionary search, forward sampling, imputation and a benchmark harness
//! comparing discretized against mixed learning.
//!
//! The `book/` directory next to this crate walks through the concepts with
//! runnable snippets; those snippets are compiled as doc-tests of this crate.

pub mod bench;
pub mod dag;
pub mod dataset;
pub mod document;
pub mod inference;
pub mod linalg;
pub mod parameters;
pub mod scoring;
pub mod search;

pub use dag::{Dag, DagError, Move, MoveKind};
pub use dataset::{Column, DataError, Dataset, DiscretizationMap, Schema, VariableKind};
pub use scoring::{LocalScore, ParentSet, ScoreKind, ScoreOptions, ScoredNetwork, Scorer};
pub use inference::{evaluate_restoration, forward_sample, impute, ImputeStrategy};
pub use parameters::{fit_parameters, BayesianNetwork, FitOptions, NodeModel};
pub use search::{evolve, hill_climb, EvoConfig, HillClimbOptions, SearchOutcome};
pub use document::{NetworkDocument, Provenance};
pub use bench::{generate_clg_network, run_matrix, GeneratorSpec, MatrixOptions, SearchAlgo};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/data.md")]
    mod data {}
    #[doc = include_str!("../../../book/src/scoring.md")]
    mod scoring {}
    #[doc = include_str!("../../../book/src/search.md")]
    mod search {}
    #[doc = include_str!("../../../book/src/parameters.md")]
    mod parameters {}
    #[doc = include_str!("../../../book/src/inference.md")]
    mod inference {}
    #[doc = include_str!("../../../book/src/benchmarks.md")]
    mod benchmarks {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
