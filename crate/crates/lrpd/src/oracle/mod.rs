//! Brute-force and randomized cross-checks: exhaustive 3-coloring, rank
//! probing, perturbation-lemma sampling and completion search on tiny
//! partial matrices.
//!
//! Everything here is evidence. A probe that never reaches the target rank
//! does not make an instance infeasible, and nothing in this module
//! produces an `Infeasible` solver verdict.

mod coloring;
mod complete;
mod lemmas;
mod probe;

use thiserror::Error;

pub use coloring::{brute_force_3color, brute_force_3color_capped, small_graphs, ColoringResult, MAX_VERTICES};
pub use complete::{small_completion_search, CompletionGrid, CompletionResult};
pub use lemmas::{check_perturbation_lemmas, LemmaCheck, LemmaReport};
pub use probe::{rank_probe, rank_probe_with, ProbeConfig, ProbeReport, ProbeSample};

use crate::symcore::SymError;

#[derive(Debug, Error)]
pub enum OracleError {
    #[error("graph has {0} vertices, the exhaustive search is capped at {1}")]
    SizeCap(usize, usize),
    #[error("{0} unspecified entries, the completion search is capped at {1}")]
    TooManyUnknowns(usize, usize),
    #[error(transparent)]
    Sym(#[from] SymError),
}
