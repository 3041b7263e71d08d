//! Instance compilers and their witness maps.
//!
//! Graph side: the prism supergraph and the robust-coloring amplifier, the
//! P3, P1 and P2 constructions from 3-coloring with their forward witnesses,
//! and the perturbed P2 construction with a post-hoc parameter validator.
//! Algebra side: the P3 to P2 compiler with both solution maps, and the
//! encoding of a polynomial system as a rank-3 PSD completion problem.
//!
//! Every compiler runs in exact arithmetic unless noted. Stages compose
//! explicitly: `build_*` applies the supergraph first, the `*_from_graph`
//! variants take the graph as given.

mod appendix;
mod compile;
mod construct;
mod graph;
mod shitov;

use thiserror::Error;

use crate::decompose::DecomposeError;
use crate::polysolve::PolyError;
use crate::symcore::SymError;

pub use appendix::{appendix_p2tilde_instance, AppendixInstance, AppendixParams, Inequality, SValidatorReport};
pub use compile::{reduce_p3_to_p2, P3ToP2};
pub use construct::{
    build_p1_instance, build_p2_instance, build_p3_instance, p3_from_graph, schur_from_graph, P3Gadget, SchurGadget,
};
pub use graph::{extend_peeters_coloring, extend_robust_coloring, parse_graph, peeters_supergraph, robustify, Coloring, Graph};
pub use shitov::{build_bbar, build_h, chain_system, lemma_block, shitov_sigma, PartialMatrix, ShitovInstance};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ReductionError {
    #[error("graph error: {0}")]
    Graph(String),
    #[error("invalid certificate: {0}")]
    Certificate(String),
    #[error("eps = {eps:e} is outside (0, {bound:e}]")]
    EpsOutOfRange { eps: f64, bound: f64 },
    #[error("s = {0:e} fails the forward inequalities: {1}")]
    STooSmall(f64, String),
    #[error("zero pivot in the compiled block at index {0}")]
    ZeroPivot(usize),
    #[error("zero column {0} in the incidence block")]
    ZeroColumn(usize),
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("not a polynomial system: {0}")]
    Polynomial(String),
    #[error(transparent)]
    Sym(#[from] SymError),
    #[error(transparent)]
    Poly(#[from] PolyError),
}

impl From<ReductionError> for DecomposeError {
    fn from(e: ReductionError) -> Self {
        DecomposeError::Instance(e.to_string())
    }
}
