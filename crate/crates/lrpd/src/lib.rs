//! Exact and numerical solvers for low-rank plus diagonal decompositions of
//! symmetric matrices, together with the instance compilers that encode graph
//! 3-coloring and polynomial feasibility as such problems.
//!
//! Three problems are handled for a symmetric `A` and target rank `r`:
//!
//! * **P1**: find `d ≥ 0` with `A − Diag(d) ⪰ 0` and rank at most `r`;
//! * **P2**: find any `d` with `A + Diag(d) ⪰ 0` and rank at most `r` (zero diagonal `A`);
//! * **P3**: find `L` vanishing on a pattern `X` with `A + L ⪰ 0` and rank at most `r`.
//!
//! Module map: [`symcore`] is the matrix kernel, [`charsys`] the linear phase
//! for a fixed index set, [`polysolve`] the polynomial phase, [`decompose`] the
//! drivers and verifier, [`reductions`] the gadget compilers, [`oracle`] the
//! brute-force cross-checks and [`cli`] the command-line surface.

pub mod scalar;
pub mod symcore;
pub mod fixtures;
pub mod charsys;
pub mod polysolve;
pub mod decompose;
pub mod reductions;
pub mod oracle;
pub mod cli;
