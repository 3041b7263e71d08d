//! Perturbed P2 construction on a path with the parameter validator.
//!
//!     cargo run --example perturbed_path

use lrpd::reductions::{appendix_p2tilde_instance, Graph};
use lrpd::symcore::{numeric_rank, scaled_rank};

fn main() {
    let g = Graph::path(3);
    let probe = appendix_p2tilde_instance(&g, 1e-300, 2.0, 1e4, 1e-12).unwrap();
    let eps = probe.params.eps_bound / 2.0;
    let ai = appendix_p2tilde_instance(&g, eps, 2.0, 1e4, 1e-12).unwrap();
    println!("n = {}, m = {}, eps = {:e} (bound {:e})", ai.instance.n(), ai.m(), eps, ai.params.eps_bound);
    for c in [[0u8, 1, 0], [0, 1, 2]] {
        let w = ai.witness(&c).unwrap();
        let m = w.decomposition.completed(&ai.instance).unwrap();
        let h = w.decomposition.h.as_ref().unwrap().frobenius();
        println!(
            "coloring {:?}: exact rank {}, float rank {}, |H|_F = {:e}, Schur gap {:e}, forward checks pass: {}",
            c,
            numeric_rank(&m, 0.0).unwrap().rank,
            scaled_rank(&m.to_f64(), 1e-7).unwrap().rank,
            h,
            w.schur_gap,
            w.report.pass
        );
    }
    for i in ai.validate(None).converse {
        println!("  converse [{}] {:e} <= {:e}: {}", i.name, i.lhs, i.rhs, i.holds);
    }
}
