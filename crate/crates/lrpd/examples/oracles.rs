//! The brute-force and randomized cross-checks.
//!
//!     cargo run --example oracles

use lrpd::decompose::{Instance, Kind};
use lrpd::fixtures::example1;
use lrpd::oracle::{brute_force_3color, check_perturbation_lemmas, rank_probe, small_graphs};

fn main() {
    let graphs = small_graphs(4);
    let colorable = graphs.iter().filter(|g| brute_force_3color(g).unwrap().colorable).count();
    println!("{} graphs on at most 4 vertices up to isomorphism, {} 3-colorable", graphs.len(), colorable);

    let rep = check_perturbation_lemmas(100, 1);
    for c in &rep.checks {
        println!("{}: {} trials, {} violations, worst ratio {:.3}", c.name, c.trials, c.violations, c.worst_ratio);
    }

    let inst = Instance::new(Kind::P2, example1(), 2);
    for r in [2, 3] {
        let p = rank_probe(&inst, r, 200, 7);
        println!("probe at rank {}: best {:?}, {} hits of {} ({})", r, p.best_rank_found, p.hits, p.trials, p.label);
    }
}
