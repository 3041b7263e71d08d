//! Solve the 5×5 example at ranks 3 and 2 in exact arithmetic, then check a
//! hand-picked member of the rank-3 family.
//!
//!     cargo run --example example1

use lrpd::decompose::{solve, verify, Decomposition, DecomposeBudget, Instance, Kind, SolveResult};
use lrpd::fixtures::{example1, example1_family};
use lrpd::scalar::Q;

fn main() {
    let a = example1();
    let budget = DecomposeBudget::default();
    for r in [3, 2] {
        let inst = Instance::new(Kind::P2, a.clone(), r);
        match solve(&inst, &budget).expect("valid instance") {
            SolveResult::Feasible(dec) => {
                let d: Vec<String> = dec.d.iter().map(|v| v.to_string()).collect();
                println!("rank {}: feasible, d = [{}], achieved rank {}", r, d.join(", "), dec.achieved_rank);
            }
            SolveResult::Infeasible { subsets_checked } => println!("rank {}: infeasible ({} index sets ruled out)", r, subsets_checked),
            SolveResult::Unknown(notes) => println!("rank {}: unknown {:?}", r, notes),
        }
    }
    // alpha = beta = 2 gives the integer point of the family
    let d = example1_family(&Q::int(2), &Q::int(2));
    let rep = verify(&Instance::new(Kind::P2, a, 3), &Decomposition::from_d(d.clone()), 0.0);
    println!("d = {:?}: pass = {}, rank = {}", d.iter().map(|v| v.to_string()).collect::<Vec<_>>(), rep.pass, rep.rank);
}
