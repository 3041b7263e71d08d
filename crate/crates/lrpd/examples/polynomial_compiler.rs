//! Encode the squaring chain as a rank-3 completion problem and complete it
//! from the chain's solution.
//!
//!     cargo run --example polynomial_compiler [n]

use lrpd::decompose::verify;
use lrpd::reductions::{build_bbar, chain_system, lemma_block};
use lrpd::oracle::{small_completion_search, CompletionGrid};
use lrpd::scalar::Q;

fn main() {
    let n: usize = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(2);
    let f = chain_system(n);
    print!("{}", f.to_text());
    let sh = build_bbar(&f).unwrap();
    let xi: Vec<Q> = (0..n).map(|t| Q::int(2).pow(1 << t)).collect();
    let inst = sh.instance();
    let rep = verify(&inst, &sh.witness(&xi).unwrap(), 0.0);
    let w = sh.completion(&xi);
    let top = w.diag().into_iter().max().unwrap();
    println!("size {}, {} specified pairs, witness rank {}, pass {}, largest diagonal {}", sh.n(), inst.x.len(), rep.rank, rep.pass, top);

    let res = small_completion_search(&lemma_block(), 1, &CompletionGrid::default()).unwrap();
    println!("rank-1 completions of the all-ones block: {:?}", res.completions);
}
