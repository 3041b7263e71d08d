//! Compile a triangle into the P3, P1 and P2 gadgets and map a 3-coloring
//! forward to verified witnesses.
//!
//!     cargo run --example coloring_gadgets

use lrpd::decompose::verify;
use lrpd::oracle::brute_force_3color;
use lrpd::reductions::{build_p1_instance, build_p2_instance, build_p3_instance, extend_peeters_coloring, peeters_supergraph, Graph};

fn main() {
    let g = Graph::complete(3);
    let c = brute_force_3color(&g).unwrap().coloring.expect("a triangle is 3-colorable");
    let sg = peeters_supergraph(&g);
    let sc = extend_peeters_coloring(&g, &c).unwrap();
    println!("supergraph: {} vertices, {} edges, coloring proper: {}", sg.n(), sg.edges().len(), sg.is_proper(&sc));

    let p3 = build_p3_instance(&g);
    let rep = verify(&p3.instance, &p3.witness(&sc).unwrap(), 0.0);
    println!("P3: n = {}, target {}, witness rank {}, pass {}", p3.instance.n(), p3.instance.r, rep.rank, rep.pass);
    for gad in [build_p1_instance(&g), build_p2_instance(&g)] {
        let rep = verify(&gad.instance, &gad.witness(&sc).unwrap(), 0.0);
        println!("{:?}: n = {}, m = {}, target {}, witness rank {}, pass {}", gad.instance.kind, gad.instance.n(), gad.m(), gad.instance.r, rep.rank, rep.pass);
    }
    let k4 = Graph::complete(4);
    println!("K4 3-colorable: {}", brute_force_3color(&k4).unwrap().colorable);
}
