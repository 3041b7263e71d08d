//! Compile a small P3 instance to P2, push a fill forward and pull it back.
//!
//!     cargo run --example p3_to_p2

use lrpd::decompose::{verify, Decomposition, Instance, Kind};
use lrpd::reductions::reduce_p3_to_p2;
use lrpd::scalar::Q;
use lrpd::symcore::{numeric_rank, SymMatrix};

fn main() {
    // target Gram matrix of (1, 1), (1, -1), (2, 1), (0, 1); pair (1, 4) is left free
    let u: [[i64; 2]; 4] = [[1, 1], [1, -1], [2, 1], [0, 1]];
    let g = SymMatrix::from_fn(4, |i, j| Q::int(u[i][0] * u[j][0] + u[i][1] * u[j][1]));
    let free = (0, 3);
    let a = SymMatrix::from_fn(4, |i, j| if i == j || (j.min(i), j.max(i)) == free { Q::int(0) } else { g.get(i, j).clone() });
    let x: Vec<(usize, usize)> = (0..4).flat_map(|i| (i + 1..4).map(move |j| (i, j))).filter(|&p| p != free).collect();
    let fill = g.sub(&a);

    let c = reduce_p3_to_p2(&a, &x).unwrap();
    let w = c.forward(&fill).unwrap();
    let target = 2 * c.m + numeric_rank(&g, 0.0).unwrap().rank;
    let rep = verify(&Instance::new(Kind::P2, c.b.clone(), target), &Decomposition::from_d(w.clone()), 0.0);
    println!("compiled size {} (m = {}), forward witness rank {} <= {}: {}", c.b.n(), c.m, rep.rank, target, rep.pass);
    println!("backward map returns the fill: {}", c.backward(&w).unwrap() == fill);
}
