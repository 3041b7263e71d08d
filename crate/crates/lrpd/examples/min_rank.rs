//! Minimum rank of a planted zero-diagonal matrix, in exact and float mode.
//!
//!     cargo run --example min_rank

use lrpd::decompose::{solve_p2_min, DecomposeBudget};
use lrpd::scalar::Q;
use lrpd::symcore::SymMatrix;

fn main() {
    // rows of a rank-2 factor
    let u: [[i64; 2]; 6] = [[1, 2], [2, -1], [1, 1], [3, 0], [0, 1], [-1, 2]];
    let a = SymMatrix::from_fn(6, |i, j| if i == j { Q::int(0) } else { Q::int(u[i][0] * u[j][0] + u[i][1] * u[j][1]) });
    let budget = DecomposeBudget::default();
    let exact = solve_p2_min(&a, &budget).unwrap();
    println!("exact: rank {} (lower ranks certified: {})", exact.rank, exact.certified);
    println!("  d = {:?}", exact.decomposition.d.iter().map(|v| v.to_string()).collect::<Vec<_>>());
    let float = solve_p2_min(&a.to_f64(), &budget).unwrap();
    println!("float: rank {}, residual {:e}", float.rank, float.decomposition.residual);
}
