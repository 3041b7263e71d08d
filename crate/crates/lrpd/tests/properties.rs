//! Randomized properties, each run for at least 100 cases under a fixed
//! proptest seed.

mod common;

use nalgebra::{DMatrix, SymmetricEigen};
use proptest::prelude::*;
use proptest::test_runner::{Config, RngAlgorithm, TestRng, TestRunner};

use lrpd::cli::{DecompositionFile, InstanceFile};
use lrpd::decompose::{solve, Decomposition, DecomposeBudget, Instance, Kind};
use lrpd::oracle::rank_probe;
use lrpd::polysolve::{Poly, PolySystem};
use lrpd::reductions::Graph;
use lrpd::scalar::{Scalar, Q};
use lrpd::symcore::{schur_complement, smat, svec, SymMatrix};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use common::{exact_rank, gram, random_instance, result_json};

const CASES: u32 = 128;

fn runner(seed: u8) -> TestRunner {
    let cfg = Config { cases: CASES, failure_persistence: None, ..Config::default() };
    TestRunner::new_with_rng(cfg, TestRng::from_seed(RngAlgorithm::ChaCha, &[seed; 32]))
}

fn dense(n: usize, m: usize, v: &[f64]) -> DMatrix<f64> {
    DMatrix::from_fn(n, m, |i, j| v[i * m + j])
}

fn rational() -> impl Strategy<Value = Q> {
    (-20i64..=20, 1i64..=9).prop_map(|(p, q)| Q::new(p, q))
}

fn sym_q(max_n: usize) -> impl Strategy<Value = SymMatrix<Q>> {
    (1..=max_n).prop_flat_map(|n| proptest::collection::vec(rational(), n * (n + 1) / 2).prop_map(move |v| SymMatrix::from_lower(n, v).unwrap()))
}

#[test]
fn schur_rank_identity() {
    let strat = (3usize..=7, 1usize..=7, any::<u64>()).prop_flat_map(|(n, k, seed)| {
        let k = k.min(n);
        (Just(n), Just(k), proptest::collection::vec(-3i64..=3, n * k), 1..n, Just(seed))
    });
    runner(1)
        .run(&strat, |(n, k, f, lead, _)| {
            let u: Vec<Vec<i64>> = (0..n).map(|i| f[i * k..(i + 1) * k].to_vec()).collect();
            let m = gram(&u);
            let j: Vec<usize> = (0..lead).collect();
            prop_assume!(exact_rank(&m.principal(&j)) == lead);
            let s = schur_complement(&m, &j, 0.0).unwrap();
            prop_assert_eq!(exact_rank(&m), lead + exact_rank(&s));
            Ok(())
        })
        .unwrap();
}

// ‖(A + B)⁻¹ − A⁻¹‖ ≤ ‖B‖‖A⁻¹‖² / (1 − ‖B‖‖A⁻¹‖) whenever ‖B‖‖A⁻¹‖ < 1.
#[test]
fn inverse_perturbation_bound() {
    let strat = (1usize..=6).prop_flat_map(|n| {
        (Just(n), proptest::collection::vec(-1.0f64..1.0, n * n), proptest::collection::vec(-1.0f64..1.0, n * n), -3.0f64..3.0, 0.0f64..0.98)
    });
    runner(2)
        .run(&strat, |(n, av, bv, shift, rho)| {
            let a = dense(n, n, &av) + DMatrix::identity(n, n) * shift;
            let Some(ainv) = a.clone().try_inverse() else { return Ok(()) };
            prop_assume!(ainv.norm() < 1e6);
            let b = dense(n, n, &bv);
            prop_assume!(b.norm() > 0.0);
            let b = &b * (rho / (b.norm() * ainv.norm()));
            let (bn, an) = (b.norm(), ainv.norm());
            let inv = (&a + &b).try_inverse().expect("perturbation keeps A invertible");
            let lhs = (inv - &ainv).norm();
            let rhs = bn * an * an / (1.0 - bn * an);
            prop_assert!(lhs <= rhs * (1.0 + 1e-9) + 1e-12 * an, "{} > {}", lhs, rhs);
            Ok(())
        })
        .unwrap();
}

// ‖(K+H)(D+Δ)⁻¹(K+H)ᵀ − KD⁻¹Kᵀ‖ ≤ ½‖K‖‖D⁻¹‖(9‖K‖‖D⁻¹‖‖Δ‖ + 5‖H‖)
// for ‖Δ‖‖D⁻¹‖ ≤ ½ and ‖H‖ ≤ ½‖K‖.
#[test]
fn kdk_perturbation_bound() {
    let strat = (1usize..=5, 1usize..=5).prop_flat_map(|(m, n)| {
        (
            Just((m, n)),
            proptest::collection::vec(-1.0f64..1.0, m * n),
            proptest::collection::vec(-1.0f64..1.0, n * n),
            proptest::collection::vec(-1.0f64..1.0, m * n),
            proptest::collection::vec(-1.0f64..1.0, n * n),
            (0.05f64..2.0, 0.0f64..0.5, 0.0f64..0.5),
        )
    });
    runner(3)
        .run(&strat, |((m, n), kv, gv, hv, ev, (lift, hs, es))| {
            let k = dense(m, n, &kv);
            let g = dense(n, n, &gv);
            let d = &g * g.transpose() + DMatrix::identity(n, n) * lift;
            let dinv = d.clone().try_inverse().unwrap();
            let mut h = dense(m, n, &hv);
            if h.norm() > 0.0 {
                h *= hs * k.norm() / h.norm();
            }
            let e = dense(n, n, &ev);
            let mut delta = (&e + e.transpose()) * 0.5;
            if delta.norm() > 0.0 {
                delta *= es / (delta.norm() * dinv.norm());
            }
            let pinv = (&d + &delta).try_inverse().unwrap();
            let kh = &k + &h;
            let lhs = (&kh * pinv * kh.transpose() - &k * &dinv * k.transpose()).norm();
            let (kn, dn) = (k.norm(), dinv.norm());
            let rhs = 0.5 * kn * dn * (9.0 * kn * dn * delta.norm() + 5.0 * h.norm());
            prop_assert!(lhs <= rhs * (1.0 + 1e-9) + 1e-12 * kn * kn * dn, "{} > {}", lhs, rhs);
            Ok(())
        })
        .unwrap();
}

// A PSD matrix with negative off-diagonal entries has rank ≥ n − 1.
#[test]
fn negative_offdiagonal_rank() {
    let strat = (2usize..=7).prop_flat_map(|n| (Just(n), proptest::collection::vec(0.1f64..2.0, n * (n - 1) / 2), proptest::collection::vec(0.2f64..3.0, n), any::<bool>()));
    runner(4)
        .run(&strat, |(n, w, s, singular)| {
            let mut a = DMatrix::zeros(n, n);
            let mut e = 0;
            for i in 0..n {
                for j in 0..i {
                    a[(i, j)] = -w[e];
                    a[(j, i)] = -w[e];
                    a[(i, i)] += w[e];
                    a[(j, j)] += w[e];
                    e += 1;
                }
            }
            if !singular {
                for i in 0..n {
                    a[(i, i)] += 0.1 * s[i];
                }
            }
            let a = DMatrix::from_fn(n, n, |i, j| a[(i, j)] * s[i] * s[j]);
            let eig = SymmetricEigen::new(a);
            let top = eig.eigenvalues.iter().fold(1.0f64, |x, &y| x.max(y.abs()));
            prop_assert!(eig.eigenvalues.iter().all(|&l| l > -1e-10 * top));
            let rank = eig.eigenvalues.iter().filter(|&&l| l > 1e-10 * top).count();
            prop_assert!(rank + 1 >= n);
            Ok(())
        })
        .unwrap();
}

#[test]
fn svec_smat_round_trip() {
    runner(5)
        .run(&sym_q(7), |m| {
            prop_assert_eq!(svec(&m).len(), m.n() * (m.n() + 1) / 2);
            prop_assert_eq!(smat(&svec(&m)).unwrap(), m);
            Ok(())
        })
        .unwrap();
}

#[test]
fn file_round_trips() {
    let strat = (any::<u64>(), 0usize..3, 2usize..=6, proptest::collection::vec(rational(), 6));
    runner(6)
        .run(&strat, |(seed, kind, n, d)| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let inst = random_instance(&mut rng, [Kind::P1, Kind::P2, Kind::P3][kind], n, 1);
            let f = InstanceFile::from_instance(&inst, None);
            let g: InstanceFile = serde_json::from_str(&serde_json::to_string_pretty(&f).unwrap()).unwrap();
            prop_assert_eq!(&g, &f);
            prop_assert_eq!(g.to_instance::<Q>().unwrap(), inst.clone());
            prop_assert_eq!(g.content_hash(), f.content_hash());
            let dec = Decomposition::from_d(d[..n].to_vec());
            let df = DecompositionFile::from_decomposition(&dec, &f.content_hash());
            let back: DecompositionFile = serde_json::from_str(&serde_json::to_string(&df).unwrap()).unwrap();
            prop_assert_eq!(back.to_decomposition::<Q>(n).unwrap(), dec);
            let fd = Decomposition::from_d(d[..n].iter().map(|v| v.to_f64()).collect::<Vec<f64>>());
            let back: DecompositionFile = serde_json::from_str(&serde_json::to_string(&DecompositionFile::from_decomposition(&fd, "")).unwrap()).unwrap();
            prop_assert_eq!(back.to_decomposition::<f64>(n).unwrap(), fd);
            Ok(())
        })
        .unwrap();
}

#[test]
fn graph_round_trips() {
    let strat = (1usize..=8).prop_flat_map(|n| (Just(n), proptest::collection::vec(any::<bool>(), n * (n - 1) / 2)));
    runner(7)
        .run(&strat, |(n, mask)| {
            let pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect();
            let g = Graph::new(n, pairs.iter().zip(&mask).filter(|(_, &b)| b).map(|(&p, _)| p)).unwrap();
            let back: Graph = serde_json::from_str(&serde_json::to_string(&g).unwrap()).unwrap();
            prop_assert_eq!(&back, &g);
            prop_assert_eq!(lrpd::reductions::parse_graph(&g.to_edge_list()).unwrap(), g);
            Ok(())
        })
        .unwrap();
}

#[test]
fn poly_text_round_trip() {
    let term = (proptest::collection::vec(0u32..=3, 3), (-9i64..=9, 1i64..=4));
    let strat = proptest::collection::vec(proptest::collection::vec(term, 1..=4), 1..=3);
    runner(8)
        .run(&strat, |eqs| {
            let polys: Vec<Poly<Q>> = eqs.into_iter().map(|ts| Poly::from_terms(3, ts.into_iter().map(|(e, (p, q))| (e, Q::new(p, q))))).filter(|p| !p.is_zero()).collect();
            prop_assume!(!polys.is_empty());
            let sys = PolySystem::new(vec!["x1".into(), "x2".into(), "x3".into()], polys).unwrap();
            let text = sys.to_text();
            let back = PolySystem::<Q>::parse_text(&text).unwrap();
            prop_assert_eq!(back.to_text(), text);
            for (a, b) in sys.equations.iter().zip(&back.equations) {
                let pt = [Q::new(1, 2), Q::int(-3), Q::new(5, 7)];
                prop_assert_eq!(a.eval(&pt[..a.nvars()]), b.eval(&pt[..b.nvars()]));
            }
            Ok(())
        })
        .unwrap();
}

#[test]
fn solver_thread_independence() {
    let strat = (any::<u64>(), 0usize..3, 3usize..=5, any::<bool>());
    let cfg = Config { cases: 100, failure_persistence: None, ..Config::default() };
    TestRunner::new_with_rng(cfg, TestRng::from_seed(RngAlgorithm::ChaCha, &[9; 32]))
        .run(&strat, |(seed, kind, n, float)| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let inst = random_instance(&mut rng, [Kind::P1, Kind::P2, Kind::P3][kind], n, 2);
            let (one, eight) = if float {
                let fi = Instance { a: inst.a.to_f64(), kind: inst.kind, x: inst.x.clone(), r: inst.r, eps: 0.0, sparsity_constrained: false };
                let one = solve(&fi, &DecomposeBudget::default().with_threads(1)).unwrap();
                let eight = solve(&fi, &DecomposeBudget::default().with_threads(8)).unwrap();
                (result_json(&one), result_json(&eight))
            } else {
                let one = solve(&inst, &DecomposeBudget::default().with_threads(1)).unwrap();
                let eight = solve(&inst, &DecomposeBudget::default().with_threads(8)).unwrap();
                (result_json(&one), result_json(&eight))
            };
            prop_assert_eq!(one, eight);
            Ok(())
        })
        .unwrap();
}

#[test]
fn probe_thread_independence() {
    let strat = (any::<u64>(), 3usize..=5);
    let cfg = Config { cases: 100, failure_persistence: None, ..Config::default() };
    TestRunner::new_with_rng(cfg, TestRng::from_seed(RngAlgorithm::ChaCha, &[10; 32]))
        .run(&strat, |(seed, n)| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let inst = random_instance(&mut rng, Kind::P2, n, 2);
            let pool = |t| rayon::ThreadPoolBuilder::new().num_threads(t).build().unwrap();
            let one = pool(1).install(|| rank_probe(&inst, 2, 4, seed));
            let many = pool(4).install(|| rank_probe(&inst, 2, 4, seed));
            prop_assert_eq!(one, many);
            Ok(())
        })
        .unwrap();
}
