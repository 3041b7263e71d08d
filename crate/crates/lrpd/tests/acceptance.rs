//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any
//! failure. Runs without the libtest harness so the lines always print.

mod common;

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::Instant;

use lrpd::charsys::{assemble_linear_system, Alg1Outcome, CharKind};
use lrpd::cli::{DecompositionFile, InstanceFile};
use lrpd::decompose::{solve, solve_p2_min, verify, Decomposition, DecomposeBudget, Instance, Kind, SolveResult};
use lrpd::fixtures::{example1, example1_family, example1_six};
use lrpd::oracle::{brute_force_3color, check_perturbation_lemmas, rank_probe, small_completion_search, small_graphs, CompletionGrid};
use lrpd::polysolve::inner2::v_from_solution;
use lrpd::polysolve::{algorithm2, PolySystem, SolveBudget};
use lrpd::reductions::{
    appendix_p2tilde_instance, build_bbar, build_p1_instance, build_p2_instance, build_p3_instance, chain_system,
    extend_peeters_coloring, lemma_block, p3_from_graph, reduce_p3_to_p2, schur_from_graph, Graph,
};
use lrpd::scalar::{Scalar, Q};
use lrpd::symcore::{inverse, psd_check, scaled_rank, schur_complement, smat, svec, SymMatrix};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::{exact_rank, planted_gram, random_instance, random_sym, result_json, zero_diag};

type Outcome = Result<String, String>;

macro_rules! ensure {
    ($cond:expr, $($fmt:tt)+) => {
        if !$cond {
            return Err(format!($($fmt)+));
        }
    };
}

fn err<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

fn data(name: &str) -> String {
    format!("{}/data/{}", env!("CARGO_MANIFEST_DIR"), name)
}

fn cli(args: &[&str]) -> i32 {
    let mut sink = Vec::new();
    lrpd::cli::run(std::iter::once("lrpd").chain(args.iter().copied()), &mut sink)
}

fn qs(v: &[i64]) -> Vec<Q> {
    v.iter().map(|&x| Q::int(x)).collect()
}

fn example1_reproduction() -> Outcome {
    let t0 = Instant::now();
    let budget = DecomposeBudget::default();
    let inst = Instance::new(Kind::P2, example1(), 3);
    let SolveResult::Feasible(dec) = solve(&inst, &budget).map_err(err)? else {
        return Err("rank 3 not feasible".into());
    };
    let rep = verify(&inst, &dec, 0.0);
    ensure!(rep.pass && rep.rank == 3, "solver witness failed verification: {:?}", rep);
    ensure!(example1_family(&dec.d[0], &dec.d[1]) == dec.d, "d = {:?} is off the family", dec.d);
    let printed = verify(&inst, &Decomposition::from_d(qs(&[2, 2, 3, 2, 2])), 0.0);
    ensure!(printed.pass && printed.rank == 3, "d = [2,2,3,2,2] does not verify");
    let subsets = match solve(&inst.with_rank(2), &budget).map_err(err)? {
        SolveResult::Infeasible { subsets_checked } => subsets_checked,
        other => return Err(format!("rank 2 returned {}", other.label())),
    };
    let file = data("example1.json");
    ensure!(cli(&["decompose", &file, "--rank", "3"]) == 0, "cli rank 3 exit code");
    ensure!(cli(&["decompose", &file, "--rank", "2"]) == 1, "cli rank 2 exit code");
    let secs = t0.elapsed().as_secs_f64();
    ensure!(secs < 60.0, "took {:.1} s", secs);
    let d: Vec<String> = dec.d.iter().map(|v| v.to_string()).collect();
    Ok(format!("rank 3 feasible with d = [{}], rank 2 infeasible over {} index sets, {:.2} s", d.join(", "), subsets, secs))
}

fn two_solution_variant() -> Outcome {
    let a = example1_six();
    let j = [0, 1, 2];
    let budget = SolveBudget::default();
    let sys = assemble_linear_system(&a, &j, CharKind::P2).map_err(err)?;
    let exact = algorithm2(&a, &j, &sys.linear_lhs, &sys.linear_rhs, CharKind::P2, &[], &budget, 0.0).map_err(err)?;
    let af = a.to_f64();
    let sysf = assemble_linear_system(&af, &j, CharKind::P2).map_err(err)?;
    let float = algorithm2(&af, &j, &sysf.linear_lhs, &sysf.linear_rhs, CharKind::P2, &[], &budget, 1e-9).map_err(err)?;
    for (label, sols) in [("exact", &exact.solutions), ("float", &float.solutions)] {
        let mut alphas: Vec<f64> = sols.iter().map(|s| *inverse(&v_from_solution(3, s), 1e-12).unwrap().get(0, 0)).collect();
        alphas.sort_by(f64::total_cmp);
        ensure!(alphas.len() == 2, "{} backend found {} solutions: {:?}", label, alphas.len(), alphas);
        ensure!((alphas[0] - 2.0).abs() <= 1e-6 && (alphas[1] - 4.0).abs() <= 1e-6, "{} backend alphas {:?}", label, alphas);
    }
    let Alg1Outcome::Solved { d, v } = &exact.outcome else {
        return Err(format!("exact backend outcome {}", exact.outcome.label()));
    };
    let alpha = inverse(v, 0.0).map_err(err)?.get(0, 0).clone();
    ensure!(alpha == Q::int(2) || alpha == Q::int(4), "certified alpha {}", alpha);
    let m = a.add_diag(d);
    ensure!(psd_check(&m, 0.0).map_err(err)?.psd && exact_rank(&m) == 3, "certified d does not give a rank-3 PSD matrix");
    Ok(format!("two solutions with alpha in {{2, 4}} on both backends, exact certificate at alpha = {}", alpha))
}

fn planted_recovery() -> Outcome {
    let t0 = Instant::now();
    let budget = DecomposeBudget::default();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut certified = 0;
    for t in 0..50 {
        let r = 1 + t % 2;
        let n = rng.gen_range(r + 2..=8);
        let a = zero_diag(&planted_gram(&mut rng, n, r, 3));
        let min = solve_p2_min(&a, &budget).map_err(err)?;
        ensure!(min.rank == r, "P2 trial {} (n = {}): planted rank {}, recovered {}", t, n, r, min.rank);
        let rep = verify(&Instance::new(Kind::P2, a.clone(), r), &min.decomposition, 0.0);
        ensure!(rep.pass, "P2 trial {}: witness fails verification", t);
        certified += min.certified as usize;
    }
    let mut p1_certified = 0;
    for t in 0..50 {
        let r = 1 + t % 2;
        let n = rng.gen_range(r + 2..=8);
        let noise: Vec<Q> = (0..n).map(|_| Q::int(rng.gen_range(0..=3))).collect();
        let a = planted_gram(&mut rng, n, r, 3).add_diag(&noise);
        let mut found = None;
        let mut complete = true;
        for k in 1..=r {
            let inst = Instance::new(Kind::P1, a.clone(), k);
            match solve(&inst, &budget).map_err(err)? {
                SolveResult::Feasible(dec) => {
                    let rep = verify(&inst, &dec, 0.0);
                    ensure!(rep.pass, "P1 trial {}: witness fails verification at rank {}", t, k);
                    found = Some(rep.rank);
                    break;
                }
                SolveResult::Infeasible { .. } => {}
                SolveResult::Unknown(_) => complete = false,
            }
        }
        ensure!(found == Some(r), "P1 trial {} (n = {}): planted rank {}, recovered {:?}", t, n, r, found);
        p1_certified += complete as usize;
    }
    let secs = t0.elapsed().as_secs_f64();
    ensure!(secs < 300.0, "took {:.1} s", secs);
    Ok(format!(
        "50/50 P2 and 50/50 P1 recovered ({} and {} with every lower rank certified infeasible), {:.1} s",
        certified, p1_certified, secs
    ))
}

fn colors_used(c: &[u8]) -> usize {
    (0..3).filter(|k| c.contains(k)).count()
}

fn forward_witnesses() -> Outcome {
    let graphs = small_graphs(4);
    let mut colorable = 0;
    for g in &graphs {
        let col = brute_force_3color(g).map_err(err)?;
        let Some(c) = col.coloring else {
            ensure!(*g == Graph::complete(4), "unexpected non-colorable graph {}", g.to_edge_list());
            continue;
        };
        colorable += 1;
        let sc = extend_peeters_coloring(g, &c).map_err(err)?;
        let used = colors_used(&sc);
        let p3 = build_p3_instance(g);
        let rep = verify(&p3.instance, &p3.witness(&sc).map_err(err)?, 0.0);
        ensure!(rep.pass && rep.rank == used, "P3 witness on {} vertices fails: rank {}", g.n(), rep.rank);
        for gad in [build_p1_instance(g), build_p2_instance(g)] {
            let dec = gad.witness(&sc).map_err(err)?;
            let rep = verify(&gad.instance, &dec, 0.0);
            ensure!(rep.pass && rep.rank == gad.m() + used, "{:?} witness on {} vertices: rank {} for target m + 3 = {}", gad.instance.kind, g.n(), rep.rank, gad.m() + 3);
            if *g == Graph::complete(3) {
                let fi = Instance::new(gad.instance.kind, gad.instance.a.to_f64(), gad.instance.r);
                let fd = Decomposition::from_d(dec.d.iter().map(|v| v.to_f64()).collect());
                let rep = verify(&fi, &fd, 1e-7);
                ensure!(rep.pass && rep.rank == gad.m() + used && fi.n() == 720, "float K3 {:?} check fails: rank {}", fi.kind, rep.rank);
            }
        }
    }
    let k4 = Graph::complete(4);
    ensure!(!brute_force_3color(&k4).map_err(err)?.colorable, "oracle colors K4");
    let probes = [p3_from_graph(&k4).instance, schur_from_graph(&k4, Kind::P1).map_err(err)?.instance, schur_from_graph(&k4, Kind::P2).map_err(err)?.instance];
    let mut best = Vec::new();
    for (s, inst) in probes.iter().enumerate() {
        let rep = rank_probe(inst, inst.r, 1000, 100 + s as u64);
        ensure!(rep.hits == 0, "probe verified {:?} for K4 at rank {}", inst.kind, inst.r);
        best.push(format!("{:?} best {:?}", inst.kind, rep.best_rank_found));
    }
    Ok(format!("{} colorable graphs verified at targets 3 and m + 3 (achieved rank tracks the colors used; K3 also in float at n = 720), K4 probes 0/1000 hits ({})", colorable, best.join(", ")))
}

fn p3_round_trip() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    for t in 0..20 {
        let n = rng.gen_range(3..=5);
        let r = rng.gen_range(1..=2);
        let m_target = rng.gen_range(1..=3);
        let target = planted_gram(&mut rng, n, r, 3);
        let mut pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect();
        let mut free = Vec::new();
        while free.len() < m_target {
            free.push(pairs.remove(rng.gen_range(0..pairs.len())));
        }
        let a = SymMatrix::from_fn(n, |i, j| {
            let p = (i.min(j), i.max(j));
            if i == j {
                Q::int(0)
            } else if free.contains(&p) {
                Q::int(rng.gen_range(-3..=3))
            } else {
                target.get(i, j).clone()
            }
        });
        let fill = target.sub(&a);
        let comp = reduce_p3_to_p2(&a, &pairs).map_err(err)?;
        ensure!(comp.m == free.len(), "trial {}: compiled m = {} for {} free pairs", t, comp.m, free.len());
        let w = comp.forward(&fill).map_err(err)?;
        let big = comp.b.add_diag(&w);
        let inst = Instance::new(Kind::P2, comp.b.clone(), 2 * comp.m + r);
        let rep = verify(&inst, &Decomposition::from_d(w.clone()), 0.0);
        ensure!(rep.pass, "trial {}: forward witness fails at rank {}", t, inst.r);
        ensure!(exact_rank(&big) == 2 * comp.m + exact_rank(&a.add(&fill)), "trial {}: rank identity fails", t);
        ensure!(comp.backward(&w).map_err(err)? == fill, "trial {}: backward map differs", t);
    }
    Ok("20/20 planted instances: forward verifies at 2m + r, backward returns R, rank identity exact".into())
}

fn polynomial_compiler() -> Outcome {
    let mut systems = vec![(PolySystem::parse_text("x - 2").map_err(err)?, vec![Q::int(2)])];
    for n in 1..=3 {
        let xi: Vec<Q> = (0..n).map(|t| Q::int(2).pow(1 << t)).collect();
        systems.push((chain_system(n), xi));
    }
    let mut sizes = Vec::new();
    let mut saw_257 = false;
    for (f, xi) in &systems {
        let sh = build_bbar(f).map_err(err)?;
        let w = sh.completion(xi);
        ensure!(psd_check(&w, 0.0).map_err(err)?.psd, "completion not PSD");
        ensure!(exact_rank(&w) == 3, "completion rank {}", exact_rank(&w));
        ensure!(sh.bbar.agrees(&w, 0.0), "completion disagrees with a specified entry");
        let inst = sh.instance();
        let rep = verify(&inst, &sh.witness(xi).map_err(err)?, 0.0);
        ensure!(rep.pass && rep.rank == 3, "witness verification fails");
        if f.var_count() == 3 {
            saw_257 = w.diag().contains(&Q::int(257));
        }
        sizes.push(sh.n().to_string());
    }
    ensure!(saw_257, "no diagonal entry 257 in the three-step chain");
    let res = small_completion_search(&lemma_block(), 1, &CompletionGrid::default()).map_err(err)?;
    ensure!(res.best_rank == Some(1) && res.completions == vec![vec![1.0, 1.0, 1.0]], "lemma block search: {:?}", res);
    Ok(format!("x - 2 and chains 1..3 (sizes {}) complete at rank 3, diagonal 257 present, lemma block completion unique", sizes.join(", ")))
}

fn appendix_path() -> Outcome {
    let t0 = Instant::now();
    let ai = appendix_p2tilde_instance(&Graph::path(3), 2e-16, 2.0, 1e4, 1e-12).map_err(err)?;
    ensure!(ai.m() == 9 && ai.instance.n() == 18, "unexpected size");
    let w = ai.witness(&[0, 1, 2]).map_err(err)?;
    let m = w.decomposition.completed(&ai.instance).map_err(err)?;
    let h = w.decomposition.h.as_ref().ok_or("witness has no perturbation")?;
    let hf = h.frobenius();
    ensure!(hf <= ai.params.eps, "|H|_F = {:e} exceeds eps", hf);
    ensure!(psd_check(&m, 0.0).map_err(err)?.psd, "completion not PSD");
    let exact = exact_rank(&m);
    let float = scaled_rank(&m.to_f64(), 1e-7).map_err(err)?.rank;
    ensure!(exact == 12 && float == 12, "rank exact {}, float {}", exact, float);
    ensure!(w.report.pass, "validator violations: {:?}", w.report.violations());
    let rep = verify(&ai.instance.with_rank(12), &w.decomposition, 0.0);
    ensure!(rep.pass, "verifier rejects the witness");
    let secs = t0.elapsed().as_secs_f64();
    ensure!(secs < 10.0, "took {:.1} s", secs);
    Ok(format!("rank 12 exact and at tol 1e-7, |H|_F = {:.2e} <= eps = {:.2e}, validator clean, {:.2} s", hf, ai.params.eps, secs))
}

fn property_suites() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    const TRIALS: usize = 100;
    for t in 0..TRIALS {
        let n = rng.gen_range(3..=7);
        let k = rng.gen_range(1..=n);
        let m = common::gram(&common::int_factor(&mut rng, n, k, 3));
        let j: Vec<usize> = (0..rng.gen_range(1..n)).collect();
        if exact_rank(&m.principal(&j)) < j.len() {
            continue;
        }
        let s = schur_complement(&m, &j, 0.0).map_err(err)?;
        ensure!(exact_rank(&m) == j.len() + exact_rank(&s), "Schur rank identity fails in trial {}", t);
    }
    let lemmas = check_perturbation_lemmas(TRIALS, 8);
    ensure!(lemmas.violations() == 0, "lemma violations: {:?}", lemmas.checks);
    for t in 0..TRIALS {
        let n = rng.gen_range(1..=6);
        let m = random_sym(&mut rng, n, 9);
        ensure!(smat(&svec(&m)).map_err(err)? == m, "svec/smat trial {}", t);
        let kind = [Kind::P1, Kind::P2, Kind::P3][t % 3];
        let inst = random_instance(&mut rng, kind, n.max(2), 1);
        let f = InstanceFile::from_instance(&inst, None);
        let back: InstanceFile = serde_json::from_str(&serde_json::to_string(&f).map_err(err)?).map_err(err)?;
        ensure!(back.to_instance::<Q>().map_err(err)? == inst, "instance round trip trial {}", t);
        let dec = Decomposition::from_d((0..inst.n()).map(|_| Q::new(rng.gen_range(-9..=9), rng.gen_range(1..=7))).collect());
        let df = DecompositionFile::from_decomposition(&dec, &f.content_hash());
        let back: DecompositionFile = serde_json::from_str(&serde_json::to_string(&df).map_err(err)?).map_err(err)?;
        ensure!(back.to_decomposition::<Q>(inst.n()).map_err(err)? == dec, "decomposition round trip trial {}", t);
    }
    for t in 0..TRIALS {
        let n = rng.gen_range(4..=5);
        let kind = [Kind::P1, Kind::P2, Kind::P3][t % 3];
        let inst = random_instance(&mut rng, kind, n, 2);
        let one = solve(&inst, &DecomposeBudget::default().with_threads(1)).map_err(err)?;
        let eight = solve(&inst, &DecomposeBudget::default().with_threads(8)).map_err(err)?;
        ensure!(result_json(&one) == result_json(&eight), "thread count changes the result in trial {}", t);
        if t % 4 == 0 {
            let fi = Instance { a: inst.a.to_f64(), kind: inst.kind, x: inst.x.clone(), r: inst.r, eps: 0.0, sparsity_constrained: false };
            let one = solve(&fi, &DecomposeBudget::default().with_threads(1)).map_err(err)?;
            let eight = solve(&fi, &DecomposeBudget::default().with_threads(8)).map_err(err)?;
            ensure!(result_json(&one) == result_json(&eight), "float thread count changes the result in trial {}", t);
        }
    }
    Ok(format!("{} trials each: Schur ranks, three perturbation lemmas, svec/smat, file round trips, 1 vs 8 threads", TRIALS))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 8] = [
        ("example 1 reproduction", example1_reproduction),
        ("two-solution variant", two_solution_variant),
        ("planted recovery", planted_recovery),
        ("coloring forward witnesses", forward_witnesses),
        ("P3 to P2 round trip", p3_round_trip),
        ("polynomial compiler", polynomial_compiler),
        ("perturbed construction on a path", appendix_path),
        ("property suites", property_suites),
    ];
    // `ACCEPTANCE_ONLY=4,7` runs a subset
    let only: Option<Vec<usize>> = std::env::var("ACCEPTANCE_ONLY").ok().map(|v| v.split(',').filter_map(|t| t.trim().parse().ok()).collect());
    let mut failed = 0;
    let mut ran = 0;
    for (k, (name, f)) in criteria.iter().enumerate() {
        if only.as_ref().is_some_and(|o| !o.contains(&(k + 1))) {
            continue;
        }
        ran += 1;
        let t0 = Instant::now();
        let out = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|p| {
            Err(p.downcast_ref::<String>().cloned().or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string())).unwrap_or_else(|| "panic".into()))
        });
        let secs = t0.elapsed().as_secs_f64();
        match out {
            Ok(detail) => println!("criterion {} PASS [{}] ({:.1} s): {}", k + 1, name, secs, detail),
            Err(why) => {
                failed += 1;
                println!("criterion {} FAIL [{}] ({:.1} s): {}", k + 1, name, secs, why);
            }
        }
    }
    println!("acceptance: {} of {} criteria passed", ran - failed, ran);
    if failed > 0 {
        std::process::exit(1);
    }
}
