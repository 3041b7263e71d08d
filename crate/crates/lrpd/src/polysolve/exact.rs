//! Complete real solving for at most two unknowns with strict polynomial
//! side constraints `c > 0`.
//!
//! One unknown: gcd of the equations plus Sturm isolation. Two unknowns: the
//! common curve (bivariate gcd) is sampled above open intervals of its
//! projection set, and the remaining finitely many points come from a
//! resultant, with `y` read off the first subresultant after a shear.

use crate::scalar::{Scalar, Q};

use super::bivar::{resultant_y, subresultant1_y, substitute_ratio, BPoly};
use super::poly::Poly;
use super::upoly::{samples_between, RealRoot, UPoly};

#[derive(Clone, Debug, PartialEq)]
pub enum Val {
    Exact(Q),
    Approx(f64),
}

impl Val {
    pub fn to_f64(&self) -> f64 {
        match self {
            Val::Exact(q) => q.to_f64(),
            Val::Approx(v) => *v,
        }
    }

    pub fn exact(&self) -> Option<Q> {
        match self {
            Val::Exact(q) => Some(q.clone()),
            Val::Approx(_) => None,
        }
    }
}

#[derive(Clone, Debug, Default)]
pub struct ExactResult {
    pub points: Vec<Vec<Val>>,
    pub complete: bool,
    pub notes: Vec<String>,
}

fn to_upoly(p: &Poly<Q>) -> UPoly {
    let d = p.degree_in(0) as usize;
    let mut c = vec![Q::int(0); d + 1];
    for (e, v) in p.terms() {
        c[e[0] as usize] += v.clone();
    }
    UPoly::new(c)
}

fn product_squarefree(ps: &[UPoly]) -> UPoly {
    let mut acc = UPoly::constant(Q::int(1));
    for p in ps {
        if p.degree().unwrap_or(0) > 0 {
            acc = acc.mul(&p.squarefree());
        }
    }
    acc.squarefree()
}

fn root_value(r: &mut RealRoot) -> Val {
    match r.find_rational(64) {
        Some(q) => Val::Exact(q),
        None => Val::Approx(r.approx()),
    }
}

/// Solve in one unknown.
pub fn solve1(eqs: &[Poly<Q>], cons: &[Poly<Q>]) -> ExactResult {
    let eu: Vec<UPoly> = eqs.iter().map(to_upoly).filter(|p| !p.is_zero()).collect();
    let cu: Vec<UPoly> = cons.iter().map(to_upoly).collect();
    let mut out = ExactResult { complete: true, ..Default::default() };
    if eu.iter().any(|p| p.degree() == Some(0)) {
        return out;
    }
    if eu.is_empty() {
        let mut roots = product_squarefree(&cu).isolate();
        for s in samples_between(&mut roots) {
            if cu.iter().all(|c| c.sign_at(&s) > 0) {
                out.points.push(vec![Val::Exact(s)]);
            }
        }
        return out;
    }
    let g = eu.iter().skip(1).fold(eu[0].clone(), |g, p| g.gcd(p));
    for mut r in g.isolate() {
        if cu.iter().all(|c| r.sign_of(c) > 0) {
            out.points.push(vec![root_value(&mut r)]);
        }
    }
    out
}

/// Points of the open set `{c > 0 for all c}` in the plane, one per cell reached.
fn sample_region(cons: &[BPoly], out: &mut ExactResult) {
    let mut proj = Vec::new();
    for (i, c) in cons.iter().enumerate() {
        if c.deg_y().unwrap_or(0) == 0 {
            proj.push(c.lc());
            continue;
        }
        proj.push(c.lc());
        proj.push(resultant_y(c, &c.derivative_y()));
        for d in &cons[i + 1..] {
            if d.deg_y().unwrap_or(0) > 0 {
                proj.push(resultant_y(c, d));
            }
        }
    }
    let proj: Vec<UPoly> = proj.into_iter().filter(|p| !p.is_zero()).collect();
    let mut xr = product_squarefree(&proj).isolate();
    for x0 in samples_between(&mut xr) {
        let fib: Vec<UPoly> = cons.iter().map(|c| c.eval_x(&x0)).collect();
        let mut yr = product_squarefree(&fib).isolate();
        for y0 in samples_between(&mut yr) {
            if fib.iter().all(|c| c.sign_at(&y0) > 0) {
                out.points.push(vec![Val::Exact(x0.clone()), Val::Exact(y0)]);
            }
        }
    }
}

/// Points on the curve `g = 0` where every constraint is positive.
fn sample_curve(g: &BPoly, cons: &[BPoly], out: &mut ExactResult) {
    // vertical components x = α come from the content in Q[x]
    let cx = g.content();
    if cx.degree().unwrap_or(0) > 0 {
        for mut a in cx.isolate() {
            match a.find_rational(64) {
                Some(x0) => {
                    let fib: Vec<UPoly> = cons.iter().map(|c| c.eval_x(&x0)).collect();
                    let mut yr = product_squarefree(&fib).isolate();
                    for y0 in samples_between(&mut yr) {
                        if fib.iter().all(|c| c.sign_at(&y0) > 0) {
                            out.points.push(vec![Val::Exact(x0.clone()), Val::Exact(y0)]);
                        }
                    }
                }
                None => {
                    out.complete = false;
                    out.notes.push("vertical solution line at an irrational abscissa".into());
                }
            }
        }
    }
    let pp = g.primitive();
    if pp.deg_y().unwrap_or(0) == 0 {
        return;
    }
    let mut proj = vec![pp.lc(), resultant_y(&pp, &pp.derivative_y())];
    for c in cons {
        if c.deg_y().unwrap_or(0) > 0 {
            proj.push(c.lc());
            proj.push(resultant_y(&pp, c));
        } else {
            proj.push(c.lc());
        }
    }
    let proj: Vec<UPoly> = proj.into_iter().filter(|p| !p.is_zero()).collect();
    let crit = product_squarefree(&proj);
    let mut xr = crit.isolate();
    let mut xs = samples_between(&mut xr);
    // critical fibres: rational ones are solved exactly, irrational ones flagged
    for r in xr.iter_mut() {
        match r.find_rational(64) {
            Some(q) => xs.push(q),
            None => {
                let fib = pp.eval_x(&r.hi);
                let _ = fib;
                if out.complete {
                    out.notes.push("curve has an irrational critical fibre that was not examined".into());
                }
                out.complete = false;
            }
        }
    }
    for x0 in xs {
        let f = pp.eval_x(&x0);
        if f.is_zero() {
            continue;
        }
        let fib: Vec<UPoly> = cons.iter().map(|c| c.eval_x(&x0)).collect();
        for mut yr in f.isolate() {
            if fib.iter().all(|c| yr.sign_of(c) > 0) {
                let y = root_value(&mut yr);
                out.points.push(vec![Val::Exact(x0.clone()), y]);
            }
        }
    }
}

fn shear(p: &Poly<Q>, t: i64) -> BPoly {
    // x <- x + t y
    let sub = Poly::var(2, 0).add(&Poly::var(2, 1).scale(&Q::int(t)));
    BPoly::from_poly(&p.substitute(0, &sub))
}

/// Common zeros of coprime `hs` (at least two) subject to the constraints.
fn finite_points(hs: &[Poly<Q>], cons: &[Poly<Q>], out: &mut ExactResult) {
    // pick a partner combination coprime to the first equation
    let h1 = hs[0].clone();
    let mut h2 = None;
    for lam in 0..6i64 {
        let mut cand = hs[1].clone();
        let mut w = Q::int(1);
        for h in &hs[2..] {
            w = w * Q::int(lam);
            cand = cand.add(&h.scale(&w));
        }
        if BPoly::from_poly(&h1).gcd(&BPoly::from_poly(&cand)).is_constant() {
            h2 = Some(cand);
            break;
        }
    }
    let Some(h2) = h2 else {
        out.complete = false;
        out.notes.push("could not form a coprime pair of equations".into());
        return;
    };
    'shears: for t in [0i64, 1, -1, 2, 3, -2, 5] {
        let f1 = shear(&h1, t);
        let f2 = shear(&h2, t);
        let ok_lc = |f: &BPoly| f.deg_y().unwrap_or(0) > 0 && f.lc().degree() == Some(0) && f.deg_y() == Some(f.total_degree());
        if !ok_lc(&f1) || !ok_lc(&f2) {
            continue;
        }
        let res = resultant_y(&f1, &f2);
        if res.is_zero() {
            continue;
        }
        let (s11, s10) = subresultant1_y(&f1, &f2);
        let all_eq: Vec<BPoly> = hs.iter().map(|h| shear(h, t)).collect();
        let all_c: Vec<BPoly> = cons.iter().map(|c| shear(c, t)).collect();
        let mut pts = Vec::new();
        for mut a in res.isolate() {
            if a.sign_of(&s11) == 0 {
                continue 'shears;
            }
            if !all_eq.iter().all(|h| a.sign_of(&substitute_ratio(h, &s11, &s10)) == 0) {
                continue;
            }
            if !all_c.iter().all(|c| a.sign_of(&substitute_ratio(c, &s11, &s10)) > 0) {
                continue;
            }
            pts.push(a);
        }
        for mut a in pts {
            match a.find_rational(64) {
                Some(xq) => {
                    let y = -s10.eval(&xq) / s11.eval(&xq);
                    let x = xq + Q::int(t) * y.clone();
                    out.points.push(vec![Val::Exact(x), Val::Exact(y)]);
                }
                None => {
                    let xf = a.approx();
                    let y = -s10.eval_f64(xf) / s11.eval_f64(xf);
                    out.points.push(vec![Val::Approx(xf + t as f64 * y), Val::Approx(y)]);
                }
            }
        }
        return;
    }
    out.complete = false;
    out.notes.push("no shear put the system in generic position".into());
}

/// Solve in two unknowns.
pub fn solve2(eqs: &[Poly<Q>], cons: &[Poly<Q>]) -> ExactResult {
    let mut out = ExactResult { complete: true, ..Default::default() };
    let eqs: Vec<Poly<Q>> = eqs.iter().filter(|p| !p.is_zero()).cloned().collect();
    if eqs.iter().any(|p| p.is_constant()) {
        return out;
    }
    let cb: Vec<BPoly> = cons.iter().map(BPoly::from_poly).collect();
    if eqs.is_empty() {
        sample_region(&cb, &mut out);
        return out;
    }
    let bs: Vec<BPoly> = eqs.iter().map(BPoly::from_poly).collect();
    let g = bs.iter().skip(1).fold(bs[0].clone(), |g, b| g.gcd(b));
    if !g.is_constant() {
        sample_curve(&g, &cb, &mut out);
    }
    let hs: Vec<Poly<Q>> = if g.is_constant() {
        eqs.clone()
    } else {
        bs.iter().map(|b| b.div_exact(&g).expect("gcd divides").to_poly()).collect()
    };
    if hs.iter().any(|h| h.is_constant()) {
        dedupe(&mut out);
        return out;
    }
    if hs.len() == 1 {
        // cannot happen: a single equation is its own gcd
        dedupe(&mut out);
        return out;
    }
    finite_points(&hs, cons, &mut out);
    dedupe(&mut out);
    out
}

fn dedupe(out: &mut ExactResult) {
    let mut kept: Vec<Vec<Val>> = Vec::new();
    for p in out.points.drain(..) {
        let dup = kept.iter().any(|k| k.iter().zip(&p).all(|(a, b)| (a.to_f64() - b.to_f64()).abs() <= 1e-9 * (1.0 + a.to_f64().abs())));
        if !dup {
            kept.push(p);
        }
    }
    out.points = kept;
}
