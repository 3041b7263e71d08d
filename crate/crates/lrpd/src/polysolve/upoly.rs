//! Univariate polynomials over Q with Sturm-sequence real root isolation and
//! exact sign evaluation at real algebraic numbers.

use std::cmp::Ordering;

use crate::scalar::{Scalar, Q};

/// Dense coefficients, lowest degree first, no trailing zeros.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct UPoly {
    c: Vec<Q>,
}

impl UPoly {
    pub fn new(mut c: Vec<Q>) -> Self {
        while c.last().is_some_and(|v| v.is_zero()) {
            c.pop();
        }
        UPoly { c }
    }

    pub fn zero() -> Self {
        UPoly { c: Vec::new() }
    }

    pub fn constant(v: Q) -> Self {
        UPoly::new(vec![v])
    }

    pub fn x() -> Self {
        UPoly::new(vec![Q::int(0), Q::int(1)])
    }

    pub fn coeffs(&self) -> &[Q] {
        &self.c
    }

    pub fn is_zero(&self) -> bool {
        self.c.is_empty()
    }

    /// Degree, with the zero polynomial reported as `None`.
    pub fn degree(&self) -> Option<usize> {
        self.c.len().checked_sub(1)
    }

    pub fn lc(&self) -> Q {
        self.c.last().cloned().unwrap_or_default()
    }

    pub fn eval(&self, x: &Q) -> Q {
        let mut s = Q::int(0);
        for v in self.c.iter().rev() {
            s = s * x.clone() + v.clone();
        }
        s
    }

    pub fn eval_f64(&self, x: f64) -> f64 {
        self.c.iter().rev().fold(0.0, |s, v| s * x + v.to_f64())
    }

    pub fn add(&self, o: &UPoly) -> UPoly {
        let n = self.c.len().max(o.c.len());
        UPoly::new((0..n).map(|i| self.c.get(i).cloned().unwrap_or_default() + o.c.get(i).cloned().unwrap_or_default()).collect())
    }

    pub fn neg(&self) -> UPoly {
        UPoly { c: self.c.iter().map(|v| -v.clone()).collect() }
    }

    pub fn sub(&self, o: &UPoly) -> UPoly {
        self.add(&o.neg())
    }

    pub fn scale(&self, s: &Q) -> UPoly {
        UPoly::new(self.c.iter().map(|v| v.clone() * s.clone()).collect())
    }

    pub fn mul(&self, o: &UPoly) -> UPoly {
        if self.is_zero() || o.is_zero() {
            return UPoly::zero();
        }
        let mut c = vec![Q::int(0); self.c.len() + o.c.len() - 1];
        for (i, a) in self.c.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in o.c.iter().enumerate() {
                c[i + j] += a.clone() * b.clone();
            }
        }
        UPoly::new(c)
    }

    pub fn pow(&self, k: u32) -> UPoly {
        let mut acc = UPoly::constant(Q::int(1));
        for _ in 0..k {
            acc = acc.mul(self);
        }
        acc
    }

    /// Quotient and remainder; panics on division by zero.
    pub fn divrem(&self, d: &UPoly) -> (UPoly, UPoly) {
        let dd = d.degree().expect("division by the zero polynomial");
        let mut r = self.c.clone();
        if r.len() <= dd {
            return (UPoly::zero(), self.clone());
        }
        let lc = d.lc();
        let mut q = vec![Q::int(0); r.len() - dd];
        for k in (0..q.len()).rev() {
            let f = r[k + dd].clone() / lc.clone();
            if !f.is_zero() {
                for (i, dv) in d.c.iter().enumerate() {
                    r[k + i] -= f.clone() * dv.clone();
                }
            }
            q[k] = f;
        }
        r.truncate(dd);
        (UPoly::new(q), UPoly::new(r))
    }

    pub fn rem(&self, d: &UPoly) -> UPoly {
        self.divrem(d).1
    }

    /// Exact quotient; the caller guarantees divisibility.
    pub fn exact_div(&self, d: &UPoly) -> UPoly {
        let (q, r) = self.divrem(d);
        debug_assert!(r.is_zero(), "inexact polynomial division");
        q
    }

    pub fn monic(&self) -> UPoly {
        if self.is_zero() {
            return UPoly::zero();
        }
        self.scale(&self.lc().recip())
    }

    pub fn derivative(&self) -> UPoly {
        UPoly::new(self.c.iter().enumerate().skip(1).map(|(i, v)| v.clone() * Q::int(i as i64)).collect())
    }

    pub fn gcd(&self, o: &UPoly) -> UPoly {
        let (mut a, mut b) = (self.clone(), o.clone());
        while !b.is_zero() {
            let r = a.rem(&b);
            a = b;
            b = r.monic();
        }
        a.monic()
    }

    /// Product of the distinct irreducible factors.
    pub fn squarefree(&self) -> UPoly {
        if self.degree().unwrap_or(0) == 0 {
            return self.monic();
        }
        let g = self.gcd(&self.derivative());
        self.exact_div(&g).monic()
    }

    pub fn sign_at(&self, x: &Q) -> i8 {
        self.eval(x).signum()
    }

    /// Upper bound on the absolute value of every real root (Cauchy).
    pub fn root_bound(&self) -> Q {
        let lc = self.lc().abs();
        let m = self.c.iter().take(self.c.len().saturating_sub(1)).map(|v| v.abs() / lc.clone()).max().unwrap_or_default();
        m + Q::int(1)
    }

    pub fn sturm(&self) -> Vec<UPoly> {
        let mut seq = vec![self.clone(), self.derivative()];
        loop {
            let n = seq.len();
            if seq[n - 1].is_zero() {
                seq.pop();
                break;
            }
            let r = seq[n - 2].rem(&seq[n - 1]).neg();
            if r.is_zero() {
                break;
            }
            // positive rescaling keeps sign variations and tames coefficient growth
            let s = r.lc().abs().recip();
            seq.push(r.scale(&s));
        }
        seq
    }

    /// Number of distinct real roots in the half-open interval `(a, b]`.
    pub fn count_roots(&self, a: &Q, b: &Q) -> usize {
        if self.is_zero() {
            return usize::MAX;
        }
        let s = self.sturm();
        variations(&s, a).saturating_sub(variations(&s, b))
    }

    /// Disjoint isolating intervals `(lo, hi]` for the distinct real roots, in increasing order.
    pub fn isolate(&self) -> Vec<RealRoot> {
        if self.degree().unwrap_or(0) == 0 {
            return Vec::new();
        }
        let p = self.squarefree();
        let s = p.sturm();
        let bound = p.root_bound();
        let mut out = Vec::new();
        let mut stack = vec![(-bound.clone(), bound)];
        while let Some((a, b)) = stack.pop() {
            let k = variations(&s, &a).saturating_sub(variations(&s, &b));
            if k == 0 {
                continue;
            }
            if k == 1 {
                out.push(RealRoot { p: p.clone(), lo: a, hi: b });
                continue;
            }
            let m = (a.clone() + b.clone()) / Q::int(2);
            stack.push((a, m.clone()));
            stack.push((m, b));
        }
        out.sort_by(|x, y| x.lo.cmp(&y.lo));
        for r in &mut out {
            r.tidy();
        }
        out
    }
}

fn variations(seq: &[UPoly], x: &Q) -> usize {
    let mut last = 0i8;
    let mut v = 0;
    for p in seq {
        let s = p.sign_at(x);
        if s != 0 {
            if last != 0 && s != last {
                v += 1;
            }
            last = s;
        }
    }
    v
}

/// A real algebraic number: the unique root of squarefree `p` in `(lo, hi]`.
#[derive(Clone, Debug)]
pub struct RealRoot {
    pub p: UPoly,
    pub lo: Q,
    pub hi: Q,
}

impl RealRoot {
    pub fn rational(v: Q) -> Self {
        RealRoot { p: UPoly::new(vec![-v.clone(), Q::int(1)]), lo: v.clone() - Q::int(1), hi: v }
    }

    /// When the root is an endpoint or a simple rational, collapse to it.
    fn tidy(&mut self) {
        if self.p.eval(&self.hi).is_zero() {
            let v = self.hi.clone();
            *self = RealRoot::rational(v);
        }
    }

    /// Exact value when rational.
    pub fn as_rational(&self) -> Option<Q> {
        if self.p.degree() == Some(1) {
            return Some(-self.p.coeffs()[0].clone() / self.p.coeffs()[1].clone());
        }
        if self.p.eval(&self.hi).is_zero() {
            return Some(self.hi.clone());
        }
        None
    }

    /// Halve the interval once.
    pub fn bisect(&mut self) {
        if self.as_rational().is_some() && self.p.degree() == Some(1) {
            let v = self.as_rational().unwrap();
            let w = (self.hi.clone() - self.lo.clone()) / Q::int(2);
            self.lo = v.clone() - w;
            self.hi = v;
            return;
        }
        let m = (self.lo.clone() + self.hi.clone()) / Q::int(2);
        if self.p.count_roots(&self.lo, &m) == 1 {
            self.hi = m;
        } else {
            self.lo = m;
        }
    }

    pub fn width(&self) -> Q {
        self.hi.clone() - self.lo.clone()
    }

    pub fn refine_to(&mut self, w: f64) {
        let mut guard = 0;
        while self.width().to_f64() > w && guard < 400 {
            self.bisect();
            guard += 1;
        }
    }

    pub fn approx(&self) -> f64 {
        if let Some(v) = self.as_rational() {
            return v.to_f64();
        }
        let mut c = self.clone();
        c.refine_to(1e-15 * (1.0 + c.hi.to_f64().abs()));
        (c.lo.to_f64() + c.hi.to_f64()) / 2.0
    }

    /// Try to recognize a rational root with small denominator by refining and
    /// testing the simplest rational in the interval.
    pub fn find_rational(&mut self, rounds: usize) -> Option<Q> {
        if let Some(v) = self.as_rational() {
            return Some(v);
        }
        for _ in 0..rounds {
            let cand = Q::simplest_between(&self.lo, &self.hi);
            if self.p.eval(&cand).is_zero() {
                *self = RealRoot::rational(cand.clone());
                return Some(cand);
            }
            self.bisect();
        }
        None
    }

    /// Exact sign of `q` at this root.
    pub fn sign_of(&mut self, q: &UPoly) -> i8 {
        if q.is_zero() {
            return 0;
        }
        if let Some(v) = self.as_rational() {
            return q.sign_at(&v);
        }
        let g = self.p.gcd(q);
        if g.degree().unwrap_or(0) > 0 && g.count_roots(&self.lo, &self.hi) == 1 {
            return 0;
        }
        // q has no root at this point; shrink until q has no root in the interval
        let mut guard = 0;
        while q.count_roots(&self.lo, &self.hi) > 0 && guard < 2000 {
            self.bisect();
            guard += 1;
        }
        let m = (self.lo.clone() + self.hi.clone()) / Q::int(2);
        q.sign_at(&m)
    }

    pub fn cmp_rational(&mut self, v: &Q) -> Ordering {
        let lin = UPoly::new(vec![-v.clone(), Q::int(1)]);
        match self.sign_of(&lin) {
            1 => Ordering::Greater,
            -1 => Ordering::Less,
            _ => Ordering::Equal,
        }
    }
}

/// Rational sample points: one strictly inside each open interval cut out by
/// the sorted `roots`, including the two unbounded ends.
pub fn samples_between(roots: &mut [RealRoot]) -> Vec<Q> {
    if roots.is_empty() {
        return vec![Q::int(0)];
    }
    // make neighbouring intervals disjoint
    for i in 0..roots.len().saturating_sub(1) {
        let mut guard = 0;
        while roots[i].hi >= roots[i + 1].lo && guard < 400 {
            roots[i].bisect();
            roots[i + 1].bisect();
            guard += 1;
        }
    }
    let mut out = Vec::new();
    let first = &roots[0];
    out.push(first.lo.clone() - Q::int(1));
    for i in 0..roots.len() - 1 {
        let a = roots[i].hi.clone();
        let b = roots[i + 1].lo.clone();
        out.push(Q::simplest_between(&a, &b));
    }
    out.push(roots[roots.len() - 1].hi.clone() + Q::int(1));
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn from_roots(rs: &[Q]) -> UPoly {
        rs.iter().fold(UPoly::constant(Q::int(1)), |p, r| p.mul(&UPoly::new(vec![-r.clone(), Q::int(1)])))
    }

    #[test]
    fn gcd_and_squarefree() {
        let p = from_roots(&[Q::int(1), Q::int(1), Q::int(2)]);
        assert_eq!(p.squarefree(), from_roots(&[Q::int(1), Q::int(2)]));
        let q = from_roots(&[Q::int(2), Q::int(3)]);
        assert_eq!(p.gcd(&q), from_roots(&[Q::int(2)]));
    }

    #[test]
    fn isolates_rational_and_irrational_roots() {
        // (x - 1/3)(x^2 - 2)(x + 5)
        let p = from_roots(&[Q::new(1, 3), Q::int(-5)]).mul(&UPoly::new(vec![Q::int(-2), Q::int(0), Q::int(1)]));
        let mut rs = p.isolate();
        assert_eq!(rs.len(), 4);
        let approx: Vec<f64> = rs.iter().map(|r| r.approx()).collect();
        let want = [-5.0, -2f64.sqrt(), 1.0 / 3.0, 2f64.sqrt()];
        for (a, w) in approx.iter().zip(want) {
            assert!((a - w).abs() < 1e-12, "{} vs {}", a, w);
        }
        assert_eq!(rs[0].find_rational(80), Some(Q::int(-5)));
        assert_eq!(rs[2].find_rational(80), Some(Q::new(1, 3)));
        assert_eq!(rs[3].find_rational(40), None);
    }

    #[test]
    fn sign_at_algebraic() {
        let mut r = UPoly::new(vec![Q::int(-2), Q::int(0), Q::int(1)]).isolate().pop().unwrap(); // sqrt 2
        assert_eq!(r.sign_of(&UPoly::new(vec![Q::new(-141, 100), Q::int(1)])), 1);
        assert_eq!(r.sign_of(&UPoly::new(vec![Q::new(-142, 100), Q::int(1)])), -1);
        assert_eq!(r.sign_of(&UPoly::new(vec![Q::int(-4), Q::int(0), Q::int(2)])), 0);
        assert_eq!(r.cmp_rational(&Q::int(1)), Ordering::Greater);
    }

    #[test]
    fn samples_separate_roots() {
        let p = from_roots(&[Q::int(0), Q::int(1), Q::int(2)]);
        let mut rs = p.isolate();
        let s = samples_between(&mut rs);
        assert_eq!(s.len(), 4);
        for (k, v) in s.iter().enumerate() {
            assert!(!p.eval(v).is_zero());
            if k > 0 {
                assert!(s[k - 1] < *v);
            }
        }
    }
}
