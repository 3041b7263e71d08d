//! Polynomials in `y` with coefficients in `Q[x]`: resultants, subresultants
//! and gcds used by the exact two-unknown backend.

use crate::scalar::{Scalar, Q};

use super::poly::Poly;
use super::upoly::UPoly;

/// `Σ c[k](x) y^k`, no trailing zero coefficients.
#[derive(Clone, Debug, PartialEq)]
pub struct BPoly {
    c: Vec<UPoly>,
}

impl BPoly {
    pub fn new(mut c: Vec<UPoly>) -> Self {
        while c.last().is_some_and(|v| v.is_zero()) {
            c.pop();
        }
        BPoly { c }
    }

    /// From a polynomial in two variables: index 0 is `x`, index 1 is `y`.
    pub fn from_poly(p: &Poly<Q>) -> Self {
        assert_eq!(p.nvars(), 2);
        let dy = p.degree_in(1) as usize;
        let dx = p.degree_in(0) as usize;
        let mut c = vec![vec![Q::int(0); dx + 1]; dy + 1];
        for (e, v) in p.terms() {
            c[e[1] as usize][e[0] as usize] += v.clone();
        }
        BPoly::new(c.into_iter().map(UPoly::new).collect())
    }

    pub fn to_poly(&self) -> Poly<Q> {
        let mut p = Poly::zero(2);
        for (k, u) in self.c.iter().enumerate() {
            for (i, v) in u.coeffs().iter().enumerate() {
                p.add_term(vec![i as u32, k as u32], v.clone());
            }
        }
        p
    }

    pub fn coeffs(&self) -> &[UPoly] {
        &self.c
    }

    pub fn is_zero(&self) -> bool {
        self.c.is_empty()
    }

    pub fn deg_y(&self) -> Option<usize> {
        self.c.len().checked_sub(1)
    }

    /// Total degree of the polynomial (0 for constants and zero).
    pub fn total_degree(&self) -> usize {
        self.c.iter().enumerate().filter_map(|(k, u)| u.degree().map(|d| d + k)).max().unwrap_or(0)
    }

    pub fn lc(&self) -> UPoly {
        self.c.last().cloned().unwrap_or_else(UPoly::zero)
    }

    pub fn is_constant(&self) -> bool {
        self.c.len() <= 1 && self.c.first().map_or(true, |u| u.degree().unwrap_or(0) == 0)
    }

    pub fn eval_x(&self, x: &Q) -> UPoly {
        UPoly::new(self.c.iter().map(|u| u.eval(x)).collect())
    }

    pub fn derivative_y(&self) -> BPoly {
        BPoly::new(self.c.iter().enumerate().skip(1).map(|(k, u)| u.scale(&Q::int(k as i64))).collect())
    }

    pub fn scale_u(&self, s: &UPoly) -> BPoly {
        BPoly::new(self.c.iter().map(|u| u.mul(s)).collect())
    }

    pub fn sub(&self, o: &BPoly) -> BPoly {
        let n = self.c.len().max(o.c.len());
        BPoly::new(
            (0..n)
                .map(|k| {
                    let a = self.c.get(k).cloned().unwrap_or_else(UPoly::zero);
                    let b = o.c.get(k).cloned().unwrap_or_else(UPoly::zero);
                    a.sub(&b)
                })
                .collect(),
        )
    }

    fn shift(&self, k: usize) -> BPoly {
        let mut c = vec![UPoly::zero(); k];
        c.extend(self.c.iter().cloned());
        BPoly::new(c)
    }

    /// gcd of the coefficients in `Q[x]`, monic.
    pub fn content(&self) -> UPoly {
        self.c.iter().fold(UPoly::zero(), |g, u| if g.is_zero() { u.monic() } else { g.gcd(u) })
    }

    pub fn primitive(&self) -> BPoly {
        let g = self.content();
        if g.is_zero() {
            return self.clone();
        }
        BPoly::new(self.c.iter().map(|u| u.exact_div(&g)).collect())
    }

    /// Pseudo-quotient and pseudo-remainder: `lc(g)^e f = q g + r` with `deg_y r < deg_y g`.
    pub fn pseudo_divrem(&self, g: &BPoly) -> (BPoly, BPoly) {
        let dg = g.deg_y().expect("pseudo division by zero");
        let lg = g.lc();
        let mut r = self.clone();
        let mut q = BPoly::new(Vec::new());
        while let Some(dr) = r.deg_y() {
            if dr < dg {
                break;
            }
            let lr = r.lc();
            // r <- lg r − lr y^(dr−dg) g, q <- lg q + lr y^(dr−dg)
            let t = BPoly::new(vec![lr]).shift(dr - dg);
            r = r.scale_u(&lg).sub(&g.mul(&t));
            q = q.scale_u(&lg).sub(&t.neg());

        }
        (q, r)
    }

    pub fn neg(&self) -> BPoly {
        BPoly::new(self.c.iter().map(|u| u.neg()).collect())
    }

    pub fn mul(&self, o: &BPoly) -> BPoly {
        if self.is_zero() || o.is_zero() {
            return BPoly::new(Vec::new());
        }
        let mut c = vec![UPoly::zero(); self.c.len() + o.c.len() - 1];
        for (i, a) in self.c.iter().enumerate() {
            for (j, b) in o.c.iter().enumerate() {
                c[i + j] = c[i + j].add(&a.mul(b));
            }
        }
        BPoly::new(c)
    }

    /// Exact quotient `self / g` in `Q[x, y]`, or `None` if `g` does not divide.
    pub fn div_exact(&self, g: &BPoly) -> Option<BPoly> {
        if g.deg_y() == Some(0) {
            let u = &g.c[0];
            let mut out = Vec::new();
            for a in &self.c {
                let (q, r) = a.divrem(u);
                if !r.is_zero() {
                    return None;
                }
                out.push(q);
            }
            return Some(BPoly::new(out));
        }
        // long division in y with exact division of leading coefficients in Q[x]
        let dg = g.deg_y()?;
        let lg = g.lc();
        let mut r = self.clone();
        let mut q = vec![UPoly::zero(); self.c.len().saturating_sub(dg).max(1)];
        while let Some(dr) = r.deg_y() {
            if dr < dg {
                return None;
            }
            let (t, rem) = r.lc().divrem(&lg);
            if !rem.is_zero() {
                return None;
            }
            q[dr - dg] = q[dr - dg].add(&t);
            r = r.sub(&g.mul(&BPoly::new(vec![t]).shift(dr - dg)));
        }
        Some(BPoly::new(q))
    }

    /// gcd in `Q[x, y]` up to a nonzero rational factor, by primitive remainder sequences.
    pub fn gcd(&self, o: &BPoly) -> BPoly {
        if self.is_zero() {
            return o.clone();
        }
        if o.is_zero() {
            return self.clone();
        }
        let cg = self.content().gcd(&o.content());
        let (mut a, mut b) = (self.primitive(), o.primitive());
        if a.deg_y() < b.deg_y() {
            std::mem::swap(&mut a, &mut b);
        }
        while !b.is_zero() && b.deg_y() > Some(0) {
            let (_, r) = a.pseudo_divrem(&b);
            a = b;
            b = if r.is_zero() { r } else { r.primitive() };
        }
        let g = if b.is_zero() { a } else { BPoly::new(vec![UPoly::constant(Q::int(1))]) };
        let g = g.scale_u(&cg);
        // fix the scale so the leading rational coefficient is 1
        let lead = g.lc().lc();
        if lead.is_zero() {
            g
        } else {
            g.scale_u(&UPoly::constant(lead.recip()))
        }
    }

    /// Exchange the roles of `x` and `y`.
    pub fn swap(&self) -> BPoly {
        let p = self.to_poly();
        BPoly::from_poly(&p.remap(2, &[Some(1), Some(0)]))
    }
}

/// Determinant over `Q[x]` by fraction-free (Bareiss) elimination.
pub fn bareiss_det(mut m: Vec<Vec<UPoly>>) -> UPoly {
    let n = m.len();
    if n == 0 {
        return UPoly::constant(Q::int(1));
    }
    let mut sign = false;
    let mut prev = UPoly::constant(Q::int(1));
    for k in 0..n - 1 {
        if m[k][k].is_zero() {
            match (k + 1..n).find(|&i| !m[i][k].is_zero()) {
                Some(p) => {
                    m.swap(p, k);
                    sign = !sign;
                }
                None => return UPoly::zero(),
            }
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let v = m[i][j].mul(&m[k][k]).sub(&m[i][k].mul(&m[k][j]));
                m[i][j] = v.exact_div(&prev);
            }
        }
        prev = m[k][k].clone();
        for i in k + 1..n {
            m[i][k] = UPoly::zero();
        }
    }
    let d = m[n - 1][n - 1].clone();
    if sign {
        d.neg()
    } else {
        d
    }
}

fn sylvester_rows(f: &BPoly, g: &BPoly, j: usize) -> Vec<Vec<UPoly>> {
    let m = f.deg_y().unwrap();
    let n = g.deg_y().unwrap();
    let width = m + n - j;
    let mut rows = Vec::new();
    for (p, deg, count) in [(f, m, n - j), (g, n, m - j)] {
        for i in (0..count).rev() {
            // row for y^i p, columns are powers width-1 .. 0
            let mut row = vec![UPoly::zero(); width];
            for k in 0..=deg {
                row[width - 1 - (k + i)] = p.c[k].clone();
            }
            rows.push(row);
        }
    }
    rows
}

/// `res_y(f, g)`; both must have positive degree in `y`.
pub fn resultant_y(f: &BPoly, g: &BPoly) -> UPoly {
    bareiss_det(sylvester_rows(f, g, 0))
}

/// Coefficients `(s11, s10)` of the first subresultant `S1 = s11 y + s10`,
/// up to a common nonzero constant when one input is linear in `y`.
pub fn subresultant1_y(f: &BPoly, g: &BPoly) -> (UPoly, UPoly) {
    let m = f.deg_y().unwrap();
    let n = g.deg_y().unwrap();
    if n == 1 {
        return (g.c[1].clone(), g.c[0].clone());
    }
    if m == 1 {
        return (f.c[1].clone(), f.c[0].clone());
    }
    let rows = sylvester_rows(f, g, 1);
    let width = m + n - 1;
    let lead = width - 2;
    let pick = |pow: usize| -> UPoly {
        let mat: Vec<Vec<UPoly>> = rows
            .iter()
            .map(|r| {
                let mut v: Vec<UPoly> = r[..lead].to_vec();
                v.push(r[width - 1 - pow].clone());
                v
            })
            .collect();
        bareiss_det(mat)
    };
    (pick(1), pick(0))
}

/// `Σ_k c_k(x) (−s10)^k s11^(D−k)` with `D` the even number ≥ deg_y: the numerator of
/// `c(x, −s10/s11)` times a square, so its sign equals the sign of `c` where `s11 ≠ 0`.
pub fn substitute_ratio(c: &BPoly, s11: &UPoly, s10: &UPoly) -> UPoly {
    let dy = c.deg_y().unwrap_or(0);
    let d = dy + dy % 2;
    let mut acc = UPoly::zero();
    let ns10 = s10.neg();
    for (k, ck) in c.c.iter().enumerate() {
        acc = acc.add(&ck.mul(&ns10.pow(k as u32)).mul(&s11.pow((d - k) as u32)));
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polysolve::poly::parse_equation_tree;

    fn bp(s: &str) -> BPoly {
        let mut names = vec!["x".to_string(), "y".to_string()];
        BPoly::from_poly(&parse_equation_tree::<Q>(s, &mut names, false).unwrap()(2))
    }

    #[test]
    fn resultant_of_circle_and_line() {
        // x^2 + y^2 - 5 and y - x - 1: eliminating y gives 2x^2 + 2x - 4
        let r = resultant_y(&bp("x^2 + y^2 - 5"), &bp("y - x - 1"));
        let roots: Vec<f64> = r.isolate().iter().map(|z| z.approx()).collect();
        assert_eq!(roots.len(), 2);
        assert!((roots[0] + 2.0).abs() < 1e-12 && (roots[1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn subresultant_recovers_y() {
        let f = bp("y^2 - x");
        let g = bp("y^2 + y - x - 2");
        // common root at x = 4, y = 2
        let (s11, s10) = subresultant1_y(&f, &g);
        let x = Q::int(4);
        let y = -s10.eval(&x) / s11.eval(&x);
        assert_eq!(y, Q::int(2));
        assert!(resultant_y(&f, &g).eval(&x).is_zero());
    }

    #[test]
    fn gcd_detects_common_factor() {
        let a = bp("(x - y)*(x + 2*y + 1)");
        let b = bp("(x - y)*(x^2 + y)");
        let g = a.gcd(&b);
        assert_eq!(g.total_degree(), 1);
        assert!(a.div_exact(&g).is_some() && b.div_exact(&g).is_some());
        assert!(bp("x + y").gcd(&bp("x - y")).is_constant());
    }

    #[test]
    fn determinant_over_qx() {
        let x = UPoly::x();
        let one = UPoly::constant(Q::int(1));
        let m = vec![vec![x.clone(), one.clone()], vec![one.clone(), x.clone()]];
        assert_eq!(bareiss_det(m), x.mul(&x).sub(&one));
    }
}
