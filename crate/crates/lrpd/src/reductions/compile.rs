use crate::scalar::Scalar;
use crate::symcore::SymMatrix;

use super::ReductionError;

/// P3 instance `(A, X)` compiled to the zero-diagonal matrix
/// `B = [[0, 0, Kᵀ], [0, 0, K̄ᵀ], [K, K̄, A]]` of size `2m + n`, where `m`
/// counts the free pairs, `K` is their node-edge incidence matrix and `K̄`
/// the node-arc one with each pair `(i, j)`, `i < j`, oriented from `i`
/// (`+1`) to `j` (`−1`). A PSD `B + Diag([u; v; d])` of rank `2m + r`
/// corresponds to a fill `R` with `A + R` PSD of rank `r`.
#[derive(Clone, Debug, PartialEq)]
pub struct P3ToP2<T> {
    pub b: SymMatrix<T>,
    pub m: usize,
    pub n: usize,
    pub free: Vec<(usize, usize)>,
}

/// Compile a P3 instance; `x` lists the fixed pairs.
pub fn reduce_p3_to_p2<T: Scalar>(a: &SymMatrix<T>, x: &[(usize, usize)]) -> Result<P3ToP2<T>, ReductionError> {
    let n = a.n();
    let fixed: std::collections::HashSet<(usize, usize)> = x.iter().map(|&(i, j)| (i.min(j), i.max(j))).collect();
    let mut free = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            if !fixed.contains(&(i, j)) {
                free.push((i, j));
            }
        }
    }
    let m = free.len();
    let b = SymMatrix::from_fn(2 * m + n, |r, c| {
        // r ≥ c: only the bottom-left border and the A block are nonzero
        if r < 2 * m {
            return T::zero();
        }
        let i = r - 2 * m;
        if c >= 2 * m {
            return a.get(i, c - 2 * m).clone();
        }
        let (e, arc) = if c < m { (c, false) } else { (c - m, true) };
        let (p, q) = free[e];
        match (i == p, i == q, arc) {
            (true, _, _) => T::one(),
            (_, true, false) => T::one(),
            (_, true, true) => -T::one(),
            _ => T::zero(),
        }
    });
    let out = P3ToP2 { b, m, n, free };
    for c in 0..2 * m {
        if (2 * m..2 * m + n).all(|r| out.b.get(r, c).is_zero()) {
            return Err(ReductionError::ZeroColumn(c));
        }
    }
    Ok(out)
}

impl<T: Scalar> P3ToP2<T> {
    /// `[u; v; d]` from a fill `R` vanishing on the fixed pairs:
    /// `v = 1/(|R_ij| + 1)`, `u = v/(1 − v R_ij)`, `d_i = R_ii + Σ (1/u + 1/v)`
    /// over the free pairs at `i`.
    pub fn forward(&self, r: &SymMatrix<T>) -> Result<Vec<T>, ReductionError> {
        if r.n() != self.n {
            return Err(ReductionError::Dimension(format!("fill is {}×{}, expected {}", r.n(), r.n(), self.n)));
        }
        let m = self.m;
        let mut u = Vec::with_capacity(m);
        let mut v = Vec::with_capacity(m);
        let mut d = r.diag();
        for &(i, j) in &self.free {
            let rij = r.get(i, j).clone();
            let vi = T::one() / (rij.abs() + T::one());
            let ui = vi.clone() / (T::one() - vi.clone() * rij);
            let s = T::one() / ui.clone() + T::one() / vi.clone();
            d[i] += s.clone();
            d[j] += s;
            u.push(ui);
            v.push(vi);
        }
        u.extend(v);
        u.extend(d);
        Ok(u)
    }

    /// `R = Diag(d) − K Diag(u)⁻¹ Kᵀ − K̄ Diag(v)⁻¹ K̄ᵀ`.
    pub fn backward(&self, w: &[T]) -> Result<SymMatrix<T>, ReductionError> {
        let (m, n) = (self.m, self.n);
        if w.len() != 2 * m + n {
            return Err(ReductionError::Dimension(format!("vector of length {}, expected {}", w.len(), 2 * m + n)));
        }
        if let Some(k) = (0..2 * m).find(|&k| w[k].is_zero()) {
            return Err(ReductionError::ZeroPivot(k));
        }
        let mut r = SymMatrix::from_diag(&w[2 * m..]);
        for (e, &(i, j)) in self.free.iter().enumerate() {
            let iu = T::one() / w[e].clone();
            let iv = T::one() / w[m + e].clone();
            let s = iu.clone() + iv.clone();
            for k in [i, j] {
                let x = r.get(k, k).clone() - s.clone();
                r.set(k, k, x);
            }
            r.set(j, i, iv - iu);
        }
        Ok(r)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::Q;
    use crate::symcore::numeric_rank;

    #[test]
    fn no_free_pairs_is_identity() {
        let a = SymMatrix::<Q>::from_i64_rows(&[vec![0, 1], vec![1, 0]]).unwrap();
        let c = reduce_p3_to_p2(&a, &[(0, 1)]).unwrap();
        assert_eq!(c.m, 0);
        assert_eq!(c.b, a);
    }

    #[test]
    fn round_trip_and_rank() {
        let a = SymMatrix::<Q>::from_i64_rows(&[vec![0, 1, 0, 0], vec![1, 0, 2, 0], vec![0, 2, 0, 0], vec![0, 0, 0, 0]]).unwrap();
        let x = vec![(0, 1), (1, 2), (0, 3), (1, 3)];
        let c = reduce_p3_to_p2(&a, &x).unwrap();
        assert_eq!(c.free, vec![(0, 2), (2, 3)]);
        let r = SymMatrix::from_i64_rows(&[vec![3, 0, -2, 0], vec![0, 5, 0, 0], vec![-2, 0, 7, 4], vec![0, 0, 4, 6]]).unwrap();
        let w = c.forward(&r).unwrap();
        assert_eq!(c.backward(&w).unwrap(), r);
        let big = c.b.add_diag(&w);
        let rb = numeric_rank(&big, 0.0).unwrap().rank;
        let ra = numeric_rank(&a.add(&r), 0.0).unwrap().rank;
        assert_eq!(rb, 2 * c.m + ra);
    }
}
