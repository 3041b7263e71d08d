//! Scalar field abstraction shared by the exact and floating-point paths.
//!
//! [`Q`] is an exact rational that stays on an `i64` fast path and only boxes a
//! `BigRational` when a value no longer fits. Gadget matrices have thousands of
//! rows of tiny integers, so the compact representation matters for memory.

use std::cmp::Ordering;
use std::fmt;
use std::hash::{Hash, Hasher};
use std::ops::{Add, AddAssign, Div, Mul, MulAssign, Neg, Sub, SubAssign};
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::de::{self, Deserializer, Visitor};
use serde::{Serialize, Serializer};

/// Operations every matrix entry type supports.
pub trait Scalar:
    Clone
    + fmt::Debug
    + fmt::Display
    + PartialEq
    + PartialOrd
    + Send
    + Sync
    + 'static
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + AddAssign
    + SubAssign
    + MulAssign
{
    /// True for exact arithmetic, where tolerances are ignored.
    const EXACT: bool;

    fn zero() -> Self;
    fn one() -> Self;
    fn from_i64(v: i64) -> Self;
    fn from_q(q: &Q) -> Self;
    /// Float value converted through its exact binary expansion; non-finite input maps to zero.
    fn from_f64(v: f64) -> Self;
    fn to_f64(&self) -> f64;
    /// Exact value when available; floats convert through their binary expansion.
    fn to_q(&self) -> Option<Q>;
    fn is_zero(&self) -> bool;
    fn abs(&self) -> Self;
    fn is_finite(&self) -> bool;

    /// Sign with a dead zone of `tol` (ignored in exact mode).
    fn sign_tol(&self, tol: f64) -> i8 {
        if Self::EXACT {
            match self.partial_cmp(&Self::zero()) {
                Some(Ordering::Greater) => 1,
                Some(Ordering::Less) => -1,
                _ => 0,
            }
        } else {
            let v = self.to_f64();
            if v > tol {
                1
            } else if v < -tol {
                -1
            } else {
                0
            }
        }
    }

    fn from_ratio(p: i64, q: i64) -> Self {
        Self::from_q(&Q::new(p, q))
    }

    fn parse_scalar(s: &str) -> Result<Self, String>;
}

/// Exact rational number with a small-integer fast path.
#[derive(Clone)]
pub enum Q {
    /// Reduced fraction `num/den` with `den > 0`.
    S(i64, i64),
    /// Value that does not fit the small representation.
    B(Box<BigRational>),
}

fn gcd_i128(mut a: i128, mut b: i128) -> i128 {
    a = a.abs();
    b = b.abs();
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

impl Q {
    pub fn new(num: i64, den: i64) -> Q {
        assert!(den != 0, "zero denominator");
        Q::from_i128(num as i128, den as i128)
    }

    pub fn int(v: i64) -> Q {
        Q::S(v, 1)
    }

    fn from_i128(num: i128, den: i128) -> Q {
        let (mut n, mut d) = (num, den);
        if d < 0 {
            n = -n;
            d = -d;
        }
        let g = gcd_i128(n, d);
        if g > 1 {
            n /= g;
            d /= g;
        }
        if n == 0 {
            return Q::S(0, 1);
        }
        match (i64::try_from(n), i64::try_from(d)) {
            (Ok(a), Ok(b)) => Q::S(a, b),
            _ => Q::B(Box::new(BigRational::new_raw(BigInt::from(n), BigInt::from(d)))),
        }
    }

    /// Canonicalize a big rational, demoting to the small form when it fits.
    pub fn from_big(r: BigRational) -> Q {
        let r = if r.denom().is_negative() || !r.numer().gcd(r.denom()).is_one() {
            BigRational::new(r.numer().clone(), r.denom().clone())
        } else {
            r
        };
        match (r.numer().to_i64(), r.denom().to_i64()) {
            (Some(a), Some(b)) => Q::S(a, b),
            _ => Q::B(Box::new(r)),
        }
    }

    pub fn to_big(&self) -> BigRational {
        match self {
            Q::S(n, d) => BigRational::new_raw(BigInt::from(*n), BigInt::from(*d)),
            Q::B(b) => (**b).clone(),
        }
    }

    pub fn numer(&self) -> BigInt {
        match self {
            Q::S(n, _) => BigInt::from(*n),
            Q::B(b) => b.numer().clone(),
        }
    }

    pub fn denom(&self) -> BigInt {
        match self {
            Q::S(_, d) => BigInt::from(*d),
            Q::B(b) => b.denom().clone(),
        }
    }

    pub fn is_integer(&self) -> bool {
        match self {
            Q::S(_, d) => *d == 1,
            Q::B(b) => b.is_integer(),
        }
    }

    pub fn signum(&self) -> i8 {
        match self {
            Q::S(n, _) => n.signum() as i8,
            Q::B(b) => {
                if b.is_positive() {
                    1
                } else if b.is_negative() {
                    -1
                } else {
                    0
                }
            }
        }
    }

    pub fn recip(&self) -> Q {
        match self {
            Q::S(n, d) => Q::from_i128(*d as i128, *n as i128),
            Q::B(b) => Q::from_big(b.recip()),
        }
    }

    pub fn floor(&self) -> Q {
        match self {
            Q::S(n, d) => Q::int(n.div_floor(d)),
            Q::B(b) => Q::from_big(b.floor()),
        }
    }

    pub fn pow(&self, e: u32) -> Q {
        let mut acc = Q::int(1);
        for _ in 0..e {
            acc = acc * self.clone();
        }
        acc
    }

    /// Exact value of a finite binary64.
    pub fn from_f64_exact(v: f64) -> Option<Q> {
        BigRational::from_float(v).map(Q::from_big)
    }

    /// Continued-fraction convergents of `v` whose denominators stay below `max_den`.
    pub fn convergents(v: f64, max_den: i64) -> Vec<Q> {
        let mut out = Vec::new();
        if !v.is_finite() {
            return out;
        }
        let (mut h0, mut h1) = (0i128, 1i128);
        let (mut k0, mut k1) = (1i128, 0i128);
        let mut x = v;
        for _ in 0..64 {
            let a = x.floor();
            if a.abs() > 1e15 {
                break;
            }
            let ai = a as i128;
            let h2 = ai * h1 + h0;
            let k2 = ai * k1 + k0;
            if k2 > max_den as i128 || h2.abs() > i64::MAX as i128 {
                break;
            }
            out.push(Q::from_i128(h2, k2));
            h0 = h1;
            h1 = h2;
            k0 = k1;
            k1 = k2;
            let frac = x - a;
            if frac.abs() < 1e-15 {
                break;
            }
            x = 1.0 / frac;
        }
        out
    }

    /// Simplest rational strictly inside `(lo, hi)` (Stern-Brocot descent).
    pub fn simplest_between(lo: &Q, hi: &Q) -> Q {
        debug_assert!(lo < hi);
        let zero = Q::int(0);
        if lo < &zero && hi > &zero {
            return zero;
        }
        if hi <= &zero {
            return -Q::simplest_between(&-hi.clone(), &-lo.clone());
        }
        let fl = lo.floor();
        let cand = fl.clone() + Q::int(1);
        if &cand < hi {
            return cand;
        }
        // lo and hi share the integer part; descend on the reciprocal of the fractional parts.
        let a = lo.clone() - fl.clone();
        let b = hi.clone() - fl.clone();
        if a.is_zero_q() {
            // lo is an integer: the answer is fl + 1/y with y the smallest integer above 1/b.
            let y = b.recip().floor() + Q::int(1);
            return fl + y.recip();
        }
        let inner = Q::simplest_between(&b.recip(), &a.recip());
        fl + inner.recip()
    }

    fn is_zero_q(&self) -> bool {
        matches!(self, Q::S(0, _))
    }

    fn big_op(&self, other: &Q, f: impl Fn(BigRational, BigRational) -> BigRational) -> Q {
        Q::from_big(f(self.to_big(), other.to_big()))
    }
}

impl Default for Q {
    fn default() -> Self {
        Q::S(0, 1)
    }
}

impl PartialEq for Q {
    fn eq(&self, other: &Q) -> bool {
        match (self, other) {
            (Q::S(a, b), Q::S(c, d)) => a == c && b == d,
            (Q::B(x), Q::B(y)) => x == y,
            _ => false,
        }
    }
}

impl Eq for Q {}

impl Hash for Q {
    fn hash<H: Hasher>(&self, state: &mut H) {
        match self {
            Q::S(a, b) => {
                0u8.hash(state);
                a.hash(state);
                b.hash(state);
            }
            Q::B(x) => {
                1u8.hash(state);
                x.numer().hash(state);
                x.denom().hash(state);
            }
        }
    }
}

impl Ord for Q {
    fn cmp(&self, other: &Q) -> Ordering {
        match (self, other) {
            (Q::S(a, b), Q::S(c, d)) => ((*a as i128) * (*d as i128)).cmp(&((*c as i128) * (*b as i128))),
            _ => self.to_big().cmp(&other.to_big()),
        }
    }
}

impl PartialOrd for Q {
    fn partial_cmp(&self, other: &Q) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Add for Q {
    type Output = Q;
    fn add(self, o: Q) -> Q {
        match (&self, &o) {
            (Q::S(a, b), Q::S(c, d)) => {
                if *b == 1 && *d == 1 {
                    return match a.checked_add(*c) {
                        Some(s) => Q::S(s, 1),
                        None => Q::from_i128(*a as i128 + *c as i128, 1),
                    };
                }
                let (a, b, c, d) = (*a as i128, *b as i128, *c as i128, *d as i128);
                Q::from_i128(a * d + c * b, b * d)
            }
            _ => self.big_op(&o, |x, y| x + y),
        }
    }
}

impl Sub for Q {
    type Output = Q;
    fn sub(self, o: Q) -> Q {
        self + (-o)
    }
}

impl Neg for Q {
    type Output = Q;
    fn neg(self) -> Q {
        match self {
            Q::S(a, b) => match a.checked_neg() {
                Some(n) => Q::S(n, b),
                None => Q::from_i128(-(a as i128), b as i128),
            },
            Q::B(x) => Q::from_big(-*x),
        }
    }
}

impl Mul for Q {
    type Output = Q;
    fn mul(self, o: Q) -> Q {
        match (&self, &o) {
            (Q::S(a, b), Q::S(c, d)) => {
                if *a == 0 || *c == 0 {
                    return Q::S(0, 1);
                }
                if *b == 1 && *d == 1 {
                    return match a.checked_mul(*c) {
                        Some(p) => Q::S(p, 1),
                        None => Q::from_i128(*a as i128 * *c as i128, 1),
                    };
                }
                let (a, b, c, d) = (*a as i128, *b as i128, *c as i128, *d as i128);
                let g1 = gcd_i128(a, d).max(1);
                let g2 = gcd_i128(c, b).max(1);
                Q::from_i128((a / g1) * (c / g2), (b / g2) * (d / g1))
            }
            _ => self.big_op(&o, |x, y| x * y),
        }
    }
}

impl Div for Q {
    type Output = Q;
    fn div(self, o: Q) -> Q {
        assert!(!Scalar::is_zero(&o), "division by zero");
        self * o.recip()
    }
}

impl AddAssign for Q {
    fn add_assign(&mut self, o: Q) {
        *self = std::mem::take(self) + o;
    }
}

impl SubAssign for Q {
    fn sub_assign(&mut self, o: Q) {
        *self = std::mem::take(self) - o;
    }
}

impl MulAssign for Q {
    fn mul_assign(&mut self, o: Q) {
        *self = std::mem::take(self) * o;
    }
}

impl fmt::Display for Q {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Q::S(n, 1) => write!(f, "{n}"),
            Q::S(n, d) => write!(f, "{n}/{d}"),
            Q::B(x) => {
                if x.is_integer() {
                    write!(f, "{}", x.numer())
                } else {
                    write!(f, "{}/{}", x.numer(), x.denom())
                }
            }
        }
    }
}

impl fmt::Debug for Q {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// Parse `p`, `p/q`, or a decimal such as `-1.25e-3`, exactly.
impl FromStr for Q {
    type Err = String;
    fn from_str(s: &str) -> Result<Q, String> {
        let s = s.trim();
        if s.is_empty() {
            return Err("empty rational".into());
        }
        if let Some((p, q)) = s.split_once('/') {
            let p: BigInt = p.trim().parse().map_err(|_| format!("bad numerator in {s:?}"))?;
            let q: BigInt = q.trim().parse().map_err(|_| format!("bad denominator in {s:?}"))?;
            if q.is_zero() {
                return Err(format!("zero denominator in {s:?}"));
            }
            return Ok(Q::from_big(BigRational::new(p, q)));
        }
        let (mant, exp) = match s.find(['e', 'E']) {
            Some(i) => (&s[..i], s[i + 1..].parse::<i32>().map_err(|_| format!("bad exponent in {s:?}"))?),
            None => (s, 0),
        };
        let (neg, mant) = match mant.strip_prefix('-') {
            Some(m) => (true, m),
            None => (false, mant.strip_prefix('+').unwrap_or(mant)),
        };
        let (int_part, frac_part) = match mant.split_once('.') {
            Some((a, b)) => (a, b),
            None => (mant, ""),
        };
        if int_part.is_empty() && frac_part.is_empty() {
            return Err(format!("bad number {s:?}"));
        }
        if !int_part.chars().chain(frac_part.chars()).all(|c| c.is_ascii_digit()) {
            return Err(format!("bad number {s:?}"));
        }
        let digits = format!("{int_part}{frac_part}");
        let mut num: BigInt = if digits.is_empty() { BigInt::zero() } else { digits.parse().unwrap() };
        if neg {
            num = -num;
        }
        let scale = exp - frac_part.len() as i32;
        let ten = BigInt::from(10);
        let r = if scale >= 0 {
            BigRational::from_integer(num * num_traits::pow(ten, scale as usize))
        } else {
            BigRational::new(num, num_traits::pow(ten, (-scale) as usize))
        };
        Ok(Q::from_big(r))
    }
}

impl Serialize for Q {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> serde::Deserialize<'de> for Q {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Q, D::Error> {
        struct V;
        impl<'de> Visitor<'de> for V {
            type Value = Q;
            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("a rational as a string or integer")
            }
            fn visit_str<E: de::Error>(self, v: &str) -> Result<Q, E> {
                v.parse().map_err(E::custom)
            }
            fn visit_i64<E: de::Error>(self, v: i64) -> Result<Q, E> {
                Ok(Q::int(v))
            }
            fn visit_u64<E: de::Error>(self, v: u64) -> Result<Q, E> {
                Ok(Q::from_big(BigRational::from_integer(BigInt::from(v))))
            }
        }
        d.deserialize_any(V)
    }
}

impl Scalar for Q {
    const EXACT: bool = true;
    fn zero() -> Q {
        Q::S(0, 1)
    }
    fn one() -> Q {
        Q::S(1, 1)
    }
    fn from_i64(v: i64) -> Q {
        Q::S(v, 1)
    }
    fn from_q(q: &Q) -> Q {
        q.clone()
    }
    fn from_f64(v: f64) -> Q {
        Q::from_f64_exact(v).unwrap_or_default()
    }
    fn to_f64(&self) -> f64 {
        match self {
            Q::S(n, d) => *n as f64 / *d as f64,
            Q::B(x) => x.to_f64().unwrap_or_else(|| {
                // Ratio of huge integers: fall back to logarithms of magnitudes.
                let n = x.numer().to_f64().unwrap_or(f64::INFINITY);
                let d = x.denom().to_f64().unwrap_or(f64::INFINITY);
                n / d
            }),
        }
    }
    fn to_q(&self) -> Option<Q> {
        Some(self.clone())
    }
    fn is_zero(&self) -> bool {
        self.is_zero_q()
    }
    fn abs(&self) -> Q {
        if self.signum() < 0 {
            -self.clone()
        } else {
            self.clone()
        }
    }
    fn is_finite(&self) -> bool {
        true
    }
    fn parse_scalar(s: &str) -> Result<Q, String> {
        s.parse()
    }
}

impl Scalar for f64 {
    const EXACT: bool = false;
    fn zero() -> f64 {
        0.0
    }
    fn one() -> f64 {
        1.0
    }
    fn from_i64(v: i64) -> f64 {
        v as f64
    }
    fn from_q(q: &Q) -> f64 {
        q.to_f64()
    }
    fn from_f64(v: f64) -> f64 {
        v
    }
    fn to_f64(&self) -> f64 {
        *self
    }
    fn to_q(&self) -> Option<Q> {
        Q::from_f64_exact(*self)
    }
    fn is_zero(&self) -> bool {
        *self == 0.0
    }
    fn abs(&self) -> f64 {
        f64::abs(*self)
    }
    fn is_finite(&self) -> bool {
        f64::is_finite(*self)
    }
    fn parse_scalar(s: &str) -> Result<f64, String> {
        let s = s.trim();
        if let Ok(v) = s.parse::<f64>() {
            return Ok(v);
        }
        s.parse::<Q>().map(|q| q.to_f64())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_arithmetic_stays_small() {
        let a = Q::new(1, 3);
        let b = Q::new(1, 6);
        assert_eq!(a.clone() + b.clone(), Q::new(1, 2));
        assert_eq!(a.clone() * b.clone(), Q::new(1, 18));
        assert_eq!(a / b, Q::int(2));
        assert!(matches!(Q::new(4, -8), Q::S(-1, 2)));
    }

    #[test]
    fn overflow_promotes_and_demotes() {
        let big = Q::int(i64::MAX) * Q::int(4);
        assert!(matches!(big, Q::B(_)));
        let back = big / Q::int(4);
        assert_eq!(back, Q::int(i64::MAX));
        assert!(matches!(back, Q::S(_, 1)));
    }

    #[test]
    fn parse_forms() {
        assert_eq!("3/6".parse::<Q>().unwrap(), Q::new(1, 2));
        assert_eq!("-1.25".parse::<Q>().unwrap(), Q::new(-5, 4));
        assert_eq!("2e-3".parse::<Q>().unwrap(), Q::new(1, 500));
        assert!("1/0".parse::<Q>().is_err());
        assert!("abc".parse::<Q>().is_err());
    }

    #[test]
    fn ordering_and_simplest() {
        assert!(Q::new(1, 3) < Q::new(1, 2));
        let s = Q::simplest_between(&Q::new(31, 100), &Q::new(35, 100));
        assert_eq!(s, Q::new(1, 3));
        let s = Q::simplest_between(&Q::new(-7, 2), &Q::new(-3, 1));
        assert!(s > Q::new(-7, 2) && s < Q::int(-3));
        assert_eq!(Q::simplest_between(&Q::int(2), &Q::new(5, 2)), Q::new(7, 3));
    }

    #[test]
    fn convergents_of_decimal() {
        let c = Q::convergents(0.333333333333, 1000);
        assert!(c.contains(&Q::new(1, 3)));
    }
}
