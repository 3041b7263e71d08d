use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::scalar::{Scalar, Q};

use super::PolyError;

/// Sparse multivariate polynomial; exponent vectors index a fixed variable list.
#[derive(Clone, Debug, PartialEq)]
pub struct Poly<T> {
    nvars: usize,
    terms: BTreeMap<Vec<u32>, T>,
}

impl<T: Scalar> Poly<T> {
    pub fn zero(nvars: usize) -> Self {
        Poly { nvars, terms: BTreeMap::new() }
    }

    pub fn constant(nvars: usize, c: T) -> Self {
        let mut p = Self::zero(nvars);
        p.add_term(vec![0; nvars], c);
        p
    }

    pub fn var(nvars: usize, i: usize) -> Self {
        let mut e = vec![0; nvars];
        e[i] = 1;
        let mut p = Self::zero(nvars);
        p.add_term(e, T::one());
        p
    }

    pub fn from_terms(nvars: usize, terms: impl IntoIterator<Item = (Vec<u32>, T)>) -> Self {
        let mut p = Self::zero(nvars);
        for (e, c) in terms {
            assert_eq!(e.len(), nvars);
            p.add_term(e, c);
        }
        p
    }

    /// Affine form `c0 + Σ c_i x_i`.
    pub fn affine(nvars: usize, coeffs: &[T], c0: T) -> Self {
        let mut p = Self::constant(nvars, c0);
        for (i, c) in coeffs.iter().enumerate() {
            if !c.is_zero() {
                let mut e = vec![0; nvars];
                e[i] = 1;
                p.add_term(e, c.clone());
            }
        }
        p
    }

    pub fn add_term(&mut self, e: Vec<u32>, c: T) {
        if c.is_zero() {
            return;
        }
        match self.terms.get_mut(&e) {
            Some(v) => {
                *v += c;
                if v.is_zero() {
                    self.terms.remove(&e);
                }
            }
            None => {
                self.terms.insert(e, c);
            }
        }
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Vec<u32>, &T)> {
        self.terms.iter()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn degree(&self) -> u32 {
        self.terms.keys().map(|e| e.iter().sum()).max().unwrap_or(0)
    }

    pub fn degree_in(&self, i: usize) -> u32 {
        self.terms.keys().map(|e| e[i]).max().unwrap_or(0)
    }

    pub fn is_constant(&self) -> bool {
        self.degree() == 0
    }

    pub fn constant_term(&self) -> T {
        self.terms.get(&vec![0; self.nvars]).cloned().unwrap_or_else(T::zero)
    }

    /// Coefficients and constant when the polynomial has degree at most 1.
    pub fn as_affine(&self) -> Option<(Vec<T>, T)> {
        if self.degree() > 1 {
            return None;
        }
        let mut c = vec![T::zero(); self.nvars];
        for (e, v) in &self.terms {
            if let Some(i) = e.iter().position(|&x| x == 1) {
                c[i] = v.clone();
            }
        }
        Some((c, self.constant_term()))
    }

    pub fn uses(&self, i: usize) -> bool {
        self.terms.keys().any(|e| e[i] > 0)
    }

    pub fn vars_used(&self) -> Vec<usize> {
        (0..self.nvars).filter(|&i| self.uses(i)).collect()
    }

    pub fn neg(&self) -> Self {
        Poly { nvars: self.nvars, terms: self.terms.iter().map(|(e, c)| (e.clone(), -c.clone())).collect() }
    }

    pub fn scale(&self, s: &T) -> Self {
        if s.is_zero() {
            return Self::zero(self.nvars);
        }
        Poly { nvars: self.nvars, terms: self.terms.iter().map(|(e, c)| (e.clone(), c.clone() * s.clone())).collect() }
    }

    pub fn add(&self, o: &Self) -> Self {
        let mut p = self.clone();
        for (e, c) in &o.terms {
            p.add_term(e.clone(), c.clone());
        }
        p
    }

    pub fn sub(&self, o: &Self) -> Self {
        let mut p = self.clone();
        for (e, c) in &o.terms {
            p.add_term(e.clone(), -c.clone());
        }
        p
    }

    pub fn mul(&self, o: &Self) -> Self {
        let mut p = Self::zero(self.nvars);
        for (e1, c1) in &self.terms {
            for (e2, c2) in &o.terms {
                let e: Vec<u32> = e1.iter().zip(e2).map(|(a, b)| a + b).collect();
                p.add_term(e, c1.clone() * c2.clone());
            }
        }
        p
    }

    pub fn pow(&self, k: u32) -> Self {
        let mut acc = Self::constant(self.nvars, T::one());
        for _ in 0..k {
            acc = acc.mul(self);
        }
        acc
    }

    pub fn eval(&self, x: &[T]) -> T {
        let mut s = T::zero();
        for (e, c) in &self.terms {
            let mut t = c.clone();
            for (i, &k) in e.iter().enumerate() {
                for _ in 0..k {
                    t *= x[i].clone();
                }
            }
            s += t;
        }
        s
    }

    pub fn eval_f64(&self, x: &[f64]) -> f64 {
        self.terms
            .iter()
            .map(|(e, c)| e.iter().enumerate().fold(c.to_f64(), |t, (i, &k)| t * x[i].powi(k as i32)))
            .sum()
    }

    pub fn derivative(&self, i: usize) -> Self {
        let mut p = Self::zero(self.nvars);
        for (e, c) in &self.terms {
            if e[i] > 0 {
                let mut f = e.clone();
                f[i] -= 1;
                p.add_term(f, c.clone() * T::from_i64(e[i] as i64));
            }
        }
        p
    }

    /// Replace variable `i` by the polynomial `q` (which must not use `i`).
    pub fn substitute(&self, i: usize, q: &Self) -> Self {
        let maxd = self.degree_in(i) as usize;
        let mut powers = vec![Self::constant(self.nvars, T::one())];
        for k in 1..=maxd {
            powers.push(powers[k - 1].mul(q));
        }
        let mut p = Self::zero(self.nvars);
        for (e, c) in &self.terms {
            let mut f = e.clone();
            let k = f[i] as usize;
            f[i] = 0;
            let mono = Poly::from_terms(self.nvars, [(f, c.clone())]);
            p = p.add(&mono.mul(&powers[k]));
        }
        p
    }

    /// Fix variable `i` to the value `v`.
    pub fn fix(&self, i: usize, v: &T) -> Self {
        self.substitute(i, &Self::constant(self.nvars, v.clone()))
    }

    /// Re-index into `nvars` variables; `map[i]` is the new index of old variable `i`.
    /// Panics if a used variable maps to `None`.
    pub fn remap(&self, nvars: usize, map: &[Option<usize>]) -> Self {
        let mut p = Self::zero(nvars);
        for (e, c) in &self.terms {
            let mut f = vec![0; nvars];
            for (i, &k) in e.iter().enumerate() {
                if k > 0 {
                    f[map[i].expect("remapped variable is in use")] += k;
                }
            }
            p.add_term(f, c.clone());
        }
        p
    }

    pub fn map_coeffs<U: Scalar>(&self, f: impl Fn(&T) -> U) -> Poly<U> {
        let mut p = Poly::zero(self.nvars);
        for (e, c) in &self.terms {
            p.add_term(e.clone(), f(c));
        }
        p
    }

    pub fn to_f64(&self) -> Poly<f64> {
        self.map_coeffs(|c| c.to_f64())
    }

    pub fn max_abs_coeff(&self) -> f64 {
        self.terms.values().map(|c| c.to_f64().abs()).fold(0.0, f64::max)
    }

    /// Human-readable form using the given variable names.
    pub fn format(&self, names: &[String]) -> String {
        if self.terms.is_empty() {
            return "0".into();
        }
        let mut out = String::new();
        // highest degree first, then reverse lexicographic exponent
        let mut terms: Vec<(&Vec<u32>, &T)> = self.terms.iter().collect();
        terms.sort_by(|a, b| {
            let da: u32 = a.0.iter().sum();
            let db: u32 = b.0.iter().sum();
            db.cmp(&da).then_with(|| b.0.cmp(a.0))
        });
        for (k, (e, c)) in terms.into_iter().enumerate() {
            let neg = c.sign_tol(0.0) < 0;
            let mag = if neg { -c.clone() } else { c.clone() };
            if k == 0 {
                if neg {
                    out.push('-');
                }
            } else {
                out.push_str(if neg { " - " } else { " + " });
            }
            let mono: Vec<String> = e
                .iter()
                .enumerate()
                .filter(|(_, &p)| p > 0)
                .map(|(i, &p)| if p == 1 { names[i].clone() } else { format!("{}^{}", names[i], p) })
                .collect();
            let unit = mag == T::one();
            if mono.is_empty() {
                let _ = write!(out, "{}", mag);
            } else if unit {
                out.push_str(&mono.join("*"));
            } else {
                let _ = write!(out, "{}*{}", mag, mono.join("*"));
            }
        }
        out
    }
}

impl Poly<Q> {
    /// Multiply through by the least common denominator so all coefficients are integers.
    pub fn clear_denominators(&self) -> Self {
        use num_integer::Integer;
        let mut l = num_bigint::BigInt::from(1);
        for c in self.terms.values() {
            l = l.lcm(&c.denom());
        }
        self.scale(&Q::from_big(num_rational::BigRational::from_integer(l)))
    }
}

// ---------- parsing ----------

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Num(String),
    Ident(String),
    Op(char),
}

fn lex(s: &str) -> Result<Vec<Tok>, PolyError> {
    let cs: Vec<char> = s.chars().collect();
    let mut i = 0;
    let mut out = Vec::new();
    while i < cs.len() {
        let c = cs[i];
        if c.is_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() || c == '.' {
            let st = i;
            while i < cs.len() && (cs[i].is_ascii_digit() || cs[i] == '.') {
                i += 1;
            }
            // exponent part like 1e-3 (only directly after digits)
            if i < cs.len() && (cs[i] == 'e' || cs[i] == 'E') && i + 1 < cs.len() {
                let j = if cs[i + 1] == '-' || cs[i + 1] == '+' { i + 2 } else { i + 1 };
                if j < cs.len() && cs[j].is_ascii_digit() {
                    i = j;
                    while i < cs.len() && cs[i].is_ascii_digit() {
                        i += 1;
                    }
                }
            }
            out.push(Tok::Num(cs[st..i].iter().collect()));
        } else if c.is_alphabetic() || c == '_' {
            let st = i;
            while i < cs.len() && (cs[i].is_alphanumeric() || cs[i] == '_') {
                i += 1;
            }
            out.push(Tok::Ident(cs[st..i].iter().collect()));
        } else if "+-*/^()".contains(c) {
            out.push(Tok::Op(c));
            i += 1;
        } else {
            return Err(PolyError::Parse(format!("unexpected character `{}`", c)));
        }
    }
    Ok(out)
}

struct Parser<'a, T> {
    toks: Vec<Tok>,
    pos: usize,
    names: &'a mut Vec<String>,
    grow: bool,
    _t: std::marker::PhantomData<T>,
}

/// Expression tree evaluated once the variable list is final.
#[derive(Clone, Debug)]
enum Expr<T> {
    Num(T),
    Var(usize),
    Add(Box<Expr<T>>, Box<Expr<T>>),
    Sub(Box<Expr<T>>, Box<Expr<T>>),
    Mul(Box<Expr<T>>, Box<Expr<T>>),
    Div(Box<Expr<T>>, T),
    Neg(Box<Expr<T>>),
    Pow(Box<Expr<T>>, u32),
}

impl<T: Scalar> Expr<T> {
    fn build(&self, n: usize) -> Poly<T> {
        match self {
            Expr::Num(c) => Poly::constant(n, c.clone()),
            Expr::Var(i) => Poly::var(n, *i),
            Expr::Add(a, b) => a.build(n).add(&b.build(n)),
            Expr::Sub(a, b) => a.build(n).sub(&b.build(n)),
            Expr::Mul(a, b) => a.build(n).mul(&b.build(n)),
            Expr::Div(a, c) => a.build(n).scale(&(T::one() / c.clone())),
            Expr::Neg(a) => a.build(n).neg(),
            Expr::Pow(a, k) => a.build(n).pow(*k),
        }
    }
}

impl<'a, T: Scalar> Parser<'a, T> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos)
    }
    fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(&Tok::Op(c)) {
            self.pos += 1;
            true
        } else {
            false
        }
    }
    fn expr(&mut self) -> Result<Expr<T>, PolyError> {
        let mut a = self.term()?;
        loop {
            if self.eat('+') {
                a = Expr::Add(Box::new(a), Box::new(self.term()?));
            } else if self.eat('-') {
                a = Expr::Sub(Box::new(a), Box::new(self.term()?));
            } else {
                return Ok(a);
            }
        }
    }
    fn term(&mut self) -> Result<Expr<T>, PolyError> {
        let mut a = self.unary()?;
        loop {
            if self.eat('*') {
                a = Expr::Mul(Box::new(a), Box::new(self.unary()?));
            } else if self.eat('/') {
                match self.unary()? {
                    Expr::Num(c) if !c.is_zero() => a = Expr::Div(Box::new(a), c),
                    _ => return Err(PolyError::Parse("division only by nonzero numeric constants".into())),
                }
            } else {
                return Ok(a);
            }
        }
    }
    fn unary(&mut self) -> Result<Expr<T>, PolyError> {
        if self.eat('-') {
            return Ok(Expr::Neg(Box::new(self.unary()?)));
        }
        if self.eat('+') {
            return self.unary();
        }
        self.power()
    }
    fn power(&mut self) -> Result<Expr<T>, PolyError> {
        let a = self.atom()?;
        if self.eat('^') {
            match self.toks.get(self.pos).cloned() {
                Some(Tok::Num(s)) => {
                    self.pos += 1;
                    let k: u32 = s.parse().map_err(|_| PolyError::Parse(format!("bad exponent `{}`", s)))?;
                    Ok(Expr::Pow(Box::new(a), k))
                }
                _ => Err(PolyError::Parse("exponent must be a nonnegative integer".into())),
            }
        } else {
            Ok(a)
        }
    }
    fn atom(&mut self) -> Result<Expr<T>, PolyError> {
        match self.toks.get(self.pos).cloned() {
            Some(Tok::Num(s)) => {
                self.pos += 1;
                Ok(Expr::Num(T::parse_scalar(&s).map_err(PolyError::Parse)?))
            }
            Some(Tok::Ident(s)) => {
                self.pos += 1;
                let idx = match self.names.iter().position(|x| *x == s) {
                    Some(i) => i,
                    None if self.grow => {
                        self.names.push(s);
                        self.names.len() - 1
                    }
                    None => return Err(PolyError::Parse(format!("unknown variable `{}`", s))),
                };
                Ok(Expr::Var(idx))
            }
            Some(Tok::Op('(')) => {
                self.pos += 1;
                let e = self.expr()?;
                if !self.eat(')') {
                    return Err(PolyError::Parse("missing `)`".into()));
                }
                Ok(e)
            }
            other => Err(PolyError::Parse(format!("unexpected token {:?}", other))),
        }
    }
}

/// Parse `lhs = rhs` (or a bare expression meaning `= 0`) into `lhs − rhs`.
/// New variable names are appended to `names` when `grow` is set.
pub(crate) fn parse_equation_tree<T: Scalar>(s: &str, names: &mut Vec<String>, grow: bool) -> Result<Box<dyn Fn(usize) -> Poly<T>>, PolyError> {
    let parts: Vec<&str> = s.split('=').collect();
    if parts.len() > 2 {
        return Err(PolyError::Parse("more than one `=`".into()));
    }
    let mut trees = Vec::new();
    for part in &parts {
        let toks = lex(part)?;
        if toks.is_empty() {
            return Err(PolyError::Parse("empty side of equation".into()));
        }
        let mut p: Parser<T> = Parser { toks, pos: 0, names, grow, _t: std::marker::PhantomData };
        let e = p.expr()?;
        if p.pos != p.toks.len() {
            return Err(PolyError::Parse(format!("trailing input in `{}`", part.trim())));
        }
        trees.push(e);
    }
    let tree = if trees.len() == 2 {
        let b = trees.pop().unwrap();
        let a = trees.pop().unwrap();
        Expr::Sub(Box::new(a), Box::new(b))
    } else {
        trees.pop().unwrap()
    };
    Ok(Box::new(move |n| tree.build(n)))
}
