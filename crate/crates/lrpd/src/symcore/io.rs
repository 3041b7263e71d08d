use serde_json::Value;

use crate::scalar::{Scalar, Q};

use super::matrix::SymMatrix;
use super::SymError;

/// A matrix read from disk in whichever arithmetic mode the file declared.
#[derive(Clone, Debug, PartialEq)]
pub enum AnyMatrix {
    Exact(SymMatrix<Q>),
    Float(SymMatrix<f64>),
}

impl AnyMatrix {
    pub fn n(&self) -> usize {
        match self {
            AnyMatrix::Exact(m) => m.n(),
            AnyMatrix::Float(m) => m.n(),
        }
    }

    pub fn to_f64(&self) -> SymMatrix<f64> {
        match self {
            AnyMatrix::Exact(m) => m.to_f64(),
            AnyMatrix::Float(m) => m.clone(),
        }
    }
}

fn parse_entries<T: Scalar>(n: usize, toks: &[&str]) -> Result<SymMatrix<T>, SymError> {
    let want = n * (n + 1) / 2;
    if toks.len() != want {
        return Err(SymError::Parse(format!("expected {} lower-triangle entries, found {}", want, toks.len())));
    }
    let data = toks.iter().map(|t| T::parse_scalar(t).map_err(SymError::Parse)).collect::<Result<Vec<T>, _>>()?;
    let m = SymMatrix::from_lower(n, data)?;
    if !m.all_finite() {
        return Err(SymError::NonFinite);
    }
    Ok(m)
}

/// Text format: a header `n mode` (mode is `exact` or `float`) followed by the
/// lower triangle row by row, whitespace separated. Lines starting with `#` are skipped.
pub fn parse_text(src: &str) -> Result<AnyMatrix, SymError> {
    let body: Vec<&str> = src.lines().filter(|l| !l.trim_start().starts_with('#')).collect();
    let toks: Vec<&str> = body.iter().flat_map(|l| l.split_whitespace()).collect();
    if toks.len() < 2 {
        return Err(SymError::Parse("missing header `n mode`".into()));
    }
    let n: usize = toks[0].parse().map_err(|_| SymError::Parse(format!("bad dimension `{}`", toks[0])))?;
    if n == 0 {
        return Err(SymError::Empty);
    }
    match toks[1] {
        "exact" => Ok(AnyMatrix::Exact(parse_entries(n, &toks[2..])?)),
        "float" => Ok(AnyMatrix::Float(parse_entries(n, &toks[2..])?)),
        other => Err(SymError::Parse(format!("unknown mode `{}`", other))),
    }
}

pub fn format_text<T: Scalar>(m: &SymMatrix<T>) -> String {
    let mut out = format!("{} {}\n", m.n(), if T::EXACT { "exact" } else { "float" });
    for i in 0..m.n() {
        let row: Vec<String> = (0..=i).map(|j| m.get(i, j).to_string()).collect();
        out.push_str(&row.join(" "));
        out.push('\n');
    }
    out
}

/// Dense JSON array of arrays. Entries that are integers or rational strings
/// give an exact matrix; any other JSON number switches the matrix to float.
pub fn parse_dense_json(src: &str) -> Result<AnyMatrix, SymError> {
    let v: Value = serde_json::from_str(src).map_err(|e| SymError::Parse(e.to_string()))?;
    let rows = v.as_array().ok_or_else(|| SymError::Parse("expected an array of rows".into()))?;
    let mut cells: Vec<Vec<Value>> = Vec::with_capacity(rows.len());
    for r in rows {
        cells.push(r.as_array().ok_or_else(|| SymError::Parse("row is not an array".into()))?.clone());
    }
    let exact = cells.iter().flatten().all(|c| c.is_string() || c.is_i64());
    let tok = |c: &Value| -> Result<String, SymError> {
        match c {
            Value::String(s) => Ok(s.clone()),
            Value::Number(x) => Ok(x.to_string()),
            _ => Err(SymError::Parse(format!("bad entry {}", c))),
        }
    };
    if exact {
        let rows_q = cells
            .iter()
            .map(|r| r.iter().map(|c| tok(c)?.parse::<Q>().map_err(SymError::Parse)).collect::<Result<Vec<_>, _>>())
            .collect::<Result<Vec<_>, _>>()?;
        Ok(AnyMatrix::Exact(SymMatrix::from_rows(&rows_q)?))
    } else {
        let rows_f = cells
            .iter()
            .map(|r| r.iter().map(|c| f64::parse_scalar(&tok(c)?).map_err(SymError::Parse)).collect::<Result<Vec<_>, _>>())
            .collect::<Result<Vec<_>, _>>()?;
        let m = SymMatrix::from_rows(&rows_f)?;
        if !m.all_finite() {
            return Err(SymError::NonFinite);
        }
        Ok(AnyMatrix::Float(m))
    }
}

/// Either format, chosen by the first non-blank character.
pub fn parse_matrix(src: &str) -> Result<AnyMatrix, SymError> {
    if src.trim_start().starts_with('[') {
        parse_dense_json(src)
    } else {
        parse_text(src)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn text_round_trip() {
        let m = SymMatrix::from_rows(&[vec![Q::new(1, 2), Q::int(-3)], vec![Q::int(-3), Q::int(7)]]).unwrap();
        let s = format_text(&m);
        assert_eq!(parse_text(&s).unwrap(), AnyMatrix::Exact(m));
    }

    #[test]
    fn float_text() {
        let m = parse_text("2 float\n1.5\n0.25 -2e3\n").unwrap();
        let AnyMatrix::Float(m) = m else { panic!() };
        assert_eq!(*m.get(1, 0), 0.25);
        assert_eq!(*m.get(1, 1), -2000.0);
    }

    #[test]
    fn json_modes() {
        let e = parse_dense_json(r#"[[0, "1/2"], ["1/2", 0]]"#).unwrap();
        assert!(matches!(e, AnyMatrix::Exact(_)));
        let f = parse_dense_json("[[0.5, 1], [1, 2]]").unwrap();
        assert!(matches!(f, AnyMatrix::Float(_)));
        assert!(parse_dense_json("[[0, 1], [2, 0]]").is_err());
    }

    #[test]
    fn rejects_bad_counts() {
        assert!(parse_text("3 exact\n1 2 3").is_err());
        assert!(parse_text("0 exact").is_err());
        assert!(parse_text("1 float\nnan").is_err());
    }
}
