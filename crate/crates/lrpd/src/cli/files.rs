use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::decompose::{Decomposition, Instance, Kind};
use crate::scalar::{Scalar, Q};
use crate::symcore::SymMatrix;

use super::CliError;

pub const INSTANCE_FORMAT: &str = "lrpd-instance";
pub const DECOMPOSITION_FORMAT: &str = "lrpd-decomposition";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Exact,
    Float,
}

/// Which compiler produced an instance, with its parameters.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub compiler: String,
    #[serde(default)]
    pub params: Value,
}

/// On-disk instance. `matrix` is the lower triangle row by row, entries as
/// strings (exact rationals, or shortest round-trip decimals in float
/// mode); `x` holds 1-indexed pairs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InstanceFile {
    pub format: String,
    pub kind: Kind,
    pub mode: Mode,
    pub n: usize,
    pub matrix: Vec<String>,
    #[serde(default)]
    pub x: Vec<[usize; 2]>,
    pub r: usize,
    #[serde(default)]
    pub eps: f64,
    #[serde(default)]
    pub sparsity_constrained: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub provenance: Option<Provenance>,
}

fn mode_of<T: Scalar>() -> Mode {
    if T::EXACT {
        Mode::Exact
    } else {
        Mode::Float
    }
}

pub(crate) fn lower_strings<T: Scalar>(m: &SymMatrix<T>) -> Vec<String> {
    m.lower().iter().map(|v| v.to_string()).collect()
}

pub(crate) fn parse_lower<T: Scalar>(n: usize, v: &[String], what: &str) -> Result<SymMatrix<T>, CliError> {
    if v.len() != n * (n + 1) / 2 {
        return Err(CliError::Schema(format!("{} has {} entries, expected {} for n = {}", what, v.len(), n * (n + 1) / 2, n)));
    }
    let data = v.iter().map(|s| T::parse_scalar(s).map_err(|e| CliError::Schema(format!("{}: {}", what, e)))).collect::<Result<Vec<T>, _>>()?;
    let m = SymMatrix::from_lower(n, data).map_err(|e| CliError::Schema(e.to_string()))?;
    if !m.all_finite() {
        return Err(CliError::Schema(format!("{} has non-finite entries", what)));
    }
    Ok(m)
}

impl InstanceFile {
    pub fn from_instance<T: Scalar>(inst: &Instance<T>, provenance: Option<Provenance>) -> Self {
        InstanceFile {
            format: INSTANCE_FORMAT.into(),
            kind: inst.kind,
            mode: mode_of::<T>(),
            n: inst.n(),
            matrix: lower_strings(&inst.a),
            x: inst.x.iter().map(|&(i, j)| [i + 1, j + 1]).collect(),
            r: inst.r,
            eps: inst.eps,
            sparsity_constrained: inst.sparsity_constrained,
            provenance,
        }
    }

    /// Build and validate the instance in arithmetic `T`. Reading a float
    /// file exactly takes each decimal string at face value.
    pub fn to_instance<T: Scalar>(&self) -> Result<Instance<T>, CliError> {
        if self.format != INSTANCE_FORMAT {
            return Err(CliError::Schema(format!("format is `{}`, expected `{}`", self.format, INSTANCE_FORMAT)));
        }
        if self.n == 0 {
            return Err(CliError::Schema("n must be positive".into()));
        }
        let a = parse_lower::<T>(self.n, &self.matrix, "matrix")?;
        if self.x.iter().any(|p| p[0] == 0 || p[1] == 0 || p[0] > self.n || p[1] > self.n || p[0] == p[1]) {
            return Err(CliError::Schema("pattern pairs must be distinct 1-indexed vertices".into()));
        }
        let x: Vec<(usize, usize)> = self.x.iter().map(|p| (p[0] - 1, p[1] - 1)).collect();
        let mut inst = if self.kind == Kind::P3 { Instance::p3(a, x, self.r) } else { Instance { x, ..Instance::new(self.kind, a, self.r) } };
        inst.eps = self.eps;
        inst.sparsity_constrained = self.sparsity_constrained;
        inst.validate().map_err(|e| CliError::Schema(e.to_string()))?;
        Ok(inst)
    }

    /// SHA-256 of the problem data: kind, size, matrix, pattern, eps and the
    /// sparsity flag. The target rank is left out so one witness can be
    /// checked against several ranks.
    pub fn content_hash(&self) -> String {
        let key = serde_json::json!({
            "kind": self.kind,
            "n": self.n,
            "matrix": self.matrix,
            "x": self.x,
            "eps": self.eps,
            "sparsity_constrained": self.sparsity_constrained,
        });
        hex(&Sha256::digest(key.to_string().as_bytes()))
    }
}

fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{:02x}", b)).collect()
}

/// On-disk decomposition, tied to its instance by `instance_sha256`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecompositionFile {
    pub format: String,
    pub instance_sha256: String,
    pub mode: Mode,
    pub d: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub l: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub h: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub u: Option<Vec<Vec<f64>>>,
    #[serde(default)]
    pub achieved_rank: usize,
    #[serde(default)]
    pub residual: f64,
}

impl DecompositionFile {
    pub fn from_decomposition<T: Scalar>(dec: &Decomposition<T>, instance_sha256: &str) -> Self {
        DecompositionFile {
            format: DECOMPOSITION_FORMAT.into(),
            instance_sha256: instance_sha256.into(),
            mode: mode_of::<T>(),
            d: dec.d.iter().map(|v| v.to_string()).collect(),
            l: dec.l.as_ref().map(lower_strings),
            h: dec.h.as_ref().map(lower_strings),
            u: dec.u.clone(),
            achieved_rank: dec.achieved_rank,
            residual: dec.residual,
        }
    }

    pub fn to_decomposition<T: Scalar>(&self, n: usize) -> Result<Decomposition<T>, CliError> {
        if self.format != DECOMPOSITION_FORMAT {
            return Err(CliError::Schema(format!("format is `{}`, expected `{}`", self.format, DECOMPOSITION_FORMAT)));
        }
        let d = self.d.iter().map(|s| T::parse_scalar(s).map_err(|e| CliError::Schema(format!("d: {}", e)))).collect::<Result<Vec<T>, _>>()?;
        let l = self.l.as_ref().map(|v| parse_lower::<T>(n, v, "l")).transpose()?;
        let h = self.h.as_ref().map(|v| parse_lower::<T>(n, v, "h")).transpose()?;
        Ok(Decomposition { d, l, h, u: self.u.clone(), achieved_rank: self.achieved_rank, residual: self.residual })
    }
}

/// One color per vertex, `1`, `2` or `3`, whitespace or comma separated;
/// `#` starts a comment.
pub fn parse_coloring(src: &str) -> Result<Vec<u8>, CliError> {
    let mut out = Vec::new();
    for line in src.lines() {
        let line = line.split('#').next().unwrap_or("");
        for tok in line.split(|c: char| c.is_whitespace() || c == ',').filter(|t| !t.is_empty()) {
            match tok {
                "1" | "2" | "3" => out.push(tok.as_bytes()[0] - b'1'),
                _ => return Err(CliError::Parse(format!("coloring entry `{}` is not 1, 2 or 3", tok))),
            }
        }
    }
    Ok(out)
}

pub fn format_coloring(c: &[u8]) -> String {
    let mut s: String = c.iter().map(|v| (v + 1).to_string()).collect::<Vec<_>>().join(" ");
    s.push('\n');
    s
}

/// Whitespace separated exact rationals.
pub fn parse_vector(src: &str) -> Result<Vec<Q>, CliError> {
    src.lines()
        .map(|l| l.split('#').next().unwrap_or(""))
        .flat_map(|l| l.split(|c: char| c.is_whitespace() || c == ',').filter(|t| !t.is_empty()).map(str::to_string).collect::<Vec<_>>())
        .map(|t| t.parse::<Q>().map_err(CliError::Parse))
        .collect()
}

/// Partial matrix text: `n` rows of `n` entries, `*` for unspecified and a
/// rational otherwise; the matrix must be symmetric.
pub fn parse_partial(src: &str) -> Result<crate::reductions::PartialMatrix, CliError> {
    let rows: Vec<Vec<&str>> = src.lines().map(|l| l.split('#').next().unwrap_or("")).map(|l| l.split_whitespace().collect::<Vec<_>>()).filter(|r| !r.is_empty()).collect();
    let n = rows.len();
    if n == 0 || rows.iter().any(|r| r.len() != n) {
        return Err(CliError::Parse("partial matrix must be square".into()));
    }
    let cell = |i: usize, j: usize| -> Result<Option<Q>, CliError> {
        match rows[i][j] {
            "*" => Ok(None),
            t => t.parse::<Q>().map(Some).map_err(CliError::Parse),
        }
    };
    for i in 0..n {
        for j in 0..i {
            if cell(i, j)? != cell(j, i)? {
                return Err(CliError::Parse(format!("entries ({}, {}) and ({}, {}) differ", i + 1, j + 1, j + 1, i + 1)));
            }
        }
    }
    let mut err = None;
    let pm = crate::reductions::PartialMatrix::from_fn(n, |i, j| match cell(i, j) {
        Ok(v) => v,
        Err(e) => {
            err = Some(e);
            None
        }
    });
    match err {
        Some(e) => Err(e),
        None => Ok(pm),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::example1;

    #[test]
    fn instance_round_trip() {
        let inst = Instance::new(Kind::P2, example1(), 3);
        let f = InstanceFile::from_instance(&inst, None);
        let text = serde_json::to_string(&f).unwrap();
        let g: InstanceFile = serde_json::from_str(&text).unwrap();
        assert_eq!(g, f);
        assert_eq!(g.to_instance::<Q>().unwrap(), inst);
    }

    #[test]
    fn hash_ignores_rank() {
        let inst = Instance::new(Kind::P2, example1(), 3);
        let a = InstanceFile::from_instance(&inst, None);
        let b = InstanceFile::from_instance(&inst.with_rank(2), None);
        assert_eq!(a.content_hash(), b.content_hash());
        assert_eq!(a.content_hash().len(), 64);
    }

    #[test]
    fn colorings_and_partials() {
        assert_eq!(parse_coloring("1 2\n3 # tail").unwrap(), vec![0, 1, 2]);
        assert!(parse_coloring("0 1").is_err());
        let pm = parse_partial("* 1\n1 *\n").unwrap();
        assert_eq!(pm.unknowns(), vec![(0, 0), (1, 1)]);
        assert!(parse_partial("* 1\n2 *").is_err());
    }
}
