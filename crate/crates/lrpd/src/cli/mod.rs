//! Command-line surface: `decompose`, `reduce`, `verify` and `oracle`.
//!
//! Exit codes: 0 feasible or pass, 1 infeasible or fail, 2 unknown (or no
//! evidence found by an oracle), 3 unreadable or invalid input, 4 invalid
//! certificate, 5 solver or internal error.

mod files;

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};
use thiserror::Error;

use crate::decompose::{solve, verify, DecomposeBudget, Decomposition, Instance, Kind, SolveResult};
use crate::oracle::{brute_force_3color_capped, check_perturbation_lemmas, rank_probe, small_completion_search, CompletionGrid, MAX_VERTICES};
use crate::polysolve::PolySystem;
use crate::reductions::{
    appendix_p2tilde_instance, build_bbar, chain_system, extend_peeters_coloring, extend_robust_coloring, p3_from_graph, parse_graph, peeters_supergraph, reduce_p3_to_p2, robustify,
    schur_from_graph, AppendixParams, Graph, ReductionError,
};
use crate::scalar::{Scalar, Q};
use crate::symcore::{parse_matrix, AnyMatrix};

pub use files::{format_coloring, parse_coloring, parse_partial, parse_vector, DecompositionFile, InstanceFile, Mode, Provenance, DECOMPOSITION_FORMAT, INSTANCE_FORMAT};

pub mod exit {
    pub const PASS: i32 = 0;
    pub const FAIL: i32 = 1;
    pub const UNKNOWN: i32 = 2;
    pub const INPUT: i32 = 3;
    pub const CERTIFICATE: i32 = 4;
    pub const INTERNAL: i32 = 5;
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Io(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("invalid input: {0}")]
    Schema(String),
    #[error("invalid certificate: {0}")]
    Certificate(String),
    #[error("solver error: {0}")]
    Solver(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Io(_) | CliError::Parse(_) | CliError::Schema(_) => exit::INPUT,
            CliError::Certificate(_) => exit::CERTIFICATE,
            CliError::Solver(_) => exit::INTERNAL,
        }
    }
}

impl From<ReductionError> for CliError {
    fn from(e: ReductionError) -> Self {
        match e {
            ReductionError::Certificate(m) => CliError::Certificate(m),
            e => CliError::Schema(e.to_string()),
        }
    }
}

#[derive(Parser, Debug)]
#[command(name = "lrpd", version, about = "Low-rank plus diagonal decompositions and their hardness gadgets")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Solve an instance file (or a raw matrix with --kind and --rank).
    Decompose(DecomposeArgs),
    /// Compile instances from graphs, polynomial systems or other instances.
    Reduce {
        #[command(subcommand)]
        which: ReduceCommand,
    },
    /// Check a decomposition file against an instance file.
    Verify(VerifyArgs),
    /// Brute-force and randomized cross-checks.
    Oracle {
        #[command(subcommand)]
        which: OracleCommand,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum KindArg {
    P1,
    P2,
    P3,
}

impl From<KindArg> for Kind {
    fn from(k: KindArg) -> Kind {
        match k {
            KindArg::P1 => Kind::P1,
            KindArg::P2 => Kind::P2,
            KindArg::P3 => Kind::P3,
        }
    }
}

#[derive(Args, Debug)]
pub struct DecomposeArgs {
    pub input: PathBuf,
    /// Target rank (overrides the file).
    #[arg(long)]
    pub rank: Option<usize>,
    /// Arithmetic (defaults to the file's mode).
    #[arg(long, value_enum)]
    pub mode: Option<Mode>,
    /// Relative float tolerance.
    #[arg(long, default_value_t = 1e-7)]
    pub tol: f64,
    /// Most index sets tried per rank.
    #[arg(long)]
    pub budget: Option<usize>,
    #[arg(long, default_value_t = 1)]
    pub threads: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Problem kind for raw matrix input.
    #[arg(long, value_enum)]
    pub kind: Option<KindArg>,
    /// Write the decomposition file here instead of embedding it.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug, Clone)]
pub struct Output {
    /// Output file (stdout when absent).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Certificate to map forward: a coloring, a solution vector or a
    /// decomposition file, depending on the subcommand.
    #[arg(long)]
    pub emit_witness: Option<PathBuf>,
    /// Where the witness goes (default `<out>.witness.json`, or
    /// `<out>.coloring` for the graph-to-graph commands).
    #[arg(long)]
    pub witness_out: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
pub enum ReduceCommand {
    /// Prism supergraph of a graph.
    Peeters {
        graph: PathBuf,
        #[command(flatten)]
        io: Output,
    },
    /// Robust-coloring amplifier with `c + 1` partitions.
    Robustify {
        graph: PathBuf,
        #[arg(long, default_value_t = 5)]
        c: usize,
        #[command(flatten)]
        io: Output,
    },
    /// P3 instance of rank 3 from a graph.
    P3 {
        graph: PathBuf,
        /// Skip the prism supergraph.
        #[arg(long)]
        raw: bool,
        #[command(flatten)]
        io: Output,
    },
    /// P1 instance from a graph.
    P1 {
        graph: PathBuf,
        #[arg(long)]
        raw: bool,
        #[command(flatten)]
        io: Output,
    },
    /// P2 instance from a graph.
    P2 {
        graph: PathBuf,
        #[arg(long)]
        raw: bool,
        #[command(flatten)]
        io: Output,
    },
    /// P2 instance equivalent to a P3 instance file.
    #[command(name = "p3-to-p2")]
    P3ToP2 {
        instance: PathBuf,
        #[command(flatten)]
        io: Output,
    },
    /// Rank-3 P3 instance from a polynomial system file.
    Shitov {
        system: PathBuf,
        #[command(flatten)]
        io: Output,
    },
    /// Perturbed P2 instance from a graph (no supergraph applied).
    #[command(name = "appendix-p2tilde")]
    AppendixP2tilde {
        graph: PathBuf,
        /// Perturbation budget (default: half the admissible maximum).
        #[arg(long)]
        eps: Option<f64>,
        #[arg(long, default_value_t = 1e4)]
        s: f64,
        #[arg(long, default_value_t = 2.0)]
        phat: f64,
        #[arg(long, default_value_t = 1e-12)]
        eps0: f64,
        #[command(flatten)]
        io: Output,
    },
    /// The squaring chain x1 = 2, x_{t+1} = x_t^2 as a polynomial system.
    Chain {
        n: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args, Debug)]
pub struct VerifyArgs {
    pub instance: PathBuf,
    pub decomposition: PathBuf,
    #[arg(long, default_value_t = 1e-9)]
    pub tol: f64,
    /// Check against this rank instead of the file's.
    #[arg(long)]
    pub rank: Option<usize>,
}

#[derive(Subcommand, Debug)]
pub enum OracleCommand {
    /// Exhaustive 3-coloring.
    Color {
        graph: PathBuf,
        #[arg(long, default_value_t = MAX_VERTICES)]
        cap: usize,
    },
    /// Randomized search for low-rank completions (evidence only).
    Probe {
        instance: PathBuf,
        #[arg(long)]
        rank: Option<usize>,
        #[arg(long, default_value_t = 1000)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Sample the perturbation lemmas.
    Lemmas {
        #[arg(long, default_value_t = 100)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Grid search over the `*` entries of a small partial matrix.
    Complete {
        partial: PathBuf,
        #[arg(long)]
        rank: usize,
        /// Comma separated grid values.
        #[arg(long)]
        grid: Option<String>,
    },
}

/// Parse `args` (program name first), run, and return the exit code.
/// Reports go to `stdout`, diagnostics to stderr.
pub fn run<I, S>(args: I, stdout: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { exit::INPUT } else { exit::PASS };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(cli.command, stdout) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {}", e);
            e.exit_code()
        }
    }
}

fn dispatch(cmd: Command, stdout: &mut dyn Write) -> Result<i32, CliError> {
    let (report, code) = match cmd {
        Command::Decompose(a) => cmd_decompose(&a)?,
        Command::Reduce { which } => cmd_reduce(which, stdout)?,
        Command::Verify(a) => cmd_verify(&a)?,
        Command::Oracle { which } => cmd_oracle(which)?,
    };
    if let Some(v) = report {
        let text = serde_json::to_string_pretty(&v).map_err(|e| CliError::Io(e.to_string()))?;
        writeln!(stdout, "{}", text).map_err(|e| CliError::Io(e.to_string()))?;
    }
    Ok(code)
}

fn read(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("cannot read {}: {}", path.display(), e)))
}

fn write(path: &Path, text: &str) -> Result<(), CliError> {
    std::fs::write(path, text).map_err(|e| CliError::Io(format!("cannot write {}: {}", path.display(), e)))
}

fn to_json<T: serde::Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("report types serialize")
}

pub fn load_instance_file(path: &Path) -> Result<InstanceFile, CliError> {
    serde_json::from_str(&read(path)?).map_err(|e| CliError::Parse(format!("{}: {}", path.display(), e)))
}

fn load_graph(path: &Path) -> Result<Graph, CliError> {
    Ok(parse_graph(&read(path)?)?)
}

/// An instance JSON file, or a matrix file (text or dense JSON) combined
/// with `--kind` and `--rank`.
fn load_decompose_input(a: &DecomposeArgs) -> Result<InstanceFile, CliError> {
    let src = read(&a.input)?;
    if let Ok(f) = serde_json::from_str::<InstanceFile>(&src) {
        return Ok(f);
    }
    let m = parse_matrix(&src).map_err(|e| CliError::Parse(format!("{}: neither an instance file nor a matrix ({})", a.input.display(), e)))?;
    let (Some(kind), Some(r)) = (a.kind, a.rank) else {
        return Err(CliError::Schema("raw matrix input needs --kind and --rank".into()));
    };
    let prov = Some(Provenance { compiler: "matrix".into(), params: json!({ "source": a.input.display().to_string() }) });
    Ok(match m {
        AnyMatrix::Exact(m) => InstanceFile::from_instance(&Instance::new(kind.into(), m, r), prov),
        AnyMatrix::Float(m) => InstanceFile::from_instance(&Instance::new(kind.into(), m, r), prov),
    })
}

type Report = (Option<Value>, i32);

pub fn cmd_decompose(a: &DecomposeArgs) -> Result<Report, CliError> {
    let mut file = load_decompose_input(a)?;
    if let Some(r) = a.rank {
        file.r = r;
    }
    let mut budget = DecomposeBudget { tol: a.tol, ..DecomposeBudget::default() }.with_threads(a.threads.max(1)).with_seed(a.seed);
    if let Some(b) = a.budget {
        budget.max_subsets = b;
    }
    match a.mode.unwrap_or(file.mode) {
        Mode::Exact => decompose_in::<Q>(&file, &budget, a),
        Mode::Float => decompose_in::<f64>(&file, &budget, a),
    }
}

fn decompose_in<T: Scalar>(file: &InstanceFile, budget: &DecomposeBudget, a: &DecomposeArgs) -> Result<Report, CliError> {
    let inst = file.to_instance::<T>()?;
    let hash = file.content_hash();
    let res = solve(&inst, budget).map_err(|e| CliError::Solver(e.to_string()))?;
    let mut out = json!({
        "status": res.label(),
        "kind": inst.kind,
        "n": inst.n(),
        "rank_target": inst.r,
        "seed": a.seed,
        "instance_sha256": hash,
    });
    let code = match res {
        SolveResult::Feasible(dec) => {
            let rep = verify(&inst, &dec, budget.tol);
            let df = DecompositionFile::from_decomposition(&dec, &hash);
            out["rank"] = json!(dec.achieved_rank);
            out["d"] = json!(df.d);
            out["verify"] = to_json(&rep);
            match &a.out {
                Some(p) => {
                    write(p, &serde_json::to_string_pretty(&df).unwrap())?;
                    out["decomposition_file"] = json!(p.display().to_string());
                }
                None => out["decomposition"] = to_json(&df),
            }
            if rep.pass {
                exit::PASS
            } else {
                exit::INTERNAL
            }
        }
        SolveResult::Infeasible { subsets_checked } => {
            out["subsets_checked"] = json!(subsets_checked);
            exit::FAIL
        }
        SolveResult::Unknown(notes) => {
            out["notes"] = json!(notes);
            exit::UNKNOWN
        }
    };
    Ok((Some(out), code))
}

pub fn cmd_verify(a: &VerifyArgs) -> Result<Report, CliError> {
    let file = load_instance_file(&a.instance)?;
    let df: DecompositionFile = serde_json::from_str(&read(&a.decomposition)?).map_err(|e| CliError::Parse(format!("{}: {}", a.decomposition.display(), e)))?;
    match file.mode {
        Mode::Exact => verify_in::<Q>(&file, &df, a),
        Mode::Float => verify_in::<f64>(&file, &df, a),
    }
}

fn verify_in<T: Scalar>(file: &InstanceFile, df: &DecompositionFile, a: &VerifyArgs) -> Result<Report, CliError> {
    let mut inst = file.to_instance::<T>()?;
    if let Some(r) = a.rank {
        inst.r = r;
    }
    let dec = df.to_decomposition::<T>(inst.n())?;
    let rep = verify(&inst, &dec, a.tol);
    let hash_ok = df.instance_sha256 == file.content_hash();
    let pass = rep.pass && hash_ok;
    let out = json!({
        "pass": pass,
        "rank": rep.rank,
        "rank_target": inst.r,
        "instance_hash_matches": hash_ok,
        "checks": rep.checks,
    });
    Ok((Some(out), if pass { exit::PASS } else { exit::FAIL }))
}

/// Instance and witness paths plus a summary for the reduce commands.
struct Emitted {
    summary: Value,
}

fn emit_instance<T: Scalar>(inst: &Instance<T>, prov: Provenance, io: &Output, stdout: &mut dyn Write) -> Result<(InstanceFile, Emitted), CliError> {
    let file = InstanceFile::from_instance(inst, Some(prov));
    let text = serde_json::to_string(&file).unwrap();
    let mut summary = json!({ "kind": inst.kind, "n": inst.n(), "rank_target": inst.r, "instance_sha256": file.content_hash() });
    match &io.out {
        Some(p) => {
            write(p, &text)?;
            summary["instance_file"] = json!(p.display().to_string());
        }
        None => {
            writeln!(stdout, "{}", text).map_err(|e| CliError::Io(e.to_string()))?;
        }
    }
    Ok((file, Emitted { summary }))
}

fn witness_path(io: &Output, suffix: &str) -> Result<PathBuf, CliError> {
    if let Some(p) = &io.witness_out {
        return Ok(p.clone());
    }
    match &io.out {
        Some(p) => {
            let mut s = p.clone().into_os_string();
            s.push(suffix);
            Ok(PathBuf::from(s))
        }
        None => Err(CliError::Schema("--emit-witness needs --out or --witness-out".into())),
    }
}

fn emit_witness<T: Scalar>(inst: &Instance<T>, file: &InstanceFile, dec: Decomposition<T>, io: &Output, em: &mut Emitted) -> Result<bool, CliError> {
    let (dec, rep) = dec.certify(inst, 1e-9);
    let p = witness_path(io, ".witness.json")?;
    write(&p, &serde_json::to_string(&DecompositionFile::from_decomposition(&dec, &file.content_hash())).unwrap())?;
    em.summary["witness_file"] = json!(p.display().to_string());
    em.summary["witness_rank"] = json!(rep.rank);
    em.summary["witness_verified"] = json!(rep.pass);
    if !rep.pass {
        em.summary["witness_checks"] = to_json(&rep.checks);
    }
    Ok(rep.pass)
}

fn finish(em: Emitted, io: &Output, ok: bool) -> Report {
    // with the instance on stdout, the summary would corrupt it
    let summary = io.out.as_ref().map(|_| em.summary);
    (summary, if ok { exit::PASS } else { exit::FAIL })
}

fn graph_params(path: &Path, g: &Graph, extra: Value) -> Value {
    let mut v = json!({ "source": path.display().to_string(), "vertices": g.n(), "edges": g.edges().len() });
    if let (Value::Object(m), Value::Object(e)) = (&mut v, extra) {
        m.extend(e);
    }
    v
}

fn read_coloring(path: &Path, g: &Graph) -> Result<Vec<u8>, CliError> {
    let c = parse_coloring(&read(path)?)?;
    if !g.is_proper(&c) {
        return Err(CliError::Certificate(format!("{} is not a proper 3-coloring of the {}-vertex input graph", path.display(), g.n())));
    }
    Ok(c)
}

fn write_text(out: &Option<PathBuf>, text: &str, stdout: &mut dyn Write) -> Result<(), CliError> {
    match out {
        Some(p) => write(p, text),
        None => write!(stdout, "{}", text).map_err(|e| CliError::Io(e.to_string())),
    }
}

pub fn cmd_reduce(which: ReduceCommand, stdout: &mut dyn Write) -> Result<Report, CliError> {
    match which {
        ReduceCommand::Peeters { graph, io } => {
            let g = load_graph(&graph)?;
            let sg = peeters_supergraph(&g);
            write_text(&io.out, &sg.to_edge_list(), stdout)?;
            let mut summary = json!({ "vertices": sg.n(), "edges": sg.edges().len() });
            if let Some(cp) = &io.emit_witness {
                let c = extend_peeters_coloring(&g, &read_coloring(cp, &g)?)?;
                let p = witness_path(&io, ".coloring")?;
                write(&p, &format_coloring(&c))?;
                summary["witness_file"] = json!(p.display().to_string());
            }
            Ok((io.out.as_ref().map(|_| summary), exit::PASS))
        }
        ReduceCommand::Robustify { graph, c, io } => {
            let g = load_graph(&graph)?;
            let rg = robustify(&g, c);
            write_text(&io.out, &rg.to_edge_list(), stdout)?;
            let mut summary = json!({ "vertices": rg.n(), "edges": rg.edges().len(), "c": c });
            if let Some(cp) = &io.emit_witness {
                let col = extend_robust_coloring(&g, c, &read_coloring(cp, &g)?)?;
                let p = witness_path(&io, ".coloring")?;
                write(&p, &format_coloring(&col))?;
                summary["witness_file"] = json!(p.display().to_string());
            }
            Ok((io.out.as_ref().map(|_| summary), exit::PASS))
        }
        ReduceCommand::P3 { graph, raw, io } => {
            let g = load_graph(&graph)?;
            let big = if raw { g.clone() } else { peeters_supergraph(&g) };
            let gad = p3_from_graph(&big);
            let prov = Provenance { compiler: "p3".into(), params: graph_params(&graph, &g, json!({ "supergraph": !raw })) };
            let (file, mut em) = emit_instance(&gad.instance, prov, &io, stdout)?;
            let mut ok = true;
            if let Some(cp) = &io.emit_witness {
                let c = read_coloring(cp, &g)?;
                let c = if raw { c } else { extend_peeters_coloring(&g, &c)? };
                ok = emit_witness(&gad.instance, &file, gad.witness(&c)?, &io, &mut em)?;
            }
            Ok(finish(em, &io, ok))
        }
        ReduceCommand::P1 { graph, raw, io } => reduce_schur(Kind::P1, &graph, raw, &io, stdout),
        ReduceCommand::P2 { graph, raw, io } => reduce_schur(Kind::P2, &graph, raw, &io, stdout),
        ReduceCommand::P3ToP2 { instance, io } => {
            let file = load_instance_file(&instance)?;
            match file.mode {
                Mode::Exact => reduce_compile::<Q>(&file, &instance, &io, stdout),
                Mode::Float => reduce_compile::<f64>(&file, &instance, &io, stdout),
            }
        }
        ReduceCommand::Shitov { system, io } => {
            let sys = PolySystem::<Q>::parse_text(&read(&system)?).map_err(|e| CliError::Parse(e.to_string()))?;
            let sh = build_bbar(&sys)?;
            let inst = sh.instance();
            let prov = Provenance { compiler: "shitov".into(), params: json!({ "source": system.display().to_string(), "equations": sys.equations.len(), "variables": sys.var_count() }) };
            let (file, mut em) = emit_instance(&inst, prov, &io, stdout)?;
            let mut ok = true;
            if let Some(sp) = &io.emit_witness {
                let xi = parse_vector(&read(sp)?)?;
                ok = emit_witness(&inst, &file, sh.witness(&xi)?, &io, &mut em)?;
            }
            Ok(finish(em, &io, ok))
        }
        ReduceCommand::AppendixP2tilde { graph, eps, s, phat, eps0, io } => {
            let g = load_graph(&graph)?;
            let eps = eps.unwrap_or_else(|| AppendixParams::new(g.nonedges().len().max(1), g.n(), 0.0, phat, s, eps0).eps_bound / 2.0);
            let ai = appendix_p2tilde_instance(&g, eps, phat, s, eps0)?;
            let prov = Provenance { compiler: "appendix-p2tilde".into(), params: graph_params(&graph, &g, json!({ "eps": eps, "s": s, "phat": phat, "eps0": eps0, "delta": ai.params.delta })) };
            let (file, mut em) = emit_instance(&ai.instance, prov, &io, stdout)?;
            em.summary["eps_bound"] = json!(ai.params.eps_bound);
            let mut ok = true;
            if let Some(cp) = &io.emit_witness {
                let w = ai.witness(&read_coloring(cp, &g)?)?;
                em.summary["schur_gap"] = json!(w.schur_gap);
                em.summary["s_validator"] = to_json(&w.report);
                ok = emit_witness(&ai.instance, &file, w.decomposition, &io, &mut em)? && w.report.pass;
            }
            Ok(finish(em, &io, ok))
        }
        ReduceCommand::Chain { n, out } => {
            if n == 0 {
                return Err(CliError::Schema("the chain needs n >= 1".into()));
            }
            write_text(&out, &chain_system(n).to_text(), stdout)?;
            Ok((None, exit::PASS))
        }
    }
}

fn reduce_schur(kind: Kind, graph: &Path, raw: bool, io: &Output, stdout: &mut dyn Write) -> Result<Report, CliError> {
    let g = load_graph(graph)?;
    let big = if raw { g.clone() } else { peeters_supergraph(&g) };
    let gad = schur_from_graph(&big, kind)?;
    let name = if kind == Kind::P1 { "p1" } else { "p2" };
    let prov = Provenance { compiler: name.into(), params: graph_params(graph, &g, json!({ "supergraph": !raw, "pairs": gad.m(), "k": gad.k })) };
    let (file, mut em) = emit_instance(&gad.instance, prov, io, stdout)?;
    let mut ok = true;
    if let Some(cp) = &io.emit_witness {
        let c = read_coloring(cp, &g)?;
        let c = if raw { c } else { extend_peeters_coloring(&g, &c)? };
        ok = emit_witness(&gad.instance, &file, gad.witness(&c)?, io, &mut em)?;
    }
    Ok(finish(em, io, ok))
}

fn reduce_compile<T: Scalar>(src: &InstanceFile, path: &Path, io: &Output, stdout: &mut dyn Write) -> Result<Report, CliError> {
    let p3 = src.to_instance::<T>()?;
    if p3.kind != Kind::P3 {
        return Err(CliError::Schema("p3-to-p2 needs a P3 instance".into()));
    }
    let c = reduce_p3_to_p2(&p3.a, &p3.x)?;
    let inst = Instance::new(Kind::P2, c.b.clone(), 2 * c.m + p3.r);
    let prov = Provenance { compiler: "p3-to-p2".into(), params: json!({ "source": path.display().to_string(), "source_sha256": src.content_hash(), "free_pairs": c.m }) };
    let (file, mut em) = emit_instance(&inst, prov, io, stdout)?;
    let mut ok = true;
    if let Some(dp) = &io.emit_witness {
        let df: DecompositionFile = serde_json::from_str(&read(dp)?).map_err(|e| CliError::Parse(e.to_string()))?;
        let dec = df.to_decomposition::<T>(p3.n())?;
        let l = dec.l.ok_or_else(|| CliError::Certificate("the P3 decomposition has no fill".into()))?;
        let fixed = p3.x.iter().any(|&(i, j)| !l.get(i, j).is_zero());
        if fixed {
            return Err(CliError::Certificate("the fill is nonzero on a fixed pair".into()));
        }
        let w = c.forward(&l)?;
        ok = emit_witness(&inst, &file, Decomposition::from_d(w), io, &mut em)?;
    }
    Ok(finish(em, io, ok))
}

pub fn cmd_oracle(which: OracleCommand) -> Result<Report, CliError> {
    match which {
        OracleCommand::Color { graph, cap } => {
            let g = load_graph(&graph)?;
            let res = brute_force_3color_capped(&g, cap).map_err(|e| CliError::Schema(e.to_string()))?;
            let colors = res.coloring.as_ref().map(|c| c.iter().map(|v| v + 1).collect::<Vec<_>>());
            let out = json!({
                "verdict": if res.colorable { "3-colorable" } else { "not 3-colorable" },
                "colorable": res.colorable,
                "coloring": colors,
            });
            Ok((Some(out), if res.colorable { exit::PASS } else { exit::FAIL }))
        }
        OracleCommand::Probe { instance, rank, trials, seed } => {
            let file = load_instance_file(&instance)?;
            let rep = match file.mode {
                Mode::Exact => {
                    let inst = file.to_instance::<Q>()?;
                    rank_probe(&inst, rank.unwrap_or(inst.r), trials, seed)
                }
                Mode::Float => {
                    let inst = file.to_instance::<f64>()?;
                    rank_probe(&inst, rank.unwrap_or(inst.r), trials, seed)
                }
            };
            let code = if rep.hits > 0 { exit::PASS } else { exit::UNKNOWN };
            Ok((Some(to_json(&rep)), code))
        }
        OracleCommand::Lemmas { trials, seed } => {
            let rep = check_perturbation_lemmas(trials, seed);
            let code = if rep.violations() == 0 { exit::PASS } else { exit::FAIL };
            Ok((Some(to_json(&rep)), code))
        }
        OracleCommand::Complete { partial, rank, grid } => {
            let pm = parse_partial(&read(&partial)?)?;
            let mut g = CompletionGrid::default();
            if let Some(s) = grid {
                g.values = s.split(',').map(|t| t.trim().parse::<f64>().map_err(|_| CliError::Parse(format!("bad grid value `{}`", t)))).collect::<Result<_, _>>()?;
            }
            let res = small_completion_search(&pm, rank, &g).map_err(|e| CliError::Schema(e.to_string()))?;
            let code = if res.best_rank.is_some_and(|k| k <= rank) { exit::PASS } else { exit::UNKNOWN };
            Ok((Some(to_json(&res)), code))
        }
    }
}

/// Entry point for the binary.
pub fn main_with_args(args: impl IntoIterator<Item = OsString>) -> i32 {
    let stdout = std::io::stdout();
    let mut lock = stdout.lock();
    run(args, &mut lock)
}
