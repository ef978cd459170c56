//! Graph ingestion, the end-to-end matching pipeline, and the diagnostic
//! commands behind the `gm-surrogate` binary.
//!
//! Two graph formats are accepted. The matrix format starts with `n` and is
//! followed by `n` rows of `n` characters from `{0, 1}`; the edge-list format
//! starts with `n=<k>` and is followed by 1-indexed `u v` pairs. Blank lines
//! and lines starting with `#` are ignored, and whitespace inside lines is
//! not significant.

use std::fmt::Write as _;
use std::path::Path;

use num_bigint::BigInt;
use num_traits::{ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::objective::{
    build_objective, eval_f, eval_qform, symmetric_difference, AdjacencyMatrix, ConvexObjective, SeparableQuadratic,
};
use crate::oracle::{oracle_gm, OracleResult};
use crate::polytope::{
    bfs_to_permutation, build_birkhoff, build_perturbed, check_perturbation, enumerate_vertices,
    northwest_corner_basis, Permutation,
};
use crate::rational::{format_rational, serde_rational, serde_rational_vec, Rational};
use crate::sensitivity::{restrict_basis, PerturbationParams};
use crate::solver::{brute_force_vertex_max, certify_gap, maximize_convex, SolverOptions, SolverStatus};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_ITERATION_LIMIT: i32 = 3;

/// Exit status for a failed command.
pub fn exit_code_for(err: &Error) -> i32 {
    if err.is_input_error() {
        EXIT_INPUT
    } else {
        EXIT_FAILURE
    }
}

/// Parses either graph format; errors carry 1-based line numbers.
pub fn parse_graph(text: &str) -> Result<AdjacencyMatrix> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
    let Some((header_line, header)) = lines.next() else {
        return Err(Error::parse(1, "empty graph description"));
    };
    let compact: String = header.chars().filter(|c| !c.is_whitespace()).collect();
    if let Some(size) = compact.strip_prefix("n=") {
        let n = parse_size(size, header_line)?;
        parse_edge_list(n, lines)
    } else {
        let n = parse_size(&compact, header_line)?;
        parse_matrix(n, header_line, lines)
    }
}

fn parse_size(s: &str, line: usize) -> Result<usize> {
    let n: usize = s
        .parse()
        .map_err(|_| Error::parse(line, format!("expected a vertex count, found {s:?}")))?;
    if n < 2 {
        return Err(Error::parse(
            line,
            format!("a graph needs at least 2 vertices, found {n}"),
        ));
    }
    Ok(n)
}

fn parse_edge_list<'a>(n: usize, lines: impl Iterator<Item = (usize, &'a str)>) -> Result<AdjacencyMatrix> {
    let mut entries = vec![false; n * n];
    for (line, text) in lines {
        let fields: Vec<&str> = text.split_whitespace().collect();
        if fields.len() != 2 {
            return Err(Error::parse(line, format!("expected \"u v\", found {text:?}")));
        }
        let mut ends = [0usize; 2];
        for (slot, field) in ends.iter_mut().zip(&fields) {
            let v: usize = field
                .parse()
                .map_err(|_| Error::parse(line, format!("vertex {field:?} is not a positive integer")))?;
            if v == 0 || v > n {
                return Err(Error::parse(line, format!("vertex {v} is outside 1..={n}")));
            }
            *slot = v - 1;
        }
        let [u, v] = ends;
        if u == v {
            return Err(Error::parse(line, format!("self-loop at vertex {}", u + 1)));
        }
        entries[u * n + v] = true;
        entries[v * n + u] = true;
    }
    AdjacencyMatrix::new(n, entries)
}

fn parse_matrix<'a>(
    n: usize,
    header_line: usize,
    lines: impl Iterator<Item = (usize, &'a str)>,
) -> Result<AdjacencyMatrix> {
    let mut entries = Vec::with_capacity(n * n);
    let mut row_lines = Vec::with_capacity(n);
    for (line, text) in lines {
        if row_lines.len() == n {
            return Err(Error::parse(
                line,
                format!("unexpected extra row; the header declared {n} rows"),
            ));
        }
        let row: Vec<char> = text.chars().filter(|c| !c.is_whitespace()).collect();
        if row.len() != n {
            return Err(Error::parse(line, format!("expected {n} entries, found {}", row.len())));
        }
        for c in row {
            match c {
                '0' => entries.push(false),
                '1' => entries.push(true),
                other => return Err(Error::parse(line, format!("entry {other:?} is not 0 or 1"))),
            }
        }
        row_lines.push(line);
    }
    if row_lines.len() < n {
        let line = row_lines.last().copied().unwrap_or(header_line);
        return Err(Error::parse(
            line,
            format!("expected {n} rows, found {}", row_lines.len()),
        ));
    }
    for i in 0..n {
        if entries[i * n + i] {
            return Err(Error::parse(row_lines[i], format!("self-loop at vertex {}", i + 1)));
        }
        for j in 0..i {
            if entries[i * n + j] != entries[j * n + i] {
                return Err(Error::parse(
                    row_lines[i],
                    format!("asymmetric entries ({}, {}) and ({}, {})", i + 1, j + 1, j + 1, i + 1),
                ));
            }
        }
    }
    AdjacencyMatrix::new(n, entries)
}

pub fn read_graph(path: &Path) -> Result<AdjacencyMatrix> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    parse_graph(&text).map_err(|e| match e {
        Error::Parse { line, message } => Error::Parse {
            line,
            message: format!("{}: {message}", path.display()),
        },
        other => other,
    })
}

fn same_size(g1: &AdjacencyMatrix, g2: &AdjacencyMatrix) -> Result<()> {
    if g1.n() != g2.n() {
        return Err(Error::DimensionMismatch {
            expected: g1.n(),
            found: g2.n(),
        });
    }
    Ok(())
}

fn small_int(v: &BigInt) -> Result<i64> {
    v.to_i64()
        .ok_or_else(|| Error::Internal(format!("integer {v} does not fit in 64 bits")))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MatchReport {
    pub sigma: Permutation,
    pub symdiff: u64,
    pub qform: i64,
    pub f_value: i64,
    pub mu: u64,
    pub lambda_bound: u64,
    #[serde(with = "serde_rational")]
    pub delta_hat: Rational,
    #[serde(with = "serde_rational")]
    pub t: Rational,
    pub upper_bound_int: i64,
    pub gap: i64,
    pub iterations: u64,
    pub solver_status: String,
}

impl MatchReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::InvalidArgument(format!("malformed report: {e}")))
    }

    pub fn is_optimal(&self) -> bool {
        self.solver_status == SolverStatus::Optimal.as_str()
    }

    pub fn exit_code(&self) -> i32 {
        if self.is_optimal() {
            EXIT_OK
        } else {
            EXIT_ITERATION_LIMIT
        }
    }

    pub fn to_table(&self) -> String {
        let rows = [
            ("sigma", self.sigma.to_string()),
            ("symdiff", self.symdiff.to_string()),
            ("qform", self.qform.to_string()),
            ("f_value", self.f_value.to_string()),
            ("mu", self.mu.to_string()),
            ("lambda_bound", self.lambda_bound.to_string()),
            ("delta_hat", format_rational(&self.delta_hat)),
            ("t", format_rational(&self.t)),
            ("upper_bound_int", self.upper_bound_int.to_string()),
            ("gap", self.gap.to_string()),
            ("iterations", self.iterations.to_string()),
            ("solver_status", self.solver_status.clone()),
        ];
        table(&rows)
    }
}

fn table(rows: &[(&str, String)]) -> String {
    let width = rows.iter().map(|(k, _)| k.len()).max().unwrap_or(0);
    let mut out = String::new();
    for (k, v) in rows {
        let _ = writeln!(out, "{k:<width$}  {v}");
    }
    out
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct MatchOptions {
    pub solver: SolverOptions,
    /// Overrides the certified perturbation.
    pub t: Option<Rational>,
}

/// Matches `g1` onto `g2`: convexify, perturb, solve, restrict, certify.
pub fn cmd_match(g1: &AdjacencyMatrix, g2: &AdjacencyMatrix, opts: &MatchOptions) -> Result<MatchReport> {
    same_size(g1, g2)?;
    let n = g1.n();
    let obj = build_objective(g1, g2)?;
    let params = PerturbationParams::for_objective(&obj)?;
    let t = opts.t.clone().unwrap_or_else(|| params.t.clone());
    let sys = build_perturbed(n, &t)?;
    let trace = maximize_convex(&obj, &sys, &opts.solver)?;
    let restricted = restrict_basis(&trace.final_basis, &sys)?;
    if !restricted.is_feasible() {
        return Err(Error::InvalidArgument(format!(
            "t = {} is too large: the optimal surrogate basis is infeasible once the perturbation is removed",
            format_rational(&t)
        )));
    }
    let sigma = bfs_to_permutation(&restricted)?;
    let x = sigma.to_matrix();
    let qform = eval_qform(&obj, &x)?;
    let f_value = eval_f(&obj, &x)?;
    if !qform.is_integer() || !f_value.is_integer() {
        return Err(Error::Internal(
            "objective is not integral on a permutation matrix".into(),
        ));
    }
    let f_int = f_value.to_integer();
    let (upper_bound_int, gap) = certify_gap(&trace, &f_int);
    Ok(MatchReport {
        symdiff: symmetric_difference(g1, g2, &sigma)? as u64,
        sigma,
        qform: small_int(&qform.to_integer())?,
        f_value: small_int(&f_int)?,
        mu: params.mu,
        lambda_bound: params.lambda_bound,
        delta_hat: params.delta_hat,
        t,
        upper_bound_int: small_int(&upper_bound_int)?,
        gap: small_int(&gap)?,
        iterations: trace.iteration_count() as u64,
        solver_status: trace.status.as_str().to_string(),
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoundReport {
    pub n: usize,
    pub mu: u64,
    pub lambda_bound: u64,
    #[serde(with = "serde_rational")]
    pub delta_hat: Rational,
    #[serde(with = "serde_rational")]
    pub t: Rational,
    /// Every perturbation strictly below this value is certified.
    #[serde(with = "serde_rational")]
    pub t_supremum: Rational,
}

impl BoundReport {
    pub fn to_table(&self) -> String {
        table(&[
            ("n", self.n.to_string()),
            ("mu", self.mu.to_string()),
            ("lambda_bound", self.lambda_bound.to_string()),
            ("delta_hat", format_rational(&self.delta_hat)),
            ("t", format_rational(&self.t)),
            ("t_supremum", format_rational(&self.t_supremum)),
        ])
    }
}

/// The certified perturbation for a pair, without solving.
pub fn cmd_bound(g1: &AdjacencyMatrix, g2: &AdjacencyMatrix) -> Result<BoundReport> {
    same_size(g1, g2)?;
    let params = PerturbationParams::for_objective(&build_objective(g1, g2)?)?;
    Ok(BoundReport {
        n: params.n,
        mu: params.mu,
        lambda_bound: params.lambda_bound,
        t_supremum: params.t_supremum(),
        delta_hat: params.delta_hat,
        t: params.t,
    })
}

pub fn cmd_oracle(g1: &AdjacencyMatrix, g2: &AdjacencyMatrix) -> Result<OracleResult> {
    oracle_gm(g1, g2)
}

/// Problem instance probed by [`cmd_verify`].
#[derive(Debug, Clone, PartialEq)]
pub enum VerifyProblem {
    Graphs(AdjacencyMatrix, AdjacencyMatrix),
    /// Separable objective on a preset polytope; the perturbation must be
    /// given explicitly.
    Objective(SeparableQuadratic),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub n: usize,
    #[serde(with = "serde_rational")]
    pub t: Rational,
    /// Whether `t` is below the certified bound; absent for objectives
    /// without one.
    pub certified: Option<bool>,
    /// Cells of the optimal surrogate basis, 1-based.
    pub basis: Vec<(usize, usize)>,
    #[serde(with = "serde_rational_vec")]
    pub surrogate_solution: Vec<Rational>,
    #[serde(with = "serde_rational_vec")]
    pub restricted_solution: Vec<Rational>,
    pub restricted_feasible: bool,
    #[serde(with = "serde_rational")]
    pub restricted_value: Rational,
    #[serde(with = "serde_rational")]
    pub oracle_value: Rational,
    pub equivalent: bool,
    pub solver_status: String,
}

impl VerifyReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn exit_code(&self) -> i32 {
        if self.solver_status == SolverStatus::Optimal.as_str() {
            EXIT_OK
        } else {
            EXIT_ITERATION_LIMIT
        }
    }

    pub fn to_table(&self) -> String {
        let cells: Vec<String> = self.basis.iter().map(|(i, j)| format!("x{i}{j}")).collect();
        let render = |v: &[Rational]| v.iter().map(format_rational).collect::<Vec<_>>().join(" ");
        table(&[
            ("n", self.n.to_string()),
            ("t", format_rational(&self.t)),
            (
                "certified",
                self.certified.map_or_else(|| "unknown".to_string(), |c| c.to_string()),
            ),
            ("basis", cells.join(" ")),
            ("surrogate_solution", render(&self.surrogate_solution)),
            ("restricted_solution", render(&self.restricted_solution)),
            ("restricted_feasible", self.restricted_feasible.to_string()),
            ("restricted_value", format_rational(&self.restricted_value)),
            ("oracle_value", format_rational(&self.oracle_value)),
            ("equivalent", self.equivalent.to_string()),
            ("solver_status", self.solver_status.clone()),
        ])
    }
}

/// Solves the surrogate at `t`, drops the perturbation from the optimal
/// basis, and compares the result with the exhaustive optimum.
pub fn cmd_verify(problem: &VerifyProblem, t: Option<&Rational>, solver: &SolverOptions) -> Result<VerifyReport> {
    match problem {
        VerifyProblem::Graphs(g1, g2) => {
            same_size(g1, g2)?;
            let obj = build_objective(g1, g2)?;
            let params = PerturbationParams::for_objective(&obj)?;
            let t = t.cloned().unwrap_or_else(|| params.t.clone());
            let certified = t < params.t_supremum();
            let oracle = oracle_gm(g1, g2)?;
            let optimum = Rational::from_integer(BigInt::from(obj.mu() * obj.n() as u64 + oracle.max_qform as u64));
            verify_with(&obj, &t, Some(certified), optimum, solver)
        }
        VerifyProblem::Objective(obj) => {
            let t = t.ok_or_else(|| {
                Error::InvalidArgument("a preset objective has no certified perturbation; pass --t".into())
            })?;
            let (_, optimum) = brute_force_vertex_max(obj, &build_birkhoff(obj.n())?);
            verify_with(obj, t, None, optimum, solver)
        }
    }
}

fn verify_with<F: ConvexObjective>(
    obj: &F,
    t: &Rational,
    certified: Option<bool>,
    oracle_value: Rational,
    solver: &SolverOptions,
) -> Result<VerifyReport> {
    let n = obj.n();
    let sys = build_perturbed(n, t)?;
    let trace = maximize_convex(obj, &sys, solver)?;
    let restricted = restrict_basis(&trace.final_basis, &sys)?;
    let restricted_feasible = restricted.is_feasible();
    let restricted_value = obj.evaluate(restricted.values());
    let equivalent = restricted_feasible && restricted_value == oracle_value;
    Ok(VerifyReport {
        n,
        t: t.clone(),
        certified,
        basis: trace.final_basis.cells(n),
        surrogate_solution: trace.final_vertex.values().to_vec(),
        restricted_solution: restricted.values().to_vec(),
        restricted_feasible,
        restricted_value,
        oracle_value,
        equivalent,
        solver_status: trace.status.as_str().to_string(),
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PolytopeReport {
    pub n: usize,
    #[serde(with = "serde_rational")]
    pub t: Rational,
    pub rows: usize,
    pub cols: usize,
    pub constraint_matrix: Vec<Vec<i64>>,
    #[serde(with = "serde_rational_vec")]
    pub rhs: Vec<Rational>,
    /// Northwest-corner starting basis, 1-based cells.
    pub initial_basis: Vec<(usize, usize)>,
    pub vertex_count: Option<usize>,
    pub vertices: Option<Vec<Vec<String>>>,
}

impl PolytopeReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn to_text(&self) -> String {
        let mut out = format!(
            "n = {}, t = {}: {} equality rows over {} variables\n",
            self.n,
            format_rational(&self.t),
            self.rows,
            self.cols
        );
        for (row, b) in self.constraint_matrix.iter().zip(&self.rhs) {
            let coeffs: Vec<String> = row.iter().map(ToString::to_string).collect();
            let _ = writeln!(out, "{} | {}", coeffs.join(" "), format_rational(b));
        }
        let cells: Vec<String> = self.initial_basis.iter().map(|(i, j)| format!("x{i}{j}")).collect();
        let _ = writeln!(out, "initial basis: {}", cells.join(" "));
        if let (Some(count), Some(vertices)) = (self.vertex_count, &self.vertices) {
            let _ = writeln!(out, "{count} vertices");
            for v in vertices {
                let _ = writeln!(out, "  {}", v.join(" "));
            }
        }
        out
    }
}

/// Describes the (perturbed) constraint system and optionally lists its
/// vertices.
pub fn cmd_polytope(n: usize, t: Option<&Rational>, enumerate: bool) -> Result<PolytopeReport> {
    let sys = match t {
        Some(t) if !t.is_zero() => {
            check_perturbation(n, t)?;
            build_perturbed(n, t)?
        }
        _ => build_birkhoff(n)?,
    };
    let vertices: Option<Vec<Vec<String>>> = enumerate.then(|| {
        enumerate_vertices(&sys)
            .map(|v| v.values().iter().map(format_rational).collect())
            .collect()
    });
    Ok(PolytopeReport {
        n,
        t: sys.t().clone(),
        rows: sys.rows(),
        cols: sys.cols(),
        constraint_matrix: (0..sys.rows()).map(|r| sys.matrix().row(r).to_vec()).collect(),
        rhs: sys.rhs().to_vec(),
        initial_basis: northwest_corner_basis(&sys).cells(n),
        vertex_count: vertices.as_ref().map(Vec::len),
        vertices,
    })
}
