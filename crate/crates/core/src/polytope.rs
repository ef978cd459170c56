//! The Birkhoff polytope and its right-hand-side perturbation.
//!
//! Variables are the `n * n` entries of a square matrix in row-major order,
//! so cell `(i, j)` (0-based) is column `i * n + j`. The system keeps the `n`
//! row-sum constraints followed by the first `n - 1` column-sum constraints;
//! the last column sum is implied and omitted to get full row rank.

use std::collections::{HashSet, VecDeque};
use std::fmt;

use num_traits::{One, Signed, Zero};
use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::linalg::{self, IntMatrix};
use crate::rational::{int, Rational};

/// `Ax = b`, `x >= 0` for the (possibly perturbed) assignment polytope.
#[derive(Debug, Clone, PartialEq)]
pub struct ConstraintSystem {
    n: usize,
    matrix: IntMatrix,
    rhs: Vec<Rational>,
    t: Rational,
}

impl ConstraintSystem {
    fn assemble(n: usize, t: Rational) -> Self {
        let rows = 2 * n - 1;
        let mut matrix = IntMatrix::zeros(rows, n * n);
        for i in 0..n {
            for j in 0..n {
                let k = i * n + j;
                matrix.set(i, k, 1);
                if j + 1 < n {
                    matrix.set(n + j, k, 1);
                }
            }
        }
        let row_rhs = Rational::one() - &t;
        let rhs = (0..rows)
            .map(|r| if r < n { row_rhs.clone() } else { Rational::one() })
            .collect();
        Self { n, matrix, rhs, t }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of equality constraints, `2n - 1`.
    pub fn rows(&self) -> usize {
        self.matrix.rows()
    }

    /// Number of variables, `n^2`.
    pub fn cols(&self) -> usize {
        self.matrix.cols()
    }

    pub fn matrix(&self) -> &IntMatrix {
        &self.matrix
    }

    pub fn rhs(&self) -> &[Rational] {
        &self.rhs
    }

    pub fn t(&self) -> &Rational {
        &self.t
    }

    pub fn is_perturbed(&self) -> bool {
        !self.t.is_zero()
    }

    /// Column index of cell `(i, j)`, both 0-based.
    pub fn column_index(&self, i: usize, j: usize) -> usize {
        i * self.n + j
    }

    /// Cell `(i, j)` (0-based) of column `k`.
    pub fn cell(&self, k: usize) -> (usize, usize) {
        (k / self.n, k % self.n)
    }

    /// The omitted constraint's right-hand side: `1 - n t`.
    pub fn implied_last_column_sum(&self) -> Rational {
        Rational::one() - int(self.n as i64) * &self.t
    }

    /// Whether `x` satisfies every equality (including the omitted one) and
    /// is nonnegative.
    pub fn contains(&self, x: &[Rational]) -> bool {
        if x.len() != self.cols() || x.iter().any(Signed::is_negative) {
            return false;
        }
        let n = self.n;
        let row_ok = (0..n).all(|i| {
            let s: Rational = (0..n).map(|j| &x[i * n + j]).sum();
            s == self.rhs[i]
        });
        let col_ok = (0..n).all(|j| {
            let s: Rational = (0..n).map(|i| &x[i * n + j]).sum();
            let want = if j + 1 < n {
                self.rhs[n + j].clone()
            } else {
                self.implied_last_column_sum()
            };
            s == want
        });
        row_ok && col_ok
    }

    /// The same matrix with the unperturbed all-ones right-hand side.
    pub fn unperturbed(&self) -> ConstraintSystem {
        Self::assemble(self.n, Rational::zero())
    }
}

/// Unperturbed Birkhoff polytope on `n x n` matrices.
pub fn build_birkhoff(n: usize) -> Result<ConstraintSystem> {
    if n < 2 {
        return Err(Error::InvalidDimension(n));
    }
    Ok(ConstraintSystem::assemble(n, Rational::zero()))
}

/// Row sums `1 - t`, column sums `1` for `j < n` (and implicitly `1 - nt`
/// for the last column). Non-degenerate for every `t` in `(0, 1/n)`.
pub fn build_perturbed(n: usize, t: &Rational) -> Result<ConstraintSystem> {
    if n < 2 {
        return Err(Error::InvalidDimension(n));
    }
    check_perturbation(n, t)?;
    Ok(ConstraintSystem::assemble(n, t.clone()))
}

pub(crate) fn check_perturbation(n: usize, t: &Rational) -> Result<()> {
    if !t.is_positive() || t * int(n as i64) >= Rational::one() {
        return Err(Error::PerturbationOutOfRange { t: t.clone(), n });
    }
    Ok(())
}

/// Ordered set of `2n - 1` column indices.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Basis(Vec<usize>);

impl Basis {
    pub fn new(columns: Vec<usize>, sys: &ConstraintSystem) -> Result<Self> {
        if columns.len() != sys.rows() {
            return Err(Error::NotABasis(format!(
                "expected {} columns, got {}",
                sys.rows(),
                columns.len()
            )));
        }
        let mut seen = HashSet::new();
        for &c in &columns {
            if c >= sys.cols() {
                return Err(Error::NotABasis(format!("column {c} out of range")));
            }
            if !seen.insert(c) {
                return Err(Error::NotABasis(format!("column {c} repeated")));
            }
        }
        Ok(Self(columns))
    }

    /// Builds a basis from 1-based matrix cells `(i, j)`.
    pub fn from_cells(sys: &ConstraintSystem, cells: &[(usize, usize)]) -> Result<Self> {
        let n = sys.n();
        let columns = cells
            .iter()
            .map(|&(i, j)| {
                if i == 0 || j == 0 || i > n || j > n {
                    Err(Error::NotABasis(format!("cell ({i},{j}) out of range")))
                } else {
                    Ok(sys.column_index(i - 1, j - 1))
                }
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(columns, sys)
    }

    pub fn columns(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, column: usize) -> bool {
        self.0.contains(&column)
    }

    /// Same column set in increasing order.
    pub fn sorted(&self) -> Basis {
        let mut c = self.0.clone();
        c.sort_unstable();
        Basis(c)
    }

    /// 1-based `(i, j)` cells, in basis order.
    pub fn cells(&self, n: usize) -> Vec<(usize, usize)> {
        self.0.iter().map(|&k| (k / n + 1, k % n + 1)).collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BasicSolution {
    values: Vec<Rational>,
    basis: Basis,
    feasible: bool,
    degenerate: bool,
}

impl BasicSolution {
    pub fn values(&self) -> &[Rational] {
        &self.values
    }

    pub fn into_values(self) -> Vec<Rational> {
        self.values
    }

    pub fn basis(&self) -> &Basis {
        &self.basis
    }

    pub fn is_feasible(&self) -> bool {
        self.feasible
    }

    pub fn is_degenerate(&self) -> bool {
        self.degenerate
    }

    /// Entry at 0-based cell `(i, j)` of the `n x n` solution matrix.
    pub fn at(&self, n: usize, i: usize, j: usize) -> &Rational {
        &self.values[i * n + j]
    }

    /// Values of the basic variables, in basis order.
    pub fn basic_values(&self) -> Vec<&Rational> {
        self.basis.columns().iter().map(|&k| &self.values[k]).collect()
    }
}

/// Solves `B x_B = rhs` for the columns in `basis`, scattering into a full
/// vector of length `matrix.cols()`.
pub(crate) fn solve_basis(matrix: &IntMatrix, basis: &[usize], rhs: &[Rational]) -> Result<Vec<Rational>> {
    let m = matrix.rows();
    let b: Vec<Vec<Rational>> = (0..m)
        .map(|r| basis.iter().map(|&c| int(matrix.get(r, c))).collect())
        .collect();
    let xb =
        linalg::solve(&b, rhs).ok_or_else(|| Error::NotABasis(format!("columns {basis:?} are linearly dependent")))?;
    let mut values = vec![Rational::zero(); matrix.cols()];
    for (&c, v) in basis.iter().zip(xb) {
        values[c] = v;
    }
    Ok(values)
}

fn classify(values: Vec<Rational>, basis: Basis) -> BasicSolution {
    let feasible = values.iter().all(|v| !v.is_negative());
    let degenerate = feasible && basis.columns().iter().any(|&k| values[k].is_zero());
    BasicSolution {
        values,
        basis,
        feasible,
        degenerate,
    }
}

/// Exact basic solution induced by `basis`.
pub fn basic_solution(sys: &ConstraintSystem, basis: &Basis) -> Result<BasicSolution> {
    if basis.len() != sys.rows() || basis.columns().iter().any(|&c| c >= sys.cols()) {
        return Err(Error::NotABasis(format!(
            "basis {:?} does not fit a {}x{} system",
            basis.columns(),
            sys.rows(),
            sys.cols()
        )));
    }
    let values = solve_basis(sys.matrix(), basis.columns(), sys.rhs())?;
    Ok(classify(values, basis.clone()))
}

/// Feasible starting basis from the northwest-corner rule of the
/// transportation problem. Ties (degenerate steps) advance along the row and
/// keep a zero cell so that exactly `2n - 1` cells are produced.
pub fn northwest_corner_basis(sys: &ConstraintSystem) -> Basis {
    let n = sys.n();
    let mut supply: Vec<Rational> = sys.rhs()[..n].to_vec();
    let mut demand: Vec<Rational> = sys.rhs()[n..].to_vec();
    demand.push(sys.implied_last_column_sum());
    let (mut i, mut j) = (0, 0);
    let mut cells = Vec::with_capacity(2 * n - 1);
    while cells.len() < 2 * n - 1 {
        cells.push(sys.column_index(i, j));
        let q = if supply[i] < demand[j] {
            supply[i].clone()
        } else {
            demand[j].clone()
        };
        supply[i] -= &q;
        demand[j] -= &q;
        if i == n - 1 {
            j += 1;
        } else if j == n - 1 || supply[i].is_zero() {
            i += 1;
        } else {
            j += 1;
        }
    }
    Basis(cells)
}

/// Square row-major matrix `B^{-1} A` and `B^{-1} b` for a basis.
struct Tableau {
    body: Vec<Vec<Rational>>,
    xb: Vec<Rational>,
}

fn tableau(sys: &ConstraintSystem, basis: &[usize]) -> Tableau {
    let m = sys.rows();
    let cols = sys.cols();
    let mut aug: Vec<Vec<Rational>> = (0..m)
        .map(|r| {
            let mut row: Vec<Rational> = basis.iter().map(|&c| int(sys.matrix().get(r, c))).collect();
            row.extend((0..cols).map(|c| int(sys.matrix().get(r, c))));
            row.push(sys.rhs()[r].clone());
            row
        })
        .collect();
    let rank = linalg::row_reduce(&mut aug, m);
    debug_assert_eq!(rank, m, "tableau of a singular basis");
    let body = aug.iter().map(|row| row[m..m + cols].to_vec()).collect();
    let xb = aug.iter().map(|row| row[m + cols].clone()).collect();
    Tableau { body, xb }
}

/// Vertices of `sys`, each reported once, found by a breadth-first walk over
/// feasible bases connected by simplex pivots.
pub fn enumerate_vertices(sys: &ConstraintSystem) -> VertexStream<'_> {
    let start = northwest_corner_basis(sys).sorted();
    let mut queue = VecDeque::new();
    let mut visited = HashSet::new();
    visited.insert(start.clone());
    queue.push_back(start);
    VertexStream {
        sys,
        queue,
        visited,
        seen_vertices: HashSet::new(),
    }
}

pub struct VertexStream<'a> {
    sys: &'a ConstraintSystem,
    queue: VecDeque<Basis>,
    visited: HashSet<Basis>,
    seen_vertices: HashSet<Vec<Rational>>,
}

impl VertexStream<'_> {
    fn expand(&mut self, basis: &Basis, tab: &Tableau) {
        let cols = basis.columns();
        for e in 0..self.sys.cols() {
            if basis.contains(e) {
                continue;
            }
            let mut best: Option<Rational> = None;
            let mut leaving = Vec::new();
            for (r, row) in tab.body.iter().enumerate() {
                if !row[e].is_positive() {
                    continue;
                }
                let ratio = &tab.xb[r] / &row[e];
                match &best {
                    Some(b) if ratio > *b => {}
                    Some(b) if ratio == *b => leaving.push(r),
                    _ => {
                        best = Some(ratio);
                        leaving.clear();
                        leaving.push(r);
                    }
                }
            }
            for r in leaving {
                let mut next = cols.to_vec();
                next[r] = e;
                next.sort_unstable();
                let next = Basis(next);
                if self.visited.insert(next.clone()) {
                    self.queue.push_back(next);
                }
            }
        }
    }
}

impl Iterator for VertexStream<'_> {
    type Item = BasicSolution;

    fn next(&mut self) -> Option<BasicSolution> {
        while let Some(basis) = self.queue.pop_front() {
            let tab = tableau(self.sys, basis.columns());
            self.expand(&basis, &tab);
            let mut values = vec![Rational::zero(); self.sys.cols()];
            for (&c, v) in basis.columns().iter().zip(&tab.xb) {
                values[c] = v.clone();
            }
            if self.seen_vertices.insert(values.clone()) {
                return Some(classify(values, basis));
            }
        }
        None
    }
}

/// A permutation of `{0, .., n-1}` stored as its image array; serialized
/// 1-based.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Permutation(Vec<usize>);

impl Permutation {
    pub fn new(image: Vec<usize>) -> Result<Self> {
        let n = image.len();
        let mut seen = vec![false; n];
        for &v in &image {
            if v >= n || std::mem::replace(&mut seen[v], true) {
                return Err(Error::InvalidArgument(format!("{image:?} is not a permutation")));
            }
        }
        Ok(Self(image))
    }

    /// From a 1-based image array such as `[2, 3, 1]`.
    pub fn from_one_based(image: &[usize]) -> Result<Self> {
        if image.contains(&0) {
            return Err(Error::InvalidArgument(format!("{image:?} is not 1-based")));
        }
        Self::new(image.iter().map(|v| v - 1).collect())
    }

    pub fn identity(n: usize) -> Self {
        Self((0..n).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn image(&self) -> &[usize] {
        &self.0
    }

    pub fn apply(&self, i: usize) -> usize {
        self.0[i]
    }

    pub fn one_based(&self) -> Vec<usize> {
        self.0.iter().map(|v| v + 1).collect()
    }

    pub fn inverse(&self) -> Self {
        let mut inv = vec![0; self.0.len()];
        for (i, &j) in self.0.iter().enumerate() {
            inv[j] = i;
        }
        Self(inv)
    }

    /// `(self ∘ other)(i) = self(other(i))`.
    pub fn compose(&self, other: &Permutation) -> Self {
        Self(other.0.iter().map(|&i| self.0[i]).collect())
    }

    /// Row-major permutation matrix with `x[i][sigma(i)] = 1`.
    pub fn to_matrix(&self) -> Vec<Rational> {
        let n = self.0.len();
        let mut x = vec![Rational::zero(); n * n];
        for (i, &j) in self.0.iter().enumerate() {
            x[i * n + j] = Rational::one();
        }
        x
    }

    /// Advances to the lexicographically next permutation; `false` after the last.
    pub fn advance(&mut self) -> bool {
        let a = &mut self.0;
        let Some(i) = (1..a.len()).rev().find(|&i| a[i - 1] < a[i]) else {
            return false;
        };
        let j = (i..a.len()).rev().find(|&j| a[j] > a[i - 1]).unwrap();
        a.swap(i - 1, j);
        a[i..].reverse();
        true
    }
}

impl fmt::Display for Permutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.one_based().iter().map(ToString::to_string).collect();
        write!(f, "({})", parts.join(","))
    }
}

impl Serialize for Permutation {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.one_based().serialize(s)
    }
}

impl<'de> Deserialize<'de> for Permutation {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let image = Vec::<usize>::deserialize(d)?;
        Permutation::from_one_based(&image).map_err(serde::de::Error::custom)
    }
}

/// Reads a 0/1 permutation matrix back as `sigma` with `sigma(i) = j` iff
/// entry `(i, j)` is one. Requires an unperturbed, feasible solution.
pub fn bfs_to_permutation(sol: &BasicSolution) -> Result<Permutation> {
    let len = sol.values().len();
    let n = (len as f64).sqrt().round() as usize;
    if n * n != len {
        return Err(Error::NotAVertex(format!("{len} entries is not a square matrix")));
    }
    if !sol.is_feasible() {
        return Err(Error::NotAVertex("solution is infeasible".into()));
    }
    let mut image = Vec::with_capacity(n);
    for i in 0..n {
        let mut col = None;
        for j in 0..n {
            let v = sol.at(n, i, j);
            if v.is_one() {
                if col.replace(j).is_some() {
                    return Err(Error::NotAVertex(format!("row {} has two unit entries", i + 1)));
                }
            } else if !v.is_zero() {
                return Err(Error::NotAVertex(format!(
                    "entry ({},{}) = {v} is not binary",
                    i + 1,
                    j + 1
                )));
            }
        }
        image.push(col.ok_or_else(|| Error::NotAVertex(format!("row {} has no unit entry", i + 1)))?);
    }
    Permutation::new(image).map_err(|_| Error::NotAVertex("a column has two unit entries".into()))
}

/// Samples `trials` random `order x order` minors; `true` iff every
/// determinant lies in `{-1, 0, 1}`. A regression guard, not a proof.
pub fn check_tu_minors(sys: &ConstraintSystem, order: usize, trials: usize, seed: u64) -> bool {
    sample_unimodular_minors(sys.matrix(), order, trials, seed)
}

pub fn sample_unimodular_minors(matrix: &IntMatrix, order: usize, trials: usize, seed: u64) -> bool {
    assert!(
        order <= matrix.rows() && order <= matrix.cols(),
        "minor order too large"
    );
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..trials).all(|_| {
        let mut rows = sample(&mut rng, matrix.rows(), order).into_vec();
        let mut cols = sample(&mut rng, matrix.cols(), order).into_vec();
        rows.sort_unstable();
        cols.sort_unstable();
        matrix.minor(&rows, &cols).abs() <= 1
    })
}

/// Every `order x order` minor, exhaustively.
pub fn all_minors_unimodular(matrix: &IntMatrix, order: usize) -> bool {
    let rows = combinations(matrix.rows(), order);
    let cols = combinations(matrix.cols(), order);
    rows.iter().all(|r| cols.iter().all(|c| matrix.minor(r, c).abs() <= 1))
}

fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            if n - i < k - cur.len() {
                break;
            }
            cur.push(i);
            rec(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(0, n, k, &mut Vec::new(), &mut out);
    out
}

/// Uniformly random basis, by rejection over column subsets.
pub fn random_basis<R: Rng + ?Sized>(sys: &ConstraintSystem, rng: &mut R) -> Basis {
    let m = sys.rows();
    let all_rows: Vec<usize> = (0..m).collect();
    loop {
        let cols = sample(rng, sys.cols(), m).into_vec();
        if sys.matrix().minor(&all_rows, &cols) != 0 {
            return Basis(cols);
        }
    }
}
