//! Graph matching as convex maximization.
//!
//! For adjacency matrices `E1`, `E2` and a square matrix `x`, the matching
//! score is `tr((E1 x)^T (x E2))`, which at a permutation matrix counts every
//! common edge twice. Adding `mu * ||x||^2` with `mu` above the spectral
//! radius of the underlying quadratic form makes it strictly convex without
//! moving the argmax over permutation matrices, because `||x||^2 = n` there.

use num_integer::Roots;
use num_traits::{Signed, Zero};

use crate::error::{Error, Result};
use crate::polytope::Permutation;
use crate::rational::{int, rat, Rational};

/// Symmetric 0/1 adjacency matrix of a simple undirected graph.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct AdjacencyMatrix {
    n: usize,
    entries: Vec<bool>,
}

impl AdjacencyMatrix {
    /// Validates a row-major 0/1 matrix.
    pub fn new(n: usize, entries: Vec<bool>) -> Result<Self> {
        if entries.len() != n * n {
            return Err(Error::DimensionMismatch {
                expected: n * n,
                found: entries.len(),
            });
        }
        for i in 0..n {
            if entries[i * n + i] {
                return Err(Error::InvalidArgument(format!("self-loop at vertex {}", i + 1)));
            }
            for j in i + 1..n {
                if entries[i * n + j] != entries[j * n + i] {
                    return Err(Error::InvalidArgument(format!(
                        "asymmetric entries at ({},{}) and ({},{})",
                        i + 1,
                        j + 1,
                        j + 1,
                        i + 1
                    )));
                }
            }
        }
        Ok(Self { n, entries })
    }

    /// From 1-based undirected edges; duplicates are merged.
    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Result<Self> {
        let mut entries = vec![false; n * n];
        for &(u, v) in edges {
            if u == 0 || v == 0 || u > n || v > n {
                return Err(Error::InvalidArgument(format!("edge ({u},{v}) out of range 1..={n}")));
            }
            if u == v {
                return Err(Error::InvalidArgument(format!("self-loop at vertex {u}")));
            }
            entries[(u - 1) * n + (v - 1)] = true;
            entries[(v - 1) * n + (u - 1)] = true;
        }
        Ok(Self { n, entries })
    }

    pub fn empty(n: usize) -> Self {
        Self {
            n,
            entries: vec![false; n * n],
        }
    }

    pub fn complete(n: usize) -> Self {
        let entries = (0..n * n).map(|k| k / n != k % n).collect();
        Self { n, entries }
    }

    pub fn path(n: usize) -> Self {
        let edges: Vec<_> = (1..n).map(|i| (i, i + 1)).collect();
        Self::from_edges(n, &edges).expect("valid path")
    }

    pub fn cycle(n: usize) -> Self {
        let mut edges: Vec<_> = (1..n).map(|i| (i, i + 1)).collect();
        edges.push((n, 1));
        Self::from_edges(n, &edges).expect("valid cycle")
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        self.entries[i * self.n + j]
    }

    pub fn edge_count(&self) -> usize {
        self.entries.iter().filter(|&&e| e).count() / 2
    }

    /// Undirected edges `(i, j)` with `i < j`, 0-based.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let n = self.n;
        (0..n)
            .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
            .filter(|&(i, j)| self.has_edge(i, j))
            .collect()
    }

    pub fn degree(&self, i: usize) -> usize {
        (0..self.n).filter(|&j| self.has_edge(i, j)).count()
    }

    /// The graph with vertex `i` renamed `sigma(i)`.
    pub fn relabel(&self, sigma: &Permutation) -> Self {
        let n = self.n;
        let mut entries = vec![false; n * n];
        for (i, j) in self.edges() {
            let (a, b) = (sigma.apply(i), sigma.apply(j));
            entries[a * n + b] = true;
            entries[b * n + a] = true;
        }
        Self { n, entries }
    }

    pub fn to_rows(&self) -> Vec<Vec<i64>> {
        (0..self.n)
            .map(|i| (0..self.n).map(|j| i64::from(self.has_edge(i, j))).collect())
            .collect()
    }
}

/// Maximum degree, i.e. the infinity norm, which bounds the spectral radius.
pub fn spectral_bound(e: &AdjacencyMatrix) -> u64 {
    (0..e.n()).map(|i| e.degree(i) as u64).max().unwrap_or(0)
}

/// A function maximized by the solver: convex and continuous on the
/// nonnegative orthant, evaluated exactly on row-major `n x n` points.
pub trait ConvexObjective {
    /// Side length of the square matrix argument.
    fn n(&self) -> usize;

    fn evaluate(&self, x: &[Rational]) -> Rational;

    fn gradient(&self, x: &[Rational]) -> Vec<Rational>;

    /// Whether values at permutation matrices are integers.
    fn is_integer_on_vertices(&self) -> bool;
}

/// `x -> tr((E1 x)^T (x E2)) + mu ||x||^2`.
///
/// With row-major flattening the quadratic form is `vec(x)^T (E1 ⊗ E2) vec(x)`
/// (equivalently `E2 ⊗ E1` under column-major `vec`); it is never
/// materialized for evaluation.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadraticObjective {
    e1: AdjacencyMatrix,
    e2: AdjacencyMatrix,
    mu: u64,
    lambda_bound: u64,
}

/// `lambda_bound = ||E1||_inf * ||E2||_inf` and `mu = lambda_bound + 1`.
pub fn build_objective(e1: &AdjacencyMatrix, e2: &AdjacencyMatrix) -> Result<QuadraticObjective> {
    if e1.n() != e2.n() {
        return Err(Error::DimensionMismatch {
            expected: e1.n(),
            found: e2.n(),
        });
    }
    let lambda_bound = spectral_bound(e1) * spectral_bound(e2);
    Ok(QuadraticObjective {
        e1: e1.clone(),
        e2: e2.clone(),
        mu: lambda_bound + 1,
        lambda_bound,
    })
}

impl QuadraticObjective {
    pub fn e1(&self) -> &AdjacencyMatrix {
        &self.e1
    }

    pub fn e2(&self) -> &AdjacencyMatrix {
        &self.e2
    }

    pub fn n(&self) -> usize {
        self.e1.n()
    }

    pub fn mu(&self) -> u64 {
        self.mu
    }

    pub fn lambda_bound(&self) -> u64 {
        self.lambda_bound
    }

    fn check_len(&self, x: &[Rational]) -> Result<()> {
        let want = self.n() * self.n();
        if x.len() != want {
            return Err(Error::DimensionMismatch {
                expected: want,
                found: x.len(),
            });
        }
        Ok(())
    }

    /// `E1 x` and `x E2`, exploiting 0/1 sparsity.
    fn products(&self, x: &[Rational]) -> (Vec<Rational>, Vec<Rational>) {
        let n = self.n();
        let mut left = vec![Rational::zero(); n * n];
        let mut right = vec![Rational::zero(); n * n];
        for i in 0..n {
            for k in 0..n {
                if self.e1.has_edge(i, k) {
                    for j in 0..n {
                        left[i * n + j] += &x[k * n + j];
                    }
                }
                if self.e2.has_edge(k, i) {
                    // (x E2)_{r,i} += x_{r,k}
                    for r in 0..n {
                        right[r * n + i] += &x[r * n + k];
                    }
                }
            }
        }
        (left, right)
    }

    /// Materialized `n^2 x n^2` quadratic form matrix, row-major indexing.
    /// For testing on small `n` only.
    pub fn q_matrix(&self) -> Vec<Vec<i64>> {
        let n = self.n();
        let mut q = vec![vec![0i64; n * n]; n * n];
        for (a, row) in q.iter_mut().enumerate() {
            let (k, j) = (a / n, a % n);
            for (b, v) in row.iter_mut().enumerate() {
                let (i, l) = (b / n, b % n);
                *v = i64::from(self.e1.has_edge(k, i) && self.e2.has_edge(j, l));
            }
        }
        q
    }
}

/// `tr((E1 x)^T (x E2))`; twice the common edge count at a permutation matrix.
pub fn eval_qform(obj: &QuadraticObjective, x: &[Rational]) -> Result<Rational> {
    obj.check_len(x)?;
    let (left, right) = obj.products(x);
    Ok(left.iter().zip(&right).map(|(a, b)| a * b).sum())
}

/// `eval_qform(x) + mu * sum x_ij^2`.
pub fn eval_f(obj: &QuadraticObjective, x: &[Rational]) -> Result<Rational> {
    let q = eval_qform(obj, x)?;
    let sq: Rational = x.iter().map(|v| v * v).sum();
    Ok(q + int(obj.mu as i64) * sq)
}

/// `|E1_sigma △ E2|` after renaming vertex `i` of the first graph to `sigma(i)`.
pub fn symmetric_difference(e1: &AdjacencyMatrix, e2: &AdjacencyMatrix, sigma: &Permutation) -> Result<usize> {
    if e1.n() != e2.n() || sigma.len() != e1.n() {
        return Err(Error::DimensionMismatch {
            expected: e1.n(),
            found: if e1.n() != e2.n() { e2.n() } else { sigma.len() },
        });
    }
    let common = common_edges(e1, e2, sigma);
    Ok(e1.edge_count() + e2.edge_count() - 2 * common)
}

pub(crate) fn common_edges(e1: &AdjacencyMatrix, e2: &AdjacencyMatrix, sigma: &Permutation) -> usize {
    e1.edges()
        .into_iter()
        .filter(|&(i, j)| e2.has_edge(sigma.apply(i), sigma.apply(j)))
        .count()
}

/// `||E1 x - x E2||_F^2` evaluated directly.
pub fn frobenius_disagreement(e1: &AdjacencyMatrix, e2: &AdjacencyMatrix, x: &[Rational]) -> Rational {
    let n = e1.n();
    let mut total = Rational::zero();
    for i in 0..n {
        for j in 0..n {
            let mut d = Rational::zero();
            for k in 0..n {
                if e1.has_edge(i, k) {
                    d += &x[k * n + j];
                }
                if e2.has_edge(k, j) {
                    d -= &x[i * n + k];
                }
            }
            total += &d * &d;
        }
    }
    total
}

/// A radius `delta` in `(0, 1)` such that moving a vertex by less than
/// `delta` in Euclidean norm changes `f` by less than `1/2`:
/// `min(1/2, 1 / (4 mu (2 ceil(sqrt n) + 1)))`.
pub fn delta_for_quadratic(obj: &QuadraticObjective) -> Rational {
    let s = ceil_sqrt(obj.n() as u64) as i64;
    let radius = rat(1, 4 * obj.mu() as i64 * (2 * s + 1));
    radius.min(rat(1, 2))
}

fn ceil_sqrt(n: u64) -> u64 {
    let r = n.sqrt();
    if r * r == n {
        r
    } else {
        r + 1
    }
}

impl ConvexObjective for QuadraticObjective {
    fn n(&self) -> usize {
        self.e1.n()
    }

    fn evaluate(&self, x: &[Rational]) -> Rational {
        eval_f(self, x).expect("point of matching dimension")
    }

    /// `2 E1 x E2 + 2 mu x`.
    fn gradient(&self, x: &[Rational]) -> Vec<Rational> {
        let n = self.n();
        let (left, _) = self.products(x);
        let mu = int(self.mu as i64);
        let mut g = vec![Rational::zero(); n * n];
        for i in 0..n {
            for j in 0..n {
                let mut acc = &mu * &x[i * n + j];
                for l in 0..n {
                    if self.e2.has_edge(l, j) {
                        acc += &left[i * n + l];
                    }
                }
                g[i * n + j] = acc * int(2);
            }
        }
        g
    }

    fn is_integer_on_vertices(&self) -> bool {
        true
    }
}

/// `sum_k linear_k x_k + quadratic_k x_k^2` with `quadratic_k >= 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct SeparableQuadratic {
    n: usize,
    linear: Vec<Rational>,
    quadratic: Vec<Rational>,
}

impl SeparableQuadratic {
    pub fn new(n: usize, linear: Vec<Rational>, quadratic: Vec<Rational>) -> Result<Self> {
        for v in [&linear, &quadratic] {
            if v.len() != n * n {
                return Err(Error::DimensionMismatch {
                    expected: n * n,
                    found: v.len(),
                });
            }
        }
        if quadratic.iter().any(Signed::is_negative) {
            return Err(Error::InvalidArgument("negative curvature breaks convexity".into()));
        }
        Ok(Self { n, linear, quadratic })
    }

    /// 2x2 objective whose optimal basis flips when the perturbation is too
    /// large: `3/5000 (x12 + x21) + 1001/1000 x11^2 + x12^2 + x21^2 + 1001/1000 x22^2`.
    pub fn near_tie_2x2() -> Self {
        let a = rat(3, 5000);
        let c = rat(1001, 1000);
        Self::new(
            2,
            vec![int(0), a.clone(), a, int(0)],
            vec![c.clone(), int(1), int(1), c],
        )
        .unwrap()
    }

    /// 3x3 objective favouring the diagonal: `101/100 sum x_ii^2 + sum_{i != j} x_ij^2`.
    pub fn diagonal_preference_3x3() -> Self {
        let quadratic = (0..9)
            .map(|k| if k / 3 == k % 3 { rat(101, 100) } else { int(1) })
            .collect();
        Self::new(3, vec![int(0); 9], quadratic).unwrap()
    }

    /// The zero function.
    pub fn constant(n: usize) -> Self {
        Self::new(n, vec![int(0); n * n], vec![int(0); n * n]).unwrap()
    }
}

impl ConvexObjective for SeparableQuadratic {
    fn n(&self) -> usize {
        self.n
    }

    fn evaluate(&self, x: &[Rational]) -> Rational {
        x.iter()
            .zip(&self.linear)
            .zip(&self.quadratic)
            .map(|((v, l), q)| l * v + q * v * v)
            .sum()
    }

    fn gradient(&self, x: &[Rational]) -> Vec<Rational> {
        x.iter()
            .zip(&self.linear)
            .zip(&self.quadratic)
            .map(|((v, l), q)| l + int(2) * q * v)
            .collect()
    }

    fn is_integer_on_vertices(&self) -> bool {
        self.linear.iter().chain(&self.quadratic).all(Rational::is_integer)
    }
}

impl<T: ConvexObjective + ?Sized> ConvexObjective for &T {
    fn n(&self) -> usize {
        (**self).n()
    }

    fn evaluate(&self, x: &[Rational]) -> Rational {
        (**self).evaluate(x)
    }

    fn gradient(&self, x: &[Rational]) -> Vec<Rational> {
        (**self).gradient(x)
    }

    fn is_integer_on_vertices(&self) -> bool {
        (**self).is_integer_on_vertices()
    }
}
