//! Convex maximization over a non-degenerate perturbed Birkhoff polytope by
//! simplicial branch-and-bound.
//!
//! Every vertex of `P'` lies within `n t` (entrywise) of a permutation
//! matrix, so it sits in one of the regions
//!
//! ```text
//! R(s) = { x in P' : x[i][s(i)] >= 1 - n t  for the rows fixed by s }
//! ```
//!
//! indexed by partial assignments `s`. A node couples such a region with a
//! simplex `S = conv(v_1, .., v_K)` in the affine hull of `P'` containing it.
//! On `S` the affine interpolant `sum_k lambda_k f(v_k)` dominates a convex
//! `f`, so the LP
//!
//! ```text
//! max  sum_k lambda_k f(v_k)   s.t.  V lambda >= l,  sum lambda = 1,  lambda >= 0
//! ```
//!
//! bounds `f` over `R(s)`. Its optimal point seeds the incumbent through a
//! linearize-and-resolve ascent to a vertex. Nodes whose region still has
//! free rows are split by assigning the next row; fully assigned nodes have
//! tiny regions and are split geometrically, either radially through the LP
//! point or at the midpoint of the longest edge.

use std::cmp::{Ordering, Reverse};
use std::collections::{BinaryHeap, HashSet};

use log::{debug, trace};
use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg;
use crate::lp::{simplex_max, solve_lp, LpStatus};
use crate::objective::ConvexObjective;
use crate::polytope::{
    basic_solution, enumerate_vertices, northwest_corner_basis, BasicSolution, Basis, ConstraintSystem,
};
use crate::rational::{self, int, Rational};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SubdivisionRule {
    /// Bisect the longest edge at its midpoint.
    LongestEdge,
    /// Split radially through the bounding LP's optimal point.
    #[default]
    Omega,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct SolverOptions {
    /// `None` runs to optimality.
    pub max_iterations: Option<usize>,
    pub subdivision_rule: SubdivisionRule,
}

impl SolverOptions {
    pub fn with_max_iterations(max_iterations: usize) -> Result<Self> {
        if max_iterations == 0 {
            return Err(Error::InvalidArgument("max_iterations must be at least 1".into()));
        }
        Ok(Self {
            max_iterations: Some(max_iterations),
            ..Self::default()
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SolverStatus {
    Optimal,
    IterationLimit,
}

impl SolverStatus {
    pub fn as_str(&self) -> &'static str {
        match self {
            SolverStatus::Optimal => "optimal",
            SolverStatus::IterationLimit => "iteration-limit",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TraceEntry {
    pub iteration: usize,
    pub upper_bound: Rational,
    pub incumbent_value: Rational,
}

/// Bound history of one run. Upper bounds never increase, incumbents never
/// decrease, and at `Optimal` the last upper bound equals the incumbent.
#[derive(Debug, Clone, PartialEq)]
pub struct SolverTrace {
    pub iterations: Vec<TraceEntry>,
    pub final_basis: Basis,
    pub final_vertex: BasicSolution,
    pub status: SolverStatus,
}

impl SolverTrace {
    pub fn upper_bound(&self) -> &Rational {
        &self.iterations.last().expect("trace has a root entry").upper_bound
    }

    pub fn incumbent_value(&self) -> &Rational {
        &self.iterations.last().expect("trace has a root entry").incumbent_value
    }

    /// Number of nodes processed (the root entry excluded).
    pub fn iteration_count(&self) -> usize {
        self.iterations.last().map_or(0, |e| e.iteration)
    }
}

struct Node {
    id: u64,
    /// Column assigned to each of the leading rows.
    fixed: Vec<usize>,
    vertices: Vec<Vec<Rational>>,
    values: Vec<Rational>,
    bound: Rational,
    lambda: Vec<Rational>,
    point: Vec<Rational>,
}

impl PartialEq for Node {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Node {}

impl PartialOrd for Node {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Node {
    /// Largest bound first; among equal bounds the older node.
    fn cmp(&self, other: &Self) -> Ordering {
        self.bound
            .cmp(&other.bound)
            .then_with(|| Reverse(self.id).cmp(&Reverse(other.id)))
    }
}

struct Incumbent {
    value: Rational,
    solution: BasicSolution,
}

struct Search<'a, F: ConvexObjective> {
    obj: &'a F,
    sys: &'a ConstraintSystem,
    matrix: Vec<Vec<Rational>>,
    threshold: Rational,
    next_id: u64,
    incumbent: Incumbent,
    visited: HashSet<Basis>,
}

impl<'a, F: ConvexObjective> Search<'a, F> {
    /// Repeatedly maximizes the linearization of `f` at the current point.
    /// Each step lands on a vertex at least as good, by convexity. Stops
    /// early on a vertex an earlier ascent already passed through.
    fn ascend(&mut self, start: &[Rational]) -> Option<Incumbent> {
        let mut current_value = self.obj.evaluate(start);
        let mut best: Option<Incumbent> = None;
        let mut point = start.to_vec();
        loop {
            let grad = self.obj.gradient(&point);
            let res = solve_lp(self.sys, &grad);
            let sol = res.solution.expect("perturbed polytope is nonempty and bounded");
            let value = self.obj.evaluate(sol.values());
            if best.is_some() && value <= current_value {
                break;
            }
            debug_assert!(value >= current_value, "linearization ascent went downhill");
            if !self.visited.insert(sol.basis().sorted()) {
                break;
            }
            current_value = value.clone();
            point = sol.values().to_vec();
            best = Some(Incumbent { value, solution: sol });
        }
        best
    }

    fn offer(&mut self, point: &[Rational]) {
        if let Some(cand) = self.ascend(point) {
            if cand.value > self.incumbent.value {
                debug!("incumbent improved to {}", cand.value);
                self.incumbent = cand;
            }
        }
    }

    fn lower_bounds(&self, fixed: &[usize]) -> Vec<Rational> {
        let n = self.sys.n();
        let mut lower = vec![Rational::zero(); self.sys.cols()];
        for (i, &j) in fixed.iter().enumerate() {
            lower[i * n + j] = self.threshold.clone();
        }
        lower
    }

    /// A simplex containing the region of `fixed`: the cone of a vertex of
    /// the region, cut by the largest total of the nonbasic coordinates.
    fn enclose(&self, lower: &[Rational]) -> Option<Vec<Vec<Rational>>> {
        let dim = self.sys.cols();
        let rhs: Vec<Rational> = self
            .matrix
            .iter()
            .zip(self.sys.rhs())
            .map(|(row, b)| b - row.iter().zip(lower).map(|(a, l)| a * l).sum::<Rational>())
            .collect();
        let start = simplex_max(&self.matrix, &rhs, &vec![Rational::zero(); dim]);
        if start.status != LpStatus::Optimal {
            return None;
        }
        let basic = start.basis;
        let nonbasic: Vec<usize> = (0..dim).filter(|j| !basic.contains(j)).collect();
        let cost: Vec<Rational> = (0..dim)
            .map(|j| {
                if basic.contains(&j) {
                    Rational::zero()
                } else {
                    Rational::one()
                }
            })
            .collect();
        let reach = simplex_max(&self.matrix, &rhs, &cost).value;

        let origin: Vec<Rational> = start.x.iter().zip(lower).map(|(z, l)| z + l).collect();
        let mut vertices = vec![origin.clone()];
        if reach.is_zero() {
            return Some(vertices);
        }
        // Row-reduce [B | N] so the right block becomes B^-1 N.
        let m = self.matrix.len();
        let mut augmented: Vec<Vec<Rational>> = self
            .matrix
            .iter()
            .map(|row| basic.iter().chain(&nonbasic).map(|&k| row[k].clone()).collect())
            .collect();
        let rank = linalg::row_reduce(&mut augmented, m);
        debug_assert_eq!(rank, m);
        for (col, &j) in nonbasic.iter().enumerate() {
            let mut v = origin.clone();
            v[j] += &reach;
            for (r, &k) in basic.iter().enumerate() {
                let s = &augmented[r][m + col];
                if !s.is_zero() {
                    v[k] -= &reach * s;
                }
            }
            vertices.push(v);
        }
        Some(vertices)
    }

    /// Solves the bounding LP; `None` when the simplex misses the region.
    fn make_node(&mut self, fixed: Vec<usize>, vertices: Vec<Vec<Rational>>, values: Vec<Rational>) -> Option<Node> {
        let lower = self.lower_bounds(&fixed);
        let count = vertices.len();
        let binding: Vec<usize> = (0..self.sys.cols())
            .filter(|&c| vertices.iter().any(|v| v[c] < lower[c]))
            .collect();
        let width = count + binding.len();
        let mut a = Vec::with_capacity(binding.len() + 1);
        let mut b = Vec::with_capacity(binding.len() + 1);
        for (r, &c) in binding.iter().enumerate() {
            let mut row: Vec<Rational> = vertices.iter().map(|v| v[c].clone()).collect();
            row.resize(width, Rational::zero());
            row[count + r] = -Rational::one();
            a.push(row);
            b.push(lower[c].clone());
        }
        let mut convex = vec![Rational::one(); count];
        convex.resize(width, Rational::zero());
        a.push(convex);
        b.push(Rational::one());
        let mut cost = values.clone();
        cost.resize(width, Rational::zero());

        let lp = simplex_max(&a, &b, &cost);
        match lp.status {
            LpStatus::Optimal => {}
            LpStatus::Infeasible => return None,
            LpStatus::Unbounded => unreachable!("lambda is confined to a simplex"),
        }
        let mut lambda = lp.x;
        lambda.truncate(count);
        let mut point = vec![Rational::zero(); self.sys.cols()];
        for (lam, v) in lambda.iter().zip(&vertices) {
            if lam.is_zero() {
                continue;
            }
            for (p, vi) in point.iter_mut().zip(v) {
                *p += lam * vi;
            }
        }
        let id = self.next_id;
        self.next_id += 1;
        Some(Node {
            id,
            fixed,
            vertices,
            values,
            bound: lp.value,
            lambda,
            point,
        })
    }

    fn region_node(&mut self, fixed: Vec<usize>) -> Option<Node> {
        let vertices = self.enclose(&self.lower_bounds(&fixed))?;
        let values = vertices.iter().map(|v| self.obj.evaluate(v)).collect();
        self.make_node(fixed, vertices, values)
    }

    fn children(&mut self, node: &Node, rule: SubdivisionRule) -> Vec<Node> {
        let n = self.sys.n();
        if node.fixed.len() < n {
            let free: Vec<usize> = (0..n).filter(|j| !node.fixed.contains(j)).collect();
            return free
                .iter()
                .filter_map(|&j| {
                    let mut fixed = node.fixed.clone();
                    fixed.push(j);
                    if fixed.len() + 1 == n {
                        fixed.push(*free.iter().find(|&&k| k != j).unwrap());
                    }
                    self.region_node(fixed)
                })
                .collect();
        }

        let (split_point, replaced): (Vec<Rational>, Vec<usize>) = match rule {
            SubdivisionRule::Omega => {
                let support = (0..node.lambda.len())
                    .filter(|&k| node.lambda[k].is_positive())
                    .collect();
                (node.point.clone(), support)
            }
            SubdivisionRule::LongestEdge => {
                let Some((a, b)) = longest_edge(&node.vertices) else {
                    return Vec::new();
                };
                let mid = node.vertices[a]
                    .iter()
                    .zip(&node.vertices[b])
                    .map(|(x, y)| (x + y) / int(2))
                    .collect();
                (mid, vec![a, b])
            }
        };
        let split_value = self.obj.evaluate(&split_point);
        replaced
            .into_iter()
            .filter_map(|k| {
                let mut vertices = node.vertices.clone();
                let mut values = node.values.clone();
                vertices[k] = split_point.clone();
                values[k] = split_value.clone();
                self.make_node(node.fixed.clone(), vertices, values)
            })
            .collect()
    }
}

fn longest_edge(vertices: &[Vec<Rational>]) -> Option<(usize, usize)> {
    let mut best = None;
    let mut best_len = Rational::zero();
    for a in 0..vertices.len() {
        for b in a + 1..vertices.len() {
            let len: Rational = vertices[a]
                .iter()
                .zip(&vertices[b])
                .map(|(x, y)| (x - y) * (x - y))
                .sum();
            if len > best_len {
                best = Some((a, b));
                best_len = len;
            }
        }
    }
    best
}

/// Maximizes `obj` over the perturbed polytope `sys`.
///
/// Refuses unperturbed (degenerate) systems.
pub fn maximize_convex<F: ConvexObjective>(
    obj: &F,
    sys: &ConstraintSystem,
    opts: &SolverOptions,
) -> Result<SolverTrace> {
    if !sys.is_perturbed() {
        return Err(Error::DegeneracyHazard);
    }
    if obj.n() != sys.n() {
        return Err(Error::DimensionMismatch {
            expected: sys.n(),
            found: obj.n(),
        });
    }
    if opts.max_iterations == Some(0) {
        return Err(Error::InvalidArgument("max_iterations must be at least 1".into()));
    }

    let n = sys.n();
    let start = basic_solution(sys, &northwest_corner_basis(sys))?;
    let matrix = (0..sys.rows())
        .map(|r| sys.matrix().row(r).iter().map(|&v| int(v)).collect())
        .collect();
    let mut search = Search {
        obj,
        sys,
        matrix,
        threshold: Rational::one() - int(n as i64) * sys.t(),
        next_id: 0,
        incumbent: Incumbent {
            value: obj.evaluate(start.values()),
            solution: start.clone(),
        },
        visited: HashSet::new(),
    };
    search.offer(start.values());

    let mut heap = BinaryHeap::new();
    let root_fixed = if n == 1 { vec![0] } else { Vec::new() };
    if let Some(root) = search.region_node(root_fixed) {
        search.offer(&root.point);
        heap.push(root);
    }

    let global_bound = |heap: &BinaryHeap<Node>, inc: &Rational| -> Rational {
        match heap.peek() {
            Some(top) if top.bound > *inc => top.bound.clone(),
            _ => inc.clone(),
        }
    };

    let mut iterations = vec![TraceEntry {
        iteration: 0,
        upper_bound: global_bound(&heap, &search.incumbent.value),
        incumbent_value: search.incumbent.value.clone(),
    }];
    let mut iteration = 0;
    let status = loop {
        match heap.peek() {
            Some(top) if top.bound > search.incumbent.value => {}
            _ => break SolverStatus::Optimal,
        }
        if opts.max_iterations.is_some_and(|limit| iteration >= limit) {
            break SolverStatus::IterationLimit;
        }
        iteration += 1;
        let node = heap.pop().unwrap();
        trace!("node {} rows {:?} bound {}", node.id, node.fixed, node.bound);
        for mut child in search.children(&node, opts.subdivision_rule) {
            if child.bound > node.bound {
                child.bound = node.bound.clone();
            }
            if child.bound <= search.incumbent.value {
                continue;
            }
            search.offer(&child.point);
            if child.bound > search.incumbent.value {
                heap.push(child);
            }
        }
        let previous = &iterations.last().unwrap().upper_bound;
        let upper_bound = global_bound(&heap, &search.incumbent.value).min(previous.clone());
        debug!(
            "iteration {iteration}: bound {upper_bound}, incumbent {}, open {}",
            search.incumbent.value,
            heap.len()
        );
        iterations.push(TraceEntry {
            iteration,
            upper_bound,
            incumbent_value: search.incumbent.value.clone(),
        });
    };
    if status == SolverStatus::Optimal {
        let last = iterations.last_mut().unwrap();
        last.upper_bound = search.incumbent.value.clone();
    }

    let final_vertex = search.incumbent.solution;
    Ok(SolverTrace {
        iterations,
        final_basis: final_vertex.basis().sorted(),
        final_vertex,
        status,
    })
}

/// Exhaustive maximization over the vertices of `sys`. Ties go to the
/// lexicographically smallest value vector.
pub fn brute_force_vertex_max<F: ConvexObjective>(obj: &F, sys: &ConstraintSystem) -> (BasicSolution, Rational) {
    let mut best: Option<(BasicSolution, Rational)> = None;
    for v in enumerate_vertices(sys) {
        let value = obj.evaluate(v.values());
        let better = match &best {
            None => true,
            Some((bv, bval)) => value > *bval || (value == *bval && v.values() < bv.values()),
        };
        if better {
            best = Some((v, value));
        }
    }
    best.expect("polytope has a vertex")
}

/// `(ceil(upper bound), ceil(upper bound) - incumbent)`. For an objective
/// that is integral on permutation matrices and a certified perturbation, the
/// integer bound also holds for the unperturbed problem.
pub fn certify_gap(trace: &SolverTrace, incumbent_value: &BigInt) -> (BigInt, BigInt) {
    certify_bound(trace.upper_bound(), incumbent_value)
}

pub(crate) fn certify_bound(upper_bound: &Rational, incumbent_value: &BigInt) -> (BigInt, BigInt) {
    let ub = rational::ceil(upper_bound);
    let gap = &ub - incumbent_value;
    (ub, gap)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::objective::SeparableQuadratic;
    use crate::polytope::{build_birkhoff, build_perturbed};
    use crate::rational::rat;

    #[test]
    fn refuses_degenerate_input() {
        let sys = build_birkhoff(2).unwrap();
        let f = SeparableQuadratic::near_tie_2x2();
        assert_eq!(
            maximize_convex(&f, &sys, &SolverOptions::default()),
            Err(Error::DegeneracyHazard)
        );
    }

    #[test]
    fn rejects_zero_iteration_budget() {
        assert!(SolverOptions::with_max_iterations(0).is_err());
    }

    #[test]
    fn near_tie_with_oversized_perturbation() {
        let sys = build_perturbed(2, &rat(999, 2000)).unwrap();
        let f = SeparableQuadratic::near_tie_2x2();
        let trace = maximize_convex(&f, &sys, &SolverOptions::default()).unwrap();
        assert_eq!(trace.status, SolverStatus::Optimal);
        assert_eq!(
            trace.final_vertex.values(),
            &[rat(999, 2000), rat(1, 1000), rat(1001, 2000), int(0)]
        );
    }

    #[test]
    fn longest_edge_rule_also_converges_on_small_case() {
        let sys = build_perturbed(2, &rat(1, 4)).unwrap();
        let f = SeparableQuadratic::near_tie_2x2();
        let opts = SolverOptions {
            max_iterations: Some(200),
            subdivision_rule: SubdivisionRule::LongestEdge,
        };
        let trace = maximize_convex(&f, &sys, &opts).unwrap();
        let (_, best) = brute_force_vertex_max(&f, &sys);
        assert_eq!(trace.incumbent_value(), &best);
        assert!(trace.upper_bound() >= &best);
    }

    #[test]
    fn constant_objective_picks_smallest_vertex() {
        let sys = build_birkhoff(3).unwrap();
        let (v, value) = brute_force_vertex_max(&SeparableQuadratic::constant(3), &sys);
        assert_eq!(value, int(0));
        let smallest = enumerate_vertices(&sys).map(BasicSolution::into_values).min().unwrap();
        assert_eq!(v.values(), smallest.as_slice());
    }

    #[test]
    fn gap_arithmetic() {
        assert_eq!(
            certify_bound(&int(21), &BigInt::from(21)),
            (BigInt::from(21), BigInt::from(0))
        );
        assert_eq!(
            certify_bound(&rat(43, 2), &BigInt::from(19)),
            (BigInt::from(22), BigInt::from(3))
        );
    }

    #[test]
    fn trace_is_monotone() {
        let sys = build_perturbed(3, &rat(1, 1000)).unwrap();
        let f = SeparableQuadratic::diagonal_preference_3x3();
        let trace = maximize_convex(&f, &sys, &SolverOptions::default()).unwrap();
        for w in trace.iterations.windows(2) {
            assert!(w[1].upper_bound <= w[0].upper_bound);
            assert!(w[1].incumbent_value >= w[0].incumbent_value);
        }
        assert!(trace.iterations.iter().all(|e| e.upper_bound >= e.incumbent_value));
        assert_eq!(trace.upper_bound(), trace.incumbent_value());
    }

    #[test]
    fn iteration_limit_is_reported() {
        let sys = build_perturbed(3, &rat(1, 1000)).unwrap();
        let f = SeparableQuadratic::diagonal_preference_3x3();
        let trace = maximize_convex(&f, &sys, &SolverOptions::with_max_iterations(1).unwrap()).unwrap();
        if trace.status == SolverStatus::IterationLimit {
            assert_eq!(trace.iteration_count(), 1);
            assert!(trace.upper_bound() > trace.incumbent_value());
        }
    }

    #[test]
    fn every_vertex_has_a_dominant_entry_per_row() {
        for (n, t) in [(3, rat(1, 7)), (4, rat(1, 5)), (4, rat(1, 1000))] {
            let sys = build_perturbed(n, &t).unwrap();
            let threshold = int(1) - int(n as i64) * &t;
            for v in enumerate_vertices(&sys) {
                for i in 0..n {
                    let dominant = (0..n).filter(|&j| v.at(n, i, j) >= &threshold).count();
                    assert!(dominant >= 1, "row {i} of {:?}", v.values());
                }
            }
        }
    }

    #[test]
    fn matches_exhaustive_search_on_graph_pair() {
        use crate::objective::{build_objective, AdjacencyMatrix};
        use crate::sensitivity::PerturbationParams;
        let g1 = AdjacencyMatrix::cycle(4);
        let g2 = AdjacencyMatrix::path(4);
        let obj = build_objective(&g1, &g2).unwrap();
        let params = PerturbationParams::for_objective(&obj).unwrap();
        let sys = build_perturbed(4, &params.t).unwrap();
        let trace = maximize_convex(&obj, &sys, &SolverOptions::default()).unwrap();
        let (_, best) = brute_force_vertex_max(&obj, &sys);
        assert_eq!(trace.status, SolverStatus::Optimal);
        assert_eq!(trace.incumbent_value(), &best);
        assert_eq!(trace.upper_bound(), &best);
    }

    #[test]
    fn longest_edge_rule_on_graph_pair() {
        use crate::objective::{build_objective, AdjacencyMatrix};
        use crate::sensitivity::PerturbationParams;
        let g1 = AdjacencyMatrix::complete(3);
        let g2 = AdjacencyMatrix::path(3);
        let obj = build_objective(&g1, &g2).unwrap();
        let params = PerturbationParams::for_objective(&obj).unwrap();
        let sys = build_perturbed(3, &params.t).unwrap();
        let opts = SolverOptions {
            max_iterations: None,
            subdivision_rule: SubdivisionRule::LongestEdge,
        };
        let trace = maximize_convex(&obj, &sys, &opts).unwrap();
        let (_, best) = brute_force_vertex_max(&obj, &sys);
        assert_eq!(trace.status, SolverStatus::Optimal);
        assert_eq!(trace.incumbent_value(), &best);
    }
}
