//! Dense two-phase primal simplex over exact rationals with Bland's rule,
//! run on a fraction-free integer tableau.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::polytope::{basic_solution, BasicSolution, Basis, ConstraintSystem};
use crate::rational::{int, Rational};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

/// Outcome of a standard-form program `max c^T x, Ax = b, x >= 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct StandardSolution {
    pub status: LpStatus,
    pub value: Rational,
    pub x: Vec<Rational>,
    /// Basic columns, one per non-redundant row.
    pub basis: Vec<usize>,
}

/// Integer-preserving tableau: the true entries are `rows / det` and the
/// objective row holds `det` times the reduced costs. Pivots divide exactly
/// by the previous pivot, which keeps every entry an integer without gcds.
struct Tableau {
    rows: Vec<Vec<BigInt>>,
    objective: Vec<BigInt>,
    det: BigInt,
    basis: Vec<usize>,
    /// Columns allowed to enter; artificials are excluded in phase two.
    active: usize,
}

impl Tableau {
    fn rhs(&self, r: usize) -> &BigInt {
        self.rows[r].last().unwrap()
    }

    fn pivot(&mut self, r: usize, c: usize) {
        let p = self.rows[r][c].clone();
        let pivot_row = std::mem::take(&mut self.rows[r]);
        let det = self.det.clone();
        let update = |row: &mut Vec<BigInt>| {
            let f = row[c].clone();
            for (v, q) in row.iter_mut().zip(&pivot_row) {
                let mut next = &*v * &p;
                if !f.is_zero() && !q.is_zero() {
                    next -= &f * q;
                }
                *v = if det.is_one() { next } else { next / &det };
            }
        };
        for (i, row) in self.rows.iter_mut().enumerate() {
            if i != r {
                update(row);
            }
        }
        update(&mut self.objective);
        self.rows[r] = pivot_row;
        self.det = p;
        if self.det.is_negative() {
            for v in self.rows.iter_mut().flatten().chain(self.objective.iter_mut()) {
                *v = -&*v;
            }
            self.det = -&self.det;
        }
        self.basis[r] = c;
    }

    /// Resets the objective row to `det` times the reduced costs of `cost`.
    fn price(&mut self, cost: &[BigInt]) {
        let width = self.rows.first().map_or(cost.len() + 1, Vec::len);
        let mut objective: Vec<BigInt> = (0..width)
            .map(|j| {
                if j < cost.len() {
                    &cost[j] * &self.det
                } else {
                    BigInt::zero()
                }
            })
            .collect();
        for (row, &bv) in self.rows.iter().zip(&self.basis) {
            let cb = &cost[bv];
            if cb.is_zero() {
                continue;
            }
            for (o, v) in objective.iter_mut().zip(row) {
                if !v.is_zero() {
                    *o -= cb * v;
                }
            }
        }
        self.objective = objective;
    }

    /// Bland's rule iterations; `false` when unbounded.
    fn optimize(&mut self) -> bool {
        loop {
            let entering = (0..self.active).find(|&j| self.objective[j].is_positive() && !self.basis.contains(&j));
            let Some(e) = entering else {
                return true;
            };
            let mut leave: Option<usize> = None;
            for r in 0..self.rows.len() {
                if !self.rows[r][e].is_positive() {
                    continue;
                }
                let better = match leave {
                    None => true,
                    Some(lr) => {
                        let lhs = self.rhs(r) * &self.rows[lr][e];
                        let rhs = self.rhs(lr) * &self.rows[r][e];
                        lhs < rhs || (lhs == rhs && self.basis[r] < self.basis[lr])
                    }
                };
                if better {
                    leave = Some(r);
                }
            }
            match leave {
                Some(r) => self.pivot(r, e),
                None => return false,
            }
        }
    }
}

fn lcm_of_denominators<'a>(values: impl Iterator<Item = &'a Rational>) -> BigInt {
    values.fold(BigInt::one(), |acc, v| acc.lcm(v.denom()))
}

fn scaled(v: &Rational, scale: &BigInt) -> BigInt {
    v.numer() * (scale / v.denom())
}

/// Maximizes `c^T x` subject to `a x = b`, `x >= 0`. Redundant equality rows
/// are detected and dropped after phase one.
pub fn simplex_max(a: &[Vec<Rational>], b: &[Rational], c: &[Rational]) -> StandardSolution {
    let m = a.len();
    let n = c.len();
    assert_eq!(b.len(), m);
    let mut rows = Vec::with_capacity(m);
    for (r, (row, rhs)) in a.iter().zip(b).enumerate() {
        assert_eq!(row.len(), n);
        let mut scale = lcm_of_denominators(row.iter().chain(std::iter::once(rhs)));
        if rhs.is_negative() {
            scale = -scale;
        }
        let mut t: Vec<BigInt> = row.iter().map(|v| scaled(v, &scale)).collect();
        t.extend((0..m).map(|k| if k == r { BigInt::one() } else { BigInt::zero() }));
        t.push(scaled(rhs, &scale));
        rows.push(t);
    }
    let mut tab = Tableau {
        rows,
        objective: Vec::new(),
        det: BigInt::one(),
        basis: (n..n + m).collect(),
        active: n + m,
    };

    let phase_one: Vec<BigInt> = (0..n + m)
        .map(|j| if j < n { BigInt::zero() } else { -BigInt::one() })
        .collect();
    tab.price(&phase_one);
    tab.optimize();
    let infeasible = (0..m).any(|r| tab.basis[r] >= n && !tab.rhs(r).is_zero());
    if infeasible {
        return StandardSolution {
            status: LpStatus::Infeasible,
            value: Rational::zero(),
            x: vec![Rational::zero(); n],
            basis: Vec::new(),
        };
    }

    // Pivot zero-level artificials out, dropping rows with no structural entry.
    let mut r = 0;
    while r < tab.rows.len() {
        if tab.basis[r] >= n {
            match (0..n).find(|&j| !tab.rows[r][j].is_zero() && !tab.basis.contains(&j)) {
                Some(j) => tab.pivot(r, j),
                None => {
                    tab.rows.remove(r);
                    tab.basis.remove(r);
                    continue;
                }
            }
        }
        r += 1;
    }
    tab.active = n;

    let scale = lcm_of_denominators(c.iter());
    let mut cost: Vec<BigInt> = c.iter().map(|v| scaled(v, &scale)).collect();
    cost.extend((0..m).map(|_| BigInt::zero()));
    tab.price(&cost);
    let bounded = tab.optimize();

    let mut x = vec![Rational::zero(); n];
    for (r, &bv) in tab.basis.iter().enumerate() {
        x[bv] = Rational::new(tab.rhs(r).clone(), tab.det.clone());
    }
    let value = c
        .iter()
        .zip(&x)
        .filter(|(_, xi)| !xi.is_zero())
        .map(|(ci, xi)| ci * xi)
        .sum();
    StandardSolution {
        status: if bounded {
            LpStatus::Optimal
        } else {
            LpStatus::Unbounded
        },
        value,
        x,
        basis: tab.basis,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpResult {
    pub status: LpStatus,
    pub optimal_value: Option<Rational>,
    pub solution: Option<BasicSolution>,
}

impl LpResult {
    pub fn basis(&self) -> Option<&Basis> {
        self.solution.as_ref().map(BasicSolution::basis)
    }
}

/// Maximizes the linear objective `c` over `sys`.
pub fn solve_lp(sys: &ConstraintSystem, c: &[Rational]) -> LpResult {
    assert_eq!(c.len(), sys.cols(), "cost vector length");
    let a: Vec<Vec<Rational>> = (0..sys.rows())
        .map(|r| sys.matrix().row(r).iter().map(|&v| int(v)).collect())
        .collect();
    let res = simplex_max(&a, sys.rhs(), c);
    if res.status != LpStatus::Optimal {
        return LpResult {
            status: res.status,
            optimal_value: None,
            solution: None,
        };
    }
    let mut cols = res.basis;
    cols.sort_unstable();
    let basis = Basis::new(cols, sys).expect("simplex basis of a full-rank system");
    let solution = basic_solution(sys, &basis).expect("simplex basis is nonsingular");
    debug_assert_eq!(solution.values(), res.x.as_slice());
    LpResult {
        status: LpStatus::Optimal,
        optimal_value: Some(res.value),
        solution: Some(solution),
    }
}

/// Reduced costs `c_j - c_B^T B^{-1} A_j` for the basis of `sol`.
pub fn reduced_costs(sys: &ConstraintSystem, c: &[Rational], sol: &BasicSolution) -> Vec<Rational> {
    let cols = sol.basis().columns();
    let m = sys.rows();
    // Solve B^T y = c_B.
    let bt: Vec<Vec<Rational>> = (0..m)
        .map(|i| (0..m).map(|r| int(sys.matrix().get(r, cols[i]))).collect())
        .collect();
    let cb: Vec<Rational> = cols.iter().map(|&k| c[k].clone()).collect();
    let y = crate::linalg::solve(&bt, &cb).expect("nonsingular basis");
    (0..sys.cols())
        .map(|j| {
            let ay: Rational = (0..m).map(|r| int(sys.matrix().get(r, j)) * &y[r]).sum();
            &c[j] - ay
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polytope::{build_birkhoff, build_perturbed};
    use crate::rational::rat;

    #[test]
    fn identity_indicator_on_two_by_two() {
        let sys = build_birkhoff(2).unwrap();
        let c = vec![int(1), int(0), int(0), int(1)];
        let res = solve_lp(&sys, &c);
        assert_eq!(res.status, LpStatus::Optimal);
        assert_eq!(res.optimal_value, Some(int(2)));
        assert_eq!(res.solution.unwrap().values(), &[int(1), int(0), int(0), int(1)]);
    }

    #[test]
    fn perturbed_two_by_two() {
        let sys = build_perturbed(2, &rat(1, 4)).unwrap();
        let c = vec![int(1), int(0), int(0), int(1)];
        let res = solve_lp(&sys, &c);
        assert_eq!(res.optimal_value, Some(rat(5, 4)));
        let sol = res.solution.unwrap();
        assert_eq!(sol.values(), &[rat(3, 4), int(0), rat(1, 4), rat(1, 2)]);
        assert!(reduced_costs(&sys, &c, &sol).iter().all(|d| !d.is_positive()));
    }

    #[test]
    fn zero_cost_returns_a_vertex() {
        let sys = build_birkhoff(3).unwrap();
        let res = solve_lp(&sys, &vec![int(0); 9]);
        assert_eq!(res.optimal_value, Some(int(0)));
        assert!(res.solution.unwrap().is_feasible());
    }

    #[test]
    fn detects_infeasible_and_unbounded() {
        // x1 + x2 = -1
        let res = simplex_max(&[vec![int(1), int(1)]], &[int(-1)], &[int(0), int(0)]);
        assert_eq!(res.status, LpStatus::Infeasible);
        // x1 - x2 = 0, maximize x1
        let res = simplex_max(&[vec![int(1), int(-1)]], &[int(0)], &[int(1), int(0)]);
        assert_eq!(res.status, LpStatus::Unbounded);
    }

    #[test]
    fn drops_redundant_rows() {
        let a = vec![
            vec![int(1), int(1), int(0)],
            vec![int(2), int(2), int(0)],
            vec![int(0), int(0), int(1)],
        ];
        let res = simplex_max(&a, &[int(1), int(2), int(3)], &[int(2), int(1), int(0)]);
        assert_eq!(res.status, LpStatus::Optimal);
        assert_eq!(res.value, int(2));
        assert_eq!(res.basis.len(), 2);
    }

    #[test]
    fn negative_rhs_rows_are_flipped() {
        // -x1 - x2 = -2, maximize x2 - x1
        let res = simplex_max(&[vec![int(-1), int(-1)]], &[int(-2)], &[int(-1), int(1)]);
        assert_eq!(res.status, LpStatus::Optimal);
        assert_eq!(res.x, vec![int(0), int(2)]);
    }
}
