//! Right-hand-side sensitivity of basic solutions over totally unimodular
//! systems, the a-priori perturbation bound, and integer rounding of upper
//! bounds.

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::linalg::IntMatrix;
use crate::objective::{delta_for_quadratic, QuadraticObjective};
use crate::polytope::{self, basic_solution, BasicSolution, Basis, ConstraintSystem, Permutation};
use crate::rational::{self, int, Rational};

/// Certified perturbation parameters for a graph matching objective.
#[derive(Debug, Clone, PartialEq)]
pub struct PerturbationParams {
    pub n: usize,
    pub mu: u64,
    pub lambda_bound: u64,
    pub delta_hat: Rational,
    pub t: Rational,
}

impl PerturbationParams {
    pub fn for_objective(obj: &QuadraticObjective) -> Result<Self> {
        let delta_hat = delta_for_quadratic(obj);
        let t = t_bound(&delta_hat, obj.n())?;
        Ok(Self {
            n: obj.n(),
            mu: obj.mu(),
            lambda_bound: obj.lambda_bound(),
            delta_hat,
            t,
        })
    }

    /// Supremum `delta / (n (2n - 1))` of admissible perturbations.
    pub fn t_supremum(&self) -> Rational {
        t_supremum(&self.delta_hat, self.n)
    }
}

fn t_supremum(delta: &Rational, n: usize) -> Rational {
    let n = n as i64;
    delta / int(n * (2 * n - 1))
}

/// Half of the admissible supremum: `delta / (2 n (2n - 1))`.
pub fn t_bound(delta_hat: &Rational, n: usize) -> Result<Rational> {
    if !delta_hat.is_positive() || *delta_hat >= Rational::one() {
        return Err(Error::InvalidDelta(delta_hat.clone()));
    }
    if n < 2 {
        return Err(Error::InvalidDimension(n));
    }
    Ok(t_supremum(delta_hat, n) / int(2))
}

/// Moves a permutation vertex into the perturbed polytope: the row holding
/// the unit of the last column keeps `1 - nt` there and `t` elsewhere; every
/// other row scales its unit down to `1 - t`.
pub fn lift_vertex(xhat: &BasicSolution, t: &Rational) -> Result<Vec<Rational>> {
    let sigma = polytope::bfs_to_permutation(xhat)?;
    let n = sigma.len();
    polytope::check_perturbation(n, t)?;
    Ok(lift_permutation(&sigma, t))
}

pub(crate) fn lift_permutation(sigma: &Permutation, t: &Rational) -> Vec<Rational> {
    let n = sigma.len();
    let pivot_row = sigma.inverse().apply(n - 1);
    let mut x = vec![Rational::zero(); n * n];
    for i in 0..n {
        if i == pivot_row {
            for j in 0..n {
                x[i * n + j] = if j == n - 1 {
                    Rational::one() - int(n as i64) * t
                } else {
                    t.clone()
                };
            }
        } else {
            x[i * n + sigma.apply(i)] = Rational::one() - t;
        }
    }
    x
}

/// Re-solves `basis` against the unperturbed right-hand side. Feasibility is
/// reported, not enforced.
pub fn restrict_basis(basis: &Basis, surrogate: &ConstraintSystem) -> Result<BasicSolution> {
    basic_solution(&surrogate.unperturbed(), basis)
}

/// Integer right-hand side `b`, a perturbation `gamma` with
/// `|gamma_i| < Gamma / m`, and a basis of the constraint matrix.
#[derive(Debug, Clone)]
pub struct SensitivityTrial {
    matrix: IntMatrix,
    b: Vec<BigInt>,
    gamma: Vec<Rational>,
    gamma_bound: Rational,
    basis: Basis,
}

impl SensitivityTrial {
    pub fn new(
        sys: &ConstraintSystem,
        b: Vec<BigInt>,
        gamma: Vec<Rational>,
        gamma_bound: Rational,
        basis: Basis,
    ) -> Result<Self> {
        let m = sys.rows();
        if b.len() != m {
            return Err(Error::DimensionMismatch {
                expected: m,
                found: b.len(),
            });
        }
        if gamma.len() != m {
            return Err(Error::DimensionMismatch {
                expected: m,
                found: gamma.len(),
            });
        }
        if !gamma_bound.is_positive() {
            return Err(Error::InvalidArgument(format!(
                "Gamma = {gamma_bound} must be positive"
            )));
        }
        Ok(Self {
            matrix: sys.matrix().clone(),
            b,
            gamma,
            gamma_bound,
            basis,
        })
    }

    pub fn m(&self) -> usize {
        self.matrix.rows()
    }

    pub fn gamma_bound(&self) -> &Rational {
        &self.gamma_bound
    }

    pub fn perturbed_rhs(&self) -> Vec<Rational> {
        self.b
            .iter()
            .zip(&self.gamma)
            .map(|(b, g)| Rational::from_integer(b.clone()) - g)
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Deviation {
    pub xhat: Vec<Rational>,
    pub xprime: Vec<Rational>,
    /// `|xhat_j - xprime_j|` for every column.
    pub components: Vec<Rational>,
}

impl Deviation {
    pub fn squared_norm(&self) -> Rational {
        self.components.iter().map(|d| d * d).sum()
    }

    pub fn max(&self) -> Rational {
        self.components.iter().cloned().max().unwrap_or_else(Rational::zero)
    }
}

/// Solves the basis against `b` and `b - gamma` and returns the componentwise
/// deviation, which stays below `Gamma`.
pub fn perturb_and_resolve(trial: &SensitivityTrial) -> Result<Deviation> {
    let limit = &trial.gamma_bound / int(trial.m() as i64);
    if let Some((index, g)) = trial.gamma.iter().enumerate().find(|(_, g)| g.abs() >= limit) {
        return Err(Error::HypothesisViolation {
            index,
            value: Box::new(g.abs()),
            limit: Box::new(limit),
        });
    }
    let b: Vec<Rational> = trial.b.iter().cloned().map(Rational::from_integer).collect();
    let cols = trial.basis.columns();
    let xhat = polytope::solve_basis(&trial.matrix, cols, &b)?;
    let xprime = polytope::solve_basis(&trial.matrix, cols, &trial.perturbed_rhs())?;
    let components = xhat.iter().zip(&xprime).map(|(a, b)| (a - b).abs()).collect();
    Ok(Deviation {
        xhat,
        xprime,
        components,
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Classification {
    Feasible,
    /// Column `witness` carries a value of at most `-1`.
    Infeasible {
        witness: usize,
        value: BigInt,
    },
}

/// For an integer right-hand side every basic solution is integral, so an
/// infeasible one must dip to `-1` or below somewhere.
pub fn classify_infeasibility(sol: &BasicSolution) -> Result<Classification> {
    if let Some((j, v)) = sol.values().iter().enumerate().find(|(_, v)| !v.is_integer()) {
        return Err(Error::Internal(format!(
            "component {j} = {v} is fractional for an integer right-hand side"
        )));
    }
    if sol.is_feasible() {
        return Ok(Classification::Feasible);
    }
    let (witness, value) = sol
        .values()
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.cmp(b.1))
        .map(|(j, v)| (j, v.to_integer()))
        .expect("nonempty solution");
    if value > BigInt::from(-1) {
        return Err(Error::Internal(format!(
            "infeasible basic solution with minimum {value} > -1"
        )));
    }
    Ok(Classification::Infeasible { witness, value })
}

/// `ceil(ub)`: any integer at or above the surrogate's bound.
pub fn round_upper_bound(ub: &Rational) -> BigInt {
    rational::ceil(ub)
}
