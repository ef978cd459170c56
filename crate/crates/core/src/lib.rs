//! Graph matching by convex maximization over a perturbed Birkhoff polytope,
//! in exact rational arithmetic.
//!
//! The pipeline convexifies the matching score, derives a perturbation `t`
//! small enough that the perturbed problem's optimal basis is optimal for the
//! original one, solves the perturbed (non-degenerate) problem by simplicial
//! branch-and-bound, and reads the permutation back from that basis. Upper
//! bounds from truncated runs round up to valid integer bounds.

pub mod cli;
pub mod error;
pub mod linalg;
pub mod lp;
pub mod objective;
pub mod oracle;
pub mod polytope;
pub mod rational;
pub mod sensitivity;
pub mod solver;

pub use error::{Error, Result};
pub use lp::{solve_lp, LpResult, LpStatus};
pub use objective::{
    build_objective, delta_for_quadratic, eval_f, eval_qform, spectral_bound, symmetric_difference, AdjacencyMatrix,
    ConvexObjective, QuadraticObjective, SeparableQuadratic,
};
pub use oracle::{oracle_gm, OracleResult};
pub use polytope::{
    basic_solution, bfs_to_permutation, build_birkhoff, build_perturbed, check_tu_minors, enumerate_vertices,
    BasicSolution, Basis, ConstraintSystem, Permutation,
};
pub use rational::Rational;
pub use sensitivity::{
    classify_infeasibility, lift_vertex, perturb_and_resolve, restrict_basis, round_upper_bound, t_bound,
    Classification, PerturbationParams, SensitivityTrial,
};
pub use solver::{
    brute_force_vertex_max, certify_gap, maximize_convex, SolverOptions, SolverStatus, SolverTrace, SubdivisionRule,
};
