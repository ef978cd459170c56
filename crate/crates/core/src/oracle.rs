//! Exhaustive graph matching over all `n!` relabelings.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::objective::{common_edges, AdjacencyMatrix};
use crate::polytope::Permutation;

/// Largest `n` the exhaustive search accepts (10! ≈ 3.6M permutations).
pub const ORACLE_LIMIT: usize = 10;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OracleResult {
    /// Lexicographically first optimal relabeling.
    pub best_sigma: Permutation,
    pub min_symdiff: usize,
    pub max_qform: usize,
    pub optimal_count: u64,
}

/// Scans permutations in lexicographic order, scoring each by its common
/// edge count, and checks `symdiff = |E1| + |E2| - qform` along the way.
pub fn oracle_gm(e1: &AdjacencyMatrix, e2: &AdjacencyMatrix) -> Result<OracleResult> {
    let n = e1.n();
    if e2.n() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: e2.n(),
        });
    }
    if n > ORACLE_LIMIT {
        return Err(Error::SizeLimit { n, limit: ORACLE_LIMIT });
    }
    let total = e1.edge_count() + e2.edge_count();
    let e1_edges = e1.edges();
    let mut sigma = Permutation::identity(n);
    let mut best: Option<(Permutation, usize)> = None;
    let mut count = 0u64;
    loop {
        let common = e1_edges
            .iter()
            .filter(|&&(i, j)| e2.has_edge(sigma.apply(i), sigma.apply(j)))
            .count();
        let qform = 2 * common;
        let symdiff = direct_symdiff(e1, e2, &sigma);
        if symdiff + qform != total {
            return Err(Error::Internal(format!(
                "symdiff {symdiff} + qform {qform} != {total} at {sigma}"
            )));
        }
        match &best {
            Some((_, q)) if qform < *q => {}
            Some((_, q)) if qform == *q => count += 1,
            _ => {
                best = Some((sigma.clone(), qform));
                count = 1;
            }
        }
        if !sigma.advance() {
            break;
        }
    }
    let (best_sigma, max_qform) = best.expect("at least one permutation");
    debug_assert_eq!(common_edges(e1, e2, &best_sigma) * 2, max_qform);
    Ok(OracleResult {
        best_sigma,
        min_symdiff: total - max_qform,
        max_qform,
        optimal_count: count,
    })
}

/// Counts disagreeing vertex pairs without going through the edge overlap.
fn direct_symdiff(e1: &AdjacencyMatrix, e2: &AdjacencyMatrix, sigma: &Permutation) -> usize {
    let n = e1.n();
    let mut d = 0;
    for i in 0..n {
        for j in i + 1..n {
            if e1.has_edge(i, j) != e2.has_edge(sigma.apply(i), sigma.apply(j)) {
                d += 1;
            }
        }
    }
    d
}
