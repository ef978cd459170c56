//! Small dense exact linear algebra: integer matrices with fraction-free
//! determinants and rational Gauss-Jordan solves.

use num_traits::{One, Zero};

use crate::rational::Rational;

/// Row-major integer matrix.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IntMatrix {
    rows: usize,
    cols: usize,
    data: Vec<i64>,
}

impl IntMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0; rows * cols],
        }
    }

    pub fn from_rows(rows: &[Vec<i64>]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        assert!(rows.iter().all(|row| row.len() == c), "ragged matrix");
        Self {
            rows: r,
            cols: c,
            data: rows.concat(),
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> i64 {
        self.data[r * self.cols + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: i64) {
        self.data[r * self.cols + c] = v;
    }

    pub fn column(&self, c: usize) -> Vec<i64> {
        (0..self.rows).map(|r| self.get(r, c)).collect()
    }

    pub fn row(&self, r: usize) -> &[i64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    /// Determinant of the square submatrix picked out by `rows` x `cols`.
    pub fn minor(&self, rows: &[usize], cols: &[usize]) -> i128 {
        assert_eq!(rows.len(), cols.len(), "minor must be square");
        let k = rows.len();
        let mut m: Vec<Vec<i128>> = rows
            .iter()
            .map(|&r| cols.iter().map(|&c| i128::from(self.get(r, c))).collect())
            .collect();
        bareiss_det(&mut m, k)
    }

    /// Rank over the rationals.
    pub fn rank(&self) -> usize {
        let mut m: Vec<Vec<Rational>> = (0..self.rows)
            .map(|r| self.row(r).iter().map(|&v| Rational::from_integer(v.into())).collect())
            .collect();
        row_reduce(&mut m, self.cols)
    }
}

/// Fraction-free Gaussian elimination; every intermediate is itself a minor,
/// so entries stay bounded by Hadamard's bound of the input.
fn bareiss_det(m: &mut [Vec<i128>], k: usize) -> i128 {
    if k == 0 {
        return 1;
    }
    let mut sign = 1i128;
    let mut prev = 1i128;
    for p in 0..k {
        if m[p][p] == 0 {
            match (p + 1..k).find(|&r| m[r][p] != 0) {
                Some(r) => {
                    m.swap(p, r);
                    sign = -sign;
                }
                None => return 0,
            }
        }
        for i in p + 1..k {
            for j in p + 1..k {
                m[i][j] = (m[i][j] * m[p][p] - m[i][p] * m[p][j]) / prev;
            }
        }
        prev = m[p][p];
    }
    sign * m[k - 1][k - 1]
}

/// Reduces `m` in place to reduced row echelon form over its first `cols`
/// columns and returns the rank.
pub fn row_reduce(m: &mut [Vec<Rational>], cols: usize) -> usize {
    let mut rank = 0;
    for c in 0..cols {
        if rank == m.len() {
            break;
        }
        let Some(p) = (rank..m.len()).find(|&r| !m[r][c].is_zero()) else {
            continue;
        };
        m.swap(rank, p);
        let inv = m[rank][c].recip();
        if !inv.is_one() {
            for v in m[rank].iter_mut() {
                *v *= &inv;
            }
        }
        let pivot_row = m[rank].clone();
        for (r, row) in m.iter_mut().enumerate() {
            if r == rank || row[c].is_zero() {
                continue;
            }
            let factor = row[c].clone();
            for (v, pv) in row.iter_mut().zip(&pivot_row) {
                if !pv.is_zero() {
                    *v -= &factor * pv;
                }
            }
        }
        rank += 1;
    }
    rank
}

/// Solves the square system `a * x = b`; `None` when `a` is singular.
pub fn solve(a: &[Vec<Rational>], b: &[Rational]) -> Option<Vec<Rational>> {
    let k = a.len();
    assert_eq!(b.len(), k);
    let mut aug: Vec<Vec<Rational>> = a
        .iter()
        .zip(b)
        .map(|(row, rhs)| {
            assert_eq!(row.len(), k, "solve needs a square matrix");
            let mut r = row.clone();
            r.push(rhs.clone());
            r
        })
        .collect();
    if row_reduce(&mut aug, k) < k {
        return None;
    }
    Some(aug.into_iter().map(|mut r| r.pop().unwrap()).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, rat};

    #[test]
    fn bareiss_matches_cofactor_expansion() {
        let m = IntMatrix::from_rows(&[vec![2, -1, 0], vec![1, 3, 4], vec![0, 5, -2]]);
        // 2*(3*-2 - 4*5) - (-1)*(1*-2 - 0) + 0 = -52 - 2
        assert_eq!(m.minor(&[0, 1, 2], &[0, 1, 2]), -54);
        assert_eq!(m.minor(&[1, 2], &[0, 2]), -2);
        let singular = IntMatrix::from_rows(&[vec![1, 2], vec![2, 4]]);
        assert_eq!(singular.minor(&[0, 1], &[0, 1]), 0);
    }

    #[test]
    fn zero_leading_pivot_swaps_rows() {
        let m = IntMatrix::from_rows(&[vec![0, 1], vec![1, 0]]);
        assert_eq!(m.minor(&[0, 1], &[0, 1]), -1);
    }

    #[test]
    fn solves_rational_system() {
        let a = vec![vec![int(1), int(1)], vec![int(1), int(-1)]];
        let x = solve(&a, &[int(1), rat(1, 2)]).unwrap();
        assert_eq!(x, vec![rat(3, 4), rat(1, 4)]);
        let singular = vec![vec![int(1), int(1)], vec![int(2), int(2)]];
        assert!(solve(&singular, &[int(1), int(1)]).is_none());
    }

    #[test]
    fn rank_of_dependent_rows() {
        let m = IntMatrix::from_rows(&[vec![1, 1, 0], vec![0, 0, 1], vec![1, 1, 1]]);
        assert_eq!(m.rank(), 2);
    }
}
