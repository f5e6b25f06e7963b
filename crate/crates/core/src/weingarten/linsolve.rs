//! Exact Gaussian elimination over the rationals for overdetermined systems.

use num_rational::BigRational;
use num_traits::{Signed, Zero};

/// Outcome of an exact solve that did not produce a unique solution.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SolveFailure {
    /// Rank is below the number of unknowns.
    Underdetermined { rank: usize, unknowns: usize },
    /// Some equation reduces to `0 = c` with `c ≠ 0`.
    Inconsistent { equation: usize },
}

/// Solves `A x = b` exactly, where `A` has at least as many rows as columns.
///
/// All rows are kept. The system must have full column rank and every
/// redundant row must reduce to `0 = 0`.
pub fn solve_exact(
    mut a: Vec<Vec<BigRational>>,
    mut b: Vec<BigRational>,
    unknowns: usize,
) -> Result<Vec<BigRational>, SolveFailure> {
    let rows = a.len();
    let mut pivot_row = 0;
    let mut pivots = Vec::with_capacity(unknowns);
    for col in 0..unknowns {
        // any nonzero pivot is exact; prefer the largest for tidier fractions
        let Some(best) = (pivot_row..rows)
            .filter(|&r| !a[r][col].is_zero())
            .max_by(|&x, &y| a[x][col].abs().cmp(&a[y][col].abs()))
        else {
            continue;
        };
        a.swap(pivot_row, best);
        b.swap(pivot_row, best);
        let inv = a[pivot_row][col].recip();
        for x in &mut a[pivot_row][col..unknowns] {
            *x = &*x * &inv;
        }
        b[pivot_row] = &b[pivot_row] * &inv;
        for r in 0..rows {
            if r == pivot_row || a[r][col].is_zero() {
                continue;
            }
            let factor = a[r][col].clone();
            let pivot_vals = a[pivot_row][col..unknowns].to_vec();
            for (x, pv) in a[r][col..unknowns].iter_mut().zip(&pivot_vals) {
                *x -= &factor * pv;
            }
            let delta = &factor * &b[pivot_row];
            b[r] -= delta;
        }
        pivots.push(col);
        pivot_row += 1;
        if pivot_row == rows {
            break;
        }
    }
    for (r, rhs) in b.iter().enumerate().skip(pivot_row) {
        if !rhs.is_zero() {
            return Err(SolveFailure::Inconsistent { equation: r });
        }
    }
    if pivots.len() < unknowns {
        return Err(SolveFailure::Underdetermined {
            rank: pivots.len(),
            unknowns,
        });
    }
    Ok(b.into_iter().take(unknowns).collect())
}
