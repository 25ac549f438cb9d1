//! Boolean factorisation `Ē = D̄ S̄` over ({0,1}, OR, AND).
//!
//! Solutions are closed under entrywise OR, so there is a largest candidate:
//! `D̄max(i,k) = 1` unless some `j` with `S̄(k,j) = 1` has `Ē(i,j) = 0`. Every
//! solution lies below it, and it covers the 1-entries of `Ē` iff anything does.

use serde::Serialize;

use super::matrix::BoolMatrix;
use super::{Feasibility, RatBoolError};

/// Whether columns of `D̄` must be nonempty.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ColumnRule {
    /// Every column of `D̄` is a possibilistic distribution and needs a 1.
    NonEmpty,
    /// Columns may be empty (a single global support vector).
    Unconstrained,
}

/// Why no Boolean factor exists.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BooleanObstruction {
    /// Forced zeros wiped out column `column` of `D̄`, which some empirical
    /// column references; `forced_by[i]` is an empirical column `j` whose zero
    /// at row `i` forbids that entry.
    EmptiedColumn { column: usize, forced_by: Vec<usize> },
    /// `Ē(row, column) = 1` but no admissible entry of `D̄` produces it.
    UncoveredCell { row: usize, column: usize },
}

pub fn solve_boolean_factor(
    ebar: &BoolMatrix,
    sbar: &BoolMatrix,
) -> Result<Feasibility<BoolMatrix, BooleanObstruction>, RatBoolError> {
    solve_boolean_factor_with(ebar, sbar, ColumnRule::NonEmpty)
}

pub fn solve_boolean_factor_with(
    ebar: &BoolMatrix,
    sbar: &BoolMatrix,
    rule: ColumnRule,
) -> Result<Feasibility<BoolMatrix, BooleanObstruction>, RatBoolError> {
    if ebar.cols() != sbar.cols() {
        return Err(RatBoolError::Dimension(format!("Ē has {} columns but S̄ has {}", ebar.cols(), sbar.cols())));
    }
    let dmax = maximal_candidate(ebar, sbar);

    if rule == ColumnRule::NonEmpty {
        for k in 0..sbar.rows() {
            let referenced = sbar.row(k).iter().any(|&b| b);
            if referenced && dmax.column_is_empty(k) {
                let forced_by = (0..ebar.rows())
                    .map(|i| {
                        (0..ebar.cols())
                            .find(|&j| sbar.get(k, j) && !ebar.get(i, j))
                            .expect("an emptied entry has a forcing column")
                    })
                    .collect();
                return Ok(Feasibility::Infeasible(BooleanObstruction::EmptiedColumn { column: k, forced_by }));
            }
        }
    }

    let product = dmax.mul(sbar)?;
    for j in 0..ebar.cols() {
        for i in 0..ebar.rows() {
            if ebar.get(i, j) && !product.get(i, j) {
                return Ok(Feasibility::Infeasible(BooleanObstruction::UncoveredCell { row: i, column: j }));
            }
        }
    }
    Ok(Feasibility::Feasible(dmax))
}

/// `D̄max`: the entrywise-largest `D̄` with `D̄ S̄ ≤ Ē`.
pub fn maximal_candidate(ebar: &BoolMatrix, sbar: &BoolMatrix) -> BoolMatrix {
    let mut d = BoolMatrix::ones(ebar.rows(), sbar.rows());
    for k in 0..sbar.rows() {
        for j in (0..sbar.cols()).filter(|&j| sbar.get(k, j)) {
            for i in 0..ebar.rows() {
                if !ebar.get(i, j) {
                    d.set(i, k, false);
                }
            }
        }
    }
    d
}
