//! Exact numeric kernel: rationals, rational and Boolean matrices, and the
//! two feasibility solvers every contextuality check reduces to.

pub mod boolean;
pub mod matrix;
pub mod rational;
pub mod simplex;

use thiserror::Error;

pub use boolean::{maximal_candidate, solve_boolean_factor, solve_boolean_factor_with, BooleanObstruction, ColumnRule};
pub use matrix::{BoolMatrix, RatMatrix};
pub use rational::{format_rational, parse_rational, ParseRationalError, Rational};
pub use simplex::{solve_linear_feasibility, FarkasCertificate, LinearReport};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RatBoolError {
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("solver invariant broken: {0}")]
    Internal(String),
}

/// Outcome of a feasibility question: a witness, or an obstruction explaining
/// why none exists.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Feasibility<W, O> {
    Feasible(W),
    Infeasible(O),
}

impl<W, O> Feasibility<W, O> {
    pub fn is_feasible(&self) -> bool {
        matches!(self, Feasibility::Feasible(_))
    }

    pub fn witness(&self) -> Option<&W> {
        match self {
            Feasibility::Feasible(w) => Some(w),
            Feasibility::Infeasible(_) => None,
        }
    }

    pub fn obstruction(&self) -> Option<&O> {
        match self {
            Feasibility::Feasible(_) => None,
            Feasibility::Infeasible(o) => Some(o),
        }
    }
}
