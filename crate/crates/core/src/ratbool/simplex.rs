//! Exact phase-one simplex for `A x = b` (optionally `x ≥ 0`).
//!
//! Rows are sign-normalised so that `b ≥ 0`, one artificial variable is added
//! per row, and the sum of artificials is minimised with Bland's rule. A zero
//! optimum yields a feasible point; a positive optimum yields a Farkas vector
//! read off the artificial columns of the final reduced-cost row.

use num_traits::{One, Signed, Zero};

use super::matrix::RatMatrix;
use super::rational::Rational;
use super::{Feasibility, RatBoolError};

/// Dual vector `y` proving that `A x = b` has no solution in the searched cone.
///
/// With a nonnegativity constraint it satisfies `yᵀA ≤ 0` and `yᵀb > 0`;
/// for a free `x` it satisfies `yᵀA = 0` and `yᵀb > 0`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FarkasCertificate {
    pub y: Vec<Rational>,
}

impl FarkasCertificate {
    /// Re-checks the certificate exactly against the system it refutes.
    pub fn verify(&self, a: &RatMatrix, b: &[Rational], nonneg: bool) -> bool {
        if self.y.len() != a.rows() || b.len() != a.rows() {
            return false;
        }
        let Ok(ya) = a.vec_mul(&self.y) else {
            return false;
        };
        let yb = self.y.iter().zip(b).fold(Rational::zero(), |acc, (y, b)| acc + y * b);
        let cone_ok = if nonneg { ya.iter().all(|v| !v.is_positive()) } else { ya.iter().all(Zero::is_zero) };
        cone_ok && yb.is_positive()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LinearReport {
    pub result: Feasibility<Vec<Rational>, FarkasCertificate>,
    pub pivots: usize,
}

pub fn solve_linear_feasibility(a: &RatMatrix, b: &[Rational], nonneg: bool) -> Result<LinearReport, RatBoolError> {
    if a.rows() != b.len() {
        return Err(RatBoolError::Dimension(format!(
            "system has {} rows but right-hand side has {} entries",
            a.rows(),
            b.len()
        )));
    }
    let n = a.cols();
    let vars = if nonneg { n } else { 2 * n };
    let m = a.rows();

    let signs: Vec<bool> = b.iter().map(|v| v.is_negative()).collect();
    let mut rows = Vec::with_capacity(m);
    for (r, &flip) in signs.iter().enumerate() {
        let mut row = vec![Rational::zero(); vars + m + 1];
        for c in 0..n {
            let v = a.get(r, c);
            if v.is_zero() {
                continue;
            }
            let v = if flip { -v } else { v.clone() };
            if !nonneg {
                row[n + c] = -v.clone();
            }
            row[c] = v;
        }
        row[vars + r] = Rational::one();
        row[vars + m] = if flip { -&b[r] } else { b[r].clone() };
        rows.push(row);
    }
    let mut tableau = Tableau::new(rows, vars);
    tableau.run()?;

    let pivots = tableau.pivots;
    if tableau.objective().is_positive() {
        let y = (0..m)
            .map(|i| {
                let yi = Rational::one() - &tableau.cost[vars + i];
                if signs[i] {
                    -yi
                } else {
                    yi
                }
            })
            .collect();
        let cert = FarkasCertificate { y };
        debug_assert!(cert.verify(a, b, nonneg));
        return Ok(LinearReport { result: Feasibility::Infeasible(cert), pivots });
    }

    let mut raw = vec![Rational::zero(); vars];
    for (r, &j) in tableau.basis.iter().enumerate() {
        if j < vars {
            raw[j] = tableau.rows[r][tableau.rhs()].clone();
        }
    }
    let x = if nonneg { raw } else { (0..n).map(|c| &raw[c] - &raw[n + c]).collect() };
    Ok(LinearReport { result: Feasibility::Feasible(x), pivots })
}

struct Tableau {
    rows: Vec<Vec<Rational>>,
    cost: Vec<Rational>,
    basis: Vec<usize>,
    vars: usize,
    pivots: usize,
}

impl Tableau {
    fn new(rows: Vec<Vec<Rational>>, vars: usize) -> Self {
        let m = rows.len();
        let width = vars + m + 1;
        // Reduced costs for the all-artificial basis: c_j − 1ᵀA_j.
        let mut cost = vec![Rational::zero(); width];
        for row in &rows {
            for j in 0..vars {
                if !row[j].is_zero() {
                    cost[j] -= &row[j];
                }
            }
            cost[width - 1] -= &row[width - 1];
        }
        let basis = (0..m).map(|i| vars + i).collect();
        Self { rows, cost, basis, vars, pivots: 0 }
    }

    fn rhs(&self) -> usize {
        self.vars + self.rows.len()
    }

    fn objective(&self) -> Rational {
        -&self.cost[self.rhs()]
    }

    fn run(&mut self) -> Result<(), RatBoolError> {
        // Artificials never re-enter; Bland's rule on the structural columns.
        while let Some(enter) = (0..self.vars).find(|&j| self.cost[j].is_negative()) {
            let rhs = self.rhs();
            let mut leave: Option<(usize, Rational)> = None;
            for (i, row) in self.rows.iter().enumerate() {
                if !row[enter].is_positive() {
                    continue;
                }
                let ratio = &row[rhs] / &row[enter];
                let better = match &leave {
                    None => true,
                    Some((best, best_ratio)) => {
                        ratio < *best_ratio || (ratio == *best_ratio && self.basis[i] < self.basis[*best])
                    }
                };
                if better {
                    leave = Some((i, ratio));
                }
            }
            let Some((leave, _)) = leave else {
                return Err(RatBoolError::Internal("phase-one objective unbounded below".into()));
            };
            self.pivot(leave, enter);
        }
        Ok(())
    }

    fn pivot(&mut self, p: usize, e: usize) {
        self.pivots += 1;
        let piv = self.rows[p][e].clone();
        if !piv.is_one() {
            for v in self.rows[p].iter_mut().filter(|v| !v.is_zero()) {
                *v /= &piv;
            }
        }
        let prow = self.rows[p].clone();
        let support: Vec<usize> = (0..prow.len()).filter(|&j| !prow[j].is_zero()).collect();
        for (i, row) in self.rows.iter_mut().enumerate() {
            if i == p || row[e].is_zero() {
                continue;
            }
            let f = row[e].clone();
            for &j in &support {
                row[j] -= &f * &prow[j];
            }
        }
        if !self.cost[e].is_zero() {
            let f = self.cost[e].clone();
            for &j in &support {
                self.cost[j] -= &f * &prow[j];
            }
        }
        self.basis[p] = e;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ratbool::rational::{int, ratio};

    fn mat(rows: Vec<Vec<i64>>) -> RatMatrix {
        RatMatrix::from_rows(rows.into_iter().map(|r| r.into_iter().map(int).collect()).collect()).unwrap()
    }

    #[test]
    fn simplex_point_is_feasible() {
        let a = mat(vec![vec![1, 1]]);
        let rep = solve_linear_feasibility(&a, &[int(1)], true).unwrap();
        let x = rep.result.witness().unwrap();
        assert_eq!(a.mul_vec(x).unwrap(), vec![int(1)]);
        assert!(x.iter().all(|v| !v.is_negative()));
    }

    #[test]
    fn negative_sum_is_infeasible_with_certificate() {
        let a = mat(vec![vec![1, 1]]);
        let rep = solve_linear_feasibility(&a, &[int(-1)], true).unwrap();
        let cert = rep.result.obstruction().unwrap();
        assert_eq!(cert.y, vec![int(-1)]);
        assert!(cert.verify(&a, &[int(-1)], true));
    }

    #[test]
    fn free_variables_allow_negative_solutions() {
        let a = mat(vec![vec![1, 1]]);
        let rep = solve_linear_feasibility(&a, &[int(-1)], false).unwrap();
        let x = rep.result.witness().unwrap();
        assert_eq!(a.mul_vec(x).unwrap(), vec![int(-1)]);
    }

    #[test]
    fn inconsistent_equalities_refuted_for_free_variables() {
        // x + y = 1 and 2x + 2y = 3 has no solution at all.
        let a = mat(vec![vec![1, 1], vec![2, 2]]);
        let b = [int(1), int(3)];
        let rep = solve_linear_feasibility(&a, &b, false).unwrap();
        assert!(rep.result.obstruction().unwrap().verify(&a, &b, false));
    }

    #[test]
    fn redundant_rows_and_degeneracy() {
        let a = mat(vec![vec![1, 0, 1], vec![0, 1, 1], vec![1, 1, 2]]);
        let b = [ratio(1, 3), ratio(2, 3), int(1)];
        let rep = solve_linear_feasibility(&a, &b, true).unwrap();
        let x = rep.result.witness().unwrap();
        assert_eq!(a.mul_vec(x).unwrap(), b.to_vec());
    }

    #[test]
    fn empty_systems() {
        let a = RatMatrix::zeros(0, 3);
        assert!(solve_linear_feasibility(&a, &[], true).unwrap().result.is_feasible());
        let a = RatMatrix::zeros(2, 0);
        let b = [int(0), int(2)];
        let rep = solve_linear_feasibility(&a, &b, true).unwrap();
        assert!(rep.result.obstruction().unwrap().verify(&a, &b, true));
    }

    #[test]
    fn dimension_mismatch() {
        let a = mat(vec![vec![1, 1]]);
        assert!(matches!(solve_linear_feasibility(&a, &[int(1), int(2)], true), Err(RatBoolError::Dimension(_))));
    }
}
