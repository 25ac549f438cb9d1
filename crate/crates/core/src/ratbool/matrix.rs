use std::fmt;

use num_traits::{One, Signed, Zero};

use super::rational::{format_rational, Rational};
use super::RatBoolError;

/// Dense row-major matrix of exact rationals.
#[derive(Clone, PartialEq, Eq)]
pub struct RatMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Rational>,
}

impl RatMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![Rational::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = Rational::one();
        }
        m
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<Rational>) -> Result<Self, RatBoolError> {
        if data.len() != rows * cols {
            return Err(RatBoolError::Dimension(format!("{} entries cannot fill a {rows}x{cols} matrix", data.len())));
        }
        Ok(Self { rows, cols, data })
    }

    /// Builds from explicit rows; every row must have the same length.
    pub fn from_rows(rows: Vec<Vec<Rational>>) -> Result<Self, RatBoolError> {
        let cols = rows.first().map_or(0, Vec::len);
        if let Some(bad) = rows.iter().position(|r| r.len() != cols) {
            return Err(RatBoolError::Dimension(format!("row {bad} has {} entries, expected {cols}", rows[bad].len())));
        }
        let n = rows.len();
        Ok(Self { rows: n, cols, data: rows.into_iter().flatten().collect() })
    }

    /// A single column vector.
    pub fn column_vector(values: Vec<Rational>) -> Self {
        Self { rows: values.len(), cols: 1, data: values }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, r: usize, c: usize) -> &Rational {
        &self.data[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, value: Rational) {
        self.data[r * self.cols + c] = value;
    }

    pub fn entries(&self) -> &[Rational] {
        &self.data
    }

    pub fn row(&self, r: usize) -> &[Rational] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn column(&self, c: usize) -> Vec<Rational> {
        (0..self.rows).map(|r| self.get(r, c).clone()).collect()
    }

    pub fn to_rows(&self) -> Vec<Vec<Rational>> {
        (0..self.rows).map(|r| self.row(r).to_vec()).collect()
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                t.data[c * self.rows + r] = self.get(r, c).clone();
            }
        }
        t
    }

    /// Exact product. Zero entries of `self` are skipped, which keeps the
    /// 0/1-heavy incidence and extension products cheap.
    pub fn mul(&self, rhs: &RatMatrix) -> Result<RatMatrix, RatBoolError> {
        if self.cols != rhs.rows {
            return Err(RatBoolError::Dimension(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, rhs.rows, rhs.cols
            )));
        }
        let mut out = Self::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..rhs.cols {
                    let b = rhs.get(k, j);
                    if !b.is_zero() {
                        out.data[i * rhs.cols + j] += a * b;
                    }
                }
            }
        }
        Ok(out)
    }

    pub fn mul_vec(&self, x: &[Rational]) -> Result<Vec<Rational>, RatBoolError> {
        if x.len() != self.cols {
            return Err(RatBoolError::Dimension(format!(
                "cannot apply {}x{} matrix to a vector of length {}",
                self.rows,
                self.cols,
                x.len()
            )));
        }
        Ok((0..self.rows)
            .map(|r| {
                self.row(r)
                    .iter()
                    .zip(x)
                    .filter(|(a, _)| !a.is_zero())
                    .fold(Rational::zero(), |acc, (a, b)| acc + a * b)
            })
            .collect())
    }

    /// `yᵀ A` for a row-space vector `y`.
    pub fn vec_mul(&self, y: &[Rational]) -> Result<Vec<Rational>, RatBoolError> {
        self.transpose().mul_vec(y)
    }

    /// Concatenates matrices left to right; all must share the row count.
    pub fn hstack(blocks: &[RatMatrix]) -> Result<RatMatrix, RatBoolError> {
        let rows = blocks.first().map_or(0, |b| b.rows);
        if blocks.iter().any(|b| b.rows != rows) {
            return Err(RatBoolError::Dimension("hstack blocks differ in row count".into()));
        }
        let cols = blocks.iter().map(|b| b.cols).sum();
        let mut out = Self::zeros(rows, cols);
        let mut offset = 0;
        for b in blocks {
            for r in 0..rows {
                for c in 0..b.cols {
                    out.data[r * cols + offset + c] = b.get(r, c).clone();
                }
            }
            offset += b.cols;
        }
        Ok(out)
    }

    /// Concatenates matrices top to bottom; all must share the column count.
    pub fn vstack(blocks: &[RatMatrix]) -> Result<RatMatrix, RatBoolError> {
        let cols = blocks.first().map_or(0, |b| b.cols);
        if blocks.iter().any(|b| b.cols != cols) {
            return Err(RatBoolError::Dimension("vstack blocks differ in column count".into()));
        }
        let rows = blocks.iter().map(|b| b.rows).sum();
        let data = blocks.iter().flat_map(|b| b.data.iter().cloned()).collect();
        Ok(Self { rows, cols, data })
    }

    /// Every column is a probability distribution.
    pub fn is_column_stochastic(&self) -> bool {
        (0..self.cols).all(|c| super::rational::is_distribution(&self.column(c)))
    }

    pub fn is_nonnegative(&self) -> bool {
        self.data.iter().all(|v| !v.is_negative())
    }

    /// Support pattern: 1 exactly where the entry is nonzero.
    pub fn support(&self) -> BoolMatrix {
        BoolMatrix { rows: self.rows, cols: self.cols, data: self.data.iter().map(|v| !v.is_zero()).collect() }
    }
}

impl fmt::Debug for RatMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "RatMatrix {}x{} [", self.rows, self.cols)?;
        for r in 0..self.rows {
            let row: Vec<String> = self.row(r).iter().map(format_rational).collect();
            writeln!(f, "  {}", row.join(" "))?;
        }
        write!(f, "]")
    }
}

/// Dense Boolean matrix over the ({0,1}, OR, AND) semiring.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct BoolMatrix {
    rows: usize,
    cols: usize,
    data: Vec<bool>,
}

impl BoolMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![false; rows * cols] }
    }

    pub fn ones(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![true; rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, true);
        }
        m
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<bool>) -> Result<Self, RatBoolError> {
        if data.len() != rows * cols {
            return Err(RatBoolError::Dimension(format!("{} bits cannot fill a {rows}x{cols} matrix", data.len())));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn from_rows(rows: Vec<Vec<bool>>) -> Result<Self, RatBoolError> {
        let cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != cols) {
            return Err(RatBoolError::Dimension("ragged Boolean rows".into()));
        }
        let n = rows.len();
        Ok(Self { rows: n, cols, data: rows.into_iter().flatten().collect() })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, r: usize, c: usize) -> bool {
        self.data[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, value: bool) {
        self.data[r * self.cols + c] = value;
    }

    pub fn entries(&self) -> &[bool] {
        &self.data
    }

    pub fn row(&self, r: usize) -> &[bool] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn column(&self, c: usize) -> Vec<bool> {
        (0..self.rows).map(|r| self.get(r, c)).collect()
    }

    pub fn column_is_empty(&self, c: usize) -> bool {
        (0..self.rows).all(|r| !self.get(r, c))
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                t.set(c, r, self.get(r, c));
            }
        }
        t
    }

    /// Boolean product: `(A·B)(i,j) = OR_k A(i,k) AND B(k,j)`.
    pub fn mul(&self, rhs: &BoolMatrix) -> Result<BoolMatrix, RatBoolError> {
        if self.cols != rhs.rows {
            return Err(RatBoolError::Dimension(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, rhs.rows, rhs.cols
            )));
        }
        let mut out = Self::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                if !self.get(i, k) {
                    continue;
                }
                for j in 0..rhs.cols {
                    if rhs.get(k, j) {
                        out.data[i * rhs.cols + j] = true;
                    }
                }
            }
        }
        Ok(out)
    }

    pub fn hstack(blocks: &[BoolMatrix]) -> Result<BoolMatrix, RatBoolError> {
        let rows = blocks.first().map_or(0, |b| b.rows);
        if blocks.iter().any(|b| b.rows != rows) {
            return Err(RatBoolError::Dimension("hstack blocks differ in row count".into()));
        }
        let cols = blocks.iter().map(|b| b.cols).sum();
        let mut out = Self::zeros(rows, cols);
        let mut offset = 0;
        for b in blocks {
            for r in 0..rows {
                for c in 0..b.cols {
                    out.set(r, offset + c, b.get(r, c));
                }
            }
            offset += b.cols;
        }
        Ok(out)
    }

    /// Entrywise `self ≤ other`.
    pub fn is_below(&self, other: &BoolMatrix) -> bool {
        self.rows == other.rows && self.cols == other.cols && self.data.iter().zip(&other.data).all(|(a, b)| !a || *b)
    }

    /// Embeds into the rationals as a 0/1 matrix.
    pub fn to_rational(&self) -> RatMatrix {
        RatMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&b| if b { Rational::one() } else { Rational::zero() }).collect(),
        }
    }
}

impl fmt::Debug for BoolMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "BoolMatrix {}x{} [", self.rows, self.cols)?;
        for r in 0..self.rows {
            let row: String = self.row(r).iter().map(|&b| if b { '1' } else { '0' }).collect();
            writeln!(f, "  {row}")?;
        }
        write!(f, "]")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ratbool::rational::{int, ratio};

    #[test]
    fn product_and_transpose() {
        let a = RatMatrix::from_rows(vec![vec![int(1), int(2)], vec![int(0), ratio(1, 2)]]).unwrap();
        let b = RatMatrix::from_rows(vec![vec![int(3)], vec![int(4)]]).unwrap();
        let ab = a.mul(&b).unwrap();
        assert_eq!(ab.column(0), vec![int(11), int(2)]);
        assert_eq!(a.transpose().get(1, 0), &int(2));
        assert_eq!(a.vec_mul(&[int(1), int(1)]).unwrap(), vec![int(1), ratio(5, 2)]);
        assert!(a.mul(&a.transpose()).is_ok());
        assert!(b.mul(&b).is_err());
    }

    #[test]
    fn ragged_rows_rejected() {
        assert!(RatMatrix::from_rows(vec![vec![int(1)], vec![int(1), int(2)]]).is_err());
        assert!(RatMatrix::from_vec(2, 2, vec![int(1)]).is_err());
    }

    #[test]
    fn boolean_product_is_or_and() {
        let a = BoolMatrix::from_rows(vec![vec![true, false], vec![true, true]]).unwrap();
        let b = BoolMatrix::from_rows(vec![vec![false, true], vec![true, false]]).unwrap();
        let ab = a.mul(&b).unwrap();
        assert_eq!(ab, BoolMatrix::from_rows(vec![vec![false, true], vec![true, true]]).unwrap());
        assert!(BoolMatrix::identity(2).is_below(&a));
    }

    #[test]
    fn support_round_trips_through_embedding() {
        let b = BoolMatrix::from_rows(vec![vec![true, false, true]]).unwrap();
        assert_eq!(b.to_rational().support(), b);
    }

    #[test]
    fn stacking() {
        let i = RatMatrix::identity(2);
        let h = RatMatrix::hstack(&[i.clone(), i.clone()]).unwrap();
        assert_eq!((h.rows(), h.cols()), (2, 4));
        let v = RatMatrix::vstack(&[i.clone(), i]).unwrap();
        assert_eq!((v.rows(), v.cols()), (4, 2));
        assert_eq!(v.get(3, 1), &int(1));
    }
}
