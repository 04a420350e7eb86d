//! Dense exact-rational matrices.

use std::fmt;

use num_traits::{One, Zero};

use crate::error::{QcalcError, Result};
use crate::scalar::{format_rational, parse_rational, Rational};

pub type Vector = Vec<Rational>;

/// A linear map `Q^cols -> Q^rows` stored row-major.
#[derive(Clone, PartialEq, Eq)]
pub struct LinOp {
    rows: usize,
    cols: usize,
    data: Vec<Rational>,
}

impl LinOp {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        LinOp { rows, cols, data: vec![Rational::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Rational::one();
        }
        m
    }

    pub fn from_rows(rows: Vec<Vector>) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != cols) {
            return Err(QcalcError::BadShape("ragged rows".into()));
        }
        Ok(LinOp { rows: rows.len(), cols, data: rows.into_iter().flatten().collect() })
    }

    /// Builds an `rows x columns.len()` matrix from column vectors.
    pub fn from_columns(rows: usize, columns: &[Vector]) -> Result<Self> {
        let mut m = Self::zeros(rows, columns.len());
        for (j, c) in columns.iter().enumerate() {
            if c.len() != rows {
                return Err(QcalcError::BadShape(format!("column {j} has length {}, expected {rows}", c.len())));
            }
            for (i, v) in c.iter().enumerate() {
                m[(i, j)] = v.clone();
            }
        }
        Ok(m)
    }

    pub fn from_i64(rows: &[&[i64]]) -> Self {
        Self::from_rows(rows.iter().map(|r| r.iter().map(|&v| Rational::from_integer(v.into())).collect()).collect())
            .expect("rectangular literal")
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn row(&self, i: usize) -> &[Rational] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vector {
        (0..self.rows).map(|i| self[(i, j)].clone()).collect()
    }

    pub fn columns(&self) -> Vec<Vector> {
        (0..self.cols).map(|j| self.column(j)).collect()
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(Zero::is_zero)
    }

    pub fn is_identity(&self) -> bool {
        self.is_square() && *self == Self::identity(self.rows)
    }

    pub fn transpose(&self) -> LinOp {
        let mut t = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)].clone();
            }
        }
        t
    }

    pub fn mul(&self, other: &LinOp) -> Result<LinOp> {
        if self.cols != other.rows {
            return Err(QcalcError::BadShape(format!(
                "cannot compose {}x{} with {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = &self[(i, k)];
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let b = &other[(k, j)];
                    if !b.is_zero() {
                        out[(i, j)] += a * b;
                    }
                }
            }
        }
        Ok(out)
    }

    fn zip(&self, other: &LinOp, op: impl Fn(&Rational, &Rational) -> Rational) -> Result<LinOp> {
        if (self.rows, self.cols) != (other.rows, other.cols) {
            return Err(QcalcError::BadShape(format!("{}x{} vs {}x{}", self.rows, self.cols, other.rows, other.cols)));
        }
        Ok(LinOp {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&other.data).map(|(a, b)| op(a, b)).collect(),
        })
    }

    pub fn add(&self, other: &LinOp) -> Result<LinOp> {
        self.zip(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &LinOp) -> Result<LinOp> {
        self.zip(other, |a, b| a - b)
    }

    pub fn scale(&self, c: &Rational) -> LinOp {
        LinOp { rows: self.rows, cols: self.cols, data: self.data.iter().map(|a| a * c).collect() }
    }

    pub fn apply(&self, v: &[Rational]) -> Result<Vector> {
        if v.len() != self.cols {
            return Err(QcalcError::BadShape(format!("vector of length {} into {}x{}", v.len(), self.rows, self.cols)));
        }
        Ok((0..self.rows)
            .map(|i| self.row(i).iter().zip(v).fold(Rational::zero(), |acc, (a, b)| acc + a * b))
            .collect())
    }

    /// Square power; `pow(0)` is the identity.
    pub fn pow(&self, n: usize) -> Result<LinOp> {
        if !self.is_square() {
            return Err(QcalcError::BadShape(format!("power of non-square {}x{}", self.rows, self.cols)));
        }
        let mut acc = Self::identity(self.rows);
        for _ in 0..n {
            acc = acc.mul(self)?;
        }
        Ok(acc)
    }

    /// Reduced row echelon form, visiting columns in `order`. Returns the
    /// reduced matrix and the pivot column of each nonzero row.
    pub fn rref_with_order(&self, order: &[usize]) -> (LinOp, Vec<usize>) {
        let mut m = self.clone();
        let mut pivots = Vec::new();
        let mut r = 0;
        for &c in order {
            if r == m.rows {
                break;
            }
            let Some(p) = (r..m.rows).find(|&i| !m[(i, c)].is_zero()) else { continue };
            m.swap_rows(r, p);
            let inv = Rational::one() / m[(r, c)].clone();
            for j in 0..m.cols {
                m[(r, j)] = &m[(r, j)] * &inv;
            }
            for i in 0..m.rows {
                if i != r && !m[(i, c)].is_zero() {
                    let factor = m[(i, c)].clone();
                    for j in 0..m.cols {
                        let delta = &factor * &m[(r, j)];
                        m[(i, j)] -= delta;
                    }
                }
            }
            pivots.push(c);
            r += 1;
        }
        (m, pivots)
    }

    pub fn rref(&self) -> (LinOp, Vec<usize>) {
        let order: Vec<usize> = (0..self.cols).collect();
        self.rref_with_order(&order)
    }

    pub fn rank(&self) -> usize {
        self.rref().1.len()
    }

    /// A basis of the null space: one vector per free column, with that
    /// free variable set to 1 and the others to 0.
    pub fn kernel_basis(&self) -> Vec<Vector> {
        let (r, pivots) = self.rref();
        let free: Vec<usize> = (0..self.cols).filter(|c| !pivots.contains(c)).collect();
        free.iter()
            .map(|&f| {
                let mut v = vec![Rational::zero(); self.cols];
                v[f] = Rational::one();
                for (row, &pc) in pivots.iter().enumerate() {
                    v[pc] = -r[(row, f)].clone();
                }
                v
            })
            .collect()
    }

    /// Inverse of a square matrix, or `None` when singular.
    pub fn inverse(&self) -> Option<LinOp> {
        if !self.is_square() {
            return None;
        }
        let n = self.rows;
        let mut aug = Self::zeros(n, 2 * n);
        for i in 0..n {
            for j in 0..n {
                aug[(i, j)] = self[(i, j)].clone();
            }
            aug[(i, n + i)] = Rational::one();
        }
        let order: Vec<usize> = (0..n).collect();
        let (r, pivots) = aug.rref_with_order(&order);
        if pivots.len() < n {
            return None;
        }
        let mut inv = Self::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                inv[(i, j)] = r[(i, n + j)].clone();
            }
        }
        Some(inv)
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for j in 0..self.cols {
            self.data.swap(a * self.cols + j, b * self.cols + j);
        }
    }

    /// Plain text: one row per line, entries as `num/den` separated by spaces.
    pub fn to_text(&self) -> String {
        (0..self.rows)
            .map(|i| self.row(i).iter().map(format_rational).collect::<Vec<_>>().join(" "))
            .map(|line| line + "\n")
            .collect()
    }

    pub fn parse_text(text: &str) -> Result<LinOp> {
        let rows = text
            .lines()
            .filter(|l| !l.trim().is_empty())
            .map(|l| l.split_whitespace().map(parse_rational).collect::<Result<Vector>>())
            .collect::<Result<Vec<_>>>()?;
        Self::from_rows(rows)
    }
}

impl std::ops::Index<(usize, usize)> for LinOp {
    type Output = Rational;

    fn index(&self, (i, j): (usize, usize)) -> &Rational {
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for LinOp {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Rational {
        &mut self.data[i * self.cols + j]
    }
}

impl fmt::Debug for LinOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "LinOp {}x{}", self.rows, self.cols)?;
        write!(f, "{}", self.to_text())
    }
}

/// Rank of a family of equal-length vectors.
pub fn rank_of(vectors: &[Vector]) -> usize {
    match vectors.first() {
        None => 0,
        Some(v) => LinOp::from_rows(vectors.to_vec())
            .map(|m| m.rank())
            .unwrap_or_else(|_| panic!("rank_of: vectors of unequal length (first has {})", v.len())),
    }
}

pub fn is_zero_vector(v: &[Rational]) -> bool {
    v.iter().all(Zero::is_zero)
}

/// True when `v` lies in the span of `basis`.
pub fn in_span(basis: &[Vector], v: &[Rational]) -> bool {
    if is_zero_vector(v) {
        return true;
    }
    let mut with = basis.to_vec();
    with.push(v.to_vec());
    rank_of(&with) == rank_of(basis)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{int, rat};

    #[test]
    fn multiplication_and_shapes() {
        let a = LinOp::from_i64(&[&[1, 2], &[3, 4]]);
        let b = LinOp::from_i64(&[&[0, 1], &[1, 0]]);
        assert_eq!(a.mul(&b).unwrap(), LinOp::from_i64(&[&[2, 1], &[4, 3]]));
        assert!(a.mul(&LinOp::zeros(3, 1)).is_err());
        assert_eq!(a.pow(0).unwrap(), LinOp::identity(2));
    }

    #[test]
    fn rank_kernel_inverse() {
        let a = LinOp::from_i64(&[&[1, 2, 3], &[2, 4, 6]]);
        assert_eq!(a.rank(), 1);
        let k = a.kernel_basis();
        assert_eq!(k.len(), 2);
        for v in &k {
            assert!(is_zero_vector(&a.apply(v).unwrap()));
        }
        let b = LinOp::from_i64(&[&[2, 1], &[1, 1]]);
        let inv = b.inverse().unwrap();
        assert_eq!(inv, LinOp::from_i64(&[&[1, -1], &[-1, 2]]));
        assert!(a.transpose().mul(&a).unwrap().inverse().is_none());
    }

    #[test]
    fn text_round_trip() {
        let m = LinOp::from_rows(vec![vec![rat(1, 2), int(-3)], vec![int(0), rat(7, 5)]]).unwrap();
        assert_eq!(m.to_text(), "1/2 -3\n0 7/5\n");
        assert_eq!(LinOp::parse_text(&m.to_text()).unwrap(), m);
        assert!(LinOp::parse_text("1 2\n3\n").is_err());
    }

    #[test]
    fn span_membership() {
        let basis = vec![vec![int(1), int(0), int(1)], vec![int(0), int(1), int(0)]];
        assert!(in_span(&basis, &[int(2), int(3), int(2)]));
        assert!(!in_span(&basis, &[int(1), int(0), int(0)]));
    }
}
