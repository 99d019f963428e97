//! Small dense row-major matrices over any [`Scalar`].

use std::fmt;
use std::ops::{Index, IndexMut};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{Rational, Scalar};

#[derive(Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Vec<S>>", into = "Vec<Vec<S>>")]
#[serde(bound(serialize = "S: Scalar + Serialize", deserialize = "S: Scalar + Deserialize<'de>"))]
pub struct Matrix<S> {
    rows: usize,
    cols: usize,
    data: Vec<S>,
}

impl<S: Scalar> Matrix<S> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix { rows, cols, data: vec![S::zero(); rows * cols] }
    }

    pub fn identity(size: usize) -> Self {
        let mut m = Self::zeros(size, size);
        for i in 0..size {
            m[(i, i)] = S::one();
        }
        m
    }

    pub fn diagonal(entries: &[S]) -> Self {
        let mut m = Self::zeros(entries.len(), entries.len());
        for (i, e) in entries.iter().enumerate() {
            m[(i, i)] = e.clone();
        }
        m
    }

    /// Builds a matrix from equally long rows.
    pub fn from_rows(rows: Vec<Vec<S>>) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        if let Some(bad) = rows.iter().find(|r| r.len() != cols) {
            return Err(Error::DimensionMismatch { expected: cols, found: bad.len() });
        }
        let n = rows.len();
        Ok(Matrix { rows: n, cols, data: rows.into_iter().flatten().collect() })
    }

    /// Builds a matrix whose columns are the given vectors.
    pub fn from_columns(columns: &[Vec<S>]) -> Result<Self> {
        Ok(Self::from_rows(columns.to_vec())?.transpose())
    }

    pub fn nrows(&self) -> usize {
        self.rows
    }

    pub fn ncols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn row(&self, i: usize) -> &[S] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<S> {
        (0..self.rows).map(|i| self[(i, j)].clone()).collect()
    }

    pub fn to_rows(&self) -> Vec<Vec<S>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)].clone();
            }
        }
        t
    }

    pub fn select_columns(&self, indices: &[usize]) -> Self {
        let mut m = Self::zeros(self.rows, indices.len());
        for (jj, &j) in indices.iter().enumerate() {
            for i in 0..self.rows {
                m[(i, jj)] = self[(i, j)].clone();
            }
        }
        m
    }

    pub fn select_rows(&self, indices: &[usize]) -> Self {
        let mut m = Self::zeros(indices.len(), self.cols);
        for (ii, &i) in indices.iter().enumerate() {
            for j in 0..self.cols {
                m[(ii, j)] = self[(i, j)].clone();
            }
        }
        m
    }

    pub fn mul(&self, rhs: &Matrix<S>) -> Result<Matrix<S>> {
        if self.cols != rhs.rows {
            return Err(Error::DimensionMismatch { expected: self.cols, found: rhs.rows });
        }
        let mut out = Self::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = &self[(i, k)];
                if a.is_zero() {
                    continue;
                }
                for j in 0..rhs.cols {
                    let prod = a.clone() * rhs[(k, j)].clone();
                    out[(i, j)] = out[(i, j)].clone() + prod;
                }
            }
        }
        Ok(out)
    }

    pub fn mul_vec(&self, v: &[S]) -> Result<Vec<S>> {
        if self.cols != v.len() {
            return Err(Error::DimensionMismatch { expected: self.cols, found: v.len() });
        }
        Ok((0..self.rows)
            .map(|i| {
                self.row(i)
                    .iter()
                    .zip(v)
                    .fold(S::zero(), |acc, (a, b)| acc + a.clone() * b.clone())
            })
            .collect())
    }

    /// `vᵀ M v` for square `M`.
    pub fn quadratic_form(&self, v: &[S]) -> Result<S> {
        let mv = self.mul_vec(v)?;
        Ok(v.iter().zip(&mv).fold(S::zero(), |acc, (a, b)| acc + a.clone() * b.clone()))
    }

    pub fn map<T: Scalar>(&self, f: impl Fn(&S) -> T) -> Matrix<T> {
        Matrix { rows: self.rows, cols: self.cols, data: self.data.iter().map(f).collect() }
    }

    /// Largest absolute entry, as `f64`.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|x| x.as_f64().abs()).fold(0.0, f64::max)
    }

    pub fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for j in 0..self.cols {
            self.data.swap(a * self.cols + j, b * self.cols + j);
        }
    }

    pub fn swap_columns(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for i in 0..self.rows {
            self.data.swap(i * self.cols + a, i * self.cols + b);
        }
    }

    /// Row echelon reduction with partial pivoting; returns the pivot columns.
    pub fn echelon(&self) -> Echelon {
        let mut m = self.clone();
        let mut pivots = Vec::new();
        let mut min_abs_pivot = f64::INFINITY;
        let mut r = 0;
        for c in 0..m.cols {
            if r == m.rows {
                break;
            }
            let (best, best_abs) = (r..m.rows)
                .map(|i| (i, m[(i, c)].abs()))
                .fold((r, S::zero()), |acc, cur| if cur.1 > acc.1 { cur } else { acc });
            if best_abs.is_negligible() {
                continue;
            }
            m.swap_rows(r, best);
            let pivot = m[(r, c)].clone();
            min_abs_pivot = min_abs_pivot.min(pivot.as_f64().abs());
            for i in r + 1..m.rows {
                let factor = m[(i, c)].clone() / pivot.clone();
                if factor.is_zero() {
                    continue;
                }
                for j in c..m.cols {
                    let delta = factor.clone() * m[(r, j)].clone();
                    m[(i, j)] = m[(i, j)].clone() - delta;
                }
            }
            pivots.push(c);
            r += 1;
        }
        Echelon { pivots, min_abs_pivot }
    }

    pub fn rank(&self) -> usize {
        self.echelon().pivots.len()
    }

    /// Gauss–Jordan inverse with partial pivoting.
    pub fn inverse(&self) -> Result<Matrix<S>> {
        if !self.is_square() {
            return Err(Error::DimensionMismatch { expected: self.rows, found: self.cols });
        }
        let n = self.rows;
        let mut a = self.clone();
        let mut inv = Self::identity(n);
        for c in 0..n {
            let (best, best_abs) = (c..n)
                .map(|i| (i, a[(i, c)].abs()))
                .fold((c, S::zero()), |acc, cur| if cur.1 > acc.1 { cur } else { acc });
            if best_abs.is_negligible() {
                return Err(Error::Singular("matrix inverse".into()));
            }
            a.swap_rows(c, best);
            inv.swap_rows(c, best);
            let pivot = a[(c, c)].clone();
            for j in 0..n {
                a[(c, j)] = a[(c, j)].clone() / pivot.clone();
                inv[(c, j)] = inv[(c, j)].clone() / pivot.clone();
            }
            for i in 0..n {
                if i == c {
                    continue;
                }
                let factor = a[(i, c)].clone();
                if factor.is_zero() {
                    continue;
                }
                for j in 0..n {
                    let da = factor.clone() * a[(c, j)].clone();
                    a[(i, j)] = a[(i, j)].clone() - da;
                    let di = factor.clone() * inv[(c, j)].clone();
                    inv[(i, j)] = inv[(i, j)].clone() - di;
                }
            }
        }
        Ok(inv)
    }

    pub fn determinant(&self) -> Result<S> {
        if !self.is_square() {
            return Err(Error::DimensionMismatch { expected: self.rows, found: self.cols });
        }
        let n = self.rows;
        let mut a = self.clone();
        let mut det = S::one();
        for c in 0..n {
            let (best, best_abs) = (c..n)
                .map(|i| (i, a[(i, c)].abs()))
                .fold((c, S::zero()), |acc, cur| if cur.1 > acc.1 { cur } else { acc });
            if best_abs.is_zero() {
                return Ok(S::zero());
            }
            if best != c {
                a.swap_rows(c, best);
                det = -det;
            }
            let pivot = a[(c, c)].clone();
            det = det * pivot.clone();
            for i in c + 1..n {
                let factor = a[(i, c)].clone() / pivot.clone();
                for j in c..n {
                    let d = factor.clone() * a[(c, j)].clone();
                    a[(i, j)] = a[(i, j)].clone() - d;
                }
            }
        }
        Ok(det)
    }

    /// Solves `A x = b` for a system known to be consistent, with `A` of full
    /// column rank. Returns `None` if `b` is not in the column space.
    pub fn solve_consistent(&self, b: &[S]) -> Option<Vec<S>> {
        if b.len() != self.rows {
            return None;
        }
        let cols = self.cols;
        let mut aug = Self::zeros(self.rows, cols + 1);
        for i in 0..self.rows {
            for j in 0..cols {
                aug[(i, j)] = self[(i, j)].clone();
            }
            aug[(i, cols)] = b[i].clone();
        }
        let mut r = 0;
        for c in 0..cols {
            let (best, best_abs) = (r..aug.rows)
                .map(|i| (i, aug[(i, c)].abs()))
                .fold((r, S::zero()), |acc, cur| if cur.1 > acc.1 { cur } else { acc });
            if r >= aug.rows || best_abs.is_negligible() {
                return None;
            }
            aug.swap_rows(r, best);
            let pivot = aug[(r, c)].clone();
            for i in 0..aug.rows {
                if i == r {
                    continue;
                }
                let factor = aug[(i, c)].clone() / pivot.clone();
                if factor.is_zero() {
                    continue;
                }
                for j in c..=cols {
                    let d = factor.clone() * aug[(r, j)].clone();
                    aug[(i, j)] = aug[(i, j)].clone() - d;
                }
            }
            r += 1;
        }
        if (r..aug.rows).any(|i| !aug[(i, cols)].is_negligible()) {
            return None;
        }
        Some((0..cols).map(|i| aug[(i, cols)].clone() / aug[(i, i)].clone()).collect())
    }
}

/// Outcome of a row echelon reduction.
#[derive(Debug, Clone, PartialEq)]
pub struct Echelon {
    /// Pivot columns, ascending. Greedy: column `c` is a pivot iff it is
    /// independent of the columns before it.
    pub pivots: Vec<usize>,
    /// Smallest retained pivot magnitude (infinite when rank is zero).
    pub min_abs_pivot: f64,
}

/// Fraction-free (Bareiss) echelon reduction of a rational matrix.
///
/// Each row is first scaled by the lcm of its denominators, then all
/// eliminations stay in the integers with exact divisions.
pub fn echelon_exact(m: &Matrix<Rational>) -> Echelon {
    let mut rows: Vec<Vec<BigInt>> = (0..m.nrows())
        .map(|i| {
            let row = m.row(i);
            let lcm = row.iter().fold(BigInt::one(), |acc, x| acc.lcm(x.denom()));
            row.iter().map(|x| x.numer() * (&lcm / x.denom())).collect()
        })
        .collect();
    let (nrows, ncols) = (m.nrows(), m.ncols());
    let mut pivots = Vec::new();
    let mut prev = BigInt::one();
    let mut r = 0;
    for c in 0..ncols {
        if r == nrows {
            break;
        }
        let Some(p) = (r..nrows).find(|&i| !rows[i][c].is_zero()) else {
            continue;
        };
        rows.swap(r, p);
        for i in r + 1..nrows {
            for j in c + 1..ncols {
                let num = &rows[r][c] * &rows[i][j] - &rows[i][c] * &rows[r][j];
                debug_assert!((&num % &prev).is_zero());
                rows[i][j] = num / &prev;
            }
            rows[i][c] = BigInt::zero();
        }
        prev = rows[r][c].clone();
        pivots.push(c);
        r += 1;
    }
    Echelon { pivots, min_abs_pivot: f64::INFINITY }
}

/// Exact rank of a rational matrix via fraction-free elimination.
pub fn rank_exact(m: &Matrix<Rational>) -> usize {
    echelon_exact(m).pivots.len()
}

impl<S> Index<(usize, usize)> for Matrix<S> {
    type Output = S;

    fn index(&self, (i, j): (usize, usize)) -> &S {
        assert!(i < self.rows && j < self.cols, "index ({i},{j}) out of bounds");
        &self.data[i * self.cols + j]
    }
}

impl<S> IndexMut<(usize, usize)> for Matrix<S> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut S {
        assert!(i < self.rows && j < self.cols, "index ({i},{j}) out of bounds");
        &mut self.data[i * self.cols + j]
    }
}

impl<S: Scalar> TryFrom<Vec<Vec<S>>> for Matrix<S> {
    type Error = Error;

    fn try_from(rows: Vec<Vec<S>>) -> Result<Self> {
        Matrix::from_rows(rows)
    }
}

impl<S: Scalar> From<Matrix<S>> for Vec<Vec<S>> {
    fn from(m: Matrix<S>) -> Self {
        m.to_rows()
    }
}

impl<S: fmt::Debug> fmt::Debug for Matrix<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut list = f.debug_list();
        for i in 0..self.rows {
            list.entry(&&self.data[i * self.cols..(i + 1) * self.cols]);
        }
        list.finish()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::rational;
    use proptest::prelude::*;

    fn q(rows: &[&[i64]]) -> Matrix<Rational> {
        Matrix::from_rows(
            rows.iter().map(|r| r.iter().map(|&x| rational(x, 1)).collect()).collect(),
        )
        .unwrap()
    }

    #[test]
    fn rank_of_small_examples() {
        assert_eq!(rank_exact(&Matrix::identity(2)), 2);
        assert_eq!(rank_exact(&Matrix::zeros(3, 2)), 0);
        assert_eq!(rank_exact(&q(&[&[1, 2], &[2, 4], &[3, 6]])), 1);
        assert_eq!(q(&[&[1, 2], &[2, 4], &[3, 6]]).rank(), 1);
    }

    #[test]
    fn greedy_pivot_columns() {
        // columns: e1, e2, e1+e2, e3
        let m = q(&[&[1, 0, 1, 0], &[0, 1, 1, 0], &[0, 0, 0, 1]]);
        assert_eq!(echelon_exact(&m).pivots, vec![0, 1, 3]);
        assert_eq!(m.echelon().pivots, vec![0, 1, 3]);
    }

    #[test]
    fn inverse_and_determinant() {
        let m = q(&[&[2, 1], &[1, 1]]);
        let inv = m.inverse().unwrap();
        assert_eq!(m.mul(&inv).unwrap(), Matrix::identity(2));
        assert_eq!(m.determinant().unwrap(), rational(1, 1));
        assert!(q(&[&[1, 2], &[2, 4]]).inverse().is_err());
    }

    #[test]
    fn solve_consistent_detects_inconsistency() {
        let a = q(&[&[1, 0], &[0, 1], &[1, 1]]);
        let x = a.solve_consistent(&[rational(2, 1), rational(3, 1), rational(5, 1)]).unwrap();
        assert_eq!(x, vec![rational(2, 1), rational(3, 1)]);
        assert!(a.solve_consistent(&[rational(1, 1), rational(1, 1), rational(0, 1)]).is_none());
    }

    fn small_rational() -> impl Strategy<Value = Rational> {
        (-4i64..=4, 1i64..=3).prop_map(|(p, q)| rational(p, q))
    }

    proptest! {
        // Bareiss and plain rational elimination are independent routes to the rank.
        #[test]
        fn bareiss_matches_rational_elimination(
            rows in 1usize..5, cols in 1usize..5,
            seed in prop::collection::vec(small_rational(), 16),
            dup in any::<bool>(),
        ) {
            let mut data: Vec<Vec<Rational>> = (0..rows)
                .map(|i| (0..cols).map(|j| seed[(i * cols + j) % 16].clone()).collect())
                .collect();
            if dup && rows > 1 {
                data[rows - 1] = data[0].iter().map(|x| x * rational(2, 1)).collect();
            }
            let m = Matrix::from_rows(data).unwrap();
            prop_assert_eq!(echelon_exact(&m).pivots, m.echelon().pivots);
        }
    }
}
