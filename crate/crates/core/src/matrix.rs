//! Small dense row-major matrix used by both numeric backends.

use std::ops::{Add, Index, IndexMut, Mul};

use num_traits::{One, Zero};

use crate::scalar::{Backend, Rational, Scalar};

#[derive(Clone, Debug, PartialEq)]
pub struct Matrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: Clone> Matrix<T> {
    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Matrix { rows, cols, data }
    }

    pub fn from_rows(rows: Vec<Vec<T>>) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        assert!(rows.iter().all(|row| row.len() == c), "ragged rows");
        Matrix { rows: r, cols: c, data: rows.into_iter().flatten().collect() }
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<T>) -> Self {
        assert_eq!(rows * cols, data.len());
        Matrix { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn col(&self, j: usize) -> Vec<T> {
        (0..self.rows).map(|i| self[(i, j)].clone()).collect()
    }

    pub fn to_rows(&self) -> Vec<Vec<T>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn transpose(&self) -> Self {
        Matrix::from_fn(self.cols, self.rows, |i, j| self[(j, i)].clone())
    }

    pub fn select(&self, rows: &[usize], cols: &[usize]) -> Self {
        Matrix::from_fn(rows.len(), cols.len(), |i, j| self[(rows[i], cols[j])].clone())
    }

    pub fn select_rows(&self, rows: &[usize]) -> Self {
        let all: Vec<usize> = (0..self.cols).collect();
        self.select(rows, &all)
    }

    pub fn select_cols(&self, cols: &[usize]) -> Self {
        let all: Vec<usize> = (0..self.rows).collect();
        self.select(&all, cols)
    }

    pub fn map<U: Clone>(&self, f: impl FnMut(&T) -> U) -> Matrix<U> {
        Matrix { rows: self.rows, cols: self.cols, data: self.data.iter().map(f).collect() }
    }

    pub fn iter(&self) -> impl Iterator<Item = &T> {
        self.data.iter()
    }

    pub fn vstack(blocks: &[Matrix<T>]) -> Self {
        let cols = blocks.first().map_or(0, |b| b.cols);
        let mut data = Vec::new();
        let mut rows = 0;
        for b in blocks {
            assert_eq!(b.cols, cols);
            rows += b.rows;
            data.extend(b.data.iter().cloned());
        }
        Matrix { rows, cols, data }
    }
}

impl<T: Clone + Zero + One> Matrix<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix::from_fn(rows, cols, |_, _| T::zero())
    }

    pub fn identity(n: usize) -> Self {
        Matrix::from_fn(n, n, |i, j| if i == j { T::one() } else { T::zero() })
    }
}

impl<T> Matrix<T>
where
    T: Clone + Zero,
    for<'a> &'a T: Mul<&'a T, Output = T> + Add<&'a T, Output = T>,
{
    pub fn matmul(&self, other: &Matrix<T>) -> Matrix<T> {
        assert_eq!(self.cols, other.rows, "matmul shape mismatch");
        Matrix::from_fn(self.rows, other.cols, |i, j| {
            let mut acc = T::zero();
            for k in 0..self.cols {
                let p = &self[(i, k)] * &other[(k, j)];
                acc = &acc + &p;
            }
            acc
        })
    }

    /// Row vector times matrix.
    pub fn left_mul(&self, v: &[T]) -> Vec<T> {
        assert_eq!(v.len(), self.rows);
        (0..self.cols)
            .map(|j| {
                let mut acc = T::zero();
                for (i, vi) in v.iter().enumerate() {
                    let p = vi * &self[(i, j)];
                    acc = &acc + &p;
                }
                acc
            })
            .collect()
    }

    pub fn col_sums(&self) -> Vec<T> {
        (0..self.cols)
            .map(|j| {
                let mut acc = T::zero();
                for i in 0..self.rows {
                    acc = &acc + &self[(i, j)];
                }
                acc
            })
            .collect()
    }

    /// Sum of the rows in `range`.
    pub fn row_sum(&self, range: std::ops::Range<usize>) -> Vec<T> {
        (0..self.cols)
            .map(|j| {
                let mut acc = T::zero();
                for i in range.clone() {
                    acc = &acc + &self[(i, j)];
                }
                acc
            })
            .collect()
    }
}

impl<T> Index<(usize, usize)> for Matrix<T> {
    type Output = T;
    fn index(&self, (i, j): (usize, usize)) -> &T {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[i * self.cols + j]
    }
}

impl<T> IndexMut<(usize, usize)> for Matrix<T> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut T {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[i * self.cols + j]
    }
}

pub type ScalarMatrix = Matrix<Scalar>;
pub type RatMatrix = Matrix<Rational>;

impl Matrix<Scalar> {
    pub fn is_exact(&self) -> bool {
        self.data.iter().all(Scalar::is_exact)
    }

    pub fn to_f64(&self) -> Matrix<f64> {
        self.map(Scalar::to_f64)
    }

    /// `None` if any entry is a float.
    pub fn to_rational(&self) -> Option<RatMatrix> {
        if !self.is_exact() {
            return None;
        }
        Some(self.map(|s| s.as_rational().cloned().expect("checked exact")))
    }

    pub fn convert(&self, backend: Backend) -> Self {
        self.map(|s| backend.convert(s))
    }

    pub fn approx_eq(&self, other: &Self, backend: Backend) -> bool {
        self.shape() == other.shape() && self.data.iter().zip(&other.data).all(|(a, b)| backend.eq(a, b))
    }

    pub fn from_rational(m: &RatMatrix) -> Self {
        m.map(|r| Scalar::Exact(r.clone()))
    }

    pub fn from_f64(m: &Matrix<f64>) -> Self {
        m.map(|v| Scalar::Float(*v))
    }

    pub fn scale(&self, s: &Scalar) -> Self {
        self.map(|x| x * s)
    }
}

impl Matrix<f64> {
    pub fn to_nalgebra(&self) -> nalgebra::DMatrix<f64> {
        nalgebra::DMatrix::from_row_slice(self.rows, self.cols, &self.data)
    }

    pub fn from_nalgebra(m: &nalgebra::DMatrix<f64>) -> Self {
        Matrix::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)])
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.data.iter().zip(&other.data).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::rat;

    #[test]
    fn matmul_and_transpose() {
        let a = Matrix::from_rows(vec![vec![rat(1, 2), rat(1, 1)], vec![rat(0, 1), rat(2, 1)]]);
        let b = Matrix::<Rational>::identity(2);
        assert_eq!(a.matmul(&b), a);
        assert_eq!(a.transpose()[(1, 0)], rat(1, 1));
        assert_eq!(a.col_sums(), vec![rat(1, 2), rat(3, 1)]);
        assert_eq!(a.left_mul(&[rat(1, 1), rat(1, 1)]), vec![rat(1, 2), rat(3, 1)]);
    }

    #[test]
    fn select_submatrix() {
        let a = Matrix::from_fn(3, 3, |i, j| (i * 3 + j) as f64);
        let s = a.select(&[0, 2], &[1]);
        assert_eq!(s.to_rows(), vec![vec![1.0], vec![7.0]]);
    }
}
