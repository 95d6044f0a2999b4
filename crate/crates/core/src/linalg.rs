//! Exact rational linear algebra plus the float (SVD) rank used for generated theories.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Zero};

use crate::matrix::{Matrix, RatMatrix, ScalarMatrix};
use crate::scalar::{Backend, Rational};

/// Scales every row by the lcm of its denominators, giving an integer matrix
/// with the same row space.
fn integer_rows(m: &RatMatrix) -> Vec<Vec<BigInt>> {
    (0..m.rows())
        .map(|i| {
            let row = m.row(i);
            let lcm = row.iter().fold(BigInt::one(), |acc, r| acc.lcm(r.denom()));
            row.iter().map(|r| r.numer() * (&lcm / r.denom())).collect()
        })
        .collect()
}

/// Rank by fraction-free (Bareiss) elimination.
pub fn rank_exact(m: &RatMatrix) -> usize {
    let mut a = integer_rows(m);
    let rows = m.rows();
    let cols = m.cols();
    let mut rank = 0;
    let mut prev = BigInt::one();
    for col in 0..cols {
        if rank == rows {
            break;
        }
        let Some(p) = (rank..rows).find(|&r| !a[r][col].is_zero()) else {
            continue;
        };
        a.swap(rank, p);
        for r in rank + 1..rows {
            for c in col + 1..cols {
                let v = &a[rank][col] * &a[r][c] - &a[r][col] * &a[rank][c];
                a[r][c] = v / &prev;
            }
            a[r][col] = BigInt::zero();
        }
        prev = a[rank][col].clone();
        rank += 1;
    }
    rank
}

/// Reduced row echelon form and the pivot columns.
pub fn rref(m: &RatMatrix) -> (RatMatrix, Vec<usize>) {
    let mut a = m.clone();
    let (rows, cols) = a.shape();
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let Some(p) = (r..rows).find(|&i| !a[(i, c)].is_zero()) else {
            continue;
        };
        if p != r {
            for j in 0..cols {
                let tmp = a[(r, j)].clone();
                a[(r, j)] = a[(p, j)].clone();
                a[(p, j)] = tmp;
            }
        }
        let inv = a[(r, c)].recip();
        for j in 0..cols {
            a[(r, j)] = &a[(r, j)] * &inv;
        }
        for i in 0..rows {
            if i != r && !a[(i, c)].is_zero() {
                let f = a[(i, c)].clone();
                for j in 0..cols {
                    let v = &a[(r, j)] * &f;
                    a[(i, j)] = &a[(i, j)] - &v;
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    (a, pivots)
}

/// Rank factorization `m = basis * coords` with `basis` the pivot columns of `m`
/// and `coords` the nonzero rows of its RREF.
pub fn rank_factorization(m: &RatMatrix) -> (RatMatrix, RatMatrix, Vec<usize>) {
    let (r, pivots) = rref(m);
    let basis = m.select_cols(&pivots);
    let keep: Vec<usize> = (0..pivots.len()).collect();
    let coords = r.select_rows(&keep);
    (basis, coords, pivots)
}

/// Basis of the right null space, as columns.
pub fn nullspace(m: &RatMatrix) -> RatMatrix {
    let (r, pivots) = rref(m);
    let cols = m.cols();
    let free: Vec<usize> = (0..cols).filter(|c| !pivots.contains(c)).collect();
    let mut out = Matrix::<Rational>::zeros(cols, free.len());
    for (k, &f) in free.iter().enumerate() {
        out[(f, k)] = Rational::one();
        for (row, &p) in pivots.iter().enumerate() {
            out[(p, k)] = -r[(row, f)].clone();
        }
    }
    out
}

/// Gauss-Jordan inverse; `None` when singular or non-square.
pub fn inverse_exact(m: &RatMatrix) -> Option<RatMatrix> {
    let n = m.rows();
    if n != m.cols() {
        return None;
    }
    let aug = Matrix::from_fn(n, 2 * n, |i, j| {
        if j < n {
            m[(i, j)].clone()
        } else if j - n == i {
            Rational::one()
        } else {
            Rational::zero()
        }
    });
    let (r, pivots) = rref(&aug);
    if pivots.len() < n || pivots[n - 1] != n - 1 {
        return None;
    }
    let rows: Vec<usize> = (0..n).collect();
    let cols: Vec<usize> = (n..2 * n).collect();
    Some(r.select(&rows, &cols))
}

/// Numerical rank: singular values above `eps * sigma_max`.
pub fn rank_float(m: &Matrix<f64>, eps: f64) -> usize {
    if m.rows() == 0 || m.cols() == 0 {
        return 0;
    }
    let svd = m.to_nalgebra().svd(false, false);
    let sv = svd.singular_values;
    let max = sv.iter().cloned().fold(0.0, f64::max);
    if max == 0.0 {
        return 0;
    }
    sv.iter().filter(|&&s| s > eps * max).count()
}

pub fn rank(m: &ScalarMatrix, backend: Backend) -> usize {
    match (backend, m.to_rational()) {
        (Backend::Exact, Some(r)) => rank_exact(&r),
        (be, _) => rank_float(&m.to_f64(), be.eps().max(f64::EPSILON)),
    }
}

pub fn inverse(m: &ScalarMatrix, backend: Backend) -> Option<ScalarMatrix> {
    if let (Backend::Exact, Some(r)) = (backend, m.to_rational()) {
        return inverse_exact(&r).map(|inv| ScalarMatrix::from_rational(&inv));
    }
    if m.rows() != m.cols() || rank_float(&m.to_f64(), backend.eps().max(f64::EPSILON)) < m.rows() {
        return None;
    }
    let inv = m.to_f64().to_nalgebra().try_inverse()?;
    Some(ScalarMatrix::from_f64(&Matrix::from_nalgebra(&inv)))
}

/// Indices of a maximal linearly independent set of columns, chosen greedily left to right.
pub fn independent_columns(m: &ScalarMatrix, backend: Backend) -> Vec<usize> {
    if let (Backend::Exact, Some(r)) = (backend, m.to_rational()) {
        return rref(&r).1;
    }
    let mut chosen: Vec<usize> = Vec::new();
    let mut current = 0;
    for j in 0..m.cols() {
        let mut trial = chosen.clone();
        trial.push(j);
        let r = rank(&m.select_cols(&trial), backend);
        if r > current {
            chosen = trial;
            current = r;
        }
    }
    chosen
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{rat, rat_int};

    fn m(rows: &[&[i64]]) -> RatMatrix {
        Matrix::from_rows(rows.iter().map(|r| r.iter().map(|&v| rat_int(v)).collect()).collect())
    }

    #[test]
    fn bareiss_rank_matches_textbook_cases() {
        assert_eq!(rank_exact(&m(&[&[1, 2], &[2, 4]])), 1);
        assert_eq!(rank_exact(&m(&[&[1, 0, 0], &[0, 1, 0], &[0, 0, 1]])), 3);
        assert_eq!(rank_exact(&m(&[&[0, 0], &[0, 0]])), 0);
        assert_eq!(rank_exact(&m(&[&[0, 1, 1], &[1, 0, 1], &[1, 1, 2]])), 2);
    }

    #[test]
    fn rank_factorization_reproduces() {
        let a = m(&[&[1, 0, 0, 1], &[0, 1, 1, 0], &[1, 0, 1, 0], &[0, 1, 0, 1]]);
        let (b, s, piv) = rank_factorization(&a);
        assert_eq!(piv.len(), 3);
        assert_eq!(b.matmul(&s), a);
    }

    #[test]
    fn nullspace_is_annihilated() {
        let a = m(&[&[1, 1, 1, 1], &[0, 0, -1, 1], &[-1, 1, 0, 0]]);
        let n = nullspace(&a);
        assert_eq!(n.cols(), 1);
        assert!(a.matmul(&n).iter().all(Zero::is_zero));
    }

    #[test]
    fn inverse_roundtrip_and_singular() {
        let a = Matrix::from_rows(vec![vec![rat(1, 2), rat(1, 1)], vec![rat(0, 1), rat(2, 1)]]);
        let inv = inverse_exact(&a).unwrap();
        assert_eq!(a.matmul(&inv), Matrix::identity(2));
        assert!(inverse_exact(&m(&[&[1, 2], &[2, 4]])).is_none());
    }

    #[test]
    fn float_rank_thresholds_relative() {
        let a = Matrix::from_rows(vec![vec![1.0, 0.0], vec![0.0, 1e-12]]);
        assert_eq!(rank_float(&a, 1e-9), 1);
        assert_eq!(rank_float(&a, 1e-14), 2);
    }
}
