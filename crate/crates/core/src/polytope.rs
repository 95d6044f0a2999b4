//! The polytope `Q = colspace(C) ∩ simplex` of a merged COPE matrix, by double description.
//!
//! Points of `Q` are `x = B y` with `B` a basis of the column space; the half-space form is
//! `B y >= 0` together with `1^T B y = 1`. Because `B` has full column rank, the cone
//! `{y : B y >= 0}` is pointed and its extreme rays, scaled to unit sum, are the vertices of `Q`.

use std::collections::BTreeSet;

use num_traits::{One, Signed, Zero};

use crate::cope::CopeMatrix;
use crate::error::{CopeError, Result};
use crate::linalg;
use crate::lp::Constraints;
use crate::matrix::{Matrix, RatMatrix};
use crate::scalar::Rational;

/// Largest ambient dimension handled; zero sets are stored as 64-bit masks.
pub const MAX_AMBIENT_DIM: usize = 64;

#[derive(Clone, Debug, PartialEq)]
pub struct SpanSimplexPolytope {
    /// Total outcome count of the merged matrix.
    pub ambient_dim: usize,
    /// Columns span the column space (pivot columns of the merged matrix).
    pub basis: RatMatrix,
    /// Vertices in ambient coordinates, each nonnegative with unit sum, in lexicographic order.
    pub vertices: Vec<Vec<Rational>>,
}

impl SpanSimplexPolytope {
    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    /// Vertices as the columns of a matrix.
    pub fn vertex_matrix(&self) -> RatMatrix {
        Matrix::from_fn(self.ambient_dim, self.vertices.len(), |i, v| self.vertices[v][i].clone())
    }

    /// Whether `x` lies in `Q` (column space, nonnegative, unit sum).
    pub fn contains(&self, x: &[Rational]) -> bool {
        if x.len() != self.ambient_dim || x.iter().any(Signed::is_negative) {
            return false;
        }
        if x.iter().fold(Rational::zero(), |a, v| a + v) != Rational::one() {
            return false;
        }
        let aug = Matrix::from_fn(self.ambient_dim, self.basis.cols() + 1, |i, j| {
            if j < self.basis.cols() {
                self.basis[(i, j)].clone()
            } else {
                x[i].clone()
            }
        });
        linalg::rank_exact(&aug) == self.basis.cols()
    }

    /// Whether `x` is a convex combination of the vertices.
    pub fn hull_contains(&self, x: &[Rational]) -> bool {
        let n = self.vertices.len();
        let mut cons = Constraints::new(n);
        for (i, xi) in x.iter().enumerate().take(self.ambient_dim) {
            cons.push((0..n).map(|v| (v, self.vertices[v][i].clone())), xi.clone());
        }
        cons.push((0..n).map(|v| (v, Rational::one())), Rational::one());
        cons.solve().is_some()
    }

    /// Zero set of each vertex as a bit mask over ambient coordinates.
    pub fn vertex_zero_masks(&self) -> Vec<u64> {
        self.vertices.iter().map(|v| zero_mask(v)).collect()
    }

    /// Every nonempty face. The whole polytope comes first; the rest are ordered by
    /// decreasing size, then lexicographically by vertex list.
    pub fn faces(&self) -> Vec<Face> {
        let masks = self.vertex_zero_masks();
        let mut zero_sets: BTreeSet<u64> = masks.iter().copied().collect();
        loop {
            let current: Vec<u64> = zero_sets.iter().copied().collect();
            let mut grew = false;
            for (a, &x) in current.iter().enumerate() {
                for &y in &current[a + 1..] {
                    grew |= zero_sets.insert(x & y);
                }
            }
            if !grew {
                break;
            }
        }
        let mut faces: Vec<Face> = zero_sets.into_iter().map(|z| self.face_of_mask(z)).collect();
        faces.sort_by(|a, b| b.vertices.len().cmp(&a.vertices.len()).then_with(|| a.vertices.cmp(&b.vertices)));
        faces.dedup_by(|a, b| a.vertices == b.vertices);
        faces
    }

    /// The face cut out by `x_i = 0` for every `i` in `mask`, with its zero set made exact.
    pub fn face_of_mask(&self, mask: u64) -> Face {
        let masks = self.vertex_zero_masks();
        let vertices: Vec<usize> = (0..masks.len()).filter(|&v| masks[v] & mask == mask).collect();
        let zero_mask = vertices.iter().fold(u64::MAX, |z, &v| z & masks[v]);
        Face { vertices, zero_mask }
    }

    /// The smallest face containing a point of `Q`.
    pub fn minimal_face(&self, x: &[Rational]) -> Face {
        self.face_of_mask(zero_mask(x))
    }
}

/// A face of `Q`: its vertices and the coordinates vanishing on all of it.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Face {
    pub vertices: Vec<usize>,
    pub zero_mask: u64,
}

impl Face {
    pub fn contains_face(&self, other: &Face) -> bool {
        other.zero_mask & self.zero_mask == self.zero_mask
    }
}

pub fn zero_mask(x: &[Rational]) -> u64 {
    x.iter().enumerate().filter(|(_, v)| v.is_zero()).fold(0u64, |m, (i, _)| m | (1 << i))
}

/// `Q` for the merged form of `c`. Requires exact entries and at most [`MAX_AMBIENT_DIM`] outcomes.
pub fn span_simplex_polytope(c: &CopeMatrix) -> Result<SpanSimplexPolytope> {
    let merged = c.merge_measurements();
    let data = merged
        .to_rational()
        .ok_or_else(|| CopeError::Precondition("vertex enumeration needs the exact backend".into()))?;
    let ambient_dim = data.rows();
    if ambient_dim > MAX_AMBIENT_DIM {
        return Err(CopeError::Guard(format!(
            "ambient dimension {ambient_dim} exceeds the vertex-enumeration limit {MAX_AMBIENT_DIM}"
        )));
    }
    let (basis, _, _) = linalg::rank_factorization(&data);
    let rays = extreme_rays(&basis);
    let mut vertices: Vec<Vec<Rational>> = rays
        .iter()
        .map(|y| {
            let x: Vec<Rational> = (0..ambient_dim)
                .map(|i| (0..basis.cols()).fold(Rational::zero(), |a, t| a + &basis[(i, t)] * &y[t]))
                .collect();
            let s = x.iter().fold(Rational::zero(), |a, v| a + v);
            x.into_iter().map(|v| v / &s).collect()
        })
        .collect();
    vertices.sort();
    vertices.dedup();
    Ok(SpanSimplexPolytope { ambient_dim, basis, vertices })
}

fn dot(a: &[Rational], y: &[Rational]) -> Rational {
    a.iter().zip(y).fold(Rational::zero(), |acc, (x, v)| acc + x * v)
}

/// Extreme rays of the pointed cone `{y : A y >= 0}` where `A` has full column rank.
fn extreme_rays(a: &RatMatrix) -> Vec<Vec<Rational>> {
    let (m, r) = a.shape();
    if r == 0 {
        return Vec::new();
    }
    let rows: Vec<Vec<Rational>> = a.to_rows();
    // Start from r independent constraints: the cone they cut out is simplicial.
    let (_, pivots) = linalg::rref(&a.transpose());
    let a0 = a.select_rows(&pivots);
    let inv = linalg::inverse_exact(&a0).expect("pivot rows are independent");
    let mut rays: Vec<Vec<Rational>> = (0..r).map(|t| inv.col(t)).collect();
    let mut processed: Vec<usize> = pivots.clone();

    let zero_set = |y: &[Rational], done: &[usize]| -> u64 {
        done.iter().filter(|&&i| dot(&rows[i], y).is_zero()).fold(0u64, |mk, &i| mk | (1 << i))
    };

    for i in (0..m).filter(|i| !pivots.contains(i)) {
        let vals: Vec<Rational> = rays.iter().map(|y| dot(&rows[i], y)).collect();
        let pos: Vec<usize> = (0..rays.len()).filter(|&k| vals[k].is_positive()).collect();
        let neg: Vec<usize> = (0..rays.len()).filter(|&k| vals[k].is_negative()).collect();
        if neg.is_empty() {
            processed.push(i);
            continue;
        }
        let zs: Vec<u64> = rays.iter().map(|y| zero_set(y, &processed)).collect();
        let mut next: Vec<Vec<Rational>> =
            (0..rays.len()).filter(|&k| !vals[k].is_negative()).map(|k| rays[k].clone()).collect();
        for &p in &pos {
            for &n in &neg {
                let common = zs[p] & zs[n];
                if (common.count_ones() as usize) + 2 < r {
                    continue;
                }
                let adjacent = (0..rays.len()).all(|o| o == p || o == n || zs[o] & common != common);
                if !adjacent {
                    continue;
                }
                let new: Vec<Rational> =
                    rays[p].iter().zip(&rays[n]).map(|(yp, yn)| &vals[p] * yn - &vals[n] * yp).collect();
                next.push(primitive(new));
            }
        }
        rays = next;
        processed.push(i);
    }
    rays
}

/// Scales a ray so its entries are coprime integers (keeps orientation).
fn primitive(y: Vec<Rational>) -> Vec<Rational> {
    use num_integer::Integer;
    let den = y.iter().fold(num_bigint::BigInt::one(), |acc, v| acc.lcm(v.denom()));
    let ints: Vec<num_bigint::BigInt> = y.iter().map(|v| v.numer() * (&den / v.denom())).collect();
    let g = ints.iter().fold(num_bigint::BigInt::zero(), |acc, v| acc.gcd(v));
    if g.is_zero() {
        return y;
    }
    ints.into_iter().map(|v| Rational::from_integer(v / &g)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::rat;

    #[test]
    fn identity_polytope_is_the_simplex() {
        let q = span_simplex_polytope(&CopeMatrix::identity(3)).unwrap();
        assert_eq!(q.num_vertices(), 3);
        let faces = q.faces();
        assert_eq!(faces.len(), 7);
        assert_eq!(faces[0].vertices, vec![0, 1, 2]);
        assert!(faces[0].contains_face(&faces[6]));
        assert!(q.contains(&[rat(1, 3), rat(1, 3), rat(1, 3)]));
        assert!(q.hull_contains(&[rat(1, 2), rat(1, 2), rat(0, 1)]));
    }
}
