//! Constructions of preGPTs, GPTs, quasiprobabilistic and trivial ontological models.

use nalgebra::DMatrix;
use num_traits::One;

use crate::cope::CopeMatrix;
use crate::error::{CopeError, Result};
use crate::linalg;
use crate::matrix::{Matrix, ScalarMatrix};
use crate::model::{ones, ModelFactorization, ModelKind};
use crate::scalar::{Backend, Scalar, DEFAULT_EPS};

/// Float backend used when an SVD is applied to an exact matrix.
fn float_backend(c: &CopeMatrix) -> Backend {
    match c.backend() {
        Backend::Exact => Backend::Float { eps: DEFAULT_EPS },
        be => be,
    }
}

/// Full `m x m` orthonormal basis extending the columns of `thin`.
fn complete_basis(thin: &DMatrix<f64>) -> DMatrix<f64> {
    let m = thin.nrows();
    let mut cols: Vec<nalgebra::DVector<f64>> = thin.column_iter().map(|c| c.into_owned()).collect();
    let mut e = 0;
    while cols.len() < m && e < m {
        let mut v = nalgebra::DVector::<f64>::zeros(m);
        v[e] = 1.0;
        for _ in 0..2 {
            for c in &cols {
                let p = c.dot(&v);
                v -= c * p;
            }
        }
        let n = v.norm();
        if n > 1e-8 {
            cols.push(v / n);
        }
        e += 1;
    }
    DMatrix::from_columns(&cols)
}

/// PreGPT from the singular value decomposition: effects `U` (`m x m`), states `Sigma * V^T`.
///
/// Columns of `U` past the rank carry no statistics; each is shifted by the smallest
/// per-block constant that makes all blocks sum to one common value.
pub fn pregpt_from_svd(c: &CopeMatrix) -> ModelFactorization {
    let be = float_backend(c);
    let a = c.data().to_f64().to_nalgebra();
    let (m, n) = a.shape();
    let svd = a.clone().svd(true, true);
    let (u_thin, v_t) = (svd.u.expect("requested U"), svd.v_t.expect("requested V^T"));
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&i, &j| svd.singular_values[j].total_cmp(&svd.singular_values[i]));
    let sigma: Vec<f64> = order.iter().map(|&i| svd.singular_values[i]).collect();
    let u_sorted = DMatrix::from_columns(&order.iter().map(|&i| u_thin.column(i).into_owned()).collect::<Vec<_>>());
    let v_sorted = DMatrix::from_rows(&order.iter().map(|&i| v_t.row(i).into_owned()).collect::<Vec<_>>());
    let mut u = complete_basis(&u_sorted);
    let rank = linalg::rank_float(&c.data().to_f64(), be.eps().max(f64::EPSILON));

    let mut b = DMatrix::<f64>::zeros(m, n);
    for i in 0..rank {
        for k in 0..n {
            b[(i, k)] = sigma[i] * v_sorted[(i, k)];
        }
    }
    for i in 0..m {
        let s: f64 = u.column(i).sum();
        let first = u.column(i).iter().copied().find(|v| v.abs() > 1e-12).unwrap_or(0.0);
        if s < -1e-12 || (s.abs() <= 1e-12 && first < 0.0) {
            u.column_mut(i).neg_mut();
            b.row_mut(i).neg_mut();
        }
    }

    let ranges: Vec<std::ops::Range<usize>> = (0..c.num_measurements()).map(|j| c.block_range(j)).collect();
    for i in rank..m {
        let sums: Vec<f64> = ranges.iter().map(|r| r.clone().map(|row| u[(row, i)]).sum()).collect();
        let weights: f64 = ranges.iter().map(|r| 1.0 / r.len() as f64).sum();
        let target = ranges.iter().zip(&sums).map(|(r, s)| s / r.len() as f64).sum::<f64>() / weights;
        for (r, s) in ranges.iter().zip(&sums) {
            let shift = (target - s) / r.len() as f64;
            for row in r.clone() {
                u[(row, i)] += shift;
            }
        }
    }

    let effects = ScalarMatrix::from_f64(&Matrix::from_nalgebra(&u));
    let states = ScalarMatrix::from_f64(&Matrix::from_nalgebra(&b));
    ModelFactorization::new(effects, states, c.block_sizes(), ModelKind::PreGpt, be).expect("shapes agree")
}

/// Equirank real factorization `C = M S` with inner dimension `rank C`.
///
/// Exact matrices use `M` = the pivot columns of `C` and `S` = the nonzero rows of its
/// reduced echelon form; since the columns of `M` are columns of `C`, every block of `M`
/// sums to the all-ones unit. Float matrices truncate [`pregpt_from_svd`].
pub fn gpt(c: &CopeMatrix) -> ModelFactorization {
    if let Some(r) = c.to_rational() {
        let (basis, coords, _) = linalg::rank_factorization(&r);
        return ModelFactorization::new(
            ScalarMatrix::from_rational(&basis),
            ScalarMatrix::from_rational(&coords),
            c.block_sizes(),
            ModelKind::Gpt,
            Backend::Exact,
        )
        .expect("shapes agree");
    }
    let pre = pregpt_from_svd(c);
    let r = c.rank();
    let keep: Vec<usize> = (0..r).collect();
    let effects = pre.effects.select_cols(&keep);
    let states = pre.states.select_rows(&keep);
    ModelFactorization::new(effects, states, c.block_sizes(), ModelKind::Gpt, pre.backend).expect("shapes agree")
}

/// Quasiprobabilistic model from a GPT, using the states at `tom_columns` as the change of basis.
pub fn quasi_from_gpt(g: &ModelFactorization, tom_columns: &[usize]) -> Result<ModelFactorization> {
    if tom_columns.len() != g.inner_dim() {
        return Err(CopeError::Precondition(format!(
            "need {} tomographic columns, got {}",
            g.inner_dim(),
            tom_columns.len()
        )));
    }
    if let Some(&k) = tom_columns.iter().find(|&&k| k >= g.states.cols()) {
        return Err(CopeError::Precondition(format!("state column {k} out of range")));
    }
    let t = g.states.select_cols(tom_columns);
    quasi_from_gpt_with_transform(g, &t)
        .map_err(|_| CopeError::Singular(format!("state columns {tom_columns:?} are not linearly independent")))
}

/// Quasiprobabilistic model `(M T, T^-1 S)` for an arbitrary invertible `T` normalizing every state.
pub fn quasi_from_gpt_with_transform(g: &ModelFactorization, t: &ScalarMatrix) -> Result<ModelFactorization> {
    let r = g.inner_dim();
    if t.shape() != (r, r) {
        return Err(CopeError::Dimension(format!("transform must be {r}x{r}")));
    }
    let be = g.backend.join(if t.is_exact() { Backend::Exact } else { Backend::float() });
    let inv = linalg::inverse(t, be).ok_or_else(|| CopeError::Singular("transform is not invertible".into()))?;
    let effects = g.effects.matmul(t);
    let states = inv.matmul(&g.states);
    let one = Scalar::one();
    if !states.col_sums().iter().all(|s| be.eq(s, &one)) {
        return Err(CopeError::Precondition("transform does not normalize every state".into()));
    }
    let mut q = ModelFactorization::new(effects, states, g.block_sizes.clone(), ModelKind::Quasiprobabilistic, be)?;
    q.unit = ones(r, be);
    Ok(q)
}

/// `C = C * I`: every preparation is its own ontic state.
pub fn trivial_ontological(c: &CopeMatrix) -> ModelFactorization {
    let n = c.num_preparations();
    let be = c.backend();
    let mut m = ModelFactorization::new(
        c.data().clone(),
        Matrix::identity(n).convert(be),
        c.block_sizes(),
        ModelKind::Ontological,
        be,
    )
    .expect("shapes agree");
    m.unit = ones(n, be);
    m
}

/// Ontological model read off a GPT: response functions evaluate each effect on every
/// extremal state (the columns of `C`), and each extremal state maps to a single ontic point.
///
/// The single-valued assignment on extremal states reproduces [`trivial_ontological`].
/// Mixed states would need set-valued assignments, which are not modelled.
pub fn gpt_to_trivial_ontological(g: &ModelFactorization, c: &CopeMatrix) -> Result<ModelFactorization> {
    let be = c.backend().join(g.backend);
    if g.effects.rows() != c.num_rows() || g.states.cols() != c.num_preparations() {
        return Err(CopeError::Dimension("GPT does not match the matrix".into()));
    }
    if !g.reconstruct().approx_eq(c.data(), be) {
        return Err(CopeError::Precondition("GPT does not reproduce the matrix".into()));
    }
    Ok(trivial_ontological(c))
}

/// `(states_fiducial, effects_fiducial)`: whether preparations, respectively distinct
/// outcome rows, outnumber the rank.
pub fn fiducial_tomography_test(c: &CopeMatrix) -> (bool, bool) {
    let r = c.rank();
    let distinct_rows = c.find_equivalences().row_classes.len();
    (c.num_preparations() > r, distinct_rows > r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::classify_model;

    #[test]
    fn one_by_one_pregpt_is_trivial() {
        let c = CopeMatrix::identity(1);
        let p = pregpt_from_svd(&c);
        assert_eq!(p.effects.to_f64().to_rows(), vec![vec![1.0]]);
        assert_eq!(p.states.to_f64().to_rows(), vec![vec![1.0]]);
        assert_eq!(p.unit[0].to_f64(), 1.0);
    }

    #[test]
    fn exact_gpt_of_identity() {
        let c = CopeMatrix::identity(3);
        let g = gpt(&c);
        let rep = classify_model(&c, &g).unwrap();
        assert!(rep.is(ModelKind::Gpt));
        assert_eq!(g.inner_dim(), 3);
    }

    #[test]
    fn singular_tomographic_choice_is_rejected() {
        let c = CopeMatrix::identity(2);
        let g = gpt(&c);
        assert!(matches!(quasi_from_gpt(&g, &[0, 0]), Err(CopeError::Singular(_))));
        assert!(quasi_from_gpt(&g, &[0]).is_err());
    }
}
