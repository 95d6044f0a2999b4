//! Heuristic search for (equirank) nonnegative factorizations with exact re-verification.
//!
//! Each restart runs alternating projected gradient on `C ~ R P`, keeping every block of
//! each `R` column and every `P` column on its probability simplex. A converged iterate is
//! turned into a candidate by fixing one factor (snapped to nearby rationals for exact
//! input) and solving a linear program for the other. Only candidates that classify as
//! the requested model class are returned.

use std::ops::Range;

use nalgebra::DMatrix;
use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::cope::CopeMatrix;
use crate::linalg;
use crate::lp::{Constraints, LpField};
use crate::matrix::{Matrix, RatMatrix, ScalarMatrix};
use crate::model::{classify_model, ones, ModelFactorization, ModelKind};
use crate::parallel;
use crate::scalar::{Backend, Rational};

#[derive(Clone, Debug, PartialEq)]
pub struct NmfOptions {
    pub inner_dim: usize,
    pub max_restarts: usize,
    pub max_iterations: usize,
    pub seed: u64,
    /// Largest distance at which a float entry is replaced by a nearby small-denominator rational.
    pub snap_tolerance: f64,
    /// Upper end of the inner-dimension search in [`enmf`]; `None` means `rank + 3`.
    pub max_inner_dim: Option<usize>,
    /// Worker threads for restarts; `None` uses all cores, subject to `COPEKIT_THREADS`.
    pub threads: Option<usize>,
}

impl Default for NmfOptions {
    fn default() -> Self {
        NmfOptions {
            inner_dim: 1,
            max_restarts: 8,
            max_iterations: 3000,
            seed: 0,
            snap_tolerance: 1e-6,
            max_inner_dim: None,
            threads: None,
        }
    }
}

impl NmfOptions {
    pub fn with_inner_dim(k: usize) -> Self {
        NmfOptions { inner_dim: k, ..Self::default() }
    }
}

/// Restarts are evaluated in fixed-size batches so that the chosen result does not
/// depend on how many threads ran them.
const RESTART_BATCH: usize = 4;

/// Nonnegative factorization with inner dimension `opts.inner_dim`, as an ontological model.
pub fn nmf(c: &CopeMatrix, opts: &NmfOptions) -> Option<ModelFactorization> {
    search(c, opts, opts.inner_dim, false)
}

/// Equirank nonnegative factorization, trying `k = rank, rank + 1, ...` up to the option bound.
pub fn enmf(c: &CopeMatrix, opts: &NmfOptions) -> Option<ModelFactorization> {
    let r = c.rank();
    let hi = opts.max_inner_dim.unwrap_or(r + 3).max(r);
    (r.max(1)..=hi).find_map(|k| search(c, opts, k, true))
}

struct Problem {
    c: DMatrix<f64>,
    ranges: Vec<Range<usize>>,
    exact: Option<RatMatrix>,
    backend: Backend,
    equirank: bool,
    /// Orthogonal projector onto the column space of `C`.
    col_proj: DMatrix<f64>,
}

fn search(cm: &CopeMatrix, opts: &NmfOptions, k: usize, equirank: bool) -> Option<ModelFactorization> {
    let rank = cm.rank();
    if k == 0 || k < rank || opts.max_restarts == 0 {
        return None;
    }
    let c = cm.data().to_f64().to_nalgebra();
    let problem = Problem {
        col_proj: column_projector(&c, rank),
        c,
        ranges: (0..cm.num_measurements()).map(|j| cm.block_range(j)).collect(),
        exact: cm.to_rational(),
        backend: cm.backend(),
        equirank,
    };
    let kind = if equirank { ModelKind::NoncontextualOntological } else { ModelKind::Ontological };

    let mut start = 0;
    while start < opts.max_restarts {
        let end = (start + RESTART_BATCH).min(opts.max_restarts);
        let results = parallel::map(end - start, opts.threads, |i| {
            let idx = start + i;
            restart(&problem, cm, opts, k, idx).map(|(res, m)| (res, idx, m))
        });
        let best = results
            .into_iter()
            .flatten()
            .min_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        if let Some((_, _, m)) = best {
            return Some(m.with_kind(kind));
        }
        start = end;
    }
    None
}

fn restart(p: &Problem, cm: &CopeMatrix, opts: &NmfOptions, k: usize, idx: usize) -> Option<(f64, ModelFactorization)> {
    let (m, n) = p.c.shape();
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed.wrapping_mul(0x9E37_79B9_7F4A_7C15).wrapping_add(idx as u64));

    let (mut r, mut h) = if idx == 0 && k >= n {
        // Trivial model padded with duplicate columns carrying no weight.
        let r = DMatrix::from_fn(m, k, |i, t| p.c[(i, t % n)]);
        let h = DMatrix::from_fn(k, n, |t, j| if t == j { 1.0 } else { 0.0 });
        (r, h)
    } else {
        let mut r = DMatrix::<f64>::zeros(m, k);
        for t in 0..k {
            let src = rng.gen_range(0..n);
            for range in &p.ranges {
                let noise = random_simplex(&mut rng, range.len());
                for (o, i) in range.clone().enumerate() {
                    r[(i, t)] = 0.5 * p.c[(i, src)] + 0.5 * noise[o];
                }
            }
        }
        let mut h = DMatrix::<f64>::zeros(k, n);
        for j in 0..n {
            let w = random_simplex(&mut rng, k);
            for t in 0..k {
                h[(t, j)] = w[t];
            }
        }
        (r, h)
    };
    if p.equirank {
        project_response(&mut r, p);
    }

    let mut last = f64::INFINITY;
    for it in 0..opts.max_iterations {
        let rtr = r.transpose() * &r;
        let step = 1.0 / spectral_bound(&rtr);
        let grad = &rtr * &h - r.transpose() * &p.c;
        h -= grad * step;
        project_columns(&mut h);

        let hht = &h * h.transpose();
        let step = 1.0 / spectral_bound(&hht);
        let grad = &r * &hht - &p.c * h.transpose();
        r -= grad * step;
        project_blocks(&mut r, &p.ranges);
        if p.equirank {
            project_response(&mut r, p);
        }
        if it % 50 == 49 {
            let res = (&r * &h - &p.c).norm_squared();
            // Converged, or stalled at a nonzero local minimum.
            if res < 1e-24 || res > last * (1.0 - 1e-3) {
                break;
            }
            last = res;
        }
    }

    let model = complete(p, cm, &r, &h, opts.snap_tolerance)?;
    let residual = model.reconstruct().to_f64().max_abs_diff(&cm.data().to_f64());
    Some((residual, canonicalize(model)))
}

/// Turns a float iterate into a verified model, or `None`.
fn complete(p: &Problem, cm: &CopeMatrix, r: &DMatrix<f64>, h: &DMatrix<f64>, tol: f64) -> Option<ModelFactorization> {
    let want = if p.equirank { ModelKind::NoncontextualOntological } else { ModelKind::Ontological };
    let accept = |m: ModelFactorization| -> Option<ModelFactorization> {
        let rep = classify_model(cm, &m).ok()?;
        rep.is(want).then_some(m)
    };
    let blocks = cm.block_sizes();
    match &p.exact {
        Some(c) => {
            let null = p.equirank.then(|| linalg::nullspace(c));
            let left_null = p.equirank.then(|| linalg::nullspace(&c.transpose()));
            let r_snap = normalize_blocks(&snap(r, tol), &p.ranges);
            if let Some(pm) = solve_states(&r_snap, c, null.as_ref()) {
                let m = exact_model(&r_snap, &pm, blocks.clone());
                if let Some(m) = accept(m) {
                    return Some(m);
                }
            }
            let h_snap = normalize_columns(&snap(h, tol));
            let rm = solve_responses(&h_snap, c, &p.ranges, left_null.as_ref())?;
            accept(exact_model(&rm, &h_snap, blocks))
        }
        None => {
            let c = Matrix::from_nalgebra(&p.c);
            let rf = Matrix::from_nalgebra(&clip_blocks(r, &p.ranges));
            let null = p.equirank.then(|| float_nullspace(&p.c, cm.rank()));
            let pm = solve_states(&rf, &c, null.as_ref())?;
            let m = ModelFactorization::new(
                ScalarMatrix::from_f64(&rf),
                ScalarMatrix::from_f64(&pm),
                blocks,
                want,
                p.backend,
            )
            .ok()?;
            accept(with_unit_ones(m))
        }
    }
}

fn exact_model(r: &RatMatrix, h: &RatMatrix, blocks: Vec<usize>) -> ModelFactorization {
    let m = ModelFactorization::new(
        ScalarMatrix::from_rational(r),
        ScalarMatrix::from_rational(h),
        blocks,
        ModelKind::Ontological,
        Backend::Exact,
    )
    .expect("shapes agree");
    with_unit_ones(m)
}

fn with_unit_ones(mut m: ModelFactorization) -> ModelFactorization {
    m.unit = ones(m.inner_dim(), m.backend);
    m
}

/// `P >= 0` with `R P = C`, unit column sums and, if given, `P N = 0`.
pub(crate) fn solve_states<T: LpField>(r: &Matrix<T>, c: &Matrix<T>, null: Option<&Matrix<T>>) -> Option<Matrix<T>> {
    let (m, k) = r.shape();
    let n = c.cols();
    let var = |t: usize, j: usize| t * n + j;
    let mut cons = Constraints::new(k * n);
    for j in 0..n {
        for i in 0..m {
            cons.push((0..k).map(|t| (var(t, j), r[(i, t)].clone())), c[(i, j)].clone());
        }
        cons.push((0..k).map(|t| (var(t, j), T::one())), T::one());
    }
    if let Some(nm) = null {
        for t in 0..k {
            for q in 0..nm.cols() {
                cons.push((0..n).map(|j| (var(t, j), nm[(j, q)].clone())), T::zero());
            }
        }
    }
    let x = cons.solve()?;
    Some(Matrix::from_fn(k, n, |t, j| x[var(t, j)].clone()))
}

/// `R >= 0` with `R P = C`, every block of every column summing to one and, if given,
/// `L^T R = 0` for a basis `L` of the left null space of `C`.
fn solve_responses<T: LpField>(
    h: &Matrix<T>,
    c: &Matrix<T>,
    ranges: &[Range<usize>],
    left_null: Option<&Matrix<T>>,
) -> Option<Matrix<T>> {
    let (k, n) = h.shape();
    let m = c.rows();
    let var = |i: usize, t: usize| i * k + t;
    let mut cons = Constraints::new(m * k);
    for i in 0..m {
        for j in 0..n {
            cons.push((0..k).map(|t| (var(i, t), h[(t, j)].clone())), c[(i, j)].clone());
        }
    }
    for range in ranges {
        for t in 0..k {
            cons.push(range.clone().map(|i| (var(i, t), T::one())), T::one());
        }
    }
    if let Some(l) = left_null {
        for q in 0..l.cols() {
            for t in 0..k {
                cons.push((0..m).map(|i| (var(i, t), l[(i, q)].clone())), T::zero());
            }
        }
    }
    let x = cons.solve()?;
    Some(Matrix::from_fn(m, k, |i, t| x[var(i, t)].clone()))
}

/// Orders ontic states by the first preparation they support, then by response column.
fn canonicalize(m: ModelFactorization) -> ModelFactorization {
    let k = m.inner_dim();
    let be = m.backend;
    let key = |t: usize| -> (usize, Vec<f64>) {
        let first = (0..m.states.cols()).find(|&j| !be.is_zero(&m.states[(t, j)])).unwrap_or(usize::MAX);
        (first, m.effects.col(t).iter().map(|s| -s.to_f64()).collect())
    };
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&a, &b| {
        let (fa, ca) = key(a);
        let (fb, cb) = key(b);
        fa.cmp(&fb).then_with(|| {
            ca.iter().zip(&cb).map(|(x, y)| x.total_cmp(y)).find(|o| o.is_ne()).unwrap_or(std::cmp::Ordering::Equal)
        })
    });
    let all_rows: Vec<usize> = (0..m.effects.rows()).collect();
    let all_cols: Vec<usize> = (0..m.states.cols()).collect();
    ModelFactorization {
        effects: m.effects.select(&all_rows, &order),
        states: m.states.select(&order, &all_cols),
        unit: order.iter().map(|&t| m.unit[t].clone()).collect(),
        ..m
    }
}

fn random_simplex(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    let w: Vec<f64> = (0..n).map(|_| -(1.0 - rng.gen::<f64>()).ln()).collect();
    let s: f64 = w.iter().sum();
    w.into_iter().map(|v| v / s).collect()
}

/// Euclidean projection onto the probability simplex.
fn project_simplex(v: &mut [f64]) {
    let mut u: Vec<f64> = v.to_vec();
    u.sort_by(|a, b| b.total_cmp(a));
    let mut cum = 0.0;
    let mut theta = 0.0;
    for (i, x) in u.iter().enumerate() {
        cum += x;
        let t = (cum - 1.0) / (i + 1) as f64;
        if x - t > 0.0 {
            theta = t;
        }
    }
    for x in v.iter_mut() {
        *x = (*x - theta).max(0.0);
    }
}

fn project_columns(h: &mut DMatrix<f64>) {
    for mut col in h.column_iter_mut() {
        let mut v: Vec<f64> = col.iter().copied().collect();
        project_simplex(&mut v);
        col.copy_from_slice(&v);
    }
}

fn project_blocks(r: &mut DMatrix<f64>, ranges: &[Range<usize>]) {
    for t in 0..r.ncols() {
        for range in ranges {
            let mut v: Vec<f64> = range.clone().map(|i| r[(i, t)]).collect();
            project_simplex(&mut v);
            for (o, i) in range.clone().enumerate() {
                r[(i, t)] = v[o];
            }
        }
    }
}

/// Alternating projections towards `colspace(C)` intersected with the block simplices.
fn project_response(r: &mut DMatrix<f64>, p: &Problem) {
    for _ in 0..8 {
        *r = &p.col_proj * &*r;
        project_blocks(r, &p.ranges);
    }
}

fn spectral_bound(sym: &DMatrix<f64>) -> f64 {
    sym.clone().symmetric_eigenvalues().iter().copied().fold(0.0, f64::max).max(1e-12)
}

fn column_projector(c: &DMatrix<f64>, rank: usize) -> DMatrix<f64> {
    let svd = c.clone().svd(true, false);
    let u = svd.u.expect("requested U");
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&i, &j| svd.singular_values[j].total_cmp(&svd.singular_values[i]));
    let mut proj = DMatrix::<f64>::zeros(c.nrows(), c.nrows());
    for &i in order.iter().take(rank) {
        let col = u.column(i);
        proj += col * col.transpose();
    }
    proj
}

fn float_nullspace(c: &DMatrix<f64>, rank: usize) -> Matrix<f64> {
    let n = c.ncols();
    // Rows of V^T past the rank span the null space; pad C so the SVD is full.
    let mut padded = DMatrix::<f64>::zeros(c.nrows().max(n), n);
    padded.view_mut((0, 0), c.shape()).copy_from(c);
    let svd = padded.svd(false, true);
    let vt = svd.v_t.expect("requested V^T");
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&i, &j| svd.singular_values[j].total_cmp(&svd.singular_values[i]));
    let cols: Vec<usize> = order[rank.min(order.len())..].to_vec();
    Matrix::from_fn(n, cols.len(), |j, q| vt[(cols[q], j)])
}

fn clip_blocks(r: &DMatrix<f64>, ranges: &[Range<usize>]) -> DMatrix<f64> {
    let mut out = r.map(|v| if v < 1e-12 { 0.0 } else { v });
    for t in 0..out.ncols() {
        for range in ranges {
            let s: f64 = range.clone().map(|i| out[(i, t)]).sum();
            if s > 0.0 {
                for i in range.clone() {
                    out[(i, t)] /= s;
                }
            }
        }
    }
    out
}

/// Best rational approximation with denominator at most `max_den`, by continued fractions.
pub fn snap_value(x: f64, tol: f64, max_den: i64) -> Rational {
    if !x.is_finite() {
        return Rational::zero();
    }
    let (mut p0, mut q0, mut p1, mut q1) = (0i64, 1i64, 1i64, 0i64);
    let mut v = x;
    let mut best = Rational::new((x.round() as i64).into(), 1.into());
    for _ in 0..40 {
        let a = v.floor();
        let ai = a as i64;
        let (p2, q2) = (ai.saturating_mul(p1).saturating_add(p0), ai.saturating_mul(q1).saturating_add(q0));
        if q2 > max_den || q2 <= 0 {
            break;
        }
        best = Rational::new(p2.into(), q2.into());
        if (x - p2 as f64 / q2 as f64).abs() <= tol {
            break;
        }
        (p0, q0, p1, q1) = (p1, q1, p2, q2);
        let frac = v - a;
        if frac.abs() < 1e-15 {
            break;
        }
        v = 1.0 / frac;
    }
    best
}

fn snap(m: &DMatrix<f64>, tol: f64) -> RatMatrix {
    Matrix::from_fn(m.nrows(), m.ncols(), |i, j| {
        let v = m[(i, j)];
        if v.abs() <= tol {
            Rational::zero()
        } else {
            snap_value(v.max(0.0), tol, 1000)
        }
    })
}

fn normalize_blocks(r: &RatMatrix, ranges: &[Range<usize>]) -> RatMatrix {
    let mut out = r.clone();
    for t in 0..r.cols() {
        for range in ranges {
            let s = range.clone().fold(Rational::zero(), |acc, i| acc + &r[(i, t)]);
            if !s.is_zero() && !s.is_one() {
                for i in range.clone() {
                    out[(i, t)] = &r[(i, t)] / &s;
                }
            }
        }
    }
    out
}

fn normalize_columns(h: &RatMatrix) -> RatMatrix {
    let sums = h.col_sums();
    Matrix::from_fn(h.rows(), h.cols(), |t, j| {
        if sums[j].is_zero() {
            h[(t, j)].clone()
        } else {
            &h[(t, j)] / &sums[j]
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::rat;

    #[test]
    fn snapping_recovers_small_fractions() {
        assert_eq!(snap_value(0.5000000001, 1e-6, 1000), rat(1, 2));
        assert_eq!(snap_value(1.0 / 3.0, 1e-9, 1000), rat(1, 3));
        assert_eq!(snap_value(0.0, 1e-9, 1000), rat(0, 1));
    }

    #[test]
    fn simplex_projection() {
        let mut v = vec![0.5, 0.5, 0.5];
        project_simplex(&mut v);
        assert!((v.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        let mut w = vec![2.0, 0.0];
        project_simplex(&mut w);
        assert_eq!(w, vec![1.0, 0.0]);
    }

    #[test]
    fn trivial_model_found_at_preparation_count() {
        let c = CopeMatrix::identity(3);
        let m = nmf(&c, &NmfOptions::with_inner_dim(3)).unwrap();
        assert_eq!(m.states, Matrix::identity(3));
        let e = enmf(&c, &NmfOptions::default()).unwrap();
        assert_eq!(e.effects, Matrix::identity(3));
    }

    #[test]
    fn below_rank_is_absent() {
        let c = CopeMatrix::identity(3);
        assert!(nmf(&c, &NmfOptions::with_inner_dim(2)).is_none());
    }
}
