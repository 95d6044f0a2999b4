//! Contextuality certificates: a matrix is noncontextual exactly when it admits an
//! equirank nonnegative factorization (ENMF).
//!
//! Evidence tiers, in the order [`certify`] tries them:
//! 1. heuristic ENMF search (positive evidence, re-verified exactly);
//! 2. vertex forcing in the polytope `Q = colspace(C) ∩ simplex` (exact input only);
//! 3. Sperner bounds from a unique-zero submatrix;
//! 4. the exact vertex LP over `Q`, which decides ENMF existence at every inner dimension.
//!
//! The vertex LP rests on two facts. Any equirank `R` has its columns (merged) inside `Q`,
//! and each such column is a convex combination of vertices of `Q`; substituting gives a
//! factorization through the vertex matrix `V` whose state matrix still has its rows in the
//! row space of `C`. Conversely a solution `V P = C`, `P >= 0`, `P N = 0` is equirank because
//! both factors are squeezed between `rank C` and the span of `C`.

use std::collections::{BTreeMap, BTreeSet};
use std::time::Instant;

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::cope::{in_convex_hull, CopeMatrix};
use crate::error::{CopeError, Result};
use crate::linalg;
use crate::matrix::{Matrix, RatMatrix, ScalarMatrix};
use crate::model::{classify_model, ModelFactorization, ModelKind};
use crate::nmf::{enmf, solve_states, NmfOptions};
use crate::polytope::{span_simplex_polytope, zero_mask, Face, SpanSimplexPolytope};
use crate::scalar::{Backend, Rational, Scalar};

/// Largest `rows + cols` accepted by [`exhaustive_enmf_decision`].
pub const EXHAUSTIVE_MAX_SIZE: usize = 10;
/// Largest inner dimension accepted by [`exhaustive_enmf_decision`].
pub const EXHAUSTIVE_MAX_INNER_DIM: usize = 5;
/// Above this `rows + cols` the Sperner search is greedy rather than exact.
pub const SPERNER_EXACT_MAX_SIZE: usize = 12;
/// Cap on exact feasibility problems tried while assembling candidate response columns.
const CANDIDATE_LP_BUDGET: usize = 4096;

pub const BOTH_SIDES_NOTE: &str = "sperner witnesses require the unique-zero condition on rows and columns; \
a column-only witness would still bound the span of the epistemic states";

// ---------------------------------------------------------------------------
// Sperner bounds

/// `binomial(k, floor(k/2))`, the size of the largest antichain in the subsets of a `k`-set.
pub fn central_binomial(k: usize) -> u128 {
    let h = (k / 2) as u128;
    (0..h).fold(1u128, |acc, i| acc * (k as u128 - i) / (i + 1))
}

/// Smallest `k` with `m <= binomial(k, floor(k/2))`, reported as at least 1.
pub fn sperner_ontic_bound(m: usize) -> usize {
    let mut k = 0;
    while central_binomial(k) < m as u128 {
        k += 1;
    }
    k.max(1)
}

/// Largest `l` with `binomial(l, floor(l/2)) <= m`.
pub fn sperner_span_bound(m: usize) -> usize {
    if m == 0 {
        return 0;
    }
    let mut l = 0;
    while central_binomial(l + 1) <= m as u128 {
        l += 1;
    }
    l
}

/// Rows and columns selecting an `m x m` submatrix with unique zeros. Entry `t` pairs
/// `row_indices[t]` with `col_indices[t]`: that entry is the zero singling out both.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpernerWitness {
    pub row_indices: Vec<usize>,
    pub col_indices: Vec<usize>,
    pub m: usize,
    pub ontic_dim_lower_bound: usize,
    pub factor_span_lower_bound: usize,
}

impl SpernerWitness {
    fn from_pairs(mut pairs: Vec<(usize, usize)>) -> Self {
        pairs.sort_unstable();
        let m = pairs.len();
        SpernerWitness {
            row_indices: pairs.iter().map(|p| p.0).collect(),
            col_indices: pairs.iter().map(|p| p.1).collect(),
            m,
            ontic_dim_lower_bound: sperner_ontic_bound(m),
            factor_span_lower_bound: sperner_span_bound(m),
        }
    }

    /// Checks the unique-zero condition on both sides and the two bounds against `c`.
    pub fn is_valid_for(&self, c: &CopeMatrix) -> bool {
        let m = self.m;
        if self.row_indices.len() != m || self.col_indices.len() != m || m < 2 {
            return false;
        }
        if self.row_indices.iter().any(|&i| i >= c.num_rows())
            || self.col_indices.iter().any(|&j| j >= c.num_preparations())
        {
            return false;
        }
        let be = c.backend();
        let zero = |i: usize, j: usize| be.is_zero(c.entry(i, j));
        let rows = &self.row_indices;
        let cols = &self.col_indices;
        let cols_ok = cols.iter().all(|&j| {
            rows.iter().any(|&i| zero(i, j) && cols.iter().all(|&o| o == j || !zero(i, o)))
        });
        let rows_ok = rows.iter().all(|&i| {
            cols.iter().any(|&j| zero(i, j) && rows.iter().all(|&o| o == i || !zero(o, j)))
        });
        let distinct = rows.iter().collect::<BTreeSet<_>>().len() == m && cols.iter().collect::<BTreeSet<_>>().len() == m;
        cols_ok
            && rows_ok
            && distinct
            && self.ontic_dim_lower_bound == sperner_ontic_bound(m)
            && self.factor_span_lower_bound == sperner_span_bound(m)
    }
}

/// Largest square submatrix with unique zeros on both sides.
///
/// Such a submatrix has exactly one zero in each selected row and column, so it is an
/// induced matching in the bipartite graph of zero entries. The search is exact for
/// `rows + cols <= 12`; larger matrices get greedy passes followed by one-for-two swaps.
pub fn sperner_submatrix(c: &CopeMatrix) -> Option<SpernerWitness> {
    let be = c.backend();
    let (rows, cols) = (c.num_rows(), c.num_preparations());
    let zero: Vec<Vec<bool>> = (0..rows).map(|i| (0..cols).map(|j| be.is_zero(c.entry(i, j))).collect()).collect();
    let edges: Vec<(usize, usize)> =
        (0..rows).flat_map(|i| (0..cols).map(move |j| (i, j))).filter(|&(i, j)| zero[i][j]).collect();
    let best = if rows + cols <= SPERNER_EXACT_MAX_SIZE {
        let mut best = Vec::new();
        exact_matching(&zero, &edges, 0, &mut Vec::new(), &mut best);
        best
    } else {
        greedy_matching(&zero, &edges)
    };
    (best.len() >= 2).then(|| SpernerWitness::from_pairs(best))
}

fn compatible(zero: &[Vec<bool>], chosen: &[(usize, usize)], (i, j): (usize, usize)) -> bool {
    chosen.iter().all(|&(a, b)| a != i && b != j && !zero[a][j] && !zero[i][b])
}

fn exact_matching(
    zero: &[Vec<bool>],
    edges: &[(usize, usize)],
    from: usize,
    chosen: &mut Vec<(usize, usize)>,
    best: &mut Vec<(usize, usize)>,
) {
    if chosen.len() > best.len() {
        *best = chosen.clone();
    }
    let rows_left: BTreeSet<usize> = edges[from..].iter().map(|e| e.0).collect();
    if chosen.len() + rows_left.len() <= best.len() {
        return;
    }
    for e in from..edges.len() {
        if compatible(zero, chosen, edges[e]) {
            chosen.push(edges[e]);
            exact_matching(zero, edges, e + 1, chosen, best);
            chosen.pop();
        }
    }
}

fn greedy_matching(zero: &[Vec<bool>], edges: &[(usize, usize)]) -> Vec<(usize, usize)> {
    let row_deg: Vec<usize> = zero.iter().map(|r| r.iter().filter(|&&z| z).count()).collect();
    let col_deg: Vec<usize> =
        (0..zero.first().map_or(0, Vec::len)).map(|j| zero.iter().filter(|r| r[j]).count()).collect();
    let mut by_degree = edges.to_vec();
    by_degree.sort_by_key(|&(i, j)| (row_deg[i] + col_deg[j], i, j));
    let orders = [edges.to_vec(), by_degree];

    let mut best: Vec<(usize, usize)> = Vec::new();
    for order in &orders {
        let mut chosen = Vec::new();
        for &e in order {
            if compatible(zero, &chosen, e) {
                chosen.push(e);
            }
        }
        improve_by_swaps(zero, edges, &mut chosen);
        if chosen.len() > best.len() {
            best = chosen;
        }
    }
    best
}

/// Replaces one chosen edge by two compatible ones while that is possible.
fn improve_by_swaps(zero: &[Vec<bool>], edges: &[(usize, usize)], chosen: &mut Vec<(usize, usize)>) {
    'outer: loop {
        for drop in 0..chosen.len() {
            let mut rest = chosen.clone();
            rest.remove(drop);
            let fits: Vec<(usize, usize)> =
                edges.iter().copied().filter(|&e| e != chosen[drop] && compatible(zero, &rest, e)).collect();
            for (a, &e) in fits.iter().enumerate() {
                for &f in &fits[a + 1..] {
                    if compatible(zero, &[e], f) {
                        rest.push(e);
                        rest.push(f);
                        *chosen = rest;
                        continue 'outer;
                    }
                }
            }
        }
        return;
    }
}

// ---------------------------------------------------------------------------
// Vertex forcing

/// Fires when every vertex of `Q` is a column of the merged matrix and there are more
/// vertices than `rank C`. An equirank model then needs every vertex as a response column,
/// and the vertex columns of `C` pin down disjointly supported state columns, so the state
/// matrix has rank at least the vertex count.
pub fn vertex_forcing_certificate(c: &CopeMatrix) -> Option<(SpanSimplexPolytope, usize)> {
    vertex_forcing_checked(c).ok().flatten()
}

/// As [`vertex_forcing_certificate`], but reports a float backend or an exceeded guard.
pub fn vertex_forcing_checked(c: &CopeMatrix) -> Result<Option<(SpanSimplexPolytope, usize)>> {
    let q = span_simplex_polytope(c)?;
    let merged = c.merge_measurements().to_rational().expect("exact input");
    let columns: BTreeSet<Vec<Rational>> = (0..merged.cols()).map(|j| merged.col(j)).collect();
    let rank = c.rank();
    let forced = q.num_vertices();
    Ok((q.vertices.iter().all(|v| columns.contains(v)) && forced > rank).then_some((q, forced)))
}

// ---------------------------------------------------------------------------
// Exact ENMF decisions

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum AbsenceReason {
    /// The inner dimension is below `rank C`.
    BelowRank,
    /// The vertex LP over `Q` is infeasible: no ENMF at any inner dimension.
    NoEquirankModel,
    /// No choice of faces of `Q` for the response columns can cover every column of `C`.
    FaceCover,
}

/// What an exact decision examined. Patterns list, per response column, the vertex
/// indices of the face of `Q` it was confined to.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchLog {
    /// `None` when the decision covers every inner dimension.
    pub inner_dim: Option<usize>,
    pub rank: usize,
    pub num_vertices: usize,
    pub reason: Option<AbsenceReason>,
    pub patterns_checked: usize,
    pub rejected_patterns: Vec<Vec<Vec<usize>>>,
    pub candidate_lps: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub enum EnmfDecision {
    Exists(ModelFactorization),
    NotExists(SearchLog),
    /// Every necessary condition passed but no model was assembled from the candidates.
    Inconclusive(SearchLog),
}

impl EnmfDecision {
    pub fn exists(&self) -> bool {
        matches!(self, EnmfDecision::Exists(_))
    }

    pub fn not_exists(&self) -> bool {
        matches!(self, EnmfDecision::NotExists(_))
    }
}

struct ExactSetup {
    data: RatMatrix,
    merged_cols: Vec<Vec<Rational>>,
    null: RatMatrix,
    polytope: SpanSimplexPolytope,
    measurements: usize,
    rank: usize,
}

fn exact_setup(c: &CopeMatrix) -> Result<ExactSetup> {
    let data = c
        .to_rational()
        .ok_or_else(|| CopeError::Precondition("exact decisions need the exact backend".into()))?;
    let polytope = span_simplex_polytope(c)?;
    let merged = c.merge_measurements().to_rational().expect("exact input");
    Ok(ExactSetup {
        merged_cols: (0..merged.cols()).map(|j| merged.col(j)).collect(),
        null: linalg::nullspace(&data),
        rank: linalg::rank_exact(&data),
        measurements: c.num_measurements(),
        polytope,
        data,
    })
}

impl ExactSetup {
    /// Response matrix whose columns are the given merged points scaled back by the measurement count.
    fn responses(&self, points: &[&Vec<Rational>]) -> RatMatrix {
        let j = Rational::from_integer(self.measurements.into());
        Matrix::from_fn(self.data.rows(), points.len(), |i, t| &points[t][i] * &j)
    }

    fn try_points(&self, c: &CopeMatrix, points: &[&Vec<Rational>]) -> Option<ModelFactorization> {
        let r = self.responses(points);
        let p = solve_states(&r, &self.data, Some(&self.null))?;
        let model = prune_unused(&r, &p, c.block_sizes());
        let rep = classify_model(c, &model).ok()?;
        rep.is(ModelKind::NoncontextualOntological).then_some(model)
    }

    fn log(&self, inner_dim: Option<usize>) -> SearchLog {
        SearchLog {
            inner_dim,
            rank: self.rank,
            num_vertices: self.polytope.num_vertices(),
            reason: None,
            patterns_checked: 0,
            rejected_patterns: Vec::new(),
            candidate_lps: 0,
        }
    }
}

/// Drops ontic states that no preparation uses.
fn prune_unused(r: &RatMatrix, p: &RatMatrix, blocks: Vec<usize>) -> ModelFactorization {
    let used: Vec<usize> = (0..p.rows()).filter(|&t| p.row(t).iter().any(|v| !v.is_zero())).collect();
    let used = if used.is_empty() { vec![0] } else { used };
    let mut m = ModelFactorization::new(
        ScalarMatrix::from_rational(&r.select_cols(&used)),
        ScalarMatrix::from_rational(&p.select_rows(&used)),
        blocks,
        ModelKind::NoncontextualOntological,
        Backend::Exact,
    )
    .expect("shapes agree");
    m.unit = vec![Scalar::one(); m.inner_dim()];
    m
}

/// Pads a model to inner dimension `k` by repeating its first response column with no weight.
pub fn pad_model(m: &ModelFactorization, k: usize) -> ModelFactorization {
    let d = m.inner_dim();
    if d >= k {
        return m.clone();
    }
    let zero = m.backend.zero();
    let effects = Matrix::from_fn(m.effects.rows(), k, |i, t| m.effects[(i, if t < d { t } else { 0 })].clone());
    let states =
        Matrix::from_fn(k, m.states.cols(), |t, j| if t < d { m.states[(t, j)].clone() } else { zero.clone() });
    let mut out = m.clone();
    out.effects = effects;
    out.states = states;
    out.unit = vec![m.backend.one(); k];
    out
}

/// Decides ENMF existence at every inner dimension with the vertex LP over `Q`.
/// The returned model uses only the vertices that carry weight.
pub fn global_enmf_decision(c: &CopeMatrix) -> Result<EnmfDecision> {
    let setup = exact_setup(c)?;
    let points: Vec<&Vec<Rational>> = setup.polytope.vertices.iter().collect();
    let mut log = setup.log(None);
    log.candidate_lps = 1;
    match setup.try_points(c, &points) {
        Some(m) => Ok(EnmfDecision::Exists(m)),
        None => {
            log.reason = Some(AbsenceReason::NoEquirankModel);
            Ok(EnmfDecision::NotExists(log))
        }
    }
}

/// Decides whether an ENMF with inner dimension exactly `k` exists.
///
/// Only the vertex LP and the face-cover relaxation can reject; each is a necessary
/// condition, so `NotExists` is always sound. Acceptance goes through exact feasibility
/// for explicit response columns, so `Exists` always carries a verified model.
pub fn exhaustive_enmf_decision(c: &CopeMatrix, k: usize) -> Result<EnmfDecision> {
    if !c.backend().is_exact() {
        return Err(CopeError::Precondition("exact decisions need the exact backend".into()));
    }
    let size = c.num_rows() + c.num_preparations();
    if size > EXHAUSTIVE_MAX_SIZE || k > EXHAUSTIVE_MAX_INNER_DIM {
        return Err(CopeError::Guard(format!(
            "exhaustive search allows rows + cols <= {EXHAUSTIVE_MAX_SIZE} and k <= {EXHAUSTIVE_MAX_INNER_DIM}, \
             got {size} and {k}"
        )));
    }
    let setup = exact_setup(c)?;
    let mut log = setup.log(Some(k));
    if k == 0 || k < setup.rank {
        log.reason = Some(AbsenceReason::BelowRank);
        return Ok(EnmfDecision::NotExists(log));
    }

    let vertex_points: Vec<&Vec<Rational>> = setup.polytope.vertices.iter().collect();
    log.candidate_lps += 1;
    let Some(global) = setup.try_points(c, &vertex_points) else {
        log.reason = Some(AbsenceReason::NoEquirankModel);
        return Ok(EnmfDecision::NotExists(log));
    };
    if global.inner_dim() <= k {
        return Ok(EnmfDecision::Exists(pad_model(&global, k)));
    }

    let (feasible, rejected) = face_patterns(&setup, k);
    log.patterns_checked = feasible.len() + rejected.len();
    log.rejected_patterns = rejected
        .iter()
        .map(|pattern| pattern.iter().map(|f| f.vertices.clone()).collect())
        .collect();
    if feasible.is_empty() {
        log.reason = Some(AbsenceReason::FaceCover);
        return Ok(EnmfDecision::NotExists(log));
    }

    for pattern in &feasible {
        let options: Vec<Vec<&Vec<Rational>>> = pattern.iter().map(|f| candidate_points(&setup, f)).collect();
        let mut choice = vec![0usize; options.len()];
        loop {
            if log.candidate_lps >= CANDIDATE_LP_BUDGET {
                return Ok(EnmfDecision::Inconclusive(log));
            }
            let points: Vec<&Vec<Rational>> = choice.iter().zip(&options).map(|(&i, o)| o[i]).collect();
            log.candidate_lps += 1;
            if let Some(m) = setup.try_points(c, &points) {
                return Ok(EnmfDecision::Exists(pad_model(&m, k)));
            }
            if !advance(&mut choice, &options) {
                break;
            }
        }
    }
    Ok(EnmfDecision::Inconclusive(log))
}

fn advance<T>(choice: &mut [usize], options: &[Vec<T>]) -> bool {
    for (slot, opts) in choice.iter_mut().zip(options).rev() {
        *slot += 1;
        if *slot < opts.len() {
            return true;
        }
        *slot = 0;
    }
    false
}

/// Points of a face worth trying as a response column: its vertices and the columns of `C` inside it.
fn candidate_points<'a>(setup: &'a ExactSetup, face: &Face) -> Vec<&'a Vec<Rational>> {
    let mut out: Vec<&Vec<Rational>> = face.vertices.iter().map(|&v| &setup.polytope.vertices[v]).collect();
    for col in &setup.merged_cols {
        if zero_mask(col) & face.zero_mask == face.zero_mask && !out.contains(&col) {
            out.push(col);
        }
    }
    out
}

/// Splits the face patterns of size `min(k, family)` into those passing the cover test
/// and those failing it. The family holds the intersections of the columns' minimal faces;
/// every other face is dominated by one of them.
fn face_patterns(setup: &ExactSetup, k: usize) -> (Vec<Vec<Face>>, Vec<Vec<Face>>) {
    let q = &setup.polytope;
    let col_faces: Vec<Face> = setup.merged_cols.iter().map(|x| q.minimal_face(x)).collect();
    let mut family: BTreeSet<Face> = BTreeSet::new();
    let n = col_faces.len();
    let mut frontier: Vec<u64> = col_faces.iter().map(|f| f.zero_mask).collect();
    let mut seen: BTreeSet<u64> = frontier.iter().copied().collect();
    while let Some(mask) = frontier.pop() {
        family.insert(q.face_of_mask(mask));
        for f in &col_faces {
            let joined = q.face_of_mask(mask | f.zero_mask);
            if !joined.vertices.is_empty() && seen.insert(joined.zero_mask) {
                frontier.push(joined.zero_mask);
            }
        }
    }
    let family: Vec<Face> = family.into_iter().collect();
    let size = k.min(family.len());

    let mut memo: BTreeMap<(usize, Vec<usize>), bool> = BTreeMap::new();
    let mut covered = |j: usize, verts: Vec<usize>| -> bool {
        *memo.entry((j, verts.clone())).or_insert_with(|| {
            let points: Vec<Vec<Scalar>> = verts
                .iter()
                .map(|&v| q.vertices[v].iter().cloned().map(Scalar::Exact).collect())
                .collect();
            let target: Vec<Scalar> = setup.merged_cols[j].iter().cloned().map(Scalar::Exact).collect();
            !points.is_empty() && in_convex_hull(&target, &points, Backend::Exact)
        })
    };

    let mut feasible = Vec::new();
    let mut rejected = Vec::new();
    for combo in combinations(family.len(), size) {
        let pattern: Vec<Face> = combo.iter().map(|&i| family[i].clone()).collect();
        let ok = (0..n).all(|j| {
            let verts: BTreeSet<usize> = pattern
                .iter()
                .filter(|f| col_faces[j].contains_face(f))
                .flat_map(|f| f.vertices.iter().copied())
                .collect();
            covered(j, verts.into_iter().collect())
        });
        if ok {
            feasible.push(pattern);
        } else {
            rejected.push(pattern);
        }
    }
    (feasible, rejected)
}

/// All `size`-subsets of `0..n` in lexicographic order.
fn combinations(n: usize, size: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur: Vec<usize> = (0..size).collect();
    if size > n {
        return out;
    }
    loop {
        out.push(cur.clone());
        let Some(pos) = (0..size).rev().find(|&i| cur[i] < n - size + i) else {
            return out;
        };
        cur[pos] += 1;
        for i in pos + 1..size {
            cur[i] = cur[i - 1] + 1;
        }
    }
}

// ---------------------------------------------------------------------------
// Certificates

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    Noncontextual,
    Contextual,
    Undetermined,
}

impl Verdict {
    pub fn name(self) -> &'static str {
        match self {
            Verdict::Noncontextual => "Noncontextual",
            Verdict::Contextual => "Contextual",
            Verdict::Undetermined => "Undetermined",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Evidence {
    EnmfModel(ModelFactorization),
    VertexForcing { polytope: SpanSimplexPolytope, forced_rank: usize },
    SpernerSeparation { witness: SpernerWitness, rank: usize },
    ExhaustiveAbsence(SearchLog),
    None,
}

impl Evidence {
    pub fn kind(&self) -> &'static str {
        match self {
            Evidence::EnmfModel(_) => "EnmfModel",
            Evidence::VertexForcing { .. } => "VertexForcing",
            Evidence::SpernerSeparation { .. } => "SpernerSeparation",
            Evidence::ExhaustiveAbsence(_) => "ExhaustiveAbsence",
            Evidence::None => "None",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Certificate {
    pub verdict: Verdict,
    pub evidence: Evidence,
    pub rank: usize,
    /// Inner dimensions tried by the heuristic search, set for `Undetermined`.
    pub searched_k_range: Option<(usize, usize)>,
    pub matrix: CopeMatrix,
    pub notes: Vec<String>,
    pub wall_time_ms: u64,
}

impl Certificate {
    /// Re-checks the evidence against the embedded matrix.
    pub fn check(&self) -> Result<()> {
        let c = &self.matrix;
        let fail = |msg: &str| Err(CopeError::Invalid(format!("certificate does not verify: {msg}")));
        if c.rank() != self.rank {
            return fail("rank differs from the matrix");
        }
        match (&self.verdict, &self.evidence) {
            (Verdict::Noncontextual, Evidence::EnmfModel(m)) => {
                if !classify_model(c, m)?.is(ModelKind::NoncontextualOntological) {
                    return fail("model is not an equirank nonnegative factorization");
                }
            }
            (Verdict::Contextual, Evidence::VertexForcing { polytope, forced_rank }) => {
                match vertex_forcing_checked(c)? {
                    Some((q, f)) if &q == polytope && f == *forced_rank && f > self.rank => {}
                    _ => return fail("vertex forcing does not hold"),
                }
            }
            (Verdict::Contextual, Evidence::SpernerSeparation { witness, rank }) => {
                if !witness.is_valid_for(c) || *rank != self.rank || witness.factor_span_lower_bound <= *rank {
                    return fail("sperner witness does not separate");
                }
            }
            (Verdict::Contextual, Evidence::ExhaustiveAbsence(log)) => {
                if log.inner_dim.is_some() || !global_enmf_decision(c)?.not_exists() {
                    return fail("exhaustive absence does not hold");
                }
            }
            (Verdict::Undetermined, Evidence::None) => {}
            _ => return fail("verdict and evidence disagree"),
        }
        Ok(())
    }
}

/// Runs the evidence tiers in order and returns the first conclusive result.
pub fn certify(c: &CopeMatrix, opts: &NmfOptions) -> Certificate {
    let start = Instant::now();
    let rank = c.rank();
    let hi = opts.max_inner_dim.unwrap_or(rank + 3).max(rank);
    let mut notes = Vec::new();
    let finish = |verdict, evidence, searched, notes| Certificate {
        verdict,
        evidence,
        rank,
        searched_k_range: searched,
        matrix: c.clone(),
        notes,
        wall_time_ms: start.elapsed().as_millis() as u64,
    };

    if let Some(m) = enmf(c, opts) {
        if classify_model(c, &m).is_ok_and(|r| r.is(ModelKind::NoncontextualOntological)) {
            return finish(Verdict::Noncontextual, Evidence::EnmfModel(m), None, notes);
        }
    }

    let exact = c.backend().is_exact();
    if exact {
        match vertex_forcing_checked(c) {
            Ok(Some((polytope, forced_rank))) => {
                return finish(
                    Verdict::Contextual,
                    Evidence::VertexForcing { polytope, forced_rank },
                    None,
                    notes,
                );
            }
            Ok(None) => {}
            Err(e) => notes.push(format!("vertex forcing skipped: {e}")),
        }
    } else {
        notes.push("float input: geometric and exhaustive tiers need exact entries".into());
    }

    if let Some(witness) = sperner_submatrix(c) {
        notes.push(BOTH_SIDES_NOTE.into());
        if witness.factor_span_lower_bound > rank {
            return finish(Verdict::Contextual, Evidence::SpernerSeparation { witness, rank }, None, notes);
        }
    }

    if exact {
        match global_enmf_decision(c) {
            Ok(EnmfDecision::Exists(m)) => {
                if classify_model(c, &m).is_ok_and(|r| r.is(ModelKind::NoncontextualOntological)) {
                    return finish(Verdict::Noncontextual, Evidence::EnmfModel(m), None, notes);
                }
            }
            Ok(EnmfDecision::NotExists(log)) => {
                return finish(Verdict::Contextual, Evidence::ExhaustiveAbsence(log), None, notes);
            }
            Ok(EnmfDecision::Inconclusive(_)) => {}
            Err(e) => notes.push(format!("exact decision skipped: {e}")),
        }
    }

    finish(Verdict::Undetermined, Evidence::None, Some((rank.max(1), hi)), notes)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bound_tables() {
        let widths: Vec<u128> = (0..=8).map(central_binomial).collect();
        assert_eq!(widths, vec![1, 1, 2, 3, 6, 10, 20, 35, 70]);
        assert_eq!((sperner_ontic_bound(10), sperner_span_bound(10)), (5, 5));
        assert_eq!((sperner_ontic_bound(9), sperner_span_bound(9)), (5, 4));
        assert_eq!((sperner_ontic_bound(1), sperner_span_bound(1)), (1, 1));
    }

    #[test]
    fn combinations_are_lexicographic() {
        assert_eq!(combinations(4, 2), vec![vec![0, 1], vec![0, 2], vec![0, 3], vec![1, 2], vec![1, 3], vec![2, 3]]);
        assert_eq!(combinations(2, 0), vec![Vec::<usize>::new()]);
    }

    #[test]
    fn identity_decisions() {
        let c = CopeMatrix::identity(3);
        assert!(exhaustive_enmf_decision(&c, 3).unwrap().exists());
        assert!(exhaustive_enmf_decision(&c, 2).unwrap().not_exists());
        assert!(exhaustive_enmf_decision(&c, 6).is_err());
    }
}
