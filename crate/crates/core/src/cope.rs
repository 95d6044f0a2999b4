//! The COPE matrix: measurements stacked as row blocks over a shared set of preparations.

use std::cmp::Ordering;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{CopeError, Result};
use crate::linalg;
use crate::lp::{self, Constraints};
use crate::matrix::{Matrix, RatMatrix, ScalarMatrix};
use crate::scalar::{Backend, Rational, Scalar};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Measurement {
    pub name: String,
    pub outcomes: Vec<String>,
}

impl Measurement {
    pub fn new(name: impl Into<String>, outcomes: usize) -> Self {
        Measurement { name: name.into(), outcomes: (1..=outcomes).map(|k| k.to_string()).collect() }
    }

    pub fn len(&self) -> usize {
        self.outcomes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.outcomes.is_empty()
    }
}

/// Conditional outcome probabilities: one row per (measurement, outcome), one column per preparation.
#[derive(Clone, Debug, PartialEq)]
pub struct CopeMatrix {
    data: ScalarMatrix,
    measurements: Vec<Measurement>,
    preparations: Vec<String>,
    backend: Backend,
}

/// One broken invariant, located by block, row within the block, and column.
#[derive(Clone, Debug, PartialEq)]
pub enum Violation {
    Empty,
    EntryOutOfRange { block: usize, row: usize, col: usize, value: f64 },
    ColumnSum { block: usize, col: usize, sum: f64 },
    EmptyBlock { block: usize },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::Empty => write!(f, "matrix has no blocks or no columns"),
            Violation::EntryOutOfRange { block, row, col, value } => {
                write!(f, "block {block}, row {row}, column {col}: entry {value} outside [0, 1]")
            }
            Violation::ColumnSum { block, col, sum } => {
                write!(f, "block {block}, column {col}: column sums to {sum}, expected 1")
            }
            Violation::EmptyBlock { block } => write!(f, "block {block} has no outcomes"),
        }
    }
}

impl CopeMatrix {
    /// Builds from a stacked matrix and the measurement layout. Only shapes are checked;
    /// use [`CopeMatrix::validate`] or [`CopeMatrix::try_new`] for the probabilistic invariants.
    pub fn from_parts(
        data: ScalarMatrix,
        measurements: Vec<Measurement>,
        preparations: Vec<String>,
        backend: Backend,
    ) -> Result<Self> {
        let rows: usize = measurements.iter().map(Measurement::len).sum();
        if rows != data.rows() {
            return Err(CopeError::Dimension(format!(
                "measurements describe {rows} outcome rows but the matrix has {}",
                data.rows()
            )));
        }
        if preparations.len() != data.cols() {
            return Err(CopeError::Dimension(format!(
                "{} preparation labels for {} columns",
                preparations.len(),
                data.cols()
            )));
        }
        let data = data.convert(backend);
        Ok(CopeMatrix { data, measurements, preparations, backend })
    }

    /// Like [`CopeMatrix::from_parts`] but rejects matrices that fail validation.
    pub fn try_new(
        data: ScalarMatrix,
        measurements: Vec<Measurement>,
        preparations: Vec<String>,
        backend: Backend,
    ) -> Result<Self> {
        let c = Self::from_parts(data, measurements, preparations, backend)?;
        c.ensure_valid()?;
        Ok(c)
    }

    /// Default labels: measurements `M1..`, outcomes `1..`, preparations `P1..`.
    pub fn from_blocks(blocks: Vec<ScalarMatrix>, backend: Backend) -> Result<Self> {
        let cols = blocks.first().map_or(0, Matrix::cols);
        if blocks.iter().any(|b| b.cols() != cols) {
            return Err(CopeError::Dimension("blocks have different column counts".into()));
        }
        let measurements =
            blocks.iter().enumerate().map(|(j, b)| Measurement::new(format!("M{}", j + 1), b.rows())).collect();
        let preparations = (1..=cols).map(|k| format!("P{k}")).collect();
        let data = if blocks.is_empty() { Matrix::zeros(0, 0) } else { Matrix::vstack(&blocks) };
        Self::try_new(data, measurements, preparations, backend)
    }

    pub fn from_rational_blocks(blocks: Vec<RatMatrix>) -> Result<Self> {
        Self::from_blocks(blocks.iter().map(ScalarMatrix::from_rational).collect(), Backend::Exact)
    }

    pub fn from_f64_blocks(blocks: Vec<Matrix<f64>>, eps: f64) -> Result<Self> {
        Self::from_blocks(blocks.iter().map(ScalarMatrix::from_f64).collect(), Backend::Float { eps })
    }

    /// A single measurement whose outcome `i` occurs exactly for preparation `i`.
    pub fn identity(n: usize) -> Self {
        Self::from_blocks(vec![Matrix::identity(n)], Backend::Exact).expect("identity is valid")
    }

    pub fn data(&self) -> &ScalarMatrix {
        &self.data
    }

    pub fn backend(&self) -> Backend {
        self.backend
    }

    pub fn measurements(&self) -> &[Measurement] {
        &self.measurements
    }

    pub fn preparations(&self) -> &[String] {
        &self.preparations
    }

    pub fn num_rows(&self) -> usize {
        self.data.rows()
    }

    pub fn num_preparations(&self) -> usize {
        self.data.cols()
    }

    pub fn num_measurements(&self) -> usize {
        self.measurements.len()
    }

    pub fn block_sizes(&self) -> Vec<usize> {
        self.measurements.iter().map(Measurement::len).collect()
    }

    /// Row range of block `j` inside the stacked matrix.
    pub fn block_range(&self, j: usize) -> std::ops::Range<usize> {
        let start: usize = self.measurements[..j].iter().map(Measurement::len).sum();
        start..start + self.measurements[j].len()
    }

    pub fn block(&self, j: usize) -> ScalarMatrix {
        let rows: Vec<usize> = self.block_range(j).collect();
        self.data.select_rows(&rows)
    }

    pub fn blocks(&self) -> Vec<ScalarMatrix> {
        (0..self.num_measurements()).map(|j| self.block(j)).collect()
    }

    /// Index of the block owning stacked row `i`.
    pub fn block_of_row(&self, i: usize) -> usize {
        let mut acc = 0;
        for (j, m) in self.measurements.iter().enumerate() {
            acc += m.len();
            if i < acc {
                return j;
            }
        }
        panic!("row {i} out of range")
    }

    pub fn entry(&self, row: usize, col: usize) -> &Scalar {
        &self.data[(row, col)]
    }

    pub fn to_rational(&self) -> Option<RatMatrix> {
        if self.backend.is_exact() {
            self.data.to_rational()
        } else {
            None
        }
    }

    pub fn validate(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        if self.measurements.is_empty() || self.num_preparations() == 0 {
            out.push(Violation::Empty);
            return out;
        }
        let be = self.backend;
        let one = be.one();
        for j in 0..self.num_measurements() {
            let range = self.block_range(j);
            if range.is_empty() {
                out.push(Violation::EmptyBlock { block: j });
                continue;
            }
            for (r, i) in range.clone().enumerate() {
                for k in 0..self.num_preparations() {
                    let v = &self.data[(i, k)];
                    if !be.is_nonneg(v) || be.compare(v, &one) == Ordering::Greater {
                        out.push(Violation::EntryOutOfRange { block: j, row: r, col: k, value: v.to_f64() });
                    }
                }
            }
            for (k, s) in self.data.row_sum(range).iter().enumerate() {
                if !be.eq(s, &one) {
                    out.push(Violation::ColumnSum { block: j, col: k, sum: s.to_f64() });
                }
            }
        }
        out
    }

    pub fn is_valid(&self) -> bool {
        self.validate().is_empty()
    }

    pub fn ensure_valid(&self) -> Result<()> {
        let report = self.validate();
        if report.is_empty() {
            Ok(())
        } else {
            let msgs: Vec<String> = report.iter().map(ToString::to_string).collect();
            Err(CopeError::Invalid(msgs.join("; ")))
        }
    }

    pub fn rank(&self) -> usize {
        linalg::rank(&self.data, self.backend)
    }

    /// Same matrix with a different numeric backend.
    pub fn with_backend(&self, backend: Backend) -> Self {
        CopeMatrix { data: self.data.convert(backend), backend, ..self.clone() }
    }

    pub fn find_equivalences(&self) -> Equivalences {
        let cols: Vec<Vec<Scalar>> = (0..self.num_preparations()).map(|k| self.data.col(k)).collect();
        let rows: Vec<Vec<Scalar>> = self.data.to_rows();
        let blocks: Vec<Vec<Vec<Scalar>>> = (0..self.num_measurements()).map(|j| self.sorted_block_rows(j)).collect();
        Equivalences {
            column_classes: partition(&cols, |a, b| vec_eq(a, b, self.backend)),
            row_classes: partition(&rows, |a, b| vec_eq(a, b, self.backend)),
            block_classes: partition(&blocks, |a, b| {
                a.len() == b.len() && a.iter().zip(b).all(|(x, y)| vec_eq(x, y, self.backend))
            }),
        }
    }

    fn sorted_block_rows(&self, j: usize) -> Vec<Vec<Scalar>> {
        let mut rows = self.block(j).to_rows();
        rows.sort_by(|a, b| lex_cmp(a, b, self.backend));
        rows
    }

    /// True iff column `j` is not a convex combination of the columns that differ from it.
    pub fn is_extremal_column(&self, j: usize) -> bool {
        let cols: Vec<Vec<Scalar>> = (0..self.num_preparations()).map(|k| self.data.col(k)).collect();
        is_extremal_point(&cols, j, self.backend)
    }

    /// Row analogue of [`CopeMatrix::is_extremal_column`].
    pub fn is_extremal_row(&self, i: usize) -> bool {
        is_extremal_point(&self.data.to_rows(), i, self.backend)
    }

    /// Submatrix on the given (0-based) measurements and preparations, in the given order.
    pub fn restrict(&self, preparations: &[usize], measurements: &[usize]) -> Result<Self> {
        if preparations.is_empty() || measurements.is_empty() {
            return Err(CopeError::Precondition("fragment must keep at least one preparation and one measurement".into()));
        }
        if let Some(&p) = preparations.iter().find(|&&p| p >= self.num_preparations()) {
            return Err(CopeError::Precondition(format!("preparation index {p} out of range")));
        }
        if let Some(&m) = measurements.iter().find(|&&m| m >= self.num_measurements()) {
            return Err(CopeError::Precondition(format!("measurement index {m} out of range")));
        }
        let rows: Vec<usize> = measurements.iter().flat_map(|&m| self.block_range(m)).collect();
        Ok(CopeMatrix {
            data: self.data.select(&rows, preparations),
            measurements: measurements.iter().map(|&m| self.measurements[m].clone()).collect(),
            preparations: preparations.iter().map(|&p| self.preparations[p].clone()).collect(),
            backend: self.backend,
        })
    }

    /// All measurements folded into one, each scaled by `1/J`.
    pub fn merge_measurements(&self) -> Self {
        let j = self.num_measurements();
        if j == 1 {
            return self.clone();
        }
        let scale = self.backend.convert(&Scalar::Exact(Rational::new(1.into(), (j as i64).into())));
        let outcomes = self
            .measurements
            .iter()
            .flat_map(|m| m.outcomes.iter().map(move |o| format!("{}:{o}", m.name)))
            .collect();
        CopeMatrix {
            data: self.data.scale(&scale),
            measurements: vec![Measurement { name: "merged".into(), outcomes }],
            preparations: self.preparations.clone(),
            backend: self.backend,
        }
    }

    pub fn quotient_extremal(&self) -> QuotientReport {
        let be = self.backend;
        let eq = self.find_equivalences();

        // Columns: one representative per class, then drop those inside the hull of the rest.
        let reps: Vec<usize> = eq.column_classes.iter().map(|c| c[0]).collect();
        let rep_cols: Vec<Vec<Scalar>> = reps.iter().map(|&k| self.data.col(k)).collect();
        let mut kept_cols = Vec::new();
        let mut dropped_columns = Vec::new();
        for (idx, class) in eq.column_classes.iter().enumerate() {
            if is_extremal_point(&rep_cols, idx, be) {
                kept_cols.push(class[0]);
            } else {
                dropped_columns.extend(class.iter().copied());
            }
        }
        kept_cols.sort_unstable();
        dropped_columns.sort_unstable();
        let reduced = self.restrict(&kept_cols, &(0..self.num_measurements()).collect::<Vec<_>>()).expect("nonempty");

        // Measurements: merge equivalent blocks, then drop mixtures of the remaining ones.
        let block_classes = reduced.find_equivalences().block_classes;
        let block_reps: Vec<usize> = block_classes.iter().map(|c| c[0]).collect();
        let mut kept_meas = Vec::new();
        let mut dropped_measurements = Vec::new();
        for (idx, class) in block_classes.iter().enumerate() {
            let others: Vec<usize> = block_reps
                .iter()
                .enumerate()
                .filter(|&(o, _)| o != idx)
                .map(|(_, &b)| b)
                .filter(|&b| reduced.measurements[b].len() == reduced.measurements[class[0]].len())
                .collect();
            if reduced.block_is_mixture_of(class[0], &others) {
                dropped_measurements.extend(class.iter().copied());
            } else {
                kept_meas.push(class[0]);
            }
        }
        kept_meas.sort_unstable();
        dropped_measurements.sort_unstable();
        let all_cols: Vec<usize> = (0..reduced.num_preparations()).collect();
        let quotiented = reduced.restrict(&all_cols, &kept_meas).expect("nonempty");

        QuotientReport {
            quotiented,
            column_classes: eq.column_classes,
            measurement_classes: block_classes,
            kept_columns: kept_cols,
            kept_measurements: kept_meas,
            dropped_columns,
            dropped_measurements,
        }
    }

    /// Whether block `j` equals a convex combination of `others` with outcomes matched by position.
    fn block_is_mixture_of(&self, j: usize, others: &[usize]) -> bool {
        if others.is_empty() {
            return false;
        }
        let flatten = |b: usize| -> Vec<Scalar> { self.block(b).iter().cloned().collect() };
        let target = flatten(j);
        let pts: Vec<Vec<Scalar>> = others.iter().map(|&b| flatten(b)).collect();
        in_convex_hull(&target, &pts, self.backend)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Equivalences {
    pub column_classes: Vec<Vec<usize>>,
    pub row_classes: Vec<Vec<usize>>,
    pub block_classes: Vec<Vec<usize>>,
}

/// Outcome of extremal quotienting. Classes partition the original indices; each class is
/// represented by its lowest index.
#[derive(Clone, Debug, PartialEq)]
pub struct QuotientReport {
    pub quotiented: CopeMatrix,
    pub column_classes: Vec<Vec<usize>>,
    /// Classes of measurements in the column-reduced matrix (same indices as the input).
    pub measurement_classes: Vec<Vec<usize>>,
    pub kept_columns: Vec<usize>,
    pub kept_measurements: Vec<usize>,
    pub dropped_columns: Vec<usize>,
    pub dropped_measurements: Vec<usize>,
}

/// A fragment: the parent restricted to some preparations and measurements (0-based).
#[derive(Clone, Debug)]
pub struct FragmentRestriction {
    pub parent: CopeMatrix,
    pub kept_preparations: Vec<usize>,
    pub kept_measurements: Vec<usize>,
}

pub fn restrict_fragment(r: &FragmentRestriction) -> Result<CopeMatrix> {
    r.parent.restrict(&r.kept_preparations, &r.kept_measurements)
}

fn vec_eq(a: &[Scalar], b: &[Scalar], be: Backend) -> bool {
    a.len() == b.len() && a.iter().zip(b).all(|(x, y)| be.eq(x, y))
}

fn lex_cmp(a: &[Scalar], b: &[Scalar], be: Backend) -> Ordering {
    for (x, y) in a.iter().zip(b) {
        match be.compare(x, y) {
            Ordering::Equal => continue,
            o => return o,
        }
    }
    a.len().cmp(&b.len())
}

/// Groups items into classes, each led by its first member; classes are ordered by leader.
fn partition<T>(items: &[T], eq: impl Fn(&T, &T) -> bool) -> Vec<Vec<usize>> {
    let mut classes: Vec<Vec<usize>> = Vec::new();
    for (i, item) in items.iter().enumerate() {
        match classes.iter_mut().find(|c| eq(&items[c[0]], item)) {
            Some(c) => c.push(i),
            None => classes.push(vec![i]),
        }
    }
    classes
}

fn is_extremal_point(points: &[Vec<Scalar>], j: usize, be: Backend) -> bool {
    let target = &points[j];
    let others: Vec<Vec<Scalar>> =
        points.iter().filter(|p| !vec_eq(p, target, be)).cloned().collect();
    !in_convex_hull(target, &others, be)
}

/// Convex-hull membership by LP feasibility.
pub fn in_convex_hull(target: &[Scalar], points: &[Vec<Scalar>], be: Backend) -> bool {
    if points.is_empty() {
        return false;
    }
    let exact = be.is_exact()
        && target.iter().all(Scalar::is_exact)
        && points.iter().all(|p| p.iter().all(Scalar::is_exact));
    if exact {
        let r = |s: &Scalar| s.as_rational().cloned().expect("exact");
        hull_lp(target.iter().map(r).collect(), points.iter().map(|p| p.iter().map(r).collect()).collect())
    } else {
        hull_lp(target.iter().map(Scalar::to_f64).collect(), points.iter().map(|p| p.iter().map(Scalar::to_f64).collect()).collect())
    }
}

fn hull_lp<T: lp::LpField>(target: Vec<T>, points: Vec<Vec<T>>) -> bool {
    let n = points.len();
    let mut cons = Constraints::new(n);
    for (d, t) in target.into_iter().enumerate() {
        cons.push(points.iter().enumerate().map(|(k, p)| (k, p[d].clone())), t);
    }
    cons.push((0..n).map(|k| (k, T::one())), T::one());
    cons.solve().is_some()
}

impl fmt::Display for CopeMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for j in 0..self.num_measurements() {
            writeln!(f, "[{}]", self.measurements[j].name)?;
            for i in self.block_range(j) {
                let row: Vec<String> = self.data.row(i).iter().map(ToString::to_string).collect();
                writeln!(f, "  {}", row.join("  "))?;
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::rat;

    fn rm(rows: &[&[(i64, i64)]]) -> RatMatrix {
        Matrix::from_rows(rows.iter().map(|r| r.iter().map(|&(n, d)| rat(n, d)).collect()).collect())
    }

    #[test]
    fn single_entry_matrix_is_valid() {
        let c = CopeMatrix::identity(1);
        assert!(c.validate().is_empty());
        assert_eq!(c.rank(), 1);
    }

    #[test]
    fn bad_column_sum_is_reported() {
        let data = Matrix::from_rows(vec![vec![Scalar::float(0.5)], vec![Scalar::float(0.4)]]);
        let c = CopeMatrix::from_parts(data, vec![Measurement::new("M", 2)], vec!["P".into()], Backend::float())
            .unwrap();
        let report = c.validate();
        assert_eq!(report.len(), 1);
        assert!(matches!(report[0], Violation::ColumnSum { block: 0, col: 0, .. }));
    }

    #[test]
    fn midpoint_column_is_not_extremal() {
        let b = rm(&[&[(1, 1), (0, 1), (1, 2)], &[(0, 1), (1, 1), (1, 2)]]);
        let c = CopeMatrix::from_rational_blocks(vec![b]).unwrap();
        assert!(c.is_extremal_column(0));
        assert!(!c.is_extremal_column(2));
        let q = c.quotient_extremal();
        assert_eq!(q.kept_columns, vec![0, 1]);
        assert_eq!(q.dropped_columns, vec![2]);
    }

    #[test]
    fn merge_scales_and_keeps_rank() {
        let b1 = rm(&[&[(1, 1), (0, 1)], &[(0, 1), (1, 1)]]);
        let b2 = rm(&[&[(1, 2), (1, 2)], &[(1, 2), (1, 2)]]);
        let c = CopeMatrix::from_rational_blocks(vec![b1, b2]).unwrap();
        let m = c.merge_measurements();
        assert_eq!(m.num_measurements(), 1);
        assert_eq!(m.entry(0, 0), &Scalar::ratio(1, 2));
        assert!(m.is_valid());
        assert_eq!(m.rank(), c.rank());
    }

    #[test]
    fn empty_restriction_is_rejected() {
        let c = CopeMatrix::identity(3);
        assert!(c.restrict(&[], &[0]).is_err());
        assert!(c.restrict(&[0], &[1]).is_err());
    }
}
