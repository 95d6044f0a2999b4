//! Dense two-phase simplex with Bland's rule, generic over exact rationals and f64.
//!
//! Problems are in standard form: `A x = b`, `x >= 0`.

use std::fmt::Debug;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_traits::{One, Signed, Zero};

use crate::scalar::Rational;

pub trait LpField:
    Clone
    + Debug
    + Zero
    + One
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    fn is_pos(&self) -> bool;
    fn is_neg(&self) -> bool;
    fn near_zero(&self) -> bool {
        !self.is_pos() && !self.is_neg()
    }
    fn less(&self, other: &Self) -> bool;
}

impl LpField for Rational {
    fn is_pos(&self) -> bool {
        self.is_positive()
    }
    fn is_neg(&self) -> bool {
        self.is_negative()
    }
    fn less(&self, other: &Self) -> bool {
        self < other
    }
}

const F64_TOL: f64 = 1e-10;

impl LpField for f64 {
    fn is_pos(&self) -> bool {
        *self > F64_TOL
    }
    fn is_neg(&self) -> bool {
        *self < -F64_TOL
    }
    fn less(&self, other: &Self) -> bool {
        *self < *other - F64_TOL
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum LpOutcome<T> {
    Optimal { x: Vec<T>, value: T },
    Infeasible,
    Unbounded,
}

impl<T> LpOutcome<T> {
    pub fn solution(self) -> Option<Vec<T>> {
        match self {
            LpOutcome::Optimal { x, .. } => Some(x),
            _ => None,
        }
    }
}

struct Tableau<T> {
    rows: Vec<Vec<T>>,
    rhs: Vec<T>,
    basis: Vec<usize>,
}

impl<T: LpField> Tableau<T> {
    fn pivot(&mut self, r: usize, c: usize, costs: &mut [T], obj: &mut T) {
        let p = self.rows[r][c].clone();
        for v in self.rows[r].iter_mut() {
            if !v.is_zero() {
                *v = v.clone() / p.clone();
            }
        }
        self.rhs[r] = self.rhs[r].clone() / p;
        let prow = self.rows[r].clone();
        let prhs = self.rhs[r].clone();
        for i in 0..self.rows.len() {
            if i == r {
                continue;
            }
            let f = self.rows[i][c].clone();
            if f.is_zero() {
                continue;
            }
            for (v, pv) in self.rows[i].iter_mut().zip(&prow) {
                if !pv.is_zero() {
                    *v = v.clone() - f.clone() * pv.clone();
                }
            }
            self.rhs[i] = self.rhs[i].clone() - f * prhs.clone();
        }
        let f = costs[c].clone();
        if !f.is_zero() {
            for (v, pv) in costs.iter_mut().zip(&prow) {
                if !pv.is_zero() {
                    *v = v.clone() - f.clone() * pv.clone();
                }
            }
            *obj = obj.clone() - f * prhs;
        }
        self.basis[r] = c;
    }

    /// Minimizes with reduced costs `costs` over columns `< active`. Returns false if unbounded.
    fn run(&mut self, costs: &mut [T], obj: &mut T, active: usize) -> bool {
        loop {
            let Some(c) = (0..active).find(|&j| costs[j].is_neg()) else {
                return true;
            };
            let mut best: Option<(usize, T)> = None;
            for i in 0..self.rows.len() {
                let a = &self.rows[i][c];
                if !a.is_pos() {
                    continue;
                }
                let ratio = self.rhs[i].clone() / a.clone();
                best = match best {
                    None => Some((i, ratio)),
                    Some((bi, br)) => {
                        if ratio.less(&br) || (!br.less(&ratio) && self.basis[i] < self.basis[bi]) {
                            Some((i, ratio))
                        } else {
                            Some((bi, br))
                        }
                    }
                };
            }
            let Some((r, _)) = best else {
                return false;
            };
            self.pivot(r, c, costs, obj);
        }
    }
}

/// Minimizes `cost . x` subject to `a x = b`, `x >= 0`.
pub fn minimize<T: LpField>(a: &[Vec<T>], b: &[T], cost: &[T]) -> LpOutcome<T> {
    let m = a.len();
    let n = cost.len();
    assert_eq!(b.len(), m);
    assert!(a.iter().all(|r| r.len() == n));

    let mut rows = Vec::with_capacity(m);
    let mut rhs = Vec::with_capacity(m);
    for (i, (row, bi)) in a.iter().zip(b).enumerate() {
        let flip = bi.is_neg();
        let mut r: Vec<T> = row.iter().map(|v| if flip { -v.clone() } else { v.clone() }).collect();
        r.extend((0..m).map(|k| if k == i { T::one() } else { T::zero() }));
        rows.push(r);
        rhs.push(if flip { -bi.clone() } else { bi.clone() });
    }
    let mut t = Tableau { rows, rhs, basis: (n..n + m).collect() };

    // Phase I: minimize the sum of artificials.
    let mut costs: Vec<T> = (0..n + m)
        .map(|j| {
            if j < n {
                t.rows.iter().fold(T::zero(), |acc, r| acc - r[j].clone())
            } else {
                T::zero()
            }
        })
        .collect();
    let mut obj = t.rhs.iter().fold(T::zero(), |acc, v| acc - v.clone());
    t.run(&mut costs, &mut obj, n + m);
    if obj.is_neg() {
        return LpOutcome::Infeasible;
    }

    // Drive remaining artificials out of the basis, dropping redundant rows.
    let mut i = 0;
    while i < t.rows.len() {
        if t.basis[i] >= n {
            if let Some(c) = (0..n).find(|&j| !t.rows[i][j].near_zero()) {
                let mut dummy = vec![T::zero(); n + m];
                let mut dobj = T::zero();
                t.pivot(i, c, &mut dummy, &mut dobj);
            } else {
                t.rows.remove(i);
                t.rhs.remove(i);
                t.basis.remove(i);
                continue;
            }
        }
        i += 1;
    }
    for r in t.rows.iter_mut() {
        r.truncate(n);
    }

    // Phase II.
    let mut costs: Vec<T> = cost.to_vec();
    let mut obj = T::zero();
    for (r, &bv) in t.basis.iter().enumerate() {
        let cb = cost[bv].clone();
        if cb.is_zero() {
            continue;
        }
        for (cj, a) in costs.iter_mut().zip(&t.rows[r]).take(n) {
            *cj = cj.clone() - cb.clone() * a.clone();
        }
        obj = obj - cb * t.rhs[r].clone();
    }
    if !t.run(&mut costs, &mut obj, n) {
        return LpOutcome::Unbounded;
    }
    let mut x = vec![T::zero(); n];
    for (r, &bv) in t.basis.iter().enumerate() {
        x[bv] = t.rhs[r].clone();
    }
    LpOutcome::Optimal { x, value: -obj }
}

/// A point of `{x >= 0 : a x = b}`, if one exists.
pub fn feasible<T: LpField>(a: &[Vec<T>], b: &[T]) -> Option<Vec<T>> {
    let n = a.first().map_or(0, Vec::len);
    if a.is_empty() {
        return Some(vec![T::zero(); n]);
    }
    minimize(a, b, &vec![T::zero(); n]).solution()
}

/// Incremental builder for equality systems over a flat variable vector.
#[derive(Clone, Debug)]
pub struct Constraints<T> {
    pub vars: usize,
    pub rows: Vec<Vec<T>>,
    pub rhs: Vec<T>,
}

impl<T: LpField> Constraints<T> {
    pub fn new(vars: usize) -> Self {
        Constraints { vars, rows: Vec::new(), rhs: Vec::new() }
    }

    /// Adds `sum coef * x[idx] = rhs`.
    pub fn push(&mut self, terms: impl IntoIterator<Item = (usize, T)>, rhs: T) {
        let mut row = vec![T::zero(); self.vars];
        for (i, c) in terms {
            row[i] = row[i].clone() + c;
        }
        self.rows.push(row);
        self.rhs.push(rhs);
    }

    pub fn solve(&self) -> Option<Vec<T>> {
        feasible(&self.rows, &self.rhs)
    }

    pub fn minimize(&self, cost: &[T]) -> LpOutcome<T> {
        minimize(&self.rows, &self.rhs, cost)
    }
}
