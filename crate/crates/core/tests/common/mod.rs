#![allow(dead_code)]

use copekit::scalar::rat;
use copekit::{CopeMatrix, Matrix, RatMatrix};
use rand::Rng;

/// Random layout: measurement sizes (each at least 2 outcomes) with at most `max_rows` rows.
pub fn random_blocks(rng: &mut impl Rng, max_rows: usize) -> Vec<usize> {
    let mut sizes = Vec::new();
    let mut left = max_rows;
    while left >= 2 && (sizes.is_empty() || rng.gen_bool(0.5)) {
        let s = rng.gen_range(2..=left.min(4));
        sizes.push(s);
        left -= s;
    }
    sizes
}

/// A column of `len` probabilities with denominator `den`.
pub fn random_distribution(rng: &mut impl Rng, len: usize, den: i64) -> Vec<i64> {
    let mut counts = vec![0i64; len];
    for _ in 0..den {
        counts[rng.gen_range(0..len)] += 1;
    }
    counts
}

/// Random exact COPE matrix with entries whose denominators come from `dens`.
pub fn random_cope(rng: &mut impl Rng, max_rows: usize, max_cols: usize, dens: &[i64]) -> CopeMatrix {
    let sizes = random_blocks(rng, max_rows);
    let cols = rng.gen_range(1..=max_cols);
    let blocks: Vec<RatMatrix> = sizes
        .iter()
        .map(|&s| {
            let columns: Vec<Vec<_>> = (0..cols)
                .map(|_| {
                    let den = dens[rng.gen_range(0..dens.len())];
                    random_distribution(rng, s, den).into_iter().map(|k| rat(k, den)).collect()
                })
                .collect();
            Matrix::from_fn(s, cols, |i, j| columns[j][i].clone())
        })
        .collect();
    CopeMatrix::from_rational_blocks(blocks).expect("columns are distributions")
}

/// Single-measurement matrix whose zero pattern is `zeros` (each column keeps a nonzero).
pub fn matrix_with_zero_pattern(zeros: &[Vec<bool>]) -> CopeMatrix {
    let rows = zeros.len();
    let cols = zeros[0].len();
    let data = Matrix::from_fn(rows, cols, |i, j| {
        let support = (0..rows).filter(|&r| !zeros[r][j]).count() as i64;
        if zeros[i][j] {
            rat(0, 1)
        } else {
            rat(1, support)
        }
    });
    CopeMatrix::from_rational_blocks(vec![data]).expect("columns are distributions")
}

/// Width of the subset lattice of a `k`-set: `2^k` minus a maximum matching in the strict
/// containment graph (Dilworth via König).
pub fn lattice_width(k: usize) -> usize {
    let n = 1usize << k;
    let above: Vec<Vec<usize>> = (0..n).map(|a| (0..n).filter(|&b| a != b && a & b == a).collect()).collect();
    let mut matched_to: Vec<Option<usize>> = vec![None; n];
    fn augment(a: usize, above: &[Vec<usize>], seen: &mut [bool], matched_to: &mut [Option<usize>]) -> bool {
        for &b in &above[a] {
            if !seen[b] {
                seen[b] = true;
                if matched_to[b].is_none_or(|prev| augment(prev, above, seen, matched_to)) {
                    matched_to[b] = Some(a);
                    return true;
                }
            }
        }
        false
    }
    let mut matching = 0;
    for a in 0..n {
        let mut seen = vec![false; n];
        if augment(a, &above, &mut seen, &mut matched_to) {
            matching += 1;
        }
    }
    n - matching
}
