//! Factorizations `C = effects * states` and their classification into model classes.

use std::fmt;

use num_traits::One;
use serde::{Deserialize, Serialize};

use crate::cope::CopeMatrix;
use crate::error::{CopeError, Result};
use crate::linalg;
use crate::matrix::ScalarMatrix;
use crate::scalar::{Backend, Scalar};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum ModelKind {
    PreGpt,
    Gpt,
    Quasiprobabilistic,
    Ontological,
    NoncontextualOntological,
}

impl ModelKind {
    pub const ALL: [ModelKind; 5] = [
        ModelKind::PreGpt,
        ModelKind::Gpt,
        ModelKind::Quasiprobabilistic,
        ModelKind::Ontological,
        ModelKind::NoncontextualOntological,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ModelKind::PreGpt => "PreGPT",
            ModelKind::Gpt => "GPT",
            ModelKind::Quasiprobabilistic => "Quasiprobabilistic",
            ModelKind::Ontological => "Ontological",
            ModelKind::NoncontextualOntological => "NoncontextualOntological",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.name().eq_ignore_ascii_case(s))
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Effects (rows grouped into the source matrix's measurement blocks) and states.
#[derive(Clone, Debug, PartialEq)]
pub struct ModelFactorization {
    pub effects: ScalarMatrix,
    pub states: ScalarMatrix,
    pub unit: Vec<Scalar>,
    pub kind: ModelKind,
    pub block_sizes: Vec<usize>,
    pub backend: Backend,
}

impl ModelFactorization {
    /// Takes the unit from the first block's row sum.
    pub fn new(
        effects: ScalarMatrix,
        states: ScalarMatrix,
        block_sizes: Vec<usize>,
        kind: ModelKind,
        backend: Backend,
    ) -> Result<Self> {
        if effects.cols() != states.rows() {
            return Err(CopeError::Dimension(format!(
                "effects have {} columns but states have {} rows",
                effects.cols(),
                states.rows()
            )));
        }
        if block_sizes.iter().sum::<usize>() != effects.rows() || block_sizes.is_empty() {
            return Err(CopeError::Dimension("block sizes do not cover the effect rows".into()));
        }
        let effects = effects.convert(backend);
        let states = states.convert(backend);
        let unit = effects.row_sum(0..block_sizes[0]);
        Ok(ModelFactorization { effects, states, unit, kind, block_sizes, backend })
    }

    pub fn inner_dim(&self) -> usize {
        self.effects.cols()
    }

    pub fn reconstruct(&self) -> ScalarMatrix {
        self.effects.matmul(&self.states)
    }

    pub fn with_kind(mut self, kind: ModelKind) -> Self {
        self.kind = kind;
        self
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub reconstruction_ok: bool,
    pub unit_ok: bool,
    pub unit_is_ones: bool,
    pub nonnegative_ok: bool,
    pub states_column_stochastic_ok: bool,
    pub rank_c: usize,
    pub rank_effects: usize,
    pub rank_states: usize,
    pub equirank_ok: bool,
    pub inferred_kinds: Vec<ModelKind>,
}

impl VerificationReport {
    pub fn is(&self, kind: ModelKind) -> bool {
        self.inferred_kinds.contains(&kind)
    }
}

/// Checks which model classes a factorization belongs to, ignoring its `kind` tag.
pub fn classify_model(c: &CopeMatrix, m: &ModelFactorization) -> Result<VerificationReport> {
    if m.effects.rows() != c.num_rows()
        || m.states.cols() != c.num_preparations()
        || m.effects.cols() != m.states.rows()
        || m.unit.len() != m.inner_dim()
    {
        return Err(CopeError::Dimension(format!(
            "model {}x{} * {}x{} against a {}x{} matrix",
            m.effects.rows(),
            m.effects.cols(),
            m.states.rows(),
            m.states.cols(),
            c.num_rows(),
            c.num_preparations()
        )));
    }
    if m.block_sizes != c.block_sizes() {
        return Err(CopeError::Dimension("model blocks differ from the matrix's measurements".into()));
    }
    let be = c.backend().join(m.backend);
    let one = Scalar::one();

    let reconstruction_ok = m.reconstruct().approx_eq(c.data(), be);
    let mut unit_ok = true;
    for j in 0..c.num_measurements() {
        let sums = m.effects.row_sum(c.block_range(j));
        unit_ok &= sums.iter().zip(&m.unit).all(|(a, b)| be.eq(a, b));
    }
    let unit_is_ones = m.unit.iter().all(|u| be.eq(u, &one));
    let nonnegative_ok = m.effects.iter().chain(m.states.iter()).all(|v| be.is_nonneg(v));
    let states_column_stochastic_ok = m.states.col_sums().iter().all(|s| be.eq(s, &one));

    let rank_c = c.rank();
    let rank_effects = linalg::rank(&m.effects, be);
    let rank_states = linalg::rank(&m.states, be);
    let equirank_ok = rank_c == rank_effects && rank_c == rank_states;

    let pregpt = reconstruction_ok && unit_ok;
    let gpt = pregpt && equirank_ok;
    let ontological = pregpt && nonnegative_ok && unit_is_ones && states_column_stochastic_ok;
    let mut inferred_kinds = Vec::new();
    if pregpt {
        inferred_kinds.push(ModelKind::PreGpt);
    }
    if gpt {
        inferred_kinds.push(ModelKind::Gpt);
    }
    if gpt && unit_is_ones {
        inferred_kinds.push(ModelKind::Quasiprobabilistic);
    }
    if ontological {
        inferred_kinds.push(ModelKind::Ontological);
    }
    if ontological && equirank_ok {
        inferred_kinds.push(ModelKind::NoncontextualOntological);
    }
    Ok(VerificationReport {
        reconstruction_ok,
        unit_ok,
        unit_is_ones,
        nonnegative_ok,
        states_column_stochastic_ok,
        rank_c,
        rank_effects,
        rank_states,
        equirank_ok,
        inferred_kinds,
    })
}

/// All-ones row vector in the given backend.
pub(crate) fn ones(n: usize, backend: Backend) -> Vec<Scalar> {
    vec![backend.one(); n]
}
