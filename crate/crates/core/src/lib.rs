//! Operational theories as COPE matrices (conditional outcome probabilities, one row per
//! measurement outcome and one column per preparation), the model classes obtained by
//! factorizing them, and a contextuality certifier.
//!
//! ```
//! use copekit::{certify, theories, NmfOptions, Verdict};
//!
//! let cert = certify(&theories::boxworld(), &NmfOptions::default());
//! assert_eq!(cert.verdict, Verdict::Contextual);
//! ```

pub mod certifier;
pub mod cope;
pub mod error;
pub mod factorizer;
pub mod io;
pub mod linalg;
pub mod lp;
pub mod matrix;
pub mod model;
pub mod nmf;
pub mod parallel;
pub mod polytope;
pub mod scalar;
pub mod theories;

pub use certifier::{
    certify, exhaustive_enmf_decision, sperner_ontic_bound, sperner_span_bound, sperner_submatrix,
    vertex_forcing_certificate, Certificate, EnmfDecision, Evidence, SpernerWitness, Verdict,
};
pub use cope::{restrict_fragment, CopeMatrix, FragmentRestriction, Measurement};
pub use error::{CopeError, Result};
pub use factorizer::{gpt, pregpt_from_svd, quasi_from_gpt, trivial_ontological};
pub use matrix::{Matrix, RatMatrix, ScalarMatrix};
pub use model::{classify_model, ModelFactorization, ModelKind, VerificationReport};
pub use nmf::{enmf, nmf, NmfOptions};
pub use polytope::{span_simplex_polytope, SpanSimplexPolytope};
pub use scalar::{Backend, Rational, Scalar};
