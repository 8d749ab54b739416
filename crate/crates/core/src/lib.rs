//! Explainable symptom-based diagnosis over a small answer-set fragment.
//!
//! The pipeline is: [`lang`] parses `.lp` text, [`ground`] instantiates
//! variables, [`solve`] computes cost-optimal answer sets, [`explain`]
//! turns derivations into justification trees, and [`eval`] scores a
//! knowledge base against a symptom dataset. [`pipeline`] strings the
//! middle three together.

pub mod eval;
pub mod explain;
pub mod ground;
pub mod lang;
pub mod pipeline;
pub mod solve;

pub use pipeline::{diagnose, Config, Diagnosis};

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error(transparent)]
    Lang(#[from] lang::Error),
    #[error(transparent)]
    Fragment(#[from] lang::FragmentError),
    #[error(transparent)]
    Ground(#[from] ground::GroundError),
    #[error(transparent)]
    Solve(#[from] solve::SolveError),
    #[error(transparent)]
    Explain(#[from] explain::ExplainError),
    #[error("the program has no answer set")]
    Unsatisfiable,
}
