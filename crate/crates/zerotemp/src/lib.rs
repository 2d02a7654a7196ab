//! Equilibrium states of locally constant potentials on one-dimensional
//! subshifts of finite type, and their zero-temperature limits.
//!
//! A system is a finite digraph `G` (the topological Markov chain) together
//! with a rational arrow potential `phi` (maximized as the inverse
//! temperature beta grows) and a real arrow potential `psi` (tie-breaker).
//! The Gibbs equilibrium state of `beta*phi + psi` is the 1-step Markov
//! measure built from the Perron data of the transfer matrix
//! `M(a,b) = exp(beta*phi(a,b) + psi(a,b))`.  As `beta -> oo` these measures
//! converge to a finite convex combination `sum_J alpha_J nu_J` over the
//! heavy components of the phi-maximizing subshift; the weights are computed
//! exactly by a finite renormalization recursion, not by numerical limits.
//!
//! Module map:
//! * [`graph`] — digraphs, transitive components, periods, circuits, paths.
//! * [`potentials`] — exact-rational phi, recoding, maximization, normalization.
//! * [`perron`] — transfer matrices, certified Perron eigensystems, measures.
//! * [`renorm`] — heavy components, renormalized systems, the limit weights.
//! * [`finite_beta`] — finite-temperature sweeps and empirical verification.
//! * [`sysspec`] — the JSON input format and serializable reports.

pub mod bigfloat;
pub mod finite_beta;
#[doc(hidden)]
pub mod fixtures;
pub mod graph;
pub mod perron;
pub mod potentials;
pub mod renorm;
pub mod sysspec;

use thiserror::Error;

/// Tolerance for heavy/non-heavy spectral-radius classification.
pub const EPS_RHO: f64 = 1e-9;
/// Default eigensystem tolerance; downstream tolerances derive from it.
pub const EIG_TOL: f64 = 1e-12;

#[derive(Debug, Error)]
pub enum Error {
    #[error("duplicate symbol `{0}` in alphabet")]
    DuplicateSymbol(String),
    #[error("arrow endpoint `{0}` is not a declared symbol")]
    DanglingArrowEndpoint(String),
    #[error("alphabet is empty")]
    EmptyAlphabet,
    #[error("word key `{0}` does not have length r+1 = {1}")]
    InconsistentWordSet(String, usize),
    #[error("no admissible word: the language is empty")]
    EmptyLanguage,
    #[error("graph has no circuit; no invariant measure exists")]
    NoCircuit,
    #[error("matrix pattern is not irreducible")]
    NotIrreducible,
    #[error("return series diverges at vertex `{0}` (spectral radius {1} >= 1)")]
    DivergentSeries(String, f64),
    #[error("symbol `{0}` is not in the alphabet")]
    SymbolNotInAlphabet(String),
    #[error("arrow ({0},{1}) is not in the graph")]
    ArrowNotInGraph(String, String),
    #[error("heavy component {0} contains a circuit with nonzero phi-sum (upstream bug)")]
    InconsistentHeavyComponent(usize),
    #[error("renormalized graph is not irreducible; arrows: {0}")]
    RenormalizedNotIrreducible(String),
    #[error("renormalization depth exceeded cap {0}")]
    IterationCap(usize),
    #[error("period p = {0} is not a multiple of the matrix period {1} exceeding the word length")]
    BadPeriodMultiple(usize, usize),
    #[error("fewer than 3 usable points in decay window")]
    DegenerateWindow,
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
