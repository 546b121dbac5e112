//! Algebraic tensor networks: tensors whose entries are multivariate
//! polynomials with complex coefficients, indexed by the basis
//! {|0><0|, |0><1|, |1><0|, |1><1|} of 2x2 matrices.
//!
//! The crate provides the full pipeline from quantum circuits with symbolic
//! inputs down to scalar polynomials:
//!
//! * [`poly`] — sparse multivariate polynomials over complex coefficients,
//! * [`tensor`] — algebraic tensors and pairwise contraction,
//! * [`network`] — tensor networks, validation, and full contraction,
//! * [`circuit`] — quantum circuits as DAGs plus a dense state-vector oracle,
//! * [`convert`] — circuit-to-network conversion and oracle cross-checking,
//! * [`decomp`] — tree decompositions, carving decompositions, and widths,
//! * [`reduce`] — carving-guided size reduction of variable-constrained networks,
//! * [`distinct`] — element-distinctness truth tables and subfunction counting,
//! * [`gen`] — seeded random instances used by the verification suite.
//!
//! With the `parallel` feature (default) the evaluation sweeps, conversion,
//! component contractions, and subfunction enumeration run on rayon; without
//! it every code path falls back to sequential iteration with identical
//! results.

pub mod circuit;
pub mod convert;
pub mod decomp;
pub mod distinct;
pub mod gen;
pub mod graph;
pub mod network;
mod par;
pub mod poly;
pub mod reduce;
pub mod tensor;

/// Coefficients with magnitude at most this are pruned from polynomials,
/// so the zero polynomial has a unique representation.
pub const ZERO_EPS: f64 = 1e-12;

/// Half-gap around the 1/2 acceptance threshold: a network value within
/// this distance of 1/2 is reported as ambiguous rather than rounded.
pub const GAP_EPS: f64 = 1e-9;

/// Default numeric tolerance for cross-checking two evaluation routes.
pub const DEFAULT_TOLERANCE: f64 = 1e-9;

/// Hard cap on qubit count for the dense state-vector oracle.
pub const MAX_ORACLE_QUBITS: usize = 14;

pub use num_complex::Complex64;
pub use distinct::{BlockedVarSet, TruthTable};
pub use graph::Graph;
pub use network::TensorNetwork;
pub use poly::{Assignment, Monomial, Polynomial, VarSet};
pub use tensor::{AlgebraicTensor, PiElement};
