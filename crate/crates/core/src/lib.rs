//! Certified SLOCC-equivalence testing of pure qubit states against graph
//! states.
//!
//! The crate is organised bottom-up:
//!
//! * [`pauli`] and [`bits`]: exact Pauli words in binary symplectic form.
//! * [`graph`]: simple graphs, their stabilizer generators and local
//!   complementation.
//! * [`state`]: dense state vectors, local invertible operators and the
//!   transpose bilinear form `ψᵀ O ψ`.
//! * [`conditions`]: stabilizer conditions grouped by support and classified.
//! * [`solver`]: the staged decision procedure producing a [`solver::Verdict`].
//! * [`genstab`]: separable Pauli and generalized stabilizers built from
//!   projector sums.

pub mod bits;
pub mod conditions;
pub mod error;
pub mod genstab;
pub mod graph;
pub mod pauli;
pub mod solver;
pub mod state;

pub use bits::{BitString, SiteSet, MAX_SITES};
pub use conditions::{
    classify, derive_condition, enumerate_support, scan, Category, Condition, ConditionGroup, Rhs,
};
pub use error::{Error, Result};
pub use genstab::{
    general_stabilizer_element, projector_stabilizer_element, verify_stabilizes,
    SeparableOperator,
};
pub use graph::{parse_graph, Graph};
pub use pauli::{pauli_mul, Letter, PauliWord, Phase};
pub use solver::{solve, verify_candidate, Certificate, Outcome, SolveConfig, Verdict, Witness};
pub use state::{
    apply_slocc, bilinear_form, build_graph_state, slocc_inverse, zbasis_vector, LocalMatrix,
    SloccOperator, StateVector,
};
