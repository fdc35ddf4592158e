//! Sequential realization of finite-outcome POVMs.
//!
//! A general measurement is broken into a tree of two-outcome Lüders
//! coarse-grainings. Each node is realized with one ancilla qubit: rotate the
//! system into the eigenbasis of the node effect, apply a system-controlled
//! ancilla rotation, measure the ancilla and rotate back. Later nodes use the
//! conditionally updated effects `B^{-1/2} A_j B^{-1/2}` so the overall outcome
//! statistics match the Born rule of the original POVM.

pub mod dilation;
pub mod error;
pub mod io;
pub mod linalg;
pub mod povm;
pub mod random;
pub mod sequential;
pub mod usd;

pub use dilation::{
    apply_coupling, bloch_completion, coupling_circuit, naive_naimark, peres_dimension,
    qubit_factorization, CouplingCircuit, NaimarkDilation, QubitFactorization,
};
pub use error::{Error, Result, Violation};
pub use linalg::{ComplexMatrix, HermEig, C64};
pub use povm::{
    born_probability, coarse_grain, conditional_update, lueders_branch, validate_povm, Branch,
    Effect, Partition, Povm, State, SubPovm,
};
pub use sequential::{
    execute_exact, plan, plan_binary_search, plan_outcome_decreasing, plan_with_splits, sample,
    verify_tree, MeasurementTree, OutcomeReport, Split, Strategy,
};
pub use usd::{build_usd, scenario, ScenarioKind, UsdInput, UsdProblem, UsdScenario};
