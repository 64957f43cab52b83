//! Nearest matrices with a nonderogatory multiple eigenvalue.
//!
//! A matrix family `A(p)` has a `d`-fold eigenvalue with a single Jordan
//! block exactly where the versal functions `q_2(p), .., q_d(p)` vanish.
//! [`newton_iterate`] runs Newton's method on that system, re-choosing the
//! eigenvalue cluster each step, and [`jordan_chain`] recovers the multiple
//! eigenvalue and its generalized eigenvectors at the solution.
//! [`nearest_defective_matrix`] does the same with the matrix entries as
//! unknowns.

#![no_std]

extern crate alloc;

pub mod chain;
pub mod diag;
mod error;
pub mod family;
pub mod invariant;
pub mod linalg;
pub mod newton;
pub mod deformation;

pub use chain::{chain_residual, jordan_block, jordan_chain, multiple_eigenvalue, JordanChain};
pub use diag::{eigen_sensitivities, naive_crossing_step, nearest_double_step, versal_jacobian_diag, EigenSensitivity};
pub use error::{Error, Result};
pub use family::{
    nilpotent_perturbation, nilpotent_normal_basis, family_cusp, family_swallow_tail, family_versal_form,
    finite_difference_derivative, matrix_perturbed_nilpotent, matrix_frank, AffineFamily, FnFamily, MatrixFamily,
    ParameterDomain,
};
pub use invariant::{
    block_diagonalize, cluster_separation, diagonalize_cluster, eigenvalues, reorder_cluster, schur_decompose,
    separation_estimate, triple_from_schur, ClusterSelection, Diagonalization, InvariantTriple, TripleResiduals,
};
pub use linalg::{CMatrix, C64};
pub use newton::{
    approximate_eigenvalue, assemble_linear_system, minimal_spread_cluster, nearest_defective_matrix, newton_iterate,
    select_cluster, solve_step, InitialCluster, IterationRecord, LinearSystem, NewtonConfig, NewtonResult,
    SolveStrategy, SolverWarning,
};
pub use deformation::{
    companion_matrix, versal_jacobian, versal_matrix_gradients, versal_values, CompanionMatrix, VersalDerivatives,
    VersalLinearization, VersalValues,
};
