//! Exact spectra of two coupled angular momenta (`omega*L3 + delta*R3 +
//! g*L1*R1`) and of the quantum Rabi model it limits to.
//!
//! The finite model is block tridiagonal in the `m_l` basis. For r = 1/2 it
//! splits into two scalar parity chains whose terminating continued fractions
//! are solved exactly with Sturm bisection; general blocks go through the
//! transfer-matrix determinant condition. The same machinery with couplings
//! `g*sqrt(k)` solves the Rabi model under adaptive truncation, and the
//! contraction module verifies numerically that the finite spectra converge
//! to the Rabi spectrum as the large spin grows.
//!
//! Every solver is validated against the in-repo dense Jacobi eigensolver in
//! [`oracle`].

pub mod contraction;
pub mod error;
pub mod model;
pub mod oracle;
pub mod spectra;
pub mod transfer;
pub mod tridiag;
pub mod validate;

pub use error::{Result, SolverError};
pub use model::{
    angular_momentum_matrices, assemble_dense, block_charges, build_hl_blocks,
    verify_selection_rule, AngularMomentumRep, BlockTridiagonal, ModelParams, Spin,
};
pub use spectra::{
    hl_parity_tridiagonal, hl_spectrum, rabi_parity_tridiagonal, rabi_spectrum, Level, Parity,
    RabiParams, SolveMeta, SpectrumResult,
};
pub use tridiag::{
    bracket_and_refine, delta_sequence, eigenvalue_count_below, sk_value, SturmEvaluation,
    Tridiagonal,
};
