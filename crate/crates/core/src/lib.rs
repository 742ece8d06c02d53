//! Sparse-grid discontinuous Galerkin discretizations on the unit cube.
//!
//! Functions on `[0, 1]^D` are represented in a tensor-product
//! multiwavelet basis restricted to a full or sparse level set. The crate
//! provides the 1D bases, the coefficient layout, L2 projection and
//! reconstruction, central-flux derivative operators, and time integration
//! of the scalar wave equation.

// `!(x > 0.0)` is used on purpose so that NaN is rejected too
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod basis1d;
pub mod error;
pub mod evolve;
pub mod grid;
pub mod ode;
pub mod operators;
pub mod project;
pub mod quadrature;
pub mod sparse;

pub use basis1d::{build_basis, Basis1D, PiecewisePoly, Segment};
pub use error::{Error, Result};
pub use evolve::{
    energy, travelling_wave_solver, wave_evolve, EvolveOptions, LaplacianMode, LaplacianOp, Trajectory, TravellingWave,
    WaveState,
};
pub use grid::{d2v, space_dim, v2d, CoeffDict, CoeffVector, Layout, MultiIndex, Scheme, SchemeKind, Space};
pub use ode::{Integrator, StepStats};
pub use operators::{d_matrix, grad_matrix, laplacian_matrix, Boundary, OperatorOptions};
pub use project::{mcerr, project, reconstruct, ProjectOptions, ScalarField};
pub use sparse::SparseOperator;
