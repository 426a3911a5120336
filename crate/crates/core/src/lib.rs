//! Finite-difference laboratory for the penalized boundary obstacle problem
//!
//! ```text
//! Laplace u = 0 in the half-box,  u_y = beta_eps(u) on {y = 0},  u = g elsewhere,
//! ```
//!
//! together with the quantities used to test its epsilon-uniform estimates:
//! semiconvexity constants, the weighted energy `phi(r)` of `u_y`, Hölder
//! seminorms, growth fits and the half-sphere eigenvalue.
//!
//! Everything numerical is generic over [`Real`] (`f32` or `f64`); the
//! `*64` aliases below fix the double precision used by the experiments.

pub mod error;
pub mod estimators;
pub mod grid;
pub mod linalg;
pub mod penalization;
pub mod scalar;
pub mod solver;
pub mod spectral;

pub use error::{Error, Result};
pub use grid::{
    build_grid, cell_gradient_norm_sq, cylinder_height, laplacian_residual, normal_trace, sup_cylinder,
    sup_cylinder_trace, weighted_ball_integral, CellField, Field, FlatPoint, Grid, GridSpec, LateralBoundary,
    NodeClass, Point, Trace,
};
pub use penalization::{admissibility_check, AdmissibilityItem, AdmissibilityReport, Penalization, PenaltyKind};
pub use scalar::Real;
pub use solver::{
    energy, oracle_minimize, rescaled_solution, solve_penalized, solve_signorini, DirichletData, SolveResult,
};

pub type GridSpec64 = GridSpec<f64>;
pub type Grid64 = Grid<f64>;
pub type Field64 = Field<f64>;
pub type Trace64 = Trace<f64>;
pub type Penalization64 = Penalization<f64>;
pub type DirichletData64 = DirichletData<f64>;
pub type SolveResult64 = SolveResult<f64>;

pub type Grid32 = Grid<f32>;
pub type Field32 = Field<f32>;
pub type Penalization32 = Penalization<f32>;
pub type SolveResult32 = SolveResult<f32>;
