//! Estimation of the acid-destruction rate in a three-field tumor-invasion
//! reaction-diffusion model.
//!
//! The forward problem is advanced by Lie splitting: a node-wise adaptive
//! Runge-Kutta reaction step followed by a semi-implicit P1 diffusion step on
//! an adaptively refined mesh. The parameter `delta1` is recovered from
//! measurements of the third field by a projected line-search minimizer
//! driven by an adjoint gradient computed on the coarse mesh.

pub mod adjoint;
pub mod error;
pub mod fem;
pub mod forward;
pub mod inverse;
pub mod io;
pub mod mesh;
pub mod ode;
pub mod parallel;

pub use adjoint::{objective, reduced_gradient, solve_adjoint, AdjointTrajectory};
pub use error::{Error, Result};
pub use fem::{FemSpace, NodalField};
pub use forward::{
    solve_direct, ErrorIndicators, InitialProfile, ModelParams, SolverConfig, StateField, Trajectory,
};
pub use inverse::{minimize, EstimationProblem, EstimationResult};
pub use mesh::{make_uniform_mesh, Mesh};
