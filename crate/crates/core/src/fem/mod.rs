//! Continuous space-time finite elements for label-time Lagrangians: slab
//! residuals, a Newton time stepper and discrete Noether diagnostics.

mod assembly;
mod identity;
mod init;
mod kernels;
mod oned;
mod problem;
mod report;
mod solver;

pub use assembly::{assemble_el_residual, Route};
pub use identity::{
    conserved_quantity_series, current_for, fe_noether_terms, fe_pv_residual, weak_pv_limit, ManufacturedFlow, NoetherTerms,
    StreamFunction, WeakPvReport,
};
pub use init::{domain_centre, initial_coefficients, rotation_dirichlet, rotation_exact, InitialCondition};
pub use kernels::{fe_generator, CurrentKernel, Kernels};
pub use oned::{el_residual_1d, fe_noether_residual_1d, fe_noether_terms_1d, Field1d, NoetherTerms1d};
pub use problem::{DirichletFn, DiscreteProblem};
pub use report::{momentum_gauge, noether_report, NoetherResidualReport, ReportRow};
pub use solver::{solve_all, solve_slab, SlabReport, Solution, SolverConfig};

use crate::mesh::MeshError;
use crate::noether::NoetherError;
use crate::swmodels::ModelError;
use crate::symexpr::SymError;

#[derive(Debug, thiserror::Error)]
pub enum FemError {
    #[error(transparent)]
    Mesh(#[from] MeshError),
    #[error(transparent)]
    Sym(#[from] SymError),
    #[error(transparent)]
    Noether(#[from] NoetherError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("non-positive Jacobian {delta:e} in element {element} at ({:.6}, {:.6}), t = {t}", point[0], point[1])]
    NonPositiveJacobian { element: usize, point: [f64; 2], t: f64, delta: f64 },
    #[error("Newton did not converge on slab {slab}; residual history {history:?}")]
    NoConvergence { slab: usize, history: Vec<f64> },
    #[error("singular Jacobian on slab {slab}, iteration {iteration}")]
    SingularJacobian { slab: usize, iteration: usize },
    #[error("{0}")]
    Invalid(String),
    #[error("i/o: {0}")]
    Io(String),
}
