//! Fourth-order compact finite-difference solvers for linear and nonlinear,
//! steady and unsteady convection-diffusion-reaction equations on uniform
//! Cartesian grids in 2D (9-point stencil) and 3D (19-point stencil), with
//! a convergence-study harness.

pub mod coefficients;
pub mod config;
pub mod error;
pub mod expr;
pub mod fd_ops;
pub mod grid;
pub mod jet;
pub mod nonlinear;
pub mod problems;
pub mod stencil2d;
pub mod stencil3d;
pub mod study;
pub mod system;
pub mod verify;
pub mod timestep;

pub use coefficients::{CoefficientBundle, Integrator, TimeSliceContext};
pub use error::{Error, Result};
pub use grid::{classify, lex_index, make_grid, Field, GridSpec, NodeIndex, TimeGrid};
pub use problems::{example, Kind, Problem};
pub use study::{run_study, ConvergenceReport, StudyConfig};
pub use system::{SolveConfig, SparseSystem};

#[cfg(test)]
mod concurrency_contracts {
    fn assert_shareable<T: Send + Sync>() {}

    #[test]
    fn core_types_are_shareable_across_workers() {
        assert_shareable::<crate::grid::GridSpec>();
        assert_shareable::<crate::grid::Field>();
        assert_shareable::<crate::problems::Problem>();
        assert_shareable::<crate::coefficients::CoefficientBundle>();
        assert_shareable::<crate::system::SparseSystem>();
        assert_shareable::<crate::expr::Expr>();
        assert_shareable::<crate::fd_ops::OperatorSetting>();
    }
}
