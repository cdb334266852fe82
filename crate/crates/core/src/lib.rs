// SPDX-License-Identifier: Apache-2.0

//! Symbolic expressions, first-order PDE systems of Darboux type, and
//! Picard-iteration solvers for them on tensor grids.
//!
//! A system prescribes partial derivatives `u^I_{x_i} = F^I_i(x; U)` of
//! unknowns `u^I` along the axes `i` of a multi-index `I`, with data for
//! `u^I` on the hyperplane `{x_I = x̄_I}`. Determined systems (every `|I| = 1`)
//! are solved directly by [`solve_determined`]; overdetermined ones are
//! checked with [`check_integrability`] and solved by [`solve_darboux`].

pub mod darboux;
pub mod determined;
pub mod expr;
pub mod fixtures;
pub mod grid;
pub mod harness;
pub mod integrability;
pub mod sampling;
pub mod system;

pub use darboux::{
    assemble_data_for_system_n, delta_residuals, intersection_consistency, solve_darboux, ConsistencyReport,
    DarbouxOptions, DarbouxSolution, DeltaReport,
};
pub use determined::{
    estimate_constants, grid_for, solve_determined, solve_determined_with_data, Constants, GridSolution, Init,
    PicardOptions, SolveError,
};
pub use expr::{parse, Env, EvalError, Expr, ParseError, PointEvalError};
pub use grid::{Axis, Grid, GridError};
pub use harness::{
    candidate_residual, convergence_study, error_report, read_csv, write_csv, CandidateReport, ConvergenceReport,
    ErrorReport, ExprMap, HarnessError, Order,
};
pub use integrability::{check_integrability, residual_at_point, CheckOptions, IntegrabilityReport};
pub use system::{
    parse_spec_file, validate, validate_lenient, write_spec_file, FormatError, MultiIndex, SpecFile, SystemSpec,
    ValidatedSystem, ValidationError, Violation,
};
