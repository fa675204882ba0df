//! Implicit solutions to a family of Lorentz-invariant nonlinear PDEs
//! (Bateman, the bordered-Hessian Universal Field Equation, homogeneous
//! Monge-Ampère, the first-order Monge system, and the linear wave
//! equation), built from user-supplied function families through a linear
//! ansatz and verified by implicit differentiation and determinant
//! evaluation.
//!
//! The pipeline: construct an [`solve::AnsatzSystem`] (or explicit field)
//! with the builders in [`constructors`], solve it over a grid with
//! [`solve::grid_continuation`], differentiate the implicit field with
//! [`calculus::implicit_jet`], and evaluate the matching residual from
//! [`residuals`]. Everything differentiates through [`jet::Jet2`],
//! second-order truncated Taylor arithmetic.

#![allow(clippy::needless_range_loop)]

pub mod calculus;
pub mod constructors;
pub mod expr;
pub mod homogeneity;
pub mod jet;
mod linalg;
pub mod presets;
pub mod residuals;
pub mod solve;

pub use calculus::{ChaundyDiagnostics, ScalarFieldSample};
pub use expr::{EvalError, Expr, ParseError, SmoothMap};
pub use homogeneity::{homogeneity_check, HomogeneousMap};
pub use jet::{Jet2, JetError};
pub use residuals::{ResidualValue, SignConvention, VectorFieldSample};
pub use solve::{
    AnsatzSystem, AxisSpec, GridSpec, NewtonOptions, SolutionBranch, SolveError, TraversalPolicy,
};
