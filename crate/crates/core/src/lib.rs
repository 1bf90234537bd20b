//! Fractional power-series solver for time-fractional PDEs.
//!
//! A problem D_t^{nα}ψ = N[ψ] + h is solved coefficient by coefficient in the
//! basis t^{kα}/Γ(1+kα); [`oracle`] recomputes the same coefficients from a
//! transform-domain residual as an independent check.

pub mod cli;
pub mod expr;
pub mod fracseries;
pub mod grps;
pub mod oracle;
pub mod scalar;
pub mod specfun;
pub mod transform;

pub use expr::{parse, Expr};
pub use fracseries::FracSeries;
pub use grps::{solve, solve_linear, CoefficientTable, ProblemSpec};
pub use scalar::Scalar;

/// Default working precision.
pub type Real = f64;
/// Single-precision evaluation.
pub type Real32 = f32;
/// Bindings of variables to double-precision values.
pub type Binding = expr::VarBinding<Real>;
