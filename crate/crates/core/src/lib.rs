//! a-points of ζ^(k), their counting function, admissibility of test
//! functions, and equidistribution statistics for `{f(γ)}` modulo one.

pub mod apoint;
pub mod conditions;
pub mod counting;
pub mod dd;
pub mod equidist;
pub mod families;
pub mod oscillatory;
pub mod quadrature;
pub mod target;
pub mod zeta;

pub use target::{TargetSpec, MAX_K};
pub use zeta::{eval_shifted, eval_zeta_derivative, ComplexPoint, EvalResult, ZetaError};
