//! Coordinate tensor calculus on charts: vector fields, forms, (1,1)-tensors,
//! bivectors, Lie derivatives and diffeomorphisms.

mod calculus;
mod chart;
mod diffeo;
mod fields;
mod forms;
pub mod linalg;

pub use calculus::{components_vanish, jacobiator, lie_bracket, lie_derivative, nijenhuis, Components3, LieDerivative};
pub use chart::Chart;
pub use diffeo::{pullback_along, Diffeo};
pub use fields::{Bivector, Tensor11, VectorField};
pub use forms::{exterior_derivative, interior_product, wedge, DiffForm};

use thiserror::Error;

use crate::symexpr::{EvalPoint, ExprError};

#[derive(Clone, Debug, Error, PartialEq)]
pub enum GeomError {
    #[error(transparent)]
    Expr(#[from] ExprError),
    #[error("chart '{0}' has no coordinates")]
    EmptyChart(String),
    #[error("duplicate coordinate '{0}'")]
    DuplicateCoordinate(String),
    #[error("chart mismatch: expected '{expected}', found '{found}'")]
    ChartMismatch { expected: String, found: String },
    #[error("expected {expected} components, found {found}")]
    ComponentCount { expected: usize, found: usize },
    #[error("expected degree {expected}, found {found}")]
    DegreeMismatch { expected: usize, found: usize },
    #[error("degree {degree} exceeds chart dimension {dim}")]
    DegreeOverflow { degree: usize, dim: usize },
    #[error("interior product of a 0-form")]
    ZeroDegree,
    #[error("coordinate index {0} out of range")]
    IndexOutOfRange(usize),
    #[error("bivector is not antisymmetric at {0}")]
    NotAntisymmetric(EvalPoint),
    #[error("Jacobian determinant vanishes identically (sample {0})")]
    SingularJacobian(EvalPoint),
    #[error("inverse map does not undo the forward map at {0}")]
    NotInverse(EvalPoint),
    #[error("symbol '{symbol}' is not a coordinate of chart '{chart}'")]
    ForeignSymbol { symbol: String, chart: String },
    #[error("could not decide {0} at the sample points")]
    Undecided(String),
}
