//! Symbolic scalar engine: parse, differentiate, substitute, evaluate and
//! zero-test expressions in chart coordinates.
//!
//! Constants are exact rationals; floats appear only at evaluation time.
//! Canonical simplification is deliberately shallow (see [`expr`]); the
//! authority on whether two expressions agree is [`equal`].

mod diff;
mod equal;
mod eval;
mod expr;
mod parse;
mod print;

pub use equal::{equal, equal_all, is_zero, Equality, SampleConfig};
pub use eval::{EvalPoint, FunctionEnv, SharedEnv};
pub use expr::{Expr, Func, Node, Rational, BUILTIN_FUNCTIONS};
pub use parse::{parse, parse_rational, Scope};

use thiserror::Error;

#[derive(Clone, Debug, Error, PartialEq)]
pub enum ExprError {
    #[error("syntax error at offset {position}: {message}")]
    Syntax { position: usize, message: String },
    #[error("unknown symbol '{0}'")]
    UnknownSymbol(String),
    #[error("function name '{0}' clashes with a builtin or coordinate")]
    NameClash(String),
    #[error("unbound symbol '{0}'")]
    UnboundSymbol(String),
    #[error("domain error: {0}")]
    Domain(String),
}
