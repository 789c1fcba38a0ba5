//! Symbolic expressions over jet space.
//!
//! Expressions are kept in a canonical expanded form (sums of monomials with
//! rational coefficients and rational exponents), so most equalities are
//! decided structurally; [`equivalent`] falls back to random evaluation.

mod calculus;
mod eval;
mod expr;
mod jet;
mod parse;

pub use calculus::{euler_operator, partial, total_derivative, total_derivative_multi};
pub use eval::{equivalent, evaluate, random_binding, Compiled, PointBinding, Sampler};
pub use expr::{Atom, Expr, FuncApp, JetVar, Monomial, Name, Q};
pub use jet::{FuncDecl, JetSpace, MAX_DERIVED_ORDER};
pub use parse::parse_expr;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SymError {
    #[error("invalid jet space: {0}")]
    InvalidJetSpace(String),
    #[error("unknown symbol `{0}`")]
    UnknownSymbol(String),
    #[error("`{0}` is not a single symbol")]
    NotASymbol(String),
    #[error("derivative order {order} exceeds the supported maximum {max}")]
    OrderOverflow { order: usize, max: usize },
    #[error("`{name}` expects {expected} arguments, got {got}")]
    Arity { name: String, expected: usize, got: usize },
    #[error("division by zero in `{subtree}`")]
    DivisionByZero { subtree: String },
    #[error("unbound symbol `{0}`")]
    Unbound(String),
    #[error("no non-singular binding found after {draws} draws")]
    PersistentSingularity { draws: usize },
    #[error("parse error at {line}:{col}: {msg}")]
    Parse { line: usize, col: usize, msg: String },
    #[error("unsupported: {0}")]
    Unsupported(String),
}
