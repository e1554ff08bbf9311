//! Coefficient functions `h`: parsing, rendering and second-order jet
//! evaluation over real or complex scalars.

mod ast;
mod eval;
mod parse;

pub use ast::{BinOp, Constant, Expression, Func, Mode, Node};
pub use eval::eval_jet2;
pub use parse::parse;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ExprError {
    #[error("syntax error at position {position}: expected one of {expected:?}, found {found}")]
    Syntax {
        position: usize,
        expected: Vec<String>,
        found: String,
    },
    #[error("unknown identifier `{name}` at position {position}")]
    UnknownIdentifier { name: String, position: usize },
    #[error("`{name}` at position {position} is not holomorphic")]
    NonHolomorphicPrimitive { name: String, position: usize },
    #[error("domain error: {0}")]
    Domain(String),
    #[error("complex-mode expression evaluated in real arithmetic")]
    ModeMismatch,
}

impl Expression {
    pub fn parse(source: &str, mode: Mode) -> Result<Self, ExprError> {
        parse(source, mode)
    }

    pub fn jet<S: crate::scalar::Scalar>(&self, at: S) -> Result<crate::jet::Jet2<S>, ExprError> {
        eval_jet2(self, at)
    }

    /// The same formula read as a real function of `x`. Fails for complex
    /// expressions that use `i`.
    pub fn to_real(&self) -> Result<Expression, ExprError> {
        let mut text = String::new();
        self.root.render(Mode::Real.variable(), &mut text);
        Expression::parse(&text, Mode::Real)
    }
}
