use std::fmt;

use serde::Serialize;

/// Which scalar field an expression lives in.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    /// Variable `x`, real scalars.
    Real,
    /// Variable `z`, complex scalars, holomorphic primitives only.
    Complex,
}

impl Mode {
    pub fn variable(self) -> &'static str {
        match self {
            Mode::Real => "x",
            Mode::Complex => "z",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Constant {
    Pi,
    E,
    I,
}

impl Constant {
    pub fn name(self) -> &'static str {
        match self {
            Constant::Pi => "pi",
            Constant::E => "e",
            Constant::I => "i",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Func {
    Exp,
    Log,
    Sin,
    Cos,
    Sinh,
    Cosh,
    Sqrt,
}

impl Func {
    pub const ALL: [Func; 7] = [
        Func::Exp,
        Func::Log,
        Func::Sin,
        Func::Cos,
        Func::Sinh,
        Func::Cosh,
        Func::Sqrt,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Func::Exp => "exp",
            Func::Log => "log",
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Sinh => "sinh",
            Func::Cosh => "cosh",
            Func::Sqrt => "sqrt",
        }
    }

    pub fn from_name(name: &str) -> Option<Func> {
        Func::ALL.into_iter().find(|f| f.name() == name)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

impl BinOp {
    fn symbol(self) -> &'static str {
        match self {
            BinOp::Add => " + ",
            BinOp::Sub => " - ",
            BinOp::Mul => "*",
            BinOp::Div => "/",
            BinOp::Pow => "^",
        }
    }

    fn precedence(self) -> u8 {
        match self {
            BinOp::Add | BinOp::Sub => 1,
            BinOp::Mul | BinOp::Div => 2,
            BinOp::Pow => 4,
        }
    }
}

/// Syntax tree node. Trees are built by the parser and never simplified.
#[derive(Clone, Debug, PartialEq)]
pub enum Node {
    Number(f64),
    Var,
    Const(Constant),
    Neg(Box<Node>),
    Binary(BinOp, Box<Node>, Box<Node>),
    Call(Func, Box<Node>),
}

// Precedence levels: 1 additive, 2 multiplicative, 3 unary minus, 4 power,
// 5 atoms and calls.
impl Node {
    fn precedence(&self) -> u8 {
        match self {
            Node::Binary(op, ..) => op.precedence(),
            Node::Neg(_) => 3,
            _ => 5,
        }
    }

    pub fn contains_var(&self) -> bool {
        match self {
            Node::Var => true,
            Node::Number(_) | Node::Const(_) => false,
            Node::Neg(a) | Node::Call(_, a) => a.contains_var(),
            Node::Binary(_, a, b) => a.contains_var() || b.contains_var(),
        }
    }

    pub fn depth(&self) -> usize {
        match self {
            Node::Number(_) | Node::Var | Node::Const(_) => 1,
            Node::Neg(a) | Node::Call(_, a) => 1 + a.depth(),
            Node::Binary(_, a, b) => 1 + a.depth().max(b.depth()),
        }
    }

    pub(crate) fn render(&self, var: &str, out: &mut String) {
        match self {
            Node::Number(v) => out.push_str(&format!("{v}")),
            Node::Var => out.push_str(var),
            Node::Const(c) => out.push_str(c.name()),
            Node::Neg(a) => {
                out.push('-');
                wrap(a, a.precedence() < 3, var, out);
            }
            Node::Call(f, a) => {
                out.push_str(f.name());
                out.push('(');
                a.render(var, out);
                out.push(')');
            }
            Node::Binary(op, a, b) => {
                let p = op.precedence();
                let (left_paren, right_paren) = match op {
                    // Right-associative; the exponent is parsed at unary level.
                    BinOp::Pow => (a.precedence() <= p, b.precedence() < 3),
                    _ => (a.precedence() < p, b.precedence() <= p),
                };
                wrap(a, left_paren, var, out);
                out.push_str(op.symbol());
                wrap(b, right_paren, var, out);
            }
        }
    }
}

fn wrap(node: &Node, paren: bool, var: &str, out: &mut String) {
    if paren {
        out.push('(');
        node.render(var, out);
        out.push(')');
    } else {
        node.render(var, out);
    }
}

/// A parsed coefficient function of a single variable.
#[derive(Clone, Debug, PartialEq)]
pub struct Expression {
    pub(crate) root: Node,
    pub(crate) mode: Mode,
}

impl Expression {
    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn root(&self) -> &Node {
        &self.root
    }

    /// Canonical text form; reparses to the same tree.
    pub fn render(&self) -> String {
        let mut out = String::new();
        self.root.render(self.mode.variable(), &mut out);
        out
    }
}

impl fmt::Display for Expression {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render())
    }
}
