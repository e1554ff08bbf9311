//! Recursive-descent parser.
//!
//! ```text
//! expr    := term (('+' | '-') term)*
//! term    := unary (('*' | '/') unary)*
//! unary   := ('-' | '+') unary | power
//! power   := primary ('^' unary)?
//! primary := number | ident | ident '(' expr ')' | '(' expr ')'
//! ```
//!
//! `^` is right-associative and binds tighter than unary minus, so `-x^2`
//! is `-(x^2)` and `2^-1` is accepted.

use super::ast::{BinOp, Constant, Expression, Func, Mode, Node};
use super::ExprError;

const NON_HOLOMORPHIC: [&str; 6] = ["abs", "conj", "re", "im", "arg", "floor"];

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    End,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Num(v) => format!("number {v}"),
            Tok::Ident(s) => format!("identifier `{s}`"),
            Tok::Plus => "`+`".into(),
            Tok::Minus => "`-`".into(),
            Tok::Star => "`*`".into(),
            Tok::Slash => "`/`".into(),
            Tok::Caret => "`^`".into(),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::End => "end of input".into(),
        }
    }
}

fn tokenize(src: &str) -> Result<Vec<(usize, Tok)>, ExprError> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        let start = i;
        let tok = match c {
            '+' => Tok::Plus,
            '-' => Tok::Minus,
            '*' => Tok::Star,
            '/' => Tok::Slash,
            '^' => Tok::Caret,
            '(' => Tok::LParen,
            ')' => Tok::RParen,
            '0'..='9' | '.' => {
                while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '.') {
                    i += 1;
                }
                // Exponent part only when a digit follows, so `2e` stays `2` `e`.
                if i < chars.len() && (chars[i] == 'e' || chars[i] == 'E') {
                    let mut j = i + 1;
                    if j < chars.len() && (chars[j] == '+' || chars[j] == '-') {
                        j += 1;
                    }
                    if j < chars.len() && chars[j].is_ascii_digit() {
                        i = j;
                        while i < chars.len() && chars[i].is_ascii_digit() {
                            i += 1;
                        }
                    }
                }
                let text: String = chars[start..i].iter().collect();
                let value = text.parse::<f64>().map_err(|_| ExprError::Syntax {
                    position: start,
                    expected: vec!["number".into()],
                    found: format!("`{text}`"),
                })?;
                out.push((start, Tok::Num(value)));
                continue;
            }
            c if c.is_alphabetic() || c == '_' => {
                while i < chars.len() && (chars[i].is_alphanumeric() || chars[i] == '_') {
                    i += 1;
                }
                out.push((start, Tok::Ident(chars[start..i].iter().collect())));
                continue;
            }
            other => {
                return Err(ExprError::Syntax {
                    position: start,
                    expected: vec!["operator".into(), "operand".into()],
                    found: format!("`{other}`"),
                })
            }
        };
        out.push((start, tok));
        i += 1;
    }
    out.push((chars.len(), Tok::End));
    Ok(out)
}

struct Parser {
    toks: Vec<(usize, Tok)>,
    pos: usize,
    mode: Mode,
}

const OPERAND: [&str; 4] = ["number", "identifier", "`(`", "`-`"];

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].1
    }

    fn offset(&self) -> usize {
        self.toks[self.pos].0
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].1.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn error(&self, expected: &[&str]) -> ExprError {
        ExprError::Syntax {
            position: self.offset(),
            expected: expected.iter().map(|s| s.to_string()).collect(),
            found: self.peek().describe(),
        }
    }

    fn expr(&mut self) -> Result<Node, ExprError> {
        let mut lhs = self.term()?;
        loop {
            let op = match self.peek() {
                Tok::Plus => BinOp::Add,
                Tok::Minus => BinOp::Sub,
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = self.term()?;
            lhs = Node::Binary(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn term(&mut self) -> Result<Node, ExprError> {
        let mut lhs = self.unary()?;
        loop {
            let op = match self.peek() {
                Tok::Star => BinOp::Mul,
                Tok::Slash => BinOp::Div,
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = self.unary()?;
            lhs = Node::Binary(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn unary(&mut self) -> Result<Node, ExprError> {
        match self.peek() {
            Tok::Minus => {
                self.bump();
                Ok(Node::Neg(Box::new(self.unary()?)))
            }
            Tok::Plus => {
                self.bump();
                self.unary()
            }
            _ => self.power(),
        }
    }

    fn power(&mut self) -> Result<Node, ExprError> {
        let base = self.primary()?;
        if *self.peek() == Tok::Caret {
            self.bump();
            let exponent = self.unary()?;
            return Ok(Node::Binary(BinOp::Pow, Box::new(base), Box::new(exponent)));
        }
        Ok(base)
    }

    fn primary(&mut self) -> Result<Node, ExprError> {
        let position = self.offset();
        match self.peek().clone() {
            Tok::Num(v) => {
                self.bump();
                Ok(Node::Number(v))
            }
            Tok::LParen => {
                self.bump();
                let inner = self.expr()?;
                if *self.peek() != Tok::RParen {
                    return Err(self.error(&["`)`", "operator"]));
                }
                self.bump();
                Ok(inner)
            }
            Tok::Ident(name) => {
                self.bump();
                if *self.peek() == Tok::LParen {
                    let func = self.function(&name, position)?;
                    self.bump();
                    let arg = self.expr()?;
                    if *self.peek() != Tok::RParen {
                        return Err(self.error(&["`)`", "operator"]));
                    }
                    self.bump();
                    return Ok(Node::Call(func, Box::new(arg)));
                }
                self.identifier(&name, position)
            }
            _ => Err(self.error(&OPERAND)),
        }
    }

    fn function(&self, name: &str, position: usize) -> Result<Func, ExprError> {
        if let Some(f) = Func::from_name(name) {
            return Ok(f);
        }
        if self.mode == Mode::Complex && NON_HOLOMORPHIC.contains(&name) {
            return Err(ExprError::NonHolomorphicPrimitive {
                name: name.to_string(),
                position,
            });
        }
        Err(ExprError::UnknownIdentifier {
            name: name.to_string(),
            position,
        })
    }

    fn identifier(&self, name: &str, position: usize) -> Result<Node, ExprError> {
        match name {
            _ if name == self.mode.variable() => Ok(Node::Var),
            "pi" => Ok(Node::Const(Constant::Pi)),
            "e" => Ok(Node::Const(Constant::E)),
            "i" if self.mode == Mode::Complex => Ok(Node::Const(Constant::I)),
            _ => Err(ExprError::UnknownIdentifier {
                name: name.to_string(),
                position,
            }),
        }
    }
}

/// Parse `source` as a function of `x` (real mode) or `z` (complex mode).
pub fn parse(source: &str, mode: Mode) -> Result<Expression, ExprError> {
    let toks = tokenize(source)?;
    let mut p = Parser { toks, pos: 0, mode };
    let root = p.expr()?;
    if *p.peek() != Tok::End {
        return Err(p.error(&["operator", "end of input"]));
    }
    Ok(Expression { root, mode })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn num(v: f64) -> Box<Node> {
        Box::new(Node::Number(v))
    }

    #[test]
    fn polynomial_smoke_case() {
        let e = parse("x^2 + 1", Mode::Real).unwrap();
        assert_eq!(
            e.root,
            Node::Binary(
                BinOp::Add,
                Box::new(Node::Binary(BinOp::Pow, Box::new(Node::Var), num(2.0))),
                num(1.0)
            )
        );
    }

    #[test]
    fn dangling_operator_reports_position() {
        match parse("2*", Mode::Real) {
            Err(ExprError::Syntax { position, expected, .. }) => {
                assert_eq!(position, 2);
                assert!(expected.iter().any(|e| e == "number"));
            }
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(
            parse("", Mode::Real),
            Err(ExprError::Syntax { position: 0, .. })
        ));
        assert!(matches!(
            parse("(x + 1", Mode::Real),
            Err(ExprError::Syntax { position: 6, .. })
        ));
    }

    #[test]
    fn holomorphic_tree_in_complex_mode() {
        let e = parse("sin(z)*exp(z)", Mode::Complex).unwrap();
        assert!(matches!(e.root, Node::Binary(BinOp::Mul, _, _)));
        assert!(matches!(
            parse("abs(z)", Mode::Complex),
            Err(ExprError::NonHolomorphicPrimitive { .. })
        ));
        assert!(matches!(
            parse("conj(z) + 1", Mode::Complex),
            Err(ExprError::NonHolomorphicPrimitive { position: 0, .. })
        ));
    }

    #[test]
    fn variables_are_mode_specific() {
        assert!(matches!(
            parse("z + 1", Mode::Real),
            Err(ExprError::UnknownIdentifier { .. })
        ));
        assert!(matches!(
            parse("x*i", Mode::Real),
            Err(ExprError::UnknownIdentifier { .. })
        ));
        assert!(parse("z*i + pi - e", Mode::Complex).is_ok());
        assert!(matches!(
            parse("foo(x)", Mode::Real),
            Err(ExprError::UnknownIdentifier { .. })
        ));
    }

    #[test]
    fn power_precedence_and_associativity() {
        let neg = parse("-x^2", Mode::Real).unwrap();
        assert!(matches!(neg.root, Node::Neg(ref inner) if matches!(**inner, Node::Binary(BinOp::Pow, _, _))));
        let chain = parse("2^3^2", Mode::Real).unwrap();
        match chain.root {
            Node::Binary(BinOp::Pow, ref a, ref b) => {
                assert_eq!(**a, Node::Number(2.0));
                assert!(matches!(**b, Node::Binary(BinOp::Pow, _, _)));
            }
            _ => panic!(),
        }
        assert!(parse("x^-1", Mode::Real).is_ok());
    }

    #[test]
    fn scientific_literals() {
        let e = parse("1.5e-3*x", Mode::Real).unwrap();
        assert!(matches!(e.root, Node::Binary(BinOp::Mul, ref a, _) if **a == Node::Number(1.5e-3)));
        // `2e` is a literal followed by the constant e, which is a syntax error.
        assert!(parse("2e", Mode::Real).is_err());
    }
}
