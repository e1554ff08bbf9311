use num_complex::Complex64;

use super::ast::{BinOp, Constant, Expression, Func, Mode, Node};
use super::ExprError;
use crate::jet::Jet2;
use crate::scalar::Scalar;

fn domain(msg: impl Into<String>) -> ExprError {
    ExprError::Domain(msg.into())
}

fn checked<S: Scalar>(j: Jet2<S>, what: &str) -> Result<Jet2<S>, ExprError> {
    if j.is_finite() {
        Ok(j)
    } else {
        Err(domain(format!("non-finite result in {what}")))
    }
}

/// Real scalars are on a branch cut when negative; complex ones when on the
/// closed negative real axis.
fn on_branch_cut<S: Scalar>(v: S) -> bool {
    let c = v.to_complex();
    c.im == 0.0 && c.re < 0.0
}

fn constant_value<S: Scalar>(c: Constant) -> Result<S, ExprError> {
    match c {
        Constant::Pi => Ok(S::constant(std::f64::consts::PI)),
        Constant::E => Ok(S::constant(std::f64::consts::E)),
        Constant::I => S::from_complex(Complex64::new(0.0, 1.0))
            .ok_or_else(|| domain("imaginary unit evaluated in real arithmetic")),
    }
}

fn call<S: Scalar>(f: Func, u: Jet2<S>) -> Result<Jet2<S>, ExprError> {
    let v = u.value;
    let out = match f {
        Func::Exp => {
            let e = v.exp();
            u.compose(e, e, e)
        }
        Func::Log => {
            if v == S::zero() {
                return Err(domain("log of zero"));
            }
            if on_branch_cut(v) {
                return Err(domain("log argument on its branch cut"));
            }
            let inv = S::one() / v;
            u.compose(v.ln(), inv, -inv * inv)
        }
        Func::Sin => {
            let (s, c) = (v.sin(), v.cos());
            u.compose(s, c, -s)
        }
        Func::Cos => {
            let (s, c) = (v.sin(), v.cos());
            u.compose(c, -s, -c)
        }
        Func::Sinh => {
            let (s, c) = (v.sinh(), v.cosh());
            u.compose(s, c, s)
        }
        Func::Cosh => {
            let (s, c) = (v.sinh(), v.cosh());
            u.compose(c, s, c)
        }
        Func::Sqrt => {
            if v == S::zero() {
                return Err(domain("sqrt is not differentiable at zero"));
            }
            if on_branch_cut(v) {
                return Err(domain("sqrt argument on its branch cut"));
            }
            let r = v.sqrt();
            let d1 = S::constant(0.5) / r;
            u.compose(r, d1, -d1 / (S::constant(2.0) * v))
        }
    };
    checked(out, f.name())
}

fn power<S: Scalar>(base: Jet2<S>, exponent: &Node, at: S) -> Result<Jet2<S>, ExprError> {
    if exponent.contains_var() {
        // a^b = exp(b log a)
        let b = eval_node(exponent, at)?;
        let log_a = call(Func::Log, base)?;
        return call(Func::Exp, b * log_a);
    }
    let p = eval_node(exponent, at)?.value.to_complex();
    let v = base.value;
    if p.im == 0.0 && p.re.fract() == 0.0 && p.re.abs() <= 1.0e6 {
        let n = p.re as i32;
        if n < 0 && v == S::zero() {
            return Err(domain("negative power of zero"));
        }
        let out = match n {
            0 => Jet2::constant(S::one()),
            1 => base,
            _ => {
                let nn = S::constant(n as f64);
                base.compose(
                    v.powi(n),
                    nn * v.powi(n - 1),
                    nn * S::constant((n - 1) as f64) * v.powi(n - 2),
                )
            }
        };
        return checked(out, "power");
    }
    if p.im != 0.0 {
        // Complex exponent: only meaningful in complex arithmetic.
        let log_a = call(Func::Log, base)?;
        let pc = S::from_complex(p).ok_or_else(|| domain("complex exponent in real mode"))?;
        return call(Func::Exp, log_a * Jet2::constant(pc));
    }
    if v == S::zero() || on_branch_cut(v) {
        return Err(domain("non-integer power of a non-positive base"));
    }
    let pr = p.re;
    let ps = S::constant(pr);
    let out = base.compose(
        v.powf(pr),
        ps * v.powf(pr - 1.0),
        ps * S::constant(pr - 1.0) * v.powf(pr - 2.0),
    );
    checked(out, "power")
}

fn eval_node<S: Scalar>(node: &Node, at: S) -> Result<Jet2<S>, ExprError> {
    match node {
        Node::Number(v) => Ok(Jet2::constant(S::constant(*v))),
        Node::Var => Ok(Jet2::variable(at)),
        Node::Const(c) => Ok(Jet2::constant(constant_value(*c)?)),
        Node::Neg(a) => Ok(-eval_node(a, at)?),
        Node::Call(f, a) => call(*f, eval_node(a, at)?),
        Node::Binary(op, a, b) => {
            let lhs = eval_node(a, at)?;
            match op {
                BinOp::Add => Ok(lhs + eval_node(b, at)?),
                BinOp::Sub => Ok(lhs - eval_node(b, at)?),
                BinOp::Mul => checked(lhs * eval_node(b, at)?, "product"),
                BinOp::Div => {
                    let rhs = eval_node(b, at)?;
                    if rhs.value == S::zero() {
                        return Err(domain("division by zero"));
                    }
                    checked(lhs / rhs, "quotient")
                }
                BinOp::Pow => power(lhs, b, at),
            }
        }
    }
}

/// Evaluate the expression and its first two derivatives at `at`.
///
/// Real-mode expressions may be evaluated at complex points (all primitives
/// are holomorphic); complex-mode expressions require complex arithmetic.
pub fn eval_jet2<S: Scalar>(expr: &Expression, at: S) -> Result<Jet2<S>, ExprError> {
    if expr.mode == Mode::Complex && !S::IS_COMPLEX {
        return Err(ExprError::ModeMismatch);
    }
    if !at.is_finite() {
        return Err(domain("non-finite evaluation point"));
    }
    eval_node(&expr.root, at)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse;

    fn real(src: &str) -> Expression {
        parse(src, Mode::Real).unwrap()
    }

    fn cplx(src: &str) -> Expression {
        parse(src, Mode::Complex).unwrap()
    }

    #[test]
    fn polynomial_jet() {
        let j = eval_jet2(&real("x^2"), 2.0).unwrap();
        assert_eq!((j.value, j.d1, j.d2), (4.0, 4.0, 2.0));
    }

    #[test]
    fn sine_at_zero() {
        let j = eval_jet2(&real("sin(x)"), 0.0).unwrap();
        assert_eq!((j.value, j.d1, j.d2), (0.0, 1.0, 0.0));
    }

    #[test]
    fn euler_identity() {
        let j = eval_jet2(&cplx("exp(z)"), Complex64::new(0.0, std::f64::consts::PI)).unwrap();
        for d in [j.value, j.d1, j.d2] {
            assert!((d + Complex64::new(1.0, 0.0)).norm() < 1e-15);
        }
    }

    #[test]
    fn domain_errors() {
        assert!(matches!(eval_jet2(&real("1/x"), 0.0), Err(ExprError::Domain(_))));
        assert!(matches!(eval_jet2(&real("log(x)"), -1.0), Err(ExprError::Domain(_))));
        assert!(matches!(eval_jet2(&real("sqrt(x)"), 0.0), Err(ExprError::Domain(_))));
        assert!(matches!(
            eval_jet2(&cplx("sqrt(z)"), Complex64::new(-2.0, 0.0)),
            Err(ExprError::Domain(_))
        ));
        assert!(eval_jet2(&cplx("sqrt(z)"), Complex64::new(-2.0, 1e-3)).is_ok());
        assert!(matches!(eval_jet2(&real("x^0.5"), -1.0), Err(ExprError::Domain(_))));
        assert!(matches!(eval_jet2(&cplx("z"), 1.0f64), Err(ExprError::ModeMismatch)));
    }

    #[test]
    fn integer_powers_of_negative_base() {
        let j = eval_jet2(&real("x^3"), -2.0).unwrap();
        assert_eq!((j.value, j.d1, j.d2), (-8.0, 12.0, -12.0));
        let j = eval_jet2(&real("x^-1"), -2.0).unwrap();
        assert_eq!((j.value, j.d1, j.d2), (-0.5, -0.25, -0.25));
    }

    #[test]
    fn variable_exponent() {
        // x^x at 1: value 1, d1 = x^x (ln x + 1) = 1, d2 = x^x((ln x + 1)^2 + 1/x) = 2.
        let j = eval_jet2(&real("x^x"), 1.0).unwrap();
        assert!((j.value - 1.0).abs() < 1e-15);
        assert!((j.d1 - 1.0).abs() < 1e-15);
        assert!((j.d2 - 2.0).abs() < 1e-14);
    }

    #[test]
    fn real_expression_at_complex_point() {
        let z = Complex64::new(0.3, 0.4);
        let j = eval_jet2(&real("x^2 + 1"), z).unwrap();
        assert!((j.value - (z * z + 1.0)).norm() < 1e-15);
    }
}
