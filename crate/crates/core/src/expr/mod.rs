//! Expression front end: parse a closed-form generating function `U(x)` and
//! evaluate it as a Taylor jet.

mod ast;
mod parser;

pub use ast::{BinOp, Expression, Func, Param};

use crate::jet::Jet;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParseError {
    #[error("syntax error at offset {offset}: {message}")]
    Syntax { offset: usize, message: String },
    #[error("unknown identifier '{name}' at offset {offset}")]
    UnknownIdentifier { name: String, offset: usize },
    #[error("empty expression")]
    Empty,
}

impl ParseError {
    pub fn offset(&self) -> usize {
        match self {
            ParseError::Syntax { offset, .. } | ParseError::UnknownIdentifier { offset, .. } => {
                *offset
            }
            ParseError::Empty => 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EvalError {
    #[error("{what} is undefined at x0 = {x0}")]
    Domain { what: &'static str, x0: f64 },
    #[error("parameter '{0}' is not bound")]
    UnboundParameter(&'static str),
    #[error("derivative order {0} exceeds the jet width")]
    OrderTooHigh(usize),
}

/// Parameter bindings supplied at evaluation time, so one parsed expression
/// serves a whole parameter sweep.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Params {
    pub eps0: Option<f64>,
    pub eps1: Option<f64>,
}

impl Params {
    pub fn new(eps0: f64, eps1: f64) -> Self {
        Self {
            eps0: Some(eps0),
            eps1: Some(eps1),
        }
    }

    fn get(&self, p: Param) -> Result<f64, EvalError> {
        match p {
            Param::Eps0 => self.eps0,
            Param::Eps1 => self.eps1,
        }
        .ok_or(EvalError::UnboundParameter(p.name()))
    }
}

pub fn parse(source: &str) -> Result<Expression, ParseError> {
    if source.trim().is_empty() {
        return Err(ParseError::Empty);
    }
    parser::Parser::new(source)?.parse_all()
}

impl std::str::FromStr for Expression {
    type Err = ParseError;
    fn from_str(s: &str) -> Result<Self, ParseError> {
        parse(s)
    }
}

impl Expression {
    /// Taylor jet of the expression at `x0` with `N` coefficients.
    pub fn eval_jet<const N: usize>(&self, x0: f64, params: &Params) -> Result<Jet<N>, EvalError> {
        let domain = |what| EvalError::Domain { what, x0 };
        Ok(match self {
            Expression::Number(v) => Jet::constant(*v),
            Expression::Var => Jet::variable(x0),
            Expression::Pi => Jet::constant(std::f64::consts::PI),
            Expression::Param(p) => Jet::constant(params.get(*p)?),
            Expression::Neg(a) => -a.eval_jet::<N>(x0, params)?,
            Expression::Binary(op, a, b) => {
                let a = a.eval_jet::<N>(x0, params)?;
                let b = b.eval_jet::<N>(x0, params)?;
                match op {
                    BinOp::Add => a + b,
                    BinOp::Sub => a - b,
                    BinOp::Mul => a * b,
                    BinOp::Div => a.checked_div(&b).ok_or(domain("division by zero"))?,
                }
            }
            Expression::Pow(a, n) => {
                let a = a.eval_jet::<N>(x0, params)?;
                if *n < 0 && a.value() == 0.0 {
                    return Err(domain("negative power of zero"));
                }
                a.powi(*n)
            }
            Expression::Call(func, a) => {
                let a = a.eval_jet::<N>(x0, params)?;
                match func {
                    Func::Sin => a.sin_cos().0,
                    Func::Cos => a.sin_cos().1,
                    Func::Tan => {
                        let (s, c) = a.sin_cos();
                        if c.value().abs() <= 4.0 * f64::EPSILON {
                            return Err(domain("tan"));
                        }
                        s / c
                    }
                    Func::Sinh => a.sinh_cosh().0,
                    Func::Cosh => a.sinh_cosh().1,
                    Func::Tanh => {
                        let (s, c) = a.sinh_cosh();
                        s / c
                    }
                    Func::Exp => a.exp(),
                    Func::Sqrt => a.checked_sqrt().ok_or(domain("sqrt"))?,
                }
            }
        })
    }

    /// Plain value at `x`.
    pub fn eval(&self, x: f64, params: &Params) -> Result<f64, EvalError> {
        Ok(self.eval_jet::<1>(x, params)?.value())
    }

    /// `k`-th derivative at `x0`, `k <= 6`.
    pub fn derivative_at(&self, x0: f64, k: usize, params: &Params) -> Result<f64, EvalError> {
        if k > 6 {
            return Err(EvalError::OrderTooHigh(k));
        }
        Ok(self.eval_jet::<7>(x0, params)?.derivative_value(k))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn parses_the_razavy_generator() {
        let e = parse("4*eps0*eps1*sin(x)^2").unwrap();
        assert_eq!(e.params(), vec![Param::Eps0, Param::Eps1]);
        assert!(matches!(e, Expression::Binary(BinOp::Mul, _, _)));
    }

    #[test]
    fn single_variable() {
        assert_eq!(parse("x").unwrap(), Expression::Var);
    }

    #[test]
    fn unbalanced_paren_reports_offset() {
        let err = parse("sin(").unwrap_err();
        assert!(matches!(err, ParseError::Syntax { offset: 4, .. }), "{err:?}");
    }

    #[test]
    fn unknown_identifier() {
        let err = parse("2*foo(x)").unwrap_err();
        assert_eq!(
            err,
            ParseError::UnknownIdentifier {
                name: "foo".into(),
                offset: 2
            }
        );
        assert!(matches!(parse("y + 1"), Err(ParseError::UnknownIdentifier { .. })));
    }

    #[test]
    fn empty_source_is_rejected() {
        assert_eq!(parse("   "), Err(ParseError::Empty));
    }

    #[test]
    fn precedence_and_associativity() {
        let p = Params::new(1.0, 0.5);
        let v = |s: &str| parse(s).unwrap().eval(0.0, &p).unwrap();
        assert_eq!(v("2+3*4"), 14.0);
        assert_eq!(v("8-3-2"), 3.0);
        assert_eq!(v("8/4/2"), 1.0);
        assert_eq!(v("-2^2"), -4.0);
        assert_eq!(v("2^-1"), 0.5);
        assert_eq!(v("(1+1)^3"), 8.0);
        assert!(parse("2^0.5").is_err());
        assert!(parse("2^x").is_err());
        assert!(parse("2^3^2").is_err());
    }

    #[test]
    fn sine_jet_at_zero() {
        let j: Jet<7> = parse("sin(x)").unwrap().eval_jet(0.0, &Params::default()).unwrap();
        let want = [0.0, 1.0, 0.0, -1.0 / 6.0, 0.0, 1.0 / 120.0, 0.0];
        for k in 0..7 {
            assert!((j[k] - want[k]).abs() < 1e-16);
        }
    }

    #[test]
    fn razavy_generator_jet_at_half_pi() {
        let e = parse("4*eps0*eps1*sin(x)^2").unwrap();
        let j: Jet<7> = e.eval_jet(PI / 2.0, &Params::new(1.0, 0.5)).unwrap();
        assert!((j[0] - 2.0).abs() < 1e-15);
        assert!(j[1].abs() < 1e-15);
        // c2 = U''/2 with U'' = 8 eps0 eps1 cos(2x) = -4
        assert!((j[2] + 2.0).abs() < 1e-14);
    }

    #[test]
    fn constant_jet() {
        let j: Jet<7> = parse("5").unwrap().eval_jet(1.234, &Params::default()).unwrap();
        assert_eq!(j.coeffs(), &[5.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0]);
    }

    #[test]
    fn derivatives_of_razavy_generator_at_pi() {
        let e = parse("4*eps0*eps1*sin(x)^2").unwrap();
        let p = Params::new(1.0, 0.5);
        assert!((e.derivative_at(PI, 2, &p).unwrap() - 4.0).abs() < 1e-13);
        assert!(e.derivative_at(PI, 3, &p).unwrap().abs() < 1e-13);
        let s = parse("sin(x)").unwrap();
        assert!((s.derivative_at(PI / 2.0, 0, &p).unwrap() - 1.0).abs() < 1e-16);
        assert!(matches!(s.derivative_at(0.0, 7, &p), Err(EvalError::OrderTooHigh(7))));
    }

    #[test]
    fn domain_errors_carry_location() {
        let p = Params::default();
        let err = parse("tan(x)").unwrap().eval(PI / 2.0, &p).unwrap_err();
        assert_eq!(err, EvalError::Domain { what: "tan", x0: PI / 2.0 });
        assert!(matches!(
            parse("1/x").unwrap().eval(0.0, &p),
            Err(EvalError::Domain { what: "division by zero", .. })
        ));
        assert!(matches!(
            parse("sqrt(x)").unwrap().eval(-1.0, &p),
            Err(EvalError::Domain { what: "sqrt", .. })
        ));
    }

    #[test]
    fn unbound_parameter() {
        let err = parse("eps0*x").unwrap().eval(1.0, &Params::default()).unwrap_err();
        assert_eq!(err, EvalError::UnboundParameter("eps0"));
    }

    #[test]
    fn display_reparses() {
        for src in [
            "4*eps0*eps1*sin(x)^2",
            "-(x - 1)^2 / (2 - -x)",
            "a",
            "x - (x - x)",
            "sqrt(cosh(x)) ^ -3 * pi",
            "-x^2",
            "(-x)^2",
            "1e-7 + 2.5e10",
        ] {
            let Ok(e) = parse(src) else { continue };
            let back = parse(&e.to_string()).unwrap();
            assert_eq!(back, e, "{src} -> {e}");
        }
    }
}
