use std::fmt;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
}

impl BinOp {
    fn symbol(self) -> &'static str {
        match self {
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
            BinOp::Div => "/",
        }
    }

    fn precedence(self) -> u8 {
        match self {
            BinOp::Add | BinOp::Sub => 1,
            BinOp::Mul | BinOp::Div => 2,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Func {
    Sin,
    Cos,
    Tan,
    Sinh,
    Cosh,
    Tanh,
    Exp,
    Sqrt,
}

impl Func {
    pub const ALL: [Func; 8] = [
        Func::Sin,
        Func::Cos,
        Func::Tan,
        Func::Sinh,
        Func::Cosh,
        Func::Tanh,
        Func::Exp,
        Func::Sqrt,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Tan => "tan",
            Func::Sinh => "sinh",
            Func::Cosh => "cosh",
            Func::Tanh => "tanh",
            Func::Exp => "exp",
            Func::Sqrt => "sqrt",
        }
    }

    pub fn from_name(s: &str) -> Option<Func> {
        Func::ALL.into_iter().find(|f| f.name() == s)
    }
}

/// Energy parameters that can appear in a generating function.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Param {
    Eps0,
    Eps1,
}

impl Param {
    pub fn name(self) -> &'static str {
        match self {
            Param::Eps0 => "eps0",
            Param::Eps1 => "eps1",
        }
    }
}

/// Abstract syntax tree of a generating function `U(x)`.
///
/// Exponents are integer literals only, which keeps jet evaluation
/// single-valued on the whole real line.
#[derive(Clone, Debug, PartialEq)]
pub enum Expression {
    Number(f64),
    Var,
    Pi,
    Param(Param),
    Neg(Box<Expression>),
    Binary(BinOp, Box<Expression>, Box<Expression>),
    Pow(Box<Expression>, i32),
    Call(Func, Box<Expression>),
}

impl Expression {
    fn precedence(&self) -> u8 {
        match self {
            Expression::Binary(op, _, _) => op.precedence(),
            Expression::Neg(_) => 3,
            Expression::Pow(_, _) => 4,
            _ => 5,
        }
    }

    /// Parameters referenced anywhere in the tree.
    pub fn params(&self) -> Vec<Param> {
        let mut out = Vec::new();
        self.visit(&mut |e| {
            if let Expression::Param(p) = e {
                if !out.contains(p) {
                    out.push(*p);
                }
            }
        });
        out
    }

    fn visit(&self, f: &mut impl FnMut(&Expression)) {
        f(self);
        match self {
            Expression::Neg(a) | Expression::Pow(a, _) | Expression::Call(_, a) => a.visit(f),
            Expression::Binary(_, a, b) => {
                a.visit(f);
                b.visit(f);
            }
            _ => {}
        }
    }
}

fn write_child(f: &mut fmt::Formatter<'_>, e: &Expression, parens: bool) -> fmt::Result {
    if parens {
        write!(f, "({e})")
    } else {
        write!(f, "{e}")
    }
}

/// Prints with the minimum parentheses needed for the parser to rebuild the
/// same tree.
impl fmt::Display for Expression {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expression::Number(v) => {
                if *v < 0.0 || v.is_sign_negative() {
                    write!(f, "({v:?})")
                } else {
                    write!(f, "{v:?}")
                }
            }
            Expression::Var => f.write_str("x"),
            Expression::Pi => f.write_str("pi"),
            Expression::Param(p) => f.write_str(p.name()),
            Expression::Neg(a) => {
                f.write_str("-")?;
                write_child(f, a, a.precedence() < 3)
            }
            Expression::Binary(op, a, b) => {
                let p = op.precedence();
                write_child(f, a, a.precedence() < p)?;
                write!(f, " {} ", op.symbol())?;
                write_child(f, b, b.precedence() <= p)
            }
            Expression::Pow(a, n) => {
                write_child(f, a, a.precedence() < 5)?;
                write!(f, "^{n}")
            }
            Expression::Call(func, a) => write!(f, "{}({a})", func.name()),
        }
    }
}
