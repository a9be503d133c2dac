use std::fmt;

/// Elementary functions accepted as a function-call head.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Exp,
    Sin,
    Cos,
    Tanh,
    Sinh,
    Cosh,
}

impl Func {
    pub fn from_name(name: &str) -> Option<Func> {
        Some(match name {
            "exp" => Func::Exp,
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "tanh" => Func::Tanh,
            "sinh" => Func::Sinh,
            "cosh" => Func::Cosh,
            _ => return None,
        })
    }

    pub fn name(self) -> &'static str {
        match self {
            Func::Exp => "exp",
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Tanh => "tanh",
            Func::Sinh => "sinh",
            Func::Cosh => "cosh",
        }
    }

    fn apply(self, x: f64) -> f64 {
        match self {
            Func::Exp => x.exp(),
            Func::Sin => x.sin(),
            Func::Cos => x.cos(),
            Func::Tanh => x.tanh(),
            Func::Sinh => x.sinh(),
            Func::Cosh => x.cosh(),
        }
    }
}

/// Expression node of a superpotential in the single variable `q`.
#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Const(f64),
    Var,
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, u32),
    Call(Func, Box<Expr>),
}

impl Expr {
    pub fn eval(&self, q: f64) -> f64 {
        match self {
            Expr::Const(c) => *c,
            Expr::Var => q,
            Expr::Neg(a) => -a.eval(q),
            Expr::Add(a, b) => a.eval(q) + b.eval(q),
            Expr::Sub(a, b) => a.eval(q) - b.eval(q),
            Expr::Mul(a, b) => a.eval(q) * b.eval(q),
            Expr::Div(a, b) => a.eval(q) / b.eval(q),
            Expr::Pow(a, n) => powu(a.eval(q), *n),
            Expr::Call(f, a) => f.apply(a.eval(q)),
        }
    }

    /// Exact symbolic derivative with respect to `q`. No simplification is
    /// attempted beyond what the rules produce directly.
    pub fn derivative(&self) -> Expr {
        use Expr::*;
        match self {
            Const(_) => Const(0.0),
            Var => Const(1.0),
            Neg(a) => Neg(Box::new(a.derivative())),
            Add(a, b) => Add(Box::new(a.derivative()), Box::new(b.derivative())),
            Sub(a, b) => Sub(Box::new(a.derivative()), Box::new(b.derivative())),
            Mul(a, b) => Add(
                Box::new(Mul(Box::new(a.derivative()), b.clone())),
                Box::new(Mul(a.clone(), Box::new(b.derivative()))),
            ),
            // (a/b)' = (a' b - a b') / b^2
            Div(a, b) => Div(
                Box::new(Sub(
                    Box::new(Mul(Box::new(a.derivative()), b.clone())),
                    Box::new(Mul(a.clone(), Box::new(b.derivative()))),
                )),
                Box::new(Pow(b.clone(), 2)),
            ),
            Pow(_, 0) => Const(0.0),
            Pow(a, n) => Mul(
                Box::new(Mul(
                    Box::new(Const(f64::from(*n))),
                    Box::new(Pow(a.clone(), n - 1)),
                )),
                Box::new(a.derivative()),
            ),
            Call(f, a) => {
                let outer = match f {
                    Func::Exp => Call(Func::Exp, a.clone()),
                    Func::Sin => Call(Func::Cos, a.clone()),
                    Func::Cos => Neg(Box::new(Call(Func::Sin, a.clone()))),
                    Func::Sinh => Call(Func::Cosh, a.clone()),
                    Func::Cosh => Call(Func::Sinh, a.clone()),
                    // tanh' = 1 - tanh^2
                    Func::Tanh => Sub(
                        Box::new(Const(1.0)),
                        Box::new(Pow(Box::new(Call(Func::Tanh, a.clone())), 2)),
                    ),
                };
                Mul(Box::new(outer), Box::new(a.derivative()))
            }
        }
    }

    /// True when the tree only uses constants, `q`, negation, sums,
    /// products and integer powers.
    pub fn is_polynomial(&self) -> bool {
        match self {
            Expr::Const(_) | Expr::Var => true,
            Expr::Neg(a) | Expr::Pow(a, _) => a.is_polynomial(),
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) => {
                a.is_polynomial() && b.is_polynomial()
            }
            Expr::Div(..) | Expr::Call(..) => false,
        }
    }

    pub fn node_count(&self) -> usize {
        match self {
            Expr::Const(_) | Expr::Var => 1,
            Expr::Neg(a) | Expr::Pow(a, _) | Expr::Call(_, a) => 1 + a.node_count(),
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) => {
                1 + a.node_count() + b.node_count()
            }
        }
    }
}

fn powu(x: f64, n: u32) -> f64 {
    match i32::try_from(n) {
        Ok(n) => x.powi(n),
        Err(_) => x.powf(f64::from(n)),
    }
}

/// Fully parenthesized rendering that the parser reads back unchanged.
impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Const(c) if c.is_sign_negative() => write!(f, "(-{})", -c),
            Expr::Const(c) => write!(f, "{c}"),
            Expr::Var => write!(f, "q"),
            Expr::Neg(a) => write!(f, "(-{a})"),
            Expr::Add(a, b) => write!(f, "({a} + {b})"),
            Expr::Sub(a, b) => write!(f, "({a} - {b})"),
            Expr::Mul(a, b) => write!(f, "({a} * {b})"),
            Expr::Div(a, b) => write!(f, "({a} / {b})"),
            Expr::Pow(a, n) if matches!(**a, Expr::Pow(..)) => write!(f, "({a})^{n}"),
            Expr::Pow(a, n) => write!(f, "{a}^{n}"),
            Expr::Call(func, a) => write!(f, "{}({a})", func.name()),
        }
    }
}

/// A parsed superpotential W(q).
#[derive(Debug, Clone, PartialEq)]
pub struct SuperpotentialAst {
    root: Expr,
}

impl SuperpotentialAst {
    pub fn new(root: Expr) -> Self {
        Self { root }
    }

    pub fn root(&self) -> &Expr {
        &self.root
    }

    pub fn eval(&self, q: f64) -> f64 {
        self.root.eval(q)
    }
}

impl fmt::Display for SuperpotentialAst {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.root.fmt(f)
    }
}
