//! Expression tree and its canonical printer.
//!
//! The printer emits the minimal parenthesization that reparses to the same
//! tree, so `parse(print(e)) == e` holds for every tree the parser can
//! produce. Negative literals print as `-c` and are re-folded by the parser,
//! which keeps the round trip exact.

use std::fmt;

/// Objective expression over the coordinates `x1..xn` of a point.
#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    /// Numeric literal. Finite by construction; a leading minus on a literal
    /// is folded into the value at parse time.
    Number(f64),
    /// Zero-based coordinate index; `x1` in source is `Coord(0)`.
    Coord(usize),
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    /// Right-associative power with real exponent.
    Pow(Box<Expr>, Box<Expr>),
    Abs(Box<Expr>),
    Sqrt(Box<Expr>),
    Exp(Box<Expr>),
    /// Natural logarithm.
    Log(Box<Expr>),
    /// Pointwise minimum of two or more arguments.
    Min(Vec<Expr>),
    /// Pointwise maximum of two or more arguments.
    Max(Vec<Expr>),
    /// Euclidean norm of the evaluation point, written `norm(x)`.
    Norm,
}

/// Binding strength used for parenthesization decisions. Higher binds
/// tighter: `+ -` (1) < `* /` (2) < unary minus (3) < `^` (4) < atoms (5).
fn prec(e: &Expr) -> u8 {
    match e {
        // A negative literal prints with a leading minus, so for printing
        // purposes it binds like a unary minus.
        Expr::Number(v) if v.is_sign_negative() => 3,
        Expr::Number(_) | Expr::Coord(_) | Expr::Norm => 5,
        Expr::Abs(_) | Expr::Sqrt(_) | Expr::Exp(_) | Expr::Log(_) => 5,
        Expr::Min(_) | Expr::Max(_) => 5,
        Expr::Neg(_) => 3,
        Expr::Pow(_, _) => 4,
        Expr::Mul(_, _) | Expr::Div(_, _) => 2,
        Expr::Add(_, _) | Expr::Sub(_, _) => 1,
    }
}

fn write_child(f: &mut fmt::Formatter<'_>, e: &Expr, min_prec: u8) -> fmt::Result {
    if prec(e) < min_prec {
        write!(f, "({e})")
    } else {
        write!(f, "{e}")
    }
}

fn write_call(f: &mut fmt::Formatter<'_>, name: &str, args: &[Expr]) -> fmt::Result {
    write!(f, "{name}(")?;
    for (i, a) in args.iter().enumerate() {
        if i > 0 {
            write!(f, ", ")?;
        }
        write!(f, "{a}")?;
    }
    write!(f, ")")
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            // {:?} prints the shortest decimal that round-trips through
            // f64 parsing, so printed literals reparse to the same bits.
            Expr::Number(v) => write!(f, "{v:?}"),
            Expr::Coord(i) => write!(f, "x{}", i + 1),
            Expr::Norm => write!(f, "norm(x)"),
            Expr::Neg(a) => {
                write!(f, "-")?;
                write_child(f, a, 4)
            }
            Expr::Add(a, b) => {
                write_child(f, a, 1)?;
                write!(f, " + ")?;
                write_child(f, b, 2)
            }
            Expr::Sub(a, b) => {
                write_child(f, a, 1)?;
                write!(f, " - ")?;
                write_child(f, b, 2)
            }
            Expr::Mul(a, b) => {
                write_child(f, a, 2)?;
                write!(f, " * ")?;
                write_child(f, b, 3)
            }
            Expr::Div(a, b) => {
                write_child(f, a, 2)?;
                write!(f, " / ")?;
                write_child(f, b, 3)
            }
            Expr::Pow(a, b) => {
                write_child(f, a, 5)?;
                write!(f, "^")?;
                write_child(f, b, 4)
            }
            Expr::Abs(a) => write_call(f, "abs", std::slice::from_ref(a)),
            Expr::Sqrt(a) => write_call(f, "sqrt", std::slice::from_ref(a)),
            Expr::Exp(a) => write_call(f, "exp", std::slice::from_ref(a)),
            Expr::Log(a) => write_call(f, "log", std::slice::from_ref(a)),
            Expr::Min(args) => write_call(f, "min", args),
            Expr::Max(args) => write_call(f, "max", args),
        }
    }
}
