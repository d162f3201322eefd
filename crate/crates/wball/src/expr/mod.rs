//! Objective expression language: parsing, evaluation, and growth probing.
//!
//! Objectives are written over the coordinates `x1..xn` of a point. The
//! accepted surface is part of the crate's public contract:
//!
//! ```text
//! expr   := term (("+" | "-") term)*
//! term   := unary (("*" | "/") unary)*
//! unary  := "-" unary | power
//! power  := atom ("^" unary)?            (right-associative)
//! atom   := NUMBER | COORD | call | "(" expr ")"
//! call   := "abs" | "sqrt" | "exp" | "log" "(" expr ")"
//!         | "min" | "max"  "(" expr ("," expr)+ ")"
//!         | "norm" "(" "x" ")"
//! ```
//!
//! `NUMBER` is a decimal literal with optional fraction and exponent;
//! `COORD` is `x1`, `x2`, ... up to the declared dimension; `norm(x)` is the
//! Euclidean norm of the whole point; `log` is natural. Precedence from
//! loosest to tightest: `+ -`, `* /`, unary minus, `^`. So `-x1^2` is
//! `-(x1^2)` and `2*x1^2` is `2*(x1^2)`.
//!
//! Evaluation at a finite point either returns a finite value or a
//! [`EvalError`](crate::error::EvalError) describing the domain failure
//! (`log` of a non-positive value, division by zero, fractional power of a
//! negative base, overflow). There are no silent NaNs.

mod ast;
mod eval;
mod lexer;
mod parser;
mod probe;

pub use ast::Expr;
pub use probe::{growth_ratio, ShellSample, SHELL_THICKNESS};

use crate::error::{Error, EvalError, Result};
use crate::measure::DiscreteMeasure;
use crate::space::Point;

/// A parsed, compiled objective. Cheap to clone and evaluate.
#[derive(Debug, Clone)]
pub struct ObjectiveFn {
    source: String,
    dim: usize,
    ast: Expr,
    tape: Vec<eval::Op>,
    max_depth: usize,
}

impl ObjectiveFn {
    /// Parses `source` against a point dimension. Coordinates beyond `dim`
    /// are rejected at parse time.
    pub fn parse(source: &str, dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Input("dimension must be at least 1".into()));
        }
        let ast = parser::parse(source, dim)?;
        let (tape, max_depth) = eval::compile(&ast);
        Ok(ObjectiveFn {
            source: source.to_string(),
            dim,
            ast,
            tape,
            max_depth,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// The text the objective was parsed from, verbatim.
    pub fn source(&self) -> &str {
        &self.source
    }

    /// Canonical rendering of the parsed tree. Reparsing it yields the same
    /// tree.
    pub fn canonical(&self) -> String {
        self.ast.to_string()
    }

    pub fn ast(&self) -> &Expr {
        &self.ast
    }

    pub fn eval(&self, x: &Point) -> Result<f64> {
        Ok(self.eval_coords(x.coords())?)
    }

    /// Evaluates on a raw coordinate slice (hot path).
    pub fn eval_coords(&self, coords: &[f64]) -> Result<f64, EvalError> {
        if coords.len() != self.dim {
            return Err(EvalError::WrongDimension {
                expected: self.dim,
                got: coords.len(),
            });
        }
        eval::run(&self.tape, self.max_depth, coords)
    }

    /// `sum_i w_i f(x_i)` over the atoms of `mu`. Atoms with exactly zero
    /// weight are skipped, so they cannot poison the sum with a domain error
    /// that carries no mass.
    pub fn expectation(&self, mu: &DiscreteMeasure) -> Result<f64> {
        let mut acc = 0.0;
        for (a, w) in mu.atoms().iter().zip(mu.weights()) {
            if *w == 0.0 {
                continue;
            }
            acc += w * self.eval_coords(a.coords())?;
        }
        Ok(acc)
    }
}

impl PartialEq for ObjectiveFn {
    fn eq(&self, other: &Self) -> bool {
        self.dim == other.dim && self.ast == other.ast
    }
}

impl serde::Serialize for ObjectiveFn {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.source)
    }
}

impl std::fmt::Display for ObjectiveFn {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.source)
    }
}
