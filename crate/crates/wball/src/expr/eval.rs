//! Stack-machine evaluator.
//!
//! The tree is flattened post-order into a tape once at parse time; hot
//! loops (shell probes, pattern searches, grid sweeps) then evaluate the
//! tape without walking boxes. Every operation that can leave the real
//! domain reports a specific [`EvalError`]; any non-finite intermediate is
//! an error, so a successful evaluation always returns a finite value.

use super::ast::Expr;
use crate::error::EvalError;

#[derive(Debug, Clone, PartialEq)]
pub enum Op {
    Num(f64),
    Coord(usize),
    Neg,
    Add,
    Sub,
    Mul,
    Div,
    Pow,
    Abs,
    Sqrt,
    Exp,
    Log,
    Min(usize),
    Max(usize),
    Norm,
}

/// Flattens `e` post-order. Returns the tape and the maximum stack depth it
/// needs.
pub fn compile(e: &Expr) -> (Vec<Op>, usize) {
    let mut tape = Vec::new();
    flatten(e, &mut tape);
    let mut depth = 0usize;
    let mut max_depth = 0usize;
    for op in &tape {
        match op {
            Op::Num(_) | Op::Coord(_) | Op::Norm => depth += 1,
            Op::Neg | Op::Abs | Op::Sqrt | Op::Exp | Op::Log => {}
            Op::Add | Op::Sub | Op::Mul | Op::Div | Op::Pow => depth -= 1,
            Op::Min(n) | Op::Max(n) => depth -= n - 1,
        }
        max_depth = max_depth.max(depth);
    }
    (tape, max_depth)
}

fn flatten(e: &Expr, out: &mut Vec<Op>) {
    match e {
        Expr::Number(v) => out.push(Op::Num(*v)),
        Expr::Coord(i) => out.push(Op::Coord(*i)),
        Expr::Norm => out.push(Op::Norm),
        Expr::Neg(a) => {
            flatten(a, out);
            out.push(Op::Neg);
        }
        Expr::Abs(a) => {
            flatten(a, out);
            out.push(Op::Abs);
        }
        Expr::Sqrt(a) => {
            flatten(a, out);
            out.push(Op::Sqrt);
        }
        Expr::Exp(a) => {
            flatten(a, out);
            out.push(Op::Exp);
        }
        Expr::Log(a) => {
            flatten(a, out);
            out.push(Op::Log);
        }
        Expr::Add(a, b) => {
            flatten(a, out);
            flatten(b, out);
            out.push(Op::Add);
        }
        Expr::Sub(a, b) => {
            flatten(a, out);
            flatten(b, out);
            out.push(Op::Sub);
        }
        Expr::Mul(a, b) => {
            flatten(a, out);
            flatten(b, out);
            out.push(Op::Mul);
        }
        Expr::Div(a, b) => {
            flatten(a, out);
            flatten(b, out);
            out.push(Op::Div);
        }
        Expr::Pow(a, b) => {
            flatten(a, out);
            flatten(b, out);
            out.push(Op::Pow);
        }
        Expr::Min(args) => {
            for a in args {
                flatten(a, out);
            }
            out.push(Op::Min(args.len()));
        }
        Expr::Max(args) => {
            for a in args {
                flatten(a, out);
            }
            out.push(Op::Max(args.len()));
        }
    }
}

/// Checked power shared with the reference semantics: negative base needs an
/// integer exponent, zero base a non-negative one.
pub fn checked_pow(base: f64, exponent: f64) -> Result<f64, EvalError> {
    if base < 0.0 && exponent.fract() != 0.0 {
        return Err(EvalError::PowDomain { base, exponent });
    }
    if base == 0.0 && exponent < 0.0 {
        return Err(EvalError::PowDomain { base, exponent });
    }
    Ok(base.powf(exponent))
}

pub fn run(tape: &[Op], max_depth: usize, coords: &[f64]) -> Result<f64, EvalError> {
    let mut small = [0.0f64; 32];
    let mut big;
    let stack: &mut [f64] = if max_depth <= 32 {
        &mut small
    } else {
        big = vec![0.0f64; max_depth];
        &mut big
    };
    let mut top = 0usize;

    macro_rules! push {
        ($v:expr) => {{
            stack[top] = $v;
            top += 1;
        }};
    }

    for op in tape {
        match op {
            Op::Num(v) => push!(*v),
            Op::Coord(i) => push!(coords[*i]),
            Op::Norm => {
                let n = coords.iter().map(|c| c * c).sum::<f64>().sqrt();
                push!(n);
            }
            Op::Neg => stack[top - 1] = -stack[top - 1],
            Op::Abs => stack[top - 1] = stack[top - 1].abs(),
            Op::Sqrt => {
                let a = stack[top - 1];
                if a < 0.0 {
                    return Err(EvalError::SqrtNegative(a));
                }
                stack[top - 1] = a.sqrt();
            }
            Op::Exp => stack[top - 1] = stack[top - 1].exp(),
            Op::Log => {
                let a = stack[top - 1];
                if a <= 0.0 {
                    return Err(EvalError::LogNonPositive(a));
                }
                stack[top - 1] = a.ln();
            }
            Op::Add => {
                top -= 1;
                stack[top - 1] += stack[top];
            }
            Op::Sub => {
                top -= 1;
                stack[top - 1] -= stack[top];
            }
            Op::Mul => {
                top -= 1;
                stack[top - 1] *= stack[top];
            }
            Op::Div => {
                top -= 1;
                if stack[top] == 0.0 {
                    return Err(EvalError::DivisionByZero);
                }
                stack[top - 1] /= stack[top];
            }
            Op::Pow => {
                top -= 1;
                stack[top - 1] = checked_pow(stack[top - 1], stack[top])?;
            }
            Op::Min(n) => {
                let base = top - n;
                let mut acc = stack[base];
                for v in &stack[base + 1..top] {
                    acc = acc.min(*v);
                }
                top = base;
                push!(acc);
            }
            Op::Max(n) => {
                let base = top - n;
                let mut acc = stack[base];
                for v in &stack[base + 1..top] {
                    acc = acc.max(*v);
                }
                top = base;
                push!(acc);
            }
        }
        // Any overflow to infinity or NaN is a domain error rather than a
        // silent poison value.
        if !stack[top - 1].is_finite() {
            return Err(EvalError::NonFinite);
        }
    }
    debug_assert_eq!(top, 1);
    Ok(stack[0])
}

#[cfg(test)]
mod tests {
    use super::super::parser::parse;
    use super::*;

    fn eval(src: &str, coords: &[f64]) -> Result<f64, EvalError> {
        let ast = parse(src, coords.len()).unwrap();
        let (tape, depth) = compile(&ast);
        run(&tape, depth, coords)
    }

    #[test]
    fn arithmetic_examples() {
        assert_eq!(eval("x1^2", &[3.0]).unwrap(), 9.0);
        assert_eq!(eval("norm(x)", &[3.0, 4.0]).unwrap(), 5.0);
        assert_eq!(eval("abs(x1) - 1", &[-0.25]).unwrap(), -0.75);
        assert_eq!(eval("min(x1, 1)", &[3.0]).unwrap(), 1.0);
        assert_eq!(eval("max(x1, x2, 0)", &[-1.0, -2.0]).unwrap(), 0.0);
        assert_eq!(eval("2^-2", &[0.0]).unwrap(), 0.25);
        assert_eq!(eval("exp(0)", &[0.0]).unwrap(), 1.0);
        assert_eq!(eval("log(exp(2))", &[0.0]).unwrap(), 2.0);
    }

    #[test]
    fn domain_errors_are_specific() {
        assert_eq!(
            eval("log(x1)", &[0.0]).unwrap_err(),
            EvalError::LogNonPositive(0.0)
        );
        assert_eq!(
            eval("log(x1 - 1)", &[0.0]).unwrap_err(),
            EvalError::LogNonPositive(-1.0)
        );
        assert_eq!(eval("1 / x1", &[0.0]).unwrap_err(), EvalError::DivisionByZero);
        assert_eq!(
            eval("sqrt(x1)", &[-4.0]).unwrap_err(),
            EvalError::SqrtNegative(-4.0)
        );
        assert!(matches!(
            eval("x1^0.5", &[-1.0]).unwrap_err(),
            EvalError::PowDomain { .. }
        ));
        assert!(matches!(
            eval("0^x1", &[-1.0]).unwrap_err(),
            EvalError::PowDomain { .. }
        ));
        assert_eq!(eval("exp(x1)", &[1000.0]).unwrap_err(), EvalError::NonFinite);
        assert_eq!(
            eval("x1 * x1", &[1e200]).unwrap_err(),
            EvalError::NonFinite
        );
    }

    #[test]
    fn negative_base_with_integer_exponent_is_fine() {
        assert_eq!(eval("x1^3", &[-2.0]).unwrap(), -8.0);
        assert_eq!(eval("x1^2", &[-2.0]).unwrap(), 4.0);
    }
}
