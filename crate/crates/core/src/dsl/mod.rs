//! Scalar field expressions over chart coordinates `x1..xm`.
//!
//! Grammar (also reproduced in the README):
//!
//! ```text
//! expr    = term { ("+" | "-") term } ;
//! term    = unary { ("*" | "/") unary } ;
//! unary   = "-" unary | power ;
//! power   = primary [ "^" unary ] ;
//! primary = number | "pi" | variable | func "(" expr ")" | "(" expr ")" ;
//! variable = "x" digit { digit } ;
//! func    = "exp" | "ln" | "sin" | "cos" | "sqrt" | "tanh" ;
//! ```
//!
//! Evaluation is generic over [`Scalar`], so the same tree yields plain values
//! or Taylor jets.

mod ast;
mod parser;

pub use ast::{BinOp, Expr, Func};
pub use parser::{ParseError, ParseErrorKind};

use crate::error::{Error, Result};
use crate::jet::{Jet, Scalar};

/// A parsed expression bound to a chart dimension.
#[derive(Clone, Debug, PartialEq)]
pub struct ScalarExpr {
    expr: Expr,
    dim: usize,
}

/// Value, gradient and Hessian of a field at a point.
#[derive(Clone, Debug, PartialEq)]
pub struct JetValue {
    pub value: f64,
    pub gradient: Vec<f64>,
    pub hessian: Vec<Vec<f64>>,
}

pub fn parse(source: &str, dim: usize) -> std::result::Result<ScalarExpr, ParseError> {
    ScalarExpr::parse(source, dim)
}

impl ScalarExpr {
    pub fn parse(source: &str, dim: usize) -> std::result::Result<ScalarExpr, ParseError> {
        let expr = parser::parse_expr(source, dim)?;
        Ok(ScalarExpr { expr, dim })
    }

    pub fn constant(value: f64, dim: usize) -> ScalarExpr {
        ScalarExpr {
            expr: Expr::Num(value),
            dim,
        }
    }

    /// Wraps an existing tree. Fails if it mentions a variable beyond `dim`.
    pub fn from_expr(expr: Expr, dim: usize) -> Result<ScalarExpr> {
        if let Some(i) = expr.max_var() {
            if i >= dim {
                return Err(Error::Dimension {
                    expected: dim,
                    got: i + 1,
                });
            }
        }
        Ok(ScalarExpr { expr, dim })
    }

    pub fn expr(&self) -> &Expr {
        &self.expr
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// True when no coordinate appears in the expression.
    pub fn is_constant(&self) -> bool {
        self.expr.max_var().is_none()
    }

    pub fn eval<T: Scalar>(&self, x: &[T]) -> Result<T> {
        if x.len() != self.dim {
            return Err(Error::Dimension {
                expected: self.dim,
                got: x.len(),
            });
        }
        let like = x.first().ok_or(Error::Dimension {
            expected: self.dim,
            got: 0,
        })?;
        let v = eval_node(&self.expr, x, like)?;
        if !v.is_finite() {
            return Err(Error::Domain(format!(
                "'{}' is not finite at {:?}",
                self.expr,
                values(x)
            )));
        }
        Ok(v)
    }

    pub fn eval_f64(&self, x: &[f64]) -> Result<f64> {
        self.eval(x)
    }

    pub fn eval_jet(&self, x: &[f64]) -> Result<JetValue> {
        let j = self.eval(&Jet::seed(x, 2))?;
        Ok(JetValue {
            value: j.value(),
            gradient: j.gradient(),
            hessian: j.hessian(),
        })
    }
}

impl std::fmt::Display for ScalarExpr {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        self.expr.fmt(f)
    }
}

fn values<T: Scalar>(x: &[T]) -> Vec<f64> {
    x.iter().map(|v| v.value()).collect()
}

fn domain<T: Scalar>(what: &str, node: &Expr, x: &[T]) -> Error {
    Error::Domain(format!("{what} in '{node}' at {:?}", values(x)))
}

fn eval_node<T: Scalar>(node: &Expr, x: &[T], like: &T) -> Result<T> {
    Ok(match node {
        Expr::Num(v) => like.lift(*v),
        Expr::Var(i) => x[*i].clone(),
        Expr::Neg(a) => -eval_node(a, x, like)?,
        Expr::Call(func, a) => {
            let v = eval_node(a, x, like)?;
            match func {
                Func::Exp => v.exp(),
                Func::Ln => {
                    if !(v.value() > 0.0) {
                        return Err(domain("ln of a non-positive value", node, x));
                    }
                    v.ln()
                }
                Func::Sqrt => {
                    if v.value() < 0.0 {
                        return Err(domain("sqrt of a negative value", node, x));
                    }
                    v.sqrt()
                }
                Func::Sin => v.sin(),
                Func::Cos => v.cos(),
                Func::Tanh => v.tanh(),
            }
        }
        Expr::Binary(op, a, b) => {
            if *op == BinOp::Pow {
                return pow(node, a, b, x, like);
            }
            let l = eval_node(a, x, like)?;
            let r = eval_node(b, x, like)?;
            match op {
                BinOp::Add => l + r,
                BinOp::Sub => l - r,
                BinOp::Mul => l * r,
                BinOp::Div => {
                    if r.value() == 0.0 {
                        return Err(domain("division by zero", node, x));
                    }
                    l / r
                }
                BinOp::Pow => unreachable!(),
            }
        }
    })
}

fn pow<T: Scalar>(node: &Expr, a: &Expr, b: &Expr, x: &[T], like: &T) -> Result<T> {
    let base = eval_node(a, x, like)?;
    if let Some(p) = b.as_literal() {
        if p.fract() == 0.0 && p.abs() <= i32::MAX as f64 {
            if p < 0.0 && base.value() == 0.0 {
                return Err(domain("division by zero", node, x));
            }
            return Ok(base.powi(p as i32));
        }
        if !(base.value() > 0.0) {
            return Err(domain("non-integer power of a non-positive base", node, x));
        }
        return Ok(base.powf(p));
    }
    let exponent = eval_node(b, x, like)?;
    if !(base.value() > 0.0) {
        return Err(domain("variable power of a non-positive base", node, x));
    }
    Ok((exponent * base.ln()).exp())
}
