use std::collections::BTreeMap;
use std::f64::consts::PI;

use super::{BinaryOp, Expr, ExprError, Node, UnaryOp, Var};
use crate::numerics::quadrature::gauss_legendre_0_to;
use crate::specfun::{airy_ai, airy_ai_prime};

/// Variable lookup used by the tree-walking evaluator.
pub trait Env {
    fn lookup(&self, var: &Var) -> Option<f64>;
}

/// Values for `x`, `t` and named parameters.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Bindings {
    x: Option<f64>,
    t: Option<f64>,
    params: BTreeMap<String, f64>,
}

impl Bindings {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn xt(x: f64, t: f64) -> Self {
        Bindings {
            x: Some(x),
            t: Some(t),
            params: BTreeMap::new(),
        }
    }

    pub fn with(mut self, name: &str, value: f64) -> Self {
        self.set(name, value);
        self
    }

    pub fn set(&mut self, name: &str, value: f64) {
        match name {
            "x" => self.x = Some(value),
            "t" => self.t = Some(value),
            _ => {
                self.params.insert(name.to_string(), value);
            }
        }
    }

    pub fn params(&self) -> impl Iterator<Item = (&str, &f64)> {
        self.params.iter().map(|(k, v)| (k.as_str(), v))
    }
}

impl Env for Bindings {
    fn lookup(&self, var: &Var) -> Option<f64> {
        match var {
            Var::X => self.x,
            Var::T => self.t,
            Var::Param(p) => self.params.get(&**p).copied(),
        }
    }
}

/// Env that shadows one variable.
struct Shadow<'a> {
    inner: &'a dyn Env,
    var: &'a Var,
    value: f64,
}

impl Env for Shadow<'_> {
    fn lookup(&self, var: &Var) -> Option<f64> {
        if var == self.var {
            Some(self.value)
        } else {
            self.inner.lookup(var)
        }
    }
}

fn domain(msg: impl Into<String>) -> ExprError {
    ExprError::Domain(msg.into())
}

pub(crate) fn apply_unary(op: UnaryOp, v: f64) -> Result<f64, ExprError> {
    let r = match op {
        UnaryOp::Neg => -v,
        UnaryOp::Sqrt => {
            if v < 0.0 {
                return Err(domain(format!("sqrt of negative value {v}")));
            }
            v.sqrt()
        }
        UnaryOp::Exp => v.exp(),
        UnaryOp::Log => {
            if v <= 0.0 {
                return Err(domain(format!("log of non-positive value {v}")));
            }
            v.ln()
        }
        UnaryOp::Sin => v.sin(),
        UnaryOp::Cos => v.cos(),
        UnaryOp::Tan => {
            if v.cos() == 0.0 {
                return Err(domain("tan at a pole"));
            }
            v.tan()
        }
        UnaryOp::Atan => v.atan(),
        UnaryOp::Sinh => v.sinh(),
        UnaryOp::Cosh => v.cosh(),
        UnaryOp::Abs => v.abs(),
        UnaryOp::Sign => {
            if v == 0.0 {
                return Err(domain("derivative of abs at 0"));
            }
            v.signum()
        }
        UnaryOp::Ai => airy_ai(v),
        UnaryOp::AiPrime => airy_ai_prime(v),
    };
    if r.is_finite() {
        Ok(r)
    } else {
        Err(domain(format!("{}({v}) is not finite", op.name())))
    }
}

pub(crate) fn apply_binary(op: BinaryOp, a: f64, b: f64) -> Result<f64, ExprError> {
    let r = match op {
        BinaryOp::Add => a + b,
        BinaryOp::Sub => a - b,
        BinaryOp::Mul => a * b,
        BinaryOp::Div => {
            if b == 0.0 {
                return Err(domain("division by zero"));
            }
            a / b
        }
        BinaryOp::Pow => {
            if a == 0.0 && b < 0.0 {
                return Err(domain("zero raised to a negative power"));
            }
            if a < 0.0 && b.fract() != 0.0 {
                return Err(domain(format!("negative base {a} with non-integer exponent {b}")));
            }
            pow(a, b)
        }
    };
    if r.is_finite() {
        Ok(r)
    } else {
        Err(domain("non-finite result"))
    }
}

#[inline]
pub(crate) fn pow(a: f64, b: f64) -> f64 {
    if b.fract() == 0.0 && b.abs() <= 64.0 {
        a.powi(b as i32)
    } else if b == 0.5 {
        a.sqrt()
    } else {
        a.powf(b)
    }
}

pub(crate) fn fold_unary(op: UnaryOp, v: f64) -> Option<f64> {
    match op {
        // Keep special functions symbolic so printing stays readable.
        UnaryOp::Ai | UnaryOp::AiPrime => None,
        _ => apply_unary(op, v).ok(),
    }
}

pub(crate) fn fold_binary(op: BinaryOp, a: f64, b: f64) -> Option<f64> {
    apply_binary(op, a, b).ok()
}

impl Expr {
    /// Tree-walking evaluation. Domain violations are reported, never
    /// returned as NaN.
    pub fn eval(&self, env: &dyn Env) -> Result<f64, ExprError> {
        match self.node() {
            Node::Num(v) => Ok(*v),
            Node::Pi => Ok(PI),
            Node::Var(v) => env.lookup(v).ok_or_else(|| ExprError::Unbound(v.name().to_string())),
            Node::Unary(op, a) => apply_unary(*op, a.eval(env)?),
            Node::Binary(op, a, b) => apply_binary(*op, a.eval(env)?, b.eval(env)?),
            Node::Ode { table, slope, arg } => {
                let y = arg.eval(env)?;
                let (u, du) = table.eval(y).map_err(|e| ExprError::Domain(e.to_string()))?;
                Ok(if *slope { du } else { u })
            }
            Node::Integral { var, integrand } => {
                let upper = env
                    .lookup(var)
                    .ok_or_else(|| ExprError::Unbound(var.name().to_string()))?;
                let mut err = None;
                let value = gauss_legendre_0_to(upper, |s| {
                    let shadow = Shadow {
                        inner: env,
                        var,
                        value: s,
                    };
                    match integrand.eval(&shadow) {
                        Ok(v) => v,
                        Err(e) => {
                            err.get_or_insert(e);
                            0.0
                        }
                    }
                });
                match err {
                    Some(e) => Err(e),
                    None => Ok(value),
                }
            }
        }
    }
}
