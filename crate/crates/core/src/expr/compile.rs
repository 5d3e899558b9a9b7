use std::f64::consts::PI;

use super::eval::{apply_binary, apply_unary, pow};
use super::{BinaryOp, Expr, ExprError, Node, UnaryOp, Var};
use crate::numerics::quadrature::gauss_legendre_0_to;
use crate::specfun::{airy_ai, airy_ai_prime};

type Kernel = Box<dyn Fn(&[f64; 2]) -> f64 + Send + Sync>;

/// An expression in `x` and `t` lowered to nested closures for fast
/// repeated evaluation over grids.
///
/// Domain violations surface as non-finite intermediate values and are
/// reported by [`CompiledExpr::eval`] as [`ExprError::Domain`].
pub struct CompiledExpr {
    kernel: Kernel,
    source: Expr,
}

impl CompiledExpr {
    pub fn new(expr: &Expr) -> Result<Self, ExprError> {
        for v in expr.free_vars() {
            if let Var::Param(p) = v {
                return Err(ExprError::Unbound(p.to_string()));
            }
        }
        Ok(CompiledExpr {
            kernel: lower(expr),
            source: expr.clone(),
        })
    }

    pub fn source(&self) -> &Expr {
        &self.source
    }

    /// Evaluate; a non-finite result is re-evaluated with the interpreter to
    /// produce a precise error message.
    pub fn eval(&self, x: f64, t: f64) -> Result<f64, ExprError> {
        let v = (self.kernel)(&[x, t]);
        if v.is_finite() {
            Ok(v)
        } else {
            match self.source.eval_xt(x, t) {
                Err(e) => Err(e),
                Ok(_) => Err(ExprError::Domain(format!("non-finite value at x={x}, t={t}"))),
            }
        }
    }

    /// Raw evaluation; NaN or infinity signals a domain violation.
    #[inline]
    pub fn eval_raw(&self, x: f64, t: f64) -> f64 {
        (self.kernel)(&[x, t])
    }
}

impl Expr {
    pub fn compile(&self) -> Result<CompiledExpr, ExprError> {
        CompiledExpr::new(self)
    }
}

fn nan_on_err(r: Result<f64, ExprError>) -> f64 {
    r.unwrap_or(f64::NAN)
}

fn lower(e: &Expr) -> Kernel {
    match e.node() {
        Node::Num(v) => {
            let v = *v;
            Box::new(move |_| v)
        }
        Node::Pi => Box::new(|_| PI),
        Node::Var(Var::X) => Box::new(|s| s[0]),
        Node::Var(Var::T) => Box::new(|s| s[1]),
        Node::Var(Var::Param(_)) => unreachable!("parameters rejected before lowering"),
        Node::Unary(op, a) => {
            let a = lower(a);
            match op {
                UnaryOp::Neg => Box::new(move |s| -a(s)),
                UnaryOp::Exp => Box::new(move |s| a(s).exp()),
                UnaryOp::Sin => Box::new(move |s| a(s).sin()),
                UnaryOp::Cos => Box::new(move |s| a(s).cos()),
                UnaryOp::Sinh => Box::new(move |s| a(s).sinh()),
                UnaryOp::Cosh => Box::new(move |s| a(s).cosh()),
                UnaryOp::Atan => Box::new(move |s| a(s).atan()),
                UnaryOp::Abs => Box::new(move |s| a(s).abs()),
                // sqrt/log of negative numbers already yield NaN.
                UnaryOp::Sqrt => Box::new(move |s| a(s).sqrt()),
                UnaryOp::Log => Box::new(move |s| {
                    let v = a(s);
                    if v <= 0.0 {
                        f64::NAN
                    } else {
                        v.ln()
                    }
                }),
                UnaryOp::Ai => Box::new(move |s| airy_ai(a(s))),
                UnaryOp::AiPrime => Box::new(move |s| airy_ai_prime(a(s))),
                op @ (UnaryOp::Tan | UnaryOp::Sign) => {
                    let op = *op;
                    Box::new(move |s| nan_on_err(apply_unary(op, a(s))))
                }
            }
        }
        Node::Binary(op, a, b) => {
            // Specialise powers with a constant exponent.
            if let (BinaryOp::Pow, Some(p)) = (op, b.as_num()) {
                let a = lower(a);
                return if p.fract() == 0.0 && p.abs() <= 64.0 {
                    let n = p as i32;
                    if n < 0 {
                        Box::new(move |s| {
                            let v = a(s);
                            if v == 0.0 {
                                f64::NAN
                            } else {
                                v.powi(n)
                            }
                        })
                    } else {
                        Box::new(move |s| a(s).powi(n))
                    }
                } else {
                    Box::new(move |s| {
                        let v = a(s);
                        if v < 0.0 || (v == 0.0 && p < 0.0) {
                            f64::NAN
                        } else {
                            pow(v, p)
                        }
                    })
                };
            }
            let a = lower(a);
            let b = lower(b);
            match op {
                BinaryOp::Add => Box::new(move |s| a(s) + b(s)),
                BinaryOp::Sub => Box::new(move |s| a(s) - b(s)),
                BinaryOp::Mul => Box::new(move |s| a(s) * b(s)),
                BinaryOp::Div => Box::new(move |s| {
                    let d = b(s);
                    if d == 0.0 {
                        f64::NAN
                    } else {
                        a(s) / d
                    }
                }),
                BinaryOp::Pow => Box::new(move |s| nan_on_err(apply_binary(BinaryOp::Pow, a(s), b(s)))),
            }
        }
        Node::Ode { table, slope, arg } => {
            let arg = lower(arg);
            let table = table.clone();
            let slope = *slope;
            Box::new(move |s| match table.eval(arg(s)) {
                Ok((u, du)) => {
                    if slope {
                        du
                    } else {
                        u
                    }
                }
                Err(_) => f64::NAN,
            })
        }
        Node::Integral { var, integrand } => {
            let slot = match var {
                Var::X => 0,
                Var::T => 1,
                Var::Param(_) => unreachable!("parameters rejected before lowering"),
            };
            let g = lower(integrand);
            Box::new(move |s| {
                let mut inner = *s;
                gauss_legendre_0_to(s[slot], |v| {
                    inner[slot] = v;
                    g(&inner)
                })
            })
        }
    }
}
