//! Expression language for closed-form functions of `x`, `t` and named
//! parameters.
//!
//! Expressions are immutable trees behind an [`Arc`], so cloning is cheap and
//! values can be shared between threads. The node set is closed under
//! differentiation: `Ai` differentiates to `Aip`, `Aip` uses the Airy
//! equation, tabulated ODE solutions use their own defining equation and
//! integrals with a variable upper limit differentiate by Leibniz' rule.

mod compile;
mod diff;
mod eval;
mod parse;
mod print;
mod simplify;

use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::specfun::OdeTable;

pub use compile::CompiledExpr;
pub use eval::{Bindings, Env};
pub use parse::{parse, Parser};
pub use simplify::{simplify, simplify_with_notes, DomainNote};

/// A free variable. `x` and `t` are the coordinates; everything else is a
/// late-bound parameter.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Var {
    X,
    T,
    Param(Arc<str>),
}

impl Var {
    pub fn param(name: &str) -> Self {
        match name {
            "x" => Var::X,
            "t" => Var::T,
            _ => Var::Param(Arc::from(name)),
        }
    }

    pub fn name(&self) -> &str {
        match self {
            Var::X => "x",
            Var::T => "t",
            Var::Param(p) => p,
        }
    }
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum UnaryOp {
    Neg,
    Sqrt,
    Exp,
    Log,
    Sin,
    Cos,
    Tan,
    Atan,
    Sinh,
    Cosh,
    Abs,
    /// Derivative of `abs`; undefined at zero.
    Sign,
    Ai,
    /// Derivative of the Airy function `Ai`.
    AiPrime,
}

impl UnaryOp {
    pub fn name(self) -> &'static str {
        match self {
            UnaryOp::Neg => "-",
            UnaryOp::Sqrt => "sqrt",
            UnaryOp::Exp => "exp",
            UnaryOp::Log => "log",
            UnaryOp::Sin => "sin",
            UnaryOp::Cos => "cos",
            UnaryOp::Tan => "tan",
            UnaryOp::Atan => "atan",
            UnaryOp::Sinh => "sinh",
            UnaryOp::Cosh => "cosh",
            UnaryOp::Abs => "abs",
            UnaryOp::Sign => "sign",
            UnaryOp::Ai => "Ai",
            UnaryOp::AiPrime => "Aip",
        }
    }

    pub(crate) fn from_name(name: &str) -> Option<Self> {
        Some(match name {
            "sqrt" => UnaryOp::Sqrt,
            "exp" => UnaryOp::Exp,
            "log" | "ln" => UnaryOp::Log,
            "sin" => UnaryOp::Sin,
            "cos" => UnaryOp::Cos,
            "tan" => UnaryOp::Tan,
            "atan" | "arctan" => UnaryOp::Atan,
            "sinh" => UnaryOp::Sinh,
            "cosh" => UnaryOp::Cosh,
            "abs" => UnaryOp::Abs,
            "sign" => UnaryOp::Sign,
            "Ai" => UnaryOp::Ai,
            "Aip" | "Ai'" => UnaryOp::AiPrime,
            _ => return None,
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum BinaryOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

#[derive(Clone, Debug)]
pub enum Node {
    Num(f64),
    Pi,
    Var(Var),
    Unary(UnaryOp, Expr),
    Binary(BinaryOp, Expr, Expr),
    /// Value (`slope == false`) or first derivative of a tabulated solution
    /// of `u'' = q(y) u`, evaluated at `arg`.
    Ode {
        table: Arc<OdeTable>,
        slope: bool,
        arg: Expr,
    },
    /// `∫_0^v g(s) ds` where `v` is the current value of `var` and the
    /// integrand is written in terms of `var` itself.
    Integral {
        var: Var,
        integrand: Expr,
    },
}

/// Shared, immutable expression tree.
#[derive(Clone)]
pub struct Expr(Arc<Node>);

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ExprError {
    #[error("syntax error at position {pos}: {msg}")]
    Syntax { pos: usize, msg: String },
    #[error("unknown identifier `{name}` at position {pos}")]
    UnknownIdentifier { name: String, pos: usize },
    #[error("unbound variable `{0}`")]
    Unbound(String),
    #[error("domain error: {0}")]
    Domain(String),
}

impl Expr {
    pub fn node(&self) -> &Node {
        &self.0
    }

    pub(crate) fn from_node(node: Node) -> Self {
        Expr(Arc::new(node))
    }

    pub fn num(v: f64) -> Self {
        Expr::from_node(Node::Num(v))
    }

    pub fn zero() -> Self {
        Expr::num(0.0)
    }

    pub fn one() -> Self {
        Expr::num(1.0)
    }

    pub fn pi() -> Self {
        Expr::from_node(Node::Pi)
    }

    pub fn x() -> Self {
        Expr::var(Var::X)
    }

    pub fn t() -> Self {
        Expr::var(Var::T)
    }

    pub fn var(v: Var) -> Self {
        Expr::from_node(Node::Var(v))
    }

    pub fn param(name: &str) -> Self {
        Expr::var(Var::param(name))
    }

    pub fn as_num(&self) -> Option<f64> {
        match self.node() {
            Node::Num(v) => Some(*v),
            _ => None,
        }
    }

    pub fn is_num(&self, v: f64) -> bool {
        self.as_num() == Some(v)
    }

    pub fn unary(op: UnaryOp, arg: Expr) -> Self {
        if let Some(v) = arg.as_num() {
            if let Some(r) = eval::fold_unary(op, v) {
                return Expr::num(r);
            }
        }
        if op == UnaryOp::Neg {
            if let Node::Unary(UnaryOp::Neg, inner) = arg.node() {
                return inner.clone();
            }
        }
        Expr::from_node(Node::Unary(op, arg))
    }

    /// Binary constructor with light folding (`0+u`, `1*u`, `0*u`, `u^1`,
    /// numeric operands). Heavier rewriting lives in [`simplify`].
    pub fn binary(op: BinaryOp, a: Expr, b: Expr) -> Self {
        if let (Some(x), Some(y)) = (a.as_num(), b.as_num()) {
            if let Some(r) = eval::fold_binary(op, x, y) {
                return Expr::num(r);
            }
        }
        match op {
            BinaryOp::Add => {
                if a.is_num(0.0) {
                    return b;
                }
                if b.is_num(0.0) {
                    return a;
                }
            }
            BinaryOp::Sub => {
                if b.is_num(0.0) {
                    return a;
                }
                if a.is_num(0.0) {
                    return Expr::unary(UnaryOp::Neg, b);
                }
            }
            BinaryOp::Mul => {
                if a.is_num(0.0) || b.is_num(0.0) {
                    return Expr::zero();
                }
                if a.is_num(1.0) {
                    return b;
                }
                if b.is_num(1.0) {
                    return a;
                }
                if a.is_num(-1.0) {
                    return Expr::unary(UnaryOp::Neg, b);
                }
                if b.is_num(-1.0) {
                    return Expr::unary(UnaryOp::Neg, a);
                }
            }
            BinaryOp::Div => {
                if a.is_num(0.0) && !b.is_num(0.0) {
                    return Expr::zero();
                }
                if b.is_num(1.0) {
                    return a;
                }
            }
            BinaryOp::Pow => {
                if b.is_num(1.0) {
                    return a;
                }
                if b.is_num(0.0) {
                    return Expr::one();
                }
            }
        }
        Expr::from_node(Node::Binary(op, a, b))
    }

    pub fn pow(&self, e: impl Into<Expr>) -> Expr {
        Expr::binary(BinaryOp::Pow, self.clone(), e.into())
    }

    pub fn powi(&self, n: i32) -> Expr {
        self.pow(Expr::num(n as f64))
    }

    pub fn sqrt(&self) -> Expr {
        Expr::unary(UnaryOp::Sqrt, self.clone())
    }
    pub fn exp(&self) -> Expr {
        Expr::unary(UnaryOp::Exp, self.clone())
    }
    pub fn ln(&self) -> Expr {
        Expr::unary(UnaryOp::Log, self.clone())
    }
    pub fn sin(&self) -> Expr {
        Expr::unary(UnaryOp::Sin, self.clone())
    }
    pub fn cos(&self) -> Expr {
        Expr::unary(UnaryOp::Cos, self.clone())
    }
    pub fn tan(&self) -> Expr {
        Expr::unary(UnaryOp::Tan, self.clone())
    }
    pub fn atan(&self) -> Expr {
        Expr::unary(UnaryOp::Atan, self.clone())
    }
    pub fn sinh(&self) -> Expr {
        Expr::unary(UnaryOp::Sinh, self.clone())
    }
    pub fn cosh(&self) -> Expr {
        Expr::unary(UnaryOp::Cosh, self.clone())
    }
    pub fn abs(&self) -> Expr {
        Expr::unary(UnaryOp::Abs, self.clone())
    }
    pub fn airy_ai(&self) -> Expr {
        Expr::unary(UnaryOp::Ai, self.clone())
    }
    pub fn airy_ai_prime(&self) -> Expr {
        Expr::unary(UnaryOp::AiPrime, self.clone())
    }

    /// Value of a tabulated ODE solution at `self`.
    pub fn ode_value(table: Arc<OdeTable>, arg: Expr) -> Expr {
        Expr::from_node(Node::Ode {
            table,
            slope: false,
            arg,
        })
    }

    /// First derivative of a tabulated ODE solution at `self`.
    pub fn ode_slope(table: Arc<OdeTable>, arg: Expr) -> Expr {
        Expr::from_node(Node::Ode {
            table,
            slope: true,
            arg,
        })
    }

    /// `∫_0^var integrand d(var)`, with the integrand written in `var`.
    pub fn integral(var: Var, integrand: Expr) -> Expr {
        if integrand.is_num(0.0) {
            return Expr::zero();
        }
        Expr::from_node(Node::Integral { var, integrand })
    }

    /// Does `v` occur free in the expression?
    pub fn depends_on(&self, v: &Var) -> bool {
        match self.node() {
            Node::Num(_) | Node::Pi => false,
            Node::Var(w) => w == v,
            Node::Unary(_, a) => a.depends_on(v),
            Node::Binary(_, a, b) => a.depends_on(v) || b.depends_on(v),
            Node::Ode { arg, .. } => arg.depends_on(v),
            // The integration variable is also the upper limit, so it is free.
            Node::Integral { var, integrand } => var == v || integrand.depends_on(v),
        }
    }

    /// Collect the free variables in first-occurrence order.
    pub fn free_vars(&self) -> Vec<Var> {
        fn walk(e: &Expr, out: &mut Vec<Var>) {
            match e.node() {
                Node::Num(_) | Node::Pi => {}
                Node::Var(v) => {
                    if !out.contains(v) {
                        out.push(v.clone())
                    }
                }
                Node::Unary(_, a) => walk(a, out),
                Node::Binary(_, a, b) => {
                    walk(a, out);
                    walk(b, out);
                }
                Node::Ode { arg, .. } => walk(arg, out),
                Node::Integral { var, integrand } => {
                    if !out.contains(var) {
                        out.push(var.clone());
                    }
                    walk(integrand, out);
                }
            }
        }
        let mut out = Vec::new();
        walk(self, &mut out);
        out
    }

    /// Replace every free occurrence of `v` by `with`.
    ///
    /// Integrals over `v` are rewritten only when `with` is a plain number
    /// or variable; other replacements of an integration variable are not
    /// meaningful and leave the integral untouched.
    pub fn subst(&self, v: &Var, with: &Expr) -> Expr {
        match self.node() {
            Node::Num(_) | Node::Pi => self.clone(),
            Node::Var(w) => {
                if w == v {
                    with.clone()
                } else {
                    self.clone()
                }
            }
            Node::Unary(op, a) => Expr::unary(*op, a.subst(v, with)),
            Node::Binary(op, a, b) => Expr::binary(*op, a.subst(v, with), b.subst(v, with)),
            Node::Ode { table, slope, arg } => Expr::from_node(Node::Ode {
                table: table.clone(),
                slope: *slope,
                arg: arg.subst(v, with),
            }),
            Node::Integral { var, integrand } => {
                if var == v {
                    // Only the upper limit is free; keep the dummy variable.
                    match with.node() {
                        Node::Var(w) if !integrand.depends_on(w) || w == v => {
                            Expr::integral(w.clone(), integrand.subst(v, with))
                        }
                        _ => self.clone(),
                    }
                } else {
                    Expr::integral(var.clone(), integrand.subst(v, with))
                }
            }
        }
    }

    /// Substitute numeric values for every parameter in `bindings`.
    pub fn bind(&self, bindings: &Bindings) -> Expr {
        let mut out = self.clone();
        for (name, value) in bindings.params() {
            out = out.subst(&Var::param(name), &Expr::num(*value));
        }
        out
    }

    /// Number of nodes in the tree.
    pub fn size(&self) -> usize {
        match self.node() {
            Node::Num(_) | Node::Pi | Node::Var(_) => 1,
            Node::Unary(_, a) => 1 + a.size(),
            Node::Binary(_, a, b) => 1 + a.size() + b.size(),
            Node::Ode { arg, .. } => 1 + arg.size(),
            Node::Integral { integrand, .. } => 1 + integrand.size(),
        }
    }

    /// Evaluate at a coordinate point with every parameter already bound.
    pub fn eval_xt(&self, x: f64, t: f64) -> Result<f64, ExprError> {
        self.eval(&Bindings::xt(x, t))
    }
}

impl PartialEq for Expr {
    fn eq(&self, other: &Self) -> bool {
        if Arc::ptr_eq(&self.0, &other.0) {
            return true;
        }
        match (self.node(), other.node()) {
            (Node::Num(a), Node::Num(b)) => a == b,
            (Node::Pi, Node::Pi) => true,
            (Node::Var(a), Node::Var(b)) => a == b,
            (Node::Unary(o1, a1), Node::Unary(o2, a2)) => o1 == o2 && a1 == a2,
            (Node::Binary(o1, a1, b1), Node::Binary(o2, a2, b2)) => o1 == o2 && a1 == a2 && b1 == b2,
            (
                Node::Ode {
                    table: t1,
                    slope: s1,
                    arg: a1,
                },
                Node::Ode {
                    table: t2,
                    slope: s2,
                    arg: a2,
                },
            ) => Arc::ptr_eq(t1, t2) && s1 == s2 && a1 == a2,
            (Node::Integral { var: v1, integrand: g1 }, Node::Integral { var: v2, integrand: g2 }) => {
                v1 == v2 && g1 == g2
            }
            _ => false,
        }
    }
}

impl fmt::Debug for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Expr({self})")
    }
}

impl From<f64> for Expr {
    fn from(v: f64) -> Self {
        Expr::num(v)
    }
}

impl From<&Expr> for Expr {
    fn from(e: &Expr) -> Self {
        e.clone()
    }
}

macro_rules! impl_binop {
    ($tr:ident, $method:ident, $op:expr) => {
        impl std::ops::$tr<Expr> for Expr {
            type Output = Expr;
            fn $method(self, rhs: Expr) -> Expr {
                Expr::binary($op, self, rhs)
            }
        }
        impl std::ops::$tr<&Expr> for Expr {
            type Output = Expr;
            fn $method(self, rhs: &Expr) -> Expr {
                Expr::binary($op, self, rhs.clone())
            }
        }
        impl std::ops::$tr<Expr> for &Expr {
            type Output = Expr;
            fn $method(self, rhs: Expr) -> Expr {
                Expr::binary($op, self.clone(), rhs)
            }
        }
        impl std::ops::$tr<&Expr> for &Expr {
            type Output = Expr;
            fn $method(self, rhs: &Expr) -> Expr {
                Expr::binary($op, self.clone(), rhs.clone())
            }
        }
        impl std::ops::$tr<f64> for Expr {
            type Output = Expr;
            fn $method(self, rhs: f64) -> Expr {
                Expr::binary($op, self, Expr::num(rhs))
            }
        }
        impl std::ops::$tr<f64> for &Expr {
            type Output = Expr;
            fn $method(self, rhs: f64) -> Expr {
                Expr::binary($op, self.clone(), Expr::num(rhs))
            }
        }
        impl std::ops::$tr<Expr> for f64 {
            type Output = Expr;
            fn $method(self, rhs: Expr) -> Expr {
                Expr::binary($op, Expr::num(self), rhs)
            }
        }
        impl std::ops::$tr<&Expr> for f64 {
            type Output = Expr;
            fn $method(self, rhs: &Expr) -> Expr {
                Expr::binary($op, Expr::num(self), rhs.clone())
            }
        }
        impl std::ops::$tr<Expr> for &f64 {
            type Output = Expr;
            fn $method(self, rhs: Expr) -> Expr {
                Expr::binary($op, Expr::num(*self), rhs)
            }
        }
        impl std::ops::$tr<&Expr> for &f64 {
            type Output = Expr;
            fn $method(self, rhs: &Expr) -> Expr {
                Expr::binary($op, Expr::num(*self), rhs.clone())
            }
        }
        impl std::ops::$tr<&f64> for Expr {
            type Output = Expr;
            fn $method(self, rhs: &f64) -> Expr {
                Expr::binary($op, self, Expr::num(*rhs))
            }
        }
        impl std::ops::$tr<&f64> for &Expr {
            type Output = Expr;
            fn $method(self, rhs: &f64) -> Expr {
                Expr::binary($op, self.clone(), Expr::num(*rhs))
            }
        }
    };
}

impl_binop!(Add, add, BinaryOp::Add);
impl_binop!(Sub, sub, BinaryOp::Sub);
impl_binop!(Mul, mul, BinaryOp::Mul);
impl_binop!(Div, div, BinaryOp::Div);

impl std::ops::Neg for Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        Expr::unary(UnaryOp::Neg, self)
    }
}

impl std::ops::Neg for &Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        Expr::unary(UnaryOp::Neg, self.clone())
    }
}

impl serde::Serialize for Expr {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> serde::Deserialize<'de> for Expr {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let text = String::deserialize(d)?;
        parse(&text).map_err(serde::de::Error::custom)
    }
}
