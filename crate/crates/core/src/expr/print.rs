use std::fmt;

use super::{BinaryOp, Expr, Node, UnaryOp};

const PREC_ADD: u8 = 1;
const PREC_MUL: u8 = 2;
const PREC_NEG: u8 = 3;
const PREC_POW: u8 = 4;
const PREC_ATOM: u8 = 5;

fn prec(e: &Expr) -> u8 {
    match e.node() {
        Node::Num(v) if *v < 0.0 || v.is_sign_negative() => PREC_NEG,
        Node::Num(_) | Node::Pi | Node::Var(_) => PREC_ATOM,
        Node::Unary(UnaryOp::Neg, _) => PREC_NEG,
        Node::Unary(..) | Node::Ode { .. } | Node::Integral { .. } => PREC_ATOM,
        Node::Binary(BinaryOp::Add | BinaryOp::Sub, ..) => PREC_ADD,
        Node::Binary(BinaryOp::Mul | BinaryOp::Div, ..) => PREC_MUL,
        Node::Binary(BinaryOp::Pow, ..) => PREC_POW,
    }
}

fn write_at(f: &mut fmt::Formatter<'_>, e: &Expr, min: u8) -> fmt::Result {
    if prec(e) < min {
        write!(f, "({e})")
    } else {
        write!(f, "{e}")
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.node() {
            Node::Num(v) => {
                if v.fract() == 0.0 && v.abs() < 1e15 {
                    write!(f, "{}", *v as i64)
                } else {
                    write!(f, "{v:?}")
                }
            }
            Node::Pi => f.write_str("pi"),
            Node::Var(v) => write!(f, "{v}"),
            Node::Unary(UnaryOp::Neg, a) => {
                f.write_str("-")?;
                write_at(f, a, PREC_NEG)
            }
            Node::Unary(op, a) => write!(f, "{}({a})", op.name()),
            Node::Binary(op, a, b) => {
                let (sym, left, right) = match op {
                    BinaryOp::Add => (" + ", PREC_ADD, PREC_MUL),
                    BinaryOp::Sub => (" - ", PREC_ADD, PREC_MUL),
                    BinaryOp::Mul => ("*", PREC_MUL, PREC_NEG),
                    BinaryOp::Div => ("/", PREC_MUL, PREC_NEG),
                    // Right associative: a^b^c == a^(b^c).
                    BinaryOp::Pow => ("^", PREC_ATOM, PREC_NEG),
                };
                write_at(f, a, left)?;
                f.write_str(sym)?;
                write_at(f, b, right)
            }
            Node::Ode { table, slope, arg } => {
                let tick = if *slope { "'" } else { "" };
                write!(f, "ode#{}{tick}({arg})", table.id())
            }
            Node::Integral { var, integrand } => write!(f, "integral({integrand}, {var})"),
        }
    }
}
