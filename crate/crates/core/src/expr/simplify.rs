//! Algebraic clean-up: constant folding, identity elimination, collection of
//! like terms and merging of numeric exponents on equal bases.
//!
//! Rewrites are value-preserving wherever the input evaluates. Cancelling a
//! factor (`x^2/x -> x`) extends the domain; each such cancellation is
//! recorded as a [`DomainNote`].

use std::fmt;

use super::{BinaryOp, Expr, Node, UnaryOp};

/// A factor that was cancelled and must be non-zero for the simplified
/// expression to agree with the original.
#[derive(Clone, Debug, PartialEq)]
pub struct DomainNote {
    pub nonzero: Expr,
}

impl fmt::Display for DomainNote {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} != 0", self.nonzero)
    }
}

pub fn simplify(e: &Expr) -> Expr {
    simplify_with_notes(e).0
}

pub fn simplify_with_notes(e: &Expr) -> (Expr, Vec<DomainNote>) {
    let mut notes = Vec::new();
    let out = simp(e, &mut notes);
    (out, notes)
}

fn simp(e: &Expr, notes: &mut Vec<DomainNote>) -> Expr {
    match e.node() {
        Node::Num(_) | Node::Pi | Node::Var(_) => e.clone(),
        Node::Unary(op, a) => {
            let a = simp(a, notes);
            match op {
                UnaryOp::Neg => canonical_sum(&(-&a), notes),
                UnaryOp::Sqrt => canonical_product(&a.sqrt(), notes),
                _ => Expr::unary(*op, a),
            }
        }
        Node::Binary(op, a, b) => {
            let a = simp(a, notes);
            let b = simp(b, notes);
            let raw = Expr::from_node(Node::Binary(*op, a.clone(), b.clone()));
            match op {
                BinaryOp::Add | BinaryOp::Sub => canonical_sum(&raw, notes),
                BinaryOp::Mul | BinaryOp::Div => canonical_sum(&canonical_product(&raw, notes), notes),
                BinaryOp::Pow => {
                    if let (Some(x), Some(y)) = (a.as_num(), b.as_num()) {
                        if let Some(v) = super::eval::fold_binary(BinaryOp::Pow, x, y) {
                            return Expr::num(v);
                        }
                    }
                    canonical_product(&raw, notes)
                }
            }
        }
        Node::Ode { table, slope, arg } => Expr::from_node(Node::Ode {
            table: table.clone(),
            slope: *slope,
            arg: simp(arg, notes),
        }),
        Node::Integral { var, integrand } => Expr::integral(var.clone(), simp(integrand, notes)),
    }
}

#[derive(Clone)]
enum Exponent {
    Num(f64),
    Sym(Expr),
}

struct Factor {
    base: Expr,
    exp: Exponent,
}

fn collect_factors(e: &Expr, sign: f64, coef: &mut f64, out: &mut Vec<Factor>) {
    match e.node() {
        Node::Num(v) if sign > 0.0 || *v != 0.0 => {
            *coef *= if sign > 0.0 { *v } else { 1.0 / *v };
        }
        Node::Unary(UnaryOp::Neg, a) => {
            *coef = -*coef;
            collect_factors(a, sign, coef, out);
        }
        Node::Unary(UnaryOp::Sqrt, a) => out.push(Factor {
            base: a.clone(),
            exp: Exponent::Num(0.5 * sign),
        }),
        Node::Binary(BinaryOp::Mul, a, b) => {
            collect_factors(a, sign, coef, out);
            collect_factors(b, sign, coef, out);
        }
        Node::Binary(BinaryOp::Div, a, b) => {
            collect_factors(a, sign, coef, out);
            collect_factors(b, -sign, coef, out);
        }
        Node::Binary(BinaryOp::Pow, base, p) => match p.as_num() {
            Some(p) => {
                // (c^p)^q = c^(pq) holds whenever q is an integer.
                if let Node::Binary(BinaryOp::Pow, inner, p0) = base.node() {
                    if let Some(p0) = p0.as_num() {
                        if p.fract() == 0.0 {
                            out.push(Factor {
                                base: inner.clone(),
                                exp: Exponent::Num(p0 * p * sign),
                            });
                            return;
                        }
                    }
                }
                out.push(Factor {
                    base: base.clone(),
                    exp: Exponent::Num(p * sign),
                })
            }
            None => out.push(Factor {
                base: base.clone(),
                exp: if sign > 0.0 {
                    Exponent::Sym(p.clone())
                } else {
                    Exponent::Sym(-p)
                },
            }),
        },
        _ => out.push(Factor {
            base: e.clone(),
            exp: Exponent::Num(sign),
        }),
    }
}

fn power_of(base: &Expr, p: f64) -> Expr {
    if p == 1.0 {
        base.clone()
    } else if p == 0.5 {
        Expr::from_node(Node::Unary(UnaryOp::Sqrt, base.clone()))
    } else {
        Expr::from_node(Node::Binary(BinaryOp::Pow, base.clone(), Expr::num(p)))
    }
}

fn canonical_product(e: &Expr, notes: &mut Vec<DomainNote>) -> Expr {
    let mut coef = 1.0;
    let mut raw = Vec::new();
    collect_factors(e, 1.0, &mut coef, &mut raw);
    if !coef.is_finite() {
        return e.clone();
    }
    if coef == 0.0 {
        return Expr::zero();
    }

    // Merge numeric exponents on structurally equal bases.
    let mut merged: Vec<Factor> = Vec::new();
    for f in raw {
        if let Exponent::Num(p) = f.exp {
            if let Some(existing) = merged
                .iter_mut()
                .find(|m| matches!(m.exp, Exponent::Num(_)) && m.base == f.base)
            {
                if let Exponent::Num(q) = &mut existing.exp {
                    if *q * p < 0.0 && f.base.as_num().is_none() {
                        notes.push(DomainNote {
                            nonzero: f.base.clone(),
                        });
                    }
                    *q += p;
                }
                continue;
            }
        }
        merged.push(f);
    }

    let mut num_parts: Vec<(String, Expr)> = Vec::new();
    let mut den_parts: Vec<(String, Expr)> = Vec::new();
    for f in merged {
        match f.exp {
            Exponent::Num(0.0) => {}
            Exponent::Num(p) if p > 0.0 => {
                let e = power_of(&f.base, p);
                num_parts.push((e.to_string(), e));
            }
            Exponent::Num(p) => {
                let e = power_of(&f.base, -p);
                den_parts.push((e.to_string(), e));
            }
            Exponent::Sym(p) => {
                let e = Expr::binary(BinaryOp::Pow, f.base, p);
                num_parts.push((e.to_string(), e));
            }
        }
    }
    num_parts.sort_by(|a, b| a.0.cmp(&b.0));
    den_parts.sort_by(|a, b| a.0.cmp(&b.0));

    let product = |parts: Vec<(String, Expr)>| {
        parts
            .into_iter()
            .map(|(_, e)| e)
            .reduce(|acc, e| Expr::from_node(Node::Binary(BinaryOp::Mul, acc, e)))
    };
    let numer = product(num_parts);
    let denom = product(den_parts);
    let magnitude = coef.abs();
    let body = match (numer, denom) {
        (None, None) => return Expr::num(coef),
        (Some(n), None) => with_coef(magnitude, n),
        (None, Some(d)) => Expr::from_node(Node::Binary(BinaryOp::Div, Expr::num(magnitude), d)),
        (Some(n), Some(d)) => with_coef(magnitude, Expr::from_node(Node::Binary(BinaryOp::Div, n, d))),
    };
    if coef < 0.0 {
        Expr::from_node(Node::Unary(UnaryOp::Neg, body))
    } else {
        body
    }
}

fn with_coef(c: f64, e: Expr) -> Expr {
    if c == 1.0 {
        e
    } else {
        Expr::from_node(Node::Binary(BinaryOp::Mul, Expr::num(c), e))
    }
}

/// Split a canonical product into its numeric coefficient and the rest.
fn split_coef(e: &Expr) -> (f64, Expr) {
    match e.node() {
        Node::Num(v) => (*v, Expr::one()),
        Node::Unary(UnaryOp::Neg, a) => {
            let (c, r) = split_coef(a);
            (-c, r)
        }
        Node::Binary(BinaryOp::Mul, a, b) => match a.as_num() {
            Some(c) => (c, b.clone()),
            None => (1.0, e.clone()),
        },
        Node::Binary(BinaryOp::Div, a, b) => match a.as_num() {
            Some(c) if c != 1.0 => (c, Expr::from_node(Node::Binary(BinaryOp::Div, Expr::one(), b.clone()))),
            _ => (1.0, e.clone()),
        },
        _ => (1.0, e.clone()),
    }
}

fn collect_terms(e: &Expr, sign: f64, constant: &mut f64, out: &mut Vec<(f64, Expr)>) {
    match e.node() {
        Node::Num(v) => *constant += sign * v,
        Node::Binary(BinaryOp::Add, a, b) => {
            collect_terms(a, sign, constant, out);
            collect_terms(b, sign, constant, out);
        }
        Node::Binary(BinaryOp::Sub, a, b) => {
            collect_terms(a, sign, constant, out);
            collect_terms(b, -sign, constant, out);
        }
        Node::Unary(UnaryOp::Neg, a) => collect_terms(a, -sign, constant, out),
        _ => {
            let (c, rest) = split_coef(e);
            out.push((sign * c, rest));
        }
    }
}

fn canonical_sum(e: &Expr, _notes: &mut Vec<DomainNote>) -> Expr {
    let mut constant = 0.0;
    let mut raw = Vec::new();
    collect_terms(e, 1.0, &mut constant, &mut raw);

    let mut merged: Vec<(f64, Expr)> = Vec::new();
    for (c, r) in raw {
        if let Some(existing) = merged.iter_mut().find(|(_, m)| *m == r) {
            existing.0 += c;
        } else {
            merged.push((c, r));
        }
    }
    let mut terms: Vec<(String, f64, Expr)> = merged
        .into_iter()
        .filter(|(c, _)| *c != 0.0)
        .map(|(c, r)| (r.to_string(), c, r))
        .collect();
    terms.sort_by(|a, b| a.0.cmp(&b.0));

    let mut acc: Option<Expr> = None;
    for (_, c, r) in terms {
        let mag = with_coef(c.abs(), r);
        acc = Some(match acc {
            None => {
                if c < 0.0 {
                    Expr::from_node(Node::Unary(UnaryOp::Neg, mag))
                } else {
                    mag
                }
            }
            Some(prev) => {
                let op = if c < 0.0 { BinaryOp::Sub } else { BinaryOp::Add };
                Expr::from_node(Node::Binary(op, prev, mag))
            }
        });
    }
    match acc {
        None => Expr::num(constant),
        Some(body) if constant == 0.0 => body,
        Some(body) => {
            let op = if constant < 0.0 { BinaryOp::Sub } else { BinaryOp::Add };
            Expr::from_node(Node::Binary(op, body, Expr::num(constant.abs())))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse;

    #[test]
    fn drops_zero_and_unit_coefficients() {
        let e = Expr::from_node(Node::Binary(
            BinaryOp::Add,
            Expr::from_node(Node::Binary(BinaryOp::Mul, Expr::zero(), Expr::x())),
            Expr::from_node(Node::Binary(BinaryOp::Mul, Expr::one(), Expr::t())),
        ));
        assert_eq!(simplify(&e), Expr::t());
    }

    #[test]
    fn cancels_factor_and_records_note() {
        let (s, notes) = simplify_with_notes(&parse("x^2/x").unwrap());
        assert_eq!(s, Expr::x());
        assert_eq!(notes, vec![DomainNote { nonzero: Expr::x() }]);
    }

    #[test]
    fn folds_constants_and_merges_exponents() {
        assert_eq!(simplify(&parse("2*3 + 4").unwrap()), Expr::num(10.0));
        let s = simplify(&parse("x^2*x^3").unwrap());
        assert_eq!(s, Expr::x().powi(5));
        let s = simplify(&parse("sqrt(t)*sqrt(t)").unwrap());
        assert_eq!(s, Expr::t());
        let s = simplify(&parse("x + x + 2*x").unwrap());
        assert_eq!(s.to_string(), "4*x");
        assert_eq!(simplify(&parse("x - x").unwrap()), Expr::zero());
    }

    #[test]
    fn keeps_abs_semantics_for_even_inner_power() {
        // (x^2)^(1/2) must stay |x|, so it is not merged to x.
        let e = parse("(x^2)^0.5").unwrap();
        let s = simplify(&e);
        assert_eq!(s.eval_xt(-3.0, 0.0).unwrap(), 3.0);
    }
}
