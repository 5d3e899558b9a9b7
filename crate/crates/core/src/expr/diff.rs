use super::{BinaryOp, Expr, Node, UnaryOp, Var};

impl Expr {
    /// Symbolic partial derivative with respect to `v`.
    pub fn diff(&self, v: &Var) -> Expr {
        if !self.depends_on(v) {
            return Expr::zero();
        }
        match self.node() {
            Node::Num(_) | Node::Pi => Expr::zero(),
            Node::Var(w) => {
                if w == v {
                    Expr::one()
                } else {
                    Expr::zero()
                }
            }
            Node::Unary(op, a) => {
                let da = a.diff(v);
                let outer = match op {
                    UnaryOp::Neg => return -da,
                    UnaryOp::Sqrt => 0.5 / self,
                    UnaryOp::Exp => self.clone(),
                    UnaryOp::Log => 1.0 / a,
                    UnaryOp::Sin => a.cos(),
                    UnaryOp::Cos => -a.sin(),
                    UnaryOp::Tan => 1.0 + self.powi(2),
                    UnaryOp::Atan => 1.0 / (1.0 + a.powi(2)),
                    UnaryOp::Sinh => a.cosh(),
                    UnaryOp::Cosh => a.sinh(),
                    UnaryOp::Abs => Expr::unary(UnaryOp::Sign, a.clone()),
                    // Piecewise constant away from the kink.
                    UnaryOp::Sign => return Expr::zero(),
                    UnaryOp::Ai => a.airy_ai_prime(),
                    UnaryOp::AiPrime => a * a.airy_ai(),
                };
                outer * da
            }
            Node::Binary(op, a, b) => {
                let da = a.diff(v);
                let db = b.diff(v);
                match op {
                    BinaryOp::Add => da + db,
                    BinaryOp::Sub => da - db,
                    BinaryOp::Mul => da * b + a * db,
                    BinaryOp::Div => {
                        if b.depends_on(v) {
                            (da * b - a * db) / b.powi(2)
                        } else {
                            da / b
                        }
                    }
                    BinaryOp::Pow => {
                        if !b.depends_on(v) {
                            let lowered = match b.as_num() {
                                Some(n) => a.pow(Expr::num(n - 1.0)),
                                None => a.pow(b - 1.0),
                            };
                            b * lowered * da
                        } else if !a.depends_on(v) {
                            self * a.ln() * db
                        } else {
                            self * (db * a.ln() + b * da / a)
                        }
                    }
                }
            }
            Node::Ode { table, slope, arg } => {
                let darg = arg.diff(v);
                if *slope {
                    table.potential_expr(arg) * Expr::ode_value(table.clone(), arg.clone()) * darg
                } else {
                    Expr::ode_slope(table.clone(), arg.clone()) * darg
                }
            }
            Node::Integral { var, integrand } => {
                if var == v {
                    // d/dv ∫_0^v g(s) ds = g(v); Leibniz terms vanish because
                    // the integrand's other variables are independent of v.
                    integrand.clone()
                } else {
                    Expr::integral(var.clone(), integrand.diff(v))
                }
            }
        }
    }

    pub fn dx(&self) -> Expr {
        self.diff(&Var::X)
    }

    pub fn dt(&self) -> Expr {
        self.diff(&Var::T)
    }
}
