//! Recursive-descent parser for the expression grammar (see `docs/grammar.md`).

use std::collections::BTreeSet;

use super::{BinaryOp, Expr, ExprError, UnaryOp, Var};

/// Identifiers accepted without declaration: the coordinates, `pi`, and the
/// physical constants `hbar` and `m`, which are bound at evaluation time.
const BUILTIN_IDENTS: [&str; 5] = ["x", "t", "pi", "hbar", "m"];

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Op(char),
    LParen,
    RParen,
    Comma,
    End,
}

struct Lexer<'a> {
    src: &'a str,
    pos: usize,
}

impl<'a> Lexer<'a> {
    fn tokens(src: &'a str) -> Result<Vec<(Tok, usize)>, ExprError> {
        let mut lx = Lexer { src, pos: 0 };
        let mut out = Vec::new();
        loop {
            let (tok, at) = lx.next()?;
            let end = tok == Tok::End;
            out.push((tok, at));
            if end {
                return Ok(out);
            }
        }
    }

    fn peek(&self) -> Option<char> {
        self.src[self.pos..].chars().next()
    }

    fn next(&mut self) -> Result<(Tok, usize), ExprError> {
        while let Some(c) = self.peek() {
            if c.is_whitespace() {
                self.pos += c.len_utf8();
            } else {
                break;
            }
        }
        let start = self.pos;
        let Some(c) = self.peek() else {
            return Ok((Tok::End, start));
        };
        let tok = if c.is_ascii_digit() || c == '.' {
            self.number(start)?
        } else if c.is_alphabetic() || c == '_' {
            while let Some(c) = self.peek() {
                if c.is_alphanumeric() || c == '_' {
                    self.pos += c.len_utf8();
                } else {
                    break;
                }
            }
            // Ai' is accepted as a spelling of Aip.
            if &self.src[start..self.pos] == "Ai" && self.peek() == Some('\'') {
                self.pos += 1;
            }
            Tok::Ident(self.src[start..self.pos].to_string())
        } else {
            self.pos += c.len_utf8();
            match c {
                '+' | '-' | '*' | '/' | '^' => Tok::Op(c),
                '(' => Tok::LParen,
                ')' => Tok::RParen,
                ',' => Tok::Comma,
                _ => {
                    return Err(ExprError::Syntax {
                        pos: start,
                        msg: format!("unexpected character `{c}`"),
                    })
                }
            }
        };
        Ok((tok, start))
    }

    fn number(&mut self, start: usize) -> Result<Tok, ExprError> {
        let bytes = self.src.as_bytes();
        let mut i = self.pos;
        while i < bytes.len() && (bytes[i].is_ascii_digit() || bytes[i] == b'.') {
            i += 1;
        }
        if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
            let mut j = i + 1;
            if j < bytes.len() && (bytes[j] == b'+' || bytes[j] == b'-') {
                j += 1;
            }
            if j < bytes.len() && bytes[j].is_ascii_digit() {
                while j < bytes.len() && bytes[j].is_ascii_digit() {
                    j += 1;
                }
                i = j;
            }
        }
        self.pos = i;
        let text = &self.src[start..i];
        text.parse::<f64>().map(Tok::Num).map_err(|_| ExprError::Syntax {
            pos: start,
            msg: format!("malformed number `{text}`"),
        })
    }
}

/// Parser configuration: which parameter names are accepted.
#[derive(Clone, Debug, Default)]
pub struct Parser {
    params: BTreeSet<String>,
}

impl Parser {
    pub fn new() -> Self {
        Self::default()
    }

    /// Declare a parameter identifier.
    pub fn param(mut self, name: &str) -> Self {
        self.params.insert(name.to_string());
        self
    }

    pub fn params<'a>(mut self, names: impl IntoIterator<Item = &'a str>) -> Self {
        self.params.extend(names.into_iter().map(str::to_string));
        self
    }

    pub fn parse(&self, text: &str) -> Result<Expr, ExprError> {
        let toks = Lexer::tokens(text)?;
        let mut st = State { toks, i: 0, cfg: self };
        let e = st.expr()?;
        match st.peek() {
            (Tok::End, _) => Ok(e),
            (tok, pos) => Err(ExprError::Syntax {
                pos,
                msg: format!("unexpected {}", describe(&tok)),
            }),
        }
    }
}

/// Parse with only the builtin identifiers (`x`, `t`, `pi`, `hbar`, `m`).
pub fn parse(text: &str) -> Result<Expr, ExprError> {
    Parser::new().parse(text)
}

fn describe(tok: &Tok) -> String {
    match tok {
        Tok::Num(v) => format!("number {v}"),
        Tok::Ident(s) => format!("identifier `{s}`"),
        Tok::Op(c) => format!("operator `{c}`"),
        Tok::LParen => "`(`".into(),
        Tok::RParen => "`)`".into(),
        Tok::Comma => "`,`".into(),
        Tok::End => "end of input".into(),
    }
}

struct State<'a> {
    toks: Vec<(Tok, usize)>,
    i: usize,
    cfg: &'a Parser,
}

impl State<'_> {
    fn peek(&self) -> (Tok, usize) {
        self.toks[self.i].clone()
    }

    fn bump(&mut self) -> (Tok, usize) {
        let t = self.peek();
        if self.i + 1 < self.toks.len() {
            self.i += 1;
        }
        t
    }

    fn expect(&mut self, want: Tok) -> Result<(), ExprError> {
        let (tok, pos) = self.bump();
        if tok == want {
            Ok(())
        } else {
            Err(ExprError::Syntax {
                pos,
                msg: format!("expected {}, found {}", describe(&want), describe(&tok)),
            })
        }
    }

    fn expr(&mut self) -> Result<Expr, ExprError> {
        let mut lhs = self.term()?;
        loop {
            let op = match self.peek().0 {
                Tok::Op('+') => BinaryOp::Add,
                Tok::Op('-') => BinaryOp::Sub,
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = self.term()?;
            lhs = Expr::from_node(super::Node::Binary(op, lhs, rhs));
        }
    }

    fn term(&mut self) -> Result<Expr, ExprError> {
        let mut lhs = self.unary()?;
        loop {
            let op = match self.peek().0 {
                Tok::Op('*') => BinaryOp::Mul,
                Tok::Op('/') => BinaryOp::Div,
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = self.unary()?;
            lhs = Expr::from_node(super::Node::Binary(op, lhs, rhs));
        }
    }

    fn unary(&mut self) -> Result<Expr, ExprError> {
        match self.peek().0 {
            Tok::Op('-') => {
                self.bump();
                let inner = self.unary()?;
                Ok(Expr::from_node(super::Node::Unary(UnaryOp::Neg, inner)))
            }
            Tok::Op('+') => {
                self.bump();
                self.unary()
            }
            _ => self.power(),
        }
    }

    fn power(&mut self) -> Result<Expr, ExprError> {
        let base = self.primary()?;
        if self.peek().0 == Tok::Op('^') {
            self.bump();
            let exp = self.unary()?;
            return Ok(Expr::from_node(super::Node::Binary(BinaryOp::Pow, base, exp)));
        }
        Ok(base)
    }

    fn primary(&mut self) -> Result<Expr, ExprError> {
        let (tok, pos) = self.bump();
        let e = match tok {
            Tok::Num(v) => Expr::num(v),
            Tok::LParen => {
                let e = self.expr()?;
                self.expect(Tok::RParen)?;
                e
            }
            Tok::Ident(name) => {
                if self.peek().0 == Tok::LParen {
                    self.call(&name, pos)?
                } else {
                    self.ident(&name, pos)?
                }
            }
            other => {
                return Err(ExprError::Syntax {
                    pos,
                    msg: format!("expected a value, found {}", describe(&other)),
                })
            }
        };
        // Juxtaposition such as `2x` or `x(t)` is rejected: use `*`.
        match self.peek() {
            (Tok::Num(_) | Tok::Ident(_) | Tok::LParen, at) => Err(ExprError::Syntax {
                pos: at,
                msg: "implicit multiplication is not allowed; use `*`".into(),
            }),
            _ => Ok(e),
        }
    }

    fn ident(&self, name: &str, pos: usize) -> Result<Expr, ExprError> {
        if name == "pi" {
            return Ok(Expr::pi());
        }
        if BUILTIN_IDENTS.contains(&name) || self.cfg.params.contains(name) {
            return Ok(Expr::var(Var::param(name)));
        }
        Err(ExprError::UnknownIdentifier {
            name: name.to_string(),
            pos,
        })
    }

    fn call(&mut self, name: &str, pos: usize) -> Result<Expr, ExprError> {
        self.expect(Tok::LParen)?;
        if name == "integral" {
            let integrand = self.expr()?;
            self.expect(Tok::Comma)?;
            let (tok, vpos) = self.bump();
            let var = match tok {
                Tok::Ident(v) if v == "x" || v == "t" => Var::param(&v),
                other => {
                    return Err(ExprError::Syntax {
                        pos: vpos,
                        msg: format!("integration variable must be x or t, found {}", describe(&other)),
                    })
                }
            };
            self.expect(Tok::RParen)?;
            return Ok(Expr::from_node(super::Node::Integral { var, integrand }));
        }
        let Some(op) = UnaryOp::from_name(name) else {
            return Err(ExprError::UnknownIdentifier {
                name: name.to_string(),
                pos,
            });
        };
        let arg = self.expr()?;
        self.expect(Tok::RParen)?;
        Ok(Expr::from_node(super::Node::Unary(op, arg)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_power_over_constant() {
        let e = parse("x^2/2").unwrap();
        let want = Expr::from_node(super::super::Node::Binary(
            BinaryOp::Div,
            Expr::from_node(super::super::Node::Binary(BinaryOp::Pow, Expr::x(), Expr::num(2.0))),
            Expr::num(2.0),
        ));
        assert_eq!(e, want);
    }

    #[test]
    fn power_is_right_associative() {
        let e = parse("2^3^2").unwrap();
        assert_eq!(e.eval_xt(0.0, 0.0).unwrap(), 512.0);
        assert_eq!(parse("-2^2").unwrap().eval_xt(0.0, 0.0).unwrap(), -4.0);
        assert_eq!(parse("2^-1").unwrap().eval_xt(0.0, 0.0).unwrap(), 0.5);
    }

    #[test]
    fn airy_call_with_declared_parameter() {
        let e = Parser::new().param("beta").parse("Ai(beta*x)").unwrap();
        assert!(matches!(e.node(), super::super::Node::Unary(UnaryOp::Ai, _)));
        assert!(e.depends_on(&Var::param("beta")));
        let p = Parser::new().parse("Ai'(x)").unwrap();
        assert!(matches!(p.node(), super::super::Node::Unary(UnaryOp::AiPrime, _)));
    }

    #[test]
    fn oscillator_amplitude_parses() {
        let e = Parser::new()
            .params(["alpha", "omega", "ti"])
            .parse("sqrt(alpha/sin(omega*(t-ti)))")
            .unwrap();
        let b = crate::expr::Bindings::xt(0.0, 1.0)
            .with("alpha", 2.0)
            .with("omega", 1.0)
            .with("ti", 0.0);
        let v = e.eval(&b).unwrap();
        assert!((v - (2.0 / 1f64.sin()).sqrt()).abs() < 1e-15);
    }

    #[test]
    fn unknown_identifier_reports_position() {
        match parse("x + beta") {
            Err(ExprError::UnknownIdentifier { name, pos }) => {
                assert_eq!(name, "beta");
                assert_eq!(pos, 4);
            }
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(parse("foo(x)"), Err(ExprError::UnknownIdentifier { .. })));
    }

    #[test]
    fn syntax_errors() {
        assert!(matches!(parse("2x"), Err(ExprError::Syntax { pos: 1, .. })));
        assert!(matches!(parse("(x"), Err(ExprError::Syntax { .. })));
        assert!(matches!(parse("x +"), Err(ExprError::Syntax { .. })));
        assert!(matches!(parse("x $ 2"), Err(ExprError::Syntax { pos: 2, .. })));
        assert!(matches!(parse("x t"), Err(ExprError::Syntax { .. })));
    }

    #[test]
    fn integral_syntax() {
        let e = parse("integral(2*x, x)").unwrap();
        assert!((e.eval_xt(3.0, 0.0).unwrap() - 9.0).abs() < 1e-13);
        assert!(parse("integral(x, y)").is_err());
    }
}
