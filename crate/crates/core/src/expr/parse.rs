//! Recursive-descent parser for the expression grammar.
//!
//! ```text
//! expr   := term (("+"|"-") term)*
//! term   := factor (("*"|"/") factor)*
//! factor := "-" factor | base ("^" signed_int)?
//! base   := number | "z" | "i" | "(" expr ")" | ident "(" expr ")"
//! ident  := "exp" | "sin" | "cos" | "tan"
//! ```
//!
//! `^` binds tighter than unary minus, so `-z^2` is `-(z^2)`. The tree is
//! kept exactly as written: `exp(3*z)-1` becomes `Add[Exp(Mul[3, z]), Neg(1)]`.

use num_complex::Complex64;
use thiserror::Error;

use super::{MeroExpr, Node};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParseError {
    #[error("syntax error at byte {pos}: {msg}")]
    Syntax { pos: usize, msg: String },
    #[error("unknown identifier `{name}` at byte {pos}")]
    UnknownIdentifier { pos: usize, name: String },
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64, String),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    End,
}

fn lex(text: &str) -> Result<Vec<(Tok, usize)>, ParseError> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        if c.is_ascii_whitespace() {
            i += 1;
            continue;
        }
        let start = i;
        let tok = match c {
            '+' => Tok::Plus,
            '-' => Tok::Minus,
            '*' => Tok::Star,
            '/' => Tok::Slash,
            '^' => Tok::Caret,
            '(' => Tok::LParen,
            ')' => Tok::RParen,
            _ if c.is_ascii_digit() || c == '.' => {
                while i < bytes.len() && (bytes[i].is_ascii_digit() || bytes[i] == b'.') {
                    i += 1;
                }
                // Exponent part, only when digits follow.
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
                let s = &text[start..i];
                let v: f64 = s.parse().map_err(|_| ParseError::Syntax {
                    pos: start,
                    msg: format!("malformed number `{s}`"),
                })?;
                out.push((Tok::Num(v, s.to_string()), start));
                continue;
            }
            _ if c.is_ascii_alphabetic() || c == '_' => {
                while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                    i += 1;
                }
                out.push((Tok::Ident(text[start..i].to_string()), start));
                continue;
            }
            _ => {
                return Err(ParseError::Syntax {
                    pos: start,
                    msg: format!("unexpected character `{c}`"),
                })
            }
        };
        out.push((tok, start));
        i += 1;
    }
    out.push((Tok::End, text.len()));
    Ok(out)
}

struct Parser {
    toks: Vec<(Tok, usize)>,
    at: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.at].0
    }

    fn pos(&self) -> usize {
        self.toks[self.at].1
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.at].0.clone();
        if self.at + 1 < self.toks.len() {
            self.at += 1;
        }
        t
    }

    fn err<T>(&self, msg: impl Into<String>) -> Result<T, ParseError> {
        Err(ParseError::Syntax { pos: self.pos(), msg: msg.into() })
    }

    fn expect(&mut self, want: Tok, what: &str) -> Result<(), ParseError> {
        if *self.peek() == want {
            self.bump();
            Ok(())
        } else {
            self.err(format!("expected {what}"))
        }
    }

    fn expr(&mut self) -> Result<MeroExpr, ParseError> {
        let mut terms = vec![self.term()?];
        loop {
            match self.peek() {
                Tok::Plus => {
                    self.bump();
                    terms.push(self.term()?);
                }
                Tok::Minus => {
                    self.bump();
                    let t = self.term()?;
                    terms.push(MeroExpr::from_node(Node::Neg(t)));
                }
                _ => break,
            }
        }
        Ok(if terms.len() == 1 { terms.pop().unwrap() } else { MeroExpr::from_node(Node::Add(terms)) })
    }

    fn term(&mut self) -> Result<MeroExpr, ParseError> {
        fn collapse(mut items: Vec<MeroExpr>) -> MeroExpr {
            if items.len() == 1 {
                items.pop().unwrap()
            } else {
                MeroExpr::from_node(Node::Mul(items))
            }
        }
        let mut items = vec![self.factor()?];
        loop {
            match self.peek() {
                Tok::Star => {
                    self.bump();
                    items.push(self.factor()?);
                }
                Tok::Slash => {
                    self.bump();
                    let pos = self.pos();
                    let den = self.factor()?;
                    if den.is_zero_const() {
                        return Err(ParseError::Syntax { pos, msg: "division by literal zero".into() });
                    }
                    let num = collapse(std::mem::take(&mut items));
                    items.push(MeroExpr::from_node(Node::Div(num, den)));
                }
                _ => break,
            }
        }
        Ok(collapse(items))
    }

    fn factor(&mut self) -> Result<MeroExpr, ParseError> {
        if *self.peek() == Tok::Minus {
            self.bump();
            let inner = self.factor()?;
            return Ok(MeroExpr::from_node(Node::Neg(inner)));
        }
        let base = self.base()?;
        if *self.peek() != Tok::Caret {
            return Ok(base);
        }
        self.bump();
        let pos = self.pos();
        let negative = match self.peek() {
            Tok::Minus => {
                self.bump();
                true
            }
            Tok::Plus => {
                self.bump();
                false
            }
            _ => false,
        };
        let n = match self.bump() {
            Tok::Num(_, s) if s.bytes().all(|b| b.is_ascii_digit()) => {
                s.parse::<i32>().map_err(|_| ParseError::Syntax { pos, msg: "exponent out of range".into() })?
            }
            _ => return Err(ParseError::Syntax { pos, msg: "expected integer exponent".into() }),
        };
        if n == 0 {
            return Err(ParseError::Syntax { pos, msg: "exponent must be nonzero".into() });
        }
        Ok(MeroExpr::from_node(Node::IntPow(base, if negative { -n } else { n })))
    }

    fn base(&mut self) -> Result<MeroExpr, ParseError> {
        let pos = self.pos();
        match self.bump() {
            Tok::Num(v, _) => Ok(MeroExpr::real(v)),
            Tok::LParen => {
                let e = self.expr()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(e)
            }
            Tok::Ident(name) => match name.as_str() {
                "z" => Ok(MeroExpr::z()),
                "i" => Ok(MeroExpr::constant(Complex64::i())),
                "exp" | "sin" | "cos" | "tan" => {
                    self.expect(Tok::LParen, "`(` after function name")?;
                    let arg = self.expr()?;
                    self.expect(Tok::RParen, "`)`")?;
                    if !arg.is_entire() {
                        return Err(ParseError::Syntax {
                            pos,
                            msg: format!("argument of `{name}` must be entire"),
                        });
                    }
                    Ok(match name.as_str() {
                        "exp" => MeroExpr::from_node(Node::Exp(arg)),
                        "sin" => sin_of(arg),
                        "cos" => cos_of(arg),
                        _ => tan_of(arg),
                    })
                }
                _ => Err(ParseError::UnknownIdentifier { pos, name }),
            },
            Tok::End => Err(ParseError::Syntax { pos, msg: "unexpected end of input".into() }),
            t => Err(ParseError::Syntax { pos, msg: format!("unexpected token {t:?}") }),
        }
    }
}

fn exp_i(arg: &MeroExpr, sign: f64) -> MeroExpr {
    let c = MeroExpr::constant(Complex64::new(0.0, sign));
    MeroExpr::from_node(Node::Exp(MeroExpr::from_node(Node::Mul(vec![c, arg.clone()]))))
}

fn sin_num(arg: &MeroExpr) -> MeroExpr {
    MeroExpr::from_node(Node::Add(vec![
        exp_i(arg, 1.0),
        MeroExpr::from_node(Node::Neg(exp_i(arg, -1.0))),
    ]))
}

fn cos_num(arg: &MeroExpr) -> MeroExpr {
    MeroExpr::from_node(Node::Add(vec![exp_i(arg, 1.0), exp_i(arg, -1.0)]))
}

/// `sin u = (e^{iu} - e^{-iu}) / 2i`.
pub fn sin_of(arg: MeroExpr) -> MeroExpr {
    MeroExpr::from_node(Node::Div(sin_num(&arg), MeroExpr::constant(Complex64::new(0.0, 2.0))))
}

/// `cos u = (e^{iu} + e^{-iu}) / 2`.
pub fn cos_of(arg: MeroExpr) -> MeroExpr {
    MeroExpr::from_node(Node::Div(cos_num(&arg), MeroExpr::real(2.0)))
}

/// `tan u = (e^{iu} - e^{-iu}) / (i (e^{iu} + e^{-iu}))`.
pub fn tan_of(arg: MeroExpr) -> MeroExpr {
    let den = MeroExpr::from_node(Node::Mul(vec![MeroExpr::constant(Complex64::i()), cos_num(&arg)]));
    MeroExpr::from_node(Node::Div(sin_num(&arg), den))
}

pub fn parse_expr(text: &str) -> Result<MeroExpr, ParseError> {
    let mut p = Parser { toks: lex(text)?, at: 0 };
    let e = p.expr()?;
    if *p.peek() != Tok::End {
        return p.err("unexpected trailing input");
    }
    Ok(e)
}
