//! Recursive-descent parser for the expression DSL.
//!
//! ```text
//! expr   := term (('+' | '-') term)*
//! term   := unary (('*' | '/') unary)*
//! unary  := '-' unary | power
//! power  := atom ('^' unary)?
//! atom   := number | ident | ident '(' expr (',' expr)* ')' | '(' expr ')'
//! number := digits ['.' digits] [('e'|'E') ['+'|'-'] digits]
//! ```
//!
//! Plain decimals are exact rationals; a literal with an exponent part is a
//! binary float. See `docs/grammar.md` for the function list.

use std::collections::BTreeMap;

use super::{Expr, ExprError, Func, MlParams, Number, PSI};

/// Named constants substituted at parse time.
pub type Constants = BTreeMap<String, Expr>;

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(Number),
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
            let t = lx.next()?;
            let done = t.0 == Tok::End;
            out.push(t);
            if done {
                return Ok(out);
            }
        }
    }

    fn next(&mut self) -> Result<(Tok, usize), ExprError> {
        let bytes = self.src.as_bytes();
        while self.pos < bytes.len() && bytes[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
        let start = self.pos;
        let Some(&c) = bytes.get(self.pos) else {
            return Ok((Tok::End, start));
        };
        if c.is_ascii_digit() || c == b'.' {
            return self.number(start);
        }
        if c.is_ascii_alphabetic() || c == b'_' {
            while self.pos < bytes.len()
                && (bytes[self.pos].is_ascii_alphanumeric() || bytes[self.pos] == b'_')
            {
                self.pos += 1;
            }
            return Ok((Tok::Ident(self.src[start..self.pos].to_string()), start));
        }
        self.pos += 1;
        let tok = match c {
            b'+' | b'-' | b'*' | b'/' | b'^' => Tok::Op(c as char),
            b'(' => Tok::LParen,
            b')' => Tok::RParen,
            b',' => Tok::Comma,
            _ => {
                let ch = self.src[start..].chars().next().unwrap_or('?');
                return Err(ExprError::Syntax {
                    offset: start,
                    message: format!("unexpected character `{ch}`"),
                });
            }
        };
        Ok((tok, start))
    }

    fn number(&mut self, start: usize) -> Result<(Tok, usize), ExprError> {
        let bytes = self.src.as_bytes();
        let digits = |pos: &mut usize| {
            while *pos < bytes.len() && bytes[*pos].is_ascii_digit() {
                *pos += 1;
            }
        };
        digits(&mut self.pos);
        if self.pos < bytes.len() && bytes[self.pos] == b'.' {
            self.pos += 1;
            digits(&mut self.pos);
        }
        let mantissa_end = self.pos;
        let mut is_float = false;
        if self.pos < bytes.len() && (bytes[self.pos] == b'e' || bytes[self.pos] == b'E') {
            let mut p = self.pos + 1;
            if p < bytes.len() && (bytes[p] == b'+' || bytes[p] == b'-') {
                p += 1;
            }
            if p < bytes.len() && bytes[p].is_ascii_digit() {
                self.pos = p;
                digits(&mut self.pos);
                is_float = true;
            }
        }
        let text = &self.src[start..self.pos];
        let bad = || ExprError::Syntax {
            offset: start,
            message: format!("malformed number `{text}`"),
        };
        let n = if is_float {
            let v: f64 = text.parse().map_err(|_| bad())?;
            if !v.is_finite() {
                return Err(bad());
            }
            Number::float(v)
        } else {
            Number::parse_decimal(&self.src[start..mantissa_end]).ok_or_else(bad)?
        };
        Ok((Tok::Num(n), start))
    }
}

struct Parser<'a> {
    toks: Vec<(Tok, usize)>,
    pos: usize,
    consts: &'a Constants,
}

/// Parses `text` into a normalised expression.
pub fn parse(text: &str) -> Result<Expr, ExprError> {
    parse_with(text, &Constants::new())
}

/// Parses `text`, replacing identifiers found in `consts` by their values.
pub fn parse_with(text: &str, consts: &Constants) -> Result<Expr, ExprError> {
    let toks = Lexer::tokens(text)?;
    let mut p = Parser {
        toks,
        pos: 0,
        consts,
    };
    let e = p.expr()?;
    match p.peek() {
        Tok::End => Ok(e),
        t => Err(p.error(format!("unexpected {}", describe(t)))),
    }
}

fn describe(t: &Tok) -> String {
    match t {
        Tok::Num(n) => format!("number `{n}`"),
        Tok::Ident(s) => format!("identifier `{s}`"),
        Tok::Op(c) => format!("`{c}`"),
        Tok::LParen => "`(`".into(),
        Tok::RParen => "`)`".into(),
        Tok::Comma => "`,`".into(),
        Tok::End => "end of input".into(),
    }
}

impl Parser<'_> {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].0
    }

    fn offset(&self) -> usize {
        self.toks[self.pos].1
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].0.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn error(&self, message: String) -> ExprError {
        ExprError::Syntax {
            offset: self.offset(),
            message,
        }
    }

    fn expect(&mut self, want: Tok) -> Result<(), ExprError> {
        if *self.peek() == want {
            self.bump();
            Ok(())
        } else {
            Err(self.error(format!(
                "expected {}, found {}",
                describe(&want),
                describe(self.peek())
            )))
        }
    }

    fn expr(&mut self) -> Result<Expr, ExprError> {
        let mut acc = vec![self.term()?];
        loop {
            match self.peek() {
                Tok::Op('+') => {
                    self.bump();
                    acc.push(self.term()?);
                }
                Tok::Op('-') => {
                    self.bump();
                    acc.push(Expr::neg(&self.term()?));
                }
                _ => return Ok(Expr::add(acc)),
            }
        }
    }

    fn term(&mut self) -> Result<Expr, ExprError> {
        let mut acc = self.unary()?;
        loop {
            match self.peek() {
                Tok::Op('*') => {
                    self.bump();
                    acc = &acc * &self.unary()?;
                }
                Tok::Op('/') => {
                    self.bump();
                    acc = &acc / &self.unary()?;
                }
                _ => return Ok(acc),
            }
        }
    }

    fn unary(&mut self) -> Result<Expr, ExprError> {
        if *self.peek() == Tok::Op('-') {
            self.bump();
            return Ok(Expr::neg(&self.unary()?));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr, ExprError> {
        let base = self.atom()?;
        if *self.peek() == Tok::Op('^') {
            self.bump();
            let exponent = self.unary()?;
            return Ok(Expr::pow(&base, &exponent));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Expr, ExprError> {
        let at = self.offset();
        match self.bump() {
            Tok::Num(n) => Ok(Expr::constant(n)),
            Tok::LParen => {
                let e = self.expr()?;
                self.expect(Tok::RParen)?;
                Ok(e)
            }
            Tok::Ident(name) => {
                if name.starts_with("__") {
                    return Err(ExprError::Syntax {
                        offset: at,
                        message: format!("identifier `{name}` is reserved"),
                    });
                }
                if *self.peek() == Tok::LParen {
                    self.bump();
                    let mut args = vec![self.expr()?];
                    while *self.peek() == Tok::Comma {
                        self.bump();
                        args.push(self.expr()?);
                    }
                    self.expect(Tok::RParen)?;
                    return call(&name, args, at);
                }
                if let Some(v) = self.consts.get(&name) {
                    return Ok(v.clone());
                }
                Ok(Expr::var(&name))
            }
            t => Err(ExprError::Syntax {
                offset: at,
                message: format!("unexpected {}", describe(&t)),
            }),
        }
    }
}

fn arity(name: &str, args: &[Expr], allowed: &[usize], at: usize) -> Result<(), ExprError> {
    if allowed.contains(&args.len()) {
        Ok(())
    } else {
        Err(ExprError::Syntax {
            offset: at,
            message: format!("`{name}` takes {allowed:?} arguments, got {}", args.len()),
        })
    }
}

fn const_arg(name: &str, e: &Expr, at: usize) -> Result<Number, ExprError> {
    e.as_number().cloned().ok_or_else(|| ExprError::Syntax {
        offset: at,
        message: format!("`{name}` expects a constant parameter, got `{e}`"),
    })
}

fn order_arg(name: &str, e: &Expr, at: usize) -> Result<u32, ExprError> {
    const_arg(name, e, at)?
        .as_i64()
        .and_then(|k| u32::try_from(k).ok())
        .ok_or_else(|| ExprError::Syntax {
            offset: at,
            message: format!("`{name}` order must be a non-negative integer"),
        })
}

fn call(name: &str, mut args: Vec<Expr>, at: usize) -> Result<Expr, ExprError> {
    let unary = |f: Func, args: Vec<Expr>| -> Result<Expr, ExprError> {
        arity(name, &args, &[1], at)?;
        Ok(Expr::func(f, args.into_iter().next().unwrap()))
    };
    match name {
        "exp" => unary(Func::Exp, args),
        "ln" | "log" => unary(Func::Ln, args),
        "sin" => unary(Func::Sin, args),
        "cos" => unary(Func::Cos, args),
        "step" => unary(Func::Step, args),
        "sqrt" => {
            arity(name, &args, &[1], at)?;
            Ok(Expr::sqrt(&args[0]))
        }
        "max" => {
            arity(name, &args, &[2], at)?;
            match (args[0].is_zero(), args[1].is_zero()) {
                (_, true) => Ok(Expr::ramp(args.swap_remove(0))),
                (true, false) => Ok(Expr::ramp(args.swap_remove(1))),
                _ => Err(ExprError::Syntax {
                    offset: at,
                    message: "only max(u, 0) is supported".into(),
                }),
            }
        }
        "Dx" | "Dy" | "Dz" => {
            arity(name, &args, &[1, 2], at)?;
            let order = if args.len() == 2 {
                order_arg(name, &args[1], at)?
            } else {
                1
            };
            Ok(Expr::deriv(&name[1..], order, args.swap_remove(0)))
        }
        "D" => {
            arity(name, &args, &[2, 3], at)?;
            let var = match args[1].node() {
                super::Node::Var(v) if &**v != PSI => v.to_string(),
                _ => {
                    return Err(ExprError::Syntax {
                        offset: at,
                        message: "`D` expects a variable name as second argument".into(),
                    })
                }
            };
            let order = if args.len() == 3 {
                order_arg(name, &args[2], at)?
            } else {
                1
            };
            Ok(Expr::deriv(&var, order, args.swap_remove(0)))
        }
        "ml" => {
            arity(name, &args, &[3, 4], at)?;
            let alpha = const_arg(name, &args[0], at)?;
            let beta = const_arg(name, &args[1], at)?;
            let gamma = if args.len() == 4 {
                const_arg(name, &args[2], at)?
            } else {
                Number::one()
            };
            let arg = args.pop().unwrap();
            if !(alpha.to_f64() > 0.0
                && alpha.to_f64() <= 1.0
                && beta.to_f64() > 0.0
                && gamma.to_f64() > 0.0)
            {
                return Err(ExprError::Syntax {
                    offset: at,
                    message: "`ml` needs 0 < alpha <= 1, beta > 0, gamma > 0".into(),
                });
            }
            Ok(Expr::mittag_leffler(MlParams { alpha, beta, gamma }, arg))
        }
        _ => Err(ExprError::UnknownFunction {
            name: name.to_string(),
            offset: at,
        }),
    }
}
