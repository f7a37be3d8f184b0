//! Concrete syntax.
//!
//! ```text
//! sum      := "0" | term { "+" term } ;
//! term     := lam | app ;
//! lam      := "\" ident { ident } "." term ;
//! app      := atom { bag } ;
//! atom     := ident | "(" term ")" ;
//! bag      := "1" | "[" [ resource { "," resource } ] "]" ;
//! resource := [ "!" ] term ;
//! ident    := letter { letter | digit | "_" } ;
//! ```
//!
//! Whitespace is insignificant and `λ` is accepted for `\`. Pure lambda
//! terms (for the embedding) use `app := atom { atom }` instead.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::sum::Sum;
use crate::syntax::{Bag, LambdaTerm, Name, Resource, Term};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SourceSpan {
    pub start: usize,
    pub end: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
#[error("parse error at {}..{}: expected {}, found {found}", span.start, span.end, expected.join(" | "))]
pub struct ParseError {
    pub span: SourceSpan,
    pub expected: Vec<String>,
    pub found: String,
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Lambda,
    Dot,
    LParen,
    RParen,
    LBrack,
    RBrack,
    Comma,
    Bang,
    Plus,
    Zero,
    One,
    Eof,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Ident(s) => write!(f, "identifier `{s}`"),
            Tok::Lambda => f.write_str("`\\`"),
            Tok::Dot => f.write_str("`.`"),
            Tok::LParen => f.write_str("`(`"),
            Tok::RParen => f.write_str("`)`"),
            Tok::LBrack => f.write_str("`[`"),
            Tok::RBrack => f.write_str("`]`"),
            Tok::Comma => f.write_str("`,`"),
            Tok::Bang => f.write_str("`!`"),
            Tok::Plus => f.write_str("`+`"),
            Tok::Zero => f.write_str("`0`"),
            Tok::One => f.write_str("`1`"),
            Tok::Eof => f.write_str("end of input"),
        }
    }
}

fn lex(text: &str) -> Result<Vec<(Tok, SourceSpan)>, ParseError> {
    let mut out = Vec::new();
    let mut it = text.char_indices().peekable();
    while let Some(&(i, c)) = it.peek() {
        let single = |t: Tok| (t, SourceSpan { start: i, end: i + c.len_utf8() });
        match c {
            c if c.is_whitespace() => {
                it.next();
            }
            '\\' | 'λ' => {
                out.push(single(Tok::Lambda));
                it.next();
            }
            '.' => {
                out.push(single(Tok::Dot));
                it.next();
            }
            '(' => {
                out.push(single(Tok::LParen));
                it.next();
            }
            ')' => {
                out.push(single(Tok::RParen));
                it.next();
            }
            '[' => {
                out.push(single(Tok::LBrack));
                it.next();
            }
            ']' => {
                out.push(single(Tok::RBrack));
                it.next();
            }
            ',' => {
                out.push(single(Tok::Comma));
                it.next();
            }
            '!' => {
                out.push(single(Tok::Bang));
                it.next();
            }
            '+' => {
                out.push(single(Tok::Plus));
                it.next();
            }
            '0' => {
                out.push(single(Tok::Zero));
                it.next();
            }
            '1' => {
                out.push(single(Tok::One));
                it.next();
            }
            c if c.is_ascii_alphabetic() => {
                let mut end = i;
                let mut s = String::new();
                while let Some(&(j, d)) = it.peek() {
                    if d.is_ascii_alphanumeric() || d == '_' {
                        s.push(d);
                        end = j + d.len_utf8();
                        it.next();
                    } else {
                        break;
                    }
                }
                out.push((Tok::Ident(s), SourceSpan { start: i, end }));
            }
            other => {
                return Err(ParseError {
                    span: SourceSpan { start: i, end: i + other.len_utf8() },
                    expected: vec!["a term".into()],
                    found: format!("`{other}`"),
                })
            }
        }
    }
    out.push((Tok::Eof, SourceSpan { start: text.len(), end: text.len() }));
    Ok(out)
}

struct Parser {
    toks: Vec<(Tok, SourceSpan)>,
    pos: usize,
}

impl Parser {
    fn new(text: &str) -> Result<Self, ParseError> {
        Ok(Parser { toks: lex(text)?, pos: 0 })
    }

    fn peek(&self) -> &Tok {
        &self.toks[self.pos].0
    }

    fn span(&self) -> SourceSpan {
        self.toks[self.pos].1
    }

    fn prev_end(&self) -> usize {
        if self.pos == 0 {
            0
        } else {
            self.toks[self.pos - 1].1.end
        }
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].0.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn error(&self, expected: &[&str]) -> ParseError {
        ParseError {
            span: self.span(),
            expected: expected.iter().map(|s| s.to_string()).collect(),
            found: self.peek().to_string(),
        }
    }

    fn expect(&mut self, tok: Tok, what: &str) -> Result<(), ParseError> {
        if *self.peek() == tok {
            self.bump();
            Ok(())
        } else {
            Err(self.error(&[what]))
        }
    }

    fn ident(&mut self) -> Result<Name, ParseError> {
        match self.peek().clone() {
            Tok::Ident(s) => {
                self.bump();
                Ok(Name::from(s))
            }
            _ => Err(self.error(&["identifier"])),
        }
    }

    fn eof(&self) -> Result<(), ParseError> {
        if *self.peek() == Tok::Eof {
            Ok(())
        } else {
            Err(self.error(&["`+`", "`[`", "`1`", "end of input"]))
        }
    }

    fn sum(&mut self) -> Result<Vec<(Term, SourceSpan)>, ParseError> {
        if *self.peek() == Tok::Zero {
            self.bump();
            self.eof()?;
            return Ok(Vec::new());
        }
        let mut out = vec![self.spanned_term()?];
        while *self.peek() == Tok::Plus {
            self.bump();
            out.push(self.spanned_term()?);
        }
        self.eof()?;
        Ok(out)
    }

    fn spanned_term(&mut self) -> Result<(Term, SourceSpan), ParseError> {
        let start = self.span().start;
        let t = self.term()?;
        Ok((t, SourceSpan { start, end: self.prev_end() }))
    }

    fn binders(&mut self) -> Result<Vec<Name>, ParseError> {
        self.expect(Tok::Lambda, "`\\`")?;
        let mut names = vec![self.ident()?];
        while let Tok::Ident(_) = self.peek() {
            names.push(self.ident()?);
        }
        self.expect(Tok::Dot, "`.`")?;
        Ok(names)
    }

    fn term(&mut self) -> Result<Term, ParseError> {
        if *self.peek() == Tok::Lambda {
            let names = self.binders()?;
            let body = self.term()?;
            return Ok(names.into_iter().rev().fold(body, |b, x| Term::Abs(x, Box::new(b))));
        }
        let mut t = self.atom()?;
        while matches!(self.peek(), Tok::One | Tok::LBrack) {
            let p = self.bag()?;
            t = Term::app(t, p);
        }
        Ok(t)
    }

    fn atom(&mut self) -> Result<Term, ParseError> {
        match self.peek() {
            Tok::Ident(_) => Ok(Term::Var(self.ident()?)),
            Tok::LParen => {
                self.bump();
                let t = self.term()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(t)
            }
            _ => Err(self.error(&["identifier", "`(`", "`\\`"])),
        }
    }

    fn bag(&mut self) -> Result<Bag, ParseError> {
        if *self.peek() == Tok::One {
            self.bump();
            return Ok(Bag::empty());
        }
        self.expect(Tok::LBrack, "`[`")?;
        let mut out = Bag::empty();
        if *self.peek() == Tok::RBrack {
            self.bump();
            return Ok(out);
        }
        loop {
            let reusable = *self.peek() == Tok::Bang;
            if reusable {
                self.bump();
            }
            let t = self.term()?;
            out.push(if reusable { Resource::Reusable(t) } else { Resource::Linear(t) });
            match self.peek() {
                Tok::Comma => {
                    self.bump();
                }
                Tok::RBrack => {
                    self.bump();
                    return Ok(out);
                }
                _ => return Err(self.error(&["`,`", "`]`", "`[`", "`1`"])),
            }
        }
    }

    fn lambda_term(&mut self) -> Result<LambdaTerm, ParseError> {
        if *self.peek() == Tok::Lambda {
            let names = self.binders()?;
            let body = self.lambda_term()?;
            return Ok(names.into_iter().rev().fold(body, |b, x| LambdaTerm::Abs(x, Box::new(b))));
        }
        let mut t = self.lambda_atom()?;
        while matches!(self.peek(), Tok::Ident(_) | Tok::LParen | Tok::Lambda) {
            let a = if *self.peek() == Tok::Lambda { self.lambda_term()? } else { self.lambda_atom()? };
            t = LambdaTerm::App(Box::new(t), Box::new(a));
        }
        Ok(t)
    }

    fn lambda_atom(&mut self) -> Result<LambdaTerm, ParseError> {
        match self.peek() {
            Tok::Ident(_) => Ok(LambdaTerm::Var(self.ident()?)),
            Tok::LParen => {
                self.bump();
                let t = self.lambda_term()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(t)
            }
            _ => Err(self.error(&["identifier", "`(`", "`\\`"])),
        }
    }
}

/// Parses a sum, keeping the source span of every addend.
pub fn parse_sum_spanned(text: &str) -> Result<Vec<(Term, SourceSpan)>, ParseError> {
    Parser::new(text)?.sum()
}

pub fn parse_sum(text: &str) -> Result<Sum<Term>, ParseError> {
    Ok(parse_sum_spanned(text)?.into_iter().map(|(t, _)| t).collect())
}

/// Parses a single term (a sum with exactly one addend).
pub fn parse_term(text: &str) -> Result<Term, ParseError> {
    let mut p = Parser::new(text)?;
    let t = p.term()?;
    p.eof()?;
    Ok(t)
}

/// Parses a pure lambda term, application by juxtaposition.
pub fn parse_lambda(text: &str) -> Result<LambdaTerm, ParseError> {
    let mut p = Parser::new(text)?;
    let t = p.lambda_term()?;
    p.eof()?;
    Ok(t)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn abstraction_over_application() {
        let t = parse_term("\\x. x [!x]").unwrap();
        let expected = Term::abs("x", Term::app(Term::var("x"), Bag::reusable([Term::var("x")])));
        assert_eq!(t, expected);
        assert!(matches!(&t, Term::Abs(x, b) if x.as_str() == "x" && matches!(&**b, Term::App(..))));
    }

    #[test]
    fn sums_and_units() {
        assert_eq!(parse_sum("y [F] [I] + y [I] [F]").unwrap().len(), 2);
        assert!(parse_sum("0").unwrap().is_zero());
        let t = parse_term("(\\x.x) 1").unwrap();
        assert_eq!(t, Term::app(Term::abs("x", Term::var("x")), Bag::empty()));
        assert_eq!(parse_term("(\\x.x) []").unwrap(), t);
        assert_eq!(parse_term("λx y.y").unwrap(), parse_term("\\x.\\y.y").unwrap());
    }

    #[test]
    fn application_is_left_associative() {
        let t = parse_term("f [a] [b]").unwrap();
        let expected =
            Term::app(Term::app(Term::var("f"), Bag::linear([Term::var("a")])), Bag::linear([Term::var("b")]));
        assert_eq!(t, expected);
    }

    #[test]
    fn lambda_extends_to_the_right_inside_bags() {
        let t = parse_term("y[\\x.x[z], !w]").unwrap();
        let (_, args) = t.spine();
        assert_eq!(args[0].len(), 2);
    }

    #[test]
    fn spans_cover_addends() {
        let v = parse_sum_spanned("a + b[c]").unwrap();
        assert_eq!(v[0].1, SourceSpan { start: 0, end: 1 });
        assert_eq!(v[1].1, SourceSpan { start: 4, end: 8 });
    }

    #[test]
    fn errors_carry_span_and_expectation() {
        let e = parse_term("x [a,").unwrap_err();
        assert_eq!(e.span, SourceSpan { start: 5, end: 5 });
        assert!(e.expected.iter().any(|s| s.contains("identifier")));
        let e = parse_sum("x + ").unwrap_err();
        assert_eq!(e.found, "end of input");
        assert!(parse_term("\\.x").is_err());
        assert!(parse_term("x ]").is_err());
        assert!(parse_term("x # y").is_err());
        assert!(parse_term("0").is_err());
    }

    #[test]
    fn pure_lambda_syntax() {
        let t = parse_lambda("(\\x.x x) y").unwrap();
        let xx = LambdaTerm::app(LambdaTerm::var("x"), LambdaTerm::var("x"));
        assert_eq!(t, LambdaTerm::app(LambdaTerm::abs("x", xx), LambdaTerm::var("y")));
        assert_eq!(
            parse_lambda("f \\x.x").unwrap(),
            LambdaTerm::app(LambdaTerm::var("f"), LambdaTerm::abs("x", LambdaTerm::var("x")))
        );
    }
}
