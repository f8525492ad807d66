//! Text syntax for STL formulas.
//!
//! Grammar (precedence `!` > `&` > `|` > `U`, until is right-associative;
//! intervals are mandatory on temporal operators and given in steps):
//!
//! ```text
//! formula    := or ( "U" "[" int "," int "]" formula )?
//! or         := and ( "|" and )*
//! and        := unary ( "&" unary )*
//! unary      := "!" unary
//!             | "G" "[" int "," int "]" unary
//!             | "F" "[" int "," int "]" unary
//!             | primary
//! primary    := "true" | "false" | "(" formula ")" | comparison
//! comparison := linexpr ( ">=" | "<=" ) linexpr
//! linexpr    := term ( ("+" | "-") term )*
//! term       := factor ( "*" factor )*
//! factor     := number | identifier | "-" factor | "(" linexpr ")"
//! ```
//!
//! Linear expressions over named states fold into a single coefficient
//! vector; `a <= b` is normalized to `-a >= -b`. Products of two
//! state-dependent expressions are rejected as nonlinear.

use super::{AtomicProposition, Formula, Interval};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
#[error("parse error at position {pos}: {kind}")]
pub struct ParseError {
    /// Byte offset into the input.
    pub pos: usize,
    pub kind: ParseErrorKind,
}

#[derive(Debug, Error, PartialEq)]
pub enum ParseErrorKind {
    #[error("{0}")]
    Syntax(String),
    #[error("unknown identifier `{0}`")]
    UnknownIdentifier(String),
    #[error("nonlinear expression: product of two state-dependent terms")]
    NonlinearExpression,
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Number(f64),
    And,
    Or,
    Not,
    Plus,
    Minus,
    Star,
    Ge,
    Le,
    LParen,
    RParen,
    LBracket,
    RBracket,
    Comma,
}

impl std::fmt::Display for Tok {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Tok::Ident(s) => write!(f, "`{s}`"),
            Tok::Number(v) => write!(f, "`{v}`"),
            Tok::And => write!(f, "`&`"),
            Tok::Or => write!(f, "`|`"),
            Tok::Not => write!(f, "`!`"),
            Tok::Plus => write!(f, "`+`"),
            Tok::Minus => write!(f, "`-`"),
            Tok::Star => write!(f, "`*`"),
            Tok::Ge => write!(f, "`>=`"),
            Tok::Le => write!(f, "`<=`"),
            Tok::LParen => write!(f, "`(`"),
            Tok::RParen => write!(f, "`)`"),
            Tok::LBracket => write!(f, "`[`"),
            Tok::RBracket => write!(f, "`]`"),
            Tok::Comma => write!(f, "`,`"),
        }
    }
}

fn tokenize(text: &str) -> Result<Vec<(usize, Tok)>, ParseError> {
    let bytes = text.as_bytes();
    let mut toks = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        match c {
            ' ' | '\t' | '\r' | '\n' => i += 1,
            '&' => {
                toks.push((i, Tok::And));
                i += 1;
            }
            '|' => {
                toks.push((i, Tok::Or));
                i += 1;
            }
            '!' => {
                toks.push((i, Tok::Not));
                i += 1;
            }
            '+' => {
                toks.push((i, Tok::Plus));
                i += 1;
            }
            '-' => {
                toks.push((i, Tok::Minus));
                i += 1;
            }
            '*' => {
                toks.push((i, Tok::Star));
                i += 1;
            }
            '(' => {
                toks.push((i, Tok::LParen));
                i += 1;
            }
            ')' => {
                toks.push((i, Tok::RParen));
                i += 1;
            }
            '[' => {
                toks.push((i, Tok::LBracket));
                i += 1;
            }
            ']' => {
                toks.push((i, Tok::RBracket));
                i += 1;
            }
            ',' => {
                toks.push((i, Tok::Comma));
                i += 1;
            }
            '>' | '<' => {
                if i + 1 < bytes.len() && bytes[i + 1] as char == '=' {
                    toks.push((i, if c == '>' { Tok::Ge } else { Tok::Le }));
                    i += 2;
                } else {
                    return Err(ParseError {
                        pos: i,
                        kind: ParseErrorKind::Syntax(format!(
                            "strict comparison `{c}` is not supported, use `{c}=`"
                        )),
                    });
                }
            }
            '0'..='9' | '.' => {
                let start = i;
                while i < bytes.len() && (bytes[i].is_ascii_digit() || bytes[i] == b'.') {
                    i += 1;
                }
                if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
                    let mut j = i + 1;
                    if j < bytes.len() && (bytes[j] == b'+' || bytes[j] == b'-') {
                        j += 1;
                    }
                    if j < bytes.len() && bytes[j].is_ascii_digit() {
                        i = j;
                        while i < bytes.len() && bytes[i].is_ascii_digit() {
                            i += 1;
                        }
                    }
                }
                let lit = &text[start..i];
                let value: f64 = lit.parse().map_err(|_| ParseError {
                    pos: start,
                    kind: ParseErrorKind::Syntax(format!("malformed number `{lit}`")),
                })?;
                toks.push((start, Tok::Number(value)));
            }
            _ if c.is_ascii_alphabetic() || c == '_' => {
                let start = i;
                while i < bytes.len()
                    && ((bytes[i] as char).is_ascii_alphanumeric() || bytes[i] == b'_')
                {
                    i += 1;
                }
                toks.push((start, Tok::Ident(text[start..i].to_string())));
            }
            _ => {
                return Err(ParseError {
                    pos: i,
                    kind: ParseErrorKind::Syntax(format!("unexpected character `{c}`")),
                });
            }
        }
    }
    Ok(toks)
}

/// A partially evaluated linear expression over the named states.
#[derive(Debug, Clone)]
struct LinExpr {
    coeffs: Vec<f64>,
    constant: f64,
}

impl LinExpr {
    fn constant(dim: usize, value: f64) -> Self {
        Self {
            coeffs: vec![0.0; dim],
            constant: value,
        }
    }

    fn variable(dim: usize, index: usize) -> Self {
        let mut coeffs = vec![0.0; dim];
        coeffs[index] = 1.0;
        Self {
            coeffs,
            constant: 0.0,
        }
    }

    fn is_constant(&self) -> bool {
        self.coeffs.iter().all(|c| *c == 0.0)
    }

    fn add(mut self, other: &LinExpr, sign: f64) -> Self {
        for (a, b) in self.coeffs.iter_mut().zip(&other.coeffs) {
            *a += sign * b;
        }
        self.constant += sign * other.constant;
        self
    }

    fn scale(mut self, k: f64) -> Self {
        for a in &mut self.coeffs {
            *a *= k;
        }
        self.constant *= k;
        self
    }
}

struct Parser<'a> {
    toks: Vec<(usize, Tok)>,
    pos: usize,
    names: &'a [String],
    end: usize,
}

impl<'a> Parser<'a> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(_, t)| t)
    }

    fn peek2(&self) -> Option<&Tok> {
        self.toks.get(self.pos + 1).map(|(_, t)| t)
    }

    fn here(&self) -> usize {
        self.toks.get(self.pos).map(|(p, _)| *p).unwrap_or(self.end)
    }

    fn bump(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.pos).map(|(_, t)| t.clone());
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    fn syntax<T>(&self, msg: impl Into<String>) -> Result<T, ParseError> {
        Err(ParseError {
            pos: self.here(),
            kind: ParseErrorKind::Syntax(msg.into()),
        })
    }

    fn expect(&mut self, tok: Tok) -> Result<(), ParseError> {
        match self.peek() {
            Some(t) if *t == tok => {
                self.pos += 1;
                Ok(())
            }
            Some(t) => {
                let found = t.to_string();
                self.syntax(format!("expected {tok}, found {found}"))
            }
            None => self.syntax(format!("expected {tok}, found end of input")),
        }
    }

    fn parse_formula(&mut self) -> Result<Formula, ParseError> {
        let lhs = self.parse_or()?;
        if self.at_temporal("U") {
            self.pos += 1;
            let interval = self.parse_interval()?;
            let rhs = self.parse_formula()?;
            return Ok(Formula::until(interval, lhs, rhs));
        }
        Ok(lhs)
    }

    fn parse_or(&mut self) -> Result<Formula, ParseError> {
        let mut children = vec![self.parse_and()?];
        while self.peek() == Some(&Tok::Or) {
            self.pos += 1;
            children.push(self.parse_and()?);
        }
        Ok(if children.len() == 1 {
            children.pop().unwrap()
        } else {
            Formula::Or(children)
        })
    }

    fn parse_and(&mut self) -> Result<Formula, ParseError> {
        let mut children = vec![self.parse_unary()?];
        while self.peek() == Some(&Tok::And) {
            self.pos += 1;
            children.push(self.parse_unary()?);
        }
        Ok(if children.len() == 1 {
            children.pop().unwrap()
        } else {
            Formula::And(children)
        })
    }

    /// True when the next tokens are `op [`, e.g. `G[...`.
    fn at_temporal(&self, op: &str) -> bool {
        matches!(self.peek(), Some(Tok::Ident(s)) if s == op)
            && self.peek2() == Some(&Tok::LBracket)
    }

    fn parse_unary(&mut self) -> Result<Formula, ParseError> {
        if self.peek() == Some(&Tok::Not) {
            self.pos += 1;
            return Ok(Formula::not(self.parse_unary()?));
        }
        if self.at_temporal("G") {
            self.pos += 1;
            let interval = self.parse_interval()?;
            return Ok(Formula::always(interval, self.parse_unary()?));
        }
        if self.at_temporal("F") {
            self.pos += 1;
            let interval = self.parse_interval()?;
            return Ok(Formula::eventually(interval, self.parse_unary()?));
        }
        self.parse_primary()
    }

    fn parse_primary(&mut self) -> Result<Formula, ParseError> {
        match self.peek() {
            Some(Tok::Ident(s)) if s == "true" => {
                self.pos += 1;
                Ok(Formula::Atom(AtomicProposition::always_true(
                    self.names.len(),
                )))
            }
            Some(Tok::Ident(s)) if s == "false" => {
                self.pos += 1;
                Ok(Formula::atom(vec![0.0; self.names.len()], 1.0))
            }
            Some(Tok::LParen) => {
                // `(` may open a parenthesized formula or a parenthesized
                // arithmetic expression; try the comparison reading first
                // and fall back on syntax failure.
                let save = self.pos;
                match self.parse_comparison() {
                    Ok(f) => Ok(f),
                    Err(ParseError {
                        kind: ParseErrorKind::Syntax(_),
                        ..
                    }) => {
                        self.pos = save;
                        self.pos += 1;
                        let inner = self.parse_formula()?;
                        self.expect(Tok::RParen)?;
                        Ok(inner)
                    }
                    Err(other) => Err(other),
                }
            }
            _ => self.parse_comparison(),
        }
    }

    fn parse_comparison(&mut self) -> Result<Formula, ParseError> {
        let lhs = self.parse_linexpr()?;
        let op = match self.peek() {
            Some(Tok::Ge) => true,
            Some(Tok::Le) => false,
            _ => return self.syntax("expected `>=` or `<=`"),
        };
        self.pos += 1;
        let rhs = self.parse_linexpr()?;
        // lhs >= rhs  ⇒  (lhs - rhs)·x >= rhs_const - lhs_const
        // lhs <= rhs  ⇒  (rhs - lhs)·x >= lhs_const - rhs_const
        let (diff, threshold) = if op {
            let d = lhs.clone().add(&rhs, -1.0);
            (d.coeffs, rhs.constant - lhs.constant)
        } else {
            let d = rhs.clone().add(&lhs, -1.0);
            (d.coeffs, lhs.constant - rhs.constant)
        };
        Ok(Formula::atom(diff, threshold))
    }

    fn parse_linexpr(&mut self) -> Result<LinExpr, ParseError> {
        let mut acc = if self.peek() == Some(&Tok::Minus) {
            self.pos += 1;
            self.parse_term()?.scale(-1.0)
        } else {
            self.parse_term()?
        };
        loop {
            match self.peek() {
                Some(Tok::Plus) => {
                    self.pos += 1;
                    let t = self.parse_term()?;
                    acc = acc.add(&t, 1.0);
                }
                Some(Tok::Minus) => {
                    self.pos += 1;
                    let t = self.parse_term()?;
                    acc = acc.add(&t, -1.0);
                }
                _ => break,
            }
        }
        Ok(acc)
    }

    fn parse_term(&mut self) -> Result<LinExpr, ParseError> {
        let mut acc = self.parse_factor()?;
        while self.peek() == Some(&Tok::Star) {
            let star_pos = self.here();
            self.pos += 1;
            let rhs = self.parse_factor()?;
            acc = if rhs.is_constant() {
                acc.scale(rhs.constant)
            } else if acc.is_constant() {
                rhs.scale(acc.constant)
            } else {
                return Err(ParseError {
                    pos: star_pos,
                    kind: ParseErrorKind::NonlinearExpression,
                });
            };
        }
        Ok(acc)
    }

    fn parse_factor(&mut self) -> Result<LinExpr, ParseError> {
        let pos = self.here();
        match self.bump() {
            Some(Tok::Number(v)) => Ok(LinExpr::constant(self.names.len(), v)),
            Some(Tok::Ident(name)) => match self.names.iter().position(|n| *n == name) {
                Some(idx) => Ok(LinExpr::variable(self.names.len(), idx)),
                None => Err(ParseError {
                    pos,
                    kind: ParseErrorKind::UnknownIdentifier(name),
                }),
            },
            Some(Tok::Minus) => Ok(self.parse_factor()?.scale(-1.0)),
            Some(Tok::LParen) => {
                let inner = self.parse_linexpr()?;
                self.expect(Tok::RParen)?;
                Ok(inner)
            }
            Some(t) => {
                let found = t.to_string();
                self.pos -= 1;
                self.syntax(format!("expected a number, state name or `(`, found {found}"))
            }
            None => self.syntax("expected a number, state name or `(`, found end of input"),
        }
    }

    fn parse_interval(&mut self) -> Result<Interval, ParseError> {
        self.expect(Tok::LBracket)?;
        let lo = self.parse_step()?;
        self.expect(Tok::Comma)?;
        let hi = self.parse_step()?;
        self.expect(Tok::RBracket)?;
        Interval::new(lo, hi).map_err(|e| ParseError {
            pos: self.here(),
            kind: ParseErrorKind::Syntax(e.to_string()),
        })
    }

    fn parse_step(&mut self) -> Result<usize, ParseError> {
        let pos = self.here();
        match self.bump() {
            Some(Tok::Number(v)) if v >= 0.0 && v.fract() == 0.0 && v <= u32::MAX as f64 => {
                Ok(v as usize)
            }
            Some(t) => Err(ParseError {
                pos,
                kind: ParseErrorKind::Syntax(format!(
                    "interval bounds must be nonnegative integer steps, found {t}"
                )),
            }),
            None => Err(ParseError {
                pos,
                kind: ParseErrorKind::Syntax(
                    "interval bounds must be nonnegative integer steps, found end of input"
                        .to_string(),
                ),
            }),
        }
    }
}

/// Parses a formula; identifiers resolve to indices into `state_names`.
pub fn parse_formula(text: &str, state_names: &[String]) -> Result<Formula, ParseError> {
    let toks = tokenize(text)?;
    let mut p = Parser {
        toks,
        pos: 0,
        names: state_names,
        end: text.len(),
    };
    let f = p.parse_formula()?;
    if p.pos != p.toks.len() {
        let found = p.peek().unwrap().to_string();
        return p.syntax(format!("unexpected trailing input starting with {found}"));
    }
    Ok(f)
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum PrintError {
    #[error("formula references state index {index} but only {names} names were given")]
    NameCount { index: usize, names: usize },
    #[error("unbounded until has no concrete syntax")]
    UnboundedUntil,
}

/// Renders a formula in the concrete grammar; `parse_formula` of the output
/// yields a structurally equal tree.
pub fn print_formula(phi: &Formula, state_names: &[String]) -> Result<String, PrintError> {
    let mut out = String::new();
    write_level(phi, state_names, 0, &mut out)?;
    Ok(out)
}

// Precedence levels: Until = 0, Or = 1, And = 2, unary = 3, primary = 4.
fn level_of(phi: &Formula) -> u8 {
    match phi {
        Formula::Until(..) | Formula::UnboundedUntil(..) => 0,
        Formula::Or(_) => 1,
        Formula::And(_) => 2,
        Formula::Not(_) | Formula::Always(..) | Formula::Eventually(..) => 3,
        Formula::Atom(_) => 4,
    }
}

fn write_level(
    phi: &Formula,
    names: &[String],
    min_level: u8,
    out: &mut String,
) -> Result<(), PrintError> {
    let needs_parens = level_of(phi) < min_level;
    if needs_parens {
        out.push('(');
    }
    match phi {
        Formula::Atom(a) => write_atom(a, names, out)?,
        Formula::Not(p) => {
            out.push('!');
            write_level(p, names, 3, out)?;
        }
        Formula::And(cs) => {
            for (i, c) in cs.iter().enumerate() {
                if i > 0 {
                    out.push_str(" & ");
                }
                write_level(c, names, 3, out)?;
            }
        }
        Formula::Or(cs) => {
            for (i, c) in cs.iter().enumerate() {
                if i > 0 {
                    out.push_str(" | ");
                }
                write_level(c, names, 2, out)?;
            }
        }
        Formula::Until(i, a, b) => {
            write_level(a, names, 1, out)?;
            out.push_str(&format!(" U{i} "));
            write_level(b, names, 0, out)?;
        }
        Formula::Always(i, p) => {
            out.push_str(&format!("G{i}"));
            write_level(p, names, 4, out)?;
        }
        Formula::Eventually(i, p) => {
            out.push_str(&format!("F{i}"));
            write_level(p, names, 4, out)?;
        }
        Formula::UnboundedUntil(_, _) => return Err(PrintError::UnboundedUntil),
    }
    if needs_parens {
        out.push(')');
    }
    Ok(())
}

fn write_atom(a: &AtomicProposition, names: &[String], out: &mut String) -> Result<(), PrintError> {
    if a.coefficients.len() > names.len() {
        return Err(PrintError::NameCount {
            index: names.len(),
            names: names.len(),
        });
    }
    let mut wrote = false;
    for (i, &c) in a.coefficients.iter().enumerate() {
        if c == 0.0 {
            continue;
        }
        if !wrote {
            if c == 1.0 {
                out.push_str(&names[i]);
            } else if c == -1.0 {
                out.push('-');
                out.push_str(&names[i]);
            } else {
                out.push_str(&format!("{c}*{}", names[i]));
            }
        } else if c > 0.0 {
            if c == 1.0 {
                out.push_str(&format!(" + {}", names[i]));
            } else {
                out.push_str(&format!(" + {c}*{}", names[i]));
            }
        } else if c == -1.0 {
            out.push_str(&format!(" - {}", names[i]));
        } else {
            out.push_str(&format!(" - {}*{}", -c, names[i]));
        }
        wrote = true;
    }
    if !wrote {
        out.push('0');
    }
    out.push_str(&format!(" >= {}", a.constant));
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn names(ns: &[&str]) -> Vec<String> {
        ns.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn single_atom_normalization() {
        let f = parse_formula("y >= -1", &names(&["y"])).unwrap();
        assert_eq!(f, Formula::atom(vec![1.0], -1.0));
    }

    #[test]
    fn le_normalizes_to_ge() {
        let f = parse_formula("y <= 1", &names(&["y"])).unwrap();
        assert_eq!(f, Formula::atom(vec![-1.0], -1.0));
    }

    #[test]
    fn always_of_band() {
        let f = parse_formula("G[0,2](y >= -1 & y <= 1)", &names(&["y"])).unwrap();
        let expected = Formula::always(
            Interval::new(0, 2).unwrap(),
            Formula::and(vec![
                Formula::atom(vec![1.0], -1.0),
                Formula::atom(vec![-1.0], -1.0),
            ])
            .unwrap(),
        );
        assert_eq!(f, expected);
    }

    #[test]
    fn nonlinear_rejected() {
        let err = parse_formula("y * y >= 1", &names(&["y"])).unwrap_err();
        assert_eq!(err.kind, ParseErrorKind::NonlinearExpression);
    }

    #[test]
    fn unknown_identifier() {
        let err = parse_formula("z >= 0", &names(&["y"])).unwrap_err();
        assert_eq!(
            err.kind,
            ParseErrorKind::UnknownIdentifier("z".to_string())
        );
        assert_eq!(err.pos, 0);
    }

    #[test]
    fn linear_folding() {
        let f = parse_formula("2*x - 3*y + 1 >= y - 2", &names(&["x", "y"])).unwrap();
        // 2x - 3y + 1 >= y - 2  ⇒  2x - 4y >= -3
        assert_eq!(f, Formula::atom(vec![2.0, -4.0], -3.0));
    }

    #[test]
    fn parenthesized_arithmetic_vs_formula() {
        let f = parse_formula("(y + 1) >= 0", &names(&["y"])).unwrap();
        assert_eq!(f, Formula::atom(vec![1.0], -1.0));
        let g = parse_formula("(y >= 0)", &names(&["y"])).unwrap();
        assert_eq!(g, Formula::atom(vec![1.0], 0.0));
        let h = parse_formula("((y >= 0) & true)", &names(&["y"])).unwrap();
        assert!(matches!(h, Formula::And(_)));
    }

    #[test]
    fn until_is_right_associative_and_loosest() {
        let f = parse_formula("x >= 0 U[0,2] y >= 0 U[1,3] x >= 1", &names(&["x", "y"])).unwrap();
        match f {
            Formula::Until(i, _, rhs) => {
                assert_eq!((i.lo(), i.hi()), (0, 2));
                assert!(matches!(*rhs, Formula::Until(..)));
            }
            other => panic!("expected until, got {other:?}"),
        }
    }

    #[test]
    fn precedence_not_and_or() {
        let f = parse_formula("!x >= 0 & y >= 0 | true", &names(&["x", "y"])).unwrap();
        // ((!x>=0) & (y>=0)) | true
        match f {
            Formula::Or(cs) => {
                assert_eq!(cs.len(), 2);
                assert!(matches!(cs[0], Formula::And(_)));
            }
            other => panic!("expected or, got {other:?}"),
        }
    }

    #[test]
    fn chain_flattening() {
        let f = parse_formula("x >= 0 & y >= 0 & x >= 1", &names(&["x", "y"])).unwrap();
        match f {
            Formula::And(cs) => assert_eq!(cs.len(), 3),
            other => panic!("expected and, got {other:?}"),
        }
    }

    #[test]
    fn syntax_error_has_position() {
        let err = parse_formula("G[0,2(y >= 0)", &names(&["y"])).unwrap_err();
        assert!(matches!(err.kind, ParseErrorKind::Syntax(_)));
        assert_eq!(err.pos, 5);
    }

    #[test]
    fn interval_bounds_must_be_integer_steps() {
        let err = parse_formula("G[0,1.5] y >= 0", &names(&["y"])).unwrap_err();
        assert!(matches!(err.kind, ParseErrorKind::Syntax(_)));
    }

    #[test]
    fn print_round_trip_examples() {
        let ns = names(&["x", "y"]);
        for text in [
            "y >= -1",
            "G[0,2](y >= -1 & y <= 1)",
            "x >= 0 U[0,5] (y >= 1 | !x >= 2)",
            "F[1,4]G[0,2](2*x - 4*y >= -3)",
            "true U[0,3] false",
            "(x >= 0 U[0,2] y >= 0) U[0,2] x >= 1",
        ] {
            let f = parse_formula(text, &ns).unwrap();
            let printed = print_formula(&f, &ns).unwrap();
            let g = parse_formula(&printed, &ns).unwrap();
            assert_eq!(f, g, "round-trip failed for `{text}` -> `{printed}`");
        }
    }
}
