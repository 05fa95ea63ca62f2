//! Concrete syntax for formulas, power systems and two-counter machines.
//!
//! Formula grammar:
//!
//! ```text
//! formula := ("exists" | "forall") ident* "." formula | body
//! body    := conj ("|" conj)*
//! conj    := lit ("&" lit)*
//! lit     := "!" lit | "(" formula ")" | atom
//! atom    := term rel term | "powA" "(" term ")" | "powB" "(" term ")" | "true" | "false"
//! rel     := "<" | "<=" | "=" | "!=" | ">=" | ">"
//! term    := addend (("+" | "-") addend)*
//! addend  := integer | ident | integer "*" ident | "-" addend
//! ```
//!
//! Comparisons are stored as `t rel 0`, so `x = y + 1` prints back as
//! `x - y - 1 = 0`. Connectives with a single operand have no textual form;
//! the parser never produces them.

use std::fmt::Write as _;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use serde_json::Value;
use thiserror::Error;

use crate::ast::{Atom, BaseTag, Formula, LinearTerm, Rel, Symbols, Var};
use crate::reductions::{Instr, MinskyMachine};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SourceSpan {
    pub start: usize,
    pub end: usize,
    pub line: usize,
    pub column: usize,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("{message} at line {}, column {}", span.line, span.column)]
pub struct ParseError {
    pub message: String,
    pub span: SourceSpan,
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Int(BigInt),
    Sym(&'static str),
    End,
}

struct Lexer<'a> {
    src: &'a str,
    toks: Vec<(Tok, usize, usize)>,
}

const SYMBOLS: [&str; 15] =
    ["<=", ">=", "!=", "<", ">", "=", "!", "&", "|", "(", ")", "+", "-", "*", "."];

impl<'a> Lexer<'a> {
    fn run(src: &'a str) -> Result<Vec<(Tok, usize, usize)>, ParseError> {
        let mut lx = Lexer { src, toks: Vec::new() };
        let bytes = src.as_bytes();
        let mut i = 0;
        'outer: while i < bytes.len() {
            let c = bytes[i];
            if c.is_ascii_whitespace() {
                i += 1;
                continue;
            }
            if c.is_ascii_digit() {
                let s = i;
                while i < bytes.len() && bytes[i].is_ascii_digit() {
                    i += 1;
                }
                let n: BigInt = src[s..i].parse().expect("digits");
                lx.toks.push((Tok::Int(n), s, i));
                continue;
            }
            if c.is_ascii_alphabetic() || c == b'_' {
                let s = i;
                while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                    i += 1;
                }
                lx.toks.push((Tok::Ident(src[s..i].to_string()), s, i));
                continue;
            }
            for sym in SYMBOLS {
                if src[i..].starts_with(sym) {
                    lx.toks.push((Tok::Sym(sym), i, i + sym.len()));
                    i += sym.len();
                    continue 'outer;
                }
            }
            let ch = src[i..].chars().next().unwrap();
            return Err(lx.error(format!("unexpected character '{ch}'"), i, i + ch.len_utf8()));
        }
        lx.toks.push((Tok::End, src.len(), src.len()));
        Ok(lx.toks)
    }

    fn error(&self, message: String, start: usize, end: usize) -> ParseError {
        make_error(self.src, message, start, end)
    }
}

fn make_error(src: &str, message: String, start: usize, end: usize) -> ParseError {
    let before = &src[..start];
    let line = before.matches('\n').count() + 1;
    let column = start - before.rfind('\n').map_or(0, |p| p + 1) + 1;
    ParseError { message, span: SourceSpan { start, end, line, column } }
}

const KEYWORDS: [&str; 6] = ["exists", "forall", "powA", "powB", "true", "false"];

struct Parser<'a, 's> {
    src: &'a str,
    toks: Vec<(Tok, usize, usize)>,
    pos: usize,
    syms: &'s mut Symbols,
}

impl Parser<'_, '_> {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].0
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].0.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn err<T>(&self, msg: impl Into<String>) -> Result<T, ParseError> {
        let (_, s, e) = &self.toks[self.pos];
        Err(make_error(self.src, msg.into(), *s, *e))
    }

    fn describe(&self) -> String {
        match self.peek() {
            Tok::Ident(s) => format!("'{s}'"),
            Tok::Int(n) => format!("'{n}'"),
            Tok::Sym(s) => format!("'{s}'"),
            Tok::End => "end of input".to_string(),
        }
    }

    fn expect_sym(&mut self, sym: &'static str) -> Result<(), ParseError> {
        if *self.peek() == Tok::Sym(sym) {
            self.bump();
            Ok(())
        } else {
            self.err(format!("expected '{sym}', found {}", self.describe()))
        }
    }

    fn is_kw(&self, kw: &str) -> bool {
        matches!(self.peek(), Tok::Ident(s) if s == kw)
    }

    fn formula(&mut self) -> Result<Formula, ParseError> {
        let quant = if self.is_kw("exists") {
            Some(true)
        } else if self.is_kw("forall") {
            Some(false)
        } else {
            None
        };
        let Some(is_exists) = quant else {
            return self.body();
        };
        self.bump();
        let mut vars = Vec::new();
        while let Tok::Ident(name) = self.peek().clone() {
            if KEYWORDS.contains(&name.as_str()) {
                return self.err(format!("keyword '{name}' cannot be bound"));
            }
            self.bump();
            vars.push(self.syms.intern(&name));
        }
        self.expect_sym(".")?;
        let body = Box::new(self.formula()?);
        Ok(if is_exists { Formula::Exists(vars, body) } else { Formula::Forall(vars, body) })
    }

    fn body(&mut self) -> Result<Formula, ParseError> {
        let mut parts = vec![self.conj()?];
        while *self.peek() == Tok::Sym("|") {
            self.bump();
            parts.push(self.conj()?);
        }
        Ok(if parts.len() == 1 { parts.pop().unwrap() } else { Formula::Or(parts) })
    }

    fn conj(&mut self) -> Result<Formula, ParseError> {
        let mut parts = vec![self.lit()?];
        while *self.peek() == Tok::Sym("&") {
            self.bump();
            parts.push(self.lit()?);
        }
        Ok(if parts.len() == 1 { parts.pop().unwrap() } else { Formula::And(parts) })
    }

    fn lit(&mut self) -> Result<Formula, ParseError> {
        match self.peek() {
            Tok::Sym("!") => {
                self.bump();
                Ok(Formula::not(self.lit()?))
            }
            Tok::Sym("(") => {
                self.bump();
                let f = self.formula()?;
                self.expect_sym(")")?;
                Ok(f)
            }
            _ => self.atom(),
        }
    }

    fn atom(&mut self) -> Result<Formula, ParseError> {
        if self.is_kw("true") {
            self.bump();
            return Ok(Formula::tt());
        }
        if self.is_kw("false") {
            self.bump();
            return Ok(Formula::ff());
        }
        for (kw, tag) in [("powA", BaseTag::A), ("powB", BaseTag::B)] {
            if self.is_kw(kw) {
                self.bump();
                self.expect_sym("(")?;
                let t = self.term()?;
                self.expect_sym(")")?;
                return Ok(Formula::power(t, tag));
            }
        }
        let lhs = self.term()?;
        let rel = match self.peek() {
            Tok::Sym("<") => Rel::Lt,
            Tok::Sym("<=") => Rel::Le,
            Tok::Sym("=") => Rel::Eq,
            Tok::Sym("!=") => Rel::Ne,
            Tok::Sym(">=") => Rel::Ge,
            Tok::Sym(">") => Rel::Gt,
            _ => return self.err(format!("expected a relation, found {}", self.describe())),
        };
        self.bump();
        let rhs = self.term()?;
        Ok(Formula::rel(lhs, rel, rhs))
    }

    fn term(&mut self) -> Result<LinearTerm, ParseError> {
        let mut t = self.addend()?;
        loop {
            match self.peek() {
                Tok::Sym("+") => {
                    self.bump();
                    t = t.add(&self.addend()?);
                }
                Tok::Sym("-") => {
                    self.bump();
                    t = t.sub(&self.addend()?);
                }
                _ => return Ok(t),
            }
        }
    }

    fn addend(&mut self) -> Result<LinearTerm, ParseError> {
        match self.peek().clone() {
            Tok::Sym("-") => {
                self.bump();
                Ok(self.addend()?.neg())
            }
            Tok::Int(n) => {
                self.bump();
                if *self.peek() == Tok::Sym("*") {
                    self.bump();
                    let v = self.ident()?;
                    Ok(LinearTerm::scaled_var(n, v))
                } else {
                    Ok(LinearTerm::constant(n))
                }
            }
            Tok::Ident(_) => Ok(LinearTerm::var(self.ident()?)),
            _ => self.err(format!("expected a term, found {}", self.describe())),
        }
    }

    fn ident(&mut self) -> Result<Var, ParseError> {
        match self.peek().clone() {
            Tok::Ident(name) if !KEYWORDS.contains(&name.as_str()) => {
                self.bump();
                Ok(self.syms.intern(&name))
            }
            _ => self.err(format!("expected a variable, found {}", self.describe())),
        }
    }
}

/// A parsed formula together with the names of its variables.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Parsed {
    pub formula: Formula,
    pub symbols: Symbols,
}

pub fn parse_formula(text: &str) -> Result<Parsed, ParseError> {
    let mut symbols = Symbols::new();
    let formula = parse_formula_with(text, &mut symbols)?;
    Ok(Parsed { formula, symbols })
}

/// Parse against an existing table; known names keep their ids.
pub fn parse_formula_with(text: &str, syms: &mut Symbols) -> Result<Formula, ParseError> {
    let toks = Lexer::run(text)?;
    let mut p = Parser { src: text, toks, pos: 0, syms };
    let f = p.formula()?;
    if *p.peek() != Tok::End {
        return p.err(format!("unexpected {}", p.describe()));
    }
    Ok(f)
}

pub fn print_term(t: &LinearTerm, syms: &Symbols) -> String {
    let mut out = String::new();
    for (v, c) in t.coeffs() {
        let mag = c.abs();
        if out.is_empty() {
            if c.is_negative() {
                out.push('-');
            }
        } else {
            out.push_str(if c.is_negative() { " - " } else { " + " });
        }
        if !mag.is_one() {
            let _ = write!(out, "{mag}*");
        }
        out.push_str(syms.name(v));
    }
    let k = &t.constant;
    if out.is_empty() {
        let _ = write!(out, "{k}");
    } else if !k.is_zero() {
        let _ = write!(out, " {} {}", if k.is_negative() { "-" } else { "+" }, k.abs());
    }
    out
}

pub fn print_formula(f: &Formula, syms: &Symbols) -> String {
    let mut out = String::new();
    write_formula(f, syms, &mut out);
    out
}

fn write_formula(f: &Formula, syms: &Symbols, out: &mut String) {
    match f {
        Formula::Exists(vs, body) | Formula::Forall(vs, body) => {
            out.push_str(if matches!(f, Formula::Exists(..)) { "exists" } else { "forall" });
            for v in vs {
                out.push(' ');
                out.push_str(syms.name(*v));
            }
            out.push_str(" . ");
            write_lit_or_body(body, syms, out);
        }
        _ => write_body(f, syms, out),
    }
}

fn write_lit_or_body(f: &Formula, syms: &Symbols, out: &mut String) {
    if matches!(f, Formula::Exists(..) | Formula::Forall(..)) {
        out.push('(');
        write_formula(f, syms, out);
        out.push(')');
    } else {
        write_body(f, syms, out);
    }
}

fn write_body(f: &Formula, syms: &Symbols, out: &mut String) {
    match f {
        Formula::Or(fs) if !fs.is_empty() => {
            for (i, g) in fs.iter().enumerate() {
                if i > 0 {
                    out.push_str(" | ");
                }
                match g {
                    Formula::Or(gs) if !gs.is_empty() => write_paren(g, syms, out),
                    Formula::And(gs) if !gs.is_empty() => write_body(g, syms, out),
                    _ => write_lit(g, syms, out),
                }
            }
        }
        Formula::And(fs) if !fs.is_empty() => {
            for (i, g) in fs.iter().enumerate() {
                if i > 0 {
                    out.push_str(" & ");
                }
                write_lit(g, syms, out);
            }
        }
        _ => write_lit(f, syms, out),
    }
}

fn write_paren(f: &Formula, syms: &Symbols, out: &mut String) {
    out.push('(');
    write_formula(f, syms, out);
    out.push(')');
}

fn write_lit(f: &Formula, syms: &Symbols, out: &mut String) {
    match f {
        Formula::And(fs) if fs.is_empty() => out.push_str("true"),
        Formula::Or(fs) if fs.is_empty() => out.push_str("false"),
        Formula::Atom(Atom::Cmp(t, r)) => {
            let _ = write!(out, "{} {} 0", print_term(t, syms), r.symbol());
        }
        Formula::Atom(Atom::Power(t, g)) => {
            let _ = write!(out, "pow{g}({})", print_term(t, syms));
        }
        Formula::Not(g) => {
            out.push('!');
            write_lit(g, syms, out);
        }
        _ => write_paren(f, syms, out),
    }
}

/// Two-counter machine text: line `r` holds instruction `r`; the last line is
/// blank or `HALT`.
pub fn parse_minsky(text: &str) -> Result<MinskyMachine, ParseError> {
    let body = text.strip_suffix('\n').unwrap_or(text);
    let lines: Vec<&str> = body.split('\n').collect();
    let r = lines.len();
    let mut offset = 0;
    let mut instrs = Vec::new();
    for (i, raw) in lines.iter().enumerate() {
        let line = raw.trim_end_matches('\r');
        let words: Vec<&str> = line.split_whitespace().collect();
        let fail = |msg: String| make_error(text, msg, offset, offset + raw.len());
        if i + 1 == r {
            if !(words.is_empty() || words == ["HALT"]) {
                return Err(fail(format!("line {} must be blank or HALT", i + 1)));
            }
        } else {
            let counter = |w: &str| match w {
                "c1" => Ok(1u8),
                "c2" => Ok(2u8),
                _ => Err(fail(format!("unknown counter '{w}'"))),
            };
            let target = |w: &str| {
                w.parse::<usize>()
                    .map_err(|_| fail(format!("bad line number '{w}'")))
                    .and_then(|t| {
                        if (1..=r).contains(&t) {
                            Ok(t)
                        } else {
                            Err(fail(format!("line number {t} outside 1..{r}")))
                        }
                    })
            };
            let ins = match words.as_slice() {
                ["INC", c, "GOTO", t] => Instr::Inc { counter: counter(c)?, goto: target(t)? },
                ["TSTDEC", c, "ZERO", z, "ELSE", e] => Instr::TstDec {
                    counter: counter(c)?,
                    zero: target(z)?,
                    other: target(e)?,
                },
                _ => return Err(fail(format!("malformed instruction on line {}", i + 1))),
            };
            instrs.push(ins);
        }
        offset += raw.len() + 1;
    }
    Ok(MinskyMachine { instrs })
}

pub fn print_minsky(m: &MinskyMachine) -> String {
    let mut out = String::new();
    for ins in &m.instrs {
        match ins {
            Instr::Inc { counter, goto } => {
                let _ = writeln!(out, "INC c{counter} GOTO {goto}");
            }
            Instr::TstDec { counter, zero, other } => {
                let _ = writeln!(out, "TSTDEC c{counter} ZERO {zero} ELSE {other}");
            }
        }
    }
    out.push_str("HALT\n");
    out
}

/// Power system as read from JSON: `{"bases": ["a","b"], "A": [[..]], "b": [..],
/// "C": [[..]], "d": [..]}`. Integers may be JSON numbers or decimal strings.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SystemText {
    pub bases: Vec<BaseTag>,
    pub a: Vec<Vec<BigInt>>,
    pub b: Vec<BigInt>,
    pub c: Vec<Vec<BigInt>>,
    pub d: Vec<BigInt>,
}

#[derive(Debug, Error)]
pub enum SystemError {
    #[error("invalid JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("system: {0}")]
    Shape(String),
}

fn json_int(v: &Value) -> Result<BigInt, SystemError> {
    match v {
        Value::Number(n) => n
            .to_string()
            .parse()
            .map_err(|_| SystemError::Shape(format!("not an integer: {n}"))),
        Value::String(s) => {
            s.trim().parse().map_err(|_| SystemError::Shape(format!("not an integer: {s:?}")))
        }
        other => Err(SystemError::Shape(format!("not an integer: {other}"))),
    }
}

fn json_vec(v: Option<&Value>, what: &str) -> Result<Vec<BigInt>, SystemError> {
    match v {
        None => Ok(Vec::new()),
        Some(Value::Array(xs)) => xs.iter().map(json_int).collect(),
        Some(_) => Err(SystemError::Shape(format!("'{what}' must be an array"))),
    }
}

fn json_mat(v: Option<&Value>, what: &str, cols: usize) -> Result<Vec<Vec<BigInt>>, SystemError> {
    let rows = match v {
        None => return Ok(Vec::new()),
        Some(Value::Array(rows)) => rows,
        Some(_) => return Err(SystemError::Shape(format!("'{what}' must be an array"))),
    };
    let mut out = Vec::new();
    for row in rows {
        let r = json_vec(Some(row), what)?;
        if r.len() != cols {
            return Err(SystemError::Shape(format!(
                "row of '{what}' has {} entries, expected {cols}",
                r.len()
            )));
        }
        out.push(r);
    }
    Ok(out)
}

pub fn parse_system_json(text: &str) -> Result<SystemText, SystemError> {
    let v: Value = serde_json::from_str(text)?;
    let bases = match v.get("bases") {
        Some(Value::Array(xs)) => xs
            .iter()
            .map(|x| match x.as_str() {
                Some("a") | Some("A") => Ok(BaseTag::A),
                Some("b") | Some("B") => Ok(BaseTag::B),
                _ => Err(SystemError::Shape(format!("base must be \"a\" or \"b\", got {x}"))),
            })
            .collect::<Result<Vec<_>, _>>()?,
        _ => return Err(SystemError::Shape("missing 'bases' array".into())),
    };
    let l = bases.len();
    let a = json_mat(v.get("A"), "A", l)?;
    let b = json_vec(v.get("b"), "b")?;
    let c = json_mat(v.get("C"), "C", l)?;
    let d = json_vec(v.get("d"), "d")?;
    if a.len() != b.len() {
        return Err(SystemError::Shape("'A' and 'b' differ in length".into()));
    }
    if c.len() != d.len() {
        return Err(SystemError::Shape("'C' and 'd' differ in length".into()));
    }
    Ok(SystemText { bases, a, b, c, d })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn roundtrip(text: &str) {
        let p = parse_formula(text).unwrap();
        let printed = print_formula(&p.formula, &p.symbols);
        let mut syms = p.symbols.clone();
        let again = parse_formula_with(&printed, &mut syms).unwrap();
        assert_eq!(again, p.formula, "{text} -> {printed}");
        assert_eq!(syms, p.symbols);
    }

    #[test]
    fn parses_examples() {
        let p = parse_formula("exists x y . powA(x) & powB(y) & x = y + 1").unwrap();
        let Formula::Exists(vs, body) = &p.formula else { panic!() };
        assert_eq!(vs.len(), 2);
        let Formula::And(parts) = body.as_ref() else { panic!() };
        assert_eq!(parts.len(), 3);

        let p = parse_formula("exists x . !(powA(x))").unwrap();
        let Formula::Exists(_, body) = &p.formula else { panic!() };
        assert!(matches!(body.as_ref(), Formula::Not(inner)
            if matches!(inner.as_ref(), Formula::Atom(Atom::Power(_, BaseTag::A)))));

        let p = parse_formula("exists n . 15*a - 5*b + c = 8").unwrap();
        assert_eq!(p.formula.free_vars().len(), 3);
    }

    #[test]
    fn roundtrips() {
        roundtrip("exists x y . powA(x) & powB(y) & x = y + 1");
        roundtrip("exists x . !(powA(x))");
        roundtrip("exists n . 15*a - 5*b + c = 8");
        roundtrip("!!!(x > 0 | !(y < 3 & !z = 0))");
        roundtrip("(a = 0 | b = 0) & (c = 0 | (d = 0 | e = 0))");
        roundtrip("exists x . forall y z . (exists w . x < w) | y != -z");
        roundtrip("true & false | !true");
        roundtrip("powB(-3*x - -2 + 123456789012345678901234567890)");
    }

    #[test]
    fn empty_exists_prints_true() {
        let f = Formula::Exists(vec![], Box::new(Formula::tt()));
        assert_eq!(print_formula(&f, &Symbols::new()), "exists . true");
        assert_eq!(parse_formula("exists . true").unwrap().formula, f);
    }

    #[test]
    fn nested_negation_golden() {
        let p = parse_formula("!(!(x > 0 & y > 0) | !!z = 1)").unwrap();
        assert_eq!(
            print_formula(&p.formula, &p.symbols),
            "!(!(x > 0 & y > 0) | !!z - 1 = 0)"
        );
    }

    #[test]
    fn errors_carry_spans() {
        for bad in ["exists x . x >", "powA(x", "x = = 1", "exists . 3 * 4 = x", "x # 1", "x + y"] {
            let e = parse_formula(bad).unwrap_err();
            assert!(e.span.start <= e.span.end && e.span.end <= bad.len(), "{bad}: {e:?}");
        }
        let e = parse_formula("x >\n  ?").unwrap_err();
        assert_eq!((e.span.line, e.span.column), (2, 3));
    }

    #[test]
    fn minsky_roundtrip() {
        let text = "INC c1 GOTO 2\nTSTDEC c2 ZERO 3 ELSE 1\nHALT\n";
        let m = parse_minsky(text).unwrap();
        assert_eq!(m.instrs.len(), 2);
        assert_eq!(print_minsky(&m), text);
        assert_eq!(parse_minsky("").unwrap().instrs.len(), 0);
        assert!(parse_minsky("INC c3 GOTO 1\nHALT").is_err());
        assert!(parse_minsky("INC c1 GOTO 5\nHALT").is_err());
        assert!(parse_minsky("INC c1 GOTO 1\nINC c1 GOTO 1").is_err());
    }

    #[test]
    fn system_json() {
        let s = parse_system_json(
            r#"{"bases":["b","b","a"],"A":[],"b":[],"C":[[15,-5,1]],"d":["8"]}"#,
        )
        .unwrap();
        assert_eq!(s.bases, vec![BaseTag::B, BaseTag::B, BaseTag::A]);
        assert_eq!(s.d, vec![BigInt::from(8)]);
        assert!(parse_system_json(r#"{"bases":["a"],"C":[[1,2]],"d":[1]}"#).is_err());
    }
}
