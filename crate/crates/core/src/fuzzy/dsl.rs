//! Parser for the rule-base text format.
//!
//! ```text
//! # comments run to end of line
//! system "control" version "1.0"
//!
//! const half = 63.5                      # named numbers usable in expressions
//!
//! input average_velocity [0, 127] {
//!     Low:       tri(0, 0, 25.4)
//!     "Mid-Low": tri(0, 25.4, 50.8)
//! }
//! input slope [-inf, inf] {
//!     Increasing: trap(1, 10, inf, inf)
//! }
//! output pattern [0, 14] {
//!     "Chorus 1": singleton(8)
//! }
//!
//! rule "label": IF x IS Low AND NOT (y IS High OR y IS "Mid-Low")
//!               THEN out IS Middle AND other IS Up
//! IF x IS NOT Low THEN out IS Low          # unlabeled; `IS NOT` negates the atom
//! ```
//!
//! Keywords are case-insensitive. Names containing spaces or hyphens are
//! written as double-quoted strings. Numeric parameters are expressions over
//! `+ - * /`, parentheses, `inf`, constants declared with `const`, and any
//! bindings supplied by the caller (the bar length `T`, for instance).
//! Precedence in formulas is `NOT` over `AND` over `OR`. Variables must be
//! declared before the rules that use them.

use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

use super::antecedent::Antecedent;
use super::error::FuzzyError;
use super::membership::MembershipFunction;
use super::rule::{Consequent, Rule, RuleBase};
use super::variable::{LinguisticVariable, Term, Universe};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Location {
    pub line: usize,
    pub column: usize,
}

impl fmt::Display for Location {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.column)
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
#[error("{location}: {message}")]
pub struct ParseError {
    pub location: Location,
    pub message: String,
}

impl ParseError {
    fn new(location: Location, message: impl Into<String>) -> Self {
        Self {
            location,
            message: message.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Str(String),
    Num(f64),
    Punct(char),
    Eof,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Ident(s) => write!(f, "`{s}`"),
            Tok::Str(s) => write!(f, "\"{s}\""),
            Tok::Num(n) => write!(f, "{n}"),
            Tok::Punct(c) => write!(f, "`{c}`"),
            Tok::Eof => write!(f, "end of file"),
        }
    }
}

fn lex(src: &str) -> Result<Vec<(Tok, Location)>, ParseError> {
    let mut out = Vec::new();
    let mut chars = src.chars().peekable();
    let (mut line, mut col) = (1usize, 1usize);

    macro_rules! bump {
        () => {{
            let c = chars.next();
            if c == Some('\n') {
                line += 1;
                col = 1;
            } else if c.is_some() {
                col += 1;
            }
            c
        }};
    }

    while let Some(&c) = chars.peek() {
        let loc = Location { line, column: col };
        if c.is_whitespace() {
            bump!();
        } else if c == '#' {
            while let Some(&c) = chars.peek() {
                if c == '\n' {
                    break;
                }
                bump!();
            }
        } else if c == '"' {
            bump!();
            let mut s = String::new();
            loop {
                match bump!() {
                    Some('"') => break,
                    Some('\n') | None => return Err(ParseError::new(loc, "unterminated string")),
                    Some(c) => s.push(c),
                }
            }
            out.push((Tok::Str(s), loc));
        } else if c.is_ascii_digit() || c == '.' {
            let mut s = String::new();
            while let Some(&c) = chars.peek() {
                let exp_sign = (c == '-' || c == '+') && s.ends_with(['e', 'E']);
                if c.is_ascii_digit() || c == '.' || c == 'e' || c == 'E' || exp_sign {
                    s.push(c);
                    bump!();
                } else {
                    break;
                }
            }
            let n: f64 = s
                .parse()
                .map_err(|_| ParseError::new(loc, format!("invalid number `{s}`")))?;
            out.push((Tok::Num(n), loc));
        } else if c.is_alphabetic() || c == '_' {
            let mut s = String::new();
            while let Some(&c) = chars.peek() {
                if c.is_alphanumeric() || c == '_' {
                    s.push(c);
                    bump!();
                } else {
                    break;
                }
            }
            out.push((Tok::Ident(s), loc));
        } else if "[]{}(),:=+-*/".contains(c) {
            bump!();
            out.push((Tok::Punct(c), loc));
        } else {
            return Err(ParseError::new(loc, format!("unexpected character `{c}`")));
        }
    }
    out.push((Tok::Eof, Location { line, column: col }));
    Ok(out)
}

/// Parsed rule-base file before validation, keeping source locations.
struct Parser {
    toks: Vec<(Tok, Location)>,
    pos: usize,
    consts: BTreeMap<String, f64>,
    inputs: Vec<LinguisticVariable>,
    outputs: Vec<LinguisticVariable>,
    rules: Vec<Rule>,
    name: String,
    version: String,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].0
    }

    fn loc(&self) -> Location {
        self.toks[self.pos].1
    }

    fn next(&mut self) -> (Tok, Location) {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn err<T>(&self, message: impl Into<String>) -> Result<T, ParseError> {
        Err(ParseError::new(self.loc(), message))
    }

    fn is_kw(&self, kw: &str) -> bool {
        matches!(self.peek(), Tok::Ident(s) if s.eq_ignore_ascii_case(kw))
    }

    fn eat_kw(&mut self, kw: &str) -> bool {
        if self.is_kw(kw) {
            self.next();
            true
        } else {
            false
        }
    }

    fn expect_kw(&mut self, kw: &str) -> Result<(), ParseError> {
        if self.eat_kw(kw) {
            Ok(())
        } else {
            self.err(format!("expected `{kw}`, found {}", self.peek()))
        }
    }

    fn eat_punct(&mut self, p: char) -> bool {
        if self.peek() == &Tok::Punct(p) {
            self.next();
            true
        } else {
            false
        }
    }

    fn expect_punct(&mut self, p: char) -> Result<(), ParseError> {
        if self.eat_punct(p) {
            Ok(())
        } else {
            self.err(format!("expected `{p}`, found {}", self.peek()))
        }
    }

    fn ident(&mut self) -> Result<(String, Location), ParseError> {
        match self.next() {
            (Tok::Ident(s), loc) => Ok((s, loc)),
            (t, loc) => Err(ParseError::new(loc, format!("expected a name, found {t}"))),
        }
    }

    /// Identifier or quoted string.
    fn name(&mut self) -> Result<(String, Location), ParseError> {
        match self.next() {
            (Tok::Ident(s), loc) | (Tok::Str(s), loc) => Ok((s, loc)),
            (t, loc) => Err(ParseError::new(loc, format!("expected a name, found {t}"))),
        }
    }

    fn string(&mut self) -> Result<String, ParseError> {
        match self.next() {
            (Tok::Str(s), _) => Ok(s),
            (t, loc) => Err(ParseError::new(loc, format!("expected a quoted string, found {t}"))),
        }
    }

    fn file(&mut self) -> Result<(), ParseError> {
        loop {
            if self.peek() == &Tok::Eof {
                return Ok(());
            }
            if self.eat_kw("system") {
                self.name = self.name()?.0;
                if self.eat_kw("version") {
                    self.version = self.name()?.0;
                }
            } else if self.eat_kw("const") {
                let (name, _) = self.ident()?;
                self.expect_punct('=')?;
                let v = self.expr()?;
                self.consts.insert(name, v);
            } else if self.is_kw("input") || self.is_kw("output") {
                let is_input = self.is_kw("input");
                self.next();
                let var = self.variable()?;
                if is_input {
                    self.inputs.push(var);
                } else {
                    self.outputs.push(var);
                }
            } else if self.is_kw("rule") || self.is_kw("if") {
                let rule = self.rule()?;
                self.rules.push(rule);
            } else {
                return self.err(format!(
                    "expected `system`, `const`, `input`, `output`, `rule` or `IF`, found {}",
                    self.peek()
                ));
            }
        }
    }

    fn variable(&mut self) -> Result<LinguisticVariable, ParseError> {
        let (name, loc) = self.ident()?;
        if self.lookup(&name).is_some() {
            return Err(ParseError::new(loc, format!("variable `{name}` declared twice")));
        }
        self.expect_punct('[')?;
        let uloc = self.loc();
        let lo = self.expr()?;
        self.expect_punct(',')?;
        let hi = self.expr()?;
        self.expect_punct(']')?;
        let universe = Universe::new(lo, hi).map_err(|e| ParseError::new(uloc, e.to_string()))?;

        self.expect_punct('{')?;
        let mut terms = Vec::new();
        while !self.eat_punct('}') {
            let (tname, tloc) = self.name()?;
            self.expect_punct(':')?;
            let (shape, sloc) = self.ident()?;
            self.expect_punct('(')?;
            let mut params = vec![self.expr()?];
            while self.eat_punct(',') {
                params.push(self.expr()?);
            }
            self.expect_punct(')')?;
            let mf = match (shape.to_ascii_lowercase().as_str(), params.as_slice()) {
                ("tri", &[a, b, c]) => MembershipFunction::triangular(a, b, c),
                ("trap", &[a, b, c, d]) => MembershipFunction::trapezoid(a, b, c, d),
                ("singleton", &[v]) => MembershipFunction::singleton(v),
                ("tri" | "trap" | "singleton", _) => {
                    return Err(ParseError::new(
                        sloc,
                        format!("wrong number of parameters for `{shape}`: {}", params.len()),
                    ))
                }
                _ => return Err(ParseError::new(sloc, format!("unknown shape `{shape}`"))),
            }
            .map_err(|e| ParseError::new(tloc, format!("term `{tname}`: {e}")))?;
            terms.push(Term::new(tname, mf));
        }
        LinguisticVariable::new(name, universe, terms).map_err(|e| ParseError::new(loc, e.to_string()))
    }

    fn lookup(&self, name: &str) -> Option<&LinguisticVariable> {
        self.inputs
            .iter()
            .chain(self.outputs.iter())
            .find(|v| v.name() == name)
    }

    fn rule(&mut self) -> Result<Rule, ParseError> {
        let start = self.loc();
        let label = if self.eat_kw("rule") {
            let l = if matches!(self.peek(), Tok::Str(_)) {
                Some(self.string()?)
            } else {
                None
            };
            self.expect_punct(':')?;
            l
        } else {
            None
        };
        let label = label.unwrap_or_else(|| format!("line {}", start.line));
        self.expect_kw("if")?;
        let antecedent = self.or_formula()?;
        self.expect_kw("then")?;
        let mut consequents = vec![self.consequent()?];
        while self.eat_kw("and") {
            consequents.push(self.consequent()?);
        }
        Ok(Rule::new(label, antecedent, consequents))
    }

    fn or_formula(&mut self) -> Result<Antecedent, ParseError> {
        let mut parts = vec![self.and_formula()?];
        while self.eat_kw("or") {
            parts.push(self.and_formula()?);
        }
        Ok(if parts.len() == 1 {
            parts.pop().unwrap()
        } else {
            Antecedent::Or(parts)
        })
    }

    fn and_formula(&mut self) -> Result<Antecedent, ParseError> {
        let mut parts = vec![self.unary_formula()?];
        while self.eat_kw("and") {
            parts.push(self.unary_formula()?);
        }
        Ok(if parts.len() == 1 {
            parts.pop().unwrap()
        } else {
            Antecedent::And(parts)
        })
    }

    fn unary_formula(&mut self) -> Result<Antecedent, ParseError> {
        if self.eat_kw("not") {
            return Ok(Antecedent::not(self.unary_formula()?));
        }
        if self.eat_punct('(') {
            let f = self.or_formula()?;
            self.expect_punct(')')?;
            return Ok(f);
        }
        let (var, vloc) = self.ident()?;
        self.expect_kw("is")?;
        let negated = self.eat_kw("not");
        let (term, tloc) = self.name()?;
        self.check_term(&var, vloc, &term, tloc)?;
        let atom = Antecedent::atom(var, term);
        Ok(if negated { Antecedent::not(atom) } else { atom })
    }

    fn consequent(&mut self) -> Result<Consequent, ParseError> {
        let (var, vloc) = self.ident()?;
        self.expect_kw("is")?;
        let (term, tloc) = self.name()?;
        if !self.outputs.iter().any(|v| v.name() == var) {
            let msg = if self.lookup(&var).is_some() {
                format!("`{var}` is not an output variable")
            } else {
                format!("unknown variable `{var}`")
            };
            return Err(ParseError::new(vloc, msg));
        }
        self.check_term(&var, vloc, &term, tloc)?;
        Ok(Consequent::new(var, term))
    }

    fn check_term(&self, var: &str, vloc: Location, term: &str, tloc: Location) -> Result<(), ParseError> {
        let v = self
            .lookup(var)
            .ok_or_else(|| ParseError::new(vloc, format!("unknown variable `{var}`")))?;
        if v.term(term).is_none() {
            return Err(ParseError::new(
                tloc,
                format!("unknown term `{term}` for variable `{var}`"),
            ));
        }
        Ok(())
    }

    fn expr(&mut self) -> Result<f64, ParseError> {
        let mut acc = self.product()?;
        loop {
            if self.eat_punct('+') {
                acc += self.product()?;
            } else if self.eat_punct('-') {
                acc -= self.product()?;
            } else {
                return Ok(acc);
            }
        }
    }

    fn product(&mut self) -> Result<f64, ParseError> {
        let mut acc = self.factor()?;
        loop {
            if self.eat_punct('*') {
                acc *= self.factor()?;
            } else if self.eat_punct('/') {
                acc /= self.factor()?;
            } else {
                return Ok(acc);
            }
        }
    }

    fn factor(&mut self) -> Result<f64, ParseError> {
        if self.eat_punct('-') {
            return Ok(-self.factor()?);
        }
        if self.eat_punct('(') {
            let v = self.expr()?;
            self.expect_punct(')')?;
            return Ok(v);
        }
        match self.next() {
            (Tok::Num(n), _) => Ok(n),
            (Tok::Ident(s), _) if s.eq_ignore_ascii_case("inf") => Ok(f64::INFINITY),
            (Tok::Ident(s), loc) => self
                .consts
                .get(&s)
                .copied()
                .ok_or_else(|| ParseError::new(loc, format!("unknown constant `{s}`"))),
            (t, loc) => Err(ParseError::new(loc, format!("expected a number, found {t}"))),
        }
    }
}

/// Parses a rule base. `bindings` are extra named constants visible to
/// parameter expressions.
pub fn parse_rule_base(src: &str, bindings: &[(&str, f64)]) -> Result<RuleBase, ParseError> {
    let toks = lex(src)?;
    let mut p = Parser {
        toks,
        pos: 0,
        consts: bindings.iter().map(|(k, v)| (k.to_string(), *v)).collect(),
        inputs: Vec::new(),
        outputs: Vec::new(),
        rules: Vec::new(),
        name: String::from("unnamed"),
        version: String::from("0"),
    };
    p.file()?;
    let end = p.loc();
    RuleBase::new(p.name, p.version, p.inputs, p.outputs, p.rules)
        .map_err(|e: FuzzyError| ParseError::new(end, e.to_string()))
}
