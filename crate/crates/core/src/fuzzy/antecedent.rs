//! Rule conditions as propositional formulas over `variable IS term` atoms.
//!
//! Connectives are the Gödel/Mamdani ones: `AND` is min, `OR` is max and
//! `NOT` is the standard complement `1 - x`.

use std::collections::BTreeMap;
use std::fmt;

use super::error::{FuzzyError, Result};
use super::variable::LinguisticVariable;

#[derive(Debug, Clone, PartialEq)]
pub enum Antecedent {
    Atom { variable: String, term: String },
    And(Vec<Antecedent>),
    Or(Vec<Antecedent>),
    Not(Box<Antecedent>),
}

impl Antecedent {
    pub fn atom(variable: impl Into<String>, term: impl Into<String>) -> Self {
        Self::Atom {
            variable: variable.into(),
            term: term.into(),
        }
    }

    pub fn and(children: Vec<Antecedent>) -> Self {
        Self::And(children)
    }

    pub fn or(children: Vec<Antecedent>) -> Self {
        Self::Or(children)
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(child: Antecedent) -> Self {
        Self::Not(Box::new(child))
    }

    /// Degree of truth of the formula under `input`.
    pub fn eval(&self, input: &FuzzifiedInput) -> Result<f64> {
        match self {
            Self::Atom { variable, term } => {
                input
                    .degree(variable, term)
                    .ok_or_else(|| FuzzyError::MissingAtom {
                        variable: variable.clone(),
                        term: term.clone(),
                    })
            }
            Self::And(children) => {
                if children.is_empty() {
                    return Err(FuzzyError::EmptyConnective("AND"));
                }
                let mut acc = 1.0f64;
                for c in children {
                    acc = acc.min(c.eval(input)?);
                }
                Ok(acc)
            }
            Self::Or(children) => {
                if children.is_empty() {
                    return Err(FuzzyError::EmptyConnective("OR"));
                }
                let mut acc = 0.0f64;
                for c in children {
                    acc = acc.max(c.eval(input)?);
                }
                Ok(acc)
            }
            Self::Not(child) => Ok(1.0 - child.eval(input)?),
        }
    }

    /// Visits every atom as `(variable, term)`.
    pub fn atoms(&self) -> Vec<(&str, &str)> {
        let mut out = Vec::new();
        self.collect_atoms(&mut out);
        out
    }

    fn collect_atoms<'a>(&'a self, out: &mut Vec<(&'a str, &'a str)>) {
        match self {
            Self::Atom { variable, term } => out.push((variable, term)),
            Self::And(cs) | Self::Or(cs) => cs.iter().for_each(|c| c.collect_atoms(out)),
            Self::Not(c) => c.collect_atoms(out),
        }
    }

    pub fn depth(&self) -> usize {
        match self {
            Self::Atom { .. } => 1,
            Self::And(cs) | Self::Or(cs) => 1 + cs.iter().map(Self::depth).max().unwrap_or(0),
            Self::Not(c) => 1 + c.depth(),
        }
    }
}

/// Renders in the rule-file syntax, fully parenthesised.
impl fmt::Display for Antecedent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Atom { variable, term } => write!(f, "{variable} IS \"{term}\""),
            Self::And(cs) | Self::Or(cs) => {
                let op = if matches!(self, Self::And(_)) { " AND " } else { " OR " };
                write!(f, "(")?;
                for (i, c) in cs.iter().enumerate() {
                    if i > 0 {
                        f.write_str(op)?;
                    }
                    write!(f, "{c}")?;
                }
                write!(f, ")")
            }
            Self::Not(c) => write!(f, "NOT {c}"),
        }
    }
}

/// Membership degrees for each `(variable, term)` pair that has been
/// fuzzified.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct FuzzifiedInput {
    vars: BTreeMap<String, Vec<(String, f64)>>,
}

impl FuzzifiedInput {
    pub fn new() -> Self {
        Self::default()
    }

    /// Fuzzifies `x` against every term of `var`.
    pub fn insert(&mut self, var: &LinguisticVariable, x: f64) {
        self.vars.insert(var.name().to_string(), var.fuzzify(x));
    }

    /// Inserts precomputed degrees; each is clamped into `[0, 1]`.
    pub fn insert_degrees(&mut self, variable: impl Into<String>, degrees: Vec<(String, f64)>) {
        let degrees = degrees
            .into_iter()
            .map(|(t, d)| (t, if d.is_nan() { 0.0 } else { d.clamp(0.0, 1.0) }))
            .collect();
        self.vars.insert(variable.into(), degrees);
    }

    pub fn degree(&self, variable: &str, term: &str) -> Option<f64> {
        self.vars
            .get(variable)?
            .iter()
            .find(|(t, _)| t == term)
            .map(|(_, d)| *d)
    }

    pub fn contains_variable(&self, variable: &str) -> bool {
        self.vars.contains_key(variable)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &str, f64)> {
        self.vars
            .iter()
            .flat_map(|(v, ts)| ts.iter().map(move |(t, d)| (v.as_str(), t.as_str(), *d)))
    }
}
