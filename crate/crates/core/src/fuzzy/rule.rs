use std::collections::BTreeSet;

use super::antecedent::Antecedent;
use super::error::{FuzzyError, Result};
use super::variable::LinguisticVariable;

/// Default number of samples for centroid integration.
pub const DEFAULT_RESOLUTION: usize = 1001;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Consequent {
    pub variable: String,
    pub term: String,
}

impl Consequent {
    pub fn new(variable: impl Into<String>, term: impl Into<String>) -> Self {
        Self {
            variable: variable.into(),
            term: term.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Rule {
    pub antecedent: Antecedent,
    pub consequents: Vec<Consequent>,
    /// Free-text provenance, shown in traces.
    pub label: String,
}

impl Rule {
    pub fn new(label: impl Into<String>, antecedent: Antecedent, consequents: Vec<Consequent>) -> Self {
        Self {
            antecedent,
            consequents,
            label: label.into(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputKind {
    /// Defuzzified by center of area.
    Continuous,
    /// Singleton terms; defuzzified by argmax.
    Categorical,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OutputVariable {
    pub var: LinguisticVariable,
    pub kind: OutputKind,
}

/// A validated set of input variables, output variables and rules.
///
/// Output variables may also appear in rule antecedents. Such outputs are
/// computed first and their crisp value is fuzzified for the rules that read
/// them, so evaluation proceeds in layers ordered by those dependencies.
#[derive(Debug, Clone)]
pub struct RuleBase {
    pub name: String,
    pub version: String,
    inputs: Vec<LinguisticVariable>,
    outputs: Vec<OutputVariable>,
    rules: Vec<Rule>,
    /// Output indices in evaluation order, grouped into layers.
    layers: Vec<Vec<usize>>,
    resolution: usize,
}

impl RuleBase {
    pub fn new(
        name: impl Into<String>,
        version: impl Into<String>,
        inputs: Vec<LinguisticVariable>,
        outputs: Vec<LinguisticVariable>,
        rules: Vec<Rule>,
    ) -> Result<Self> {
        let mut seen = BTreeSet::new();
        for v in inputs.iter().chain(outputs.iter()) {
            if !seen.insert(v.name().to_string()) {
                return Err(FuzzyError::DuplicateVariable(v.name().to_string()));
            }
        }

        let outputs: Vec<OutputVariable> = outputs
            .into_iter()
            .map(|var| {
                let singles = var.terms().iter().filter(|t| t.mf.is_singleton()).count();
                let kind = if singles == var.terms().len() {
                    OutputKind::Categorical
                } else if singles == 0 {
                    OutputKind::Continuous
                } else {
                    return Err(FuzzyError::MixedOutputKinds(var.name().to_string()));
                };
                Ok(OutputVariable { var, kind })
            })
            .collect::<Result<_>>()?;

        let lookup = |name: &str| -> Option<&LinguisticVariable> {
            inputs
                .iter()
                .find(|v| v.name() == name)
                .or_else(|| outputs.iter().map(|o| &o.var).find(|v| v.name() == name))
        };

        for rule in &rules {
            if rule.consequents.is_empty() {
                return Err(FuzzyError::EmptyConsequents(rule.label.clone()));
            }
            check_connectives(&rule.antecedent)?;
            for (var, term) in rule.antecedent.atoms() {
                let v = lookup(var).ok_or_else(|| FuzzyError::UnknownVariable(var.to_string()))?;
                if v.term(term).is_none() {
                    return Err(FuzzyError::UnknownTerm {
                        variable: var.to_string(),
                        term: term.to_string(),
                    });
                }
            }
            for c in &rule.consequents {
                let out = outputs
                    .iter()
                    .find(|o| o.var.name() == c.variable)
                    .ok_or_else(|| {
                        if lookup(&c.variable).is_some() {
                            FuzzyError::NotAnOutput(c.variable.clone())
                        } else {
                            FuzzyError::UnknownVariable(c.variable.clone())
                        }
                    })?;
                if out.var.term(&c.term).is_none() {
                    return Err(FuzzyError::UnknownTerm {
                        variable: c.variable.clone(),
                        term: c.term.clone(),
                    });
                }
            }
        }

        let layers = layer_outputs(&outputs, &rules)?;
        Ok(Self {
            name: name.into(),
            version: version.into(),
            inputs,
            outputs,
            rules,
            layers,
            resolution: DEFAULT_RESOLUTION,
        })
    }

    pub fn inputs(&self) -> &[LinguisticVariable] {
        &self.inputs
    }

    pub fn outputs(&self) -> &[OutputVariable] {
        &self.outputs
    }

    pub fn rules(&self) -> &[Rule] {
        &self.rules
    }

    pub fn layers(&self) -> &[Vec<usize>] {
        &self.layers
    }

    pub fn resolution(&self) -> usize {
        self.resolution
    }

    pub fn set_resolution(&mut self, resolution: usize) -> Result<()> {
        if resolution == 0 {
            return Err(FuzzyError::ZeroResolution);
        }
        self.resolution = resolution;
        Ok(())
    }

    pub fn with_resolution(mut self, resolution: usize) -> Result<Self> {
        self.set_resolution(resolution)?;
        Ok(self)
    }

    pub fn input(&self, name: &str) -> Option<&LinguisticVariable> {
        self.inputs.iter().find(|v| v.name() == name)
    }

    pub fn output(&self, name: &str) -> Option<&OutputVariable> {
        self.outputs.iter().find(|o| o.var.name() == name)
    }

    /// Any declared variable, input or output.
    pub fn variable(&self, name: &str) -> Option<&LinguisticVariable> {
        self.input(name).or_else(|| self.output(name).map(|o| &o.var))
    }

    /// Number of rules with at least one consequent on `output`.
    pub fn rule_count_for(&self, output: &str) -> usize {
        self.rules
            .iter()
            .filter(|r| r.consequents.iter().any(|c| c.variable == output))
            .count()
    }
}

fn check_connectives(f: &Antecedent) -> Result<()> {
    match f {
        Antecedent::Atom { .. } => Ok(()),
        Antecedent::And(cs) | Antecedent::Or(cs) => {
            if cs.is_empty() {
                let op = if matches!(f, Antecedent::And(_)) { "AND" } else { "OR" };
                return Err(FuzzyError::EmptyConnective(op));
            }
            cs.iter().try_for_each(check_connectives)
        }
        Antecedent::Not(c) => check_connectives(c),
    }
}

/// Orders outputs so that an output read by a rule's antecedent is computed
/// before every consequent of that rule.
fn layer_outputs(outputs: &[OutputVariable], rules: &[Rule]) -> Result<Vec<Vec<usize>>> {
    let n = outputs.len();
    let index = |name: &str| outputs.iter().position(|o| o.var.name() == name);
    // deps[i] = outputs that must be computed before output i
    let mut deps = vec![BTreeSet::new(); n];
    for rule in rules {
        let read: BTreeSet<usize> = rule
            .antecedent
            .atoms()
            .into_iter()
            .filter_map(|(v, _)| index(v))
            .collect();
        for c in &rule.consequents {
            if let Some(i) = index(&c.variable) {
                deps[i].extend(read.iter().copied());
            }
        }
    }

    let mut layer_of = vec![usize::MAX; n];
    let mut layers: Vec<Vec<usize>> = Vec::new();
    let mut placed = 0;
    while placed < n {
        let ready: Vec<usize> = (0..n)
            .filter(|&i| layer_of[i] == usize::MAX)
            .filter(|&i| deps[i].iter().all(|&d| d != i && layer_of[d] != usize::MAX))
            .collect();
        if ready.is_empty() {
            let stuck = (0..n).find(|&i| layer_of[i] == usize::MAX).unwrap_or(0);
            return Err(FuzzyError::FeedbackCycle(outputs[stuck].var.name().to_string()));
        }
        for &i in &ready {
            layer_of[i] = layers.len();
        }
        placed += ready.len();
        layers.push(ready);
    }
    Ok(layers)
}
