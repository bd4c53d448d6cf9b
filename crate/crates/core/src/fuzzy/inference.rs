//! Mamdani inference: min-implication, max-aggregation, then center of area
//! for continuous outputs or argmax for categorical ones.

use std::collections::BTreeMap;

use super::antecedent::FuzzifiedInput;
use super::error::{FuzzyError, Result};
use super::membership::MembershipFunction;
use super::rule::{OutputKind, RuleBase};
use super::variable::{LinguisticVariable, Universe};

pub type CrispInputs = BTreeMap<String, f64>;

/// Degree of `x` for every term of `var`; `x` is clamped into the universe.
pub fn fuzzify(var: &LinguisticVariable, x: f64) -> Vec<(String, f64)> {
    var.fuzzify(x)
}

/// A membership function cut off at `height`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClippedSet {
    pub mf: MembershipFunction,
    pub height: f64,
}

/// Pointwise maximum of clipped sets.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Aggregate {
    sets: Vec<ClippedSet>,
}

impl Aggregate {
    /// Sets with zero height are dropped.
    pub fn new(sets: impl IntoIterator<Item = ClippedSet>) -> Self {
        Self {
            sets: sets.into_iter().filter(|s| s.height > 0.0).collect(),
        }
    }

    pub fn sets(&self) -> &[ClippedSet] {
        &self.sets
    }

    /// True when no rule contributed any mass.
    pub fn is_empty(&self) -> bool {
        self.sets.is_empty()
    }

    pub fn degree(&self, x: f64) -> f64 {
        self.sets
            .iter()
            .fold(0.0f64, |acc, s| acc.max(s.height.min(s.mf.degree(x))))
    }

    /// The same aggregate reflected about `m`.
    pub fn mirrored(&self, m: f64) -> Self {
        Self {
            sets: self
                .sets
                .iter()
                .map(|s| ClippedSet {
                    mf: s.mf.mirrored(m),
                    height: s.height,
                })
                .collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CategoryActivation {
    pub term: String,
    /// Position of the singleton on the universe.
    pub value: f64,
    pub degree: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum OutputSet {
    Continuous(Aggregate),
    Categorical(Vec<CategoryActivation>),
}

impl OutputSet {
    pub fn is_empty(&self) -> bool {
        match self {
            Self::Continuous(agg) => agg.is_empty(),
            Self::Categorical(acts) => acts.iter().all(|a| a.degree <= 0.0),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Firing {
    pub label: String,
    pub strength: f64,
}

/// Result of [`infer`]: one fuzzy output per output variable plus the firing
/// strength of every rule that fired.
#[derive(Debug, Clone, PartialEq)]
pub struct Inference {
    pub outputs: Vec<(String, OutputSet)>,
    pub firings: Vec<Firing>,
}

impl Inference {
    pub fn get(&self, name: &str) -> Option<&OutputSet> {
        self.outputs.iter().find(|(n, _)| n == name).map(|(_, s)| s)
    }
}

/// Runs every rule against `input`. Atoms on output variables must be
/// present in `input` like any other atom; use [`run_fis`] to have them
/// computed in dependency order instead.
pub fn infer(rb: &RuleBase, input: &FuzzifiedInput) -> Result<Inference> {
    let all: Vec<usize> = (0..rb.outputs().len()).collect();
    let mut strengths = vec![None; rb.rules().len()];
    let mut firings = Vec::new();
    let outputs = infer_outputs(rb, &all, input, &mut strengths, &mut firings)?;
    Ok(Inference { outputs, firings })
}

fn infer_outputs(
    rb: &RuleBase,
    which: &[usize],
    input: &FuzzifiedInput,
    strengths: &mut [Option<f64>],
    firings: &mut Vec<Firing>,
) -> Result<Vec<(String, OutputSet)>> {
    let mut activations: Vec<Vec<f64>> = which
        .iter()
        .map(|&o| vec![0.0; rb.outputs()[o].var.terms().len()])
        .collect();

    for (ri, rule) in rb.rules().iter().enumerate() {
        let targets: Vec<(usize, usize)> = rule
            .consequents
            .iter()
            .filter_map(|c| {
                let slot = which.iter().position(|&o| rb.outputs()[o].var.name() == c.variable)?;
                let term = rb.outputs()[which[slot]].var.term_index(&c.term)?;
                Some((slot, term))
            })
            .collect();
        if targets.is_empty() {
            continue;
        }
        let strength = match strengths[ri] {
            Some(s) => s,
            None => {
                let s = rule.antecedent.eval(input)?;
                strengths[ri] = Some(s);
                if s > 0.0 {
                    firings.push(Firing {
                        label: rule.label.clone(),
                        strength: s,
                    });
                }
                s
            }
        };
        for (slot, term) in targets {
            let a = &mut activations[slot][term];
            *a = a.max(strength);
        }
    }

    Ok(which
        .iter()
        .zip(activations)
        .map(|(&o, acts)| {
            let out = &rb.outputs()[o];
            let terms = out.var.terms();
            let set = match out.kind {
                OutputKind::Continuous => OutputSet::Continuous(Aggregate::new(
                    terms
                        .iter()
                        .zip(&acts)
                        .map(|(t, &h)| ClippedSet { mf: t.mf, height: h }),
                )),
                OutputKind::Categorical => OutputSet::Categorical(
                    terms
                        .iter()
                        .zip(&acts)
                        .map(|(t, &d)| CategoryActivation {
                            term: t.name.clone(),
                            value: t.mf.peak(),
                            degree: d,
                        })
                        .collect(),
                ),
            };
            (out.var.name().to_string(), set)
        })
        .collect())
}

/// Centroid of `aggregate` over `universe` by the midpoint rule with
/// `resolution` samples. The result always lies in `[lo, hi]`.
pub fn defuzzify_coa(aggregate: &Aggregate, universe: Universe, resolution: usize) -> Result<f64> {
    if resolution == 0 {
        return Err(FuzzyError::ZeroResolution);
    }
    if aggregate.is_empty() {
        return Err(FuzzyError::NoRuleFired("aggregate".into()));
    }
    let Universe { lo, hi } = universe;
    if !(lo.is_finite() && hi.is_finite()) {
        return Err(FuzzyError::InvalidUniverse { lo, hi });
    }
    let h = (hi - lo) / resolution as f64;
    let mut num = 0.0;
    let mut den = 0.0;
    for i in 0..resolution {
        let x = lo + (i as f64 + 0.5) * h;
        let mu = aggregate.degree(x);
        num += x * mu;
        den += mu;
    }
    let centroid = if den > 0.0 {
        num / den
    } else {
        // every clipped set is narrower than one sample: weight the peaks
        let (n, d) = aggregate.sets().iter().fold((0.0, 0.0), |(n, d), s| {
            (n + universe.clamp(s.mf.peak()) * s.height, d + s.height)
        });
        n / d
    };
    Ok(centroid.clamp(lo, hi))
}

/// Term with the largest activation; ties go to the smallest singleton
/// value.
pub fn defuzzify_categorical(activations: &[CategoryActivation]) -> Result<&CategoryActivation> {
    activations
        .iter()
        .filter(|a| a.degree > 0.0)
        .min_by(|x, y| {
            y.degree
                .total_cmp(&x.degree)
                .then_with(|| x.value.total_cmp(&y.value))
        })
        .ok_or_else(|| FuzzyError::NoRuleFired("categorical".into()))
}

#[derive(Debug, Clone, PartialEq)]
pub enum OutputValue {
    Crisp(f64),
    Category { term: String, value: f64 },
    NoRuleFired,
}

impl OutputValue {
    pub fn crisp(&self) -> Option<f64> {
        match self {
            Self::Crisp(x) => Some(*x),
            Self::Category { value, .. } => Some(*value),
            Self::NoRuleFired => None,
        }
    }

    pub fn category(&self) -> Option<&str> {
        match self {
            Self::Category { term, .. } => Some(term),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FisResult {
    pub values: Vec<(String, OutputValue)>,
    pub firings: Vec<Firing>,
}

impl FisResult {
    pub fn get(&self, name: &str) -> Option<&OutputValue> {
        self.values.iter().find(|(n, _)| n == name).map(|(_, v)| v)
    }
}

/// Fuzzify, infer and defuzzify every output.
pub fn run_fis(rb: &RuleBase, inputs: &CrispInputs) -> Result<FisResult> {
    run_fis_with_hold(rb, inputs, &CrispInputs::new())
}

/// Like [`run_fis`], but when an output that other rules read fires no rule,
/// its value from `hold` (if present) is what those rules see. The reported
/// value stays [`OutputValue::NoRuleFired`].
pub fn run_fis_with_hold(rb: &RuleBase, inputs: &CrispInputs, hold: &CrispInputs) -> Result<FisResult> {
    let mut fuzzy = FuzzifiedInput::new();
    for var in rb.inputs() {
        let x = inputs
            .get(var.name())
            .ok_or_else(|| FuzzyError::MissingInput(var.name().to_string()))?;
        fuzzy.insert(var, *x);
    }

    let mut strengths = vec![None; rb.rules().len()];
    let mut firings = Vec::new();
    let mut values: Vec<Option<OutputValue>> = vec![None; rb.outputs().len()];

    for layer in rb.layers() {
        let sets = infer_outputs(rb, layer, &fuzzy, &mut strengths, &mut firings)?;
        for (&o, (_, set)) in layer.iter().zip(sets) {
            let out = &rb.outputs()[o];
            let value = match &set {
                OutputSet::Continuous(agg) if agg.is_empty() => OutputValue::NoRuleFired,
                OutputSet::Continuous(agg) => {
                    OutputValue::Crisp(defuzzify_coa(agg, out.var.defuzz_universe(), rb.resolution())?)
                }
                OutputSet::Categorical(acts) => match defuzzify_categorical(acts) {
                    Ok(best) => OutputValue::Category {
                        term: best.term.clone(),
                        value: best.value,
                    },
                    Err(_) => OutputValue::NoRuleFired,
                },
            };
            // feed the crisp result forward for rules in later layers
            match value.crisp().or_else(|| hold.get(out.var.name()).copied()) {
                Some(x) => fuzzy.insert(&out.var, x),
                None => fuzzy.insert_degrees(
                    out.var.name(),
                    out.var.terms().iter().map(|t| (t.name.clone(), 0.0)).collect(),
                ),
            }
            values[o] = Some(value);
        }
    }

    Ok(FisResult {
        values: rb
            .outputs()
            .iter()
            .zip(values)
            .map(|(o, v)| (o.var.name().to_string(), v.unwrap_or(OutputValue::NoRuleFired)))
            .collect(),
        firings,
    })
}

impl RuleBase {
    pub fn run(&self, inputs: &CrispInputs) -> Result<FisResult> {
        run_fis(self, inputs)
    }

    pub fn run_with_hold(&self, inputs: &CrispInputs, hold: &CrispInputs) -> Result<FisResult> {
        run_fis_with_hold(self, inputs, hold)
    }
}
