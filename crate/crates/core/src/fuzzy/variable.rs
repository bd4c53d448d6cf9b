use super::error::{FuzzyError, Result};
use super::membership::MembershipFunction;

/// Closed interval of crisp values. Either bound may be infinite.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Universe {
    pub lo: f64,
    pub hi: f64,
}

impl Universe {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if lo.is_nan() || hi.is_nan() || lo >= hi || lo == f64::INFINITY || hi == f64::NEG_INFINITY {
            return Err(FuzzyError::InvalidUniverse { lo, hi });
        }
        Ok(Self { lo, hi })
    }

    /// Clamps into `[lo, hi]`; NaN maps to `lo`.
    pub fn clamp(&self, x: f64) -> f64 {
        if x.is_nan() {
            self.lo
        } else {
            x.clamp(self.lo, self.hi)
        }
    }

    pub fn span(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn is_finite(&self) -> bool {
        self.lo.is_finite() && self.hi.is_finite()
    }

    pub fn contains(&self, x: f64) -> bool {
        x >= self.lo && x <= self.hi
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Term {
    pub name: String,
    pub mf: MembershipFunction,
}

impl Term {
    pub fn new(name: impl Into<String>, mf: MembershipFunction) -> Self {
        Self { name: name.into(), mf }
    }
}

/// A named quantity with a universe and an ordered set of terms.
#[derive(Debug, Clone, PartialEq)]
pub struct LinguisticVariable {
    name: String,
    universe: Universe,
    terms: Vec<Term>,
}

impl LinguisticVariable {
    pub fn new(name: impl Into<String>, universe: Universe, terms: Vec<Term>) -> Result<Self> {
        let name = name.into();
        if terms.is_empty() {
            return Err(FuzzyError::NoTerms(name));
        }
        for (i, term) in terms.iter().enumerate() {
            if terms[..i].iter().any(|t| t.name == term.name) {
                return Err(FuzzyError::DuplicateTerm {
                    variable: name,
                    term: term.name.clone(),
                });
            }
            for p in term.mf.params().into_iter().filter(|p| p.is_finite()) {
                if !universe.contains(p) {
                    return Err(FuzzyError::ParameterOutsideUniverse {
                        variable: name,
                        term: term.name.clone(),
                        value: p,
                        lo: universe.lo,
                        hi: universe.hi,
                    });
                }
            }
        }
        Ok(Self {
            name,
            universe,
            terms,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn universe(&self) -> Universe {
        self.universe
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    pub fn term(&self, name: &str) -> Option<&Term> {
        self.terms.iter().find(|t| t.name == name)
    }

    pub fn term_index(&self, name: &str) -> Option<usize> {
        self.terms.iter().position(|t| t.name == name)
    }

    /// True when every term is a singleton; such variables are
    /// defuzzified by argmax rather than centroid.
    pub fn is_categorical(&self) -> bool {
        self.terms.iter().all(|t| t.mf.is_singleton())
    }

    /// Degree of `x` (clamped into the universe) for every term, in
    /// declaration order.
    pub fn fuzzify(&self, x: f64) -> Vec<(String, f64)> {
        let x = self.universe.clamp(x);
        self.terms
            .iter()
            .map(|t| (t.name.clone(), t.mf.degree(x)))
            .collect()
    }

    /// Universe used for centroid integration. Infinite bounds are cut at
    /// the outermost finite parameter plus a quarter of the finite span.
    pub fn defuzz_universe(&self) -> Universe {
        if self.universe.is_finite() {
            return self.universe;
        }
        let finite: Vec<f64> = self
            .terms
            .iter()
            .flat_map(|t| t.mf.params())
            .filter(|p| p.is_finite())
            .collect();
        let min = finite.iter().copied().fold(f64::INFINITY, f64::min);
        let max = finite.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let (min, max) = if finite.is_empty() { (0.0, 1.0) } else { (min, max) };
        let margin = 0.25 * (max - min).max(1.0);
        let lo = if self.universe.lo.is_finite() {
            self.universe.lo
        } else {
            min - margin
        };
        let hi = if self.universe.hi.is_finite() {
            self.universe.hi
        } else {
            max + margin
        };
        Universe { lo, hi }
    }
}
