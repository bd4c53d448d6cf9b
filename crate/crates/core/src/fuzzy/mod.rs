//! Mamdani fuzzy inference: membership functions, linguistic variables,
//! propositional rule antecedents, inference and defuzzification, and the
//! rule-file parser.

pub mod antecedent;
pub mod dsl;
pub mod error;
pub mod inference;
pub mod membership;
pub mod rule;
pub mod variable;

pub use antecedent::{Antecedent, FuzzifiedInput};
pub use dsl::{parse_rule_base, Location, ParseError};
pub use error::FuzzyError;
pub use inference::{
    defuzzify_categorical, defuzzify_coa, fuzzify, infer, run_fis, run_fis_with_hold, Aggregate,
    CategoryActivation, ClippedSet, CrispInputs, FisResult, Firing, Inference, OutputSet, OutputValue,
};
pub use membership::MembershipFunction;
pub use rule::{Consequent, OutputKind, OutputVariable, Rule, RuleBase, DEFAULT_RESOLUTION};
pub use variable::{LinguisticVariable, Term, Universe};
