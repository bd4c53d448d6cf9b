use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FuzzyError {
    #[error("invalid {shape} parameters {params:?}: {reason}")]
    InvalidParameters {
        shape: &'static str,
        params: Vec<f64>,
        reason: &'static str,
    },

    #[error("invalid universe [{lo}, {hi}]")]
    InvalidUniverse { lo: f64, hi: f64 },

    #[error("variable `{0}` has no terms")]
    NoTerms(String),

    #[error("duplicate term `{term}` in variable `{variable}`")]
    DuplicateTerm { variable: String, term: String },

    #[error("duplicate variable `{0}`")]
    DuplicateVariable(String),

    #[error("term `{term}` of `{variable}` has parameter {value} outside universe [{lo}, {hi}]")]
    ParameterOutsideUniverse {
        variable: String,
        term: String,
        value: f64,
        lo: f64,
        hi: f64,
    },

    #[error("unknown variable `{0}`")]
    UnknownVariable(String),

    #[error("unknown term `{term}` for variable `{variable}`")]
    UnknownTerm { variable: String, term: String },

    #[error("`{0}` is not an output variable")]
    NotAnOutput(String),

    #[error("output variable `{0}` mixes singleton and non-singleton terms")]
    MixedOutputKinds(String),

    #[error("rule `{0}` has no consequents")]
    EmptyConsequents(String),

    #[error("empty {0} connective")]
    EmptyConnective(&'static str),

    #[error("output variables depend on each other in a cycle involving `{0}`")]
    FeedbackCycle(String),

    #[error("missing crisp input for `{0}`")]
    MissingInput(String),

    #[error("antecedent atom `{variable} IS {term}` has no fuzzified degree")]
    MissingAtom { variable: String, term: String },

    #[error("no rule fired for `{0}`")]
    NoRuleFired(String),

    #[error("resolution must be positive")]
    ZeroResolution,
}

pub type Result<T, E = FuzzyError> = std::result::Result<T, E>;
