//! Built-in linguistic variables with their published term parameters.
//!
//! Rule files declare their own variables; [`compare`] checks those
//! declarations against the constants here so that an edited rule file
//! cannot silently drift from the reference geometry.

use thiserror::Error;

use crate::fuzzy::{FuzzyError, LinguisticVariable, MembershipFunction, RuleBase, Term, Universe};

const INF: f64 = f64::INFINITY;

pub const LEVEL6_NAMES: [&str; 6] = ["Low", "Mid-Low", "Middle", "Mid-High", "High", "Max"];
pub const LEVEL6_APEXES: [f64; 6] = [0.0, 25.4, 50.8, 76.2, 101.6, 127.0];

pub const LEVEL4_NAMES: [&str; 4] = ["Low", "Middle", "High", "Max"];
pub const LEVEL4_APEXES: [f64; 4] = [0.0, 42.3, 84.6, 127.0];

pub const DIFFERENCE_NAMES: [&str; 9] = [
    "Neg-Max",
    "Neg-High",
    "Neg-Middle",
    "Neg-Low",
    "None",
    "Low",
    "Middle",
    "High",
    "Max",
];
pub const DIFFERENCE_APEXES: [f64; 9] = [-127.0, -95.25, -63.5, -31.75, 0.0, 31.75, 63.5, 95.25, 127.0];

pub const CHANGE_NAMES: [&str; 9] = [
    "Max-Down",
    "High-Down",
    "Middle-Down",
    "Low-Down",
    "None",
    "Low-Up",
    "Middle-Up",
    "High-Up",
    "Max-Up",
];

/// Change Velocity terms over (-0.3, 0.3), exactly as published (including
/// the slightly uneven -0.2249 / -0.149 / 0.0750 values).
pub const CHANGE_VELOCITY_PARAMS: [[f64; 3]; 9] = [
    [-0.3, -0.3, -0.2249],
    [-0.3, -0.2249, -0.149],
    [-0.2249, -0.1499, -0.0749],
    [-0.1499, -0.0749, 0.0],
    [-0.0749, 0.0, 0.0750],
    [0.0, 0.0750, 0.1500],
    [0.07500, 0.1500, 0.2250],
    [0.1500, 0.2250, 0.3],
    [0.2250, 0.3, 0.3],
];

pub const CHANGE_DENSITY_PARAMS: [[f64; 3]; 9] = [
    [-0.5, -0.5, -0.375],
    [-0.5, -0.375, -0.25],
    [-0.375, -0.25, -0.125],
    [-0.25, -0.125, 0.0],
    [-0.125, 0.0, 0.125],
    [0.0, 0.125, 0.25],
    [0.125, 0.25, 0.375],
    [0.25, 0.375, 0.5],
    [0.375, 0.5, 0.5],
];

/// Universe half-width of the slower-paced Change Velocity instance.
pub const FAST_CHANGE_HALF_WIDTH: f64 = 0.1;

/// Pattern categories with their singleton codes.
pub const PATTERNS: [(&str, f64); 15] = [
    ("Intro To Chorus 1", 0.0),
    ("Fill To Chorus 1", 1.0),
    ("Fill To Chorus 2", 2.0),
    ("Fill To Chorus 3", 3.0),
    ("Fill To Chorus 4", 4.0),
    ("Fill To Chorus 5", 5.0),
    ("Fill To Chorus 6", 6.0),
    ("Fill To Chorus 7", 7.0),
    ("Chorus 1", 8.0),
    ("Fill 1", 9.0),
    ("Outro", 10.0),
    ("None", 11.0),
    ("No change", 12.0),
    ("Fill 4", 13.0),
    ("Fill 3", 14.0),
];

pub const NO_CHANGE: &str = "No change";

pub const MUTES: [(&str, f64); 3] = [("None", 0.0), ("Kick", 1.0), ("Kick and Snare", 2.0)];

/// Bar numbers of the begin-of-bar and end-of-bar trapezoids.
pub const BAR_BEGIN_K: [u32; 4] = [8, 16, 24, 32];
pub const BAR_END_K: [u32; 4] = [4, 12, 20, 28];

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CatalogError {
    #[error("bar length {bar_seconds} s with epsilon {epsilon} s gives non-monotone bar terms; use a longer bar or a smaller epsilon ({source})")]
    BarTerms {
        bar_seconds: f64,
        epsilon: f64,
        source: FuzzyError,
    },
    #[error(transparent)]
    Fuzzy(#[from] FuzzyError),
}

fn tri(a: f64, b: f64, c: f64) -> MembershipFunction {
    MembershipFunction::triangular(a, b, c).expect("catalog triangle")
}

fn trap(a: f64, b: f64, c: f64, d: f64) -> MembershipFunction {
    MembershipFunction::trapezoid(a, b, c, d).expect("catalog trapezoid")
}

fn single(v: f64) -> MembershipFunction {
    MembershipFunction::singleton(v).expect("catalog singleton")
}

fn var(name: &str, lo: f64, hi: f64, terms: Vec<Term>) -> LinguisticVariable {
    LinguisticVariable::new(name, Universe::new(lo, hi).expect("catalog universe"), terms).expect("catalog variable")
}

/// Evenly spaced triangles with shoulder terms at both ends.
fn ladder(names: &[&str], apexes: &[f64]) -> Vec<Term> {
    let n = apexes.len();
    (0..n)
        .map(|i| {
            let a = apexes[i.saturating_sub(1)];
            let c = apexes[(i + 1).min(n - 1)];
            Term::new(names[i], tri(a, apexes[i], c))
        })
        .collect()
}

fn table(names: &[&str], params: &[[f64; 3]], scale: f64) -> Vec<Term> {
    names
        .iter()
        .zip(params)
        .map(|(n, p)| Term::new(*n, tri(p[0] * scale, p[1] * scale, p[2] * scale)))
        .collect()
}

pub fn level6(name: &str) -> LinguisticVariable {
    var(name, 0.0, 127.0, ladder(&LEVEL6_NAMES, &LEVEL6_APEXES))
}

pub fn level4(name: &str) -> LinguisticVariable {
    var(name, 0.0, 127.0, ladder(&LEVEL4_NAMES, &LEVEL4_APEXES))
}

pub fn difference(name: &str) -> LinguisticVariable {
    var(name, -127.0, 127.0, ladder(&DIFFERENCE_NAMES, &DIFFERENCE_APEXES))
}

pub fn slope(name: &str) -> LinguisticVariable {
    var(
        name,
        -INF,
        INF,
        vec![
            Term::new("Increasing", trap(1.0, 10.0, INF, INF)),
            Term::new("Decreasing", trap(-INF, -INF, -10.0, -1.0)),
        ],
    )
}

pub fn change_velocity(name: &str, half_width: f64) -> LinguisticVariable {
    let scale = half_width / 0.3;
    var(
        name,
        -half_width,
        half_width,
        table(&CHANGE_NAMES, &CHANGE_VELOCITY_PARAMS, scale),
    )
}

pub fn change_density(name: &str) -> LinguisticVariable {
    var(name, -0.5, 0.5, table(&CHANGE_NAMES, &CHANGE_DENSITY_PARAMS, 1.0))
}

pub fn sudden_shift(name: &str) -> LinguisticVariable {
    var(
        name,
        -1.0,
        1.0,
        vec![
            Term::new("Up", tri(0.0, 1.0, 1.0)),
            Term::new("None", tri(-1.0, 0.0, 1.0)),
            Term::new("Down", tri(-1.0, -1.0, 0.0)),
        ],
    )
}

pub fn hype(name: &str) -> LinguisticVariable {
    var(name, 0.0, 1.0, vec![Term::new("Coming", tri(0.0, 1.0, 1.0))])
}

fn singletons(name: &str, lo: f64, hi: f64, items: &[(&str, f64)]) -> LinguisticVariable {
    var(
        name,
        lo,
        hi,
        items.iter().map(|(n, v)| Term::new(*n, single(*v))).collect(),
    )
}

pub fn mode(name: &str) -> LinguisticVariable {
    singletons(name, 0.0, 1.0, &[("Stop", 0.0), ("Play", 1.0)])
}

pub fn pattern_output() -> LinguisticVariable {
    singletons("pattern", 0.0, 14.0, &PATTERNS)
}

/// Every pattern except 'No change', which never becomes the drum state.
pub fn historic_pattern() -> LinguisticVariable {
    let items: Vec<(&str, f64)> = PATTERNS.iter().copied().filter(|(n, _)| *n != NO_CHANGE).collect();
    singletons("historic_pattern", 0.0, 15.0, &items)
}

pub fn mute_variable(name: &str) -> LinguisticVariable {
    singletons(name, 0.0, 2.0, &MUTES)
}

/// Begin trapezoids for K in [`BAR_BEGIN_K`] and end trapezoids for K in
/// [`BAR_END_K`], over positions within a 32-bar cycle.
pub fn build_bar_terms(bar_seconds: f64, epsilon: f64) -> Result<Vec<Term>, CatalogError> {
    let t = bar_seconds;
    let wrap = |source| CatalogError::BarTerms {
        bar_seconds,
        epsilon,
        source,
    };
    if [t, epsilon].iter().any(|x| x.is_nan() || *x <= 0.0) {
        return Err(wrap(FuzzyError::InvalidParameters {
            shape: "trapezoid",
            params: vec![t, epsilon],
            reason: "bar length and epsilon must be positive",
        }));
    }
    let mut terms = Vec::new();
    for k in BAR_BEGIN_K {
        let start = (k as f64 - 1.0) * t;
        let mf = MembershipFunction::trapezoid(start - epsilon, start, start + 0.009, start + 0.009 + epsilon)
            .map_err(wrap)?;
        terms.push(Term::new(format!("{k}th"), mf));
    }
    for k in BAR_END_K {
        let end = (k as f64 + 1.0) * t;
        let mf = MembershipFunction::trapezoid(end - t / 8.0 - epsilon, end - t / 8.0, end - 0.1, end).map_err(wrap)?;
        terms.push(Term::new(format!("End {k}th"), mf));
    }
    Ok(terms)
}

pub fn bar(bar_seconds: f64, epsilon: f64) -> Result<LinguisticVariable, CatalogError> {
    let terms = build_bar_terms(bar_seconds, epsilon)?;
    Ok(LinguisticVariable::new("bar", Universe::new(0.0, 32.0 * bar_seconds)?, terms)?)
}

/// 'Last Quarter' of a bar. The universe extends to `T + epsilon` so that
/// the trapezoid's outer foot lies inside it.
pub fn time_in_bar(bar_seconds: f64, epsilon: f64) -> Result<LinguisticVariable, CatalogError> {
    let t = bar_seconds;
    let mf = MembershipFunction::trapezoid(t - t / 4.0 - epsilon, t - t / 4.0, t, t + epsilon)?;
    Ok(LinguisticVariable::new(
        "time_in_bar",
        Universe::new(0.0, t + epsilon)?,
        vec![Term::new("Last Quarter", mf)],
    )?)
}

/// Variables of the recurrent temporal system.
pub fn temporal_variables() -> Vec<LinguisticVariable> {
    vec![
        difference("velocity_difference"),
        difference("velocity_difference_fast"),
        difference("density_difference_low"),
        difference("density_difference_high"),
        difference("density_difference_full"),
        level6("newer_average"),
        level6("older_average"),
        level6("complexity"),
        level6("intensity"),
        slope("intensity_slope"),
        slope("complexity_slope"),
        change_velocity("change_velocity_slow", 0.3),
        change_velocity("change_velocity_fast", FAST_CHANGE_HALF_WIDTH),
        change_density("change_density_low"),
        change_density("change_density_high"),
        change_density("change_density_full"),
        sudden_shift("sudden_shift"),
        hype("hype"),
    ]
}

/// Variables of the drummer control system for a bar of `bar_seconds`.
pub fn control_variables(bar_seconds: f64, epsilon: f64) -> Result<Vec<LinguisticVariable>, CatalogError> {
    Ok(vec![
        var(
            "time_since_last_note",
            0.0,
            INF,
            vec![Term::new("Short", tri(0.0, 4.0, 6.0))],
        ),
        mode("current_mode"),
        mode("historic_mode"),
        historic_pattern(),
        mute_variable("historic_mute"),
        bar(bar_seconds, epsilon)?,
        singletons("change_velocity", 0.0, 1.0, &[("Down", 0.0), ("Up", 1.0)]),
        hype("hype"),
        time_in_bar(bar_seconds, epsilon)?,
        level6("average_velocity"),
        var(
            "intensity_shift",
            -1.0,
            1.0,
            vec![
                Term::new("Down", tri(-1.0, -1.0, 0.0)),
                Term::new("Up", tri(0.0, 1.0, 1.0)),
            ],
        ),
        var(
            "time_since_shift_up",
            0.0,
            INF,
            vec![Term::new("Short", trap(0.0, 0.0, 0.5, 3.5))],
        ),
        var(
            "time_since_shift_down",
            0.0,
            INF,
            vec![Term::new("Short", trap(0.0, 0.0, 0.5, 3.5))],
        ),
        level6("full_density"),
        level4("low_density"),
        level4("high_density"),
        singletons("pedal", 0.0, 1.0, &[("Down", 0.0), ("Up", 1.0)]),
        var(
            "time_since_pedal",
            0.0,
            INF,
            vec![Term::new("Very Short", tri(0.0, 0.0, 1.0))],
        ),
        level6("intensity"),
        level6("complexity"),
        pattern_output(),
        mute_variable("mute"),
        mute_variable("unmute"),
    ])
}

#[derive(Debug, Clone, PartialEq)]
pub enum Mismatch {
    MissingVariable(String),
    Universe {
        variable: String,
        expected: (f64, f64),
        found: (f64, f64),
    },
    MissingTerm {
        variable: String,
        term: String,
    },
    ExtraTerm {
        variable: String,
        term: String,
    },
    Parameters {
        variable: String,
        term: String,
        expected: MembershipFunction,
        found: MembershipFunction,
    },
}

impl std::fmt::Display for Mismatch {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Self::MissingVariable(v) => write!(f, "variable `{v}` is not declared"),
            Self::Universe {
                variable,
                expected,
                found,
            } => write!(
                f,
                "`{variable}` universe [{}, {}] differs from reference [{}, {}]",
                found.0, found.1, expected.0, expected.1
            ),
            Self::MissingTerm { variable, term } => write!(f, "`{variable}` lacks term `{term}`"),
            Self::ExtraTerm { variable, term } => write!(f, "`{variable}` has unexpected term `{term}`"),
            Self::Parameters {
                variable,
                term,
                expected,
                found,
            } => write!(f, "`{variable}` term `{term}` is {found}, reference is {expected}"),
        }
    }
}

fn close(x: f64, y: f64) -> bool {
    x == y || (x - y).abs() <= 1e-9 * (1.0 + x.abs().max(y.abs()))
}

fn same_mf(a: &MembershipFunction, b: &MembershipFunction) -> bool {
    let (pa, pb) = (a.params(), b.params());
    std::mem::discriminant(a) == std::mem::discriminant(b)
        && pa.len() == pb.len()
        && pa.iter().zip(&pb).all(|(x, y)| close(*x, *y))
}

/// Differences between the variables declared in `rb` and the `reference`
/// catalog. Variables of `rb` that the catalog does not know are ignored.
pub fn compare(rb: &RuleBase, reference: &[LinguisticVariable]) -> Vec<Mismatch> {
    let mut out = Vec::new();
    for expected in reference {
        let Some(found) = rb.variable(expected.name()) else {
            out.push(Mismatch::MissingVariable(expected.name().to_string()));
            continue;
        };
        let (eu, fu) = (expected.universe(), found.universe());
        if !close(eu.lo, fu.lo) || !close(eu.hi, fu.hi) {
            out.push(Mismatch::Universe {
                variable: expected.name().to_string(),
                expected: (eu.lo, eu.hi),
                found: (fu.lo, fu.hi),
            });
        }
        for term in expected.terms() {
            match found.term(&term.name) {
                None => out.push(Mismatch::MissingTerm {
                    variable: expected.name().to_string(),
                    term: term.name.clone(),
                }),
                Some(f) if !same_mf(&f.mf, &term.mf) => out.push(Mismatch::Parameters {
                    variable: expected.name().to_string(),
                    term: term.name.clone(),
                    expected: term.mf,
                    found: f.mf,
                }),
                Some(_) => {}
            }
        }
        for term in found.terms() {
            if expected.term(&term.name).is_none() {
                out.push(Mismatch::ExtraTerm {
                    variable: expected.name().to_string(),
                    term: term.name.clone(),
                });
            }
        }
    }
    out
}
