//! Membership function shapes.

use std::fmt;

use super::error::{FuzzyError, Result};

/// Shape of a fuzzy set over a real universe.
///
/// Construct through [`MembershipFunction::triangular`],
/// [`MembershipFunction::trapezoid`] or [`MembershipFunction::singleton`];
/// parameter ordering is checked there so evaluation never fails.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MembershipFunction {
    Triangular { a: f64, b: f64, c: f64 },
    /// Infinite shoulders are encoded as `a = b = -inf` or `c = d = +inf`.
    Trapezoid { a: f64, b: f64, c: f64, d: f64 },
    Singleton { v: f64 },
}

impl MembershipFunction {
    /// Triangle with feet `a`, `c` and apex `b`. `a = b = c` collapses to a
    /// singleton at `b`.
    pub fn triangular(a: f64, b: f64, c: f64) -> Result<Self> {
        let bad = |reason| FuzzyError::InvalidParameters {
            shape: "triangular",
            params: vec![a, b, c],
            reason,
        };
        if ![a, b, c].iter().all(|p| p.is_finite()) {
            return Err(bad("parameters must be finite"));
        }
        if !(a <= b && b <= c) {
            return Err(bad("expected a <= b <= c"));
        }
        if a == c {
            return Ok(Self::Singleton { v: b });
        }
        Ok(Self::Triangular { a, b, c })
    }

    pub fn trapezoid(a: f64, b: f64, c: f64, d: f64) -> Result<Self> {
        let bad = |reason| FuzzyError::InvalidParameters {
            shape: "trapezoid",
            params: vec![a, b, c, d],
            reason,
        };
        if [a, b, c, d].iter().any(|p| p.is_nan()) {
            return Err(bad("parameters must not be NaN"));
        }
        if !(a <= b && b <= c && c <= d) {
            return Err(bad("expected a <= b <= c <= d"));
        }
        if a == f64::INFINITY || b == f64::INFINITY {
            return Err(bad("rising edge cannot be at +inf"));
        }
        if c == f64::NEG_INFINITY || d == f64::NEG_INFINITY {
            return Err(bad("falling edge cannot be at -inf"));
        }
        if a.is_infinite() != b.is_infinite() {
            return Err(bad("a left shoulder needs a = b = -inf"));
        }
        if c.is_infinite() != d.is_infinite() {
            return Err(bad("a right shoulder needs c = d = +inf"));
        }
        Ok(Self::Trapezoid { a, b, c, d })
    }

    pub fn singleton(v: f64) -> Result<Self> {
        if !v.is_finite() {
            return Err(FuzzyError::InvalidParameters {
                shape: "singleton",
                params: vec![v],
                reason: "value must be finite",
            });
        }
        Ok(Self::Singleton { v })
    }

    /// Degree of membership of `x`, always in `[0, 1]`.
    pub fn degree(&self, x: f64) -> f64 {
        let mu = match *self {
            Self::Triangular { a, b, c } => {
                if x < a || x > c {
                    0.0
                } else if x == b {
                    1.0
                } else if x < b {
                    (x - a) / (b - a)
                } else {
                    (c - x) / (c - b)
                }
            }
            Self::Trapezoid { a, b, c, d } => {
                if x < a || x > d {
                    0.0
                } else if x >= b && x <= c {
                    1.0
                } else if x < b {
                    (x - a) / (b - a)
                } else {
                    (d - x) / (d - c)
                }
            }
            Self::Singleton { v } => {
                if x == v {
                    1.0
                } else {
                    0.0
                }
            }
        };
        if mu.is_nan() {
            0.0
        } else {
            mu.clamp(0.0, 1.0)
        }
    }

    pub fn is_singleton(&self) -> bool {
        matches!(self, Self::Singleton { .. })
    }

    pub fn params(&self) -> Vec<f64> {
        match *self {
            Self::Triangular { a, b, c } => vec![a, b, c],
            Self::Trapezoid { a, b, c, d } => vec![a, b, c, d],
            Self::Singleton { v } => vec![v],
        }
    }

    /// Closed interval outside which the degree is zero.
    pub fn support(&self) -> (f64, f64) {
        match *self {
            Self::Triangular { a, c, .. } => (a, c),
            Self::Trapezoid { a, d, .. } => (a, d),
            Self::Singleton { v } => (v, v),
        }
    }

    /// A representative point of the core (where the degree is 1).
    pub fn peak(&self) -> f64 {
        match *self {
            Self::Triangular { b, .. } => b,
            Self::Trapezoid { b, c, .. } => match (b.is_finite(), c.is_finite()) {
                (true, true) => 0.5 * (b + c),
                (true, false) => b,
                (false, true) => c,
                (false, false) => 0.0,
            },
            Self::Singleton { v } => v,
        }
    }

    /// Reflection about `m`: `mirrored(m).degree(2m - x) == degree(x)`.
    pub fn mirrored(&self, m: f64) -> Self {
        let r = |x: f64| 2.0 * m - x;
        match *self {
            Self::Triangular { a, b, c } => Self::Triangular {
                a: r(c),
                b: r(b),
                c: r(a),
            },
            Self::Trapezoid { a, b, c, d } => Self::Trapezoid {
                a: r(d),
                b: r(c),
                c: r(b),
                d: r(a),
            },
            Self::Singleton { v } => Self::Singleton { v: r(v) },
        }
    }
}

impl fmt::Display for MembershipFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn num(x: f64) -> String {
            if x == f64::INFINITY {
                "inf".into()
            } else if x == f64::NEG_INFINITY {
                "-inf".into()
            } else {
                format!("{x}")
            }
        }
        match *self {
            Self::Triangular { a, b, c } => write!(f, "tri({}, {}, {})", num(a), num(b), num(c)),
            Self::Trapezoid { a, b, c, d } => {
                write!(f, "trap({}, {}, {}, {})", num(a), num(b), num(c), num(d))
            }
            Self::Singleton { v } => write!(f, "singleton({})", num(v)),
        }
    }
}
