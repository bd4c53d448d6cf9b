//! Drummer control system: intensity and complexity, then pattern and kit
//! muting, evaluated in one pass per cycle.

use serde::Deserialize;

use crate::catalog::{MUTES, NO_CHANGE};
use crate::error::EngineError;
use crate::features::FeatureFrame;
use crate::fuzzy::{CrispInputs, Firing, FuzzyError, OutputKind, OutputValue, RuleBase};
use crate::temporal::TemporalOutputs;

pub const DEFAULT_RULES: &str = include_str!("../assets/control.rules");

pub const INPUTS: [&str; 18] = [
    "time_since_last_note",
    "current_mode",
    "historic_mode",
    "historic_pattern",
    "historic_mute",
    "bar",
    "change_velocity",
    "hype",
    "time_in_bar",
    "average_velocity",
    "intensity_shift",
    "time_since_shift_up",
    "time_since_shift_down",
    "full_density",
    "low_density",
    "high_density",
    "pedal",
    "time_since_pedal",
];

pub const CONTINUOUS_OUTPUTS: [&str; 2] = ["intensity", "complexity"];
pub const CATEGORICAL_OUTPUTS: [&str; 3] = ["pattern", "mute", "unmute"];

pub const NONE: &str = "None";

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ControlConfig {
    pub stop_threshold_seconds: f64,
    pub epsilon_bar_seconds: f64,
}

impl Default for ControlConfig {
    fn default() -> Self {
        Self {
            stop_threshold_seconds: 6.0,
            epsilon_bar_seconds: 0.01,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Mode {
    #[default]
    Stop,
    Play,
}

impl Mode {
    pub fn code(self) -> f64 {
        match self {
            Mode::Stop => 0.0,
            Mode::Play => 1.0,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Mode::Stop => "Stop",
            Mode::Play => "Play",
        }
    }
}

/// Play while the last note is more recent than `threshold` seconds.
pub fn infer_mode(time_since_last_note: f64, threshold: f64) -> Mode {
    if time_since_last_note < threshold {
        Mode::Play
    } else {
        Mode::Stop
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DrumState {
    pub historic_pattern: String,
    pub historic_mute: String,
    pub historic_mode: Mode,
    pub current_mode: Mode,
    /// Last crisp outputs, held when no rule fires.
    pub intensity: f64,
    pub complexity: f64,
}

impl Default for DrumState {
    fn default() -> Self {
        Self {
            historic_pattern: NONE.into(),
            historic_mute: NONE.into(),
            historic_mode: Mode::Stop,
            current_mode: Mode::Stop,
            intensity: 0.0,
            complexity: 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ControlOutputs {
    pub intensity: f64,
    pub complexity: f64,
    pub pattern: String,
    pub mute: String,
    pub unmute: String,
}

impl ControlOutputs {
    /// What the drummer is assumed to be doing before the first cycle.
    pub fn quiescent() -> Self {
        Self {
            intensity: 0.0,
            complexity: 0.0,
            pattern: NONE.into(),
            mute: NONE.into(),
            unmute: NONE.into(),
        }
    }
}

fn mute_level(name: &str) -> Option<usize> {
    MUTES.iter().position(|(n, _)| *n == name)
}

/// Applies a cycle's mute and unmute results to the muted-parts level.
/// Muting sets the level; unmuting level `u` drops it below `u`.
pub fn apply_mute(historic: &str, mute: &str, unmute: &str) -> String {
    let mut level = mute_level(historic).unwrap_or(0);
    if mute != NONE {
        if let Some(m) = mute_level(mute) {
            level = m;
        }
    }
    if unmute != NONE {
        if let Some(u) = mute_level(unmute) {
            level = level.min(u.saturating_sub(1));
        }
    }
    MUTES[level].0.to_string()
}

#[derive(Debug, Clone)]
pub struct ControlEngine {
    rules: RuleBase,
    config: ControlConfig,
    bar_seconds: f64,
    sentinel: f64,
}

impl ControlEngine {
    pub fn new(
        rules: RuleBase,
        config: ControlConfig,
        bar_seconds: f64,
        sentinel: f64,
    ) -> Result<Self, EngineError> {
        let need = |name: &str, kind: OutputKind, expected: &'static str| {
            let o = rules.output(name).ok_or(EngineError::MissingVariable {
                system: "control",
                role: "output",
                variable: name.to_string(),
            })?;
            if o.kind != kind {
                return Err(EngineError::WrongKind {
                    system: "control",
                    variable: name.to_string(),
                    expected,
                });
            }
            Ok(o)
        };
        for name in CONTINUOUS_OUTPUTS {
            need(name, OutputKind::Continuous, "continuous")?;
        }
        let pattern = need("pattern", OutputKind::Categorical, "categorical")?;
        for term in [NO_CHANGE, NONE] {
            if pattern.var.term(term).is_none() {
                return Err(EngineError::MissingCategory {
                    variable: "pattern".into(),
                    term: term.into(),
                });
            }
        }
        for name in ["mute", "unmute"] {
            let o = need(name, OutputKind::Categorical, "categorical")?;
            for (term, _) in MUTES {
                if o.var.term(term).is_none() {
                    return Err(EngineError::MissingCategory {
                        variable: name.into(),
                        term: term.into(),
                    });
                }
            }
        }
        for var in rules.inputs() {
            if !INPUTS.contains(&var.name()) {
                return Err(EngineError::UnknownInput {
                    system: "control",
                    variable: var.name().to_string(),
                });
            }
        }
        Ok(Self {
            rules,
            config,
            bar_seconds,
            sentinel,
        })
    }

    pub fn rules(&self) -> &RuleBase {
        &self.rules
    }

    pub fn config(&self) -> &ControlConfig {
        &self.config
    }

    /// Singleton code of `term` on a categorical variable, or 0.
    fn code(&self, variable: &str, term: &str) -> f64 {
        self.rules
            .variable(variable)
            .and_then(|v| v.term(term))
            .map_or(0.0, |t| t.mf.peak())
    }

    /// Crisp values of every input the rule base declares, for the cycle
    /// described by `frame` and `temporal` with modes already updated.
    pub fn crisp_inputs(&self, frame: &FeatureFrame, temporal: &TemporalOutputs, drum: &DrumState) -> CrispInputs {
        let now = frame.cycle_time;
        self.rules
            .inputs()
            .iter()
            .map(|v| {
                let x = match v.name() {
                    "time_since_last_note" => frame.time_since_last_note,
                    "current_mode" => drum.current_mode.code(),
                    "historic_mode" => drum.historic_mode.code(),
                    "historic_pattern" => self.code("historic_pattern", &drum.historic_pattern),
                    "historic_mute" => self.code("historic_mute", &drum.historic_mute),
                    "bar" => frame.bar_position(self.bar_seconds),
                    "change_velocity" => temporal.velocity_trend,
                    "hype" => temporal.hype,
                    "time_in_bar" => frame.time_in_bar,
                    "average_velocity" => temporal.avg_velocity_slow,
                    "intensity_shift" => temporal.sudden_shift,
                    "time_since_shift_up" => temporal.time_since_shift_up(now, self.sentinel),
                    "time_since_shift_down" => temporal.time_since_shift_down(now, self.sentinel),
                    "full_density" => frame.density_full,
                    "low_density" => frame.density_low,
                    "high_density" => frame.density_high,
                    "pedal" => {
                        if frame.pedal_down {
                            0.0
                        } else {
                            1.0
                        }
                    }
                    "time_since_pedal" => frame.time_since_pedal,
                    _ => 0.0,
                };
                (v.name().to_string(), x)
            })
            .collect()
    }

    /// One cycle. Modes advance first, so rules see a Stop/Play transition
    /// on the cycle in which it happens.
    pub fn step(
        &self,
        frame: &FeatureFrame,
        temporal: &TemporalOutputs,
        drum: &DrumState,
    ) -> Result<(ControlOutputs, DrumState, Vec<Firing>), FuzzyError> {
        let mut next = drum.clone();
        next.historic_mode = drum.current_mode;
        next.current_mode = infer_mode(frame.time_since_last_note, self.config.stop_threshold_seconds);

        let inputs = self.crisp_inputs(frame, temporal, &next);
        let hold: CrispInputs = [
            ("intensity".to_string(), drum.intensity),
            ("complexity".to_string(), drum.complexity),
        ]
        .into_iter()
        .collect();
        let res = self.rules.run_with_hold(&inputs, &hold)?;

        let category = |name: &str, default: &str| {
            res.get(name)
                .and_then(OutputValue::category)
                .unwrap_or(default)
                .to_string()
        };
        let out = ControlOutputs {
            intensity: res.get("intensity").and_then(OutputValue::crisp).unwrap_or(drum.intensity),
            complexity: res.get("complexity").and_then(OutputValue::crisp).unwrap_or(drum.complexity),
            pattern: category("pattern", NO_CHANGE),
            mute: category("mute", NONE),
            unmute: category("unmute", NONE),
        };

        if out.pattern != NO_CHANGE {
            next.historic_pattern = out.pattern.clone();
        }
        next.historic_mute = apply_mute(&drum.historic_mute, &out.mute, &out.unmute);
        next.intensity = out.intensity;
        next.complexity = out.complexity;
        Ok((out, next, res.firings))
    }
}
