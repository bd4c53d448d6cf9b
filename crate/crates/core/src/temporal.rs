//! Recurrent temporal system: smoothed averages, sudden-shift detection and
//! crescendo anticipation.

use std::collections::VecDeque;

use serde::Deserialize;

use crate::error::EngineError;
use crate::features::FeatureFrame;
use crate::fuzzy::{CrispInputs, Firing, FuzzyError, OutputKind, OutputValue, RuleBase};

pub const DEFAULT_RULES: &str = include_str!("../assets/temporal.rules");

pub const INPUTS: [&str; 13] = [
    "velocity_difference",
    "velocity_difference_fast",
    "density_difference_low",
    "density_difference_high",
    "density_difference_full",
    "newer_average",
    "older_average",
    "complexity",
    "intensity",
    "intensity_slope",
    "complexity_slope",
    // unused by the default rules but accepted
    "velocity_sum",
    "time_since_last_note",
];

pub const OUTPUTS: [&str; 7] = [
    "change_velocity_slow",
    "change_velocity_fast",
    "change_density_low",
    "change_density_high",
    "change_density_full",
    "sudden_shift",
    "hype",
];

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TemporalConfig {
    /// Points used for the intensity and complexity slopes.
    pub k_slope_points: usize,
    pub shift_threshold: f64,
    /// After a note, cycles without new notes within this many seconds
    /// leave the velocity averages alone.
    pub velocity_hold_seconds: f64,
    /// Bars looked back over when deciding whether the velocity is rising.
    pub trend_bars: u32,
}

impl Default for TemporalConfig {
    fn default() -> Self {
        Self {
            k_slope_points: 8,
            shift_threshold: 0.5,
            velocity_hold_seconds: 0.5,
            trend_bars: 8,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct TemporalState {
    pub avg_velocity_slow: f64,
    pub avg_velocity_fast: f64,
    pub avg_density_low: f64,
    pub avg_density_high: f64,
    pub avg_density_full: f64,
    pub intensity_history: VecDeque<(f64, f64)>,
    pub complexity_history: VecDeque<(f64, f64)>,
    pub last_shift_up: Option<f64>,
    pub last_shift_down: Option<f64>,
    /// Slow average per cycle, kept for the trend window.
    pub velocity_history: VecDeque<(f64, f64)>,
    pub last: TemporalOutputs,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct TemporalOutputs {
    pub change_velocity_slow: f64,
    pub change_velocity_fast: f64,
    pub change_density_low: f64,
    pub change_density_high: f64,
    pub change_density_full: f64,
    pub sudden_shift: f64,
    pub hype: f64,
    /// 1 when the slow average is at least what it was `trend_bars` ago.
    pub velocity_trend: f64,
    pub avg_velocity_slow: f64,
    pub avg_velocity_fast: f64,
    pub avg_density_low: f64,
    pub avg_density_high: f64,
    pub avg_density_full: f64,
    pub intensity_slope: f64,
    pub complexity_slope: f64,
    pub last_shift_up: Option<f64>,
    pub last_shift_down: Option<f64>,
}

impl TemporalOutputs {
    pub fn time_since_shift_up(&self, now: f64, sentinel: f64) -> f64 {
        self.last_shift_up.map_or(sentinel, |t| (now - t).max(0.0))
    }

    pub fn time_since_shift_down(&self, now: f64, sentinel: f64) -> f64 {
        self.last_shift_down.map_or(sentinel, |t| (now - t).max(0.0))
    }
}

/// Least-squares slope of `(time, value)` points, in value units per second.
pub fn slope<'a>(points: impl IntoIterator<Item = &'a (f64, f64)>) -> f64 {
    let pts: Vec<(f64, f64)> = points.into_iter().copied().collect();
    if pts.len() < 2 {
        return 0.0;
    }
    let n = pts.len() as f64;
    let mt = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let mv = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for (t, v) in &pts {
        sxy += (t - mt) * (v - mv);
        sxx += (t - mt) * (t - mt);
    }
    if sxx == 0.0 {
        0.0
    } else {
        sxy / sxx
    }
}

fn push_bounded(history: &mut VecDeque<(f64, f64)>, point: (f64, f64), k: usize) {
    history.push_back(point);
    while history.len() > k {
        history.pop_front();
    }
}

fn update_average(avg: f64, change: f64) -> f64 {
    (avg + change * 127.0).clamp(0.0, 127.0)
}

#[derive(Debug, Clone)]
pub struct TemporalEngine {
    rules: RuleBase,
    config: TemporalConfig,
    trend_seconds: f64,
}

impl TemporalEngine {
    pub fn new(rules: RuleBase, config: TemporalConfig, bar_seconds: f64) -> Result<Self, EngineError> {
        for out in OUTPUTS {
            let o = rules.output(out).ok_or(EngineError::MissingVariable {
                system: "temporal",
                role: "output",
                variable: out.to_string(),
            })?;
            if o.kind != OutputKind::Continuous {
                return Err(EngineError::WrongKind {
                    system: "temporal",
                    variable: out.to_string(),
                    expected: "continuous",
                });
            }
        }
        for var in rules.inputs() {
            if !INPUTS.contains(&var.name()) {
                return Err(EngineError::UnknownInput {
                    system: "temporal",
                    variable: var.name().to_string(),
                });
            }
        }
        Ok(Self {
            rules,
            trend_seconds: config.trend_bars as f64 * bar_seconds,
            config,
        })
    }

    pub fn rules(&self) -> &RuleBase {
        &self.rules
    }

    pub fn config(&self) -> &TemporalConfig {
        &self.config
    }

    fn inputs(&self, values: &[(&str, f64)]) -> CrispInputs {
        self.rules
            .inputs()
            .iter()
            .map(|v| {
                let x = values.iter().find(|(n, _)| *n == v.name()).map_or(0.0, |(_, x)| *x);
                (v.name().to_string(), x)
            })
            .collect()
    }

    /// The sudden-shift part of the system on its own, with every other
    /// input at rest. Returns 0 if no shift rule fires.
    pub fn detect_sudden_shift(&self, newer: f64, older: f64) -> Result<f64, FuzzyError> {
        let inputs = self.inputs(&[("newer_average", newer), ("older_average", older)]);
        let res = self.rules.run(&inputs)?;
        Ok(res.get("sudden_shift").and_then(OutputValue::crisp).unwrap_or(0.0))
    }

    /// One cycle. `prev_intensity` and `prev_complexity` are the control
    /// system's outputs from the previous cycle.
    pub fn step(
        &self,
        frame: &FeatureFrame,
        prev: &TemporalState,
        prev_intensity: f64,
        prev_complexity: f64,
    ) -> Result<(TemporalOutputs, TemporalState, Vec<Firing>), FuzzyError> {
        let now = frame.cycle_time;
        let mut next = prev.clone();
        let k = self.config.k_slope_points.max(1);
        push_bounded(&mut next.intensity_history, (now, prev_intensity), k);
        push_bounded(&mut next.complexity_history, (now, prev_complexity), k);
        let intensity_slope = slope(&next.intensity_history);
        let complexity_slope = slope(&next.complexity_history);

        let velocity_diff = |avg: f64| {
            if frame.velocity_sum > 0.0 {
                frame.velocity_sum - avg
            } else if frame.time_since_last_note < self.config.velocity_hold_seconds {
                0.0
            } else {
                -avg
            }
        };

        let inputs = self.inputs(&[
            ("velocity_difference", velocity_diff(prev.avg_velocity_slow)),
            ("velocity_difference_fast", velocity_diff(prev.avg_velocity_fast)),
            ("density_difference_low", frame.density_low - prev.avg_density_low),
            ("density_difference_high", frame.density_high - prev.avg_density_high),
            ("density_difference_full", frame.density_full - prev.avg_density_full),
            ("newer_average", frame.newer_avg),
            ("older_average", frame.older_avg),
            ("complexity", prev_complexity),
            ("intensity", prev_intensity),
            ("intensity_slope", intensity_slope),
            ("complexity_slope", complexity_slope),
            ("velocity_sum", frame.velocity_sum),
            ("time_since_last_note", frame.time_since_last_note),
        ]);
        let res = self.rules.run(&inputs)?;
        let value = |name: &str, held: f64| res.get(name).and_then(OutputValue::crisp).unwrap_or(held);

        let last = &prev.last;
        let change_velocity_slow = value("change_velocity_slow", last.change_velocity_slow);
        let change_velocity_fast = value("change_velocity_fast", last.change_velocity_fast);
        let change_density_low = value("change_density_low", last.change_density_low);
        let change_density_high = value("change_density_high", last.change_density_high);
        let change_density_full = value("change_density_full", last.change_density_full);
        let sudden_shift = value("sudden_shift", last.sudden_shift);
        let hype = value("hype", 0.0);

        next.avg_velocity_slow = update_average(prev.avg_velocity_slow, change_velocity_slow);
        next.avg_velocity_fast = update_average(prev.avg_velocity_fast, change_velocity_fast);
        next.avg_density_low = update_average(prev.avg_density_low, change_density_low);
        next.avg_density_high = update_average(prev.avg_density_high, change_density_high);
        next.avg_density_full = update_average(prev.avg_density_full, change_density_full);

        if sudden_shift > self.config.shift_threshold {
            next.last_shift_up = Some(now);
        } else if sudden_shift < -self.config.shift_threshold {
            next.last_shift_down = Some(now);
        }

        next.velocity_history.push_back((now, next.avg_velocity_slow));
        while next.velocity_history.len() > 1 && next.velocity_history[1].0 <= now - self.trend_seconds {
            next.velocity_history.pop_front();
        }
        let reference = next.velocity_history.front().map_or(0.0, |p| p.1);
        let velocity_trend = if next.avg_velocity_slow >= reference { 1.0 } else { 0.0 };

        let out = TemporalOutputs {
            change_velocity_slow,
            change_velocity_fast,
            change_density_low,
            change_density_high,
            change_density_full,
            sudden_shift,
            hype,
            velocity_trend,
            avg_velocity_slow: next.avg_velocity_slow,
            avg_velocity_fast: next.avg_velocity_fast,
            avg_density_low: next.avg_density_low,
            avg_density_high: next.avg_density_high,
            avg_density_full: next.avg_density_full,
            intensity_slope,
            complexity_slope,
            last_shift_up: next.last_shift_up,
            last_shift_down: next.last_shift_down,
        };
        next.last = out.clone();
        Ok((out, next, res.firings))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fuzzy::parse_rule_base;

    fn engine() -> TemporalEngine {
        TemporalEngine::new(parse_rule_base(DEFAULT_RULES, &[]).unwrap(), TemporalConfig::default(), 2.0).unwrap()
    }

    fn frame(t: f64, velocity_sum: f64) -> FeatureFrame {
        FeatureFrame {
            cycle_time: t,
            velocity_sum,
            density_full: 0.0,
            density_low: 0.0,
            density_high: 0.0,
            pedal_down: false,
            time_since_last_note: if velocity_sum > 0.0 { 0.0 } else { 3600.0 },
            time_since_pedal: 3600.0,
            bar_index: 0,
            bar_in_32: 0,
            time_in_bar: 0.0,
            newer_avg: 0.0,
            older_avg: 0.0,
        }
    }

    #[test]
    fn slope_examples() {
        assert_eq!(slope(&[(0.0, 0.0), (1.0, 10.0), (2.0, 20.0)]), 10.0);
        assert_eq!(slope(&[(0.0, 5.0), (1.0, 5.0), (2.0, 5.0)]), 0.0);
        assert_eq!(slope(&[(0.0, 5.0)]), 0.0);
        assert_eq!(slope(&[(1.0, 5.0), (1.0, 9.0)]), 0.0);
    }

    #[test]
    fn rest_stays_at_rest() {
        let e = engine();
        let (out, st, _) = e.step(&frame(0.0, 0.0), &TemporalState::default(), 0.0, 0.0).unwrap();
        // the published 'None' term is (-0.0749, 0, 0.0750), centroid 1e-4 / 3
        assert!((out.change_velocity_slow - 0.0001 / 3.0).abs() < 1e-6, "{}", out.change_velocity_slow);
        assert!(st.avg_velocity_slow < 0.01);
        assert_eq!(out.hype, 0.0);
    }

    #[test]
    fn loud_note_raises_average() {
        let e = engine();
        let (out, st, _) = e.step(&frame(0.0, 127.0), &TemporalState::default(), 0.0, 0.0).unwrap();
        assert!(out.change_velocity_slow > 0.2, "{}", out.change_velocity_slow);
        assert!(st.avg_velocity_slow > 0.0);
        assert!(st.avg_velocity_fast > 0.0 && st.avg_velocity_fast < st.avg_velocity_slow);
    }

    #[test]
    fn sudden_shift_examples() {
        let e = engine();
        assert!(e.detect_sudden_shift(120.0, 10.0).unwrap() > 0.5);
        assert!(e.detect_sudden_shift(10.0, 120.0).unwrap() < -0.5);
        assert!(e.detect_sudden_shift(64.0, 64.0).unwrap().abs() < 1e-6);
    }

    #[test]
    fn rising_levels_bring_hype() {
        let e = engine();
        let mut st = TemporalState::default();
        let mut hype = 0.0;
        for (i, v) in [0.0, 20.0, 40.0, 60.0].into_iter().enumerate() {
            let (out, next, _) = e.step(&frame(i as f64 * 0.05, 0.0), &st, v, v).unwrap();
            st = next;
            hype = out.hype;
        }
        assert!(hype > 0.5, "{hype}");
    }

    #[test]
    fn shift_time_is_recorded() {
        let e = engine();
        let mut f = frame(3.0, 0.0);
        f.newer_avg = 10.0;
        f.older_avg = 120.0;
        let (out, _, _) = e.step(&f, &TemporalState::default(), 0.0, 0.0).unwrap();
        assert_eq!(out.last_shift_down, Some(3.0));
        assert_eq!(out.time_since_shift_down(4.0, 3600.0), 1.0);
        assert_eq!(out.time_since_shift_up(4.0, 3600.0), 3600.0);
    }
}
