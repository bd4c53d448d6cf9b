use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::control::ControlConfig;
use crate::features::FeatureConfig;
use crate::fuzzy::DEFAULT_RESOLUTION;
use crate::temporal::TemporalConfig;

use super::RuntimeError;

pub const DEFAULT_CONFIG: &str = include_str!("../../assets/accompany.toml");

/// Every setting, read from a flat TOML table. Relative paths are resolved
/// against the directory of the config file. Rule and mapping paths left
/// unset select the built-in defaults.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RuntimeConfig {
    pub cycle_period_seconds: f64,
    pub resolution: usize,
    pub tail_bars: f64,
    pub temporal_rules: Option<PathBuf>,
    pub control_rules: Option<PathBuf>,
    pub mapping: Option<PathBuf>,
    pub trace: Option<PathBuf>,
    /// Rules at or below this strength are left out of the trace.
    pub trace_firing_threshold: f64,
    pub queue_capacity: usize,
    pub input_port: Option<String>,
    pub output_port: Option<String>,

    pub bpm: f64,
    pub beats_per_bar: u32,
    pub slots_per_bar: u32,
    pub register_split_note: u8,
    pub window_t_seconds: f64,
    pub no_note_sentinel_seconds: f64,

    pub k_slope_points: usize,
    pub shift_threshold: f64,
    pub velocity_hold_seconds: f64,
    pub trend_bars: u32,

    pub stop_threshold_seconds: f64,
    pub epsilon_bar_seconds: f64,
}

impl Default for RuntimeConfig {
    fn default() -> Self {
        let f = FeatureConfig::default();
        let t = TemporalConfig::default();
        let c = ControlConfig::default();
        Self {
            cycle_period_seconds: 0.05,
            resolution: DEFAULT_RESOLUTION,
            tail_bars: 8.0,
            temporal_rules: None,
            control_rules: None,
            mapping: None,
            trace: None,
            trace_firing_threshold: 0.0,
            queue_capacity: 1024,
            input_port: None,
            output_port: None,
            bpm: f.bpm,
            beats_per_bar: f.beats_per_bar,
            slots_per_bar: f.slots_per_bar,
            register_split_note: f.register_split_note,
            window_t_seconds: f.window_t_seconds,
            no_note_sentinel_seconds: f.no_note_sentinel_seconds,
            k_slope_points: t.k_slope_points,
            shift_threshold: t.shift_threshold,
            velocity_hold_seconds: t.velocity_hold_seconds,
            trend_bars: t.trend_bars,
            stop_threshold_seconds: c.stop_threshold_seconds,
            epsilon_bar_seconds: c.epsilon_bar_seconds,
        }
    }
}

impl RuntimeConfig {
    pub fn from_toml(src: &str) -> Result<Self, RuntimeError> {
        let config: Self = toml::from_str(src).map_err(|e| RuntimeError::Config(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self, RuntimeError> {
        let src = std::fs::read_to_string(path).map_err(|source| RuntimeError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let mut config = Self::from_toml(&src).map_err(|e| match e {
            RuntimeError::Config(m) => RuntimeError::Config(format!("{}: {m}", path.display())),
            other => other,
        })?;
        let base = path.parent().unwrap_or(Path::new(""));
        for p in [
            &mut config.temporal_rules,
            &mut config.control_rules,
            &mut config.mapping,
            &mut config.trace,
        ]
        .into_iter()
        .flatten()
        {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
        Ok(config)
    }

    pub fn features(&self) -> FeatureConfig {
        FeatureConfig {
            bpm: self.bpm,
            beats_per_bar: self.beats_per_bar,
            slots_per_bar: self.slots_per_bar,
            register_split_note: self.register_split_note,
            window_t_seconds: self.window_t_seconds,
            no_note_sentinel_seconds: self.no_note_sentinel_seconds,
        }
    }

    pub fn temporal(&self) -> TemporalConfig {
        TemporalConfig {
            k_slope_points: self.k_slope_points,
            shift_threshold: self.shift_threshold,
            velocity_hold_seconds: self.velocity_hold_seconds,
            trend_bars: self.trend_bars,
        }
    }

    pub fn control(&self) -> ControlConfig {
        ControlConfig {
            stop_threshold_seconds: self.stop_threshold_seconds,
            epsilon_bar_seconds: self.epsilon_bar_seconds,
        }
    }

    pub fn bar_seconds(&self) -> f64 {
        self.features().bar_seconds()
    }

    pub fn validate(&self) -> Result<(), RuntimeError> {
        let bad = |m: String| Err(RuntimeError::Config(m));
        if !(self.cycle_period_seconds.is_finite() && self.cycle_period_seconds > 0.0) {
            return bad(format!("cycle_period_seconds must be positive, got {}", self.cycle_period_seconds));
        }
        if self.resolution == 0 {
            return bad("resolution must be at least 1".into());
        }
        if self.tail_bars.is_nan() || self.tail_bars < 0.0 {
            return bad("tail_bars must not be negative".into());
        }
        if self.queue_capacity == 0 {
            return bad("queue_capacity must be at least 1".into());
        }
        if self.k_slope_points < 2 {
            return bad("k_slope_points must be at least 2".into());
        }
        if [self.stop_threshold_seconds, self.epsilon_bar_seconds].iter().any(|x| x.is_nan() || *x <= 0.0) {
            return bad("stop_threshold_seconds and epsilon_bar_seconds must be positive".into());
        }
        self.features().validate().map_err(RuntimeError::Config)
    }
}
