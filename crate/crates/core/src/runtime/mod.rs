//! The clock-cycle loop tying features, both fuzzy systems and the drummer
//! mapping together.

mod config;
mod live;
mod port;
mod replay;
mod trace;
mod validate;

pub use config::{RuntimeConfig, DEFAULT_CONFIG};
pub use live::{run_live, LiveOptions, LiveReport};
pub use port::{DeviceInput, DeviceOutput, DevicePorts, MemoryInput, MemoryOutput, MidiInput, MidiOutput, PortError};
pub use replay::{replay, replay_file, ReplayOutput, ReplayReport};
pub use trace::{TraceWriter, TRACE_COLUMNS};
pub use validate::{validate, ValidationReport};

use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::control::{self, ControlEngine, ControlOutputs, DrumState};
use crate::error::EngineError;
use crate::features::{ExtractorState, FeatureConfig, FeatureFrame, MidiEventIn};
use crate::fuzzy::{parse_rule_base, Firing, FuzzyError, ParseError, RuleBase};
use crate::midi::{encode, DrummerMapping, MidiError, RawMidiMessage};
use crate::temporal::{self, TemporalEngine, TemporalOutputs, TemporalState};

pub const DEFAULT_MAPPING: &str = include_str!("../../assets/strike2.mapping");

#[derive(Debug, Error)]
pub enum RuntimeError {
    #[error("config: {0}")]
    Config(String),
    #[error("{path}:{source}")]
    Rules { path: String, source: ParseError },
    #[error("{path}: {source}")]
    Engine { path: String, source: EngineError },
    #[error("{path}: {source}")]
    Mapping { path: String, source: MidiError },
    #[error("{path}: {source}")]
    MidiFile { path: PathBuf, source: MidiError },
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("trace: {0}")]
    Trace(#[from] csv::Error),
    #[error("port: {0}")]
    Port(#[from] PortError),
    #[error("cycle {cycle}: {source}")]
    Inference { cycle: u64, source: FuzzyError },
    #[error("cycle {cycle}: {source}")]
    Encode { cycle: u64, source: MidiError },
}

impl RuntimeError {
    /// 1 for configuration and parse problems, 2 for I/O at run time.
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Config(_) | Self::Rules { .. } | Self::Engine { .. } | Self::Mapping { .. } => 1,
            Self::MidiFile { source, .. } if !matches!(source, MidiError::Io(_)) => 1,
            _ => 2,
        }
    }
}

fn read_source(path: &Option<PathBuf>, builtin: &'static str) -> Result<(String, String), RuntimeError> {
    match path {
        None => Ok(("<built-in>".into(), builtin.to_string())),
        Some(p) => std::fs::read_to_string(p)
            .map(|s| (p.display().to_string(), s))
            .map_err(|source| RuntimeError::Io { path: p.clone(), source }),
    }
}

pub(crate) fn load_rules(
    path: &Option<PathBuf>,
    builtin: &'static str,
    bindings: &[(&str, f64)],
    resolution: usize,
) -> Result<(String, RuleBase), RuntimeError> {
    let (name, src) = read_source(path, builtin)?;
    let mut rb = parse_rule_base(&src, bindings).map_err(|source| RuntimeError::Rules {
        path: name.clone(),
        source,
    })?;
    rb.set_resolution(resolution).map_err(|e| RuntimeError::Config(e.to_string()))?;
    Ok((name, rb))
}

pub(crate) fn load_mapping(path: &Option<PathBuf>) -> Result<DrummerMapping, RuntimeError> {
    let (name, src) = read_source(path, DEFAULT_MAPPING)?;
    DrummerMapping::parse(&src).map_err(|source| RuntimeError::Mapping { path: name, source })
}

/// Everything that stays fixed while the engine runs.
#[derive(Debug, Clone)]
pub struct Engine {
    pub config: RuntimeConfig,
    pub features: FeatureConfig,
    pub temporal: TemporalEngine,
    pub control: ControlEngine,
    pub mapping: DrummerMapping,
}

impl Engine {
    pub fn from_config(config: &RuntimeConfig) -> Result<Self, RuntimeError> {
        config.validate()?;
        let bar = config.bar_seconds();
        let bindings = [("T", bar), ("eps", config.epsilon_bar_seconds)];
        let (tname, trules) = load_rules(&config.temporal_rules, temporal::DEFAULT_RULES, &bindings, config.resolution)?;
        let (cname, crules) = load_rules(&config.control_rules, control::DEFAULT_RULES, &bindings, config.resolution)?;
        let temporal = TemporalEngine::new(trules, config.temporal(), bar)
            .map_err(|source| RuntimeError::Engine { path: tname, source })?;
        let control = ControlEngine::new(crules, config.control(), bar, config.no_note_sentinel_seconds)
            .map_err(|source| RuntimeError::Engine { path: cname, source })?;
        Ok(Self {
            features: config.features(),
            config: config.clone(),
            temporal,
            control,
            mapping: load_mapping(&config.mapping)?,
        })
    }

    pub fn load(path: &Path) -> Result<Self, RuntimeError> {
        Self::from_config(&RuntimeConfig::load(path)?)
    }

    pub fn session(&self) -> Session<'_> {
        Session::new(self)
    }
}

/// What one cycle produced.
#[derive(Debug, Clone)]
pub struct CycleResult {
    pub cycle: u64,
    pub frame: FeatureFrame,
    pub temporal: TemporalOutputs,
    pub control: ControlOutputs,
    pub drum: DrumState,
    pub firings: Vec<Firing>,
    pub messages: Vec<RawMidiMessage>,
}

/// Mutable state carried from cycle to cycle.
#[derive(Debug, Clone)]
pub struct Session<'e> {
    engine: &'e Engine,
    extractor: ExtractorState,
    temporal: TemporalState,
    drum: DrumState,
    prev: ControlOutputs,
    cycle: u64,
}

impl<'e> Session<'e> {
    pub fn new(engine: &'e Engine) -> Self {
        Self {
            engine,
            extractor: ExtractorState::new(engine.features.clone()),
            temporal: TemporalState::default(),
            drum: DrumState::default(),
            prev: ControlOutputs::quiescent(),
            cycle: 0,
        }
    }

    pub fn ingest(&mut self, event: MidiEventIn) -> bool {
        self.extractor.ingest(event)
    }

    pub fn dropped_events(&self) -> u64 {
        self.extractor.dropped()
    }

    pub fn drum(&self) -> &DrumState {
        &self.drum
    }

    /// Runs one cycle at time `now` (seconds) over the events ingested so far.
    pub fn step(&mut self, now: f64) -> Result<CycleResult, RuntimeError> {
        let cycle = self.cycle;
        let frame = self.extractor.make_frame(now);
        let (tout, tstate, mut firings) = self
            .engine
            .temporal
            .step(&frame, &self.temporal, self.drum.intensity, self.drum.complexity)
            .map_err(|source| RuntimeError::Inference { cycle, source })?;
        let (cout, drum, cfirings) = self
            .engine
            .control
            .step(&frame, &tout, &self.drum)
            .map_err(|source| RuntimeError::Inference { cycle, source })?;
        firings.extend(cfirings);
        let messages = encode(&cout, Some(&self.prev), &self.engine.mapping, now)
            .map_err(|source| RuntimeError::Encode { cycle, source })?;
        self.temporal = tstate;
        self.drum = drum.clone();
        self.prev = cout.clone();
        self.cycle += 1;
        Ok(CycleResult {
            cycle,
            frame,
            temporal: tout,
            control: cout,
            drum,
            firings,
            messages,
        })
    }
}
