use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;
use std::time::Instant;

use crate::midi::{decode, read_smf, write_smf, RawMidiMessage};

use super::{Engine, RuntimeError, TraceWriter};

#[derive(Debug, Clone, Default)]
pub struct ReplayReport {
    pub cycles: u64,
    pub events_in: usize,
    pub malformed: usize,
    pub dropped: u64,
    /// Wall-clock compute time of each cycle, in nanoseconds.
    pub cycle_nanos: Vec<u64>,
}

#[derive(Debug, Clone)]
pub struct ReplayOutput {
    pub messages: Vec<RawMidiMessage>,
    pub report: ReplayReport,
}

/// Runs the engine over `input` on a virtual clock, one cycle every
/// `cycle_period_seconds` from 0 until `tail_bars` bars after the last
/// message. Each cycle is written to `trace` when given.
pub fn replay<W: Write>(
    engine: &Engine,
    input: &[RawMidiMessage],
    trace: Option<&mut TraceWriter<W>>,
) -> Result<ReplayOutput, RuntimeError> {
    let mut trace = trace;
    let mut report = ReplayReport::default();
    let mut events = Vec::with_capacity(input.len());
    for m in input {
        match decode(m) {
            Ok(Some(e)) => events.push(e),
            Ok(None) => {}
            Err(e) => {
                report.malformed += 1;
                log::warn!("skipping {e} at {:.6} s", m.time);
            }
        }
    }
    report.events_in = events.len();

    let period = engine.config.cycle_period_seconds;
    let last = input.iter().map(|m| m.time).fold(0.0, f64::max);
    let end = last + engine.config.tail_bars * engine.features.bar_seconds();
    let cycles = (end / period).floor() as u64 + 1;

    let mut session = engine.session();
    let mut next = 0;
    let mut messages = Vec::new();
    report.cycle_nanos.reserve(cycles as usize);
    for i in 0..cycles {
        let now = i as f64 * period;
        let started = Instant::now();
        while next < events.len() && events[next].time <= now {
            session.ingest(events[next]);
            next += 1;
        }
        let result = session.step(now)?;
        report.cycle_nanos.push(started.elapsed().as_nanos() as u64);
        if let Some(t) = trace.as_deref_mut() {
            t.write(&result)?;
        }
        messages.extend(result.messages);
    }
    if let Some(t) = trace {
        t.flush().map_err(csv::Error::from)?;
    }
    report.cycles = cycles;
    report.dropped = session.dropped_events();
    Ok(ReplayOutput { messages, report })
}

fn create(path: &Path) -> Result<BufWriter<File>, RuntimeError> {
    File::create(path).map(BufWriter::new).map_err(|source| RuntimeError::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Replays a MIDI file, writing the trace CSV and the drummer messages as
/// a MIDI file.
pub fn replay_file(
    engine: &Engine,
    input: &Path,
    trace_path: Option<&Path>,
    out_path: Option<&Path>,
) -> Result<ReplayReport, RuntimeError> {
    let bytes = std::fs::read(input).map_err(|source| RuntimeError::Io {
        path: input.to_path_buf(),
        source,
    })?;
    let messages = read_smf(&bytes).map_err(|source| RuntimeError::MidiFile {
        path: input.to_path_buf(),
        source,
    })?;
    let mut trace = match trace_path {
        Some(p) => Some(TraceWriter::new(
            create(p)?,
            engine.config.trace_firing_threshold,
            engine.config.no_note_sentinel_seconds,
        )?),
        None => None,
    };
    let out = replay(engine, &messages, trace.as_mut())?;
    if let Some(p) = out_path {
        let mut w = create(p)?;
        w.write_all(&write_smf(&out.messages))
            .and_then(|_| w.flush())
            .map_err(|source| RuntimeError::Io {
                path: p.to_path_buf(),
                source,
            })?;
    }
    Ok(out.report)
}
