use std::io::Write;
use std::sync::atomic::{AtomicBool, Ordering};
use std::time::{Duration, Instant};

use crate::midi::{decode, RawMidiMessage};

use super::{CycleResult, Engine, MidiInput, MidiOutput, PortError, RuntimeError, TraceWriter};

#[derive(Default)]
pub struct LiveOptions<'a> {
    /// Stop after this many cycles.
    pub max_cycles: Option<u64>,
    /// Called after every cycle, before its messages are sent.
    pub cycle_hook: Option<&'a mut dyn FnMut(&CycleResult)>,
}

#[derive(Debug, Clone, Default)]
pub struct LiveReport {
    pub cycles: u64,
    /// Cycles whose computation ran past the next deadline.
    pub overruns: u64,
    pub messages_sent: u64,
    pub dropped: u64,
    pub disconnected: bool,
}

/// Runs the cycle loop against wall-clock time until `stop` is set, the
/// input port goes away or `max_cycles` is reached. Input timestamps must be
/// seconds since `start`.
pub fn run_live<W: Write>(
    engine: &Engine,
    start: Instant,
    input: &mut dyn MidiInput,
    output: &mut dyn MidiOutput,
    trace: Option<&mut TraceWriter<W>>,
    stop: &AtomicBool,
    options: LiveOptions<'_>,
) -> Result<LiveReport, RuntimeError> {
    let mut trace = trace;
    let mut hook = options.cycle_hook;
    let period = Duration::from_secs_f64(engine.config.cycle_period_seconds);
    let mut session = engine.session();
    let mut report = LiveReport::default();
    let mut deadline = start;
    let mut pending: Vec<RawMidiMessage> = Vec::new();

    while !stop.load(Ordering::SeqCst) {
        if options.max_cycles.is_some_and(|m| report.cycles >= m) {
            break;
        }
        let now_instant = Instant::now();
        if now_instant < deadline {
            std::thread::sleep(deadline - now_instant);
        }
        let now = deadline.duration_since(start).as_secs_f64();

        match input.poll() {
            Ok(msgs) => pending.extend(msgs),
            Err(PortError::Disconnected(name)) => {
                log::warn!("input port {name} disconnected, stopping");
                report.disconnected = true;
                break;
            }
            Err(e) => return Err(e.into()),
        }
        // events stamped after this cycle's time wait for the next one
        pending.sort_by(|a, b| a.time.total_cmp(&b.time));
        let split = pending.partition_point(|m| m.time <= now);
        for m in pending.drain(..split) {
            match decode(&m) {
                Ok(Some(e)) => {
                    session.ingest(e);
                }
                Ok(None) => {}
                Err(e) => log::warn!("skipping {e}"),
            }
        }

        let result = session.step(now)?;
        if let Some(h) = hook.as_deref_mut() {
            h(&result);
        }
        for m in &result.messages {
            output.send(m)?;
            report.messages_sent += 1;
        }
        if let Some(t) = trace.as_deref_mut() {
            t.write(&result)?;
        }
        report.cycles += 1;

        deadline += period;
        let after = Instant::now();
        if after > deadline {
            report.overruns += 1;
            // skip missed slots rather than bursting to catch up
            while deadline < after {
                deadline += period;
            }
            log::debug!("cycle {} overran its period", result.cycle);
        }
    }
    if let Some(t) = trace {
        t.flush().map_err(csv::Error::from)?;
    }
    report.dropped = session.dropped_events() + input.overflowed();
    Ok(report)
}
