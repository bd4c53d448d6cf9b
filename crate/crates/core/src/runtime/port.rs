//! Live MIDI ports.
//!
//! [`DevicePorts`] talks to raw MIDI byte streams such as ALSA rawmidi
//! devices (`/dev/snd/midiC1D0`) or named pipes. Reading happens on its own
//! thread, which parses the stream and passes messages to the cycle loop
//! over a bounded queue.

use std::fs::{File, OpenOptions};
use std::io::{Read, Write};
use std::path::Path;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::mpsc::{self, Receiver, SyncSender, TryRecvError, TrySendError};
use std::sync::{Arc, Mutex};
use std::thread;
use std::time::Instant;

use thiserror::Error;

use crate::midi::{RawMidiMessage, StreamParser};

#[derive(Debug, Error)]
pub enum PortError {
    #[error("cannot open MIDI port `{name}`: {source}")]
    Open { name: String, source: std::io::Error },
    #[error("MIDI port `{0}` disappeared")]
    Disconnected(String),
    #[error("writing to MIDI port `{name}`: {source}")]
    Write { name: String, source: std::io::Error },
}

pub trait MidiInput {
    /// Messages received since the last call, oldest first. Timestamps are
    /// seconds since `start`.
    fn poll(&mut self) -> Result<Vec<RawMidiMessage>, PortError>;

    /// Messages lost because the queue was full.
    fn overflowed(&self) -> u64 {
        0
    }
}

pub trait MidiOutput {
    fn send(&mut self, msg: &RawMidiMessage) -> Result<(), PortError>;
}

enum Incoming {
    Message(RawMidiMessage),
    Closed,
}

/// Input and output over raw MIDI device files.
pub struct DevicePorts;

pub struct DeviceInput {
    name: String,
    rx: Receiver<Incoming>,
    overflow: Arc<AtomicU64>,
    closed: bool,
}

impl DevicePorts {
    pub fn open_input(path: &Path, start: Instant, capacity: usize) -> Result<DeviceInput, PortError> {
        let name = path.display().to_string();
        let file = File::open(path).map_err(|source| PortError::Open {
            name: name.clone(),
            source,
        })?;
        let (tx, rx) = mpsc::sync_channel(capacity);
        let overflow = Arc::new(AtomicU64::new(0));
        let counter = Arc::clone(&overflow);
        thread::Builder::new()
            .name("midi-in".into())
            .spawn(move || read_loop(file, start, tx, counter))
            .map_err(|source| PortError::Open {
                name: name.clone(),
                source,
            })?;
        Ok(DeviceInput {
            name,
            rx,
            overflow,
            closed: false,
        })
    }

    pub fn open_output(path: &Path) -> Result<DeviceOutput, PortError> {
        let name = path.display().to_string();
        let file = OpenOptions::new()
            .write(true)
            .open(path)
            .map_err(|source| PortError::Open {
                name: name.clone(),
                source,
            })?;
        Ok(DeviceOutput { name, file })
    }
}

fn read_loop(mut file: File, start: Instant, tx: SyncSender<Incoming>, overflow: Arc<AtomicU64>) {
    let mut parser = StreamParser::new();
    let mut buf = [0u8; 256];
    loop {
        let n = match file.read(&mut buf) {
            Ok(0) | Err(_) => break,
            Ok(n) => n,
        };
        let time = start.elapsed().as_secs_f64();
        for &b in &buf[..n] {
            if let Some(msg) = parser.push(b, time) {
                match tx.try_send(Incoming::Message(msg)) {
                    Ok(()) => {}
                    Err(TrySendError::Full(_)) => {
                        overflow.fetch_add(1, Ordering::Relaxed);
                    }
                    Err(TrySendError::Disconnected(_)) => return,
                }
            }
        }
    }
    let _ = tx.send(Incoming::Closed);
}

impl MidiInput for DeviceInput {
    fn poll(&mut self) -> Result<Vec<RawMidiMessage>, PortError> {
        if self.closed {
            return Err(PortError::Disconnected(self.name.clone()));
        }
        let mut out = Vec::new();
        loop {
            match self.rx.try_recv() {
                Ok(Incoming::Message(m)) => out.push(m),
                Ok(Incoming::Closed) | Err(TryRecvError::Disconnected) => {
                    self.closed = true;
                    if out.is_empty() {
                        return Err(PortError::Disconnected(self.name.clone()));
                    }
                    return Ok(out);
                }
                Err(TryRecvError::Empty) => return Ok(out),
            }
        }
    }

    fn overflowed(&self) -> u64 {
        self.overflow.load(Ordering::Relaxed)
    }
}

pub struct DeviceOutput {
    name: String,
    file: File,
}

impl MidiOutput for DeviceOutput {
    fn send(&mut self, msg: &RawMidiMessage) -> Result<(), PortError> {
        self.file.write_all(&msg.bytes()).map_err(|source| PortError::Write {
            name: self.name.clone(),
            source,
        })
    }
}

/// In-process input fed through a bounded queue; dropping every sender
/// reads as the port disappearing.
pub struct MemoryInput {
    rx: Receiver<RawMidiMessage>,
}

impl MemoryInput {
    pub fn new(capacity: usize) -> (SyncSender<RawMidiMessage>, Self) {
        let (tx, rx) = mpsc::sync_channel(capacity);
        (tx, Self { rx })
    }
}

impl MidiInput for MemoryInput {
    fn poll(&mut self) -> Result<Vec<RawMidiMessage>, PortError> {
        let mut out = Vec::new();
        loop {
            match self.rx.try_recv() {
                Ok(m) => out.push(m),
                Err(TryRecvError::Empty) => return Ok(out),
                Err(TryRecvError::Disconnected) if out.is_empty() => {
                    return Err(PortError::Disconnected("memory".into()))
                }
                Err(TryRecvError::Disconnected) => return Ok(out),
            }
        }
    }
}

/// Collects sent messages.
#[derive(Clone, Default)]
pub struct MemoryOutput {
    pub sent: Arc<Mutex<Vec<RawMidiMessage>>>,
}

impl MidiOutput for MemoryOutput {
    fn send(&mut self, msg: &RawMidiMessage) -> Result<(), PortError> {
        self.sent.lock().expect("output lock").push(msg.clone());
        Ok(())
    }
}
