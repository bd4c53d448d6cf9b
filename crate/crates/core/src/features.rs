//! Streaming feature extraction from piano MIDI events.

use std::collections::VecDeque;

use serde::Deserialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MidiEventKind {
    NoteOn { note: u8, velocity: u8 },
    NoteOff { note: u8 },
    SustainPedal { down: bool },
}

/// A decoded input event, timestamped in seconds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MidiEventIn {
    pub kind: MidiEventKind,
    pub time: f64,
}

impl MidiEventIn {
    /// Builds a note-on; velocity 0 becomes a note-off.
    pub fn note_on(time: f64, note: u8, velocity: u8) -> Self {
        let kind = if velocity == 0 {
            MidiEventKind::NoteOff { note }
        } else {
            MidiEventKind::NoteOn { note, velocity }
        };
        Self { kind, time }
    }

    pub fn note_off(time: f64, note: u8) -> Self {
        Self {
            kind: MidiEventKind::NoteOff { note },
            time,
        }
    }

    pub fn pedal(time: f64, down: bool) -> Self {
        Self {
            kind: MidiEventKind::SustainPedal { down },
            time,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FeatureConfig {
    pub bpm: f64,
    pub beats_per_bar: u32,
    pub slots_per_bar: u32,
    pub register_split_note: u8,
    pub window_t_seconds: f64,
    pub no_note_sentinel_seconds: f64,
}

impl Default for FeatureConfig {
    fn default() -> Self {
        Self {
            bpm: 120.0,
            beats_per_bar: 4,
            slots_per_bar: 16,
            register_split_note: 60,
            window_t_seconds: 4.0,
            no_note_sentinel_seconds: 3600.0,
        }
    }
}

impl FeatureConfig {
    /// Length of one bar in seconds.
    pub fn bar_seconds(&self) -> f64 {
        60.0 / self.bpm * self.beats_per_bar as f64
    }

    pub fn validate(&self) -> Result<(), String> {
        if !(self.bpm.is_finite() && self.bpm > 0.0) {
            return Err(format!("bpm must be positive, got {}", self.bpm));
        }
        if self.beats_per_bar == 0 {
            return Err("beats_per_bar must be at least 1".into());
        }
        if self.slots_per_bar == 0 {
            return Err("slots_per_bar must be at least 1".into());
        }
        if self.register_split_note > 127 {
            return Err(format!("register_split_note {} is not a MIDI note", self.register_split_note));
        }
        if !(self.window_t_seconds.is_finite() && self.window_t_seconds > 0.0) {
            return Err(format!("window_t_seconds must be positive, got {}", self.window_t_seconds));
        }
        if self.no_note_sentinel_seconds.is_nan() || self.no_note_sentinel_seconds <= 0.0 {
            return Err("no_note_sentinel_seconds must be positive".into());
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Register {
    Low,
    High,
    Full,
}

/// Crisp features for one clock cycle.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureFrame {
    pub cycle_time: f64,
    pub velocity_sum: f64,
    pub density_full: f64,
    pub density_low: f64,
    pub density_high: f64,
    pub pedal_down: bool,
    pub time_since_last_note: f64,
    /// Seconds since the sustain pedal last went down.
    pub time_since_pedal: f64,
    pub bar_index: u64,
    pub bar_in_32: u32,
    pub time_in_bar: f64,
    pub newer_avg: f64,
    pub older_avg: f64,
}

impl FeatureFrame {
    /// Position within the repeating 32-bar cycle, in seconds.
    pub fn bar_position(&self, bar_seconds: f64) -> f64 {
        self.bar_in_32 as f64 * bar_seconds + self.time_in_bar
    }
}

#[derive(Debug, Clone, Copy)]
struct Onset {
    time: f64,
    note: u8,
    velocity: u8,
}

#[derive(Debug, Clone)]
pub struct ExtractorState {
    config: FeatureConfig,
    bar_seconds: f64,
    onsets: VecDeque<Onset>,
    pedal_down: bool,
    last_pedal_down: Option<f64>,
    last_note: Option<f64>,
    origin: Option<f64>,
    cycle_velocity: f64,
    latest: f64,
    dropped: u64,
}

impl ExtractorState {
    pub fn new(config: FeatureConfig) -> Self {
        Self {
            bar_seconds: config.bar_seconds(),
            config,
            onsets: VecDeque::new(),
            pedal_down: false,
            last_pedal_down: None,
            last_note: None,
            origin: None,
            cycle_velocity: 0.0,
            latest: f64::NEG_INFINITY,
            dropped: 0,
        }
    }

    pub fn config(&self) -> &FeatureConfig {
        &self.config
    }

    pub fn bar_seconds(&self) -> f64 {
        self.bar_seconds
    }

    /// Time of the first note, which defines beat one.
    pub fn origin(&self) -> Option<f64> {
        self.origin
    }

    pub fn last_note(&self) -> Option<f64> {
        self.last_note
    }

    /// Events rejected for arriving out of order.
    pub fn dropped(&self) -> u64 {
        self.dropped
    }

    /// Records an event. Returns `false` if it was older than an event
    /// already ingested and has been dropped.
    pub fn ingest(&mut self, event: MidiEventIn) -> bool {
        if event.time.is_nan() || event.time < self.latest {
            self.dropped += 1;
            log::warn!("dropping out-of-order event at {:.6} s (latest {:.6} s)", event.time, self.latest);
            return false;
        }
        self.latest = event.time;
        match event.kind {
            MidiEventKind::NoteOn { note, velocity } if velocity > 0 => {
                self.onsets.push_back(Onset {
                    time: event.time,
                    note,
                    velocity,
                });
                self.cycle_velocity += velocity as f64;
                self.last_note = Some(event.time);
                self.origin.get_or_insert(event.time);
            }
            MidiEventKind::NoteOn { .. } | MidiEventKind::NoteOff { .. } => {}
            MidiEventKind::SustainPedal { down } => {
                if down && !self.pedal_down {
                    self.last_pedal_down = Some(event.time);
                }
                self.pedal_down = down;
            }
        }
        self.prune(event.time);
        true
    }

    fn prune(&mut self, now: f64) {
        let horizon = self.bar_seconds.max(self.config.window_t_seconds);
        while self.onsets.front().is_some_and(|o| o.time < now - horizon) {
            self.onsets.pop_front();
        }
    }

    fn in_register(&self, note: u8, register: Register) -> bool {
        match register {
            Register::Low => note < self.config.register_split_note,
            Register::High => note >= self.config.register_split_note,
            Register::Full => true,
        }
    }

    /// Share of the slots of the trailing bar `(now - T, now]` that hold at
    /// least one onset in `register`, scaled to 0..=127.
    pub fn rhythmic_density(&self, register: Register, now: f64) -> f64 {
        if self.origin.is_none() {
            return 0.0;
        }
        let slots = self.config.slots_per_bar as usize;
        let start = now - self.bar_seconds;
        let width = self.bar_seconds / slots as f64;
        let mut occupied = vec![false; slots];
        for o in &self.onsets {
            if o.time <= start || o.time > now || !self.in_register(o.note, register) {
                continue;
            }
            let slot = (((o.time - start) / width) as usize).min(slots - 1);
            occupied[slot] = true;
        }
        let count = occupied.iter().filter(|&&b| b).count();
        count as f64 / slots as f64 * 127.0
    }

    /// Mean velocity of the newer half `(now - t/2, now]` and the older half
    /// `[now - t, now - t/2]` of the velocity window. Empty halves give 0.
    pub fn velocity_averages(&self, now: f64) -> (f64, f64) {
        let t = self.config.window_t_seconds;
        let split = now - t / 2.0;
        let (mut newer, mut n_newer, mut older, mut n_older) = (0.0, 0u32, 0.0, 0u32);
        for o in &self.onsets {
            if o.time > now || o.time < now - t {
                continue;
            }
            if o.time > split {
                newer += o.velocity as f64;
                n_newer += 1;
            } else {
                older += o.velocity as f64;
                n_older += 1;
            }
        }
        let mean = |s: f64, n: u32| if n == 0 { 0.0 } else { s / n as f64 };
        (mean(newer, n_newer), mean(older, n_older))
    }

    /// Assembles the frame for the cycle at `now` and resets the per-cycle
    /// velocity accumulator.
    pub fn make_frame(&mut self, now: f64) -> FeatureFrame {
        let sentinel = self.config.no_note_sentinel_seconds;
        let (bar_index, time_in_bar) = match self.origin {
            Some(origin) if now > origin => {
                let elapsed = now - origin;
                let bar = (elapsed / self.bar_seconds).floor();
                let within = (elapsed - bar * self.bar_seconds).clamp(0.0, self.bar_seconds);
                if within >= self.bar_seconds {
                    (bar as u64 + 1, 0.0)
                } else {
                    (bar as u64, within)
                }
            }
            _ => (0, 0.0),
        };
        let (newer_avg, older_avg) = self.velocity_averages(now);
        let frame = FeatureFrame {
            cycle_time: now,
            velocity_sum: self.cycle_velocity.min(127.0),
            density_full: self.rhythmic_density(Register::Full, now),
            density_low: self.rhythmic_density(Register::Low, now),
            density_high: self.rhythmic_density(Register::High, now),
            pedal_down: self.pedal_down,
            time_since_last_note: self.last_note.map_or(sentinel, |t| (now - t).max(0.0)),
            time_since_pedal: self.last_pedal_down.map_or(sentinel, |t| (now - t).max(0.0)),
            bar_index,
            bar_in_32: (bar_index % 32) as u32,
            time_in_bar,
            newer_avg,
            older_avg,
        };
        self.cycle_velocity = 0.0;
        frame
    }
}
