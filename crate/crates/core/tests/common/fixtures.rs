//! Synthetic piano performances used as replay fixtures. Everything is
//! generated from integer arithmetic so the files are reproducible; the
//! committed `.mid` files must equal what these functions build.

use accompany::midi::{write_smf, RawMidiMessage, CONTROL_CHANGE, NOTE_OFF, NOTE_ON};

/// Seconds per bar at the default 120 BPM in 4/4.
pub const BAR: f64 = 2.0;
/// Sixteenth-note slot.
pub const SLOT: f64 = BAR / 16.0;
const NOTE_LEN: f64 = 0.1;

pub const CRESCENDO_BARS: u32 = 16;
pub const DROP_AT: f64 = 8.0 * BAR;
pub const START_AT: f64 = 2.0;

struct Score {
    msgs: Vec<RawMidiMessage>,
}

impl Score {
    fn new() -> Self {
        Self { msgs: Vec::new() }
    }

    fn note(&mut self, time: f64, note: u8, velocity: u8) {
        self.msgs.push(RawMidiMessage::new(time, NOTE_ON, &[note, velocity]));
        self.msgs.push(RawMidiMessage::new(time + NOTE_LEN, NOTE_OFF, &[note, 0]));
    }

    fn pedal(&mut self, time: f64, down: bool) {
        self.msgs
            .push(RawMidiMessage::new(time, CONTROL_CHANGE, &[64, if down { 127 } else { 0 }]));
    }

    fn finish(mut self) -> Vec<RawMidiMessage> {
        self.msgs.sort_by(|a, b| a.time.total_cmp(&b.time));
        self.msgs
    }
}

/// One note per onset, alternating between left hand (below middle C) and
/// right hand, `every` slots apart.
fn alternating(s: &mut Score, start: f64, bars: u32, every: u32, velocity: impl Fn(u32) -> u8) {
    let slots = bars * 16;
    let mut i = 0;
    while i < slots {
        let note = if (i / every).is_multiple_of(2) { 43 + (i % 5) as u8 } else { 67 + (i % 7) as u8 };
        s.note(start + i as f64 * SLOT, note, velocity(i));
        i += every;
    }
}

/// Sixteen bars with velocity rising linearly in time from 30 to 120 and
/// the rhythm thickening from quarters to sixteenths. The last onset
/// carries the peak velocity.
pub fn crescendo() -> Vec<RawMidiMessage> {
    let mut s = Score::new();
    let last = CRESCENDO_BARS * 16 - 1;
    for slot in 0..=last {
        let every = match slot / 16 {
            0..=3 => 4,
            4..=7 => 2,
            _ => 1,
        };
        if slot % every != 0 {
            continue;
        }
        let v = (30 + (90 * slot + last / 2) / last) as u8;
        let note = if (slot / every).is_multiple_of(2) { 40 + (slot % 7) as u8 } else { 64 + (slot % 9) as u8 };
        s.note(slot as f64 * SLOT, note, v);
    }
    s.pedal(12.0 * BAR, true);
    s.pedal(14.0 * BAR, false);
    s.finish()
}

/// Time of the loudest onset in [`crescendo`].
pub fn crescendo_peak() -> f64 {
    crescendo()
        .iter()
        .filter(|m| m.status & 0xF0 == NOTE_ON && m.data[1] > 0)
        .fold((0u8, 0.0), |(v, t), m| if m.data[1] >= v { (m.data[1], m.time) } else { (v, t) })
        .1
}

/// Eight loud bars of eighth notes, then eight very soft ones.
pub fn sudden_drop() -> Vec<RawMidiMessage> {
    let mut s = Score::new();
    alternating(&mut s, 0.0, 8, 2, |_| 100);
    alternating(&mut s, DROP_AT, 8, 2, |_| 20);
    s.finish()
}

/// Sixteen bars of eighth notes at one velocity.
pub fn constant() -> Vec<RawMidiMessage> {
    let mut s = Score::new();
    alternating(&mut s, 0.0, 16, 2, |_| 64);
    s.finish()
}

/// Silence, eight bars of playing, then silence until the end of the tail.
pub fn start_stop() -> Vec<RawMidiMessage> {
    let mut s = Score::new();
    alternating(&mut s, START_AT, 8, 2, |i| 60 + (i % 16) as u8);
    s.finish()
}

pub fn empty() -> Vec<RawMidiMessage> {
    Vec::new()
}

pub fn all() -> Vec<(&'static str, Vec<RawMidiMessage>)> {
    vec![
        ("crescendo.mid", crescendo()),
        ("sudden_drop.mid", sudden_drop()),
        ("constant.mid", constant()),
        ("start_stop.mid", start_stop()),
        ("empty.mid", empty()),
    ]
}

pub fn smf(msgs: &[RawMidiMessage]) -> Vec<u8> {
    write_smf(msgs)
}
