//! Drummer mapping files and the encoder from control outputs to MIDI.
//!
//! ```text
//! # comment
//! channel = 9
//! intensity = cc 20
//! complexity = cc 21
//! pattern.Outro = program 10
//! pattern.Fill 1 = note 40 100
//! mute.Kick and Snare = cc 30 127; cc 31 127
//! ```
//!
//! Pattern, mute and unmute entries take one or more messages separated by
//! `;`: `cc <controller> <value>`, `program <number>`, or
//! `note <note> [velocity]` (sent as a note-on followed by a note-off).

use std::collections::BTreeMap;

use crate::catalog::{MUTES, NO_CHANGE, PATTERNS};
use crate::control::{ControlOutputs, NONE};

use super::message::{CONTROL_CHANGE, NOTE_ON, PROGRAM_CHANGE};
use super::{MidiError, RawMidiMessage};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MappedMessage {
    Cc { controller: u8, value: u8 },
    Program(u8),
    Note { note: u8, velocity: u8 },
}

impl MappedMessage {
    fn push(&self, channel: u8, time: f64, out: &mut Vec<RawMidiMessage>) {
        match *self {
            Self::Cc { controller, value } => {
                out.push(RawMidiMessage::new(time, CONTROL_CHANGE | channel, &[controller, value]))
            }
            Self::Program(p) => out.push(RawMidiMessage::new(time, PROGRAM_CHANGE | channel, &[p])),
            Self::Note { note, velocity } => {
                out.push(RawMidiMessage::new(time, NOTE_ON | channel, &[note, velocity]));
                out.push(RawMidiMessage::new(time, NOTE_ON | channel, &[note, 0]));
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DrummerMapping {
    pub channel: u8,
    pub cc_intensity: u8,
    pub cc_complexity: u8,
    pub pattern: BTreeMap<String, Vec<MappedMessage>>,
    pub mute: BTreeMap<String, Vec<MappedMessage>>,
    pub unmute: BTreeMap<String, Vec<MappedMessage>>,
}

fn number(word: Option<&str>, what: &str, max: u8, line: usize) -> Result<u8, MidiError> {
    let err = |message: String| MidiError::Mapping { line, message };
    let word = word.ok_or_else(|| err(format!("missing {what}")))?;
    let n: u32 = word.parse().map_err(|_| err(format!("{what} `{word}` is not a number")))?;
    if n > max as u32 {
        return Err(err(format!("{what} {n} is above {max}")));
    }
    Ok(n as u8)
}

fn parse_message(text: &str, line: usize) -> Result<MappedMessage, MidiError> {
    let mut words = text.split_whitespace();
    let kind = words.next().ok_or(MidiError::Mapping {
        line,
        message: "empty message".into(),
    })?;
    let msg = match kind {
        "cc" => MappedMessage::Cc {
            controller: number(words.next(), "controller", 119, line)?,
            value: number(words.next(), "value", 127, line)?,
        },
        "program" => MappedMessage::Program(number(words.next(), "program", 127, line)?),
        "note" => {
            let note = number(words.next(), "note", 127, line)?;
            let velocity = match words.next() {
                Some(v) => number(Some(v), "velocity", 127, line)?,
                None => 127,
            };
            if velocity == 0 {
                return Err(MidiError::Mapping {
                    line,
                    message: "note velocity must be at least 1".into(),
                });
            }
            MappedMessage::Note { note, velocity }
        }
        other => {
            return Err(MidiError::Mapping {
                line,
                message: format!("unknown message kind `{other}`"),
            })
        }
    };
    if let Some(extra) = words.next() {
        return Err(MidiError::Mapping {
            line,
            message: format!("unexpected `{extra}`"),
        });
    }
    Ok(msg)
}

fn category_name(raw: &str) -> &str {
    let raw = raw.trim();
    raw.strip_prefix('"').and_then(|s| s.strip_suffix('"')).unwrap_or(raw)
}

impl DrummerMapping {
    pub fn parse(src: &str) -> Result<Self, MidiError> {
        let (mut channel, mut cc_intensity, mut cc_complexity) = (None, None, None);
        let (mut pattern, mut mute, mut unmute) = (BTreeMap::new(), BTreeMap::new(), BTreeMap::new());
        for (i, raw) in src.lines().enumerate() {
            let line = i + 1;
            let text = raw.split('#').next().unwrap_or("").trim();
            if text.is_empty() {
                continue;
            }
            let (key, value) = text.split_once('=').ok_or(MidiError::Mapping {
                line,
                message: "expected `key = value`".into(),
            })?;
            let (key, value) = (key.trim(), value.trim());
            let single_cc = |value: &str| -> Result<u8, MidiError> {
                let mut w = value.split_whitespace();
                if w.next() != Some("cc") {
                    return Err(MidiError::Mapping {
                        line,
                        message: format!("`{key}` takes `cc <controller>`"),
                    });
                }
                let n = number(w.next(), "controller", 119, line)?;
                match w.next() {
                    Some(extra) => Err(MidiError::Mapping {
                        line,
                        message: format!("unexpected `{extra}`"),
                    }),
                    None => Ok(n),
                }
            };
            match key {
                "channel" => channel = Some(number(Some(value), "channel", 15, line)?),
                "intensity" => cc_intensity = Some(single_cc(value)?),
                "complexity" => cc_complexity = Some(single_cc(value)?),
                _ => {
                    let (table, name) = if let Some(n) = key.strip_prefix("pattern.") {
                        (&mut pattern, n)
                    } else if let Some(n) = key.strip_prefix("mute.") {
                        (&mut mute, n)
                    } else if let Some(n) = key.strip_prefix("unmute.") {
                        (&mut unmute, n)
                    } else {
                        return Err(MidiError::Mapping {
                            line,
                            message: format!("unknown key `{key}`"),
                        });
                    };
                    let msgs = value
                        .split(';')
                        .map(|m| parse_message(m, line))
                        .collect::<Result<Vec<_>, _>>()?;
                    if table.insert(category_name(name).to_string(), msgs).is_some() {
                        return Err(MidiError::Mapping {
                            line,
                            message: format!("`{key}` is mapped twice"),
                        });
                    }
                }
            }
        }
        let missing = |what: &str| MidiError::Mapping {
            line: 0,
            message: format!("`{what}` is not set"),
        };
        let map = Self {
            channel: channel.ok_or_else(|| missing("channel"))?,
            cc_intensity: cc_intensity.ok_or_else(|| missing("intensity"))?,
            cc_complexity: cc_complexity.ok_or_else(|| missing("complexity"))?,
            pattern,
            mute,
            unmute,
        };
        map.check_complete()?;
        Ok(map)
    }

    /// Every pattern except 'No change' and every mute level except 'None'
    /// must have messages.
    pub fn check_complete(&self) -> Result<(), MidiError> {
        for (name, _) in PATTERNS {
            if name != NO_CHANGE && !self.pattern.contains_key(name) {
                return Err(MidiError::Unmapped {
                    output: "pattern",
                    category: name.into(),
                });
            }
        }
        for (table, output) in [(&self.mute, "mute"), (&self.unmute, "unmute")] {
            for (name, _) in MUTES {
                if name != NONE && !table.contains_key(name) {
                    return Err(MidiError::Unmapped {
                        output,
                        category: name.into(),
                    });
                }
            }
        }
        Ok(())
    }
}

/// 0..=127 with halves rounded up.
pub fn midi_value(x: f64) -> u8 {
    (x + 0.5).floor().clamp(0.0, 127.0) as u8
}

/// Messages for the change from `prev` to `out`, in the order intensity,
/// complexity, mute, unmute, pattern. Unchanged values send nothing.
pub fn encode(
    out: &ControlOutputs,
    prev: Option<&ControlOutputs>,
    map: &DrummerMapping,
    time: f64,
) -> Result<Vec<RawMidiMessage>, MidiError> {
    let mut msgs = Vec::new();
    let ch = map.channel;
    for (value, old, cc) in [
        (out.intensity, prev.map(|p| p.intensity), map.cc_intensity),
        (out.complexity, prev.map(|p| p.complexity), map.cc_complexity),
    ] {
        let v = midi_value(value);
        if old.map(midi_value) != Some(v) {
            MappedMessage::Cc { controller: cc, value: v }.push(ch, time, &mut msgs);
        }
    }
    let categorical = [
        (&out.mute, prev.map(|p| &p.mute), &map.mute, "mute", NONE),
        (&out.unmute, prev.map(|p| &p.unmute), &map.unmute, "unmute", NONE),
        (&out.pattern, prev.map(|p| &p.pattern), &map.pattern, "pattern", NO_CHANGE),
    ];
    for (value, old, table, output, quiet) in categorical {
        if value == quiet || old == Some(value) {
            continue;
        }
        let list = table.get(value.as_str()).ok_or_else(|| MidiError::Unmapped {
            output,
            category: value.clone(),
        })?;
        for m in list {
            m.push(ch, time, &mut msgs);
        }
    }
    Ok(msgs)
}
