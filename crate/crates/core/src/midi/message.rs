use crate::features::MidiEventIn;

use super::MidiError;

pub const NOTE_OFF: u8 = 0x80;
pub const NOTE_ON: u8 = 0x90;
pub const CONTROL_CHANGE: u8 = 0xB0;
pub const PROGRAM_CHANGE: u8 = 0xC0;
pub const SUSTAIN_PEDAL: u8 = 64;

/// A channel message with its timestamp in seconds.
#[derive(Debug, Clone, PartialEq)]
pub struct RawMidiMessage {
    pub time: f64,
    pub status: u8,
    pub data: Vec<u8>,
}

impl RawMidiMessage {
    pub fn new(time: f64, status: u8, data: &[u8]) -> Self {
        Self {
            time,
            status,
            data: data.to_vec(),
        }
    }

    pub fn bytes(&self) -> Vec<u8> {
        let mut b = vec![self.status];
        b.extend_from_slice(&self.data);
        b
    }

    pub fn channel(&self) -> u8 {
        self.status & 0x0F
    }

    pub fn kind(&self) -> u8 {
        self.status & 0xF0
    }
}

/// Number of data bytes that follow a channel status byte.
pub fn data_len(status: u8) -> Option<usize> {
    match status & 0xF0 {
        0x80 | 0x90 | 0xA0 | 0xB0 | 0xE0 => Some(2),
        0xC0 | 0xD0 => Some(1),
        _ => None,
    }
}

/// Maps notes and the sustain pedal to input events; everything else is
/// `Ok(None)`.
pub fn decode(msg: &RawMidiMessage) -> Result<Option<MidiEventIn>, MidiError> {
    let expected = data_len(msg.status);
    if expected.is_none() || expected != Some(msg.data.len()) || msg.data.iter().any(|&b| b > 0x7F) {
        return Err(MidiError::Malformed(msg.bytes()));
    }
    let t = msg.time;
    Ok(match (msg.kind(), msg.data.as_slice()) {
        (NOTE_ON, &[note, velocity]) => Some(MidiEventIn::note_on(t, note, velocity)),
        (NOTE_OFF, &[note, _]) => Some(MidiEventIn::note_off(t, note)),
        (CONTROL_CHANGE, &[SUSTAIN_PEDAL, value]) => Some(MidiEventIn::pedal(t, value >= 64)),
        _ => None,
    })
}

/// Assembles channel messages from a raw byte stream, with running status.
/// Real-time bytes are skipped; system exclusive and other system common
/// messages are discarded.
#[derive(Debug, Default)]
pub struct StreamParser {
    status: Option<u8>,
    pending: Vec<u8>,
    in_sysex: bool,
    malformed: u64,
}

impl StreamParser {
    pub fn new() -> Self {
        Self::default()
    }

    /// Stray data bytes seen without a status.
    pub fn malformed(&self) -> u64 {
        self.malformed
    }

    pub fn push(&mut self, byte: u8, time: f64) -> Option<RawMidiMessage> {
        if byte >= 0xF8 {
            return None;
        }
        if byte >= 0x80 {
            self.pending.clear();
            self.in_sysex = byte == 0xF0;
            self.status = if data_len(byte).is_some() { Some(byte) } else { None };
            return None;
        }
        if self.in_sysex {
            return None;
        }
        let Some(status) = self.status else {
            self.malformed += 1;
            return None;
        };
        self.pending.push(byte);
        if Some(self.pending.len()) == data_len(status) {
            let data = std::mem::take(&mut self.pending);
            return Some(RawMidiMessage { time, status, data });
        }
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::features::MidiEventKind;

    fn kind(bytes: &[u8]) -> Option<MidiEventKind> {
        decode(&RawMidiMessage::new(0.0, bytes[0], &bytes[1..])).unwrap().map(|e| e.kind)
    }

    #[test]
    fn decodes_notes_and_pedal() {
        assert_eq!(kind(&[0x90, 60, 100]), Some(MidiEventKind::NoteOn { note: 60, velocity: 100 }));
        assert_eq!(kind(&[0xB0, 64, 127]), Some(MidiEventKind::SustainPedal { down: true }));
        assert_eq!(kind(&[0xB3, 64, 10]), Some(MidiEventKind::SustainPedal { down: false }));
        assert_eq!(kind(&[0x90, 60, 0]), Some(MidiEventKind::NoteOff { note: 60 }));
        assert_eq!(kind(&[0x85, 60, 40]), Some(MidiEventKind::NoteOff { note: 60 }));
        assert_eq!(kind(&[0xE0, 0, 64]), None);
        assert_eq!(kind(&[0xB0, 7, 100]), None);
    }

    #[test]
    fn rejects_bad_framing() {
        assert!(decode(&RawMidiMessage::new(0.0, 0x90, &[60])).is_err());
        assert!(decode(&RawMidiMessage::new(0.0, 0x90, &[60, 200])).is_err());
        assert!(decode(&RawMidiMessage::new(0.0, 0xF0, &[])).is_err());
    }

    #[test]
    fn stream_running_status() {
        let mut p = StreamParser::new();
        let bytes = [0x42, 0x90, 60, 0xF8, 100, 62, 90, 0xF0, 1, 2, 0xF7, 0xB0, 64, 127];
        let msgs: Vec<_> = bytes.iter().filter_map(|&b| p.push(b, 1.0)).map(|m| m.bytes()).collect();
        assert_eq!(msgs, vec![vec![0x90, 60, 100], vec![0x90, 62, 90], vec![0xB0, 64, 127]]);
        assert_eq!(p.malformed(), 1);
    }
}
