//! Standard MIDI File reading (formats 0 and 1) and writing (format 0).

use std::path::Path;

use super::message::{data_len, RawMidiMessage};
use super::MidiError;

/// Ticks per quarter note in written files.
pub const WRITE_DIVISION: u16 = 960;
/// Microseconds per quarter note in written files.
pub const WRITE_TEMPO: u32 = 500_000;

const DEFAULT_TEMPO: u32 = 500_000;

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn err(&self, message: impl Into<String>) -> MidiError {
        MidiError::Parse {
            offset: self.pos,
            message: message.into(),
        }
    }

    fn take(&mut self, n: usize) -> Result<&'a [u8], MidiError> {
        if self.bytes.len() - self.pos < n {
            return Err(self.err(format!("unexpected end of data, wanted {n} bytes")));
        }
        let s = &self.bytes[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }

    fn u8(&mut self) -> Result<u8, MidiError> {
        Ok(self.take(1)?[0])
    }

    fn u16(&mut self) -> Result<u16, MidiError> {
        let b = self.take(2)?;
        Ok(u16::from_be_bytes([b[0], b[1]]))
    }

    fn u32(&mut self) -> Result<u32, MidiError> {
        let b = self.take(4)?;
        Ok(u32::from_be_bytes([b[0], b[1], b[2], b[3]]))
    }

    fn vlq(&mut self) -> Result<u32, MidiError> {
        let start = self.pos;
        let mut v: u32 = 0;
        for _ in 0..4 {
            let b = self.u8()?;
            v = (v << 7) | (b & 0x7F) as u32;
            if b & 0x80 == 0 {
                return Ok(v);
            }
        }
        Err(MidiError::Parse {
            offset: start,
            message: "variable-length quantity longer than 4 bytes".into(),
        })
    }
}

enum Timing {
    Metrical(u16),
    /// Seconds per tick.
    Smpte(f64),
}

enum Item {
    Tempo(u32),
    Channel(u8, Vec<u8>),
}

struct Timed {
    tick: u64,
    track: usize,
    item: Item,
}

/// Parses an SMF held in memory into time-ordered channel messages.
pub fn read_smf(bytes: &[u8]) -> Result<Vec<RawMidiMessage>, MidiError> {
    let mut r = Reader { bytes, pos: 0 };
    if r.take(4).map_err(|_| r.err("missing MThd header"))? != b"MThd" {
        return Err(MidiError::Parse {
            offset: 0,
            message: "not a Standard MIDI File (no MThd)".into(),
        });
    }
    let header_len = r.u32()? as usize;
    if header_len < 6 {
        return Err(r.err(format!("header length {header_len} is too short")));
    }
    let format_at = r.pos;
    let format = r.u16()?;
    let ntracks = r.u16()? as usize;
    let division = r.u16()?;
    r.take(header_len - 6)?;
    if format > 1 {
        return Err(MidiError::Parse {
            offset: format_at,
            message: format!("unsupported SMF format {format}"),
        });
    }
    let timing = if division & 0x8000 != 0 {
        let fps = match -((division >> 8) as u8 as i8) {
            29 => 29.97,
            f @ (24 | 25 | 30) => f as f64,
            other => return Err(r.err(format!("unsupported SMPTE rate {other}"))),
        };
        let tpf = (division & 0xFF) as f64;
        if tpf == 0.0 {
            return Err(r.err("SMPTE division with zero ticks per frame"));
        }
        Timing::Smpte(1.0 / (fps * tpf))
    } else {
        if division == 0 {
            return Err(MidiError::Parse {
                offset: format_at + 4,
                message: "division of zero ticks per quarter".into(),
            });
        }
        Timing::Metrical(division)
    };

    let mut events = Vec::new();
    for track in 0..ntracks {
        if r.pos == bytes.len() {
            break;
        }
        let id = r.take(4)?;
        let len = r.u32()? as usize;
        if id != b"MTrk" {
            // unknown chunk types are skipped
            r.take(len)?;
            continue;
        }
        let body_start = r.pos;
        let body = r.take(len)?;
        read_track(body, body_start, track, &mut events)?;
    }

    events.sort_by_key(|e| (e.tick, e.track));
    let mut out = Vec::new();
    let mut tempo = DEFAULT_TEMPO;
    let (mut last_tick, mut seconds) = (0u64, 0.0f64);
    for e in events {
        let dt = (e.tick - last_tick) as f64;
        seconds += match timing {
            Timing::Metrical(div) => dt * tempo as f64 / 1e6 / div as f64,
            Timing::Smpte(spt) => dt * spt,
        };
        last_tick = e.tick;
        match e.item {
            Item::Tempo(t) => tempo = t,
            Item::Channel(status, data) => out.push(RawMidiMessage {
                time: seconds,
                status,
                data,
            }),
        }
    }
    Ok(out)
}

fn read_track(body: &[u8], base: usize, track: usize, out: &mut Vec<Timed>) -> Result<(), MidiError> {
    let mut r = Reader { bytes: body, pos: 0 };
    let at = |r: &Reader, message: String| MidiError::Parse {
        offset: base + r.pos,
        message,
    };
    let mut tick = 0u64;
    let mut running: Option<u8> = None;
    while r.pos < body.len() {
        tick += r.vlq().map_err(|_| at(&r, "bad delta time".into()))? as u64;
        let first = r.u8().map_err(|_| at(&r, "truncated event".into()))?;
        match first {
            0xFF => {
                let kind = r.u8().map_err(|_| at(&r, "truncated meta event".into()))?;
                let len = r.vlq().map_err(|_| at(&r, "bad meta length".into()))? as usize;
                let data = r.take(len).map_err(|_| at(&r, "truncated meta event".into()))?;
                match kind {
                    0x2F => return Ok(()),
                    0x51 if len == 3 => {
                        let t = u32::from_be_bytes([0, data[0], data[1], data[2]]);
                        if t == 0 {
                            return Err(at(&r, "tempo of zero".into()));
                        }
                        out.push(Timed {
                            tick,
                            track,
                            item: Item::Tempo(t),
                        });
                    }
                    _ => {}
                }
            }
            0xF0 | 0xF7 => {
                let len = r.vlq().map_err(|_| at(&r, "bad sysex length".into()))? as usize;
                r.take(len).map_err(|_| at(&r, "truncated sysex".into()))?;
            }
            _ => {
                let (status, first_data) = if first & 0x80 != 0 {
                    (first, None)
                } else {
                    let s = running.ok_or_else(|| at(&r, "data byte without running status".into()))?;
                    (s, Some(first))
                };
                let n = data_len(status).ok_or_else(|| at(&r, format!("unexpected status byte {status:#04X}")))?;
                running = Some(status);
                let mut data = Vec::with_capacity(n);
                if let Some(b) = first_data {
                    data.push(b);
                }
                while data.len() < n {
                    let b = r.u8().map_err(|_| at(&r, "truncated channel message".into()))?;
                    if b & 0x80 != 0 {
                        return Err(at(&r, format!("status byte {b:#04X} inside channel message")));
                    }
                    data.push(b);
                }
                out.push(Timed {
                    tick,
                    track,
                    item: Item::Channel(status, data),
                });
            }
        }
    }
    Ok(())
}

pub fn read_midi_file(path: &Path) -> Result<Vec<RawMidiMessage>, MidiError> {
    read_smf(&std::fs::read(path)?)
}

fn push_vlq(out: &mut Vec<u8>, mut v: u32) {
    let mut stack = vec![(v & 0x7F) as u8];
    v >>= 7;
    while v > 0 {
        stack.push((v & 0x7F) as u8 | 0x80);
        v >>= 7;
    }
    out.extend(stack.iter().rev());
}

/// Encodes messages as a format-0 file at 120 BPM. Timestamps are rounded
/// to the nearest tick; messages must be in time order.
pub fn write_smf(messages: &[RawMidiMessage]) -> Vec<u8> {
    let ticks_per_second = WRITE_DIVISION as f64 * 1e6 / WRITE_TEMPO as f64;
    let mut track = Vec::new();
    track.push(0);
    track.extend_from_slice(&[0xFF, 0x51, 0x03]);
    track.extend_from_slice(&WRITE_TEMPO.to_be_bytes()[1..]);
    let mut last = 0u64;
    for m in messages {
        let tick = (m.time.max(0.0) * ticks_per_second).round() as u64;
        let tick = tick.max(last);
        push_vlq(&mut track, (tick - last) as u32);
        last = tick;
        track.extend(m.bytes());
    }
    track.extend_from_slice(&[0, 0xFF, 0x2F, 0]);

    let mut out = Vec::with_capacity(track.len() + 22);
    out.extend_from_slice(b"MThd");
    out.extend_from_slice(&6u32.to_be_bytes());
    out.extend_from_slice(&0u16.to_be_bytes());
    out.extend_from_slice(&1u16.to_be_bytes());
    out.extend_from_slice(&WRITE_DIVISION.to_be_bytes());
    out.extend_from_slice(b"MTrk");
    out.extend_from_slice(&(track.len() as u32).to_be_bytes());
    out.extend(track);
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn header(format: u16, ntracks: u16, division: u16) -> Vec<u8> {
        let mut v = b"MThd".to_vec();
        v.extend_from_slice(&6u32.to_be_bytes());
        v.extend_from_slice(&format.to_be_bytes());
        v.extend_from_slice(&ntracks.to_be_bytes());
        v.extend_from_slice(&division.to_be_bytes());
        v
    }

    fn track(body: &[u8]) -> Vec<u8> {
        let mut v = b"MTrk".to_vec();
        v.extend_from_slice(&(body.len() as u32).to_be_bytes());
        v.extend_from_slice(body);
        v
    }

    #[test]
    fn empty_file() {
        let mut f = header(0, 1, 480);
        f.extend(track(&[0, 0xFF, 0x2F, 0]));
        assert!(read_smf(&f).unwrap().is_empty());
    }

    #[test]
    fn tick_conversion() {
        let mut f = header(0, 1, 480);
        // tempo 120 BPM, then a note-on 480 ticks later
        f.extend(track(&[
            0, 0xFF, 0x51, 3, 0x07, 0xA1, 0x20, 0x83, 0x60, 0x90, 60, 100, 0, 0xFF, 0x2F, 0,
        ]));
        let msgs = read_smf(&f).unwrap();
        assert_eq!(msgs.len(), 1);
        assert!((msgs[0].time - 0.5).abs() < 1e-12);
    }

    #[test]
    fn running_status_and_tempo_change() {
        let mut f = header(0, 1, 100);
        // tempo 1 s per quarter from tick 100
        f.extend(track(&[
            0, 0x90, 60, 100, 100, 62, 90, 0, 0xFF, 0x51, 3, 0x0F, 0x42, 0x40, 100, 0x90, 64, 80, 0, 0xFF, 0x2F, 0,
        ]));
        let msgs = read_smf(&f).unwrap();
        let times: Vec<f64> = msgs.iter().map(|m| m.time).collect();
        assert_eq!(times, vec![0.0, 0.5, 1.5]);
        assert_eq!(msgs[1].bytes(), vec![0x90, 62, 90]);
    }

    #[test]
    fn format_one_merges_tracks() {
        let mut f = header(1, 2, 480);
        f.extend(track(&[0, 0x90, 60, 100, 0x83, 0x60, 0x90, 64, 100, 0, 0xFF, 0x2F, 0]));
        f.extend(track(&[0x81, 0x70, 0xB0, 64, 127, 0, 0xFF, 0x2F, 0]));
        let msgs = read_smf(&f).unwrap();
        let got: Vec<(f64, u8)> = msgs.iter().map(|m| (m.time, m.data[0])).collect();
        assert_eq!(got, vec![(0.0, 60), (0.25, 64), (0.5, 64)]);
    }

    #[test]
    fn smpte_division() {
        // 25 fps, 40 ticks per frame: 1000 ticks per second
        let div = (((-25i8) as u8 as u16) << 8) | 40;
        let mut f = header(0, 1, div);
        f.extend(track(&[0x87, 0x68, 0x90, 60, 1, 0, 0xFF, 0x2F, 0]));
        assert!((read_smf(&f).unwrap()[0].time - 1.0).abs() < 1e-12);
    }

    #[test]
    fn errors_carry_offsets() {
        let err = read_smf(b"RIFF....").unwrap_err();
        assert!(matches!(err, MidiError::Parse { offset: 0, .. }));
        let f = header(2, 1, 480);
        assert!(matches!(read_smf(&f).unwrap_err(), MidiError::Parse { offset: 8, .. }));
        let mut f = header(0, 1, 480);
        f.extend(track(&[0, 0x90, 60]));
        match read_smf(&f).unwrap_err() {
            MidiError::Parse { offset, .. } => assert_eq!(offset, 25),
            e => panic!("{e}"),
        }
    }

    #[test]
    fn written_files_read_back() {
        let msgs = vec![
            RawMidiMessage::new(0.0, 0xB9, &[20, 64]),
            RawMidiMessage::new(0.05, 0xC9, &[3]),
            RawMidiMessage::new(100.0, 0x99, &[36, 127]),
        ];
        let back = read_smf(&write_smf(&msgs)).unwrap();
        assert_eq!(back.len(), 3);
        for (a, b) in msgs.iter().zip(&back) {
            assert_eq!(a.bytes(), b.bytes());
            assert!((a.time - b.time).abs() < 1e-9);
        }
    }
}
