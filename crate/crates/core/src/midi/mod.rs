//! MIDI input decoding, Standard MIDI File I/O and the drummer mapping.

mod mapping;
mod message;
mod smf;

pub use mapping::{encode, DrummerMapping, MappedMessage};
pub use message::{
    decode, RawMidiMessage, StreamParser, CONTROL_CHANGE, NOTE_OFF, NOTE_ON, PROGRAM_CHANGE, SUSTAIN_PEDAL,
};
pub use smf::{read_midi_file, read_smf, write_smf, WRITE_DIVISION, WRITE_TEMPO};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum MidiError {
    #[error("MIDI file error at byte {offset}: {message}")]
    Parse { offset: usize, message: String },
    #[error("malformed MIDI message {0:02X?}")]
    Malformed(Vec<u8>),
    #[error("mapping line {line}: {message}")]
    Mapping { line: usize, message: String },
    #[error("no mapping for {output} category `{category}`")]
    Unmapped { output: &'static str, category: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
