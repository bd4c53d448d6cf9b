pub mod catalog;
pub mod control;
pub mod error;
pub mod features;
pub mod fuzzy;
pub mod midi;
pub mod runtime;
pub mod temporal;

pub use error::EngineError;
