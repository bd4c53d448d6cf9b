use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::Arc;
use std::time::Instant;

use accompany::runtime::{
    self, DevicePorts, Engine, LiveOptions, MidiOutput, MemoryOutput, RuntimeConfig, RuntimeError,
    TraceWriter,
};
use anyhow::{Context, Result};
use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(name = "accompany", version, about = "Fuzzy-logic drum accompaniment for piano MIDI")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a MIDI file through the engine on a virtual clock.
    Replay {
        input: PathBuf,
        #[arg(long)]
        config: Option<PathBuf>,
        /// Per-cycle CSV trace.
        #[arg(long)]
        trace: Option<PathBuf>,
        /// Drummer control messages as a MIDI file.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run against a live raw MIDI device until interrupted.
    Live {
        /// Input device, e.g. /dev/snd/midiC1D0.
        #[arg(long)]
        port: Option<String>,
        /// Output device. Messages are only logged when absent.
        #[arg(long)]
        out_port: Option<String>,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        trace: Option<PathBuf>,
    },
    /// Check rule files, mapping and configuration.
    Validate {
        #[arg(long)]
        config: Option<PathBuf>,
    },
}

fn load_config(path: Option<&Path>) -> Result<RuntimeConfig, RuntimeError> {
    match path {
        Some(p) => RuntimeConfig::load(p),
        None => Ok(RuntimeConfig::default()),
    }
}

fn create(path: &Path) -> Result<BufWriter<File>, RuntimeError> {
    File::create(path).map(BufWriter::new).map_err(|source| RuntimeError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn replay(input: &Path, config: Option<&Path>, trace: Option<PathBuf>, out: Option<PathBuf>) -> Result<()> {
    let config = load_config(config)?;
    let engine = Engine::from_config(&config)?;
    let trace = trace.or_else(|| config.trace.clone());
    let report = runtime::replay_file(&engine, input, trace.as_deref(), out.as_deref())?;
    log::info!(
        "{} cycles, {} events, {} malformed, {} dropped",
        report.cycles,
        report.events_in,
        report.malformed,
        report.dropped
    );
    Ok(())
}

fn live(port: Option<String>, out_port: Option<String>, config: Option<&Path>, trace: Option<PathBuf>) -> Result<()> {
    let config = load_config(config)?;
    let engine = Engine::from_config(&config)?;
    let port = port
        .or_else(|| config.input_port.clone())
        .ok_or_else(|| RuntimeError::Config("no input port given".into()))?;
    let out_port = out_port.or_else(|| config.output_port.clone());

    let stop = Arc::new(AtomicBool::new(false));
    let flag = Arc::clone(&stop);
    ctrlc::set_handler(move || flag.store(true, Ordering::SeqCst)).context("installing interrupt handler")?;

    let start = Instant::now();
    let mut input = DevicePorts::open_input(Path::new(&port), start, config.queue_capacity).map_err(RuntimeError::from)?;
    let mut output: Box<dyn MidiOutput> = match &out_port {
        Some(p) => Box::new(DevicePorts::open_output(Path::new(p)).map_err(RuntimeError::from)?),
        None => Box::new(MemoryOutput::default()),
    };
    let mut trace = match trace.or_else(|| config.trace.clone()) {
        Some(p) => Some(TraceWriter::new(create(&p)?, config.trace_firing_threshold, config.no_note_sentinel_seconds).map_err(RuntimeError::from)?),
        None => None,
    };
    log::info!("listening on {port}");
    let mut log_messages = |r: &runtime::CycleResult| {
        for m in &r.messages {
            log::debug!("cycle {} -> {:02X?}", r.cycle, m.bytes());
        }
    };
    let options = LiveOptions {
        max_cycles: None,
        cycle_hook: Some(&mut log_messages),
    };
    let report = runtime::run_live(&engine, start, &mut input, output.as_mut(), trace.as_mut(), &stop, options)?;
    log::info!(
        "stopped after {} cycles: {} overruns, {} messages sent, {} events dropped",
        report.cycles,
        report.overruns,
        report.messages_sent,
        report.dropped
    );
    if report.disconnected {
        eprintln!("input port {port} went away; shut down cleanly");
    }
    Ok(())
}

fn validate(config: Option<&Path>) -> Result<bool> {
    let config = load_config(config)?;
    let report = runtime::validate(&config);
    for (system, output, n) in &report.rule_counts {
        println!("{system}.{output}: {n} rules");
    }
    for w in &report.warnings {
        eprintln!("warning: {w}");
    }
    for e in &report.errors {
        eprintln!("error: {e}");
    }
    Ok(report.ok())
}

fn exit_code(err: &anyhow::Error) -> u8 {
    match err.downcast_ref::<RuntimeError>() {
        Some(e) => e.exit_code() as u8,
        None => 2,
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Replay {
            input,
            config,
            trace,
            out,
        } => replay(&input, config.as_deref(), trace, out),
        Command::Live {
            port,
            out_port,
            config,
            trace,
        } => live(port, out_port, config.as_deref(), trace),
        Command::Validate { config } => match validate(config.as_deref()) {
            Ok(true) => Ok(()),
            Ok(false) => return ExitCode::from(1),
            Err(e) => Err(e),
        },
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
