use std::io::Write;

use super::CycleResult;

pub const TRACE_COLUMNS: [&str; 43] = [
    "cycle",
    "cycle_time",
    "velocity_sum",
    "density_full",
    "density_low",
    "density_high",
    "pedal_down",
    "time_since_last_note",
    "time_since_pedal",
    "bar_index",
    "bar_in_32",
    "time_in_bar",
    "newer_avg",
    "older_avg",
    "change_velocity_slow",
    "change_velocity_fast",
    "change_density_low",
    "change_density_high",
    "change_density_full",
    "sudden_shift",
    "hype",
    "velocity_trend",
    "avg_velocity_slow",
    "avg_velocity_fast",
    "avg_density_low",
    "avg_density_high",
    "avg_density_full",
    "intensity_slope",
    "complexity_slope",
    "time_since_shift_up",
    "time_since_shift_down",
    "current_mode",
    "historic_mode",
    "intensity",
    "complexity",
    "pattern",
    "mute",
    "unmute",
    "historic_pattern",
    "historic_mute",
    "fired_rules",
    "midi_out",
    "midi_count",
];

fn num(x: f64) -> String {
    let s = format!("{x:.6}");
    // keep "-0.000000" out of golden files
    if s.trim_start_matches('-').chars().all(|c| c == '0' || c == '.') {
        s.trim_start_matches('-').to_string()
    } else {
        s
    }
}

/// One CSV record per cycle, with every real number at six decimals.
pub struct TraceWriter<W: Write> {
    out: csv::Writer<W>,
    threshold: f64,
    sentinel: f64,
}

impl<W: Write> TraceWriter<W> {
    pub fn new(out: W, firing_threshold: f64, sentinel: f64) -> Result<Self, csv::Error> {
        let mut out = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out);
        out.write_record(TRACE_COLUMNS)?;
        Ok(Self {
            out,
            threshold: firing_threshold,
            sentinel,
        })
    }

    pub fn write(&mut self, r: &CycleResult) -> Result<(), csv::Error> {
        let f = &r.frame;
        let t = &r.temporal;
        let c = &r.control;
        let now = f.cycle_time;
        let fired = r
            .firings
            .iter()
            .filter(|x| x.strength > self.threshold)
            .map(|x| format!("{}={}", x.label, num(x.strength)))
            .collect::<Vec<_>>()
            .join("|");
        let midi = r
            .messages
            .iter()
            .map(|m| m.bytes().iter().map(|b| format!("{b:02X}")).collect::<String>())
            .collect::<Vec<_>>()
            .join(" ");
        let record = [
            r.cycle.to_string(),
            num(now),
            num(f.velocity_sum),
            num(f.density_full),
            num(f.density_low),
            num(f.density_high),
            (f.pedal_down as u8).to_string(),
            num(f.time_since_last_note),
            num(f.time_since_pedal),
            f.bar_index.to_string(),
            f.bar_in_32.to_string(),
            num(f.time_in_bar),
            num(f.newer_avg),
            num(f.older_avg),
            num(t.change_velocity_slow),
            num(t.change_velocity_fast),
            num(t.change_density_low),
            num(t.change_density_high),
            num(t.change_density_full),
            num(t.sudden_shift),
            num(t.hype),
            num(t.velocity_trend),
            num(t.avg_velocity_slow),
            num(t.avg_velocity_fast),
            num(t.avg_density_low),
            num(t.avg_density_high),
            num(t.avg_density_full),
            num(t.intensity_slope),
            num(t.complexity_slope),
            num(t.time_since_shift_up(now, self.sentinel)),
            num(t.time_since_shift_down(now, self.sentinel)),
            r.drum.current_mode.name().to_string(),
            r.drum.historic_mode.name().to_string(),
            num(c.intensity),
            num(c.complexity),
            c.pattern.clone(),
            c.mute.clone(),
            c.unmute.clone(),
            r.drum.historic_pattern.clone(),
            r.drum.historic_mute.clone(),
            fired,
            midi,
            r.messages.len().to_string(),
        ];
        self.out.write_record(&record)
    }

    pub fn flush(&mut self) -> std::io::Result<()> {
        self.out.flush()
    }

    pub fn into_inner(self) -> Result<W, csv::Error> {
        self.out.into_inner().map_err(|e| csv::Error::from(e.into_error()))
    }
}
