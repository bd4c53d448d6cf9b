use std::collections::VecDeque;

use accompany::control::{self, apply_mute, ControlConfig, ControlEngine, ControlOutputs, DrumState, Mode};
use accompany::features::{ExtractorState, FeatureConfig, FeatureFrame, MidiEventIn};
use accompany::fuzzy::{
    defuzzify_coa, parse_rule_base, Aggregate, ClippedSet, CrispInputs, MembershipFunction, Universe,
};
use accompany::midi::{encode, read_smf, write_smf, DrummerMapping, RawMidiMessage, CONTROL_CHANGE, NOTE_ON};
use accompany::runtime::DEFAULT_MAPPING;
use accompany::temporal::{self, TemporalConfig, TemporalEngine, TemporalOutputs, TemporalState};
use proptest::prelude::*;

const T: f64 = 2.0;

fn temporal_engine() -> TemporalEngine {
    TemporalEngine::new(parse_rule_base(temporal::DEFAULT_RULES, &[]).unwrap(), TemporalConfig::default(), T).unwrap()
}

fn control_engine() -> ControlEngine {
    let rb = parse_rule_base(control::DEFAULT_RULES, &[("T", T), ("eps", 0.01)]).unwrap();
    ControlEngine::new(rb, ControlConfig::default(), T, 3600.0).unwrap()
}

fn mf() -> impl Strategy<Value = MembershipFunction> {
    prop::collection::vec(-100.0f64..100.0, 4).prop_flat_map(|mut p| {
        p.sort_by(f64::total_cmp);
        prop_oneof![
            Just(MembershipFunction::triangular(p[0], p[1], p[3]).unwrap()),
            Just(MembershipFunction::trapezoid(p[0], p[1], p[2], p[3]).unwrap()),
            Just(MembershipFunction::singleton(p[1]).unwrap()),
        ]
    })
}

fn aggregate() -> impl Strategy<Value = Vec<ClippedSet>> {
    prop::collection::vec((mf(), 0.01f64..=1.0).prop_map(|(mf, height)| ClippedSet { mf, height }), 1..5)
}

fn frame() -> impl Strategy<Value = FeatureFrame> {
    (
        (0.0f64..=127.0, 0.0f64..=127.0, 0.0f64..=127.0, 0.0f64..=127.0),
        (any::<bool>(), 0.0f64..20.0, 0.0f64..20.0),
        (0u64..64, 0.0f64..T),
        (0.0f64..=127.0, 0.0f64..=127.0),
    )
        .prop_map(|((v, full, low, high), (pedal, tsln, tsp), (bar, tib), (newer, older))| FeatureFrame {
            cycle_time: bar as f64 * T + tib,
            velocity_sum: v,
            density_full: full.max(low).max(high),
            density_low: low,
            density_high: high,
            pedal_down: pedal,
            time_since_last_note: tsln,
            time_since_pedal: tsp,
            bar_index: bar,
            bar_in_32: (bar % 32) as u32,
            time_in_bar: tib,
            newer_avg: newer,
            older_avg: older,
        })
}

fn temporal_state() -> impl Strategy<Value = TemporalState> {
    (
        prop::collection::vec(0.0f64..=127.0, 5),
        prop::collection::vec((0.0f64..=127.0, 0.0f64..=127.0), 0..10),
    )
        .prop_map(|(avgs, hist)| TemporalState {
            avg_velocity_slow: avgs[0],
            avg_velocity_fast: avgs[1],
            avg_density_low: avgs[2],
            avg_density_high: avgs[3],
            avg_density_full: avgs[4],
            intensity_history: hist.iter().enumerate().map(|(i, h)| (i as f64 * 0.05, h.0)).collect(),
            complexity_history: hist.iter().enumerate().map(|(i, h)| (i as f64 * 0.05, h.1)).collect(),
            ..TemporalState::default()
        })
}

fn category(names: &'static [(&'static str, f64)]) -> impl Strategy<Value = String> {
    prop::sample::select(names.iter().map(|(n, _)| n.to_string()).collect::<Vec<_>>())
}

fn drum_state() -> impl Strategy<Value = DrumState> {
    let historic: &'static [(&'static str, f64)] = &accompany::catalog::PATTERNS;
    (
        category(historic).prop_filter("historic pattern is never 'No change'", |p| p != "No change"),
        category(&accompany::catalog::MUTES),
        any::<bool>(),
        any::<bool>(),
        0.0f64..=127.0,
        0.0f64..=127.0,
    )
        .prop_map(|(p, m, hm, cm, i, c)| DrumState {
            historic_pattern: p,
            historic_mute: m,
            historic_mode: if hm { Mode::Play } else { Mode::Stop },
            current_mode: if cm { Mode::Play } else { Mode::Stop },
            intensity: i,
            complexity: c,
        })
}

fn control_outputs() -> impl Strategy<Value = ControlOutputs> {
    (
        0.0f64..=127.0,
        0.0f64..=127.0,
        category(&accompany::catalog::PATTERNS),
        category(&accompany::catalog::MUTES),
        category(&accompany::catalog::MUTES),
    )
        .prop_map(|(intensity, complexity, pattern, mute, unmute)| ControlOutputs {
            intensity,
            complexity,
            pattern,
            mute,
            unmute,
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn centroid_stays_in_universe(sets in aggregate(), lo in -150.0f64..-100.0, hi in 100.0f64..150.0) {
        let agg = Aggregate::new(sets);
        let u = Universe::new(lo, hi).unwrap();
        if let Ok(y) = defuzzify_coa(&agg, u, 1001) {
            prop_assert!((lo..=hi).contains(&y));
        }
    }

    #[test]
    fn raising_a_strength_never_lowers_the_aggregate(
        sets in aggregate(),
        which in any::<prop::sample::Index>(),
        bump in 0.0f64..1.0,
        x in -120.0f64..120.0,
    ) {
        let mut raised = sets.clone();
        let i = which.index(raised.len());
        raised[i].height = (raised[i].height + bump).min(1.0);
        prop_assert!(Aggregate::new(raised).degree(x) >= Aggregate::new(sets).degree(x));
    }

    #[test]
    fn inference_is_deterministic(f in frame(), s in temporal_state()) {
        let e = temporal_engine();
        let a = e.step(&f, &s, 40.0, 40.0).unwrap();
        let b = e.step(&f, &s, 40.0, 40.0).unwrap();
        prop_assert_eq!(format!("{:?}", a), format!("{:?}", b));
    }

    #[test]
    fn averages_stay_in_range(f in frame(), s in temporal_state(), i in 0.0f64..=127.0, c in 0.0f64..=127.0) {
        let (out, next, _) = temporal_engine().step(&f, &s, i, c).unwrap();
        for x in [
            next.avg_velocity_slow, next.avg_velocity_fast,
            next.avg_density_low, next.avg_density_high, next.avg_density_full,
        ] {
            prop_assert!((0.0..=127.0).contains(&x), "{}", x);
        }
        prop_assert!((0.0..=1.0).contains(&out.hype));
    }

    #[test]
    fn sudden_shift_is_antisymmetric(a in 0.0f64..=127.0, b in 0.0f64..=127.0) {
        let e = temporal_engine();
        let (x, y) = (e.detect_sudden_shift(a, b).unwrap(), e.detect_sudden_shift(b, a).unwrap());
        prop_assert!((x + y).abs() <= 0.05, "{} vs {}", x, y);
    }

    #[test]
    fn falling_levels_bring_no_hype(
        f in frame(),
        start in 0.0f64..=40.0,
        drops in prop::collection::vec(0.0f64..5.0, 7),
    ) {
        let mut level = start;
        let mut hist = VecDeque::new();
        for (k, d) in drops.iter().enumerate() {
            hist.push_back((k as f64 * 0.05, level));
            level = (level - d).max(0.0);
        }
        let s = TemporalState {
            intensity_history: hist.clone(),
            complexity_history: hist,
            ..TemporalState::default()
        };
        let (out, _, _) = temporal_engine().step(&f, &s, level, level).unwrap();
        prop_assert!(out.hype < 0.1, "{}", out.hype);
    }

    #[test]
    fn control_outputs_are_declared_categories(f in frame(), drum in drum_state(), hype in 0.0f64..=1.0, shift in -1.0f64..=1.0) {
        let e = control_engine();
        let t = TemporalOutputs {
            hype,
            sudden_shift: shift,
            avg_velocity_slow: f.velocity_sum,
            last_shift_down: (shift < -0.5).then_some(f.cycle_time),
            last_shift_up: (shift > 0.5).then_some(f.cycle_time),
            ..TemporalOutputs::default()
        };
        let (out, next, _) = e.step(&f, &t, &drum).unwrap();
        let again = e.step(&f, &t, &drum).unwrap();
        prop_assert_eq!(&out, &again.0);

        let patterns: Vec<&str> = accompany::catalog::PATTERNS.iter().map(|p| p.0).collect();
        let mutes: Vec<&str> = accompany::catalog::MUTES.iter().map(|p| p.0).collect();
        prop_assert!(patterns.contains(&out.pattern.as_str()));
        prop_assert!(mutes.contains(&out.mute.as_str()));
        prop_assert!(mutes.contains(&out.unmute.as_str()));
        prop_assert!(mutes.contains(&next.historic_mute.as_str()));
        prop_assert!((0.0..=127.0).contains(&out.intensity));
        prop_assert!((0.0..=127.0).contains(&out.complexity));
        if out.pattern == "No change" {
            prop_assert_eq!(&next.historic_pattern, &drum.historic_pattern);
        } else {
            prop_assert_eq!(&next.historic_pattern, &out.pattern);
        }
    }

    #[test]
    fn mute_levels_stay_declared(h in category(&accompany::catalog::MUTES), m in category(&accompany::catalog::MUTES), u in category(&accompany::catalog::MUTES)) {
        let level = apply_mute(&h, &m, &u);
        prop_assert!(accompany::catalog::MUTES.iter().any(|(n, _)| *n == level));
    }

    #[test]
    fn encoded_messages_are_valid(out in control_outputs(), prev in control_outputs()) {
        let map = DrummerMapping::parse(DEFAULT_MAPPING).unwrap();
        for m in encode(&out, Some(&prev), &map, 1.0).unwrap() {
            prop_assert!([NOTE_ON, CONTROL_CHANGE, 0xC0].contains(&(m.status & 0xF0)));
            prop_assert!(m.data.iter().all(|b| *b <= 127));
            prop_assert_eq!(m.channel(), map.channel);
        }
        let quiet = ControlOutputs { pattern: "No change".into(), mute: "None".into(), unmute: "None".into(), ..out.clone() };
        prop_assert!(encode(&quiet, Some(&quiet), &map, 1.0).unwrap().is_empty());
    }

    #[test]
    fn smf_reading_is_pure(notes in prop::collection::vec((0u32..2000, 0u8..128, 1u8..128), 0..30)) {
        let mut msgs: Vec<RawMidiMessage> = notes
            .iter()
            .map(|&(t, n, v)| RawMidiMessage::new(t as f64 / 100.0, NOTE_ON, &[n, v]))
            .collect();
        msgs.sort_by(|a, b| a.time.total_cmp(&b.time));
        let bytes = write_smf(&msgs);
        let (a, b) = (read_smf(&bytes).unwrap(), read_smf(&bytes).unwrap());
        prop_assert_eq!(&a, &b);
        prop_assert_eq!(a.len(), msgs.len());
    }

    #[test]
    fn bar_in_32_has_period_32(onset in 0.0f64..10.0, k in 0u64..200, frac in 0.0f64..0.99) {
        let mut s = ExtractorState::new(FeatureConfig::default());
        s.ingest(MidiEventIn::note_on(onset, 60, 80));
        let now = onset + k as f64 * T + frac * T;
        let later = now + 32.0 * T;
        let (a, b) = (s.make_frame(now), s.make_frame(later));
        prop_assert_eq!(a.bar_in_32, (a.bar_index % 32) as u32);
        prop_assert_eq!(a.bar_in_32, b.bar_in_32);
        prop_assert_eq!(b.bar_index, a.bar_index + 32);
    }

    #[test]
    fn frames_replay_identically(evs in prop::collection::vec((0.0f64..8.0, 0u8..128, 1u8..128), 0..40)) {
        let mut evs = evs;
        evs.sort_by(|a, b| a.0.total_cmp(&b.0));
        let run = || {
            let mut s = ExtractorState::new(FeatureConfig::default());
            let mut frames = Vec::new();
            let mut next = 0;
            for i in 0..200 {
                let now = i as f64 * 0.05;
                while next < evs.len() && evs[next].0 <= now {
                    s.ingest(MidiEventIn::note_on(evs[next].0, evs[next].1, evs[next].2));
                    next += 1;
                }
                frames.push(s.make_frame(now));
            }
            format!("{frames:?}")
        };
        prop_assert_eq!(run(), run());
    }
}

#[test]
fn constant_frames_converge() {
    let e = temporal_engine();
    let mut s = TemporalState::default();
    let mut deltas = Vec::new();
    for i in 0..200 {
        let t = i as f64 * 0.05;
        let f = FeatureFrame {
            cycle_time: t,
            velocity_sum: 90.0,
            density_full: 60.0,
            density_low: 30.0,
            density_high: 30.0,
            pedal_down: false,
            time_since_last_note: 0.0,
            time_since_pedal: 3600.0,
            bar_index: (t / T) as u64,
            bar_in_32: ((t / T) as u64 % 32) as u32,
            time_in_bar: t % T,
            newer_avg: 90.0,
            older_avg: 90.0,
        };
        let (_, next, _) = e.step(&f, &s, 60.0, 60.0).unwrap();
        deltas.push((next.avg_velocity_slow - s.avg_velocity_slow).abs());
        s = next;
    }
    let settled = deltas.iter().position(|d| *d < 0.5).unwrap();
    assert!(settled < 100, "settled at {settled}");
    assert!(deltas[settled..].iter().all(|d| *d < 0.5));
    // after the first few cycles the step size only shrinks
    for w in deltas[5..].windows(2) {
        assert!(w[1] <= w[0] + 1e-9, "{deltas:?}");
    }
}

#[test]
fn categorical_control_inputs_take_codes() {
    let e = control_engine();
    let crisp: CrispInputs = e.crisp_inputs(
        &FeatureFrame {
            cycle_time: 0.0,
            velocity_sum: 0.0,
            density_full: 0.0,
            density_low: 0.0,
            density_high: 0.0,
            pedal_down: false,
            time_since_last_note: 3600.0,
            time_since_pedal: 3600.0,
            bar_index: 0,
            bar_in_32: 0,
            time_in_bar: 0.0,
            newer_avg: 0.0,
            older_avg: 0.0,
        },
        &TemporalOutputs::default(),
        &DrumState {
            historic_pattern: "Fill 3".into(),
            historic_mute: "Kick".into(),
            ..DrumState::default()
        },
    );
    assert_eq!(crisp["historic_pattern"], 14.0);
    assert_eq!(crisp["historic_mute"], 1.0);
}
