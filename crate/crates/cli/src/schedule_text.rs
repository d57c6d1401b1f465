//! Plain-text schedule format.
//!
//! One event per line:
//!
//! ```text
//! PULSE g r 1Mrad/s 0rad 0Mrad/s 1.5707963267948966us
//! WAIT 0.5us
//! ```
//!
//! Fields of a pulse are `from to omega phase detuning duration`. Values
//! carry unit suffixes without a space; any suffix accepted by the CLI
//! (`MHz`, `krad/s`, `ns`, `deg`, ...) parses. Blank lines and `#` comments
//! are ignored. Written numbers round-trip exactly.

use blockade_core::dynamics::{Envelope, Event, Pulse, Schedule};
use blockade_core::hilbert::LevelId;

use crate::quantity::{parse_angle, parse_frequency, parse_time, Angle, Frequency, Time};

pub fn write_schedule(schedule: &Schedule) -> Result<String, String> {
    let mut out = String::new();
    for event in schedule.events() {
        match event {
            Event::Wait(d) => out.push_str(&format!("WAIT {}\n", Time(*d))),
            Event::Pulse(p) => {
                let rabi = match p.envelope {
                    Envelope::Constant(r) => r,
                    Envelope::Sampled { .. } => {
                        return Err("sampled envelopes have no text form".into());
                    }
                };
                out.push_str(&format!(
                    "PULSE {} {} {} {} {} {}\n",
                    p.from,
                    p.to,
                    Frequency(rabi),
                    Angle(p.phase),
                    Frequency(p.detuning),
                    Time(p.duration)
                ));
            }
        }
    }
    Ok(out)
}

pub fn parse_schedule(text: &str) -> Result<Schedule, String> {
    let mut s = Schedule::new();
    for (k, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let at = |e: String| format!("line {}: {e}", k + 1);
        let fields: Vec<&str> = line.split_whitespace().collect();
        match fields[0] {
            "WAIT" => {
                if fields.len() != 2 {
                    return Err(at("WAIT takes one duration".into()));
                }
                let d = parse_time(fields[1]).map_err(at)?;
                s.push(Event::Wait(d)).map_err(|e| at(e.to_string()))?;
            }
            "PULSE" => {
                if fields.len() != 7 {
                    return Err(at("PULSE takes from, to, omega, phase, detuning, duration".into()));
                }
                let level = |name: &str| {
                    LevelId::from_name(name).ok_or_else(|| at(format!("unknown level '{name}'")))
                };
                let pulse = Pulse::constant(
                    level(fields[1])?,
                    level(fields[2])?,
                    parse_frequency(fields[3]).map_err(at)?,
                    parse_angle(fields[4]).map_err(at)?,
                    parse_frequency(fields[5]).map_err(at)?,
                    parse_time(fields[6]).map_err(at)?,
                )
                .map_err(|e| at(e.to_string()))?;
                s.push_pulse(pulse);
            }
            other => return Err(at(format!("unknown event '{other}'"))),
        }
    }
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use blockade_core::protocol::{phase_gate_schedule, superposition_schedule, TargetSuperposition};
    use num_complex::Complex64 as C64;

    #[test]
    fn round_trip_is_exact() {
        let t = TargetSuperposition::normalized(vec![C64::new(0.3, 0.1), C64::new(-0.2, 0.7), C64::new(0.4, 0.0)], 9)
            .unwrap();
        let mut s = superposition_schedule(&t, 1.3, 0.7).unwrap();
        s.push(Event::Wait(0.125)).unwrap();
        s.extend(&phase_gate_schedule(2.0, 3.0).unwrap());
        let text = write_schedule(&s).unwrap();
        assert_eq!(parse_schedule(&text).unwrap(), s);
    }

    #[test]
    fn accepts_other_units_and_comments() {
        let s = parse_schedule("# header\nPULSE g r 1MHz 90deg 0kHz 100ns  # trailing\n\nWAIT 1ms\n").unwrap();
        assert_eq!(s.len(), 2);
        let p = s.pulses().next().unwrap();
        assert!((p.envelope == Envelope::Constant(2.0 * std::f64::consts::PI)));
        assert_eq!(p.duration, 0.1);
        assert_eq!(s.total_duration(), 1000.1);
    }

    #[test]
    fn reports_line_numbers() {
        let err = parse_schedule("WAIT 1us\nPULSE g x 1 0 0 1").unwrap_err();
        assert!(err.starts_with("line 2"), "{err}");
        assert!(parse_schedule("PULSE g r -1 0 0 1").is_err());
        assert!(parse_schedule("JUMP 1").is_err());
    }
}
