//! Unit-suffixed quantities at the input boundary.
//!
//! Bare numbers are read in internal units: rad/μs for rates, μs for times,
//! rad for angles. `MHz`, `kHz`, `GHz` and `Hz` are ordinary frequencies and
//! pick up a factor 2π; `Mrad/s`, `krad/s`, `Grad/s` and `rad/s` are angular.

use std::f64::consts::PI;
use std::fmt;

use serde::de::{self, Deserializer};
use serde::{Deserialize, Serialize, Serializer};

/// Splits `"12.5 MHz"` into `(12.5, "MHz")`.
fn split_number(s: &str) -> Result<(f64, &str), String> {
    let s = s.trim();
    let mut best = None;
    for (i, _) in s.char_indices().skip(1).chain(std::iter::once((s.len(), ' '))) {
        if let Ok(v) = s[..i].trim_end().parse::<f64>() {
            best = Some((v, s[i..].trim()));
        }
    }
    match best {
        Some((v, unit)) if v.is_finite() => Ok((v, unit)),
        Some(_) => Err(format!("'{s}' is not a finite number")),
        None => Err(format!("'{s}' does not start with a number")),
    }
}

pub fn parse_frequency(s: &str) -> Result<f64, String> {
    let (v, unit) = split_number(s)?;
    let scale = match unit {
        "" | "Mrad/s" | "rad/us" | "rad/μs" => 1.0,
        "Grad/s" => 1e3,
        "krad/s" => 1e-3,
        "rad/s" => 1e-6,
        "GHz" => 2.0 * PI * 1e3,
        "MHz" => 2.0 * PI,
        "kHz" => 2.0 * PI * 1e-3,
        "Hz" => 2.0 * PI * 1e-6,
        other => return Err(format!("unknown frequency unit '{other}' in '{s}'")),
    };
    Ok(v * scale)
}

pub fn parse_time(s: &str) -> Result<f64, String> {
    let (v, unit) = split_number(s)?;
    let scale = match unit {
        "" | "us" | "μs" | "µs" => 1.0,
        "ns" => 1e-3,
        "ms" => 1e3,
        "s" => 1e6,
        other => return Err(format!("unknown time unit '{other}' in '{s}'")),
    };
    Ok(v * scale)
}

pub fn parse_angle(s: &str) -> Result<f64, String> {
    let s = s.trim();
    if s == "pi" {
        return Ok(PI);
    }
    let (v, unit) = split_number(s)?;
    let scale = match unit {
        "" | "rad" => 1.0,
        "pi" => PI,
        "deg" => PI / 180.0,
        other => return Err(format!("unknown angle unit '{other}' in '{s}'")),
    };
    Ok(v * scale)
}

#[derive(Deserialize)]
#[serde(untagged)]
enum Raw {
    Num(f64),
    Text(String),
}

macro_rules! quantity {
    ($name:ident, $parse:ident, $unit:literal, $doc:literal) => {
        #[doc = $doc]
        #[derive(Debug, Clone, Copy, PartialEq, Default)]
        pub struct $name(pub f64);

        impl $name {
            pub fn parse(s: &str) -> Result<Self, String> {
                $parse(s).map($name)
            }
        }

        impl Serialize for $name {
            fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
                s.serialize_f64(self.0)
            }
        }

        impl<'de> Deserialize<'de> for $name {
            fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
                match Raw::deserialize(d)? {
                    Raw::Num(v) => Ok($name(v)),
                    Raw::Text(t) => $parse(&t).map($name).map_err(de::Error::custom),
                }
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                write!(f, "{}{}", self.0, $unit)
            }
        }
    };
}

quantity!(Frequency, parse_frequency, "Mrad/s", "Angular frequency in rad/μs.");
quantity!(Time, parse_time, "us", "Duration in μs.");
quantity!(Angle, parse_angle, "rad", "Angle in rad.");

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn frequencies() {
        assert_eq!(parse_frequency("3").unwrap(), 3.0);
        assert_eq!(parse_frequency("10 Mrad/s").unwrap(), 10.0);
        assert!((parse_frequency("10MHz").unwrap() - 20.0 * PI).abs() < 1e-12);
        assert!((parse_frequency("10 kHz").unwrap() - 0.02 * PI).abs() < 1e-15);
        assert_eq!(parse_frequency("5krad/s").unwrap(), 5e-3);
        assert_eq!(parse_frequency("1e3 krad/s").unwrap(), 1.0);
        assert!(parse_frequency("10 furlongs").is_err());
        assert!(parse_frequency("MHz").is_err());
        assert!(parse_frequency("inf").is_err());
    }

    #[test]
    fn times_and_angles() {
        assert_eq!(parse_time("100ns").unwrap(), 0.1);
        assert_eq!(parse_time("2 ms").unwrap(), 2000.0);
        assert_eq!(parse_time("1.5us").unwrap(), 1.5);
        assert_eq!(parse_angle("pi").unwrap(), PI);
        assert_eq!(parse_angle("0.5pi").unwrap(), 0.5 * PI);
        assert!((parse_angle("90 deg").unwrap() - PI / 2.0).abs() < 1e-15);
        assert_eq!(parse_angle("-1.25rad").unwrap(), -1.25);
    }

    #[test]
    fn display_round_trips() {
        let f = Frequency(0.1 + 0.2);
        assert_eq!(Frequency::parse(&f.to_string()).unwrap(), f);
        let t = Time(std::f64::consts::FRAC_PI_3);
        assert_eq!(Time::parse(&t.to_string()).unwrap(), t);
    }

    #[test]
    fn deserializes_numbers_and_strings() {
        #[derive(Deserialize)]
        struct W {
            a: Frequency,
            b: Frequency,
            c: Time,
        }
        let w: W = toml::from_str("a = 2\nb = \"1 MHz\"\nc = \"100 ns\"").unwrap();
        assert_eq!(w.a.0, 2.0);
        assert!((w.b.0 - 2.0 * PI).abs() < 1e-15);
        assert_eq!(w.c.0, 0.1);
    }
}
