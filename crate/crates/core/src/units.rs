//! Unit conventions.
//!
//! Internally every frequency is an angular frequency in rad/μs, every time
//! is in μs and every length in μm. An ordinary frequency of 1 MHz is
//! therefore 2π rad/μs, while 1 Mrad/s is exactly 1 rad/μs.

use core::f64::consts::TAU;

/// How a bare frequency number should be read.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FrequencyReading {
    /// Cycles per second (Hz, kHz, MHz).
    Ordinary,
    /// Radians per second (rad/s, krad/s, Mrad/s).
    Angular,
}

impl FrequencyReading {
    pub const BOTH: [FrequencyReading; 2] = [FrequencyReading::Ordinary, FrequencyReading::Angular];

    /// Converts a value in MHz (or Mrad/s) to rad/μs.
    pub fn mega_to_internal(self, value: f64) -> f64 {
        match self {
            FrequencyReading::Ordinary => TAU * value,
            FrequencyReading::Angular => value,
        }
    }

    /// Converts a value in kHz (or krad/s) to rad/μs.
    pub fn kilo_to_internal(self, value: f64) -> f64 {
        self.mega_to_internal(value * 1e-3)
    }
}

pub const NS_PER_US: f64 = 1e3;

pub fn ns_to_us(ns: f64) -> f64 {
    ns / NS_PER_US
}
