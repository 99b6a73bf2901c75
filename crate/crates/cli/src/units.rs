//! Quantities with unit suffixes.
//!
//! A value is a decimal number optionally followed by a unit, with no space
//! in between: `90deg`, `8.1ns`, `690pW`, `370nm`, `0.5gamma`. A bare number
//! is read in the SI unit of the quantity (rad, s, W, m, rad/s).

use std::f64::consts::PI;

/// (suffix, factor) pairs, longest suffixes first so `ns` wins over `s`.
const ANGLE: &[(&str, f64)] = &[("deg", PI / 180.0), ("rad", 1.0)];
const TIME: &[(&str, f64)] = &[("ns", 1e-9), ("us", 1e-6), ("ms", 1e-3), ("s", 1.0)];
const POWER: &[(&str, f64)] = &[
    ("pW", 1e-12),
    ("nW", 1e-9),
    ("uW", 1e-6),
    ("mW", 1e-3),
    ("W", 1.0),
];
const LENGTH: &[(&str, f64)] = &[("nm", 1e-9), ("um", 1e-6), ("mm", 1e-3), ("m", 1.0)];
const FREQUENCY: &[(&str, f64)] = &[
    ("GHz", 2e9 * PI),
    ("MHz", 2e6 * PI),
    ("kHz", 2e3 * PI),
    ("Hz", 2.0 * PI),
];

fn number(s: &str, what: &str) -> Result<f64, String> {
    let v: f64 = s
        .trim()
        .parse()
        .map_err(|_| format!("invalid {what} '{s}'"))?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(format!("{what} must be finite, got '{s}'"))
    }
}

fn with_units(s: &str, units: &[(&str, f64)], what: &str) -> Result<f64, String> {
    let s = s.trim();
    for &(suffix, factor) in units {
        if let Some(head) = s.strip_suffix(suffix) {
            // "1e-3s" must not be read as "1e-3" followed by the suffix of "e-3s"
            if !head.is_empty() && !head.ends_with(|c: char| c.is_ascii_alphabetic()) {
                return Ok(number(head, what)? * factor);
            }
        }
    }
    number(s, what)
}

pub fn angle(s: &str) -> Result<f64, String> {
    with_units(s, ANGLE, "angle")
}

pub fn time(s: &str) -> Result<f64, String> {
    with_units(s, TIME, "time")
}

pub fn power(s: &str) -> Result<f64, String> {
    with_units(s, POWER, "power")
}

pub fn length(s: &str) -> Result<f64, String> {
    with_units(s, LENGTH, "length")
}

/// Detuning either relative to a reference rate (`0.5gamma`, `2kappa`) or
/// absolute (`3e6` rad/s, `1.5MHz`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Detuning {
    Relative(f64),
    Absolute(f64),
}

impl Detuning {
    pub fn resolve(self, reference_rate: f64) -> f64 {
        match self {
            Detuning::Relative(x) => x * reference_rate,
            Detuning::Absolute(d) => d,
        }
    }
}

pub fn detuning(s: &str) -> Result<Detuning, String> {
    let t = s.trim();
    for suffix in ["gamma", "kappa"] {
        if let Some(head) = t.strip_suffix(suffix) {
            return number(head, "detuning").map(Detuning::Relative);
        }
    }
    with_units(t, FREQUENCY, "detuning").map(Detuning::Absolute)
}

/// A detuning in units of Γ: a bare number or one with the `gamma` suffix.
pub fn normalized_detuning(s: &str) -> Result<f64, String> {
    let t = s.trim();
    number(t.strip_suffix("gamma").unwrap_or(t), "detuning")
}

/// "x,y"
pub fn point(s: &str) -> Result<(f64, f64), String> {
    let (x, y) = s
        .split_once(',')
        .ok_or_else(|| format!("expected 'x,y', got '{s}'"))?;
    Ok((number(x, "coordinate")?, number(y, "coordinate")?))
}
