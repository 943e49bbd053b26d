//! Unit-suffixed scalar parsing for scenario files.

use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Dim {
    Dimensionless,
    Inductance,
    Capacitance,
    Resistance,
    Voltage,
    Current,
    Power,
    Frequency,
    Length,
    Time,
    Temperature,
    ThermalResistance,
    HeatCapacity,
    Conductivity,
    Density,
    SpecificPower,
    ElectricField,
    CurrentDensity,
}

const SUFFIXES: &[(&str, Dim, f64)] = &[
    ("H", Dim::Inductance, 1.0),
    ("mH", Dim::Inductance, 1e-3),
    ("uH", Dim::Inductance, 1e-6),
    ("µH", Dim::Inductance, 1e-6),
    ("nH", Dim::Inductance, 1e-9),
    ("F", Dim::Capacitance, 1.0),
    ("mF", Dim::Capacitance, 1e-3),
    ("uF", Dim::Capacitance, 1e-6),
    ("µF", Dim::Capacitance, 1e-6),
    ("nF", Dim::Capacitance, 1e-9),
    ("pF", Dim::Capacitance, 1e-12),
    ("ohm", Dim::Resistance, 1.0),
    ("mohm", Dim::Resistance, 1e-3),
    ("kohm", Dim::Resistance, 1e3),
    ("Ω", Dim::Resistance, 1.0),
    ("V", Dim::Voltage, 1.0),
    ("mV", Dim::Voltage, 1e-3),
    ("A", Dim::Current, 1.0),
    ("mA", Dim::Current, 1e-3),
    ("uA", Dim::Current, 1e-6),
    ("W", Dim::Power, 1.0),
    ("mW", Dim::Power, 1e-3),
    ("Hz", Dim::Frequency, 1.0),
    ("kHz", Dim::Frequency, 1e3),
    ("MHz", Dim::Frequency, 1e6),
    ("m", Dim::Length, 1.0),
    ("cm", Dim::Length, 1e-2),
    ("mm", Dim::Length, 1e-3),
    ("um", Dim::Length, 1e-6),
    ("s", Dim::Time, 1.0),
    ("ms", Dim::Time, 1e-3),
    ("us", Dim::Time, 1e-6),
    ("ns", Dim::Time, 1e-9),
    ("C", Dim::Temperature, 1.0),
    ("C/W", Dim::ThermalResistance, 1.0),
    ("J/C", Dim::HeatCapacity, 1.0),
    ("S/m", Dim::Conductivity, 1.0),
    ("kg/m3", Dim::Density, 1.0),
    ("W/kg", Dim::SpecificPower, 1.0),
    ("mW/kg", Dim::SpecificPower, 1e-3),
    ("V/m", Dim::ElectricField, 1.0),
    ("A/m2", Dim::CurrentDensity, 1.0),
];

impl Dim {
    /// Base SI suffix, used when writing values back out.
    pub fn base_suffix(self) -> &'static str {
        SUFFIXES.iter().find(|(_, d, s)| *d == self && *s == 1.0).map_or("", |(u, _, _)| u)
    }
}

impl fmt::Display for Dim {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let units: Vec<&str> = SUFFIXES.iter().filter(|(_, d, _)| d == self).map(|(u, _, _)| *u).collect();
        if units.is_empty() {
            f.write_str("a plain number")
        } else {
            write!(f, "one of {}", units.join(", "))
        }
    }
}

/// Parses `text` as a number carrying a unit of dimension `dim`, returning
/// the value in SI base units. Dimensionless values take no suffix.
pub fn parse_quantity(text: &str, dim: Dim) -> Result<f64, String> {
    let text = text.trim();
    if dim == Dim::Dimensionless {
        return text.parse::<f64>().map_err(|_| format!("expected a number, got `{text}`"));
    }
    let mut candidates: Vec<_> = SUFFIXES.iter().filter(|(_, d, _)| *d == dim).collect();
    candidates.sort_by_key(|(u, _, _)| std::cmp::Reverse(u.len()));
    for (unit, _, scale) in candidates {
        if let Some(number) = text.strip_suffix(unit) {
            if let Some(v) = parse_scaled(number.trim(), scale.log10().round() as i32) {
                return Ok(v);
            }
        }
    }
    if text.parse::<f64>().is_ok() {
        Err(format!("`{text}` is missing a unit, expected {dim}"))
    } else {
        Err(format!("cannot read `{text}` as a quantity with {dim}"))
    }
}

/// Parses `number` times `10^shift` with a single rounding.
fn parse_scaled(number: &str, shift: i32) -> Option<f64> {
    number.parse::<f64>().ok()?;
    let (mantissa, exp) = match number.find(['e', 'E']) {
        Some(i) => (&number[..i], number[i + 1..].parse::<i32>().ok()?),
        None => (number, 0),
    };
    format!("{mantissa}e{}", exp + shift).parse().ok()
}

/// Formats an SI value with the base suffix of `dim`.
pub fn format_quantity(value: f64, dim: Dim) -> String {
    let rounded: f64 = format!("{value:.9e}").parse().unwrap_or(value);
    format!("{rounded}{}", dim.base_suffix())
}
