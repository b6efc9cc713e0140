use std::fmt::Write as _;
use std::path::Path;

use num_complex::Complex64;

use super::{parse_error, read_text};
use crate::error::{Error, Result};
use crate::transmission::SParamTrace;

/// Number format of a Touchstone data line.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TouchstoneFormat {
    RealImaginary,
    MagnitudeAngle,
    DecibelAngle,
}

impl TouchstoneFormat {
    fn token(self) -> &'static str {
        match self {
            Self::RealImaginary => "RI",
            Self::MagnitudeAngle => "MA",
            Self::DecibelAngle => "DB",
        }
    }

    fn decode(self, a: f64, b: f64) -> Complex64 {
        match self {
            Self::RealImaginary => Complex64::new(a, b),
            Self::MagnitudeAngle => Complex64::from_polar(a, b.to_radians()),
            Self::DecibelAngle => Complex64::from_polar(10f64.powf(a / 20.0), b.to_radians()),
        }
    }

    fn encode(self, s: Complex64) -> (f64, f64) {
        match self {
            Self::RealImaginary => (s.re, s.im),
            Self::MagnitudeAngle => (s.norm(), s.arg().to_degrees()),
            Self::DecibelAngle => (20.0 * s.norm().log10(), s.arg().to_degrees()),
        }
    }
}

struct OptionLine {
    unit: f64,
    format: TouchstoneFormat,
}

/// Parses `# <unit> <parameter> <format> R <ohms>`; absent fields take the
/// defaults GHz, S, MA, R 50.
fn parse_option_line(line: &str) -> std::result::Result<OptionLine, String> {
    let mut opts = OptionLine { unit: 1e9, format: TouchstoneFormat::MagnitudeAngle };
    let mut tokens = line.trim_start_matches('#').split_whitespace();
    while let Some(tok) = tokens.next() {
        match tok.to_ascii_uppercase().as_str() {
            "HZ" => opts.unit = 1.0,
            "KHZ" => opts.unit = 1e3,
            "MHZ" => opts.unit = 1e6,
            "GHZ" => opts.unit = 1e9,
            "RI" => opts.format = TouchstoneFormat::RealImaginary,
            "MA" => opts.format = TouchstoneFormat::MagnitudeAngle,
            "DB" => opts.format = TouchstoneFormat::DecibelAngle,
            "S" => {}
            "Y" | "Z" | "H" | "G" => return Err(format!("only S parameters are supported, found {tok}")),
            "R" => {
                let r = tokens.next().ok_or("R without a reference impedance")?;
                r.parse::<f64>().map_err(|_| format!("invalid reference impedance {r}"))?;
            }
            other => return Err(format!("unknown option token {other}")),
        }
    }
    Ok(opts)
}

/// Parses a two-port Touchstone v1 document.
///
/// Data values are read in groups of nine (frequency, S11, S21, S12, S22)
/// regardless of line breaks. S12 and S22 are discarded.
pub fn parse_touchstone(text: &str, origin: &Path) -> Result<SParamTrace> {
    let mut options: Option<OptionLine> = None;
    let mut values = Vec::new();
    for (number, raw) in text.lines().enumerate() {
        let line = raw.split('!').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        if line.starts_with('#') {
            if options.is_some() {
                return Err(parse_error(origin, format!("line {}: second option line", number + 1)));
            }
            options = Some(parse_option_line(line).map_err(|m| parse_error(origin, format!("line {}: {m}", number + 1)))?);
            continue;
        }
        for tok in line.split_whitespace() {
            let v = tok
                .parse::<f64>()
                .map_err(|_| parse_error(origin, format!("line {}: invalid number {tok}", number + 1)))?;
            values.push(v);
        }
    }
    let options = options.unwrap_or(OptionLine { unit: 1e9, format: TouchstoneFormat::MagnitudeAngle });
    if values.is_empty() || values.len() % 9 != 0 {
        return Err(parse_error(
            origin,
            format!("{} data values do not form complete two-port records of nine", values.len()),
        ));
    }
    let mut freq = Vec::with_capacity(values.len() / 9);
    let mut s11 = Vec::with_capacity(values.len() / 9);
    let mut s21 = Vec::with_capacity(values.len() / 9);
    for rec in values.chunks_exact(9) {
        freq.push(rec[0] * options.unit);
        s11.push(options.format.decode(rec[1], rec[2]));
        s21.push(options.format.decode(rec[3], rec[4]));
    }
    SParamTrace::new(freq, s21, Some(s11)).map_err(|e| match e {
        Error::Domain(m) => parse_error(origin, m),
        other => other,
    })
}

pub fn read_touchstone(path: &Path) -> Result<SParamTrace> {
    parse_touchstone(&read_text(path)?, path)
}

/// Two-port Touchstone text in Hz with a 50 Ohm reference.
///
/// The trace holds one direction only, so S12 = S21 and S22 = S11 are
/// written (reciprocal, symmetric device). A missing S11 is written as zero.
pub fn write_touchstone(trace: &SParamTrace, format: TouchstoneFormat) -> String {
    let mut out = format!("! two-port S-parameters\n# HZ S {} R 50\n", format.token());
    for i in 0..trace.len() {
        let s11 = trace.s11.as_ref().map_or(Complex64::new(0.0, 0.0), |s| s[i]);
        let (a11, b11) = format.encode(s11);
        let (a21, b21) = format.encode(trace.s21[i]);
        let _ = writeln!(out, "{} {a11} {b11} {a21} {b21} {a21} {b21} {a11} {b11}", trace.freq[i]);
    }
    out
}
