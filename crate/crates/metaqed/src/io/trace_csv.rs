use std::path::Path;

use num_complex::Complex64;

use super::{parse_error, read_text, Table};
use crate::error::{Error, Result};
use crate::transmission::SParamTrace;

const REQUIRED: [&str; 3] = ["freq_ghz", "s21_re", "s21_im"];
const REFLECTION: [&str; 2] = ["s11_re", "s11_im"];

/// Parses `freq_ghz,s21_re,s21_im[,s11_re,s11_im]`; lines starting with `#` are skipped.
pub fn parse_trace_csv(text: &str, origin: &Path) -> Result<SParamTrace> {
    let mut reader = csv::ReaderBuilder::new().comment(Some(b'#')).trim(csv::Trim::All).from_reader(text.as_bytes());
    let headers = reader.headers().map_err(|e| parse_error(origin, e.to_string()))?.clone();
    let names: Vec<&str> = headers.iter().collect();
    let with_s11 = match names.as_slice() {
        [a, b, c] if [*a, *b, *c] == REQUIRED => false,
        [a, b, c, d, e] if [*a, *b, *c] == REQUIRED && [*d, *e] == REFLECTION => true,
        _ => {
            return Err(parse_error(
                origin,
                format!("header must be freq_ghz,s21_re,s21_im[,s11_re,s11_im], found {}", names.join(",")),
            ))
        }
    };
    let (mut freq, mut s21, mut s11) = (Vec::new(), Vec::new(), Vec::new());
    for record in reader.records() {
        let record = record.map_err(|e| parse_error(origin, e.to_string()))?;
        let line = record.position().map_or(0, |p| p.line());
        let values = record
            .iter()
            .map(|v| v.parse::<f64>())
            .collect::<std::result::Result<Vec<f64>, _>>()
            .map_err(|_| parse_error(origin, format!("line {line}: invalid number")))?;
        freq.push(values[0] * 1e9);
        s21.push(Complex64::new(values[1], values[2]));
        if with_s11 {
            s11.push(Complex64::new(values[3], values[4]));
        }
    }
    SParamTrace::new(freq, s21, with_s11.then_some(s11)).map_err(|e| match e {
        Error::Domain(m) => parse_error(origin, m),
        other => other,
    })
}

pub fn read_trace_csv(path: &Path) -> Result<SParamTrace> {
    parse_trace_csv(&read_text(path)?, path)
}

/// Trace as a table in the same column layout the reader accepts.
pub fn write_trace_csv(trace: &SParamTrace) -> Table {
    let mut table = match trace.s11 {
        Some(_) => Table::new(&["freq_ghz", "s21_re", "s21_im", "s11_re", "s11_im"]),
        None => Table::new(&REQUIRED),
    };
    for i in 0..trace.len() {
        let mut row = vec![trace.freq[i] / 1e9, trace.s21[i].re, trace.s21[i].im];
        if let Some(s11) = &trace.s11 {
            row.extend([s11[i].re, s11[i].im]);
        }
        table.push(row);
    }
    table
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reads_both_layouts() {
        let origin = Path::new("t.csv");
        let short = parse_trace_csv("# manifest: x\nfreq_ghz,s21_re,s21_im\n5.0,0.5,-0.5\n5.5,0.25,0\n", origin).unwrap();
        assert_eq!(short.freq, vec![5e9, 5.5e9]);
        assert!(short.s11.is_none());
        let long = parse_trace_csv("freq_ghz,s21_re,s21_im,s11_re,s11_im\n5,1,0,0,1\n", origin).unwrap();
        assert_eq!(long.s11.unwrap()[0], Complex64::new(0.0, 1.0));
    }

    #[test]
    fn rejects_bad_headers_and_values() {
        let origin = Path::new("t.csv");
        for text in ["f,s21_re,s21_im\n1,0,0\n", "freq_ghz,s21_re,s21_im\n1,x,0\n", "freq_ghz,s21_re,s21_im\n1,0\n"] {
            assert!(matches!(parse_trace_csv(text, origin), Err(Error::Parse { .. })), "{text}");
        }
    }

    #[test]
    fn table_round_trip_is_exact() {
        let trace = SParamTrace::new(
            vec![4.123456789e9, 6.5e9],
            vec![Complex64::new(0.1 + 0.2, -1e-17), Complex64::new(1.0 / 3.0, 2.0)],
            Some(vec![Complex64::new(0.7, 0.0), Complex64::new(-0.3, 1e-300)]),
        )
        .unwrap();
        let text = write_trace_csv(&trace).render("h").unwrap();
        let back = parse_trace_csv(&text, Path::new("t.csv")).unwrap();
        assert_eq!(back.s21, trace.s21);
        assert_eq!(back.s11, trace.s11);
        for (a, b) in back.freq.iter().zip(&trace.freq) {
            assert!((a - b).abs() <= 1e-15 * b);
        }
    }
}
