//! Report serialization: JSON with 17 significant digits per float, and CSV.

use std::io::{self, Write};

use serde::Serialize;
use serde_json::ser::{CompactFormatter, Formatter};

use crate::error::Result;

/// Compact JSON formatter writing every float as `d.dddddddddddddddde±x`.
#[derive(Default)]
pub struct FullPrecision(CompactFormatter);

impl Formatter for FullPrecision {
    fn write_f64<W: ?Sized + Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        writer.write_all(format_float(value).as_bytes())
    }

    fn write_f32<W: ?Sized + Write>(&mut self, writer: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(writer, value as f64)
    }
}

/// Seventeen significant digits, enough to round-trip any `f64`.
pub fn format_float(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn to_json<S: Serialize + ?Sized>(value: &S) -> Result<String> {
    let mut out = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut out, FullPrecision::default());
    value.serialize(&mut ser)?;
    Ok(String::from_utf8(out).expect("serde_json emits UTF-8"))
}

/// Reports that flatten to a table.
pub trait CsvRows {
    fn header(&self) -> Vec<&'static str>;
    fn rows(&self) -> Vec<Vec<String>>;
}

pub fn to_csv<R: CsvRows + ?Sized>(report: &R) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(report.header())?;
    for row in report.rows() {
        w.write_record(row)?;
    }
    let bytes = w.into_inner().map_err(|e| crate::Error::Io(e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("csv emits UTF-8"))
}

impl<T: crate::Scalar> CsvRows for crate::influence::InfluenceReport<T> {
    fn header(&self) -> Vec<&'static str> {
        vec!["coordinate", "value", "is_argmax"]
    }

    fn rows(&self) -> Vec<Vec<String>> {
        self.values
            .iter()
            .enumerate()
            .map(|(i, v)| {
                vec![
                    (i + 1).to_string(),
                    format_float(v.as_f64()),
                    (i + 1 == self.argmax).to_string(),
                ]
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[derive(Serialize, serde::Deserialize, PartialEq, Debug)]
    struct Sample {
        a: f64,
        b: Vec<f64>,
        n: u32,
    }

    #[test]
    fn floats_round_trip_exactly() {
        let s = Sample {
            a: 0.1 + 0.2,
            b: vec![1.0, -1.0 / 3.0, 1e-300, 0.0, f64::MAX],
            n: 7,
        };
        let text = to_json(&s).unwrap();
        assert!(text.contains("3.0000000000000004e-1"));
        let back: Sample = serde_json::from_str(&text).unwrap();
        assert_eq!(back, s);
        assert_eq!(to_json(&s).unwrap(), text);
    }

    #[test]
    fn influence_csv() {
        let f = crate::BoolFn::<f64>::long_code(3, 2).unwrap();
        let r = crate::influence::influence_report(&f);
        let text = to_csv(&r).unwrap();
        assert_eq!(text.lines().count(), 4);
        assert!(text.lines().nth(2).unwrap().ends_with("true"));
    }
}
