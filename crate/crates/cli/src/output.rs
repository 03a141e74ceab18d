use std::fs;
use std::io::{self, Write};
use std::path::Path;

use serde_json::{Number, Value};

/// Significant digits kept in every printed float.
pub const DIGITS: usize = 12;

pub fn round_sig(x: f64) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return x;
    }
    format!("{:.*e}", DIGITS - 1, x).parse().unwrap_or(x)
}

/// Rounds every float in a JSON tree to [`DIGITS`] significant digits.
pub fn round_json(v: Value) -> Value {
    match v {
        Value::Number(n) if n.is_f64() => {
            let x = round_sig(n.as_f64().unwrap_or(f64::NAN));
            Number::from_f64(x).map_or(Value::Null, Value::Number)
        }
        Value::Array(items) => Value::Array(items.into_iter().map(round_json).collect()),
        Value::Object(map) => {
            Value::Object(map.into_iter().map(|(k, v)| (k, round_json(v))).collect())
        }
        other => other,
    }
}

/// Pretty JSON to `out`, or stdout when absent.
pub fn emit(value: Value, out: Option<&Path>) -> io::Result<()> {
    let mut text = serde_json::to_string_pretty(&round_json(value)).map_err(io::Error::other)?;
    text.push('\n');
    match out {
        Some(p) => fs::write(p, text),
        None => io::stdout().write_all(text.as_bytes()),
    }
}

/// Writes a CSV with a header row; floats are rounded like the JSON.
pub fn write_csv(
    path: &Path,
    header: &[&str],
    rows: impl IntoIterator<Item = Vec<f64>>,
) -> io::Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(header)?;
    for row in rows {
        w.write_record(row.iter().map(|&x| fmt_num(x)))?;
    }
    w.flush()
}

fn fmt_num(x: f64) -> String {
    if x.fract() == 0.0 && x.abs() < 1e15 {
        format!("{}", x as i64)
    } else {
        format!("{:?}", round_sig(x))
    }
}
