//! JSON helpers: floats are written with 17 significant digits.

use mfree::measures::format_f64_17;
use serde::Serialize;
use serde_json::{Number, Value};

/// A float as a JSON number with 17 significant digits; non-finite values
/// become `null`.
pub fn num(x: f64) -> Value {
    if !x.is_finite() {
        return Value::Null;
    }
    serde_json::from_str(&format_f64_17(x)).expect("formatted float is valid JSON")
}

/// An integer of arbitrary size as a JSON number.
pub fn big(digits: &str) -> Value {
    Value::Number(digits.parse::<Number>().expect("decimal integer"))
}

/// Serializes `x` and rewrites every float it contains.
pub fn to_value<T: Serialize>(x: &T) -> Value {
    let mut v = serde_json::to_value(x).expect("serializable report");
    fix_floats(&mut v);
    v
}

fn fix_floats(v: &mut Value) {
    match v {
        Value::Number(n) => {
            let text = n.to_string();
            if text.contains(['.', 'e', 'E']) {
                *v = num(text.parse().expect("float"));
            }
        }
        Value::Array(items) => items.iter_mut().for_each(fix_floats),
        Value::Object(map) => map.values_mut().for_each(fix_floats),
        _ => {}
    }
}

pub fn print(v: &Value) {
    println!("{}", serde_json::to_string_pretty(v).expect("serializable"));
}

/// Left-aligned text table.
pub fn table(header: &[&str], rows: &[Vec<String>]) -> String {
    let mut widths: Vec<usize> = header.iter().map(|h| h.chars().count()).collect();
    for row in rows {
        for (w, cell) in widths.iter_mut().zip(row) {
            *w = (*w).max(cell.chars().count());
        }
    }
    let line = |cells: Vec<&str>| {
        cells
            .iter()
            .zip(&widths)
            .map(|(c, w)| format!("{c:<w$}"))
            .collect::<Vec<_>>()
            .join("  ")
            .trim_end()
            .to_string()
    };
    let mut out = vec![line(header.to_vec())];
    for row in rows {
        out.push(line(row.iter().map(String::as_str).collect()));
    }
    out.join("\n")
}
