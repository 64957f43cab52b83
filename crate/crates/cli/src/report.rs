//! Deterministic JSON and CSV rendering.
//!
//! Objects keep sorted keys. Floats are written with 17 significant digits;
//! non-finite values become the strings "inf", "-inf" and "nan".

use serde_json::{Map, Number, Value};
use versal::{CMatrix, C64};

pub fn num(x: f64) -> Value {
    if x.is_nan() {
        return Value::from("nan");
    }
    if x.is_infinite() {
        return Value::from(if x > 0.0 { "inf" } else { "-inf" });
    }
    let text = format!("{x:.16e}");
    Value::Number(text.parse::<Number>().expect("formatted float is valid JSON"))
}

pub fn complex(z: C64) -> Value {
    Value::Array(vec![num(z.re), num(z.im)])
}

pub fn complex_vec(v: &[C64]) -> Value {
    Value::Array(v.iter().copied().map(complex).collect())
}

/// Row-major nested arrays of `[re, im]` pairs.
pub fn matrix(a: &CMatrix) -> Value {
    Value::Array((0..a.nrows()).map(|i| complex_vec(&a.row(i))).collect())
}

pub fn object<I, K>(entries: I) -> Value
where
    I: IntoIterator<Item = (K, Value)>,
    K: Into<String>,
{
    Value::Object(entries.into_iter().map(|(k, v)| (k.into(), v)).collect::<Map<_, _>>())
}

pub fn to_json_string(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("report serializes");
    s.push('\n');
    s
}

/// CSV cell for a float: same 17-digit rendering as JSON.
pub fn cell(x: f64) -> String {
    match num(x) {
        Value::String(s) => s,
        v => v.to_string(),
    }
}

pub fn cell_opt(x: Option<f64>) -> String {
    x.map(cell).unwrap_or_default()
}

pub fn to_csv(header: &[&str], rows: &[Vec<String>]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).expect("in-memory write");
    for r in rows {
        w.write_record(r).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 cells")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_have_seventeen_digits_and_round_trip() {
        for x in [0.1, -2.0, 1.0 / 3.0, 6.02214076e23, 5e-324, f64::MAX] {
            let v = num(x);
            let s = v.to_string();
            let mantissa = s.trim_start_matches('-').split('e').next().unwrap().replace('.', "");
            assert_eq!(mantissa.len(), 17, "{s}");
            assert_eq!(s.parse::<f64>().unwrap(), x);
        }
    }

    #[test]
    fn non_finite_become_strings() {
        assert_eq!(num(f64::NAN), Value::from("nan"));
        assert_eq!(num(f64::NEG_INFINITY), Value::from("-inf"));
        assert_eq!(cell(f64::INFINITY), "inf");
    }

    #[test]
    fn keys_are_sorted() {
        let v = object([("zeta", num(1.0)), ("alpha", num(2.0))]);
        let s = serde_json::to_string(&v).unwrap();
        assert!(s.find("alpha").unwrap() < s.find("zeta").unwrap());
    }

    #[test]
    fn csv_layout() {
        let out = to_csv(&["a", "b"], &[vec![cell(1.0), cell_opt(None)]]);
        assert_eq!(out, "a,b\n1.0000000000000000e+0,\n");
    }
}
