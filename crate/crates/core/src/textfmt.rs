//! Deterministic float formatting shared by the CSV/JSON emitters: 17
//! significant digits, scientific notation, byte-identical across runs.

pub(crate) fn float17(v: f64) -> String {
    if v.is_nan() {
        return "nan".to_string();
    }
    if v.is_infinite() {
        return if v > 0.0 { "inf" } else { "-inf" }.to_string();
    }
    format!("{v:.16e}")
}

/// JSON value for a float; non-finite values become null (JSON has no literal
/// for them).
pub(crate) fn float17_json(v: f64) -> String {
    if v.is_finite() {
        float17(v)
    } else {
        "null".to_string()
    }
}

pub(crate) fn json_escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\r' => out.push_str("\\r"),
            '\t' => out.push_str("\\t"),
            c if (c as u32) < 0x20 => out.push_str(&format!("\\u{:04x}", c as u32)),
            c => out.push(c),
        }
    }
    out
}
