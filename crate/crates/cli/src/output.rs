//! Number formatting and report writers. Every float goes out with 12
//! significant digits.

use serde_json::Value;

/// `x` with 12 significant digits, in the style of C's `%.12g`.
pub fn g12(x: f64) -> String {
    if x.is_nan() {
        return "nan".to_string();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf" } else { "-inf" }.to_string();
    }
    if x == 0.0 {
        return "0".to_string();
    }
    let sci = format!("{x:.11e}");
    let (mant, exp) = sci.split_once('e').unwrap();
    let exp: i32 = exp.parse().unwrap();
    if (-5..12).contains(&exp) {
        let s = format!("{:.*}", (11 - exp) as usize, x);
        trim_zeros(&s).to_string()
    } else {
        format!("{}e{exp}", trim_zeros(mant))
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// Rounds every non-integer number in a JSON tree to 12 significant
/// digits; non-finite numbers become null.
pub fn round_json(v: Value) -> Value {
    match v {
        Value::Number(n) if n.is_f64() => {
            let x = n.as_f64().unwrap();
            g12(x).parse::<f64>().ok().and_then(serde_json::Number::from_f64).map_or(Value::Null, Value::Number)
        }
        Value::Array(a) => Value::Array(a.into_iter().map(round_json).collect()),
        Value::Object(o) => Value::Object(o.into_iter().map(|(k, v)| (k, round_json(v))).collect()),
        other => other,
    }
}

/// Pretty JSON with rounded numbers and an optional generation stamp.
pub fn json_text(v: Value, stamp: Option<&str>) -> String {
    let mut v = round_json(v);
    if let (Some(s), Value::Object(o)) = (stamp, &mut v) {
        o.insert("generated".to_string(), Value::String(s.to_string()));
    }
    let mut s = serde_json::to_string_pretty(&v).expect("serializable");
    s.push('\n');
    s
}

/// CSV text: optional `# generated` line, header, rows. Fields holding
/// commas or quotes are quoted.
pub fn csv_text(header: &[&str], rows: &[Vec<String>], stamp: Option<&str>) -> String {
    let mut s = String::new();
    if let Some(t) = stamp {
        s.push_str(&format!("# generated {t}\n"));
    }
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).expect("in-memory write");
    for r in rows {
        debug_assert_eq!(r.len(), header.len());
        w.write_record(r).expect("in-memory write");
    }
    s.push_str(std::str::from_utf8(&w.into_inner().expect("in-memory flush")).expect("utf-8 fields"));
    s
}
