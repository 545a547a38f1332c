use std::io::Write;
use std::path::Path;

use finsler_core::curvature::Record;
use serde_json::Value;

/// Shortest representation that parses back to the same bits.
pub fn float(v: f64) -> String {
    format!("{v:?}")
}

fn join(v: &[f64]) -> String {
    v.iter().map(|x| float(*x)).collect::<Vec<_>>().join(" ")
}

fn csv_bytes(header: &[&str], rows: Vec<Vec<String>>) -> Vec<u8> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).expect("in-memory write");
    for r in rows {
        w.write_record(&r).expect("in-memory write");
    }
    w.into_inner().expect("in-memory flush")
}

pub fn records_csv(records: &[Record]) -> Vec<u8> {
    let rows = records
        .iter()
        .map(|r| {
            vec![
                join(&r.x),
                join(&r.y),
                r.quantity.name().to_string(),
                join(&r.value),
                r.method.clone(),
                r.error_estimate.map(float).unwrap_or_default(),
            ]
        })
        .collect();
    csv_bytes(
        &["x", "y", "quantity", "value", "method", "error_estimate"],
        rows,
    )
}

fn leaf(v: &Value) -> Option<String> {
    match v {
        Value::Null => Some(String::new()),
        Value::Bool(b) => Some(b.to_string()),
        Value::Number(n) if n.is_f64() => n.as_f64().map(float),
        Value::Number(n) => Some(n.to_string()),
        Value::String(s) => Some(s.clone()),
        Value::Array(a) if a.iter().all(Value::is_number) => Some(
            a.iter()
                .filter_map(Value::as_f64)
                .map(float)
                .collect::<Vec<_>>()
                .join(" "),
        ),
        _ => None,
    }
}

fn flatten(prefix: &str, v: &Value, rows: &mut Vec<Vec<String>>) {
    if let Some(s) = leaf(v) {
        rows.push(vec![prefix.to_string(), s]);
        return;
    }
    let key = |k: &str| {
        if prefix.is_empty() {
            k.to_string()
        } else {
            format!("{prefix}.{k}")
        }
    };
    match v {
        Value::Array(a) => {
            for (i, x) in a.iter().enumerate() {
                flatten(&key(&i.to_string()), x, rows);
            }
        }
        Value::Object(m) => {
            for (k, x) in m {
                flatten(&key(k), x, rows);
            }
        }
        _ => unreachable!(),
    }
}

/// Any report as `key,value` rows with dotted paths.
pub fn flat_csv(v: &Value) -> Vec<u8> {
    let mut rows = Vec::new();
    flatten("", v, &mut rows);
    csv_bytes(&["key", "value"], rows)
}

pub fn json_bytes(v: &Value) -> Vec<u8> {
    let mut out = serde_json::to_vec_pretty(v).expect("reports serialize");
    out.push(b'\n');
    out
}

pub fn write(bytes: &[u8], out: Option<&Path>) -> std::io::Result<()> {
    match out {
        Some(p) => std::fs::write(p, bytes),
        None => std::io::stdout().lock().write_all(bytes),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn floats_round_trip() {
        for v in [0.1, 1e-300, 123456789.0, -2.5e17, 0.13619967309482374] {
            assert_eq!(float(v).parse::<f64>().unwrap(), v);
        }
    }

    #[test]
    fn flattening() {
        let v = json!({"a": {"b": [1.0, 2.5]}, "rows": [{"ok": true}], "n": null, "k": 16});
        let text = String::from_utf8(flat_csv(&v)).unwrap();
        assert_eq!(text, "key,value\na.b,1.0 2.5\nk,16\nn,\nrows.0.ok,true\n");
    }
}
