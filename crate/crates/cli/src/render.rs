//! Output formats. Table and CSV are both derived from the JSON value, so all
//! three formats carry the same scalars.

use serde_json::Value;

use crate::args::Format;

/// Flattens nested objects and arrays to `(path, scalar)` pairs, in document order.
/// Object keys join with `.`, array elements get `[i]`.
pub fn flatten(value: &Value) -> Vec<(String, String)> {
    let mut out = Vec::new();
    walk(value, String::new(), &mut out);
    out
}

fn walk(value: &Value, path: String, out: &mut Vec<(String, String)>) {
    match value {
        Value::Object(map) => {
            for (k, v) in map {
                let p = if path.is_empty() {
                    k.clone()
                } else {
                    format!("{path}.{k}")
                };
                walk(v, p, out);
            }
        }
        Value::Array(items) => {
            for (i, v) in items.iter().enumerate() {
                walk(v, format!("{path}[{i}]"), out);
            }
        }
        _ => out.push((path, scalar(value))),
    }
}

/// Scalars as they appear in JSON, with strings unquoted.
pub fn scalar(value: &Value) -> String {
    match value {
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

/// The row list of a tabular report (`report.rows`), if any.
fn rows(envelope: &Value) -> Option<&Vec<Value>> {
    envelope.pointer("/report/rows")?.as_array()
}

fn without_rows(envelope: &Value) -> Value {
    let mut v = envelope.clone();
    if let Some(report) = v.pointer_mut("/report").and_then(Value::as_object_mut) {
        report.remove("rows");
    }
    v
}

pub fn render(envelope: &Value, format: Format) -> String {
    match format {
        Format::Json => {
            let mut s = serde_json::to_string_pretty(envelope).expect("Value always serialises");
            s.push('\n');
            s
        }
        Format::Table => table(envelope),
        Format::Csv => csv_text(envelope),
    }
}

fn table(envelope: &Value) -> String {
    let pairs = flatten(&without_rows(envelope));
    let width = pairs.iter().map(|(k, _)| k.len()).max().unwrap_or(0);
    let mut s = String::new();
    for (k, v) in &pairs {
        s.push_str(&format!("{k:<width$}  {v}\n"));
    }
    if let Some(rows) = rows(envelope) {
        let flat: Vec<Vec<(String, String)>> = rows.iter().map(flatten).collect();
        if let Some(first) = flat.first() {
            let headers: Vec<&str> = first.iter().map(|(k, _)| k.as_str()).collect();
            let widths: Vec<usize> = (0..headers.len())
                .map(|j| {
                    flat.iter()
                        .map(|r| r.get(j).map_or(0, |(_, v)| v.len()))
                        .max()
                        .unwrap_or(0)
                        .max(headers[j].len())
                })
                .collect();
            s.push('\n');
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
            s.push_str(&line(headers.clone()));
            s.push('\n');
            for r in &flat {
                s.push_str(&line(r.iter().map(|(_, v)| v.as_str()).collect()));
                s.push('\n');
            }
        }
    }
    s
}

fn csv_text(envelope: &Value) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    match rows(envelope) {
        Some(rows) => {
            let flat: Vec<Vec<(String, String)>> = rows.iter().map(flatten).collect();
            if let Some(first) = flat.first() {
                w.write_record(first.iter().map(|(k, _)| k))
                    .expect("in-memory write");
            }
            for r in &flat {
                w.write_record(r.iter().map(|(_, v)| v))
                    .expect("in-memory write");
            }
        }
        None => {
            w.write_record(["key", "value"]).expect("in-memory write");
            for (k, v) in flatten(envelope) {
                w.write_record([k, v]).expect("in-memory write");
            }
        }
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("csv output is UTF-8")
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn flattens_in_order() {
        let v = json!({"b": 1, "a": {"x": [true, "s"], "y": null}});
        assert_eq!(
            flatten(&v),
            vec![
                ("b".into(), "1".into()),
                ("a.x[0]".into(), "true".into()),
                ("a.x[1]".into(), "s".into()),
                ("a.y".into(), "null".into()),
            ]
        );
    }

    #[test]
    fn csv_uses_rows_when_present() {
        let v = json!({"config": {"seed": 1}, "report": {"rows": [{"a": 1, "b": "x,y"}, {"a": 2, "b": "z"}]}});
        assert_eq!(render(&v, Format::Csv), "a,b\n1,\"x,y\"\n2,z\n");
    }
}
