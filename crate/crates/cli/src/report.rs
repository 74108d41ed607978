//! Reports are built once as an ordered JSON value and rendered either as
//! indented text or as JSON, so the two formats carry the same fields.

use serde_json::{Map, Value};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Text,
    Structured,
}

#[derive(Default)]
pub struct Report {
    fields: Map<String, Value>,
}

impl Report {
    pub fn new(command: &str, seed: u64) -> Self {
        let mut r = Report::default();
        r.put("command", command);
        r.put("seed", seed);
        r
    }

    pub fn put(&mut self, key: &str, v: impl Into<Value>) {
        self.fields.insert(key.to_string(), v.into());
    }

    pub fn render(self, format: Format) -> String {
        let v = Value::Object(self.fields);
        match format {
            Format::Structured => {
                let mut s = serde_json::to_string_pretty(&v).expect("report serializes");
                s.push('\n');
                s
            }
            Format::Text => {
                let mut out = String::new();
                if let Value::Object(m) = &v {
                    write_object(&mut out, m, 0);
                }
                out
            }
        }
    }
}

/// Builds an ordered object from key/value pairs.
pub fn obj<K: Into<String>>(pairs: impl IntoIterator<Item = (K, Value)>) -> Value {
    Value::Object(pairs.into_iter().map(|(k, v)| (k.into(), v)).collect())
}

fn scalar(v: &Value) -> Option<String> {
    match v {
        Value::Null => Some("-".into()),
        Value::Bool(b) => Some(b.to_string()),
        Value::Number(n) => Some(n.to_string()),
        Value::String(s) => Some(s.clone()),
        Value::Array(a) if a.is_empty() => Some("[]".into()),
        Value::Array(a) if a.iter().all(|x| matches!(x, Value::Number(_) | Value::Bool(_))) => {
            Some(format!("({})", a.iter().map(|x| scalar(x).unwrap()).collect::<Vec<_>>().join(", ")))
        }
        Value::Object(m) if m.is_empty() => Some("{}".into()),
        _ => None,
    }
}

fn write_object(out: &mut String, m: &Map<String, Value>, indent: usize) {
    let pad = " ".repeat(indent);
    for (k, v) in m {
        match scalar(v) {
            Some(s) => out.push_str(&format!("{pad}{k}: {s}\n")),
            None => {
                out.push_str(&format!("{pad}{k}:\n"));
                write_nested(out, v, indent + 2);
            }
        }
    }
}

fn write_nested(out: &mut String, v: &Value, indent: usize) {
    let pad = " ".repeat(indent);
    match v {
        Value::Object(m) => write_object(out, m, indent),
        Value::Array(a) => {
            for item in a {
                match scalar(item) {
                    Some(s) => out.push_str(&format!("{pad}{s}\n")),
                    None => {
                        out.push_str(&format!("{pad}-\n"));
                        write_nested(out, item, indent + 2);
                    }
                }
            }
        }
        other => out.push_str(&format!("{pad}{}\n", scalar(other).unwrap_or_default())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn text_mirrors_structure() {
        let mut r = Report::new("analyze", 0);
        r.put("dim", 2);
        r.put("pair", json!([1, 0]));
        r.put("hull", obj([("2", json!([1, 0])), ("generic", json!([0, 0]))]));
        r.put("rows", json!(["{2^inf}", "{3}"]));
        assert_eq!(
            r.render(Format::Text),
            "command: analyze\nseed: 0\ndim: 2\npair: (1, 0)\nhull:\n  2: (1, 0)\n  generic: (0, 0)\nrows:\n  {2^inf}\n  {3}\n"
        );
        let mut r = Report::new("x", 1);
        r.put("b", true);
        let s = r.render(Format::Structured);
        assert!(s.find("\"command\"").unwrap() < s.find("\"seed\"").unwrap());
    }
}
