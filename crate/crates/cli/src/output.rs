//! Report envelope and rendering.

use clap::ValueEnum;
use serde::Serialize;
use serde_json::Value;

/// Bumped whenever a report changes shape; see `schema/report.schema.json`.
pub const SCHEMA_VERSION: &str = "1.0";

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Table,
}

#[derive(Debug, Serialize)]
pub struct Envelope {
    pub schema_version: &'static str,
    pub command: String,
    pub parameters: Value,
    pub result: Value,
}

impl Envelope {
    pub fn new(command: &str, parameters: Value, result: impl Serialize) -> anyhow::Result<Self> {
        Ok(Envelope {
            schema_version: SCHEMA_VERSION,
            command: command.into(),
            parameters,
            result: serde_json::to_value(result)?,
        })
    }

    pub fn render(&self, format: Format) -> anyhow::Result<String> {
        Ok(match format {
            Format::Json => serde_json::to_string_pretty(self)? + "\n",
            Format::Table => {
                let mut out = format!("{}\n", self.command);
                if let Value::Object(p) = &self.parameters {
                    for (k, v) in p {
                        out.push_str(&format!("  {k}: {}\n", inline(v)));
                    }
                }
                out.push('\n');
                table(&self.result, &mut out);
                out
            }
        })
    }
}

fn inline(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        Value::Null => "-".into(),
        other => other.to_string(),
    }
}

fn is_record_list(items: &[Value]) -> bool {
    !items.is_empty() && items.iter().all(Value::is_object)
}

fn has_nested(v: &Value) -> bool {
    v.as_object().is_some_and(|m| {
        m.values()
            .any(|x| x.is_object() || x.as_array().is_some_and(|a| is_record_list(a)))
    })
}

fn table(v: &Value, out: &mut String) {
    match v {
        Value::Object(map) => {
            let width = map.keys().map(|k| k.len()).max().unwrap_or(0);
            let mut nested = vec![];
            for (k, val) in map {
                match val {
                    Value::Object(_) => nested.push((k, val)),
                    Value::Array(items) if is_record_list(items) => nested.push((k, val)),
                    _ => out.push_str(&format!("{k:<width$}  {}\n", inline(val))),
                }
            }
            for (k, val) in nested {
                out.push_str(&format!("\n[{k}]\n"));
                table(val, out);
            }
        }
        Value::Array(items) if is_record_list(items) && items.iter().any(has_nested) => {
            for (i, item) in items.iter().enumerate() {
                if i > 0 {
                    out.push('\n');
                }
                out.push_str(&format!("#{}\n", i + 1));
                table(item, out);
            }
        }
        Value::Array(items) if is_record_list(items) => {
            let keys: Vec<&String> = items[0]
                .as_object()
                .map(|m| m.keys().collect())
                .unwrap_or_default();
            let rows: Vec<Vec<String>> = items
                .iter()
                .map(|it| keys.iter().map(|k| inline(&it[k.as_str()])).collect())
                .collect();
            let widths: Vec<usize> = keys
                .iter()
                .enumerate()
                .map(|(i, k)| {
                    rows.iter()
                        .map(|r| r[i].len())
                        .chain([k.len()])
                        .max()
                        .unwrap_or(0)
                })
                .collect();
            let line = |cells: Vec<String>| {
                cells
                    .iter()
                    .zip(&widths)
                    .map(|(c, w)| format!("{c:<w$}"))
                    .collect::<Vec<_>>()
                    .join("  ")
                    .trim_end()
                    .to_string()
                    + "\n"
            };
            out.push_str(&line(keys.iter().map(|k| k.to_string()).collect()));
            for row in rows {
                out.push_str(&line(row));
            }
        }
        other => out.push_str(&format!("{}\n", inline(other))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn table_layout() {
        let e = Envelope::new(
            "isotropic",
            json!({"bound": 2}),
            json!({"count": 2, "vectors": [{"vector": [1, 0], "divisor": 3}, {"vector": [0, 1], "divisor": 3}]}),
        )
        .unwrap();
        let t = e.render(Format::Table).unwrap();
        assert!(t.contains("count    2\n"), "{t}");
        assert!(
            t.contains("[vectors]\ndivisor  vector\n3        [1,0]\n"),
            "{t}"
        );
        let j = e.render(Format::Json).unwrap();
        assert!(j.starts_with("{\n  \"schema_version\": \"1.0\""));
    }
}
