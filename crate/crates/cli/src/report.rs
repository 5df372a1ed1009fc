use serde::Serialize;
use serde_json::{Map, Value};

use crate::args::Format;

/// Outcome of one experiment.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Report {
    pub command: String,
    /// The configuration that produced this report.
    pub config: Value,
    pub metrics: Map<String, Value>,
    /// Oracle calls made, summed over every oracle counter.
    pub queries: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wall_time_ms: Option<u64>,
}

impl Report {
    pub fn new(command: &str, config: Value) -> Self {
        Self {
            command: command.to_string(),
            config,
            metrics: Map::new(),
            queries: 0,
            wall_time_ms: None,
        }
    }

    pub fn set(&mut self, key: &str, value: impl Serialize) {
        let v = serde_json::to_value(value).expect("metrics are plain data");
        self.metrics.insert(key.to_string(), v);
    }

    pub fn metric(&self, key: &str) -> Option<&Value> {
        self.metrics.get(key)
    }

    pub fn render(&self, format: Format) -> anyhow::Result<String> {
        match format {
            Format::Json => Ok(serde_json::to_string_pretty(self)? + "\n"),
            Format::Csv => {
                let mut w = csv::Writer::from_writer(Vec::new());
                w.write_record(["key", "value"])?;
                w.write_record(["command", &self.command])?;
                let mut rows = Vec::new();
                flatten("config", &self.config, &mut rows);
                for (k, v) in &self.metrics {
                    flatten(k, v, &mut rows);
                }
                rows.push(("queries".into(), self.queries.to_string()));
                if let Some(t) = self.wall_time_ms {
                    rows.push(("wall_time_ms".into(), t.to_string()));
                }
                for (k, v) in rows {
                    w.write_record([k, v])?;
                }
                Ok(String::from_utf8(w.into_inner()?)?)
            }
        }
    }
}

/// Nested objects become dotted keys; arrays stay JSON-encoded.
fn flatten(prefix: &str, v: &Value, out: &mut Vec<(String, String)>) {
    match v {
        Value::Object(m) => {
            for (k, x) in m {
                flatten(&format!("{prefix}.{k}"), x, out);
            }
        }
        Value::String(s) => out.push((prefix.to_string(), s.clone())),
        Value::Null => out.push((prefix.to_string(), String::new())),
        other => out.push((prefix.to_string(), other.to_string())),
    }
}
