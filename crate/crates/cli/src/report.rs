use serde::Serialize;
use serde_json::{Map, Value};

/// Output of one experiment run. `exact` holds seed-independent quantities,
/// `sampled` the seeded Monte-Carlo ones.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentResult {
    pub experiment: String,
    pub params: Map<String, Value>,
    pub seed: u64,
    pub exact: Map<String, Value>,
    pub sampled: Map<String, Value>,
    pub runtime_ms: f64,
}

pub fn render_json(result: &ExperimentResult) -> String {
    serde_json::to_string_pretty(result).expect("result serializes")
}

fn flatten(prefix: &str, v: &Value, out: &mut Vec<(String, String)>) {
    match v {
        Value::Object(m) => {
            for (k, v) in m {
                let key = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
                flatten(&key, v, out);
            }
        }
        Value::Array(items) if items.iter().any(|i| i.is_object()) => {
            for (i, v) in items.iter().enumerate() {
                flatten(&format!("{prefix}[{i}]"), v, out);
            }
        }
        other => out.push((prefix.to_string(), compact(other))),
    }
}

fn compact(v: &Value) -> String {
    match v {
        Value::Number(n) => match n.as_f64() {
            Some(x) if n.is_f64() => format!("{x:.6}"),
            _ => n.to_string(),
        },
        Value::Array(items) => format!("[{}]", items.iter().map(compact).collect::<Vec<_>>().join(", ")),
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

/// Human-readable, lossy rendering.
pub fn render_table(result: &ExperimentResult) -> String {
    let mut rows = vec![
        ("experiment".to_string(), result.experiment.clone()),
        ("seed".to_string(), result.seed.to_string()),
    ];
    for (section, map) in [("params", &result.params), ("exact", &result.exact), ("sampled", &result.sampled)] {
        flatten(section, &Value::Object(map.clone()), &mut rows);
    }
    rows.push(("runtime_ms".to_string(), format!("{:.3}", result.runtime_ms)));
    let width = rows.iter().map(|(k, _)| k.chars().count()).max().unwrap_or(0);
    let mut out = String::new();
    for (k, v) in rows {
        out.push_str(&format!("{k:<width$}  {v}\n"));
    }
    out
}
