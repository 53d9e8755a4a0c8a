//! Bundles earlier run summaries into one reproduction record.

use std::path::PathBuf;

use serde_json::{json, Map, Value};

use crate::error::CliError;

const MISSING: &str = "missing";

fn slot(manifold: &str) -> Option<&'static str> {
    match manifold {
        "integrable" | "composite_integrable" => Some("integrable"),
        "chaotic" | "composite_chaotic" => Some("chaotic"),
        _ => None,
    }
}

fn fields() -> Map<String, Value> {
    ["metric_max_rel_err", "scalar_sign", "lambda_j", "ige"]
        .iter()
        .map(|k| (k.to_string(), Value::from(MISSING)))
        .collect()
}

/// Reads every input summary. A listed file that cannot be read is an
/// error; expected results that no input supplies are marked `"missing"`.
pub fn build(inputs: &[PathBuf]) -> Result<Value, CliError> {
    if inputs.is_empty() {
        return Err(CliError::validation("inputs", "no input files given"));
    }
    let mut manifolds = Map::new();
    manifolds.insert("integrable".into(), Value::Object(fields()));
    manifolds.insert("chaotic".into(), Value::Object(fields()));
    let mut chain = Map::new();
    chain.insert("(0,2)".into(), Value::from(MISSING));
    chain.insert("(1,1)".into(), Value::from(MISSING));
    let mut other = Vec::new();

    for path in inputs {
        let text = std::fs::read_to_string(path).map_err(|e| {
            let mut err = CliError::validation("inputs", format!("cannot read {}: {e}", path.display()));
            err.details = Some(json!({ "missing": path }));
            err
        })?;
        let v: Value = serde_json::from_str(&text)
            .map_err(|e| CliError::validation("inputs", format!("{}: {e}", path.display())))?;
        let kind = v.get("kind").and_then(Value::as_str).unwrap_or_default();
        let name = v
            .get("manifold")
            .or_else(|| v.get("family"))
            .and_then(Value::as_str)
            .unwrap_or_default();
        let target = slot(name).and_then(|s| manifolds.get_mut(s)).and_then(Value::as_object_mut);
        match (kind, target) {
            ("metric", Some(t)) => {
                t.insert("metric_max_rel_err".into(), v["max_rel_err"].clone());
            }
            ("curvature", Some(t)) => {
                t.insert("scalar_sign".into(), v["scalar_sign"].clone());
            }
            ("jacobi", Some(t)) => {
                t.insert("lambda_j".into(), v["lambda_j"].clone());
            }
            ("ige", Some(t)) => {
                t.insert("ige".into(), v["selected"].clone());
                t.insert("c_ig".into(), v["fit"]["logarithmic"]["rate"].clone());
                t.insert("k_ig".into(), v["fit"]["linear"]["rate"].clone());
            }
            ("chain", _) => {
                let key = format!(
                    "({},{})",
                    v["spec"]["hx"].as_f64().unwrap_or(f64::NAN),
                    v["spec"]["hy"].as_f64().unwrap_or(f64::NAN)
                );
                chain.insert(key, v["verdict"].clone());
            }
            ("metric" | "curvature" | "jacobi" | "ige" | "geodesic", _) => {
                other.push(json!({ "path": path, "kind": kind, "summary": v }));
            }
            _ => {
                return Err(CliError::validation(
                    "inputs",
                    format!("{} is not an igac run summary", path.display()),
                ))
            }
        }
    }
    let mut out = Map::new();
    out.insert("kind".into(), Value::from("report"));
    out.extend(manifolds);
    out.insert("chain".into(), Value::Object(chain));
    out.insert("other".into(), Value::Array(other));
    out.insert("inputs".into(), json!(inputs));
    Ok(Value::Object(out))
}
