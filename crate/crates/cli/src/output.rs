//! Report envelopes and their JSON and CSV renderings.

use std::fs;
use std::io::Write;

use oneshot_rsp::rsp::fmt_sig;
use serde::{Serialize, Serializer};
use serde_json::Value;

use crate::config::{Format, RunConfig};
use crate::CliError;

/// Header of the generic CSV rendering.
pub const CSV_HEADER: &str = "quantity,value,epsilon";

/// One scalar of a report.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Quantity {
    pub quantity: String,
    #[serde(serialize_with = "extended_real")]
    pub value: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
}

impl Quantity {
    pub fn new(quantity: impl Into<String>, value: f64, epsilon: Option<f64>) -> Self {
        Self {
            quantity: quantity.into(),
            value,
            epsilon,
        }
    }
}

/// Finite values as numbers, infinities and NaN as the strings `inf`, `-inf`, `nan`.
pub fn extended_real<S: Serializer>(x: &f64, s: S) -> Result<S::Ok, S::Error> {
    if x.is_finite() {
        s.serialize_f64(*x)
    } else {
        s.serialize_str(&fmt_sig(*x))
    }
}

/// A command's result before rendering.
pub struct Outcome {
    pub report: Value,
    /// CSV body; when absent the report is flattened into `quantity,value,epsilon` rows.
    pub csv: Option<String>,
    /// Every assertion of the report holds.
    pub ok: bool,
}

impl Outcome {
    pub fn new(report: impl Serialize, ok: bool) -> Result<Self, CliError> {
        Ok(Self {
            report: to_value(report)?,
            csv: None,
            ok,
        })
    }
}

pub fn to_value(v: impl Serialize) -> Result<Value, CliError> {
    serde_json::to_value(v).map_err(|e| CliError::Io(format!("cannot serialize report: {e}")))
}

#[derive(Serialize)]
struct Envelope<'a> {
    version: &'static str,
    config: &'a RunConfig,
    report: &'a Value,
}

/// `quantity,value,epsilon` rows from the rows themselves.
pub fn csv_from_quantities(rows: &[Quantity]) -> String {
    let mut out = format!("{CSV_HEADER}\n");
    for q in rows {
        let eps = q.epsilon.map(fmt_sig).unwrap_or_default();
        out.push_str(&format!("{},{},{}\n", q.quantity, fmt_sig(q.value), eps));
    }
    out
}

/// Numeric and boolean leaves of `value` as rows named by their JSON path.
pub fn flatten(value: &Value, epsilon: Option<f64>) -> Vec<Quantity> {
    fn walk(v: &Value, path: &str, eps: Option<f64>, out: &mut Vec<Quantity>) {
        let join = |k: &str| {
            if path.is_empty() {
                k.to_string()
            } else {
                format!("{path}.{k}")
            }
        };
        match v {
            Value::Number(n) => out.push(Quantity::new(path, n.as_f64().unwrap_or(f64::NAN), eps)),
            Value::Bool(b) => out.push(Quantity::new(path, f64::from(u8::from(*b)), eps)),
            Value::String(s) => {
                if let Some(x) = match s.as_str() {
                    "inf" => Some(f64::INFINITY),
                    "-inf" => Some(f64::NEG_INFINITY),
                    _ => None,
                } {
                    out.push(Quantity::new(path, x, eps));
                }
            }
            Value::Array(items) => {
                for (i, item) in items.iter().enumerate() {
                    walk(item, &join(&i.to_string()), eps, out);
                }
            }
            Value::Object(map) => {
                for (k, item) in map {
                    walk(item, &join(k), eps, out);
                }
            }
            Value::Null => {}
        }
    }
    let mut out = Vec::new();
    walk(value, "", epsilon, &mut out);
    out
}

/// Render the outcome in the configured format.
pub fn render(config: &RunConfig, outcome: &Outcome) -> Result<String, CliError> {
    match config.format {
        Format::Json => {
            let env = Envelope {
                version: oneshot_rsp::VERSION,
                config,
                report: &outcome.report,
            };
            let mut text = serde_json::to_string_pretty(&env)
                .map_err(|e| CliError::Io(format!("cannot serialize report: {e}")))?;
            text.push('\n');
            Ok(text)
        }
        Format::Csv => Ok(match &outcome.csv {
            Some(csv) => csv.clone(),
            None => csv_from_quantities(&flatten(&outcome.report, config.epsilon)),
        }),
    }
}

/// Write `text` to the configured output, or standard output.
pub fn emit(config: &RunConfig, text: &str) -> Result<(), CliError> {
    match &config.out {
        Some(path) => fs::write(path, text).map_err(|e| CliError::Io(format!("cannot write {}: {e}", path.display()))),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(text.as_bytes())
                .and_then(|_| stdout.flush())
                .map_err(|e| CliError::Io(format!("cannot write to standard output: {e}")))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn flatten_names_leaves_by_path() {
        let rows = flatten(&json!({"a": {"b": [1.5, true]}, "c": "x", "d": "inf"}), None);
        let names: Vec<_> = rows.iter().map(|q| q.quantity.as_str()).collect();
        assert_eq!(names, ["a.b.0", "a.b.1", "d"]);
        assert_eq!(rows[1].value, 1.0);
        assert_eq!(rows[2].value, f64::INFINITY);
    }

    #[test]
    fn csv_has_fixed_header_and_twelve_digits() {
        let text = csv_from_quantities(&[Quantity::new("holevo", 1.0 / 3.0, Some(0.1))]);
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some(CSV_HEADER));
        assert_eq!(lines.next(), Some("holevo,3.33333333333e-1,1.00000000000e-1"));
    }

    #[test]
    fn infinities_serialize_as_strings() {
        let q = Quantity::new("d_max", f64::INFINITY, None);
        assert_eq!(
            serde_json::to_string(&q).unwrap(),
            r#"{"quantity":"d_max","value":"inf"}"#
        );
    }
}
