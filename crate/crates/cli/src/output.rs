use serde_json::{json, Value};

use crate::cli::Format;

pub const SCHEMA_LINE: &str = "# mtlab-schema v1";

/// Result of one subcommand before rendering.
pub struct Outcome {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
    pub results: Value,
    /// Preformatted text used for csv/table output instead of `rows`.
    pub text: Option<String>,
    pub default_format: Format,
}

impl Outcome {
    pub fn table(columns: Vec<&'static str>, rows: Vec<Vec<String>>, results: Value) -> Self {
        Self {
            columns,
            rows,
            results,
            text: None,
            default_format: Format::Csv,
        }
    }

    pub fn json(results: Value) -> Self {
        Self {
            columns: Vec::new(),
            rows: Vec::new(),
            results,
            text: None,
            default_format: Format::Json,
        }
    }
}

/// Shortest round-trip representation, so equal inputs give equal bytes.
pub fn num(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else if x.is_infinite() {
        if x > 0.0 { "inf" } else { "-inf" }.into()
    } else {
        format!("{x:e}")
    }
}

/// JSON cannot carry non-finite numbers; they are written as strings.
pub fn jnum(x: f64) -> Value {
    if x.is_finite() {
        json!(x)
    } else {
        json!(num(x))
    }
}

pub fn render(out: &Outcome, format: Format, command: &str, config: &Value) -> String {
    match format {
        Format::Json => {
            let report = json!({
                "tool": "mtlab",
                "version": env!("CARGO_PKG_VERSION"),
                "command": command,
                "config": config,
                "results": out.results,
            });
            let mut s = serde_json::to_string_pretty(&report).expect("serializable report");
            s.push('\n');
            s
        }
        Format::Csv => match &out.text {
            Some(t) => t.clone(),
            None => {
                let mut s = format!("{SCHEMA_LINE}\n{}\n", out.columns.join(","));
                for r in &out.rows {
                    s.push_str(&r.join(","));
                    s.push('\n');
                }
                s
            }
        },
        Format::Table => match &out.text {
            Some(t) => {
                let mut lines = t.lines().filter(|l| !l.starts_with('#') && !l.is_empty());
                let head: Vec<&str> = lines.next().map(|h| h.split(',').collect()).unwrap_or_default();
                let rows: Vec<Vec<String>> = lines.map(|l| l.split(',').map(str::to_string).collect()).collect();
                aligned(&head, &rows)
            }
            None => aligned(&out.columns, &out.rows),
        },
    }
}

fn aligned(columns: &[&str], rows: &[Vec<String>]) -> String {
    let mut width: Vec<usize> = columns.iter().map(|c| c.len()).collect();
    for r in rows {
        for (w, c) in width.iter_mut().zip(r) {
            *w = (*w).max(c.len());
        }
    }
    let line = |cells: Vec<&str>| {
        let mut s = cells
            .iter()
            .zip(&width)
            .map(|(c, w)| format!("{c:>w$}"))
            .collect::<Vec<_>>()
            .join("  ");
        s.push('\n');
        s
    };
    let mut s = line(columns.to_vec());
    for r in rows {
        s.push_str(&line(r.iter().map(String::as_str).collect()));
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_has_schema_line() {
        let o = Outcome::table(vec!["a", "b"], vec![vec!["1".into(), "2".into()]], json!([]));
        assert_eq!(render(&o, Format::Csv, "x", &json!({})), "# mtlab-schema v1\na,b\n1,2\n");
        assert_eq!(render(&o, Format::Table, "x", &json!({})), "a  b\n1  2\n");
    }

    #[test]
    fn numbers_round_trip() {
        for x in [0.1, 1.0 / 3.0, -2.5e-17, 1e300] {
            assert_eq!(num(x).parse::<f64>().unwrap(), x);
        }
        assert_eq!(jnum(f64::INFINITY), json!("inf"));
    }
}
