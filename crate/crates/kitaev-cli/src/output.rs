//! Deterministic CSV and JSON writers: fixed float formatting, fixed row
//! order, and the config echo as the first header line.

use std::io::Write;
use std::path::Path;

use anyhow::Context;

use crate::config::ScanConfig;

/// Floats in CSV carry 12 significant digits.
pub fn fmt_float(x: f64) -> String {
    format!("{x:.11e}")
}

pub fn fmt_bool(b: bool) -> String {
    if b { "true" } else { "false" }.to_string()
}

/// Assembles a CSV document: config echo, column header, then the rows.
pub fn csv_document(cfg: &ScanConfig, columns: &[&str], rows: &[Vec<String>]) -> String {
    let mut out = String::new();
    out.push_str(&format!("# config = {}\n", cfg.echo()));
    out.push_str(&columns.join(","));
    out.push('\n');
    for row in rows {
        debug_assert_eq!(row.len(), columns.len());
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

/// Assembles a JSON document with the config as its first field.
pub fn json_document(cfg: &ScanConfig, payload: serde_json::Value) -> String {
    let mut doc = serde_json::Map::new();
    doc.insert("config".to_string(), serde_json::to_value(cfg).expect("config serializes"));
    if let serde_json::Value::Object(map) = payload {
        for (k, v) in map {
            doc.insert(k, v);
        }
    } else {
        doc.insert("result".to_string(), payload);
    }
    let mut text = serde_json::to_string_pretty(&serde_json::Value::Object(doc))
        .expect("JSON document serializes");
    text.push('\n');
    text
}

/// Writes to the configured path, or stdout when none is set.
pub fn emit(cfg: &ScanConfig, text: &str) -> anyhow::Result<()> {
    match &cfg.out {
        Some(path) => write_file(path, text),
        None => {
            std::io::stdout()
                .write_all(text.as_bytes())
                .context("writing to stdout")?;
            Ok(())
        }
    }
}

fn write_file(path: &Path, text: &str) -> anyhow::Result<()> {
    std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::Mode;

    #[test]
    fn twelve_significant_digits() {
        assert_eq!(fmt_float(1.0), "1.00000000000e0");
        assert_eq!(fmt_float(-0.125), "-1.25000000000e-1");
        assert_eq!(fmt_float(1.0 / 3.0), "3.33333333333e-1");
    }

    #[test]
    fn csv_layout() {
        let cfg = ScanConfig::new(Mode::EdGap);
        let doc = csv_document(
            &cfg,
            &["a", "b"],
            &[vec!["1".into(), "2".into()], vec!["3".into(), "4".into()]],
        );
        let mut lines = doc.lines();
        assert!(lines.next().unwrap().starts_with("# config = "));
        assert_eq!(lines.next().unwrap(), "a,b");
        assert_eq!(lines.next().unwrap(), "1,2");
    }
}
